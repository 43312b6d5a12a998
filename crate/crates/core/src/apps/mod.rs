//! Image accelerators built on the MAC designs: a 6-tap Gaussian FIR blur and
//! an 8-point DCT/IDCT round trip.

pub mod dct;
pub mod fir;
pub mod image;

use std::fmt;
use std::str::FromStr;

use crate::baselines::{cbsc_mac, unary_mac};
use crate::encodings::FixedPoint;
use crate::error::{HtcError, Result};
use crate::htc_arith::MacUnit;
use crate::metrics::Design;
use crate::Rational;

/// Arithmetic behind an accelerator's dot products. `Exact` is the
/// real-arithmetic reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Datapath {
    Htc,
    Cbsc,
    Unary,
    Exact,
}

impl From<Design> for Datapath {
    fn from(d: Design) -> Self {
        match d {
            Design::Htc => Datapath::Htc,
            Design::Cbsc => Datapath::Cbsc,
            Design::Unary => Datapath::Unary,
        }
    }
}

impl fmt::Display for Datapath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Datapath::Htc => "htc",
            Datapath::Cbsc => "cbsc",
            Datapath::Unary => "unary",
            Datapath::Exact => "exact",
        })
    }
}

impl FromStr for Datapath {
    type Err = HtcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "oracle" => Ok(Datapath::Exact),
            other => other.parse::<Design>().map(Datapath::from),
        }
    }
}

/// A ready-to-run dot product for one datapath.
pub(crate) enum DotEngine {
    Htc(MacUnit),
    Cbsc,
    Unary { base_len: usize },
    Exact,
}

impl DotEngine {
    /// `b` are coefficients, `c` data; both already share width and polarity.
    pub(crate) fn dot(&self, b: &[FixedPoint], c: &[FixedPoint]) -> Result<Rational> {
        match self {
            DotEngine::Htc(unit) => unit.dot(b, c),
            DotEngine::Cbsc => cbsc_mac(b, c, b[0].polarity()),
            DotEngine::Unary { base_len } => Ok(unary_mac(b, c, *base_len)?.value),
            DotEngine::Exact => Ok(b.iter().zip(c).map(|(x, y)| x.value() * y.value()).sum()),
        }
    }
}

pub(crate) fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
