//! Bit-accurate simulation of hybrid temporal computing (HTC) arithmetic.
//!
//! Numbers are `N`-bit codes ([`FixedPoint`]) carried on `2^N`-cycle
//! bitstreams. A regulated stream of one operand is ANDed (unipolar) or
//! XNORed (bipolar) with a temporal stream of the other; a MUX driven by an
//! LFSR scales the sum of several products, and a counter turns the result
//! back into binary. The crate also models the two deterministic baselines
//! (CBSC and unary), error and switching-activity benchmarks, and FIR and DCT
//! image pipelines built on each design.
//!
//! ```
//! use htc_core::{htc_multiply, decode, FixedPoint, Polarity, Rational};
//!
//! let a = FixedPoint::unipolar(3, 6).unwrap();
//! let b = FixedPoint::unipolar(3, 5).unwrap();
//! let product = htc_multiply(a, b, Polarity::Unipolar).unwrap();
//! assert_eq!(product.to_string(), "11101000");
//! assert_eq!(decode(&product), Rational::new(1, 2));
//! ```

pub mod apps;
pub mod baselines;
pub mod encodings;
pub mod error;
pub mod htc_arith;
pub mod metrics;

/// Exact rational used for every decoded value and dot product.
pub type Rational = num_rational::Ratio<i64>;

pub use apps::dct::{dct_roundtrip, DctResult, DctSpec};
pub use apps::fir::{fir_apply, FirMode, FirSpec};
pub use apps::image::{pgm_read, pgm_write, GrayImage, PgmError};
pub use apps::Datapath;
pub use baselines::{cbsc_mac, cbsc_multiply, unary_mac, UnaryMacResult, UnaryStream};
pub use encodings::{
    decode, encode_rb, encode_tb, Bitstream, FixedPoint, Format, LfsrState, Polarity,
};
pub use error::{HtcError, Result};
pub use htc_arith::{htc_dot, htc_mac, htc_multiply, MacConfig, MacResult, MacUnit, Selector};
pub use metrics::{BenchConfig, Design, ErrorStats, ImageQuality};
