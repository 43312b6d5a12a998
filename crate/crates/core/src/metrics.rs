//! Accuracy benchmarks, exhaustive multiplier sweeps, switching activity and
//! image quality.
//!
//! MAC errors are reported in percent of the unit range of a single operand
//! product, i.e. `100 * (estimate - exact)` for dot products whose terms lie in
//! `[0, 1)` (unipolar) or `[-1, 1)` (bipolar).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::apps::image::GrayImage;
use crate::baselines::{
    cbsc_mac, cbsc_multiply, cbsc_multiply_bipolar, unary_mac, unary_multiply, UnaryStream,
};
use crate::encodings::{decode, rb_bit, FixedPoint, Format, LfsrState, Polarity};
use crate::error::{HtcError, Result};
use crate::htc_arith::{htc_mac, htc_multiply, MacConfig, MacUnit, Selector, WireTrace};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Design {
    Htc,
    Cbsc,
    Unary,
}

impl Design {
    pub const ALL: [Design; 3] = [Design::Htc, Design::Cbsc, Design::Unary];

    pub fn name(&self) -> &'static str {
        match self {
            Design::Htc => "htc",
            Design::Cbsc => "cbsc",
            Design::Unary => "unary",
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Design {
    type Err = HtcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "htc" => Ok(Design::Htc),
            "cbsc" => Ok(Design::Cbsc),
            "unary" => Ok(Design::Unary),
            other => Err(HtcError::Config(format!("unknown design `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub rmse_pct: f64,
    pub sde_pct: f64,
    /// Mean signed error in value units.
    pub mean_err: f64,
    pub max_abs_err: f64,
    pub trials: usize,
}

impl ErrorStats {
    /// Folds errors in slice order so results do not depend on how they were
    /// produced.
    pub fn from_errors(errors: &[f64]) -> Self {
        let n = errors.len().max(1) as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let mean_sq = errors.iter().map(|e| e * e).sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
        Self {
            rmse_pct: 100.0 * mean_sq.sqrt(),
            sde_pct: 100.0 * var.sqrt(),
            mean_err: mean,
            max_abs_err: errors.iter().fold(0.0, |m, e| m.max(e.abs())),
            trials: errors.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub design: Design,
    pub bits: u8,
    pub fan_in: usize,
    pub trials: usize,
    pub seed: u64,
    pub polarity: Polarity,
    pub lfsr: LfsrState,
    /// Unary base stream length; `None` means `2^N`.
    pub unary_len: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            design: Design::Htc,
            bits: 8,
            fan_in: 4,
            trials: 100_000,
            seed: 42,
            polarity: Polarity::Unipolar,
            lfsr: LfsrState::default(),
            unary_len: None,
        }
    }
}

impl BenchConfig {
    pub fn mac_config(&self) -> Result<MacConfig> {
        MacConfig::new(
            self.bits,
            self.fan_in,
            self.polarity,
            Selector::Lfsr(self.lfsr),
        )
    }
}

/// One MAC input: coefficient codes and data codes, `K` each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacVector {
    pub b: Vec<u32>,
    pub c: Vec<u32>,
}

/// Uniform draws over the representable codes from a seeded ChaCha8 stream.
pub fn draw_vectors(cfg: &BenchConfig) -> Vec<MacVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let epoch = 1u32 << cfg.bits;
    (0..cfg.trials)
        .map(|_| {
            let b = (0..cfg.fan_in)
                .map(|_| rng.random_range(0..epoch))
                .collect();
            let c = (0..cfg.fan_in)
                .map(|_| rng.random_range(0..epoch))
                .collect();
            MacVector { b, c }
        })
        .collect()
}

/// Evaluates one design on one vector pair.
pub struct MacEvaluator {
    cfg: BenchConfig,
    unit: Option<MacUnit>,
}

impl MacEvaluator {
    pub fn new(cfg: BenchConfig) -> Result<Self> {
        let mac = cfg.mac_config()?;
        if cfg.design == Design::Unary && cfg.polarity == Polarity::Bipolar {
            return Err(HtcError::Config(
                "the unary design only supports unipolar data".into(),
            ));
        }
        let unit = (cfg.design == Design::Htc).then(|| MacUnit::new(mac));
        Ok(Self { cfg, unit })
    }

    fn operands(&self, codes: &[u32]) -> Result<Vec<FixedPoint>> {
        codes
            .iter()
            .map(|&code| FixedPoint::new(self.cfg.bits, code, self.cfg.polarity))
            .collect()
    }

    /// Returns `(design output, exact dot product)`.
    pub fn evaluate(&self, v: &MacVector) -> Result<(Rational, Rational)> {
        let b = self.operands(&v.b)?;
        let c = self.operands(&v.c)?;
        if b.len() != self.cfg.fan_in || c.len() != self.cfg.fan_in {
            return Err(HtcError::DimensionMismatch {
                expected: self.cfg.fan_in,
                found: b.len().min(c.len()),
            });
        }
        let exact = b
            .iter()
            .zip(&c)
            .map(|(x, y)| x.value() * y.value())
            .sum::<Rational>();
        let out = match self.cfg.design {
            Design::Htc => self.unit.as_ref().expect("htc unit").mac(&b, &c)?,
            Design::Cbsc => cbsc_mac(&b, &c, self.cfg.polarity)?,
            Design::Unary => {
                let len = self.cfg.unary_len.unwrap_or(1 << self.cfg.bits);
                unary_mac(&b, &c, len)?.value
            }
        };
        Ok((out, exact))
    }
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Error statistics over caller-supplied vectors.
pub fn mac_errors_on(cfg: &BenchConfig, vectors: &[MacVector]) -> Result<ErrorStats> {
    let eval = MacEvaluator::new(*cfg)?;
    let errors = vectors
        .par_iter()
        .map(|v| eval.evaluate(v).map(|(out, exact)| to_f64(out - exact)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ErrorStats::from_errors(&errors))
}

pub fn mac_error_bench(cfg: &BenchConfig) -> Result<ErrorStats> {
    if cfg.trials == 0 {
        return Err(HtcError::Config("trials must be at least 1".into()));
    }
    mac_errors_on(cfg, &draw_vectors(cfg))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulRow {
    /// Regulated (coefficient) operand code.
    pub a: u32,
    /// Temporal (window) operand code.
    pub b: u32,
    pub product: Rational,
    pub exact: Rational,
}

impl MulRow {
    pub fn error(&self) -> Rational {
        self.product - self.exact
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulSweep {
    pub design: Design,
    pub bits: u8,
    pub polarity: Polarity,
    pub rows: Vec<MulRow>,
}

impl MulSweep {
    pub fn stats(&self) -> ErrorStats {
        let errors: Vec<f64> = self.rows.iter().map(|r| to_f64(r.error())).collect();
        ErrorStats::from_errors(&errors)
    }

    pub fn max_abs_error(&self) -> Rational {
        self.rows
            .iter()
            .map(|r| {
                let e = r.error();
                if e < Rational::from_integer(0) {
                    -e
                } else {
                    e
                }
            })
            .max()
            .unwrap_or_else(|| Rational::from_integer(0))
    }
}

/// Every `(a, b)` code pair in row-major order of `a`.
pub fn exhaustive_mul_error(design: Design, bits: u8, polarity: Polarity) -> Result<MulSweep> {
    if bits > 10 {
        return Err(HtcError::Config(format!(
            "exhaustive sweep limited to 10 bits, got {bits}"
        )));
    }
    FixedPoint::zero(bits, polarity)?;
    if design == Design::Unary && polarity == Polarity::Bipolar {
        return Err(HtcError::Config(
            "the unary design only supports unipolar data".into(),
        ));
    }
    let epoch = 1u32 << bits;
    let rows = (0..epoch * epoch)
        .into_par_iter()
        .map(|idx| {
            let a = FixedPoint::new(bits, idx / epoch, polarity)?;
            let b = FixedPoint::new(bits, idx % epoch, polarity)?;
            let product = match (design, polarity) {
                (Design::Htc, _) => decode(&htc_multiply(a, b, polarity)?),
                (Design::Cbsc, Polarity::Unipolar) => cbsc_multiply(b, a)?.value(),
                (Design::Cbsc, Polarity::Bipolar) => cbsc_multiply_bipolar(b, a)?,
                (Design::Unary, _) => {
                    let len = epoch as usize;
                    unary_multiply(&UnaryStream::encode(a, len)?, &UnaryStream::encode(b, len)?)
                        .value()
                }
            };
            Ok(MulRow {
                a: a.code(),
                b: b.code(),
                product,
                exact: a.value() * b.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MulSweep {
        design,
        bits,
        polarity,
        rows,
    })
}

/// Level changes along a wire that idles low before and after the epoch.
pub fn transitions(bits: &BitSlice<u64, Lsb0>) -> u64 {
    let mut count = 0u64;
    let mut prev = 0u64;
    if bits.is_empty() {
        return 0;
    }
    for chunk in bits.chunks(64) {
        let word: u64 = chunk.load_le();
        let n = chunk.len();
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let shifted = (word << 1) | prev;
        count += ((word ^ shifted) & mask).count_ones() as u64;
        prev = (word >> (n - 1)) & 1;
    }
    count + prev
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireActivity {
    pub name: String,
    pub format: Option<Format>,
    pub cycles: usize,
    pub transitions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityReport {
    pub wires: Vec<WireActivity>,
    pub total: u64,
}

impl ActivityReport {
    pub fn wire(&self, name: &str) -> Option<&WireActivity> {
        self.wires.iter().find(|w| w.name == name)
    }

    pub fn total_for(&self, format: Option<Format>) -> u64 {
        self.wires
            .iter()
            .filter(|w| w.format == format)
            .map(|w| w.transitions)
            .sum()
    }
}

pub fn switching_activity(traces: &[WireTrace]) -> Result<ActivityReport> {
    if traces.is_empty() {
        return Err(HtcError::Config("no wires to measure".into()));
    }
    let wires: Vec<WireActivity> = traces
        .iter()
        .map(|t| WireActivity {
            name: t.name.clone(),
            format: t.format,
            cycles: t.bits.len(),
            transitions: transitions(&t.bits),
        })
        .collect();
    let total = wires.iter().map(|w| w.transitions).sum();
    Ok(ActivityReport { wires, total })
}

/// Wire traces of the CBSC MAC: each regulated generator gated by its down
/// counter, plus the counter's enable window.
pub fn cbsc_traces(b: &[FixedPoint], c: &[FixedPoint]) -> Vec<WireTrace> {
    let mut traces = Vec::with_capacity(2 * b.len());
    for (i, (bi, ci)) in b.iter().zip(c).enumerate() {
        let epoch = bi.epoch();
        let window = ci.code() as usize;
        traces.push(WireTrace {
            name: format!("win{i}"),
            format: Some(Format::Temporal),
            bits: (0..epoch).map(|t| t < window).collect(),
        });
        traces.push(WireTrace {
            name: format!("sng{i}"),
            format: Some(Format::General),
            bits: (0..epoch)
                .map(|t| t < window && rb_bit(bi.code(), bi.bits(), t))
                .collect(),
        });
    }
    traces
}

/// Wire traces of the Unary MAC: product streams after their delays and the
/// OR output.
pub fn unary_traces(b: &[FixedPoint], c: &[FixedPoint], base_len: usize) -> Result<Vec<WireTrace>> {
    let len = base_len * base_len;
    let delays = crate::baselines::default_delays(len, b.len());
    let mut products = Vec::with_capacity(b.len());
    let mut traces = Vec::with_capacity(b.len() + 1);
    for (i, ((&bi, &ci), d)) in b.iter().zip(c).zip(&delays).enumerate() {
        let p = unary_multiply(
            &UnaryStream::encode(bi, base_len)?,
            &UnaryStream::encode(ci, base_len)?,
        );
        traces.push(WireTrace {
            name: format!("prod{i}"),
            format: Some(Format::General),
            bits: crate::baselines::rotated(p.as_bits(), *d),
        });
        products.push(p);
    }
    let or = crate::baselines::unary_add_or(&products, &delays)?;
    traces.push(WireTrace {
        name: "or".into(),
        format: Some(Format::General),
        bits: or.as_bits().to_bitvec(),
    });
    Ok(traces)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySummary {
    pub design: Design,
    pub evaluations: usize,
    /// Totals keyed by `TB`, `RB`, `GB` or `ctl`.
    pub by_class: BTreeMap<&'static str, u64>,
    pub total: u64,
    /// HTC only: transitions on the re-timed output and on the MUX output.
    pub out_tb: u64,
    pub mux: u64,
    /// Largest transition count seen on any single temporal wire.
    pub max_temporal: u64,
}

/// Transition counts over `cfg.trials` random MAC evaluations.
pub fn activity_bench(cfg: &BenchConfig) -> Result<ActivitySummary> {
    let mac = cfg.mac_config()?;
    let vectors = draw_vectors(cfg);
    let operands = |codes: &[u32]| -> Result<Vec<FixedPoint>> {
        codes
            .iter()
            .map(|&code| FixedPoint::new(cfg.bits, code, cfg.polarity))
            .collect()
    };
    let reports = vectors
        .par_iter()
        .map(|v| {
            let b = operands(&v.b)?;
            let c = operands(&v.c)?;
            let traces = match cfg.design {
                Design::Htc => htc_mac(&b, &c, &mac)?.trace,
                Design::Cbsc => cbsc_traces(&b, &c),
                Design::Unary => unary_traces(&b, &c, cfg.unary_len.unwrap_or(1 << cfg.bits))?,
            };
            switching_activity(&traces)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = ActivitySummary {
        design: cfg.design,
        evaluations: reports.len(),
        by_class: BTreeMap::new(),
        total: 0,
        out_tb: 0,
        mux: 0,
        max_temporal: 0,
    };
    for report in &reports {
        for wire in &report.wires {
            let class = wire.format.map_or("ctl", |f| f.short_name());
            *summary.by_class.entry(class).or_default() += wire.transitions;
            if wire.format == Some(Format::Temporal) {
                summary.max_temporal = summary.max_temporal.max(wire.transitions);
            }
        }
        summary.total += report.total;
        summary.out_tb += report.wire("out_tb").map_or(0, |w| w.transitions);
        summary.mux += report.wire("mux").map_or(0, |w| w.transitions);
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageQuality {
    pub psnr_db: f64,
    /// RMSE with intensities normalized to `[0, 1]`.
    pub rmse: f64,
}

pub fn image_metrics(a: &GrayImage, b: &GrayImage) -> Result<ImageQuality> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(HtcError::ImageSizeMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    if a.data().is_empty() {
        return Err(HtcError::EmptyImage);
    }
    let sum_sq: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = (x as f64 - y as f64) / 255.0;
            d * d
        })
        .sum();
    let rmse = (sum_sq / a.data().len() as f64).sqrt();
    let psnr_db = if rmse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (1.0 / rmse).log10()
    };
    Ok(ImageQuality { psnr_db, rmse })
}
