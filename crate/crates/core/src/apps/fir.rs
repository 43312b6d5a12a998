//! 6-tap Gaussian blur.

use rayon::prelude::*;

use super::image::GrayImage;
use super::{rational_to_f64, Datapath, DotEngine};
use crate::encodings::{FixedPoint, LfsrState, Polarity};
use crate::error::{HtcError, Result};
use crate::htc_arith::{MacConfig, MacUnit, Selector};

pub const TAPS: usize = 6;
/// Dot products are evaluated over the taps zero-padded to this length.
pub const PADDED_TAPS: usize = 8;
/// Output sample `x` is aligned with tap index 2, i.e. reads inputs
/// `x - 2 ..= x + 3`.
pub const ALIGN: isize = 2;
const BITS: u8 = 8;

/// Binomial kernel `[1, 5, 10, 10, 5, 1] / 32`.
pub fn gaussian6_taps() -> [f64; TAPS] {
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0].map(|w| w / 32.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirMode {
    /// Rows, then columns.
    #[default]
    Separable,
    RowsOnly,
}

impl std::str::FromStr for FirMode {
    type Err = HtcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "separable" | "2d" => Ok(FirMode::Separable),
            "rows" | "rows-only" | "1d" => Ok(FirMode::RowsOnly),
            other => Err(HtcError::Config(format!("unknown FIR mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirSpec {
    pub taps: [FixedPoint; TAPS],
    pub datapath: Datapath,
    pub mode: FirMode,
    pub lfsr: LfsrState,
}

impl FirSpec {
    /// Quantized Gaussian taps with the default selector.
    pub fn new(datapath: Datapath) -> Result<Self> {
        Self::with_taps(&gaussian6_taps(), datapath)
    }

    /// Quantizes real taps to 8-bit unipolar codes. The quantized kernel must
    /// not sum above one.
    pub fn with_taps(taps: &[f64], datapath: Datapath) -> Result<Self> {
        if taps.len() != TAPS {
            return Err(HtcError::DimensionMismatch {
                expected: TAPS,
                found: taps.len(),
            });
        }
        let mut q = [FixedPoint::zero(BITS, Polarity::Unipolar)?; TAPS];
        for (slot, &t) in q.iter_mut().zip(taps) {
            if !(0.0..1.0).contains(&t) {
                return Err(HtcError::Config(format!("tap {t} outside [0, 1)")));
            }
            *slot = FixedPoint::quantize(BITS, t, Polarity::Unipolar)?;
        }
        let sum: u32 = q.iter().map(FixedPoint::code).sum();
        if sum > 1 << BITS {
            return Err(HtcError::Config(format!(
                "quantized taps sum to {sum}/256, above one"
            )));
        }
        Ok(Self {
            taps: q,
            datapath,
            mode: FirMode::default(),
            lfsr: LfsrState::default(),
        })
    }

    pub fn with_mode(mut self, mode: FirMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_lfsr(mut self, lfsr: LfsrState) -> Self {
        self.lfsr = lfsr;
        self
    }

    fn engine(&self) -> Result<DotEngine> {
        Ok(match self.datapath {
            Datapath::Htc => DotEngine::Htc(MacUnit::new(MacConfig::new(
                BITS,
                4,
                Polarity::Unipolar,
                Selector::Lfsr(self.lfsr),
            )?)),
            Datapath::Cbsc => DotEngine::Cbsc,
            Datapath::Unary => DotEngine::Unary {
                base_len: 1 << BITS,
            },
            Datapath::Exact => DotEngine::Exact,
        })
    }
}

fn filter_rows(img: &GrayImage, spec: &FirSpec, engine: &DotEngine) -> Result<GrayImage> {
    let width = img.width();
    let zero = FixedPoint::zero(BITS, Polarity::Unipolar)?;
    let mut taps = [zero; PADDED_TAPS];
    taps[..TAPS].copy_from_slice(&spec.taps);
    let mut out = vec![0u8; img.data().len()];
    out.par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(y, row)| -> Result<()> {
            let mut window = [zero; PADDED_TAPS];
            for (x, px) in row.iter_mut().enumerate() {
                for (k, slot) in window[..TAPS].iter_mut().enumerate() {
                    let v = img.get_clamped(x as isize + k as isize - ALIGN, y as isize);
                    *slot = FixedPoint::unipolar(BITS, v as u32)?;
                }
                let value = rational_to_f64(engine.dot(&taps, &window)?);
                *px = (value * 256.0).round().clamp(0.0, 255.0) as u8;
            }
            Ok(())
        })?;
    GrayImage::new(width, img.height(), out)
}

/// Blurs `img` with every output sample computed by the selected datapath.
/// Borders replicate the edge pixels.
pub fn fir_apply(img: &GrayImage, spec: &FirSpec) -> Result<GrayImage> {
    if img.data().is_empty() {
        return Err(HtcError::EmptyImage);
    }
    let engine = spec.engine()?;
    let rows = filter_rows(img, spec, &engine)?;
    match spec.mode {
        FirMode::RowsOnly => Ok(rows),
        FirMode::Separable => Ok(filter_rows(&rows.transpose(), spec, &engine)?.transpose()),
    }
}

/// Double-precision blur with the unquantized kernel, used as an alternative
/// PSNR reference that isolates computation error.
pub fn fir_reference(img: &GrayImage, taps: &[f64; TAPS], mode: FirMode) -> Result<GrayImage> {
    let pass = |src: &[f64], width: usize, height: usize| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for y in 0..height {
            for x in 0..width {
                out[y * width + x] = taps
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let xi = (x as isize + k as isize - ALIGN).clamp(0, width as isize - 1);
                        t * src[y * width + xi as usize]
                    })
                    .sum();
            }
        }
        out
    };
    let (w, h) = (img.width(), img.height());
    let src: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let rows = pass(&src, w, h);
    let result = match mode {
        FirMode::RowsOnly => rows,
        FirMode::Separable => {
            let mut t = vec![0.0; rows.len()];
            for y in 0..h {
                for x in 0..w {
                    t[x * h + y] = rows[y * w + x];
                }
            }
            let cols = pass(&t, h, w);
            let mut back = vec![0.0; cols.len()];
            for y in 0..h {
                for x in 0..w {
                    back[y * w + x] = cols[x * h + y];
                }
            }
            back
        }
    };
    GrayImage::new(
        w,
        h,
        result
            .into_iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tap_quantization() {
        let taps = gaussian6_taps();
        assert_eq!(taps.iter().sum::<f64>(), 1.0);
        let spec = FirSpec::new(Datapath::Exact).unwrap();
        let codes: Vec<u32> = spec.taps.iter().map(FixedPoint::code).collect();
        assert_eq!(codes, vec![8, 40, 80, 80, 40, 8]);
    }

    #[test]
    fn rejects_bad_kernels() {
        assert!(FirSpec::with_taps(&[0.5; 6], Datapath::Exact).is_err());
        assert!(FirSpec::with_taps(&[0.1; 5], Datapath::Exact).is_err());
        assert!(FirSpec::with_taps(&[-0.1, 0.0, 0.0, 0.0, 0.0, 0.0], Datapath::Exact).is_err());
    }

    #[test]
    fn constant_image_is_fixed_by_exact_path() {
        for v in [0u8, 1, 77, 128, 255] {
            let img = GrayImage::from_fn(9, 7, |_, _| v).unwrap();
            let spec = FirSpec::new(Datapath::Exact).unwrap();
            assert_eq!(fir_apply(&img, &spec).unwrap(), img);
        }
    }

    #[test]
    fn impulse_response_is_the_kernel() {
        let img = GrayImage::from_fn(12, 1, |x, _| if x == 5 { 128 } else { 0 }).unwrap();
        let spec = FirSpec::new(Datapath::Exact)
            .unwrap()
            .with_mode(FirMode::RowsOnly);
        let out = fir_apply(&img, &spec).unwrap();
        // Output x reads inputs x-2..=x+3, so the impulse at 5 lands on 2..=7
        // with the kernel reversed.
        assert_eq!(&out.data()[2..8], &[4, 20, 40, 40, 20, 4]);
        assert!(out.data()[..2]
            .iter()
            .chain(&out.data()[8..])
            .all(|&p| p == 0));
    }

    #[test]
    fn reference_matches_exact_on_smooth_input() {
        let img = GrayImage::from_fn(16, 16, |x, y| (8 * x + 4 * y) as u8).unwrap();
        let exact = fir_apply(&img, &FirSpec::new(Datapath::Exact).unwrap()).unwrap();
        let reference = fir_reference(&img, &gaussian6_taps(), FirMode::Separable).unwrap();
        let worst = exact
            .data()
            .iter()
            .zip(reference.data())
            .map(|(&a, &b)| (a as i32 - b as i32).abs())
            .max()
            .unwrap();
        assert!(worst <= 1, "worst {worst}");
    }

    #[test]
    fn designs_run_on_small_image() {
        let img = GrayImage::from_fn(10, 6, |x, y| ((x * 37 + y * 91) % 256) as u8).unwrap();
        for dp in [Datapath::Htc, Datapath::Cbsc, Datapath::Unary] {
            let out = fir_apply(&img, &FirSpec::new(dp).unwrap()).unwrap();
            assert_eq!((out.width(), out.height()), (10, 6));
        }
    }
}
