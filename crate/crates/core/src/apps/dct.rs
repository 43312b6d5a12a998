//! 8x8 block DCT-II followed by the inverse transform.
//!
//! Each block goes through four separable 8-point passes (forward rows,
//! forward columns, inverse columns, inverse rows). Between passes the
//! coefficients are rescaled so they stay inside the bipolar range and are
//! requantized to 8 bits with saturation.

use rayon::prelude::*;

use super::image::GrayImage;
use super::{rational_to_f64, Datapath, DotEngine};
use crate::encodings::{FixedPoint, LfsrState, Polarity};
use crate::error::{HtcError, Result};
use crate::htc_arith::{MacConfig, MacUnit, Selector};
use crate::metrics::{image_metrics, ImageQuality};

pub const BLOCK: usize = 8;
const BITS: u8 = 8;
/// Factor applied to the output of each pass. The product is one, so the
/// round trip is unscaled.
pub const PASS_SCALES: [f64; 4] = [0.25, 0.5, 2.0, 4.0];

/// Orthonormal DCT-II matrix, `C[k][m]`.
pub fn dct8_matrix() -> [[f64; BLOCK]; BLOCK] {
    let mut c = [[0.0; BLOCK]; BLOCK];
    for (k, row) in c.iter_mut().enumerate() {
        let alpha = if k == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
        for (m, v) in row.iter_mut().enumerate() {
            let angle = (2 * m + 1) as f64 * k as f64 * std::f64::consts::PI / 16.0;
            *v = alpha * (2.0 / BLOCK as f64).sqrt() * angle.cos();
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct DctSpec {
    /// `coeffs[k][m]` quantizes `C[k][m]` as an 8-bit bipolar number.
    pub coeffs: [[FixedPoint; BLOCK]; BLOCK],
    pub datapath: Datapath,
    /// Selector for the HTC MACs. Block `i` (raster order) restarts the
    /// register from the `i`-th successor seed, see [`block_seed`].
    pub lfsr: LfsrState,
}

impl DctSpec {
    pub fn new(datapath: Datapath) -> Result<Self> {
        if datapath == Datapath::Unary {
            return Err(HtcError::Config(
                "the unary design is unipolar only and cannot run the DCT".into(),
            ));
        }
        let real = dct8_matrix();
        let zero = FixedPoint::zero(BITS, Polarity::Bipolar)?;
        let mut coeffs = [[zero; BLOCK]; BLOCK];
        for (qrow, row) in coeffs.iter_mut().zip(&real) {
            for (q, &v) in qrow.iter_mut().zip(row) {
                *q = FixedPoint::quantize(BITS, v, Polarity::Bipolar)?;
            }
        }
        Ok(Self {
            coeffs,
            datapath,
            lfsr: LfsrState::default(),
        })
    }

    pub fn with_lfsr(mut self, lfsr: LfsrState) -> Self {
        self.lfsr = lfsr;
        self
    }
}

/// Seed used for block `index`: walks the nonzero states `1..2^w` starting
/// from the configured seed.
pub fn block_seed(lfsr: &LfsrState, index: usize) -> u32 {
    let period = (1u64 << lfsr.width()) - 1;
    let base = lfsr.state() as u64 - 1;
    (1 + (base + index as u64) % period) as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct DctResult {
    pub image: GrayImage,
    pub quality: ImageQuality,
}

/// Separable 2D forward transform of one row-major block.
pub fn dct2_block(block: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
    let c = dct8_matrix();
    transform2(block, |k, m| c[k][m])
}

pub fn idct2_block(coeffs: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
    let c = dct8_matrix();
    transform2(coeffs, |m, k| c[k][m])
}

fn transform2(input: &[f64; 64], a: impl Fn(usize, usize) -> f64) -> [f64; 64] {
    let mut tmp = [0.0; 64];
    for r in 0..BLOCK {
        for k in 0..BLOCK {
            tmp[r * BLOCK + k] = (0..BLOCK).map(|m| a(k, m) * input[r * BLOCK + m]).sum();
        }
    }
    let mut out = [0.0; 64];
    for col in 0..BLOCK {
        for k in 0..BLOCK {
            out[k * BLOCK + col] = (0..BLOCK).map(|m| a(k, m) * tmp[m * BLOCK + col]).sum();
        }
    }
    out
}

/// Edge-replicated copy with both sides rounded up to a multiple of 8.
fn pad_to_blocks(img: &GrayImage) -> Result<GrayImage> {
    let w = img.width().div_ceil(BLOCK) * BLOCK;
    let h = img.height().div_ceil(BLOCK) * BLOCK;
    GrayImage::from_fn(w, h, |x, y| img.get_clamped(x as isize, y as isize))
}

fn pixel(v: f64) -> u8 {
    (v * 128.0 + 128.0).round().clamp(0.0, 255.0) as u8
}

/// Real-arithmetic round trip of one block; only the final pixels are rounded.
fn oracle_block(pixels: &[u8; 64]) -> [u8; 64] {
    let x = pixels.map(|p| (p as f64 - 128.0) / 128.0);
    idct2_block(&dct2_block(&x)).map(pixel)
}

struct BlockEngine<'a> {
    spec: &'a DctSpec,
    engine: DotEngine,
}

impl BlockEngine<'_> {
    /// One 8-point pass over the rows of `data` (row-major), writing the
    /// transposed result so the next pass again runs over rows.
    fn pass(
        &self,
        data: &[FixedPoint; 64],
        inverse: bool,
        scale: f64,
    ) -> Result<([FixedPoint; 64], [f64; 64])> {
        let zero = FixedPoint::zero(BITS, Polarity::Bipolar)?;
        let mut q = [zero; 64];
        let mut real = [0.0; 64];
        let mut coeff = [zero; BLOCK];
        for r in 0..BLOCK {
            let row = &data[r * BLOCK..][..BLOCK];
            for k in 0..BLOCK {
                for (m, slot) in coeff.iter_mut().enumerate() {
                    *slot = if inverse {
                        self.spec.coeffs[m][k]
                    } else {
                        self.spec.coeffs[k][m]
                    };
                }
                let v = rational_to_f64(self.engine.dot(&coeff, row)?) * scale;
                real[k * BLOCK + r] = v;
                q[k * BLOCK + r] = FixedPoint::quantize(BITS, v, Polarity::Bipolar)?;
            }
        }
        Ok((q, real))
    }

    fn run(&self, pixels: &[u8; 64]) -> Result<[u8; 64]> {
        let mut data = [FixedPoint::zero(BITS, Polarity::Bipolar)?; 64];
        for (d, &p) in data.iter_mut().zip(pixels) {
            // (p - 128) / 128 is exactly bipolar code p.
            *d = FixedPoint::bipolar(BITS, p as u32)?;
        }
        // Two transposing passes per direction leave the block in row-major
        // order again.
        let (d, _) = self.pass(&data, false, PASS_SCALES[0])?;
        let (d, _) = self.pass(&d, false, PASS_SCALES[1])?;
        let (d, _) = self.pass(&d, true, PASS_SCALES[2])?;
        let (_, real) = self.pass(&d, true, PASS_SCALES[3])?;
        Ok(real.map(pixel))
    }
}

/// Compresses and reconstructs `img` block by block with the chosen
/// datapath, then scores the result against the input. `Datapath::Exact`
/// uses the unquantized matrix in double precision.
pub fn dct_roundtrip(img: &GrayImage, spec: &DctSpec) -> Result<DctResult> {
    let padded = pad_to_blocks(img)?;
    let bw = padded.width() / BLOCK;
    let bh = padded.height() / BLOCK;
    let base = match spec.datapath {
        Datapath::Htc => Some(MacUnit::new(MacConfig::new(
            BITS,
            4,
            Polarity::Bipolar,
            Selector::Lfsr(spec.lfsr),
        )?)),
        _ => None,
    };
    let blocks: Vec<[u8; 64]> = (0..bw * bh)
        .into_par_iter()
        .map(|index| -> Result<[u8; 64]> {
            let (bx, by) = (index % bw, index / bw);
            let mut pixels = [0u8; 64];
            for (i, p) in pixels.iter_mut().enumerate() {
                *p = padded.get(bx * BLOCK + i % BLOCK, by * BLOCK + i / BLOCK);
            }
            let engine = match (spec.datapath, &base) {
                (Datapath::Exact, _) => return Ok(oracle_block(&pixels)),
                (Datapath::Htc, Some(unit)) => {
                    let seed = block_seed(&spec.lfsr, index);
                    DotEngine::Htc(unit.with_selector(Selector::Lfsr(spec.lfsr.with_seed(seed)?))?)
                }
                (Datapath::Cbsc, _) => DotEngine::Cbsc,
                (other, _) => return Err(HtcError::Config(format!("no DCT datapath for {other}"))),
            };
            BlockEngine { spec, engine }.run(&pixels)
        })
        .collect::<Result<_>>()?;
    let image = GrayImage::from_fn(img.width(), img.height(), |x, y| {
        blocks[(y / BLOCK) * bw + x / BLOCK][(y % BLOCK) * BLOCK + x % BLOCK]
    })?;
    let quality = image_metrics(img, &image)?;
    Ok(DctResult { image, quality })
}
