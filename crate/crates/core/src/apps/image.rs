//! 8-bit grayscale rasters and PGM (P2/P5) serialization.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::error::{HtcError, Result};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a PGM file (magic {0:?})")]
    BadMagic(String),
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("maxval {0} is outside 1..=255")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(HtcError::EmptyImage);
        }
        if data.len() != width * height {
            return Err(HtcError::DimensionMismatch {
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Edge-replicating access for out-of-range coordinates.
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0; self.data.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                data[x * self.height + y] = self.get(x, y);
            }
        }
        Self {
            width: self.height,
            height: self.width,
            data,
        }
    }

    /// Top-left `width x height` window.
    pub fn crop(&self, width: usize, height: usize) -> Result<Self> {
        if width > self.width || height > self.height {
            return Err(HtcError::ImageSizeMismatch(
                width,
                height,
                self.width,
                self.height,
            ));
        }
        Self::from_fn(width, height, |x, y| self.get(x, y))
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&[u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, field: &str) -> Result<u32, PgmError> {
        let tok = self
            .token()
            .ok_or_else(|| PgmError::MalformedHeader(format!("missing {field}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                PgmError::MalformedHeader(format!(
                    "{field} `{}` is not a number",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Parses a P2 or P5 image. Samples are rescaled to `0..=255` when maxval is
/// smaller than 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let magic = bytes.get(..2).unwrap_or(bytes);
    let ascii = match magic {
        b"P2" => true,
        b"P5" => false,
        other => return Err(PgmError::BadMagic(String::from_utf8_lossy(other).into())),
    };
    let mut rd = HeaderReader { bytes, pos: 2 };
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    let maxval = rd.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if !(1..=255).contains(&maxval) {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let expected = width * height;
    let mut samples = Vec::with_capacity(expected);
    if ascii {
        while samples.len() < expected {
            let Some(tok) = rd.token() else { break };
            let value: u32 = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    PgmError::MalformedHeader(format!(
                        "sample `{}` is not a number",
                        String::from_utf8_lossy(tok)
                    ))
                })?;
            samples.push(value);
        }
    } else {
        // Exactly one whitespace byte separates maxval from the raster.
        match bytes.get(rd.pos) {
            Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
            _ => {
                return Err(PgmError::MalformedHeader(
                    "missing separator before raster".into(),
                ))
            }
        }
        samples.extend(bytes[rd.pos..].iter().take(expected).map(|&b| b as u32));
    }
    if samples.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            found: samples.len(),
        });
    }
    let data = samples
        .into_iter()
        .map(|v| {
            if v > maxval {
                Err(PgmError::SampleOutOfRange { value: v, maxval })
            } else {
                Ok(((v * 255 + maxval / 2) / maxval) as u8)
            }
        })
        .collect::<Result<Vec<u8>, _>>()?;
    Ok(GrayImage {
        width,
        height,
        data,
    })
}

/// Binary (P5) encoding with maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn pgm_read(path: impl AsRef<Path>) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(PgmError::Io)?;
    Ok(decode_pgm(&bytes)?)
}

pub fn pgm_write(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path).map_err(PgmError::Io)?;
    file.write_all(&encode_pgm(img)).map_err(PgmError::Io)?;
    Ok(())
}
