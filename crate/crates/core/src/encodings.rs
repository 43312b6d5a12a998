//! Quantized operands and the three bitstream formats.
//!
//! A [`FixedPoint`] is an `N`-bit code `n` read either as `n / 2^N` (unipolar)
//! or `2n / 2^N - 1` (bipolar). Streams are exactly one epoch (`2^N` cycles)
//! long and are tagged with the format they were produced in:
//!
//! * temporal (TB): the ones form a contiguous prefix, i.e. a time window;
//! * regulated (RB): every binary digit of the code is spread evenly over the
//!   epoch with multiplicity equal to its weight;
//! * general (GB): any stream whose value is its density of ones.

use std::fmt;

use bitvec::prelude::*;

use crate::error::{HtcError, Result};
use crate::Rational;

pub const MAX_BITS: u8 = 16;

pub type Bits = BitVec<u64, Lsb0>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Unipolar,
    Bipolar,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Unipolar => "unipolar",
            Polarity::Bipolar => "bipolar",
        })
    }
}

impl std::str::FromStr for Polarity {
    type Err = HtcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unipolar" | "uni" => Ok(Polarity::Unipolar),
            "bipolar" | "bi" => Ok(Polarity::Bipolar),
            other => Err(HtcError::Config(format!("unknown polarity `{other}`"))),
        }
    }
}

fn check_bits(bits: u8) -> Result<()> {
    if (1..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(HtcError::InvalidBitWidth(bits))
    }
}

/// An `N`-bit quantized number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPoint {
    bits: u8,
    code: u32,
    polarity: Polarity,
}

impl FixedPoint {
    pub fn new(bits: u8, code: u32, polarity: Polarity) -> Result<Self> {
        check_bits(bits)?;
        if code >> bits != 0 {
            return Err(HtcError::CodeOutOfRange { code, bits });
        }
        Ok(Self {
            bits,
            code,
            polarity,
        })
    }

    pub fn unipolar(bits: u8, code: u32) -> Result<Self> {
        Self::new(bits, code, Polarity::Unipolar)
    }

    pub fn bipolar(bits: u8, code: u32) -> Result<Self> {
        Self::new(bits, code, Polarity::Bipolar)
    }

    /// The code whose value is exactly zero: `0` for unipolar, `2^(N-1)` for bipolar.
    pub fn zero(bits: u8, polarity: Polarity) -> Result<Self> {
        check_bits(bits)?;
        let code = match polarity {
            Polarity::Unipolar => 0,
            Polarity::Bipolar => 1 << (bits - 1),
        };
        Ok(Self {
            bits,
            code,
            polarity,
        })
    }

    /// Round-to-nearest quantization of a real value, saturating at the ends
    /// of the representable range.
    pub fn quantize(bits: u8, value: f64, polarity: Polarity) -> Result<Self> {
        check_bits(bits)?;
        let epoch = (1u64 << bits) as f64;
        let raw = match polarity {
            Polarity::Unipolar => (value * epoch).round(),
            Polarity::Bipolar => ((value + 1.0) * epoch / 2.0).round(),
        };
        let code = if raw.is_nan() {
            0.0
        } else {
            raw.clamp(0.0, epoch - 1.0)
        };
        Ok(Self {
            bits,
            code: code as u32,
            polarity,
        })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// Number of cycles in one epoch, `2^N`.
    pub fn epoch(&self) -> usize {
        1 << self.bits
    }

    /// Two's complement reading of a bipolar code, `n - 2^(N-1)`.
    pub fn signed(&self) -> i32 {
        self.code as i32 - (1 << (self.bits - 1))
    }

    pub fn value(&self) -> Rational {
        let epoch = self.epoch() as i64;
        match self.polarity {
            Polarity::Unipolar => Rational::new(self.code as i64, epoch),
            Polarity::Bipolar => Rational::new(2 * self.code as i64 - epoch, epoch),
        }
    }

    pub fn to_f64(&self) -> f64 {
        let epoch = self.epoch() as f64;
        match self.polarity {
            Polarity::Unipolar => self.code as f64 / epoch,
            Polarity::Bipolar => 2.0 * self.code as f64 / epoch - 1.0,
        }
    }
}

/// Maps a signed two's complement value onto the bipolar offset code by
/// flipping the sign bit, so that the density of ones is `(X + 1) / 2`.
pub fn signed_to_offset(signed: i32, bits: u8) -> Result<FixedPoint> {
    check_bits(bits)?;
    let half = 1i32 << (bits - 1);
    if !(-half..half).contains(&signed) {
        return Err(HtcError::SignedOutOfRange {
            value: signed,
            bits,
        });
    }
    FixedPoint::bipolar(bits, (signed + half) as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Temporal,
    Regulated,
    General,
}

impl Format {
    pub fn short_name(&self) -> &'static str {
        match self {
            Format::Temporal => "TB",
            Format::Regulated => "RB",
            Format::General => "GB",
        }
    }
}

/// One epoch of a bit-serial signal.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitstream {
    bits: Bits,
    format: Format,
    polarity: Polarity,
}

impl Bitstream {
    pub fn from_bits(bits: Bits, format: Format, polarity: Polarity) -> Result<Self> {
        let len = bits.len();
        if !len.is_power_of_two() || !(2..=1 << MAX_BITS).contains(&len) {
            return Err(HtcError::InvalidStreamLength(len));
        }
        Ok(Self {
            bits,
            format,
            polarity,
        })
    }

    /// Parses a `0`/`1` string such as `"11111110"`; other characters are
    /// rejected.
    pub fn parse(text: &str, format: Format, polarity: Polarity) -> Result<Self> {
        let mut bits = Bits::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(HtcError::Config(format!("invalid bit character `{ch}`"))),
            }
        }
        Self::from_bits(bits, format, polarity)
    }

    pub fn zeros(epoch: usize, format: Format, polarity: Polarity) -> Result<Self> {
        Self::from_bits(bitvec![u64, Lsb0; 0; epoch], format, polarity)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `N` such that the stream spans `2^N` cycles.
    pub fn width(&self) -> u8 {
        self.bits.len().trailing_zeros() as u8
    }

    pub fn get(&self, cycle: usize) -> bool {
        self.bits[cycle]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn as_bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    pub fn into_bits(self) -> Bits {
        self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().by_vals()
    }

    /// True when no `1` follows a `0`.
    pub fn is_temporal(&self) -> bool {
        let ones = self.count_ones();
        self.bits[..ones].all()
    }
}

impl fmt::Display for Bitstream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Bitstream({} {} {})",
            self.format.short_name(),
            self.polarity,
            self
        )
    }
}

/// Bit emitted by the regulated generator at zero-based `cycle` for an
/// `bits`-wide `code`.
///
/// The generator's counter runs `t = cycle + 1`; with `k` trailing zeros in
/// `t`, the output is digit `X_(N-1-k)` of the code, or `0` once `k >= N`.
/// Digit `X_i` therefore fires exactly `2^i` times, evenly spaced.
#[inline]
pub fn rb_bit(code: u32, bits: u8, cycle: usize) -> bool {
    let k = (cycle + 1).trailing_zeros();
    k < bits as u32 && (code >> (bits as u32 - 1 - k)) & 1 == 1
}

pub fn encode_tb(x: FixedPoint) -> Bitstream {
    let mut bits = bitvec![u64, Lsb0; 0; x.epoch()];
    bits[..x.code as usize].fill(true);
    Bitstream {
        bits,
        format: Format::Temporal,
        polarity: x.polarity,
    }
}

pub fn encode_rb(x: FixedPoint) -> Bitstream {
    let bits = (0..x.epoch())
        .map(|cycle| rb_bit(x.code, x.bits, cycle))
        .collect();
    Bitstream {
        bits,
        format: Format::Regulated,
        polarity: x.polarity,
    }
}

/// Value carried by a stream of any format.
pub fn decode(bs: &Bitstream) -> Rational {
    let len = bs.len() as i64;
    let ones = bs.count_ones() as i64;
    match bs.polarity {
        Polarity::Unipolar => Rational::new(ones, len),
        Polarity::Bipolar => Rational::new(2 * ones - len, len),
    }
}

/// Compacts the ones of a stream into a temporal prefix, as a shift register
/// collecting the stream would.
pub fn gb_to_tb(bs: &Bitstream) -> Bitstream {
    let mut bits = bitvec![u64, Lsb0; 0; bs.len()];
    bits[..bs.count_ones()].fill(true);
    Bitstream {
        bits,
        format: Format::Temporal,
        polarity: bs.polarity,
    }
}

/// Fibonacci linear feedback shift register.
///
/// Tap `k` reads state bit `width - k`, so tap `width` is the output (lowest)
/// bit and the taps `{8, 6, 5, 4}` realize `x^8 + x^6 + x^5 + x^4 + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LfsrState {
    width: u8,
    tap_mask: u32,
    state: u32,
}

pub const DEFAULT_LFSR_TAPS: [u8; 4] = [8, 6, 5, 4];
pub const DEFAULT_LFSR_SEED: u32 = 0x5A;

impl Default for LfsrState {
    fn default() -> Self {
        Self::new(8, &DEFAULT_LFSR_TAPS, DEFAULT_LFSR_SEED).expect("default LFSR is valid")
    }
}

impl LfsrState {
    pub fn new(width: u8, taps: &[u8], seed: u32) -> Result<Self> {
        if !(2..=32).contains(&width) {
            return Err(HtcError::InvalidLfsr(format!(
                "width {width} outside 2..=32"
            )));
        }
        if taps.is_empty() {
            return Err(HtcError::InvalidLfsr("no taps".into()));
        }
        let mut tap_mask = 0u32;
        for &tap in taps {
            if tap == 0 || tap > width {
                return Err(HtcError::InvalidLfsr(format!(
                    "tap {tap} outside 1..={width}"
                )));
            }
            tap_mask |= 1 << (width - tap);
        }
        if tap_mask & 1 == 0 {
            return Err(HtcError::InvalidLfsr(format!(
                "taps must include {width}, the output bit"
            )));
        }
        Self {
            width,
            tap_mask,
            state: 1,
        }
        .with_seed(seed)
    }

    pub fn with_seed(self, seed: u32) -> Result<Self> {
        let mask = self.state_mask();
        if seed == 0 || seed & !mask != 0 {
            return Err(HtcError::InvalidLfsr(format!(
                "seed {seed:#x} must be nonzero and below 2^{}",
                self.width
            )));
        }
        Ok(Self {
            state: seed,
            ..self
        })
    }

    fn state_mask(&self) -> u32 {
        if self.width == 32 {
            u32::MAX
        } else {
            (1 << self.width) - 1
        }
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn taps(&self) -> Vec<u8> {
        (1..=self.width)
            .rev()
            .filter(|&tap| self.tap_mask >> (self.width - tap) & 1 == 1)
            .collect()
    }

    /// One clock: returns the shifted-out bit and the successor state.
    pub fn next(self) -> (bool, Self) {
        let out = self.state & 1 == 1;
        let feedback = (self.state & self.tap_mask).count_ones() & 1;
        let state = (self.state >> 1) | (feedback << (self.width - 1));
        (out, Self { state, ..self })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(bits: u8, code: u32) -> FixedPoint {
        FixedPoint::unipolar(bits, code).unwrap()
    }

    #[test]
    fn tb_examples() {
        let x = FixedPoint::quantize(3, 0.75, Polarity::Bipolar).unwrap();
        assert_eq!(x.code(), 7);
        assert_eq!(encode_tb(x).to_string(), "11111110");
        assert_eq!(encode_tb(uni(3, 0)).to_string(), "00000000");
        assert_eq!(encode_tb(uni(3, 5)).to_string(), "11111000");
    }

    #[test]
    fn rb_examples() {
        assert_eq!(encode_rb(uni(3, 0b011)).to_string(), "01010100");
        assert_eq!(encode_rb(uni(3, 0b010)).to_string(), "01000100");
        assert_eq!(encode_rb(uni(3, 0b110)).to_string(), "11101110");
    }

    #[test]
    fn signed_offset_examples() {
        assert_eq!(signed_to_offset(-2, 3).unwrap().code(), 2);
        assert_eq!(signed_to_offset(0, 3).unwrap().code(), 4);
        assert_eq!(signed_to_offset(-3, 3).unwrap().code(), 1);
        assert!(matches!(
            signed_to_offset(4, 3),
            Err(HtcError::SignedOutOfRange { .. })
        ));
        assert!(signed_to_offset(-5, 3).is_err());
        let x = signed_to_offset(-2, 3).unwrap();
        assert_eq!(x.value(), Rational::new(-1, 2));
        assert_eq!(x.signed(), -2);
    }

    #[test]
    fn decode_examples() {
        let p = |s| Bitstream::parse(s, Format::General, Polarity::Unipolar).unwrap();
        assert_eq!(decode(&p("11111000")), Rational::new(5, 8));
        assert_eq!(decode(&p("01010100")), Rational::new(3, 8));
        let b = Bitstream::parse("11111110", Format::Temporal, Polarity::Bipolar).unwrap();
        assert_eq!(decode(&b), Rational::new(3, 4));
    }

    #[test]
    fn gb_to_tb_examples() {
        let p = |s| Bitstream::parse(s, Format::General, Polarity::Unipolar).unwrap();
        assert_eq!(gb_to_tb(&p("01010100")).to_string(), "11100000");
        assert_eq!(gb_to_tb(&p("00000000")).to_string(), "00000000");
        let tb = gb_to_tb(&p("10100110"));
        assert_eq!(tb.to_string(), "11110000");
        assert_eq!(tb.format(), Format::Temporal);
    }

    #[test]
    fn fixed_point_rejects_bad_input() {
        assert!(matches!(
            FixedPoint::unipolar(3, 8),
            Err(HtcError::CodeOutOfRange { .. })
        ));
        assert!(matches!(
            FixedPoint::unipolar(0, 0),
            Err(HtcError::InvalidBitWidth(0))
        ));
        assert!(FixedPoint::unipolar(17, 0).is_err());
        assert!(Bitstream::parse("101", Format::General, Polarity::Unipolar).is_err());
        assert!(Bitstream::parse("10x1", Format::General, Polarity::Unipolar).is_err());
    }

    #[test]
    fn quantize_saturates() {
        assert_eq!(
            FixedPoint::quantize(8, 1.5, Polarity::Unipolar)
                .unwrap()
                .code(),
            255
        );
        assert_eq!(
            FixedPoint::quantize(8, -3.0, Polarity::Bipolar)
                .unwrap()
                .code(),
            0
        );
        assert_eq!(
            FixedPoint::quantize(8, 1.0, Polarity::Bipolar)
                .unwrap()
                .code(),
            255
        );
        assert_eq!(
            FixedPoint::quantize(8, 0.0, Polarity::Bipolar)
                .unwrap()
                .code(),
            128
        );
    }

    #[test]
    fn lfsr_golden_step() {
        let lfsr = LfsrState::new(8, &[8, 6, 5, 4], 0x01).unwrap();
        let (bit, next) = lfsr.next();
        assert!(bit);
        assert_eq!(next.state(), 0x80);
        let (bit, next) = next.next();
        assert!(!bit);
        assert_eq!(next.state(), 0x40);
    }

    #[test]
    fn lfsr_maximal_periods() {
        for (width, taps) in [
            (4u8, vec![4u8, 3]),
            (8, vec![8, 6, 5, 4]),
            (10, vec![10, 7]),
            (16, vec![16, 14, 13, 11]),
        ] {
            let seed = LfsrState::new(width, &taps, 1).unwrap();
            let mut state = seed;
            let period = (1u32 << width) - 1;
            for step in 1..=period {
                state = state.next().1;
                assert_ne!(state.state(), 0);
                if step < period {
                    assert_ne!(state, seed, "short period {step} for width {width}");
                }
            }
            assert_eq!(state, seed);
        }
    }

    #[test]
    fn lfsr_validation() {
        assert!(LfsrState::new(8, &[8, 6, 5, 4], 0).is_err());
        assert!(LfsrState::new(8, &[8, 6, 5, 4], 0x100).is_err());
        assert!(LfsrState::new(8, &[9], 1).is_err());
        assert!(LfsrState::new(8, &[7, 5], 1).is_err());
        assert!(LfsrState::new(1, &[1], 1).is_err());
        assert_eq!(LfsrState::default().taps(), vec![8, 6, 5, 4]);
        assert_eq!(LfsrState::default().state(), 0x5A);
    }
}
