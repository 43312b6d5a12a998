//! HTC multiply, MUX scaled addition, counting accumulation and the K-input MAC.
//!
//! [`htc_mac`] is the reference model: it materializes every wire for one
//! epoch and returns the traces. [`MacUnit`] evaluates the same circuit with
//! precomputed word masks and is what the benchmarks and image pipelines use;
//! the two are checked against each other in tests.

use std::sync::Arc;

use crate::encodings::{
    encode_rb, encode_tb, gb_to_tb, rb_bit, Bits, Bitstream, FixedPoint, Format, LfsrState,
    Polarity,
};
use crate::error::{HtcError, Result};
use crate::Rational;

/// Source of the MUX select lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    /// The LFSR is clocked once per cycle and its low `log2 K` state bits
    /// drive the select lines.
    Lfsr(LfsrState),
    /// `sel(t) = t mod K`.
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacConfig {
    bits: u8,
    fan_in: usize,
    polarity: Polarity,
    selector: Selector,
}

impl MacConfig {
    pub fn new(bits: u8, fan_in: usize, polarity: Polarity, selector: Selector) -> Result<Self> {
        FixedPoint::zero(bits, polarity)?;
        if !fan_in.is_power_of_two() || !(2..=16).contains(&fan_in) {
            return Err(HtcError::InvalidFanIn(fan_in));
        }
        if let Selector::Lfsr(lfsr) = selector {
            if (lfsr.width() as u32) < fan_in.trailing_zeros() {
                return Err(HtcError::InvalidLfsr(format!(
                    "width {} cannot drive {} select lines",
                    lfsr.width(),
                    fan_in.trailing_zeros()
                )));
            }
        }
        Ok(Self {
            bits,
            fan_in,
            polarity,
            selector,
        })
    }

    /// `N = 8`, `K = 4`, default LFSR.
    pub fn standard(polarity: Polarity) -> Self {
        Self::new(8, 4, polarity, Selector::Lfsr(LfsrState::default()))
            .expect("default configuration is valid")
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn selector(&self) -> Selector {
        self.selector
    }

    pub fn epoch(&self) -> usize {
        1 << self.bits
    }

    pub fn select_width(&self) -> u32 {
        self.fan_in.trailing_zeros()
    }

    pub fn with_selector(self, selector: Selector) -> Result<Self> {
        Self::new(self.bits, self.fan_in, self.polarity, selector)
    }

    /// The MUX select value for every cycle of one epoch.
    pub fn selector_sequence(&self) -> Vec<usize> {
        let mask = self.fan_in - 1;
        match self.selector {
            Selector::RoundRobin => (0..self.epoch()).map(|t| t & mask).collect(),
            Selector::Lfsr(mut lfsr) => (0..self.epoch())
                .map(|_| {
                    lfsr = lfsr.next().1;
                    lfsr.state() as usize & mask
                })
                .collect(),
        }
    }

    fn check_operand(&self, x: &FixedPoint) -> Result<()> {
        if x.bits() != self.bits {
            return Err(HtcError::WidthMismatch(self.bits, x.bits()));
        }
        if x.polarity() != self.polarity {
            return Err(HtcError::PolarityMismatch {
                expected: self.polarity,
                found: x.polarity(),
            });
        }
        Ok(())
    }
}

/// A named, cycle-indexed wire recorded during one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireTrace {
    pub name: String,
    /// `None` for control wires such as the select lines.
    pub format: Option<Format>,
    pub bits: Bits,
}

impl WireTrace {
    fn stream(name: impl Into<String>, bs: &Bitstream) -> Self {
        Self {
            name: name.into(),
            format: Some(bs.format()),
            bits: bs.as_bits().to_bitvec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacResult {
    /// Accumulator output, a multiple of `1 / 2^N`.
    pub binary_sum: Rational,
    /// MUX output re-timed into a temporal window for the next stage.
    pub out_tb: Bitstream,
    pub trace: Vec<WireTrace>,
}

/// `a` drives the regulated generator and `b` the temporal one; AND for
/// unipolar, XNOR for bipolar. Bipolar codes are already offset codes, so the
/// TB operand needs no further conversion.
pub fn htc_multiply(a: FixedPoint, b: FixedPoint, polarity: Polarity) -> Result<Bitstream> {
    if a.bits() != b.bits() {
        return Err(HtcError::WidthMismatch(a.bits(), b.bits()));
    }
    for x in [a, b] {
        if x.polarity() != polarity {
            return Err(HtcError::PolarityMismatch {
                expected: polarity,
                found: x.polarity(),
            });
        }
    }
    let mut bits = encode_rb(a).into_bits();
    let tb = encode_tb(b);
    match polarity {
        Polarity::Unipolar => bits &= tb.as_bits(),
        Polarity::Bipolar => {
            bits ^= tb.as_bits();
            bits = !bits;
        }
    }
    Bitstream::from_bits(bits, Format::General, polarity)
}

fn check_inputs(inputs: &[Bitstream], cfg: &MacConfig) -> Result<()> {
    if inputs.len() != cfg.fan_in {
        return Err(HtcError::DimensionMismatch {
            expected: cfg.fan_in,
            found: inputs.len(),
        });
    }
    for bs in inputs {
        if bs.len() != cfg.epoch() {
            return Err(HtcError::LengthMismatch {
                expected: cfg.epoch(),
                found: bs.len(),
            });
        }
    }
    Ok(())
}

/// K-to-1 MUX driven by the configured selector.
pub fn scaled_add(inputs: &[Bitstream], cfg: &MacConfig) -> Result<Bitstream> {
    check_inputs(inputs, cfg)?;
    let bits = cfg
        .selector_sequence()
        .into_iter()
        .enumerate()
        .map(|(t, sel)| inputs[sel].get(t))
        .collect();
    Bitstream::from_bits(bits, Format::General, cfg.polarity)
}

/// Counting accumulator: the ones count shifted left by `log2 K` and read in
/// units of `1 / 2^N`; bipolar results are recentred with `K (2p - 1)`.
pub fn accumulate(bs: &Bitstream, cfg: &MacConfig) -> Rational {
    sum_from_ones(bs.count_ones() as i64, cfg)
}

fn sum_from_ones(ones: i64, cfg: &MacConfig) -> Rational {
    let epoch = cfg.epoch() as i64;
    let shifted = ones << cfg.select_width();
    match cfg.polarity {
        Polarity::Unipolar => Rational::new(shifted, epoch),
        Polarity::Bipolar => Rational::new(2 * shifted - cfg.fan_in as i64 * epoch, epoch),
    }
}

fn check_vectors(
    b: &[FixedPoint],
    c: &[FixedPoint],
    expected: usize,
    cfg: &MacConfig,
) -> Result<()> {
    for len in [b.len(), c.len()] {
        if len != expected {
            return Err(HtcError::DimensionMismatch {
                expected,
                found: len,
            });
        }
    }
    b.iter().chain(c).try_for_each(|x| cfg.check_operand(x))
}

/// Coefficients `b` take the regulated role, data `c` the temporal role.
pub fn htc_mac(b: &[FixedPoint], c: &[FixedPoint], cfg: &MacConfig) -> Result<MacResult> {
    check_vectors(b, c, cfg.fan_in, cfg)?;
    let mut trace = Vec::with_capacity(4 * cfg.fan_in + cfg.select_width() as usize + 2);
    let mut products = Vec::with_capacity(cfg.fan_in);
    for (i, (&bi, &ci)) in b.iter().zip(c).enumerate() {
        trace.push(WireTrace::stream(format!("rb{i}"), &encode_rb(bi)));
        trace.push(WireTrace::stream(format!("tb{i}"), &encode_tb(ci)));
        let product = htc_multiply(bi, ci, cfg.polarity)?;
        trace.push(WireTrace::stream(format!("mul{i}"), &product));
        products.push(product);
    }
    let select = cfg.selector_sequence();
    for line in 0..cfg.select_width() {
        trace.push(WireTrace {
            name: format!("sel{line}"),
            format: None,
            bits: select.iter().map(|s| s >> line & 1 == 1).collect(),
        });
    }
    let mux = scaled_add(&products, cfg)?;
    let out_tb = gb_to_tb(&mux);
    trace.push(WireTrace::stream("mux", &mux));
    trace.push(WireTrace::stream("out_tb", &out_tb));
    Ok(MacResult {
        binary_sum: accumulate(&mux, cfg),
        out_tb,
        trace,
    })
}

fn pad_to_fan_in(
    b: &[FixedPoint],
    c: &[FixedPoint],
    cfg: &MacConfig,
) -> Result<(Vec<FixedPoint>, Vec<FixedPoint>)> {
    if b.is_empty() || b.len() != c.len() {
        return Err(HtcError::DimensionMismatch {
            expected: b.len().max(1),
            found: c.len(),
        });
    }
    let padded = b.len().div_ceil(cfg.fan_in) * cfg.fan_in;
    let zero = FixedPoint::zero(cfg.bits, cfg.polarity)?;
    let mut bp = b.to_vec();
    let mut cp = c.to_vec();
    bp.resize(padded, zero);
    cp.resize(padded, zero);
    Ok((bp, cp))
}

/// Dot product of any length: zero-padded to a multiple of `K`, one MAC per
/// chunk, chunk results added exactly in binary.
pub fn htc_dot(b: &[FixedPoint], c: &[FixedPoint], cfg: &MacConfig) -> Result<Rational> {
    let (bp, cp) = pad_to_fan_in(b, c, cfg)?;
    bp.chunks(cfg.fan_in)
        .zip(cp.chunks(cfg.fan_in))
        .try_fold(Rational::from_integer(0), |acc, (bc, cc)| {
            Ok(acc + htc_mac(bc, cc, cfg)?.binary_sum)
        })
}

/// Word-parallel evaluation of the MAC for a fixed configuration.
///
/// Bit-exact with [`htc_mac`]; only the MUX ones count is computed.
#[derive(Debug, Clone)]
pub struct MacUnit {
    cfg: MacConfig,
    words: usize,
    tail_mask: u64,
    /// `words` regulated words per code.
    rb: Arc<Vec<u64>>,
    /// `words` select-mask words per MUX input.
    select: Vec<u64>,
}

impl MacUnit {
    pub fn new(cfg: MacConfig) -> Self {
        let epoch = cfg.epoch();
        let words = epoch.div_ceil(64);
        let tail_mask = if epoch.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << epoch) - 1
        };
        let mut rb = vec![0u64; words * epoch];
        for code in 0..epoch {
            for t in 0..epoch {
                if rb_bit(code as u32, cfg.bits, t) {
                    rb[code * words + t / 64] |= 1 << (t % 64);
                }
            }
        }
        Self {
            cfg,
            words,
            tail_mask,
            rb: Arc::new(rb),
            select: Self::select_masks(&cfg, words),
        }
    }

    fn select_masks(cfg: &MacConfig, words: usize) -> Vec<u64> {
        let mut select = vec![0u64; words * cfg.fan_in];
        for (t, sel) in cfg.selector_sequence().into_iter().enumerate() {
            select[sel * words + t / 64] |= 1 << (t % 64);
        }
        select
    }

    /// Same unit with a different select source; the regulated table is shared.
    pub fn with_selector(&self, selector: Selector) -> Result<Self> {
        let cfg = self.cfg.with_selector(selector)?;
        Ok(Self {
            cfg,
            words: self.words,
            tail_mask: self.tail_mask,
            rb: Arc::clone(&self.rb),
            select: Self::select_masks(&cfg, self.words),
        })
    }

    pub fn config(&self) -> &MacConfig {
        &self.cfg
    }

    #[inline]
    fn tb_word(&self, code: usize, word: usize) -> u64 {
        let start = word * 64;
        let word_mask = if word + 1 == self.words {
            self.tail_mask
        } else {
            u64::MAX
        };
        if code <= start {
            0
        } else if code >= start + 64 {
            word_mask
        } else {
            (1u64 << (code - start)) - 1
        }
    }

    /// Ones emitted by the MUX for one K-wide group of raw codes.
    pub fn mux_ones(&self, b_codes: &[u32], c_codes: &[u32]) -> u32 {
        debug_assert_eq!(b_codes.len(), self.cfg.fan_in);
        debug_assert_eq!(c_codes.len(), self.cfg.fan_in);
        let mut ones = 0;
        for (i, (&bc, &cc)) in b_codes.iter().zip(c_codes).enumerate() {
            let rb = &self.rb[bc as usize * self.words..][..self.words];
            let sel = &self.select[i * self.words..][..self.words];
            for w in 0..self.words {
                let tb = self.tb_word(cc as usize, w);
                let product = match self.cfg.polarity {
                    Polarity::Unipolar => rb[w] & tb,
                    Polarity::Bipolar => !(rb[w] ^ tb),
                };
                ones += (product & sel[w]).count_ones();
            }
        }
        ones
    }

    /// Same result as `htc_mac(b, c).binary_sum`.
    pub fn mac(&self, b: &[FixedPoint], c: &[FixedPoint]) -> Result<Rational> {
        check_vectors(b, c, self.cfg.fan_in, &self.cfg)?;
        let bc: Vec<u32> = b.iter().map(FixedPoint::code).collect();
        let cc: Vec<u32> = c.iter().map(FixedPoint::code).collect();
        Ok(self.mac_codes(&bc, &cc))
    }

    pub fn mac_codes(&self, b_codes: &[u32], c_codes: &[u32]) -> Rational {
        sum_from_ones(self.mux_ones(b_codes, c_codes) as i64, &self.cfg)
    }

    /// Same result as [`htc_dot`].
    pub fn dot(&self, b: &[FixedPoint], c: &[FixedPoint]) -> Result<Rational> {
        let (bp, cp) = pad_to_fan_in(b, c, &self.cfg)?;
        bp.chunks(self.cfg.fan_in)
            .zip(cp.chunks(self.cfg.fan_in))
            .try_fold(Rational::from_integer(0), |acc, (bc, cc)| {
                Ok(acc + self.mac(bc, cc)?)
            })
    }
}
