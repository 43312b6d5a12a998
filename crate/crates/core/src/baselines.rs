//! Comparison designs: counting-based SC (CBSC) and the deterministic
//! PWM-style "Unary" design.

use bitvec::prelude::*;

use crate::encodings::{rb_bit, Bits, FixedPoint, Polarity};
use crate::error::{HtcError, Result};
use crate::Rational;

fn check_pair(a: &FixedPoint, b: &FixedPoint, polarity: Polarity) -> Result<()> {
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
    Ok(())
}

/// CBSC multiplier: a down counter loaded with `w` gates a bit counter fed by
/// the FSM-driven regulated generator of `x`.
pub fn cbsc_multiply(w: FixedPoint, x: FixedPoint) -> Result<FixedPoint> {
    check_pair(&w, &x, Polarity::Unipolar)?;
    let mut remaining = w.code();
    let mut fsm = 0usize;
    let mut count = 0u32;
    while remaining > 0 {
        count += rb_bit(x.code(), x.bits(), fsm) as u32;
        fsm += 1;
        remaining -= 1;
    }
    FixedPoint::unipolar(x.bits(), count)
}

/// Bipolar CBSC built as sign-magnitude around the unipolar counting core.
/// Magnitudes are re-expressed as `N`-bit unipolar codes (saturating at the
/// single out-of-range magnitude, `-1`).
pub fn cbsc_multiply_bipolar(w: FixedPoint, x: FixedPoint) -> Result<Rational> {
    check_pair(&w, &x, Polarity::Bipolar)?;
    let bits = w.bits();
    let magnitude = |v: &FixedPoint| {
        let code = (2 * v.signed().unsigned_abs()).min((1 << bits) - 1);
        FixedPoint::unipolar(bits, code)
    };
    let product = cbsc_multiply(magnitude(&w)?, magnitude(&x)?)?;
    let sign = w.signed().signum() * x.signed().signum();
    Ok(Rational::new(
        sign as i64 * product.code() as i64,
        1i64 << bits,
    ))
}

/// Products summed exactly in binary. `b` feeds the regulated generator and
/// `c` loads the down counter, matching the operand roles of the HTC MAC.
pub fn cbsc_mac(b: &[FixedPoint], c: &[FixedPoint], polarity: Polarity) -> Result<Rational> {
    if b.len() != c.len() {
        return Err(HtcError::DimensionMismatch {
            expected: b.len(),
            found: c.len(),
        });
    }
    b.iter()
        .zip(c)
        .try_fold(Rational::from_integer(0), |acc, (&bi, &ci)| {
            let product = match polarity {
                Polarity::Unipolar => cbsc_multiply(ci, bi)?.value(),
                Polarity::Bipolar => cbsc_multiply_bipolar(ci, bi)?,
            };
            Ok(acc + product)
        })
}

/// Cycles a CBSC MAC spends: each multiplier runs for its window.
pub fn cbsc_latency(c: &[FixedPoint]) -> u64 {
    c.iter().map(|x| x.code() as u64).sum()
}

/// A PWM-style stream of arbitrary length whose value is its ones density.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryStream {
    bits: Bits,
}

impl UnaryStream {
    /// Duty-cycle encoding: `ones` ones followed by zeros.
    pub fn prefix(len: usize, ones: usize) -> Result<Self> {
        if len == 0 || ones > len {
            return Err(HtcError::Config(format!(
                "unary stream needs 1 <= len and ones <= len (len {len}, ones {ones})"
            )));
        }
        let mut bits = bitvec![u64, Lsb0; 0; len];
        bits[..ones].fill(true);
        Ok(Self { bits })
    }

    pub fn from_bits(bits: Bits) -> Result<Self> {
        if bits.is_empty() {
            return Err(HtcError::Config("unary stream must be non-empty".into()));
        }
        Ok(Self { bits })
    }

    /// Duty-cycle encoding of a unipolar operand over `len` cycles, rounding
    /// half up when `len` is not the operand's epoch.
    pub fn encode(x: FixedPoint, len: usize) -> Result<Self> {
        if x.polarity() != Polarity::Unipolar {
            return Err(HtcError::PolarityMismatch {
                expected: Polarity::Unipolar,
                found: x.polarity(),
            });
        }
        let half = 1u64 << (x.bits() - 1);
        let ones = (x.code() as u64 * len as u64 + half) >> x.bits();
        Self::prefix(len, ones as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn get(&self, t: usize) -> bool {
        self.bits[t]
    }

    pub fn as_bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    pub fn value(&self) -> Rational {
        Rational::new(self.count_ones() as i64, self.len() as i64)
    }
}

/// Clock-division multiply: `a` repeats once per bit of `b`, so the result
/// has `len(a) * len(b)` cycles and exactly `ones(a) * ones(b)` ones.
pub fn unary_multiply(a: &UnaryStream, b: &UnaryStream) -> UnaryStream {
    let mut bits = Bits::with_capacity(a.len() * b.len());
    let zeros = bitvec![u64, Lsb0; 0; a.len()];
    for outer in b.bits.iter().by_vals() {
        bits.extend_from_bitslice(if outer { &a.bits } else { &zeros });
    }
    UnaryStream { bits }
}

fn check_delays(delays: &[usize], len: usize) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for &d in delays {
        if !seen.insert(d % len) {
            return Err(HtcError::DuplicateDelay(d));
        }
    }
    Ok(())
}

/// `bits` delayed cyclically by `delay` cycles.
pub(crate) fn rotated(bits: &BitSlice<u64, Lsb0>, delay: usize) -> Bits {
    let len = bits.len();
    let split = len - delay % len.max(1);
    let mut out = Bits::with_capacity(len);
    out.extend_from_bitslice(&bits[split..]);
    out.extend_from_bitslice(&bits[..split]);
    out
}

/// OR summation of cyclically delayed streams.
pub fn unary_add_or(streams: &[UnaryStream], delays: &[usize]) -> Result<UnaryStream> {
    let Some(first) = streams.first() else {
        return Err(HtcError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    };
    if delays.len() != streams.len() {
        return Err(HtcError::DimensionMismatch {
            expected: streams.len(),
            found: delays.len(),
        });
    }
    let len = first.len();
    for s in streams {
        if s.len() != len {
            return Err(HtcError::LengthMismatch {
                expected: len,
                found: s.len(),
            });
        }
    }
    check_delays(delays, len)?;
    let mut out = bitvec![u64, Lsb0; 0; len];
    for (s, &d) in streams.iter().zip(delays) {
        out |= rotated(&s.bits, d);
    }
    Ok(UnaryStream { bits: out })
}

/// Largest ones count per stream for which OR summation of `summands`
/// streams of length `len` stays exact:
/// `floor(len / (ceil((sqrt(4N + 1) - 1) / 2) + 1))`.
pub fn unary_accuracy_bound(len: u64, summands: u64) -> u64 {
    // ceil((sqrt(4N+1) - 1) / 2) is the least k with k (k + 1) >= N.
    let mut k = 0u64;
    while k * (k + 1) < summands {
        k += 1;
    }
    len / (k + 1)
}

/// Summand `i` is delayed by `i * floor(len / summands)`.
pub fn default_delays(len: usize, summands: usize) -> Vec<usize> {
    let step = len / summands.max(1);
    (0..summands).map(|i| i * step).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryMacResult {
    pub value: Rational,
    /// Cycles spent generating the `M` product streams of `n^2` cycles each.
    pub latency_cycles: u64,
}

/// Unary dot product with the default delay schedule.
pub fn unary_mac(b: &[FixedPoint], c: &[FixedPoint], base_len: usize) -> Result<UnaryMacResult> {
    let delays = default_delays(base_len * base_len, b.len());
    unary_mac_with_delays(b, c, base_len, &delays)
}

/// Each operand becomes a duty-cycle stream of `base_len` cycles; `b_i`
/// repeats inside every cycle of `c_i`, products are delayed and ORed.
///
/// When every delay is a multiple of `base_len` the OR is evaluated block by
/// block without materializing the streams; the result is bit-exact with
/// [`unary_add_or`] over [`unary_multiply`] outputs.
pub fn unary_mac_with_delays(
    b: &[FixedPoint],
    c: &[FixedPoint],
    base_len: usize,
    delays: &[usize],
) -> Result<UnaryMacResult> {
    if b.is_empty() || b.len() != c.len() {
        return Err(HtcError::DimensionMismatch {
            expected: b.len().max(1),
            found: c.len(),
        });
    }
    if delays.len() != b.len() {
        return Err(HtcError::DimensionMismatch {
            expected: b.len(),
            found: delays.len(),
        });
    }
    let len = base_len * base_len;
    check_delays(delays, len)?;
    let mut inner = Vec::with_capacity(b.len());
    let mut outer = Vec::with_capacity(b.len());
    for (&bi, &ci) in b.iter().zip(c) {
        inner.push(UnaryStream::encode(bi, base_len)?.count_ones());
        outer.push(UnaryStream::encode(ci, base_len)?.count_ones());
    }
    let ones = if delays.iter().all(|d| d % base_len == 0) {
        let blocks: Vec<usize> = delays.iter().map(|d| (d % len) / base_len).collect();
        block_or_ones(&inner, &outer, &blocks, base_len)
    } else {
        let products: Vec<UnaryStream> = inner
            .iter()
            .zip(&outer)
            .map(|(&i, &o)| {
                Ok(unary_multiply(
                    &UnaryStream::prefix(base_len, i)?,
                    &UnaryStream::prefix(base_len, o)?,
                ))
            })
            .collect::<Result<_>>()?;
        unary_add_or(&products, delays)?.count_ones()
    };
    Ok(UnaryMacResult {
        value: Rational::new(ones as i64, len as i64),
        latency_cycles: b.len() as u64 * len as u64,
    })
}

/// Ones in the OR of block-aligned product streams. Stream `i` covers the
/// cyclic block range `[start_i, start_i + outer_i)` of `blocks` blocks and
/// holds a prefix of `inner_i` ones in each, so every block contributes the
/// largest prefix among the streams covering it.
fn block_or_ones(inner: &[usize], outer: &[usize], start: &[usize], blocks: usize) -> usize {
    let mut cuts = vec![0, blocks];
    for (&s, &o) in start.iter().zip(outer) {
        cuts.push(s);
        cuts.push((s + o) % blocks);
    }
    cuts.sort_unstable();
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let widest = (0..inner.len())
                .filter(|&i| (w[0] + blocks - start[i]) % blocks < outer[i])
                .map(|i| inner[i])
                .max()
                .unwrap_or(0);
            widest * (w[1] - w[0])
        })
        .sum()
}
