use htc_core::baselines::{cbsc_mac, unary_add_or};
use htc_core::encodings::{decode, encode_rb, encode_tb, gb_to_tb, Bits};
use htc_core::metrics::transitions;
use htc_core::*;
use proptest::prelude::*;

fn polarity() -> impl Strategy<Value = Polarity> {
    prop_oneof![Just(Polarity::Unipolar), Just(Polarity::Bipolar)]
}

fn fixed(bits: u8, polarity: Polarity) -> impl Strategy<Value = FixedPoint> {
    (0..1u32 << bits).prop_map(move |code| FixedPoint::new(bits, code, polarity).unwrap())
}

/// Equal-width, equal-polarity coefficient and data vectors.
fn vectors(max_len: usize) -> impl Strategy<Value = (Vec<FixedPoint>, Vec<FixedPoint>)> {
    (2u8..=8, polarity(), 1..=max_len).prop_flat_map(|(bits, pol, len)| {
        (
            prop::collection::vec(fixed(bits, pol), len),
            prop::collection::vec(fixed(bits, pol), len),
        )
    })
}

fn exact_dot(b: &[FixedPoint], c: &[FixedPoint]) -> Rational {
    b.iter().zip(c).map(|(x, y)| x.value() * y.value()).sum()
}

fn abs(r: Rational) -> Rational {
    if r < Rational::from_integer(0) {
        -r
    } else {
        r
    }
}

proptest! {
    #[test]
    fn encodings_round_trip((x, _) in (1u8..=16, polarity()).prop_flat_map(|(b, p)| (fixed(b, p), Just(())))) {
        prop_assert_eq!(decode(&encode_tb(x)), x.value());
        prop_assert_eq!(decode(&encode_rb(x)), x.value());
    }

    #[test]
    fn temporal_streams_switch_at_most_twice(x in (1u8..=12).prop_flat_map(|b| fixed(b, Polarity::Unipolar))) {
        prop_assert!(transitions(encode_tb(x).as_bits()) <= 2);
    }

    #[test]
    fn retiming_keeps_the_count(bits in prop::collection::vec(any::<bool>(), 64), pol in polarity()) {
        let gb = Bitstream::from_bits(bits.into_iter().collect::<Bits>(), Format::General, pol).unwrap();
        let tb = gb_to_tb(&gb);
        prop_assert!(tb.is_temporal());
        prop_assert_eq!(decode(&tb), decode(&gb));
    }

    #[test]
    fn multiply_error_within_discrepancy_bound(
        (a, b) in (1u8..=10).prop_flat_map(|n| (fixed(n, Polarity::Unipolar), fixed(n, Polarity::Unipolar)))
    ) {
        // The regulated prefix of length w holds n·w/2^N ones up to N.
        let p = decode(&htc_multiply(a, b, Polarity::Unipolar).unwrap());
        let bound = Rational::new(a.bits() as i64, a.epoch() as i64);
        prop_assert!(abs(p - a.value() * b.value()) <= bound);
    }

    #[test]
    fn fast_mac_matches_simulation((b, c) in vectors(12)) {
        let pol = b[0].polarity();
        let cfg = MacConfig::new(b[0].bits(), 4, pol, Selector::Lfsr(LfsrState::default())).unwrap();
        prop_assert_eq!(MacUnit::new(cfg).dot(&b, &c).unwrap(), htc_dot(&b, &c, &cfg).unwrap());
    }

    #[test]
    fn mac_output_is_temporal((b, c) in vectors(4)) {
        let pol = b[0].polarity();
        let cfg = MacConfig::new(b[0].bits(), 4, pol, Selector::Lfsr(LfsrState::default())).unwrap();
        let zero = FixedPoint::zero(b[0].bits(), pol).unwrap();
        let pad = |v: &[FixedPoint]| {
            let mut v = v.to_vec();
            v.resize(4, zero);
            v
        };
        let r = htc_mac(&pad(&b), &pad(&c), &cfg).unwrap();
        prop_assert!(r.out_tb.is_temporal());
        prop_assert!(transitions(r.out_tb.as_bits()) <= 2);
    }

    #[test]
    fn cbsc_error_is_multiplication_only((b, c) in vectors(8)) {
        let pol = b[0].polarity();
        let n = b[0].bits() as i64;
        let got = cbsc_mac(&b, &c, pol).unwrap();
        // Unipolar: each product is off by at most N/2^N. Bipolar magnitudes
        // use the same core on values scaled to [0, 1].
        let per = Rational::new(n + 1, 1 << n);
        prop_assert!(abs(got - exact_dot(&b, &c)) <= per * Rational::from_integer(b.len() as i64));
    }

    #[test]
    fn or_sum_never_exceeds_the_total(
        len in 4usize..=64,
        ones in prop::collection::vec(0usize..=64, 1..=6),
        seed in any::<u64>(),
    ) {
        let m = ones.len();
        let streams: Vec<UnaryStream> = ones
            .iter()
            .map(|&k| UnaryStream::prefix(len, k.min(len)).unwrap())
            .collect();
        let mut delays: Vec<usize> = (0..m).map(|i| (seed as usize).wrapping_add(i * 7919) % len).collect();
        delays.sort_unstable();
        delays.dedup();
        prop_assume!(delays.len() == m);
        let sum: usize = streams.iter().map(UnaryStream::count_ones).sum();
        let got = unary_add_or(&streams, &delays).unwrap().count_ones();
        // Disjoint iff every delayed run ends before the next one starts.
        let mut runs: Vec<(usize, usize)> = streams.iter().zip(&delays).map(|(s, &d)| (d, s.count_ones())).collect();
        runs.sort_unstable();
        let disjoint = runs.iter().enumerate().all(|(i, &(d, k))| {
            let next = runs.get(i + 1).map_or(runs[0].0 + len, |r| r.0);
            d + k <= next
        });
        prop_assert!(got <= sum);
        prop_assert_eq!(got == sum, disjoint);
    }
}
