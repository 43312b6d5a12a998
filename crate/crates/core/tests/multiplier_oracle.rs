//! Multiplier error tables checked against values produced ahead of time by
//! an independent brute-force script (exact fractions, no shared code).

use htc_core::metrics::exhaustive_mul_error;
use htc_core::{Design, Polarity, Rational};

/// `(N, max |err| numerator, denominator, (a, b) first attaining it, RMSE)`.
type Row = (u8, i64, i64, (u32, u32), f64);

const ORACLE: [Row; 10] = [
    (1, 1, 4, (1, 1), 0.125),
    (2, 3, 16, (3, 3), 0.082_679_728_470_768_46),
    (3, 7, 64, (5, 5), 0.047_521_582_267_954_84),
    (4, 17, 256, (11, 13), 0.025_984_638_077_441_544),
    (5, 39, 1024, (21, 21), 0.013_888_147_122_390_52),
    (6, 89, 4096, (43, 53), 0.007_333_368_308_533_003),
    (7, 199, 16384, (85, 85), 0.003_843_882_496_418_766),
    (8, 441, 65536, (171, 213), 0.002_004_789_459_872_036),
    (9, 967, 262144, (341, 341), 0.001_041_728_450_326_205_2),
    (10, 2105, 1048576, (683, 853), 0.000_539_707_416_579_104_6),
];

#[test]
fn unipolar_htc_matches_oracle() {
    for (bits, num, den, arg, rmse) in ORACLE {
        let sweep = exhaustive_mul_error(Design::Htc, bits, Polarity::Unipolar).unwrap();
        let max = Rational::new(num, den);
        assert_eq!(sweep.max_abs_error(), max, "N={bits}");
        let first = sweep
            .rows
            .iter()
            .find(|r| r.error() == max || -r.error() == max)
            .map(|r| (r.a, r.b));
        assert_eq!(first, Some(arg), "N={bits}");
        let got = sweep.stats().rmse_pct / 100.0;
        assert!((got - rmse).abs() < 1e-12, "N={bits}: {got} vs {rmse}");
    }
}

#[test]
fn cbsc_equals_htc_up_to_eight_bits() {
    for bits in 1..=8 {
        let htc = exhaustive_mul_error(Design::Htc, bits, Polarity::Unipolar).unwrap();
        let cbsc = exhaustive_mul_error(Design::Cbsc, bits, Polarity::Unipolar).unwrap();
        assert_eq!(htc.rows, cbsc.rows, "N={bits}");
    }
}

#[test]
fn worked_example_row() {
    let sweep = exhaustive_mul_error(Design::Htc, 3, Polarity::Unipolar).unwrap();
    let row = sweep.rows.iter().find(|r| (r.a, r.b) == (6, 5)).unwrap();
    assert_eq!(row.product, Rational::new(4, 8));
    assert_eq!(row.exact, Rational::new(30, 64));
}
