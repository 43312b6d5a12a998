use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use htc_core::apps::image::GrayImage;
use htc_core::encodings::encode_rb;
use htc_core::metrics::{draw_vectors, MacVector};
use htc_core::*;

fn operands(v: &MacVector) -> (Vec<FixedPoint>, Vec<FixedPoint>) {
    let fp = |codes: &[u32]| {
        codes
            .iter()
            .map(|&c| FixedPoint::unipolar(8, c).unwrap())
            .collect()
    };
    (fp(&v.b), fp(&v.c))
}

fn mac(c: &mut Criterion) {
    let vectors = draw_vectors(&BenchConfig {
        trials: 64,
        ..Default::default()
    });
    let inputs: Vec<_> = vectors.iter().map(operands).collect();
    let cfg = MacConfig::standard(Polarity::Unipolar);
    let unit = MacUnit::new(cfg);
    let mut g = c.benchmark_group("mac4_n8");
    g.bench_function("htc_stream", |bch| {
        bch.iter(|| {
            for (b, x) in &inputs {
                black_box(htc_mac(b, x, &cfg).unwrap().binary_sum);
            }
        })
    });
    g.bench_function("htc_word", |bch| {
        bch.iter(|| {
            for (b, x) in &inputs {
                black_box(unit.mac(b, x).unwrap());
            }
        })
    });
    g.bench_function("cbsc", |bch| {
        bch.iter(|| {
            for (b, x) in &inputs {
                black_box(cbsc_mac(b, x, Polarity::Unipolar).unwrap());
            }
        })
    });
    g.bench_function("unary", |bch| {
        bch.iter(|| {
            for (b, x) in &inputs {
                black_box(unary_mac(b, x, 256).unwrap());
            }
        })
    });
    g.finish();
}

fn encode(c: &mut Criterion) {
    let mut g = c.benchmark_group("encode_rb");
    for bits in [8u8, 12, 16] {
        let x = FixedPoint::unipolar(bits, (1 << bits) / 3).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(bits), &x, |bch, &x| {
            bch.iter(|| black_box(encode_rb(x)))
        });
    }
    g.finish();
}

fn pipelines(c: &mut Criterion) {
    let img = GrayImage::from_fn(64, 64, |x, y| ((x * 7 + y * 13) ^ (x * y)) as u8).unwrap();
    let mut g = c.benchmark_group("image_64x64");
    g.sample_size(10);
    for dp in [Datapath::Htc, Datapath::Cbsc, Datapath::Unary] {
        let spec = FirSpec::new(dp).unwrap();
        g.bench_function(BenchmarkId::new("fir", dp), |bch| {
            bch.iter(|| black_box(fir_apply(&img, &spec).unwrap()))
        });
    }
    for dp in [Datapath::Htc, Datapath::Cbsc] {
        let spec = DctSpec::new(dp).unwrap();
        g.bench_function(BenchmarkId::new("dct", dp), |bch| {
            bch.iter(|| black_box(dct_roundtrip(&img, &spec).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, mac, encode, pipelines);
criterion_main!(benches);
