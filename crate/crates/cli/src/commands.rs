use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use htc_core::apps::fir::{fir_reference, gaussian6_taps, TAPS};
use htc_core::metrics::{
    activity_bench, draw_vectors, exhaustive_mul_error, image_metrics, mac_errors_on, MacVector,
};
use htc_core::{
    dct_roundtrip, fir_apply, pgm_read, pgm_write, BenchConfig, Datapath, DctSpec, Design, FirSpec,
    GrayImage, Polarity, Rational,
};

use crate::config::RunConfig;

fn bench_config(cfg: &RunConfig, design: Design) -> Result<BenchConfig> {
    Ok(BenchConfig {
        design,
        bits: cfg.bits,
        fan_in: cfg.fanin,
        trials: cfg.trials,
        seed: cfg.seed,
        polarity: cfg.polarity,
        lfsr: cfg.lfsr()?,
        unary_len: cfg.unary_len,
    })
}

/// Designs able to run at the configured polarity.
fn mac_designs(cfg: &RunConfig) -> Result<Vec<Design>> {
    let supported: &[Design] = match cfg.polarity {
        Polarity::Unipolar => &Design::ALL,
        Polarity::Bipolar => &[Design::Htc, Design::Cbsc],
    };
    cfg.designs(supported)
}

/// Reads MAC inputs from CSV: a header, then `K` coefficient codes followed
/// by `K` data codes per row.
pub fn read_vectors(path: &Path, fanin: usize) -> Result<Vec<MacVector>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read vectors from {}", path.display()))?;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        if rec.len() != 2 * fanin {
            bail!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                i + 1,
                rec.len(),
                2 * fanin
            );
        }
        let codes = rec
            .iter()
            .map(|f| f.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        out.push(MacVector {
            b: codes[..fanin].to_vec(),
            c: codes[fanin..].to_vec(),
        });
    }
    if out.is_empty() {
        bail!("{} holds no vectors", path.display());
    }
    Ok(out)
}

pub fn mac_bench(cfg: &RunConfig, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "design",
        "bits",
        "fanin",
        "polarity",
        "trials",
        "rmse_pct",
        "sde_pct",
        "max_abs_err",
    ])?;
    let supplied = match &cfg.vectors {
        Some(p) => {
            let mut v = read_vectors(p, cfg.fanin)?;
            v.truncate(cfg.trials);
            Some(v)
        }
        None => None,
    };
    for design in mac_designs(cfg)? {
        let bench = bench_config(cfg, design)?;
        if bench.trials == 0 {
            bail!("trials must be at least 1");
        }
        let vectors = match &supplied {
            Some(v) => v.clone(),
            None => draw_vectors(&bench),
        };
        let s = mac_errors_on(&bench, &vectors)?;
        w.write_record([
            design.to_string(),
            cfg.bits.to_string(),
            cfg.fanin.to_string(),
            cfg.polarity.to_string(),
            s.trials.to_string(),
            format!("{:.6}", s.rmse_pct),
            format!("{:.6}", s.sde_pct),
            format!("{:.8}", s.max_abs_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `r` written over `denom` when that is exact, otherwise in lowest terms.
fn fraction(r: Rational, denom: i64) -> String {
    if denom % r.denom() == 0 {
        format!("{}/{}", r.numer() * (denom / r.denom()), denom)
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn mul_sweep(cfg: &RunConfig, out: impl Write) -> Result<()> {
    let design = cfg.design.unwrap_or(Design::Htc);
    let sweep = exhaustive_mul_error(design, cfg.bits, cfg.polarity)?;
    let epoch = 1i64 << cfg.bits;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "b", "product", "exact", "error"])?;
    for r in &sweep.rows {
        w.write_record([
            r.a.to_string(),
            r.b.to_string(),
            fraction(r.product, epoch),
            fraction(r.exact, epoch * epoch),
            fraction(r.error(), epoch * epoch),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn load_input(cfg: &RunConfig) -> Result<(PathBuf, GrayImage)> {
    let path = cfg
        .input
        .clone()
        .context("an input image is required (--input <PGM>)")?;
    let img = pgm_read(&path).with_context(|| format!("cannot load {}", path.display()))?;
    Ok((path, img))
}

/// Output path for one of several designs: `out.pgm` becomes `out.htc.pgm`.
fn output_for(cfg: &RunConfig, label: &str, several: bool) -> Option<PathBuf> {
    let out = cfg.output.as_ref()?;
    if !several {
        return Some(out.clone());
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned());
    let ext = out.extension().map(|s| s.to_string_lossy().into_owned());
    let name = match (stem, ext) {
        (Some(s), Some(e)) => format!("{s}.{label}.{e}"),
        (Some(s), None) => format!("{s}.{label}"),
        _ => format!("{label}.pgm"),
    };
    Some(out.with_file_name(name))
}

pub fn fir(cfg: &RunConfig, out: impl Write) -> Result<()> {
    let taps = cfg
        .taps
        .clone()
        .unwrap_or_else(|| gaussian6_taps().to_vec());
    let real: [f64; TAPS] = taps
        .as_slice()
        .try_into()
        .map_err(|_| anyhow::anyhow!("FIR needs {TAPS} taps, got {}", taps.len()))?;
    let (path, img) = load_input(cfg)?;
    let reference = fir_reference(&img, &real, cfg.mode)?;
    let designs = cfg.designs(&Design::ALL)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "input",
        "design",
        "width",
        "height",
        "psnr_db",
        "rmse",
        "psnr_ref_db",
    ])?;
    for &design in &designs {
        let spec = FirSpec::with_taps(&taps, design.into())?
            .with_mode(cfg.mode)
            .with_lfsr(cfg.lfsr()?);
        let result = fir_apply(&img, &spec)?;
        let q = image_metrics(&img, &result)?;
        let r = image_metrics(&reference, &result)?;
        if let Some(p) = output_for(cfg, design.name(), designs.len() > 1) {
            pgm_write(&result, &p).with_context(|| format!("cannot write {}", p.display()))?;
        }
        w.write_record([
            path.display().to_string(),
            design.to_string(),
            img.width().to_string(),
            img.height().to_string(),
            format!("{:.4}", q.psnr_db),
            format!("{:.6}", q.rmse),
            format!("{:.4}", r.psnr_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn dct(cfg: &RunConfig, out: impl Write) -> Result<()> {
    let (path, img) = load_input(cfg)?;
    let paths: Vec<Datapath> = match cfg.design {
        None => vec![Datapath::Htc, Datapath::Cbsc, Datapath::Exact],
        Some(Design::Unary) => bail!("the unary design is unipolar only and cannot run the DCT"),
        Some(d) => vec![d.into()],
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["input", "design", "width", "height", "psnr_db", "rmse"])?;
    for &dp in &paths {
        let spec = DctSpec::new(dp)?.with_lfsr(cfg.lfsr()?);
        let result = dct_roundtrip(&img, &spec)?;
        if let Some(p) = output_for(cfg, &dp.to_string(), paths.len() > 1) {
            pgm_write(&result.image, &p)
                .with_context(|| format!("cannot write {}", p.display()))?;
        }
        w.write_record([
            path.display().to_string(),
            dp.to_string(),
            img.width().to_string(),
            img.height().to_string(),
            format!("{:.4}", result.quality.psnr_db),
            format!("{:.6}", result.quality.rmse),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn activity(cfg: &RunConfig, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "design",
        "evaluations",
        "tb",
        "rb",
        "gb",
        "ctl",
        "total",
        "max_tb_per_wire",
    ])?;
    for design in mac_designs(cfg)? {
        let s = activity_bench(&bench_config(cfg, design)?)?;
        let class = |k: &str| s.by_class.get(k).copied().unwrap_or(0).to_string();
        w.write_record([
            design.to_string(),
            s.evaluations.to_string(),
            class("TB"),
            class("RB"),
            class("GB"),
            class("ctl"),
            s.total.to_string(),
            s.max_temporal.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_keep_the_epoch() {
        assert_eq!(fraction(Rational::new(1, 2), 8), "4/8");
        assert_eq!(fraction(Rational::new(-3, 64), 64), "-3/64");
        assert_eq!(fraction(Rational::new(1, 3), 8), "1/3");
    }

    #[test]
    fn output_names_per_design() {
        let cfg = RunConfig {
            output: Some("dir/out.pgm".into()),
            ..Default::default()
        };
        assert_eq!(
            output_for(&cfg, "htc", false).unwrap(),
            PathBuf::from("dir/out.pgm")
        );
        assert_eq!(
            output_for(&cfg, "htc", true).unwrap(),
            PathBuf::from("dir/out.htc.pgm")
        );
    }
}
