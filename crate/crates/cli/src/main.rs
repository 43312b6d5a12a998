//! `htc-sim`: benchmarks and image pipelines for the HTC, CBSC and unary MAC
//! designs. Tables go to stdout (or `--output`) as CSV; images are P5 PGM.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "htc-sim",
    version,
    about = "Hybrid temporal computing simulator"
)]
struct Cli {
    /// Plain-text `key = value` file; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the effective configuration to FILE before running.
    #[arg(long, global = true, value_name = "FILE")]
    write_config: Option<PathBuf>,

    #[command(flatten)]
    flags: Flags,

    #[command(subcommand)]
    command: Command,
}

/// Run settings. Defaults: N=8, K=4, 100000 trials, seed 42, taps 8,6,5,4,
/// LFSR seed 0x5A.
#[derive(Args)]
struct Flags {
    /// htc, cbsc, unary or all (default: every design the command supports).
    #[arg(long, global = true)]
    design: Option<String>,
    /// Bit width N.
    #[arg(long, global = true)]
    bits: Option<String>,
    /// MAC fan-in K (power of two).
    #[arg(long, global = true)]
    fanin: Option<String>,
    /// unipolar or bipolar.
    #[arg(long, global = true)]
    polarity: Option<String>,
    /// Number of random MAC evaluations.
    #[arg(long, global = true)]
    trials: Option<String>,
    /// Seed for random test vectors.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Comma-separated LFSR taps, e.g. 8,6,5,4. The largest is the width.
    #[arg(long, global = true)]
    lfsr_taps: Option<String>,
    /// Nonzero LFSR seed, decimal or 0x hex.
    #[arg(long, global = true)]
    lfsr_seed: Option<String>,
    /// Unary base stream length (default 2^N).
    #[arg(long, global = true)]
    unary_len: Option<String>,
    /// Input PGM image.
    #[arg(long, global = true)]
    input: Option<String>,
    /// CSV path for tables, PGM path for images.
    #[arg(long, global = true)]
    output: Option<String>,
    /// MAC inputs as CSV: header, then K coefficient codes and K data codes per row.
    #[arg(long, global = true)]
    vectors: Option<String>,
    /// Six comma-separated FIR coefficients in [0, 1).
    #[arg(long, global = true)]
    taps: Option<String>,
    /// FIR mode: separable or rows.
    #[arg(long, global = true)]
    mode: Option<String>,
}

impl Flags {
    fn overrides(&self) -> BTreeMap<&'static str, String> {
        let all = [
            ("design", &self.design),
            ("bits", &self.bits),
            ("fanin", &self.fanin),
            ("polarity", &self.polarity),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("lfsr_taps", &self.lfsr_taps),
            ("lfsr_seed", &self.lfsr_seed),
            ("unary_len", &self.unary_len),
            ("input", &self.input),
            ("output", &self.output),
            ("vectors", &self.vectors),
            ("taps", &self.taps),
            ("mode", &self.mode),
        ];
        debug_assert!(all.iter().map(|(k, _)| *k).eq(config::KEYS));
        all.into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// RMSE/SDE of MAC designs over random (or supplied) vectors.
    MacBench,
    /// Every operand pair of one multiplier at width N.
    MulSweep,
    /// 6-tap Gaussian blur of --input; writes --output and a metrics row per design.
    Fir,
    /// 8x8 DCT/IDCT round trip of --input; writes --output and a metrics row per design.
    Dct,
    /// Signal transition counts per wire class over random MAC evaluations.
    Activity,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("HTC_SIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("HTC_SIM_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
        .context("cannot configure the thread pool")
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            RunConfig::from_kv(&text).with_context(|| format!("in config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&cli.flags.overrides())?;
    if let Some(path) = &cli.write_config {
        fs::write(path, cfg.to_kv())
            .with_context(|| format!("cannot write config {}", path.display()))?;
    }

    // Image commands use --output for the picture; tables go to stdout.
    let table_to_file = matches!(
        cli.command,
        Command::MacBench | Command::MulSweep | Command::Activity
    );
    let mut sink: Box<dyn Write> = match (&cfg.output, table_to_file) {
        (Some(path), true) => Box::new(io::BufWriter::new(
            fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        _ => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    match cli.command {
        Command::MacBench => commands::mac_bench(&cfg, &mut sink)?,
        Command::MulSweep => commands::mul_sweep(&cfg, &mut sink)?,
        Command::Fir => commands::fir(&cfg, &mut sink)?,
        Command::Dct => commands::dct(&cfg, &mut sink)?,
        Command::Activity => commands::activity(&cfg, &mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("htc-sim: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
