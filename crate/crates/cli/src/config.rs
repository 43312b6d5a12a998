//! Run configuration: pinned defaults, a plain `key = value` file format, and
//! merging with command-line flags (flags win).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use htc_core::apps::fir::FirMode;
use htc_core::encodings::{DEFAULT_LFSR_SEED, DEFAULT_LFSR_TAPS};
use htc_core::{Design, LfsrState, Polarity};

/// Every key a config file may set, in serialization order.
pub const KEYS: [&str; 14] = [
    "design",
    "bits",
    "fanin",
    "polarity",
    "trials",
    "seed",
    "lfsr_taps",
    "lfsr_seed",
    "unary_len",
    "input",
    "output",
    "vectors",
    "taps",
    "mode",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` runs every design the command supports.
    pub design: Option<Design>,
    pub bits: u8,
    pub fanin: usize,
    pub polarity: Polarity,
    pub trials: usize,
    pub seed: u64,
    pub lfsr_taps: Vec<u8>,
    pub lfsr_seed: u32,
    pub unary_len: Option<usize>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    /// FIR kernel override.
    pub taps: Option<Vec<f64>>,
    pub mode: FirMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            design: None,
            bits: 8,
            fanin: 4,
            polarity: Polarity::Unipolar,
            trials: 100_000,
            seed: 42,
            lfsr_taps: DEFAULT_LFSR_TAPS.to_vec(),
            lfsr_seed: DEFAULT_LFSR_SEED,
            unary_len: None,
            input: None,
            output: None,
            vectors: None,
            taps: None,
            mode: FirMode::Separable,
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| anyhow!("`{t}`: {e}")))
        .collect()
}

/// Accepts decimal or `0x`-prefixed hex.
pub fn parse_seed(s: &str) -> Result<u32> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.with_context(|| format!("invalid LFSR seed `{s}`"))
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let ctx = || format!("invalid value `{v}` for `{key}`");
        match key {
            "design" => {
                self.design = match v {
                    "all" | "" => None,
                    d => Some(d.parse().with_context(ctx)?),
                }
            }
            "bits" => self.bits = v.parse().with_context(ctx)?,
            "fanin" => self.fanin = v.parse().with_context(ctx)?,
            "polarity" => self.polarity = v.parse().with_context(ctx)?,
            "trials" => self.trials = v.parse().with_context(ctx)?,
            "seed" => self.seed = v.parse().with_context(ctx)?,
            "lfsr_taps" => self.lfsr_taps = parse_list(v).with_context(ctx)?,
            "lfsr_seed" => self.lfsr_seed = parse_seed(v)?,
            "unary_len" => self.unary_len = Some(v.parse().with_context(ctx)?),
            "input" => self.input = Some(v.into()),
            "output" => self.output = Some(v.into()),
            "vectors" => self.vectors = Some(v.into()),
            "taps" => self.taps = Some(parse_list(v).with_context(ctx)?),
            "mode" => self.mode = v.parse().with_context(ctx)?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    /// Parses a config file body. Blank lines and `#` comments are ignored.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", n + 1))?;
            self.set(key.trim(), value)
                .with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    /// Overrides from flags; each pair is a key and the raw flag value.
    pub fn apply_overrides(&mut self, overrides: &BTreeMap<&str, String>) -> Result<()> {
        for (key, value) in overrides {
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Inverse of [`RunConfig::from_kv`]. Unset optional keys are omitted.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let design = self.design.map_or("all".to_string(), |d| d.to_string());
        let _ = writeln!(out, "design = {design}");
        let _ = writeln!(out, "bits = {}", self.bits);
        let _ = writeln!(out, "fanin = {}", self.fanin);
        let _ = writeln!(out, "polarity = {}", self.polarity);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "lfsr_taps = {}", join(&self.lfsr_taps));
        let _ = writeln!(out, "lfsr_seed = {:#x}", self.lfsr_seed);
        if let Some(n) = self.unary_len {
            let _ = writeln!(out, "unary_len = {n}");
        }
        for (key, path) in [
            ("input", &self.input),
            ("output", &self.output),
            ("vectors", &self.vectors),
        ] {
            if let Some(p) = path {
                let _ = writeln!(out, "{key} = {}", p.display());
            }
        }
        if let Some(t) = &self.taps {
            let _ = writeln!(out, "taps = {}", join(t));
        }
        let mode = match self.mode {
            FirMode::Separable => "separable",
            FirMode::RowsOnly => "rows",
        };
        let _ = writeln!(out, "mode = {mode}");
        out
    }

    /// The register width is the largest tap.
    pub fn lfsr(&self) -> Result<LfsrState> {
        let width = self.lfsr_taps.iter().copied().max().unwrap_or(0);
        Ok(LfsrState::new(width, &self.lfsr_taps, self.lfsr_seed)?)
    }

    pub fn designs(&self, supported: &[Design]) -> Result<Vec<Design>> {
        match self.design {
            None => Ok(supported.to_vec()),
            Some(d) if supported.contains(&d) => Ok(vec![d]),
            Some(d) => bail!("design `{d}` is not supported by this command"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut cfg = RunConfig {
            design: Some(Design::Cbsc),
            bits: 6,
            polarity: Polarity::Bipolar,
            lfsr_taps: vec![10, 7],
            lfsr_seed: 0x2F,
            unary_len: Some(32),
            input: Some("in.pgm".into()),
            taps: Some(vec![0.25, 0.5, 0.25]),
            mode: FirMode::RowsOnly,
            ..Default::default()
        };
        assert_eq!(RunConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
        cfg = RunConfig::default();
        assert_eq!(RunConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn defaults_are_pinned() {
        let cfg = RunConfig::default();
        assert_eq!(
            (cfg.bits, cfg.fanin, cfg.trials, cfg.seed),
            (8, 4, 100_000, 42)
        );
        assert_eq!(cfg.lfsr().unwrap(), LfsrState::default());
    }

    #[test]
    fn comments_and_errors() {
        let cfg = RunConfig::from_kv("# header\n\nbits = 4 # narrow\nlfsr_seed=0x3\n").unwrap();
        assert_eq!((cfg.bits, cfg.lfsr_seed), (4, 3));
        assert!(RunConfig::from_kv("bits 4").is_err());
        assert!(RunConfig::from_kv("colour = red").is_err());
        assert!(RunConfig::from_kv("bits = many").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::from_kv("bits = 4\nseed = 9").unwrap();
        cfg.apply_overrides(&BTreeMap::from([("bits", "6".to_string())]))
            .unwrap();
        assert_eq!((cfg.bits, cfg.seed), (6, 9));
    }

    #[test]
    fn seeds_in_hex_or_decimal() {
        assert_eq!(parse_seed("0x5A").unwrap(), 90);
        assert_eq!(parse_seed("90").unwrap(), 90);
        assert!(parse_seed("0xZZ").is_err());
    }
}
