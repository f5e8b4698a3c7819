//! Sweep configuration files.
//!
//! ```toml
//! quantity = "exponent"
//! seed = 7
//!
//! [grid]
//! t = [1]
//! r = [1]
//! nu = [1.0]
//! snr = [0.01]
//! rate = [0.0, 5.0, 10.0]
//! ```
//!
//! SNR is always linear. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

pub const DEFAULT_ROW_CAP: usize = 1_000_000;
pub const ROW_CAP_ENV: &str = "WIDEBAND_ROW_CAP";
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_N_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Capacity,
    Sublinear,
    Exponent,
    Outage,
    Iid,
    OracleCheck,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Capacity => "capacity",
            Quantity::Sublinear => "sublinear",
            Quantity::Exponent => "exponent",
            Quantity::Outage => "outage",
            Quantity::Iid => "iid",
            Quantity::OracleCheck => "oracle-check",
        }
    }

    /// Grid axes in column order. Each entry lists alternatives, exactly one
    /// of which must be given.
    fn axes(self) -> &'static [&'static [&'static str]] {
        match self {
            Quantity::Capacity => &[&["t"], &["r"], &["l"], &["snr"]],
            Quantity::Sublinear => &[&["t"], &["r"], &["alpha", "l"], &["snr"]],
            Quantity::Exponent => &[&["t"], &["r"], &["l", "nu"], &["snr"], &["rate"]],
            Quantity::Outage => &[&["t"], &["r"], &["l", "nu"], &["snr"], &["rate", "kappa"]],
            Quantity::Iid => &[&["r"], &["snr"], &["a"]],
            Quantity::OracleCheck => &[&["t"], &["r"], &["snr"]],
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t: Option<Vec<u32>>,
    r: Option<Vec<u32>>,
    l: Option<Vec<u32>>,
    nu: Option<Vec<f64>>,
    alpha: Option<Vec<f64>>,
    snr: Option<Vec<f64>>,
    rate: Option<Vec<f64>>,
    kappa: Option<Vec<f64>>,
    a: Option<Vec<f64>>,
}

impl RawGrid {
    fn has(&self, name: &str) -> bool {
        match name {
            "t" => self.t.is_some(),
            "r" => self.r.is_some(),
            "l" => self.l.is_some(),
            "nu" => self.nu.is_some(),
            "alpha" => self.alpha.is_some(),
            "snr" => self.snr.is_some(),
            "rate" => self.rate.is_some(),
            "kappa" => self.kappa.is_some(),
            "a" => self.a.is_some(),
            _ => false,
        }
    }

    fn take(&mut self, name: &str) -> Option<Vec<f64>> {
        let ints = |v: Option<Vec<u32>>| v.map(|v| v.into_iter().map(f64::from).collect());
        match name {
            "t" => ints(self.t.take()),
            "r" => ints(self.r.take()),
            "l" => ints(self.l.take()),
            "nu" => self.nu.take(),
            "alpha" => self.alpha.take(),
            "snr" => self.snr.take(),
            "rate" => self.rate.take(),
            "kappa" => self.kappa.take(),
            "a" => self.a.take(),
            _ => unreachable!("axis names come from Quantity::axes"),
        }
    }

    fn leftover(&self) -> Option<&'static str> {
        [
            ("t", self.t.is_some()),
            ("r", self.r.is_some()),
            ("l", self.l.is_some()),
            ("nu", self.nu.is_some()),
            ("alpha", self.alpha.is_some()),
            ("snr", self.snr.is_some()),
            ("rate", self.rate.is_some()),
            ("kappa", self.kappa.is_some()),
            ("a", self.a.is_some()),
        ]
        .into_iter()
        .find(|(_, present)| *present)
        .map(|(name, _)| name)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    quantity: Quantity,
    seed: Option<u64>,
    n_samples: Option<usize>,
    output: Option<PathBuf>,
    #[serde(default)]
    grid: RawGrid,
}

/// One swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: &'static str,
    pub values: Vec<f64>,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub quantity: Quantity,
    pub axes: Vec<Axis>,
    pub seed: u64,
    pub n_samples: usize,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn row_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn axis(&self, name: &str) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }
}

/// Row cap from the environment, or the default.
pub fn row_cap() -> Result<usize> {
    match std::env::var(ROW_CAP_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{ROW_CAP_ENV}={v:?} is not a row count")),
        Err(_) => Ok(DEFAULT_ROW_CAP),
    }
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text, row_cap()?).with_context(|| format!("in {}", path.display()))
}

pub fn parse_config(text: &str, cap: usize) -> Result<SweepConfig> {
    let mut raw: RawConfig = toml::from_str(text)?;
    let mut axes = Vec::new();
    for alternatives in raw.quantity.axes() {
        let present: Vec<&'static str> =
            alternatives.iter().copied().filter(|name| raw.grid.has(name)).collect();
        let name = match present.as_slice() {
            [one] => *one,
            [] => bail!("{} needs grid.{}", raw.quantity.name(), alternatives.join(" or grid.")),
            _ => bail!("give only one of grid.{} for {}", alternatives.join(", grid."), raw.quantity.name()),
        };
        let values = raw.grid.take(name).expect("presence checked above");
        if values.is_empty() {
            bail!("grid.{name} is empty");
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            bail!("grid.{name} contains {bad}");
        }
        axes.push(Axis { name, values, integer: matches!(name, "t" | "r" | "l") });
    }
    if let Some(extra) = raw.grid.leftover() {
        bail!("grid.{extra} is not used by {}", raw.quantity.name());
    }
    let config = SweepConfig {
        quantity: raw.quantity,
        axes,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        n_samples: raw.n_samples.unwrap_or(DEFAULT_N_SAMPLES),
        output: raw.output,
    };
    let rows = config.axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()));
    match rows {
        Some(rows) if rows <= cap => Ok(config),
        _ => bail!("grid has more than the row cap of {cap} points (set {ROW_CAP_ENV} to raise it)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse_config("quantity = \"capacity\"\n[grid]\nt=[1]\nr=[1]\nl=[10]\nsnr=[0.01]\n", 10).unwrap();
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.n_samples, DEFAULT_N_SAMPLES);
        assert_eq!(c.output, None);
        assert_eq!(c.row_count(), 1);
        assert!(c.axis("t").unwrap().integer);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("quantity = \"capacity\"\nsnr_db = 3\n", 10).unwrap_err();
        assert!(format!("{err:#}").contains("snr_db"), "{err:#}");
        let err = parse_config("quantity = \"capacity\"\n[grid]\nsnr_db = [3]\n", 10).unwrap_err();
        assert!(format!("{err:#}").contains("snr_db"), "{err:#}");
    }

    #[test]
    fn parse_error_has_line() {
        let err = parse_config("quantity = \"capacity\"\n[grid\n", 10).unwrap_err();
        assert!(format!("{err:#}").contains("line 2"), "{err:#}");
    }

    #[test]
    fn cap_refuses_large_grids() {
        let text = "quantity = \"capacity\"\n[grid]\nt=[1,2]\nr=[1,2]\nl=[10,20]\nsnr=[0.01,0.02]\n";
        assert!(parse_config(text, 16).is_ok());
        let err = parse_config(text, 15).unwrap_err();
        assert!(err.to_string().contains("row cap"));
    }

    #[test]
    fn validation_names_the_field() {
        let err = parse_config("quantity = \"capacity\"\n[grid]\nt=[1]\nr=[1]\nl=[10]\nsnr=[]\n", 10).unwrap_err();
        assert!(err.to_string().contains("grid.snr"));
        let err = parse_config("quantity = \"capacity\"\n[grid]\nt=[1]\nr=[1]\nl=[10]\n", 10).unwrap_err();
        assert!(err.to_string().contains("grid.snr"));
        let err = parse_config("quantity = \"iid\"\n[grid]\nr=[1]\nsnr=[0.01]\na=[10]\nt=[1]\n", 10).unwrap_err();
        assert!(err.to_string().contains("grid.t"));
        let err =
            parse_config("quantity = \"exponent\"\n[grid]\nt=[1]\nr=[1]\nl=[10]\nnu=[1]\nsnr=[0.01]\nrate=[1]\n", 10)
                .unwrap_err();
        assert!(err.to_string().contains("only one"));
    }

    #[test]
    fn integer_axes_reject_reals() {
        assert!(parse_config("quantity = \"capacity\"\n[grid]\nt=[1.5]\nr=[1]\nl=[10]\nsnr=[0.01]\n", 10).is_err());
    }
}
