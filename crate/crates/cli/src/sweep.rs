//! Grid evaluation and CSV output.
//!
//! Rows are computed in parallel and written in lexicographic grid order
//! (first axis slowest), so the file does not depend on the thread count.
//! Reals are written with 17 significant digits, which round-trips `f64`.

use std::io::Write;
use std::time::{Duration, Instant};

use anyhow::Result;
use rayon::prelude::*;
use wideband_core::capacity::{coherent_expansion, energy_per_nat, gaussian_lower_bound, sublinear_term, SublinearParam};
use wideband_core::iid::{onoff_building_blocks, onoff_mi_asymptotic, onoff_mi_quadrature, surrogate_m};
use wideband_core::oracle::mc_coherent_mi;
use wideband_core::reliability::ExponentModel;
use wideband_core::{ChannelDims, RngStream};

use crate::config::{Quantity, SweepConfig};

const QUADRATURE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn output_columns(q: Quantity) -> &'static [&'static str] {
    match q {
        Quantity::Capacity => &["linear", "sublinear", "coherent_total", "gaussian_lower_bound"],
        Quantity::Sublinear => &["sublinear_term", "log_energy_per_nat"],
        Quantity::Exponent => &[
            "nu",
            "exponent",
            "region",
            "rho",
            "block_error_bound",
            "r_critical",
            "r_cutoff",
            "c_block",
            "c_block_training_lb",
            "asymptotics_not_binding",
        ],
        Quantity::Outage => &["nu", "rate_used", "outage", "delta_times_outage", "f_star", "block_error_bound"],
        Quantity::Iid => &["mi_quadrature", "mi_asymptotic", "zeta_ratio", "divergence", "surrogate_m"],
        Quantity::OracleCheck => &["mc_mean", "std_error", "ci99_low", "ci99_high", "expansion_total", "gap", "within_budget"],
    }
}

/// What each row's closed form leaves out.
fn dropped(q: Quantity) -> &'static str {
    match q {
        Quantity::Capacity => "O(snr^3)",
        Quantity::Sublinear => "higher-order snr terms",
        Quantity::Exponent | Quantity::Outage => "o(1) exponent terms",
        Quantity::Iid => "o(snr^2) in mi_asymptotic",
        Quantity::OracleCheck => "O(snr^3) in expansion_total",
    }
}

/// A point of the grid, looked up by axis name.
struct Point<'a> {
    names: Vec<&'static str>,
    values: &'a [f64],
}

impl Point<'_> {
    fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    fn real(&self, name: &str) -> f64 {
        self.get(name).expect("axis validated by the config loader")
    }

    fn count(&self, name: &str) -> usize {
        self.real(name) as usize
    }
}

fn dims(t: usize, r: usize, l: usize) -> Result<ChannelDims> {
    Ok(ChannelDims::new(t, r, l)?)
}

fn model(p: &Point) -> Result<ExponentModel> {
    let (t, r, snr) = (p.count("t"), p.count("r"), p.real("snr"));
    Ok(match p.get("nu") {
        Some(nu) => ExponentModel::from_nu(t, r, snr, nu)?,
        None => ExponentModel::from_dims(&dims(t, r, p.count("l"))?, snr)?,
    })
}

fn evaluate(config: &SweepConfig, p: &Point, row: usize) -> Result<Vec<Cell>> {
    use Cell::*;
    Ok(match config.quantity {
        Quantity::Capacity => {
            let d = dims(p.count("t"), p.count("r"), p.count("l"))?;
            let c = coherent_expansion(&d, p.real("snr"))?;
            vec![Real(c.linear), Real(c.sublinear), Real(c.total), Real(gaussian_lower_bound(&d, p.real("snr"))?)]
        }
        Quantity::Sublinear => {
            let param = SublinearParam::from_options(p.get("alpha"), p.get("l"))?;
            let d = dims(p.count("t"), p.count("r"), 1)?;
            let snr = p.real("snr");
            let delta = sublinear_term(&d, snr, param)?;
            vec![Real(delta), Real(energy_per_nat(d.r(), snr, delta)?.log_ratio)]
        }
        Quantity::Exponent => {
            let m = model(p)?;
            let rate = p.real("rate");
            let lm = m.landmarks();
            let b = m.block_error_bound(rate)?;
            vec![
                Real(m.regime.nu),
                Real(b.exponent.value),
                Text(b.exponent.region.to_string()),
                Real(b.exponent.rho),
                Real(b.bound),
                Real(lm.r_critical),
                Real(lm.r_cutoff),
                Real(lm.c_block),
                Real(lm.c_block_training_lb),
                Bool(lm.asymptotics_not_binding),
            ]
        }
        Quantity::Outage => {
            let m = model(p)?;
            let rate = match p.get("kappa") {
                Some(kappa) => m.coherence_length() * p.real("r") * p.real("snr").powf(kappa),
                None => p.real("rate"),
            };
            let o = m.outage(rate)?;
            let b = m.block_error_bound(rate)?;
            vec![
                Real(m.regime.nu),
                Real(rate),
                Real(o.probability),
                Real(o.delta_times_probability),
                Real(o.f_star),
                Real(b.bound),
            ]
        }
        Quantity::Iid => {
            let (r, snr, a) = (p.count("r"), p.real("snr"), p.real("a"));
            let blocks = onoff_building_blocks(r, snr, a)?;
            let asym = onoff_mi_asymptotic(r, snr, a);
            vec![
                Real(onoff_mi_quadrature(r, snr, a, QUADRATURE_REL_TOL)?),
                Real(asym.value),
                Real(asym.zeta_ratio),
                Real(blocks.divergence),
                Real(surrogate_m(r, snr, a)),
            ]
        }
        Quantity::OracleCheck => {
            let d = dims(p.count("t"), p.count("r"), 1)?;
            let snr = p.real("snr");
            let est = mc_coherent_mi(&d, snr, config.n_samples, &RngStream::new(config.seed, row as u64))?;
            let total = coherent_expansion(&d, snr)?.total;
            let gap = (est.mean - total).abs();
            vec![
                Real(est.mean),
                Real(est.std_error),
                Real(est.ci99_low),
                Real(est.ci99_high),
                Real(total),
                Real(gap),
                Bool(gap <= est.half_width() + 10.0 * snr.powi(3)),
            ]
        }
    })
}

/// Grid values of row `index` in lexicographic order.
fn grid_point(config: &SweepConfig, mut index: usize) -> Vec<f64> {
    let mut values = vec![0.0; config.axes.len()];
    for (slot, axis) in values.iter_mut().zip(&config.axes).rev() {
        let n = axis.values.len();
        *slot = axis.values[index % n];
        index /= n;
    }
    values
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub rows: usize,
    /// `(row number, message)` for every row that failed, 1-based.
    pub failed_rows: Vec<(usize, String)>,
    pub seed: u64,
    pub elapsed: Duration,
}

type RowResult = std::result::Result<Vec<Cell>, String>;

/// Evaluates every grid point and writes the CSV to `out`.
pub fn run_sweep<W: Write>(config: &SweepConfig, out: W) -> Result<SweepSummary> {
    let start = Instant::now();
    let names: Vec<&'static str> = config.axes.iter().map(|a| a.name).collect();
    let computed = output_columns(config.quantity);
    let rows: Vec<(Vec<f64>, RowResult)> = (0..config.row_count())
        .into_par_iter()
        .map(|i| {
            let values = grid_point(config, i);
            let point = Point { names: names.clone(), values: &values };
            let result = evaluate(config, &point, i).map_err(|e| format!("{e:#}"));
            (values, result)
        })
        .collect();

    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<&str> = names.clone();
    header.extend_from_slice(computed);
    header.extend_from_slice(&["dropped", "error"]);
    writer.write_record(&header)?;
    let mut failed_rows = Vec::new();
    for (i, (values, result)) in rows.into_iter().enumerate() {
        let mut record: Vec<String> = values
            .iter()
            .zip(&config.axes)
            .map(|(v, axis)| if axis.integer { Cell::Int(*v as u64).render() } else { format_real(*v) })
            .collect();
        match result {
            Ok(cells) => {
                record.extend(cells.iter().map(Cell::render));
                record.push(dropped(config.quantity).to_string());
                record.push(String::new());
            }
            Err(message) => {
                record.extend(std::iter::repeat_n(String::new(), computed.len() + 1));
                record.push(message.clone());
                failed_rows.push((i + 1, message));
            }
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(SweepSummary { rows: config.row_count(), failed_rows, seed: config.seed, elapsed: start.elapsed() })
}
