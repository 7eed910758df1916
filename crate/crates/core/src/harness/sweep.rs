use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{run_trial, SimConfig};
use crate::pilots::PilotScheme;
use crate::precoding::Precoder;
use crate::{linear_to_db, Error, Result};

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Number of base-station antennas M.
    Antennas,
    /// Pilot reuse factor ξ; pilot length ξ·K.
    Reuse,
    /// Grouping parameter τ.
    Tau,
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVar::Antennas => "m",
            SweepVar::Reuse => "reuse",
            SweepVar::Tau => "tau",
        })
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m" => Ok(SweepVar::Antennas),
            "reuse" => Ok(SweepVar::Reuse),
            "tau" => Ok(SweepVar::Tau),
            other => Err(format!("unknown sweep variable `{other}` (expected m, reuse or tau)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(var: SweepVar, values: Vec<f64>) -> Result<Self> {
        let spec = Self { var, values };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |reason: String| Error::Config {
            key: "values".into(),
            reason,
        };
        if self.values.is_empty() {
            return Err(err("sweep needs at least one value".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(err("sweep values must be strictly increasing".into()));
        }
        if matches!(self.var, SweepVar::Antennas | SweepVar::Reuse)
            && self.values.iter().any(|v| !(v.fract() == 0.0 && *v >= 1.0))
        {
            return Err(err(format!("{} values must be positive integers", self.var)));
        }
        Ok(())
    }

    /// Configuration for one sweep point.
    pub fn apply(&self, cfg: &SimConfig, value: f64) -> Result<SimConfig> {
        let mut c = cfg.clone();
        match self.var {
            SweepVar::Antennas => c.antennas = value as usize,
            SweepVar::Reuse => c.schemes = vec![PilotScheme::Reuse(value as usize)],
            SweepVar::Tau => c.tau = value,
        }
        c.validate()?;
        Ok(c)
    }
}

/// One aggregated line of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: SweepVar,
    pub value: f64,
    pub scheme: PilotScheme,
    pub precoder: Precoder,
    /// Mean Monte-Carlo rate over drops, bit/s/Hz.
    pub mean_rate: f64,
    pub mean_sinr_db: f64,
    /// Half-width of the normal-approximation 95% interval of `mean_rate`.
    pub ci95: f64,
    /// Mean closed-form rate over the same drops.
    pub mean_rate_closed_form: f64,
    /// Per-drop mean rates, in drop order.
    pub drop_rates: Vec<f64>,
    pub drops: usize,
    pub blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// Sorts rows by (value, scheme, precoder).
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.scheme.cmp(&b.scheme))
                .then(a.precoder.cmp(&b.precoder))
        });
    }

    pub fn find(&self, value: f64, scheme: PilotScheme, precoder: Precoder) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.scheme == scheme && r.precoder == precoder)
    }

    /// Rows of one (scheme, precoder) series in sweep order.
    pub fn series(&self, scheme: PilotScheme, precoder: Precoder) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme && r.precoder == precoder)
            .collect()
    }
}

fn mean_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// Runs `cfg.drops` trials at each sweep value and aggregates per
/// (value, scheme, precoder). Drop `d` uses the same geometry at every sweep
/// value, and no value's results depend on which other values are swept.
pub fn run_sweep(cfg: &SimConfig, spec: &SweepSpec) -> Result<ResultTable> {
    spec.validate()?;
    let mut table = ResultTable::default();
    for &value in &spec.values {
        let point = spec.apply(cfg, value)?;
        let trials = (0..point.drops as u64)
            .into_par_iter()
            .map(|d| run_trial(&point, d))
            .collect::<Result<Vec<_>>>()?;
        for &scheme in &point.schemes {
            for &precoder in &point.precoders {
                let mut drop_rates = Vec::with_capacity(trials.len());
                let mut closed = Vec::with_capacity(trials.len());
                let mut sinr_db = Vec::new();
                for t in &trials {
                    let outcome = t
                        .scheme(scheme)
                        .and_then(|s| s.precoder(precoder))
                        .expect("trial covers every configured scheme and precoder");
                    drop_rates.push(outcome.empirical_rate.mean());
                    closed.push(outcome.closed_form_rate.mean());
                    sinr_db.extend(outcome.empirical.iter().map(|s| linear_to_db(s.sinr)));
                }
                let (mean_rate, ci95) = mean_ci(&drop_rates);
                table.rows.push(ResultRow {
                    sweep_var: spec.var,
                    value,
                    scheme,
                    precoder,
                    mean_rate,
                    mean_sinr_db: sinr_db.iter().sum::<f64>() / sinr_db.len() as f64,
                    ci95,
                    mean_rate_closed_form: mean_ci(&closed).0,
                    drop_rates,
                    drops: point.drops,
                    blocks: point.blocks,
                });
            }
        }
    }
    table.sort();
    Ok(table)
}
