use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::pilots::PilotScheme;
use crate::precoding::Precoder;
use crate::scenario::PathlossParams;
use crate::{db_to_linear, Error, Result};

/// Which users enter the reported averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Users of cell 0, the center of the layout.
    Center,
    All,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Center => "center",
            Measure::All => "all",
        })
    }
}

/// Full description of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub cells: usize,
    pub users_per_cell: usize,
    pub antennas: usize,
    pub pathloss: PathlossParams,
    /// Pilot power ρ_p, linear.
    pub pilot_snr: f64,
    /// Downlink power ρ_d per base station, linear.
    pub dl_power: f64,
    pub coherence_symbols: usize,
    pub tau: f64,
    pub schemes: Vec<PilotScheme>,
    pub precoders: Vec<Precoder>,
    pub drops: usize,
    /// Coherence blocks per drop.
    pub blocks: usize,
    pub seed: u64,
    pub measure: Measure,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            cells: 7,
            users_per_cell: 10,
            antennas: 128,
            pathloss: PathlossParams::default(),
            pilot_snr: 1.0,
            dl_power: 1.0,
            coherence_symbols: 200,
            tau: 1.0,
            schemes: vec![PilotScheme::REUSE1],
            precoders: vec![Precoder::Mrt, Precoder::Zf],
            drops: 20,
            blocks: 200,
            seed: 1,
            measure: Measure::Center,
        }
    }
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| config_err(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<T: FromStr<Err = String>>(key: &str, value: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v = item.parse().map_err(|e: String| config_err(key, e))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(config_err(key, "list is empty"));
    }
    Ok(out)
}

impl SimConfig {
    /// Parses flat `key = value` text. Blank lines and `#` comments are
    /// ignored; missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::ConfigSyntax {
                line: n + 1,
                reason: format!("expected `key = value`, found `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(config_err(key, "given more than once"));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "cells" => self.cells = parse(key, value)?,
            "users_per_cell" => self.users_per_cell = parse(key, value)?,
            "antennas" => self.antennas = parse(key, value)?,
            "cell_radius_m" => self.pathloss.cell_radius = parse(key, value)?,
            "min_distance_m" => self.pathloss.min_distance = parse(key, value)?,
            "pathloss_exponent" => self.pathloss.pathloss_exponent = parse(key, value)?,
            "shadowing_sigma_db" => self.pathloss.shadowing_sigma_db = parse(key, value)?,
            "edge_snr_db" => self.pathloss.edge_snr_db = parse(key, value)?,
            "pilot_snr_db" => self.pilot_snr = db_to_linear(parse(key, value)?),
            "dl_power_db" => self.dl_power = db_to_linear(parse(key, value)?),
            "coherence_symbols" => self.coherence_symbols = parse(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "scheme" => {
                let mut schemes: Vec<PilotScheme> = parse_list(key, value)?;
                schemes.sort();
                schemes.dedup();
                self.schemes = schemes;
            }
            "precoders" => {
                let mut precoders: Vec<Precoder> = parse_list(key, value)?;
                precoders.sort();
                precoders.dedup();
                self.precoders = precoders;
            }
            "drops" => self.drops = parse(key, value)?,
            "blocks" => self.blocks = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "measure" => {
                self.measure = match value {
                    "center" => Measure::Center,
                    "all" => Measure::All,
                    other => {
                        return Err(config_err(key, format!("expected center or all, got `{other}`")))
                    }
                }
            }
            _ => return Err(config_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Checks every cross-field invariant, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        if ![1, 3, 7].contains(&self.cells) {
            return Err(config_err("cells", format!("{} is not one of 1, 3, 7", self.cells)));
        }
        if self.users_per_cell == 0 {
            return Err(config_err("users_per_cell", "must be at least 1"));
        }
        if self.antennas == 0 {
            return Err(config_err("antennas", "must be at least 1"));
        }
        if self.precoders.contains(&Precoder::Zf) && self.antennas <= self.users_per_cell {
            return Err(config_err(
                "antennas",
                format!(
                    "zero-forcing needs more antennas than users (M = {}, K = {})",
                    self.antennas, self.users_per_cell
                ),
            ));
        }
        self.pathloss.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                let key = match name {
                    "cell_radius" => "cell_radius_m",
                    "min_distance" => "min_distance_m",
                    "shadowing_sigma_db" => "shadowing_sigma_db",
                    other => other,
                };
                config_err(key, reason)
            }
            other => other,
        })?;
        if !(self.pilot_snr.is_finite() && self.pilot_snr >= 0.0) {
            return Err(config_err("pilot_snr_db", "must be finite"));
        }
        if !(self.dl_power.is_finite() && self.dl_power >= 0.0) {
            return Err(config_err("dl_power_db", "must be finite"));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(config_err("tau", "must be a finite non-negative number"));
        }
        if self.schemes.is_empty() {
            return Err(config_err("scheme", "no pilot scheme selected"));
        }
        if self.precoders.is_empty() {
            return Err(config_err("precoders", "no precoder selected"));
        }
        for &scheme in &self.schemes {
            let worst_pilots = match scheme {
                PilotScheme::Reuse(x) => {
                    if x > self.cells {
                        return Err(config_err(
                            "scheme",
                            format!("{scheme} needs at least {x} cells, have {}", self.cells),
                        ));
                    }
                    x * self.users_per_cell
                }
                // Every user on an edge pilot is the longest possible plan.
                PilotScheme::Grouping => self.cells * self.users_per_cell,
            };
            if worst_pilots >= self.coherence_symbols {
                return Err(config_err(
                    "coherence_symbols",
                    format!(
                        "{scheme} may use {worst_pilots} pilot symbols, not fewer than {}",
                        self.coherence_symbols
                    ),
                ));
            }
        }
        if self.drops == 0 {
            return Err(config_err("drops", "must be at least 1"));
        }
        if self.blocks == 0 {
            return Err(config_err("blocks", "must be at least 1"));
        }
        Ok(())
    }

    /// Cells whose users are measured.
    pub fn measured_cells(&self) -> Vec<usize> {
        match self.measure {
            Measure::Center => vec![0],
            Measure::All => (0..self.cells).collect(),
        }
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SimConfig::parse(&text)
}
