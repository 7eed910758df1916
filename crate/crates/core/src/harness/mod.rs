//! Monte-Carlo experiment driver.
//!
//! A configuration fixes the network, the pilot schemes and the precoders
//! to compare. [`run_trial`] simulates one user drop over many coherence
//! blocks; [`run_sweep`] repeats that over drops and over the values of one
//! swept parameter and aggregates the rates; [`write_results`] persists the
//! table.

mod config;
mod output;
mod sweep;
mod trial;

pub use config::{load_config, Measure, SimConfig};
pub use output::{format_sig6, render_csv, render_svg, write_results, CSV_HEADER};
pub use sweep::{run_sweep, ResultRow, ResultTable, SweepSpec, SweepVar};
pub use trial::{run_trial, run_trial_with_gains, PrecoderOutcome, SchemeOutcome, TrialResult};
