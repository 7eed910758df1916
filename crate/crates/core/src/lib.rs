//! Multi-cell massive MIMO downlink simulator for pilot contamination.
//!
//! The crate follows one coherence block through the full TDD chain:
//!
//! - [`scenario`]: hexagonal layout, user drops and the large-scale fading tensor.
//! - [`channel`]: small-scale Rayleigh fading, channel synthesis and the
//!   despread uplink pilot observation.
//! - [`pilots`]: user grouping by channel quality and pilot assignment under
//!   fixed reuse or grouping-based reuse.
//! - [`estimation`]: linear MMSE channel estimation with analytic variances.
//! - [`precoding`]: MRT and ZF precoders with an equal per-user power split.
//! - [`metrics`]: Monte-Carlo and closed-form SINR, the large-array limit and
//!   achievable rates.
//! - [`harness`]: configuration, trials, sweeps and CSV/SVG output.
//!
//! The runnable programs under `examples/` walk through each of these.

pub mod channel;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod metrics;
pub mod pilots;
pub mod precoding;
pub mod scenario;
pub mod seed;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Noise power at every receiver. All powers are normalized against it.
pub const NOISE_POWER: f64 = 1.0;

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
