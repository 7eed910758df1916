//! Linear MMSE channel estimation from the despread pilot observation.
//!
//! Base station `l` sees, on pilot p, the superposition of its channels to
//! every user transmitting p. With perfect knowledge of the large-scale
//! gains, the MMSE estimate of h_ljk is a scalar multiple of that
//! observation:
//!
//! ```text
//! ĥ_ljk = √(ρ_p Y_p) Ψ_ljk / (σ² + ρ_p Y_p S_lp) · ξ_lp,   S_lp = Σ_{(j',k') on p} Ψ_lj'k'
//! ```
//!
//! so all estimates a base station forms for co-pilot users are parallel.
//! Each estimate entry has variance γ_ljk = ρ_p Y_p Ψ_ljk² / (σ² + ρ_p Y_p S_lp).

use crate::channel::{ChannelBlock, TrainingObservation};
use crate::pilots::PilotPlan;
use crate::scenario::LsfTensor;
use crate::{Error, Result, C64, NOISE_POWER};

fn check_dims(psi: &LsfTensor, plan: &PilotPlan) -> Result<()> {
    if psi.num_cells() != plan.num_cells() || psi.users_per_cell() != plan.users_per_cell() {
        return Err(Error::DimensionMismatch(format!(
            "gains are L = {}, K = {} but the pilot plan is L = {}, K = {}",
            psi.num_cells(),
            psi.users_per_cell(),
            plan.num_cells(),
            plan.users_per_cell()
        )));
    }
    Ok(())
}

/// Total gain Σ Ψ_lj'k' of the users on each pilot, seen from each base
/// station, indexed `[l][p]`.
fn pilot_load(psi: &LsfTensor, plan: &PilotPlan) -> Vec<f64> {
    let (l_cells, y) = (plan.num_cells(), plan.num_pilots());
    let mut load = vec![0.0; l_cells * y];
    for l in 0..l_cells {
        for p in 0..y {
            load[l * y + p] = plan
                .users_with_pilot(p)
                .iter()
                .map(|&(j, k)| psi.get(l, j, k))
                .sum();
        }
    }
    load
}

/// Analytic per-antenna estimate variances.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateVariance {
    num_cells: usize,
    users_per_cell: usize,
    gamma: Vec<f64>,
    cross_gain: Vec<f64>,
}

impl EstimateVariance {
    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    /// γ_ljk, the variance of each entry of ĥ_ljk.
    #[inline]
    pub fn gamma(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.gamma[(bs * self.num_cells + cell) * self.users_per_cell + user]
    }

    /// Per-antenna covariance between ĥ_ljk and base station l's estimate of
    /// its own co-pilot user; zero when cell l has no user on that pilot.
    #[inline]
    pub fn cross_gain(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.cross_gain[(bs * self.num_cells + cell) * self.users_per_cell + user]
    }

    /// Error variance Ψ_ljk − γ_ljk relative to Ψ_ljk.
    pub fn nmse(&self, psi: &LsfTensor, bs: usize, cell: usize, user: usize) -> f64 {
        let g = psi.get(bs, cell, user);
        (g - self.gamma(bs, cell, user)) / g
    }
}

pub fn estimate_variance(
    psi: &LsfTensor,
    plan: &PilotPlan,
    pilot_snr: f64,
) -> Result<EstimateVariance> {
    check_dims(psi, plan)?;
    if !(pilot_snr >= 0.0 && pilot_snr.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "pilot_snr",
            reason: format!("{pilot_snr} is not finite and non-negative"),
        });
    }
    let (l_cells, k_users, y) = (plan.num_cells(), plan.users_per_cell(), plan.num_pilots());
    let snr = pilot_snr * y as f64;
    let load = pilot_load(psi, plan);
    let mut gamma = Vec::with_capacity(l_cells * l_cells * k_users);
    let mut cross_gain = Vec::with_capacity(l_cells * l_cells * k_users);
    for l in 0..l_cells {
        for j in 0..l_cells {
            for k in 0..k_users {
                let p = plan.pilot(j, k);
                let denom = NOISE_POWER + snr * load[l * y + p];
                let g = psi.get(l, j, k);
                gamma.push(snr * g * g / denom);
                cross_gain.push(match plan.user_with_pilot(l, p) {
                    Some(s) => snr * g * psi.get(l, l, s) / denom,
                    None => 0.0,
                });
            }
        }
    }
    Ok(EstimateVariance {
        num_cells: l_cells,
        users_per_cell: k_users,
        gamma,
        cross_gain,
    })
}

/// MMSE estimates ĥ_ljk, either for every link or only for the serving
/// links ĥ_jjk a precoder needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimates {
    num_cells: usize,
    users_per_cell: usize,
    antennas: usize,
    serving_only: bool,
    h_hat: Vec<C64>,
}

impl ChannelEstimates {
    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// True when only the links ĥ_jjk are held.
    pub fn serving_only(&self) -> bool {
        self.serving_only
    }

    /// Estimate of the channel from base station `bs` to user `(cell, user)`.
    ///
    /// Panics for `bs != cell` on serving-only estimates.
    #[inline]
    pub fn vector(&self, bs: usize, cell: usize, user: usize) -> &[C64] {
        let link = if self.serving_only {
            assert_eq!(bs, cell, "serving-only estimates hold no cross links");
            cell * self.users_per_cell + user
        } else {
            (bs * self.num_cells + cell) * self.users_per_cell + user
        };
        let o = link * self.antennas;
        &self.h_hat[o..o + self.antennas]
    }

    /// Builds estimates from explicit `[l][j][k][m]` samples.
    pub fn from_vec(
        num_cells: usize,
        users_per_cell: usize,
        antennas: usize,
        h_hat: Vec<C64>,
    ) -> Result<Self> {
        if h_hat.len() != num_cells * num_cells * users_per_cell * antennas {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for L = {num_cells}, K = {users_per_cell}, M = {antennas}",
                h_hat.len()
            )));
        }
        Ok(Self {
            num_cells,
            users_per_cell,
            antennas,
            serving_only: false,
            h_hat,
        })
    }
}

/// MMSE estimates of every link from every base station's observation.
pub fn estimate_channels(
    obs: &TrainingObservation,
    psi: &LsfTensor,
    plan: &PilotPlan,
) -> Result<ChannelEstimates> {
    estimate(obs, psi, plan, false)
}

/// MMSE estimates of the serving links ĥ_jjk only.
pub fn estimate_serving_channels(
    obs: &TrainingObservation,
    psi: &LsfTensor,
    plan: &PilotPlan,
) -> Result<ChannelEstimates> {
    estimate(obs, psi, plan, true)
}

fn estimate(
    obs: &TrainingObservation,
    psi: &LsfTensor,
    plan: &PilotPlan,
    serving_only: bool,
) -> Result<ChannelEstimates> {
    check_dims(psi, plan)?;
    if obs.num_cells() != plan.num_cells() || obs.num_pilots() != plan.num_pilots() {
        return Err(Error::DimensionMismatch(format!(
            "observation has {} cells and {} pilots, plan has {} and {}",
            obs.num_cells(),
            obs.num_pilots(),
            plan.num_cells(),
            plan.num_pilots()
        )));
    }
    let (l_cells, k_users, m, y) = (
        plan.num_cells(),
        plan.users_per_cell(),
        obs.antennas(),
        plan.num_pilots(),
    );
    let gain = obs.pilot_gain();
    let load = pilot_load(psi, plan);
    let links = if serving_only { l_cells } else { l_cells * l_cells };
    let mut h_hat = Vec::with_capacity(links * k_users * m);
    for l in 0..l_cells {
        for j in 0..l_cells {
            if serving_only && j != l {
                continue;
            }
            for k in 0..k_users {
                let p = plan.pilot(j, k);
                let denom = obs.noise_power + gain * gain * load[l * y + p];
                let coef = if denom > 0.0 {
                    gain * psi.get(l, j, k) / denom
                } else {
                    0.0
                };
                h_hat.extend(obs.vector(l, p).iter().map(|x| x * coef));
            }
        }
    }
    Ok(ChannelEstimates {
        num_cells: l_cells,
        users_per_cell: k_users,
        antennas: m,
        serving_only,
        h_hat,
    })
}

/// Accumulated estimation error and channel energy per link.
#[derive(Debug, Clone, PartialEq)]
pub struct NmseReport {
    num_cells: usize,
    users_per_cell: usize,
    error_energy: Vec<f64>,
    channel_energy: Vec<f64>,
    pub blocks: usize,
}

impl NmseReport {
    fn index(&self, bs: usize, cell: usize, user: usize) -> usize {
        (bs * self.num_cells + cell) * self.users_per_cell + user
    }

    /// Σ‖ĥ − h‖² / Σ‖h‖² over the accumulated blocks.
    pub fn nmse(&self, bs: usize, cell: usize, user: usize) -> f64 {
        let i = self.index(bs, cell, user);
        self.error_energy[i] / self.channel_energy[i]
    }

    /// NMSE of each user's serving link, cell-major.
    pub fn serving(&self) -> Vec<f64> {
        (0..self.num_cells)
            .flat_map(|j| (0..self.users_per_cell).map(move |k| (j, k)))
            .map(|(j, k)| self.nmse(j, j, k))
            .collect()
    }

    /// Adds another report's sums into this one.
    pub fn merge(&mut self, other: &NmseReport) {
        for (a, b) in self.error_energy.iter_mut().zip(&other.error_energy) {
            *a += b;
        }
        for (a, b) in self.channel_energy.iter_mut().zip(&other.channel_energy) {
            *a += b;
        }
        self.blocks += other.blocks;
    }
}

/// Estimation error of one block; merge reports to average over blocks.
pub fn estimation_nmse(est: &ChannelEstimates, h: &ChannelBlock) -> Result<NmseReport> {
    if est.num_cells() != h.num_cells()
        || est.users_per_cell() != h.users_per_cell()
        || est.antennas() != h.antennas()
        || est.serving_only()
    {
        return Err(Error::DimensionMismatch(
            "estimates must cover every link of the channel block".into(),
        ));
    }
    let (l_cells, k_users) = (est.num_cells(), est.users_per_cell());
    let mut error_energy = Vec::with_capacity(l_cells * l_cells * k_users);
    let mut channel_energy = Vec::with_capacity(l_cells * l_cells * k_users);
    for l in 0..l_cells {
        for j in 0..l_cells {
            for k in 0..k_users {
                let (e, c) = est
                    .vector(l, j, k)
                    .iter()
                    .zip(h.vector(l, j, k))
                    .fold((0.0, 0.0), |(e, c), (a, b)| {
                        (e + (a - b).norm_sqr(), c + b.norm_sqr())
                    });
                error_energy.push(e);
                channel_energy.push(c);
            }
        }
    }
    Ok(NmseReport {
        num_cells: l_cells,
        users_per_cell: k_users,
        error_energy,
        channel_energy,
        blocks: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_small_scale, synthesize_channel, uplink_training_noiseless};
    use crate::seed::{stream_rng, Stream};

    #[test]
    fn perfect_training_recovers_gain() {
        let psi = LsfTensor::from_vec(1, 1, vec![2.5]).unwrap();
        let plan = PilotPlan::reuse_one(1, 1);
        let v = estimate_variance(&psi, &plan, 1e12).unwrap();
        assert!((v.gamma(0, 0, 0) - 2.5).abs() < 1e-9);
        assert!(v.gamma(0, 0, 0) <= 2.5);
    }

    #[test]
    fn no_training_energy_means_no_estimate() {
        let psi = LsfTensor::from_vec(1, 1, vec![2.5]).unwrap();
        let plan = PilotPlan::reuse_one(1, 1);
        assert_eq!(estimate_variance(&psi, &plan, 0.0).unwrap().gamma(0, 0, 0), 0.0);
    }

    #[test]
    fn equal_copilot_pair_gives_one_third() {
        let psi = LsfTensor::from_fn(2, 1, |_, _, _| 1.0).unwrap();
        let plan = PilotPlan::reuse_one(2, 1);
        let v = estimate_variance(&psi, &plan, 1.0).unwrap();
        for l in 0..2 {
            for j in 0..2 {
                assert!((v.gamma(l, j, 0) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!((v.nmse(&psi, 0, 0, 0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_single_cell_estimate_is_exact() {
        let psi = LsfTensor::from_vec(1, 2, vec![0.4, 3.0]).unwrap();
        let plan = PilotPlan::reuse_one(1, 2);
        let mut rng = stream_rng(11, Stream::SmallScale, &[0]);
        let h = synthesize_channel(draw_small_scale(8, 1, 2, &mut rng).unwrap(), &psi).unwrap();
        let obs = uplink_training_noiseless(&h, &plan, 1.0).unwrap();
        let est = estimate_channels(&obs, &psi, &plan).unwrap();
        for k in 0..2 {
            for (a, b) in est.vector(0, 0, k).iter().zip(h.vector(0, 0, k)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        let r = estimation_nmse(&est, &h).unwrap();
        assert!(r.nmse(0, 0, 0) < 1e-24);
    }

    #[test]
    fn equal_gain_copilots_get_identical_estimates() {
        let psi = LsfTensor::from_fn(2, 1, |_, _, _| 1.5).unwrap();
        let plan = PilotPlan::reuse_one(2, 1);
        let mut rng = stream_rng(12, Stream::SmallScale, &[0]);
        let h = synthesize_channel(draw_small_scale(8, 2, 1, &mut rng).unwrap(), &psi).unwrap();
        let obs = crate::channel::uplink_training(&h, &plan, 1.0, &mut rng).unwrap();
        let est = estimate_channels(&obs, &psi, &plan).unwrap();
        for l in 0..2 {
            assert_eq!(est.vector(l, 0, 0), est.vector(l, 1, 0));
        }
    }

    #[test]
    fn zero_estimate_gives_unit_nmse() {
        let psi = LsfTensor::from_vec(1, 1, vec![1.0]).unwrap();
        let mut rng = stream_rng(13, Stream::SmallScale, &[0]);
        let h = synthesize_channel(draw_small_scale(8, 1, 1, &mut rng).unwrap(), &psi).unwrap();
        let est = ChannelEstimates::from_vec(1, 1, 8, vec![C64::default(); 8]).unwrap();
        assert!((estimation_nmse(&est, &h).unwrap().nmse(0, 0, 0) - 1.0).abs() < 1e-15);
    }
}
