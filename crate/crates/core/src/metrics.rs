//! Downlink SINR and rate.
//!
//! Both estimators use the same decomposition of the signal received by
//! user (j, k): the mean effective gain E[h_jjk^H a_jk] is the useful part,
//! and its fluctuation, the beams of co-pilot base stations (coherent
//! contamination), every other beam, and noise are treated as worst-case
//! Gaussian interference.
//!
//! The closed forms follow from the MMSE estimate structure. An MRT beam
//! a = ĥ/‖ĥ‖ has E‖ĥ‖² = Mγ, and a ZF beam's effective gain satisfies
//! 1/[(Ĥ^H Ĥ)^{-1}]_kk ~ γ·Gamma(M − K + 1). Co-pilot base stations steer
//! toward a direction parallel to their own estimate of h_ljk, which is
//! where the M-scaled contamination term comes from.

use crate::channel::ChannelBlock;
use crate::estimation::EstimateVariance;
use crate::pilots::{OverheadReport, PilotPlan};
use crate::precoding::{PowerPolicy, Precoder, PrecodingMatrix};
use crate::scenario::LsfTensor;
use crate::{linear_to_db, Error, Result, C64, NOISE_POWER};

/// Fewest coherence blocks accepted by the empirical estimator.
pub const MIN_BLOCKS: usize = 100;

/// Received-power decomposition for one user. All terms are absolute
/// powers against unit noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrBreakdown {
    pub desired: f64,
    pub bf_uncertainty: f64,
    pub coherent_pc: f64,
    pub noncoherent: f64,
    pub noise: f64,
    pub sinr: f64,
}

impl SinrBreakdown {
    pub fn new(
        desired: f64,
        bf_uncertainty: f64,
        coherent_pc: f64,
        noncoherent: f64,
        noise: f64,
    ) -> Self {
        let sinr = desired / (bf_uncertainty + coherent_pc + noncoherent + noise);
        Self {
            desired,
            bf_uncertainty,
            coherent_pc,
            noncoherent,
            noise,
            sinr,
        }
    }

    pub fn sinr_db(&self) -> f64 {
        linear_to_db(self.sinr)
    }

    /// Total interference-plus-noise power.
    pub fn interference(&self) -> f64 {
        self.bf_uncertainty + self.coherent_pc + self.noncoherent + self.noise
    }
}

#[inline]
fn inner(h: &[C64], a: &[C64]) -> C64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in h.iter().zip(a) {
        // conj(x) * y
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
struct UserSums {
    gain: C64,
    gain_sq: f64,
    /// Σ |h_ljk^H a_li|² indexed `[l][i]`.
    beam: Vec<f64>,
}

/// Running sums for the empirical SINR of a set of users.
///
/// Blocks are folded in the order they are added; merging accumulators of
/// consecutive block ranges in range order gives the same result on any
/// number of threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrAccumulator {
    num_cells: usize,
    users_per_cell: usize,
    users: Vec<(usize, usize)>,
    sums: Vec<UserSums>,
    blocks: usize,
}

impl SinrAccumulator {
    pub fn new(num_cells: usize, users_per_cell: usize, users: Vec<(usize, usize)>) -> Self {
        let sums = users
            .iter()
            .map(|_| UserSums {
                gain: C64::default(),
                gain_sq: 0.0,
                beam: vec![0.0; num_cells * users_per_cell],
            })
            .collect();
        Self {
            num_cells,
            users_per_cell,
            users,
            sums,
            blocks: 0,
        }
    }

    pub fn users(&self) -> &[(usize, usize)] {
        &self.users
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Adds one coherence block; `precoders[l]` is base station l's matrix.
    pub fn add_block(&mut self, h: &ChannelBlock, precoders: &[PrecodingMatrix]) -> Result<()> {
        if h.num_cells() != self.num_cells
            || h.users_per_cell() != self.users_per_cell
            || precoders.len() != self.num_cells
            || precoders.iter().any(|p| p.users() != self.users_per_cell)
        {
            return Err(Error::DimensionMismatch(
                "block does not match the accumulator shape".into(),
            ));
        }
        for (&(j, k), sums) in self.users.iter().zip(self.sums.iter_mut()) {
            for (l, pre) in precoders.iter().enumerate() {
                let link = h.vector(l, j, k);
                for i in 0..self.users_per_cell {
                    let g = inner(link, pre.vector(i));
                    sums.beam[l * self.users_per_cell + i] += g.norm_sqr();
                    if l == j && i == k {
                        sums.gain += g;
                        sums.gain_sq += g.norm_sqr();
                    }
                }
            }
        }
        self.blocks += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &SinrAccumulator) {
        debug_assert_eq!(self.users, other.users);
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.gain += b.gain;
            a.gain_sq += b.gain_sq;
            for (x, y) in a.beam.iter_mut().zip(&b.beam) {
                *x += y;
            }
        }
        self.blocks += other.blocks;
    }

    /// Per-user breakdowns under `plan`, in the order users were given.
    pub fn finish(&self, plan: &PilotPlan, policy: &PowerPolicy) -> Result<Vec<SinrBreakdown>> {
        if self.blocks < MIN_BLOCKS {
            return Err(Error::TooFewBlocks {
                got: self.blocks,
                need: MIN_BLOCKS,
            });
        }
        let n = self.blocks as f64;
        let rho_u = policy.per_user_power();
        let k_users = self.users_per_cell;
        Ok(self
            .users
            .iter()
            .zip(&self.sums)
            .map(|(&(j, k), s)| {
                let mean = s.gain / n;
                let desired = mean.norm_sqr();
                let bf = (s.gain_sq / n - desired).max(0.0);
                let p = plan.pilot(j, k);
                let mut coherent = 0.0;
                let mut noncoherent = 0.0;
                for l in 0..self.num_cells {
                    let copilot = plan.user_with_pilot(l, p);
                    for i in 0..k_users {
                        if l == j && i == k {
                            continue;
                        }
                        let power = s.beam[l * k_users + i] / n;
                        if copilot == Some(i) {
                            coherent += power;
                        } else {
                            noncoherent += power;
                        }
                    }
                }
                SinrBreakdown::new(
                    rho_u * desired,
                    rho_u * bf,
                    rho_u * coherent,
                    rho_u * noncoherent,
                    NOISE_POWER,
                )
            })
            .collect())
    }
}

/// Use-and-then-forget SINR of user `(cell, user)` estimated from a
/// sequence of `(channels, per-cell precoders)` blocks.
pub fn empirical_sinr<'a, I>(
    blocks: I,
    plan: &PilotPlan,
    policy: &PowerPolicy,
    user: (usize, usize),
) -> Result<SinrBreakdown>
where
    I: IntoIterator<Item = (&'a ChannelBlock, &'a [PrecodingMatrix])>,
{
    let mut acc = SinrAccumulator::new(plan.num_cells(), plan.users_per_cell(), vec![user]);
    for (h, pre) in blocks {
        acc.add_block(h, pre)?;
    }
    Ok(acc.finish(plan, policy)?[0])
}

/// (E√X)² for X ~ Gamma(n, 1), i.e. (Γ(n + ½) / Γ(n))². Equals n − 1/4
/// to leading order.
pub fn mean_amplitude_sq(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n > 4096 {
        let x = n as f64;
        // Asymptotic series of the gamma ratio squared.
        return x - 0.25 + 1.0 / (32.0 * x) + 1.0 / (128.0 * x * x);
    }
    let mut r = 0.5 * std::f64::consts::PI.sqrt();
    for i in 1..n {
        r *= (i as f64 + 0.5) / i as f64;
    }
    r * r
}

fn check_shapes(gamma: &EstimateVariance, psi: &LsfTensor, plan: &PilotPlan) -> Result<()> {
    if gamma.num_cells() != psi.num_cells()
        || plan.num_cells() != psi.num_cells()
        || gamma.users_per_cell() != psi.users_per_cell()
        || plan.users_per_cell() != psi.users_per_cell()
    {
        return Err(Error::DimensionMismatch(
            "variances, gains and pilot plan disagree on L or K".into(),
        ));
    }
    Ok(())
}

/// Closed-form breakdown for a beam whose effective gain to its own user is
/// γ·X with E[X] = `dof` and (E√X)² = `coherent_sq`. `zf` selects whether
/// the estimated component is nulled toward non-intended co-pilot beams.
fn closed_form(
    gamma: &EstimateVariance,
    psi: &LsfTensor,
    plan: &PilotPlan,
    policy: &PowerPolicy,
    (j, k): (usize, usize),
    dof: f64,
    coherent_sq: f64,
    zf: bool,
) -> SinrBreakdown {
    let rho_u = policy.per_user_power();
    let k_users = psi.users_per_cell() as f64;
    let p = plan.pilot(j, k);
    let g_own = gamma.gamma(j, j, k);
    let psi_own = psi.get(j, j, k);
    let desired = coherent_sq * g_own;
    let bf = (dof - coherent_sq) * g_own + psi_own - g_own;
    let mut coherent = 0.0;
    let mut noncoherent = 0.0;
    for l in 0..psi.num_cells() {
        let g = gamma.gamma(l, j, k);
        let s = psi.get(l, j, k);
        if plan.user_with_pilot(l, p).is_some() {
            if l != j {
                coherent += dof * g + s - g;
            }
            // The other K − 1 beams of a co-pilot cell.
            noncoherent += (k_users - 1.0) * if zf { s - g } else { s };
        } else {
            noncoherent += k_users * s;
        }
    }
    SinrBreakdown::new(
        rho_u * desired,
        rho_u * bf,
        rho_u * coherent,
        rho_u * noncoherent,
        NOISE_POWER,
    )
}

/// MRT closed form:
///
/// ```text
/// Γ = g_M γ_jjk / ( M Σ_{l∈C_jk∖j} γ_ljk + Σ_l Σ_i Ψ_ljk − Σ_{l∈C_jk} γ_ljk + (M − g_M) γ_jjk + σ²/ρ_u )
/// ```
///
/// with g_M = (Γ(M + ½)/Γ(M))² ≈ M − ¼.
pub fn closed_form_sinr_mrt(
    gamma: &EstimateVariance,
    psi: &LsfTensor,
    antennas: usize,
    plan: &PilotPlan,
    policy: &PowerPolicy,
    user: (usize, usize),
) -> Result<SinrBreakdown> {
    check_shapes(gamma, psi, plan)?;
    if antennas == 0 {
        return Err(Error::InvalidParameter {
            name: "antennas",
            reason: "must be at least 1".into(),
        });
    }
    Ok(closed_form(
        gamma,
        psi,
        plan,
        policy,
        user,
        antennas as f64,
        mean_amplitude_sq(antennas),
        false,
    ))
}

/// ZF closed form with n = M − K + 1 effective dimensions:
///
/// ```text
/// Γ = g_n γ_jjk / ( n Σ_{l∈C_jk∖j} γ_ljk + Σ_l Σ_i (Ψ_ljk − γ_ljk·[l ∈ C_jk]) + (n − g_n) γ_jjk + σ²/ρ_u )
/// ```
pub fn closed_form_sinr_zf(
    gamma: &EstimateVariance,
    psi: &LsfTensor,
    antennas: usize,
    plan: &PilotPlan,
    policy: &PowerPolicy,
    user: (usize, usize),
) -> Result<SinrBreakdown> {
    check_shapes(gamma, psi, plan)?;
    let k_users = psi.users_per_cell();
    if antennas <= k_users {
        return Err(Error::TooFewAntennas {
            antennas,
            users: k_users,
        });
    }
    let n = antennas - k_users + 1;
    Ok(closed_form(
        gamma,
        psi,
        plan,
        policy,
        user,
        n as f64,
        mean_amplitude_sq(n),
        true,
    ))
}

pub fn closed_form_sinr(
    kind: Precoder,
    gamma: &EstimateVariance,
    psi: &LsfTensor,
    antennas: usize,
    plan: &PilotPlan,
    policy: &PowerPolicy,
    user: (usize, usize),
) -> Result<SinrBreakdown> {
    match kind {
        Precoder::Mrt => closed_form_sinr_mrt(gamma, psi, antennas, plan, policy, user),
        Precoder::Zf => closed_form_sinr_zf(gamma, psi, antennas, plan, policy, user),
    }
}

/// Large-array limit γ_jjk / Σ_{l∈C_jk∖j} γ_ljk; `f64::INFINITY` when the
/// user has no contaminating cell.
pub fn asymptotic_sinr(gamma: &EstimateVariance, plan: &PilotPlan, (j, k): (usize, usize)) -> f64 {
    let contamination: f64 = plan
        .users_with_pilot(plan.pilot(j, k))
        .iter()
        .filter(|&&(l, _)| l != j)
        .map(|&(l, _)| gamma.gamma(l, j, k))
        .sum();
    if contamination > 0.0 {
        gamma.gamma(j, j, k) / contamination
    } else {
        f64::INFINITY
    }
}

/// prelog · log₂(1 + Γ).
pub fn rate(sinr: f64, prelog: f64) -> f64 {
    prelog * (1.0 + sinr).log2()
}

/// Per-user rates in bit/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub prelog: f64,
    pub rates: Vec<f64>,
}

impl RateReport {
    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.rates.is_empty() {
            0.0
        } else {
            self.sum() / self.rates.len() as f64
        }
    }
}

pub fn achievable_rate(sinr: &[SinrBreakdown], overhead: &OverheadReport) -> RateReport {
    RateReport {
        prelog: overhead.prelog,
        rates: sinr.iter().map(|s| rate(s.sinr, overhead.prelog)).collect(),
    }
}
