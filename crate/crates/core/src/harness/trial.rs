use rayon::prelude::*;

use super::SimConfig;
use crate::channel::{draw_small_scale, synthesize_channel, uplink_training};
use crate::estimation::{estimate_serving_channels, estimate_variance, EstimateVariance};
use crate::metrics::{achievable_rate, closed_form_sinr, RateReport, SinrAccumulator, SinrBreakdown};
use crate::pilots::{
    assign_pilots, channel_quality, group_users, pilot_overhead, OverheadReport, PilotPlan,
    PilotScheme,
};
use crate::precoding::{apply_power_policy, precode, PowerPolicy, Precoder};
use crate::scenario::{build_layout, compute_large_scale_fading, drop_users, CellLayout, LsfTensor};
use crate::seed::{stream_rng, Stream};
use crate::Result;

/// Blocks folded sequentially before partial sums are merged.
const BATCH: usize = 25;

/// Empirical and closed-form results of one precoder under one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderOutcome {
    pub precoder: Precoder,
    pub empirical: Vec<SinrBreakdown>,
    pub closed_form: Vec<SinrBreakdown>,
    pub empirical_rate: RateReport,
    pub closed_form_rate: RateReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: PilotScheme,
    pub plan: PilotPlan,
    pub overhead: OverheadReport,
    pub variance: EstimateVariance,
    pub precoders: Vec<PrecoderOutcome>,
}

impl SchemeOutcome {
    pub fn precoder(&self, kind: Precoder) -> Option<&PrecoderOutcome> {
        self.precoders.iter().find(|p| p.precoder == kind)
    }
}

/// Everything one drop produced. Per-user vectors follow `users`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub drop_index: u64,
    pub users: Vec<(usize, usize)>,
    pub psi: LsfTensor,
    pub schemes: Vec<SchemeOutcome>,
}

impl TrialResult {
    pub fn scheme(&self, scheme: PilotScheme) -> Option<&SchemeOutcome> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

/// Runs one geometry drop: users and shadowing come from the
/// `(seed, drop_index)` geometry stream, then `cfg.blocks` coherence blocks
/// are simulated for every scheme and precoder.
pub fn run_trial(cfg: &SimConfig, drop_index: u64) -> Result<TrialResult> {
    cfg.validate()?;
    let layout = build_layout(cfg.cells, &cfg.pathloss)?;
    let mut rng = stream_rng(cfg.seed, Stream::Geometry, &[drop_index]);
    let drop = drop_users(&layout, cfg.users_per_cell, &cfg.pathloss, &mut rng)?;
    let psi = compute_large_scale_fading(&layout, &drop, &cfg.pathloss, &mut rng)?;
    run_trial_with_gains(cfg, &layout, psi, drop_index)
}

/// Same as [`run_trial`] for externally supplied large-scale gains.
pub fn run_trial_with_gains(
    cfg: &SimConfig,
    layout: &CellLayout,
    psi: LsfTensor,
    drop_index: u64,
) -> Result<TrialResult> {
    let policy = PowerPolicy::new(cfg.dl_power, cfg.users_per_cell);
    let users: Vec<(usize, usize)> = cfg
        .measured_cells()
        .into_iter()
        .flat_map(|j| (0..cfg.users_per_cell).map(move |k| (j, k)))
        .collect();

    let quality = channel_quality(&psi);
    let grouping = group_users(&quality, cfg.tau)?;
    let plans = cfg
        .schemes
        .iter()
        .map(|&s| assign_pilots(&grouping, s, layout))
        .collect::<Result<Vec<_>>>()?;

    let batches = cfg.blocks.div_ceil(BATCH);
    let partial = (0..batches)
        .into_par_iter()
        .map(|b| {
            let range = b * BATCH..((b + 1) * BATCH).min(cfg.blocks);
            simulate_batch(cfg, &psi, &plans, &policy, &users, drop_index, range)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = fresh_accumulators(cfg, &plans, &users);
    for batch in &partial {
        for (a, b) in acc.iter_mut().flatten().zip(batch.iter().flatten()) {
            a.merge(b);
        }
    }

    let mut schemes = Vec::with_capacity(plans.len());
    for (plan, accs) in plans.into_iter().zip(acc) {
        let overhead = pilot_overhead(&plan, cfg.coherence_symbols)?;
        let variance = estimate_variance(&psi, &plan, cfg.pilot_snr)?;
        let mut precoders = Vec::with_capacity(cfg.precoders.len());
        for (&kind, acc) in cfg.precoders.iter().zip(accs) {
            let empirical = acc.finish(&plan, &policy)?;
            let closed_form = users
                .iter()
                .map(|&u| closed_form_sinr(kind, &variance, &psi, cfg.antennas, &plan, &policy, u))
                .collect::<Result<Vec<_>>>()?;
            precoders.push(PrecoderOutcome {
                precoder: kind,
                empirical_rate: achievable_rate(&empirical, &overhead),
                closed_form_rate: achievable_rate(&closed_form, &overhead),
                empirical,
                closed_form,
            });
        }
        schemes.push(SchemeOutcome {
            scheme: plan.scheme(),
            plan,
            overhead,
            variance,
            precoders,
        });
    }
    Ok(TrialResult {
        drop_index,
        users,
        psi,
        schemes,
    })
}

fn fresh_accumulators(
    cfg: &SimConfig,
    plans: &[PilotPlan],
    users: &[(usize, usize)],
) -> Vec<Vec<SinrAccumulator>> {
    plans
        .iter()
        .map(|_| {
            cfg.precoders
                .iter()
                .map(|_| SinrAccumulator::new(cfg.cells, cfg.users_per_cell, users.to_vec()))
                .collect()
        })
        .collect()
}

fn simulate_batch(
    cfg: &SimConfig,
    psi: &LsfTensor,
    plans: &[PilotPlan],
    policy: &PowerPolicy,
    users: &[(usize, usize)],
    drop_index: u64,
    blocks: std::ops::Range<usize>,
) -> Result<Vec<Vec<SinrAccumulator>>> {
    let mut acc = fresh_accumulators(cfg, plans, users);
    let mut precoders = Vec::with_capacity(cfg.cells);
    for block in blocks {
        let key = [drop_index, block as u64];
        // Small-scale fading is shared by all schemes of a block.
        let mut rng = stream_rng(cfg.seed, Stream::SmallScale, &key);
        let theta = draw_small_scale(cfg.antennas, cfg.cells, cfg.users_per_cell, &mut rng)?;
        let h = synthesize_channel(theta, psi)?;
        for (plan, accs) in plans.iter().zip(acc.iter_mut()) {
            let mut rng = stream_rng(
                cfg.seed,
                Stream::TrainingNoise,
                &[drop_index, block as u64, plan.scheme().code()],
            );
            let obs = uplink_training(&h, plan, cfg.pilot_snr, &mut rng)?;
            let est = estimate_serving_channels(&obs, psi, plan)?;
            for (&kind, acc) in cfg.precoders.iter().zip(accs.iter_mut()) {
                precoders.clear();
                for l in 0..cfg.cells {
                    precoders.push(apply_power_policy(precode(kind, &est, l)?, policy));
                }
                acc.add_block(&h, &precoders)?;
            }
        }
    }
    Ok(acc)
}
