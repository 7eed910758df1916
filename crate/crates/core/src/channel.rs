//! Small-scale fading, channel synthesis and uplink training.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::pilots::PilotPlan;
use crate::scenario::LsfTensor;
use crate::{Error, Result, C64, NOISE_POWER};

/// Fills `buf` with i.i.d. CN(0, 1) samples.
pub fn fill_complex_gaussian<R: Rng + ?Sized>(buf: &mut [C64], rng: &mut R) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for z in buf.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = C64::new(s * re, s * im);
    }
}

/// Per-link vectors of length M stored `[l][j][k][m]`.
#[derive(Debug, Clone, PartialEq)]
struct LinkVectors {
    num_cells: usize,
    users_per_cell: usize,
    antennas: usize,
    data: Vec<C64>,
}

impl LinkVectors {
    #[inline]
    fn offset(&self, bs: usize, cell: usize, user: usize) -> usize {
        ((bs * self.num_cells + cell) * self.users_per_cell + user) * self.antennas
    }

    #[inline]
    fn vector(&self, bs: usize, cell: usize, user: usize) -> &[C64] {
        let o = self.offset(bs, cell, user);
        &self.data[o..o + self.antennas]
    }
}

/// Small-scale fading Θ_ljk, one CN(0, I_M) vector per link.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleBlock(LinkVectors);

impl SmallScaleBlock {
    pub fn num_cells(&self) -> usize {
        self.0.num_cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.0.users_per_cell
    }

    pub fn antennas(&self) -> usize {
        self.0.antennas
    }

    pub fn vector(&self, bs: usize, cell: usize, user: usize) -> &[C64] {
        self.0.vector(bs, cell, user)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0.data
    }
}

pub fn draw_small_scale<R: Rng + ?Sized>(
    antennas: usize,
    num_cells: usize,
    users_per_cell: usize,
    rng: &mut R,
) -> Result<SmallScaleBlock> {
    if antennas == 0 {
        return Err(Error::InvalidParameter {
            name: "antennas",
            reason: "must be at least 1".into(),
        });
    }
    let mut data = vec![C64::default(); num_cells * num_cells * users_per_cell * antennas];
    fill_complex_gaussian(&mut data, rng);
    Ok(SmallScaleBlock(LinkVectors {
        num_cells,
        users_per_cell,
        antennas,
        data,
    }))
}

/// Instantaneous channels h_ljk = √Ψ_ljk Θ_ljk for one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBlock(LinkVectors);

impl ChannelBlock {
    pub fn num_cells(&self) -> usize {
        self.0.num_cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.0.users_per_cell
    }

    pub fn antennas(&self) -> usize {
        self.0.antennas
    }

    /// Channel between base station `bs` and user `user` of cell `cell`.
    #[inline]
    pub fn vector(&self, bs: usize, cell: usize, user: usize) -> &[C64] {
        self.0.vector(bs, cell, user)
    }

    /// Builds a block directly from `[l][j][k][m]` samples.
    pub fn from_vec(
        num_cells: usize,
        users_per_cell: usize,
        antennas: usize,
        data: Vec<C64>,
    ) -> Result<Self> {
        if data.len() != num_cells * num_cells * users_per_cell * antennas {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for L = {num_cells}, K = {users_per_cell}, M = {antennas}",
                data.len()
            )));
        }
        Ok(Self(LinkVectors {
            num_cells,
            users_per_cell,
            antennas,
            data,
        }))
    }
}

/// Scales each small-scale vector by its large-scale amplitude. Consumes the
/// draw so the buffer is reused.
pub fn synthesize_channel(theta: SmallScaleBlock, psi: &LsfTensor) -> Result<ChannelBlock> {
    let mut v = theta.0;
    if psi.num_cells() != v.num_cells || psi.users_per_cell() != v.users_per_cell {
        return Err(Error::DimensionMismatch(format!(
            "fading block is L = {}, K = {} but gains are L = {}, K = {}",
            v.num_cells,
            v.users_per_cell,
            psi.num_cells(),
            psi.users_per_cell()
        )));
    }
    let m = v.antennas;
    for (link, chunk) in v.data.chunks_exact_mut(m).enumerate() {
        let amp = psi.as_slice()[link].sqrt();
        chunk.iter_mut().for_each(|z| *z *= amp);
    }
    Ok(ChannelBlock(v))
}

/// Despread pilot observation at every base station, one vector per pilot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingObservation {
    num_cells: usize,
    num_pilots: usize,
    antennas: usize,
    xi: Vec<C64>,
    /// Pilot transmit power ρ_p.
    pub pilot_snr: f64,
    /// Per-symbol noise variance at the base station.
    pub noise_power: f64,
}

impl TrainingObservation {
    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_pilots(&self) -> usize {
        self.num_pilots
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Observation ξ at base station `bs` correlated with pilot `pilot`.
    #[inline]
    pub fn vector(&self, bs: usize, pilot: usize) -> &[C64] {
        let o = (bs * self.num_pilots + pilot) * self.antennas;
        &self.xi[o..o + self.antennas]
    }

    /// Effective pilot amplitude √(ρ_p · Y_p).
    pub fn pilot_gain(&self) -> f64 {
        (self.pilot_snr * self.num_pilots as f64).sqrt()
    }
}

fn check_plan(h: &ChannelBlock, plan: &PilotPlan) -> Result<()> {
    if plan.num_cells() != h.num_cells() || plan.users_per_cell() != h.users_per_cell() {
        return Err(Error::DimensionMismatch(format!(
            "pilot plan is L = {}, K = {} but channels are L = {}, K = {}",
            plan.num_cells(),
            plan.users_per_cell(),
            h.num_cells(),
            h.users_per_cell()
        )));
    }
    let num_pilots = plan.num_pilots();
    for j in 0..plan.num_cells() {
        for k in 0..plan.users_per_cell() {
            let index = plan.pilot(j, k);
            if index >= num_pilots {
                return Err(Error::PilotOutOfRange { index, num_pilots });
            }
        }
    }
    Ok(())
}

fn despread(h: &ChannelBlock, plan: &PilotPlan, pilot_snr: f64) -> TrainingObservation {
    let (l_cells, m, y) = (h.num_cells(), h.antennas(), plan.num_pilots());
    let gain = (pilot_snr * y as f64).sqrt();
    let mut xi = vec![C64::default(); l_cells * y * m];
    for l in 0..l_cells {
        for p in 0..y {
            let out = &mut xi[(l * y + p) * m..(l * y + p + 1) * m];
            for &(j, k) in plan.users_with_pilot(p) {
                for (o, v) in out.iter_mut().zip(h.vector(l, j, k)) {
                    *o += v * gain;
                }
            }
        }
    }
    TrainingObservation {
        num_cells: l_cells,
        num_pilots: y,
        antennas: m,
        xi,
        pilot_snr,
        noise_power: NOISE_POWER,
    }
}

/// ξ_{l,p} = √(ρ_p Y_p) Σ_{(j,k): pilot(j,k) = p} h_ljk + n, with unit-variance
/// noise after correlation with an orthonormal pilot of length Y_p.
pub fn uplink_training<R: Rng + ?Sized>(
    h: &ChannelBlock,
    plan: &PilotPlan,
    pilot_snr: f64,
    rng: &mut R,
) -> Result<TrainingObservation> {
    check_plan(h, plan)?;
    let mut obs = despread(h, plan, pilot_snr);
    let s = (NOISE_POWER / 2.0).sqrt();
    for z in obs.xi.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += C64::new(s * re, s * im);
    }
    Ok(obs)
}

/// Training observation with the noise term removed.
pub fn uplink_training_noiseless(
    h: &ChannelBlock,
    plan: &PilotPlan,
    pilot_snr: f64,
) -> Result<TrainingObservation> {
    check_plan(h, plan)?;
    let mut obs = despread(h, plan, pilot_snr);
    obs.noise_power = 0.0;
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pilots::PilotPlan;
    use crate::seed::{stream_rng, Stream};

    fn unit_psi(l: usize, k: usize) -> LsfTensor {
        LsfTensor::from_fn(l, k, |_, _, _| 1.0).unwrap()
    }

    #[test]
    fn unit_gain_keeps_draw() {
        let mut rng = stream_rng(1, Stream::SmallScale, &[0]);
        let theta = draw_small_scale(8, 2, 3, &mut rng).unwrap();
        let h = synthesize_channel(theta.clone(), &unit_psi(2, 3)).unwrap();
        assert_eq!(h.0.data, theta.as_slice());
    }

    #[test]
    fn gain_four_doubles_norm() {
        let mut rng = stream_rng(2, Stream::SmallScale, &[0]);
        let theta = draw_small_scale(16, 1, 1, &mut rng).unwrap();
        let psi = LsfTensor::from_vec(1, 1, vec![4.0]).unwrap();
        let h = synthesize_channel(theta.clone(), &psi).unwrap();
        let n = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((n(h.vector(0, 0, 0)) - 2.0 * n(theta.vector(0, 0, 0))).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_draw() {
        let a = draw_small_scale(4, 2, 2, &mut stream_rng(5, Stream::SmallScale, &[1])).unwrap();
        let b = draw_small_scale(4, 2, 2, &mut stream_rng(5, Stream::SmallScale, &[1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_antennas_rejected() {
        assert!(draw_small_scale(0, 1, 1, &mut stream_rng(5, Stream::SmallScale, &[])).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let theta = draw_small_scale(4, 2, 2, &mut stream_rng(5, Stream::SmallScale, &[])).unwrap();
        assert!(synthesize_channel(theta, &unit_psi(2, 3)).is_err());
    }

    #[test]
    fn noiseless_single_user_recovers_channel() {
        let mut rng = stream_rng(3, Stream::SmallScale, &[0]);
        let psi = LsfTensor::from_vec(1, 1, vec![0.7]).unwrap();
        let h = synthesize_channel(draw_small_scale(6, 1, 1, &mut rng).unwrap(), &psi).unwrap();
        let plan = PilotPlan::reuse_one(1, 1);
        let obs = uplink_training_noiseless(&h, &plan, 3.0).unwrap();
        let g = obs.pilot_gain();
        for (x, v) in obs.vector(0, 0).iter().zip(h.vector(0, 0, 0)) {
            assert!((x / g - v).norm() < 1e-12);
        }
    }

    #[test]
    fn copilot_cells_superpose() {
        // Two single-user cells on the same pilot with identical channels.
        let m = 5;
        let base: Vec<C64> = (0..m).map(|i| C64::new(i as f64, 1.0)).collect();
        let data: Vec<C64> = (0..4).flat_map(|_| base.clone()).collect();
        let h = ChannelBlock::from_vec(2, 1, m, data).unwrap();
        let plan = PilotPlan::reuse_one(2, 1);
        let obs = uplink_training_noiseless(&h, &plan, 2.0).unwrap();
        let g = obs.pilot_gain();
        for l in 0..2 {
            for (x, v) in obs.vector(l, 0).iter().zip(&base) {
                assert!((x - v * (2.0 * g)).norm() < 1e-12);
            }
        }
    }
}
