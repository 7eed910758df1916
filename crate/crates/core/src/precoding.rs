//! MRT and ZF precoders built from a cell's own channel estimates.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::estimation::ChannelEstimates;
use crate::{Error, Result, C64};

/// Condition number of the estimate Gram matrix above which ZF is refused.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Precoder {
    Mrt,
    Zf,
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precoder::Mrt => "mrt",
            Precoder::Zf => "zf",
        })
    }
}

impl FromStr for Precoder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mrt" => Ok(Precoder::Mrt),
            "zf" => Ok(Precoder::Zf),
            other => Err(format!("unknown precoder `{other}` (expected mrt or zf)")),
        }
    }
}

/// Unit-norm precoding vectors a_li of one cell, with the power ρ_u each
/// vector is transmitted at.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    pub cell: usize,
    pub kind: Precoder,
    antennas: usize,
    vectors: Vec<C64>,
    /// Per-vector transmit power; 1 until a power policy is applied.
    pub power: Vec<f64>,
}

impl PrecodingMatrix {
    pub fn users(&self) -> usize {
        self.power.len()
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    #[inline]
    pub fn vector(&self, user: usize) -> &[C64] {
        &self.vectors[user * self.antennas..(user + 1) * self.antennas]
    }

    /// Σ_i ρ_i ‖a_i‖².
    pub fn total_power(&self) -> f64 {
        (0..self.users())
            .map(|i| self.power[i] * self.vector(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }
}

fn normalize(v: &mut [C64]) -> bool {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return false;
    }
    v.iter_mut().for_each(|z| *z /= n);
    true
}

fn own_estimates(est: &ChannelEstimates, cell: usize) -> Result<()> {
    if cell >= est.num_cells() {
        return Err(Error::DimensionMismatch(format!(
            "cell {cell} out of range for {} cells",
            est.num_cells()
        )));
    }
    Ok(())
}

/// a_lk = ĥ_llk / ‖ĥ_llk‖.
pub fn mrt_precoder(est: &ChannelEstimates, cell: usize) -> Result<PrecodingMatrix> {
    own_estimates(est, cell)?;
    let (k_users, m) = (est.users_per_cell(), est.antennas());
    let mut vectors = Vec::with_capacity(k_users * m);
    for k in 0..k_users {
        let start = vectors.len();
        vectors.extend_from_slice(est.vector(cell, cell, k));
        if !normalize(&mut vectors[start..]) {
            return Err(Error::DegeneratePrecoder { cell, user: k });
        }
    }
    Ok(PrecodingMatrix {
        cell,
        kind: Precoder::Mrt,
        antennas: m,
        vectors,
        power: vec![1.0; k_users],
    })
}

/// a^H b.
fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::default(), |acc, (x, y)| acc + x.conj() * y)
}

fn norm1(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Columns of Ĥ(Ĥ^H Ĥ)^{-1}, each scaled to unit norm.
pub fn zf_precoder(est: &ChannelEstimates, cell: usize) -> Result<PrecodingMatrix> {
    own_estimates(est, cell)?;
    let (k_users, m) = (est.users_per_cell(), est.antennas());
    if m <= k_users {
        return Err(Error::TooFewAntennas {
            antennas: m,
            users: k_users,
        });
    }
    let cols: Vec<&[C64]> = (0..k_users).map(|k| est.vector(cell, cell, k)).collect();
    let mut gram = DMatrix::<C64>::zeros(k_users, k_users);
    for a in 0..k_users {
        for b in a..k_users {
            let g = inner(cols[a], cols[b]);
            gram[(a, b)] = g;
            gram[(b, a)] = g.conj();
        }
    }
    let inverse = gram
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::RankDeficient {
            cell,
            condition: f64::INFINITY,
        })?;
    let condition = norm1(&gram) * norm1(&inverse);
    if !(condition <= MAX_GRAM_CONDITION) {
        return Err(Error::RankDeficient { cell, condition });
    }
    // Column k of Ĥ G⁻¹ is Σ_i ĥ_i G⁻¹[i, k].
    let mut vectors = vec![C64::default(); k_users * m];
    for (k, w) in vectors.chunks_exact_mut(m).enumerate() {
        for (i, col) in cols.iter().enumerate() {
            let c = inverse[(i, k)];
            w.iter_mut().zip(col.iter()).for_each(|(x, h)| *x += h * c);
        }
        if !normalize(w) {
            return Err(Error::DegeneratePrecoder { cell, user: k });
        }
    }
    Ok(PrecodingMatrix {
        cell,
        kind: Precoder::Zf,
        antennas: m,
        vectors,
        power: vec![1.0; k_users],
    })
}

pub fn precode(kind: Precoder, est: &ChannelEstimates, cell: usize) -> Result<PrecodingMatrix> {
    match kind {
        Precoder::Mrt => mrt_precoder(est, cell),
        Precoder::Zf => zf_precoder(est, cell),
    }
}

/// Equal split of the base-station power over its users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPolicy {
    /// Total downlink power ρ_d per base station.
    pub rho_d: f64,
    pub users_per_cell: usize,
}

impl PowerPolicy {
    pub fn new(rho_d: f64, users_per_cell: usize) -> Self {
        Self {
            rho_d,
            users_per_cell,
        }
    }

    /// ρ_u = ρ_d / K.
    pub fn per_user_power(&self) -> f64 {
        self.rho_d / self.users_per_cell as f64
    }
}

pub fn apply_power_policy(mut precoder: PrecodingMatrix, policy: &PowerPolicy) -> PrecodingMatrix {
    let rho_u = policy.per_user_power();
    precoder.power.iter_mut().for_each(|p| *p = rho_u);
    precoder
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v: Vec<C64>) -> ChannelEstimates {
        let m = v.len();
        ChannelEstimates::from_vec(1, 1, m, v).unwrap()
    }

    #[test]
    fn unit_vector_is_its_own_precoder() {
        let mut v = vec![C64::default(); 4];
        v[0] = C64::new(1.0, 0.0);
        let a = mrt_precoder(&single(v.clone()), 0).unwrap();
        assert_eq!(a.vector(0), &v[..]);
    }

    #[test]
    fn positive_scaling_leaves_mrt_unchanged() {
        let v: Vec<C64> = (0..5).map(|i| C64::new(i as f64 - 1.5, 0.5)).collect();
        let w: Vec<C64> = v.iter().map(|z| z * 7.25).collect();
        let a = mrt_precoder(&single(v), 0).unwrap();
        let b = mrt_precoder(&single(w), 0).unwrap();
        for (x, y) in a.vector(0).iter().zip(b.vector(0)) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_estimate_rejected() {
        let err = mrt_precoder(&single(vec![C64::default(); 3]), 0).unwrap_err();
        assert!(matches!(err, Error::DegeneratePrecoder { .. }));
    }

    #[test]
    fn single_user_zf_matches_mrt() {
        let v: Vec<C64> = (0..6).map(|i| C64::new(0.3 * i as f64, 1.0 - 0.2 * i as f64)).collect();
        let est = single(v);
        let a = mrt_precoder(&est, 0).unwrap();
        let b = zf_precoder(&est, 0).unwrap();
        for (x, y) in a.vector(0).iter().zip(b.vector(0)) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn zf_needs_more_antennas_than_users() {
        let est = ChannelEstimates::from_vec(1, 2, 2, vec![C64::new(1.0, 0.0); 4]).unwrap();
        assert!(matches!(zf_precoder(&est, 0), Err(Error::TooFewAntennas { .. })));
    }

    #[test]
    fn collinear_estimates_rejected_by_zf() {
        let col: Vec<C64> = (0..4).map(|i| C64::new(i as f64 + 1.0, 0.0)).collect();
        let data = [col.clone(), col].concat();
        let est = ChannelEstimates::from_vec(1, 2, 4, data).unwrap();
        assert!(matches!(zf_precoder(&est, 0), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn power_split() {
        let policy = PowerPolicy::new(1.0, 10);
        assert!((policy.per_user_power() - 0.1).abs() < 1e-15);
        let v: Vec<C64> = (0..40).map(|i| C64::new((i % 7) as f64, (i % 3) as f64)).collect();
        let est = ChannelEstimates::from_vec(1, 10, 4, v).unwrap();
        let a = apply_power_policy(mrt_precoder(&est, 0).unwrap(), &policy);
        assert!((a.total_power() - 1.0).abs() < 1e-12);
        let z = apply_power_policy(a, &PowerPolicy::new(0.0, 10));
        assert_eq!(z.total_power(), 0.0);
    }
}
