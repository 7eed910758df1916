//! User grouping and pilot assignment.
//!
//! Users are split per cell into center and edge groups by comparing their
//! serving-cell gain with a scaled midrange threshold. Pilots are then handed
//! out under one of three schemes:
//!
//! - `reuse1`: every cell reuses the same K pilots.
//! - `reuseN`: cells are colored with N colors and each color owns a bank of
//!   K pilots, so only same-colored cells contaminate each other.
//! - `grouping`: center users share one bank (indexed by their quality rank
//!   within the cell) while every edge user gets a pilot of its own.

use std::fmt;
use std::str::FromStr;

use crate::scenario::{CellLayout, LsfTensor};
use crate::{Error, Result};

/// Channel quality ℓ_ik per user, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityVector {
    users_per_cell: usize,
    ell: Vec<f64>,
}

impl QualityVector {
    pub fn new(users_per_cell: usize, ell: Vec<f64>) -> Result<Self> {
        if users_per_cell == 0 || ell.len() % users_per_cell != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} qualities do not split into cells of {users_per_cell}",
                ell.len()
            )));
        }
        if let Some(bad) = ell.iter().find(|q| !(**q > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "quality",
                reason: format!("{bad} is not positive"),
            });
        }
        Ok(Self { users_per_cell, ell })
    }

    pub fn num_cells(&self) -> usize {
        self.ell.len() / self.users_per_cell
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    pub fn cell(&self, cell: usize) -> &[f64] {
        &self.ell[cell * self.users_per_cell..(cell + 1) * self.users_per_cell]
    }

    pub fn get(&self, cell: usize, user: usize) -> f64 {
        self.ell[cell * self.users_per_cell + user]
    }
}

/// ℓ_ik = Ψ_iik, the gain from the serving base station.
pub fn channel_quality(psi: &LsfTensor) -> QualityVector {
    let (l, k) = (psi.num_cells(), psi.users_per_cell());
    let ell = (0..l)
        .flat_map(|i| (0..k).map(move |u| (i, u)))
        .map(|(i, u)| psi.get(i, i, u))
        .collect();
    QualityVector {
        users_per_cell: k,
        ell,
    }
}

/// (max + min) / 2 over one cell's qualities.
pub fn midrange_threshold(ell: &[f64]) -> Result<f64> {
    let (lo, hi) = ell
        .iter()
        .fold(None, |acc: Option<(f64, f64)>, &q| match acc {
            None => Some((q, q)),
            Some((lo, hi)) => Some((lo.min(q), hi.max(q))),
        })
        .ok_or(Error::InvalidParameter {
            name: "quality",
            reason: "midrange of an empty list".into(),
        })?;
    Ok(0.5 * (hi + lo))
}

/// Center/edge split of every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    pub tau: f64,
    /// Midrange threshold μ_i per cell.
    pub mu: Vec<f64>,
    /// Center users per cell, best quality first.
    pub center: Vec<Vec<usize>>,
    /// Edge users per cell, by user index.
    pub edge: Vec<Vec<usize>>,
    users_per_cell: usize,
}

impl Grouping {
    /// Grouping that declares every user a center user.
    pub fn all_center(num_cells: usize, users_per_cell: usize) -> Self {
        Self {
            tau: 0.0,
            mu: vec![0.0; num_cells],
            center: vec![(0..users_per_cell).collect(); num_cells],
            edge: vec![Vec::new(); num_cells],
            users_per_cell,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.center.len()
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    /// K_ic.
    pub fn center_count(&self, cell: usize) -> usize {
        self.center[cell].len()
    }

    /// K_ie.
    pub fn edge_count(&self, cell: usize) -> usize {
        self.edge[cell].len()
    }

    pub fn is_edge(&self, cell: usize, user: usize) -> bool {
        self.edge[cell].contains(&user)
    }
}

/// User `(i, k)` is a center user iff ℓ_ik ≥ τ·μ_i.
pub fn group_users(quality: &QualityVector, tau: f64) -> Result<Grouping> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("{tau} is not a finite non-negative number"),
        });
    }
    let mut g = Grouping {
        tau,
        mu: Vec::new(),
        center: Vec::new(),
        edge: Vec::new(),
        users_per_cell: quality.users_per_cell(),
    };
    for i in 0..quality.num_cells() {
        let ell = quality.cell(i);
        let mu = midrange_threshold(ell)?;
        let threshold = tau * mu;
        let (mut center, edge): (Vec<usize>, Vec<usize>) =
            (0..ell.len()).partition(|&k| ell[k] >= threshold);
        // Descending quality; rank r takes shared pilot r.
        center.sort_by(|&a, &b| ell[b].total_cmp(&ell[a]).then(a.cmp(&b)));
        g.mu.push(mu);
        g.center.push(center);
        g.edge.push(edge);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PilotScheme {
    /// Reuse factor ξ: ξ color groups, ξ·K pilots.
    Reuse(usize),
    Grouping,
}

impl PilotScheme {
    pub const REUSE1: PilotScheme = PilotScheme::Reuse(1);
    pub const REUSE3: PilotScheme = PilotScheme::Reuse(3);

    /// Plot family: all fixed-reuse schemes share one chart.
    pub fn family(self) -> &'static str {
        match self {
            PilotScheme::Reuse(_) => "reuse",
            PilotScheme::Grouping => "grouping",
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            PilotScheme::Reuse(x) => x as u64,
            PilotScheme::Grouping => 1 << 32,
        }
    }
}

impl fmt::Display for PilotScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PilotScheme::Reuse(x) => write!(f, "reuse{x}"),
            PilotScheme::Grouping => f.write_str("grouping"),
        }
    }
}

impl FromStr for PilotScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "grouping" {
            return Ok(PilotScheme::Grouping);
        }
        match s.strip_prefix("reuse").map(str::parse::<usize>) {
            Some(Ok(x)) if x >= 1 => Ok(PilotScheme::Reuse(x)),
            _ => Err(format!(
                "unknown pilot scheme `{s}` (expected reuse1, reuse3, reuseN or grouping)"
            )),
        }
    }
}

/// Pilot index of every user and the co-pilot structure it induces.
///
/// Pilot indices are zero-based: `0 <= pilot(j, k) < num_pilots()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPlan {
    scheme: PilotScheme,
    num_cells: usize,
    users_per_cell: usize,
    num_pilots: usize,
    pilot: Vec<usize>,
    by_pilot: Vec<Vec<(usize, usize)>>,
    owner: Vec<Option<usize>>,
    colors: Option<Vec<usize>>,
    grouping: Option<Grouping>,
}

impl PilotPlan {
    /// Builds a plan from an explicit cell-major assignment, rejecting any
    /// intra-cell collision.
    pub fn from_assignment(
        scheme: PilotScheme,
        num_cells: usize,
        users_per_cell: usize,
        num_pilots: usize,
        pilot: Vec<usize>,
    ) -> Result<Self> {
        if pilot.len() != num_cells * users_per_cell {
            return Err(Error::DimensionMismatch(format!(
                "{} pilot indices for {num_cells} cells of {users_per_cell} users",
                pilot.len()
            )));
        }
        let mut by_pilot = vec![Vec::new(); num_pilots];
        let mut owner = vec![None; num_cells * num_pilots];
        for j in 0..num_cells {
            for k in 0..users_per_cell {
                let p = pilot[j * users_per_cell + k];
                if p >= num_pilots {
                    return Err(Error::PilotOutOfRange {
                        index: p,
                        num_pilots,
                    });
                }
                let slot = &mut owner[j * num_pilots + p];
                if let Some(other) = slot {
                    return Err(Error::InvalidParameter {
                        name: "pilot",
                        reason: format!("users {other} and {k} of cell {j} share pilot {p}"),
                    });
                }
                *slot = Some(k);
                by_pilot[p].push((j, k));
            }
        }
        Ok(Self {
            scheme,
            num_cells,
            users_per_cell,
            num_pilots,
            pilot,
            by_pilot,
            owner,
            colors: None,
            grouping: None,
        })
    }

    /// Every cell reuses pilots `0..K`.
    pub fn reuse_one(num_cells: usize, users_per_cell: usize) -> Self {
        let pilot = (0..num_cells).flat_map(|_| 0..users_per_cell).collect();
        let mut plan = Self::from_assignment(
            PilotScheme::REUSE1,
            num_cells,
            users_per_cell,
            users_per_cell,
            pilot,
        )
        .expect("reuse-1 assignment is collision free");
        plan.colors = Some(vec![0; num_cells]);
        plan
    }

    pub fn scheme(&self) -> PilotScheme {
        self.scheme
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    /// Pilot length Y_p.
    pub fn num_pilots(&self) -> usize {
        self.num_pilots
    }

    #[inline]
    pub fn pilot(&self, cell: usize, user: usize) -> usize {
        self.pilot[cell * self.users_per_cell + user]
    }

    /// All users transmitting pilot `p`, as `(cell, user)` pairs.
    #[inline]
    pub fn users_with_pilot(&self, p: usize) -> &[(usize, usize)] {
        &self.by_pilot[p]
    }

    /// The user of `cell` transmitting pilot `p`, if any.
    #[inline]
    pub fn user_with_pilot(&self, cell: usize, p: usize) -> Option<usize> {
        self.owner[cell * self.num_pilots + p]
    }

    /// Co-pilot set C_jk: cells with a user on the same pilot as `(j, k)`,
    /// always including `j` itself.
    pub fn copilot_cells(&self, cell: usize, user: usize) -> Vec<usize> {
        self.users_with_pilot(self.pilot(cell, user))
            .iter()
            .map(|&(c, _)| c)
            .collect()
    }

    /// Number of distinct pilot indices in use.
    pub fn pilots_in_use(&self) -> usize {
        self.by_pilot.iter().filter(|u| !u.is_empty()).count()
    }

    /// Cell colors for fixed-reuse plans.
    pub fn colors(&self) -> Option<&[usize]> {
        self.colors.as_deref()
    }

    /// Grouping metadata for grouping-based plans.
    pub fn grouping(&self) -> Option<&Grouping> {
        self.grouping.as_ref()
    }
}

/// Colors the cells with `factor` colors, greedily maximizing the distance
/// between same-colored sites. For 3 and 7 colors on the supported layouts
/// the result is a proper coloring.
pub fn reuse_coloring(layout: &CellLayout, factor: usize) -> Result<Vec<usize>> {
    let n = layout.num_cells();
    if factor == 0 {
        return Err(Error::InvalidParameter {
            name: "reuse",
            reason: "reuse factor must be at least 1".into(),
        });
    }
    if factor > n {
        return Err(Error::ReuseFactorTooLarge {
            factor,
            cells: n,
        });
    }
    let mut colors: Vec<usize> = Vec::with_capacity(n);
    for c in 0..n {
        let here = layout.centers[c];
        let best = (0..factor)
            .map(|color| {
                let members = colors.iter().enumerate().filter(|(_, &k)| k == color);
                let nearest = members
                    .clone()
                    .map(|(o, _)| here.distance(layout.centers[o]))
                    .fold(f64::INFINITY, f64::min);
                (color, nearest, members.count())
            })
            // Farthest nearest co-colored site, then fewest members, then lowest color.
            .min_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then(a.2.cmp(&b.2))
                    .then(a.0.cmp(&b.0))
            })
            .map(|(color, _, _)| color)
            .unwrap();
        colors.push(best);
    }
    if factor == 3 || factor == 7 {
        for a in 0..n {
            for b in a + 1..n {
                if colors[a] == colors[b] && layout.adjacent(a, b) {
                    return Err(Error::NoProperColoring {
                        colors: factor,
                        cells: n,
                    });
                }
            }
        }
    }
    Ok(colors)
}

/// Assigns pilots under `scheme`.
///
/// Fixed reuse ignores the grouping except for its dimensions; pilot
/// `color(j)·K + k` goes to user `(j, k)`. Grouping-based reuse gives the
/// center user of rank m pilot m and numbers edge users consecutively after
/// the shared bank.
pub fn assign_pilots(
    grouping: &Grouping,
    scheme: PilotScheme,
    layout: &CellLayout,
) -> Result<PilotPlan> {
    let (l_cells, k_users) = (grouping.num_cells(), grouping.users_per_cell());
    if layout.num_cells() != l_cells {
        return Err(Error::DimensionMismatch(format!(
            "grouping covers {l_cells} cells but the layout has {}",
            layout.num_cells()
        )));
    }
    match scheme {
        PilotScheme::Reuse(factor) => {
            let colors = reuse_coloring(layout, factor)?;
            let pilot = (0..l_cells)
                .flat_map(|j| (0..k_users).map(move |k| (j, k)))
                .map(|(j, k)| colors[j] * k_users + k)
                .collect();
            let mut plan =
                PilotPlan::from_assignment(scheme, l_cells, k_users, factor * k_users, pilot)?;
            plan.colors = Some(colors);
            plan.grouping = Some(grouping.clone());
            Ok(plan)
        }
        PilotScheme::Grouping => {
            let bank = (0..l_cells)
                .map(|i| grouping.center_count(i))
                .max()
                .unwrap_or(0);
            let mut pilot = vec![usize::MAX; l_cells * k_users];
            let mut next_edge = bank;
            for i in 0..l_cells {
                for (rank, &k) in grouping.center[i].iter().enumerate() {
                    pilot[i * k_users + k] = rank;
                }
                for &k in &grouping.edge[i] {
                    pilot[i * k_users + k] = next_edge;
                    next_edge += 1;
                }
            }
            if pilot.contains(&usize::MAX) {
                return Err(Error::InvalidParameter {
                    name: "grouping",
                    reason: "center and edge sets do not cover every user".into(),
                });
            }
            let mut plan = PilotPlan::from_assignment(scheme, l_cells, k_users, next_edge, pilot)?;
            plan.grouping = Some(grouping.clone());
            Ok(plan)
        }
    }
}

/// Training overhead within one coherence block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadReport {
    pub training_symbols: usize,
    pub coherence_symbols: usize,
    /// 1 − Y_p / T_c.
    pub prelog: f64,
}

pub fn pilot_overhead(plan: &PilotPlan, coherence_symbols: usize) -> Result<OverheadReport> {
    let y = plan.num_pilots();
    if y >= coherence_symbols {
        return Err(Error::OverheadTooLarge {
            pilots: y,
            coherence: coherence_symbols,
        });
    }
    Ok(OverheadReport {
        training_symbols: y,
        coherence_symbols,
        prelog: 1.0 - y as f64 / coherence_symbols as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_layout, PathlossParams};

    fn layout(n: usize) -> CellLayout {
        build_layout(n, &PathlossParams::default()).unwrap()
    }

    #[test]
    fn midrange_examples() {
        assert_eq!(midrange_threshold(&[5.0]).unwrap(), 5.0);
        assert_eq!(midrange_threshold(&[2.0, 4.0]).unwrap(), 3.0);
        assert_eq!(midrange_threshold(&[1.0, 9.0, 4.0]).unwrap(), 5.0);
        assert!(midrange_threshold(&[]).is_err());
    }

    #[test]
    fn quality_is_serving_gain() {
        let psi = LsfTensor::from_fn(2, 1, |l, j, _| if l == j { 0.3 } else { 7.0 }).unwrap();
        let q = channel_quality(&psi);
        assert_eq!(q.get(0, 0), 0.3);
        assert_eq!(q.get(1, 0), 0.3);
    }

    #[test]
    fn tau_zero_makes_everyone_center() {
        let q = QualityVector::new(3, vec![1.0, 9.0, 4.0]).unwrap();
        let g = group_users(&q, 0.0).unwrap();
        assert_eq!(g.center_count(0), 3);
        assert_eq!(g.edge_count(0), 0);
    }

    #[test]
    fn tau_one_splits_on_midrange() {
        let q = QualityVector::new(3, vec![1.0, 9.0, 4.0]).unwrap();
        let g = group_users(&q, 1.0).unwrap();
        assert_eq!(g.mu, vec![5.0]);
        assert_eq!(g.center, vec![vec![1]]);
        assert_eq!(g.edge, vec![vec![0, 2]]);
    }

    #[test]
    fn negative_tau_rejected() {
        let q = QualityVector::new(1, vec![1.0]).unwrap();
        assert!(group_users(&q, -0.1).is_err());
    }

    #[test]
    fn single_cell_reuse_one() {
        let g = Grouping::all_center(1, 10);
        let plan = assign_pilots(&g, PilotScheme::REUSE1, &layout(1)).unwrap();
        assert_eq!(plan.num_pilots(), 10);
        for k in 0..10 {
            assert_eq!(plan.pilot(0, k), k);
            assert_eq!(plan.copilot_cells(0, k), vec![0]);
        }
    }

    #[test]
    fn reuse_three_on_seven_cells() {
        let lay = layout(7);
        let g = Grouping::all_center(7, 10);
        let plan = assign_pilots(&g, PilotScheme::REUSE3, &lay).unwrap();
        assert_eq!(plan.num_pilots(), 30);
        let colors = plan.colors().unwrap();
        for j in 0..7 {
            for k in 0..10 {
                for c in plan.copilot_cells(j, k) {
                    assert_eq!(colors[c], colors[j]);
                    assert!(!lay.adjacent(c, j));
                }
            }
        }
        // The center cell has a color to itself.
        assert_eq!(plan.copilot_cells(0, 0), vec![0]);
    }

    #[test]
    fn reuse_seven_isolates_every_cell() {
        let g = Grouping::all_center(7, 2);
        let plan = assign_pilots(&g, PilotScheme::Reuse(7), &layout(7)).unwrap();
        assert_eq!(plan.num_pilots(), 14);
        for j in 0..7 {
            assert_eq!(plan.copilot_cells(j, 1), vec![j]);
        }
    }

    #[test]
    fn reuse_factor_above_cell_count_rejected() {
        let g = Grouping::all_center(1, 2);
        assert!(matches!(
            assign_pilots(&g, PilotScheme::REUSE3, &layout(1)),
            Err(Error::ReuseFactorTooLarge { .. })
        ));
    }

    #[test]
    fn overhead_examples() {
        let plan = PilotPlan::reuse_one(1, 10);
        let r = pilot_overhead(&plan, 200).unwrap();
        assert!((r.prelog - 0.95).abs() < 1e-15);
        let g = Grouping::all_center(7, 10);
        let plan = assign_pilots(&g, PilotScheme::Reuse(7), &layout(7)).unwrap();
        assert!((pilot_overhead(&plan, 200).unwrap().prelog - 0.65).abs() < 1e-15);
        let plan = assign_pilots(&g, PilotScheme::REUSE3, &layout(7)).unwrap();
        assert!((pilot_overhead(&plan, 200).unwrap().prelog - 0.85).abs() < 1e-15);
        assert!(pilot_overhead(&plan, 30).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in ["reuse1", "reuse3", "reuse5", "grouping"] {
            assert_eq!(s.parse::<PilotScheme>().unwrap().to_string(), s);
        }
        assert!("reuse0".parse::<PilotScheme>().is_err());
        assert!("mixed".parse::<PilotScheme>().is_err());
    }
}
