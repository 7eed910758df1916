//! Cell geometry, user drops and large-scale fading.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{db_to_linear, Error, Result, NOISE_POWER};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Propagation constants. Defaults are conventional macro-cell values.
#[derive(Debug, Clone, PartialEq)]
pub struct PathlossParams {
    pub cell_radius: f64,
    pub min_distance: f64,
    pub pathloss_exponent: f64,
    pub shadowing_sigma_db: f64,
    /// Downlink SNR of a shadowing-free user at the cell radius, for a base
    /// station transmitting at `reference_power` against unit noise.
    pub edge_snr_db: f64,
    pub reference_power: f64,
}

impl Default for PathlossParams {
    fn default() -> Self {
        Self {
            cell_radius: 500.0,
            min_distance: 35.0,
            pathloss_exponent: 3.8,
            shadowing_sigma_db: 8.0,
            edge_snr_db: 10.0,
            reference_power: 1.0,
        }
    }
}

impl PathlossParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.min_distance > 0.0) {
            return bad("min_distance", "must be positive");
        }
        if !(self.cell_radius > self.min_distance) {
            return bad("cell_radius", "must exceed min_distance");
        }
        if !(self.pathloss_exponent > 2.0) {
            return bad("pathloss_exponent", "must exceed 2");
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return bad("shadowing_sigma_db", "must be non-negative");
        }
        if !self.edge_snr_db.is_finite() {
            return bad("edge_snr_db", "must be finite");
        }
        if !(self.reference_power > 0.0 && self.reference_power.is_finite()) {
            return bad("reference_power", "must be positive and finite");
        }
        Ok(())
    }

    /// Gain of a shadowing-free user at exactly one cell radius.
    pub fn edge_gain(&self) -> f64 {
        db_to_linear(self.edge_snr_db) * NOISE_POWER / self.reference_power
    }

    /// Distance-dependent gain without shadowing.
    pub fn mean_gain(&self, distance: f64) -> f64 {
        self.edge_gain() * (distance / self.cell_radius).powf(-self.pathloss_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Base-station sites. Each cell is a regular hexagon of circumradius
/// `cell_radius` with vertices at 30° + k·60°, so neighbouring sites sit
/// √3·R apart along the edge normals.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLayout {
    pub centers: Vec<Point>,
    pub cell_radius: f64,
}

impl CellLayout {
    pub fn num_cells(&self) -> usize {
        self.centers.len()
    }

    /// Distance between two neighbouring sites.
    pub fn site_spacing(&self) -> f64 {
        SQRT_3 * self.cell_radius
    }

    /// Whether cells `a` and `b` share a hexagon edge.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b
            && (self.centers[a].distance(self.centers[b]) - self.site_spacing()).abs()
                < 1e-6 * self.cell_radius
    }

    /// Whether `p` lies inside (or on the boundary of) hexagon `cell`.
    pub fn contains(&self, cell: usize, p: Point) -> bool {
        let c = self.centers[cell];
        in_hexagon(p.x - c.x, p.y - c.y, self.cell_radius)
    }
}

fn in_hexagon(dx: f64, dy: f64, radius: f64) -> bool {
    let apothem = 0.5 * SQRT_3 * radius;
    let tol = 1e-9 * radius;
    // Edge normals at 0°, 60° and 120°; the other three are their negatives.
    dx.abs() <= apothem + tol
        && (0.5 * dx + 0.5 * SQRT_3 * dy).abs() <= apothem + tol
        && (-0.5 * dx + 0.5 * SQRT_3 * dy).abs() <= apothem + tol
}

/// Builds the 1-, 3- or 7-cell hexagonal layout. Cell 0 is the measured cell.
pub fn build_layout(num_cells: usize, params: &PathlossParams) -> Result<CellLayout> {
    params.validate()?;
    let spacing = SQRT_3 * params.cell_radius;
    let ring = |i: usize| {
        let angle = std::f64::consts::FRAC_PI_3 * i as f64;
        Point::new(spacing * angle.cos(), spacing * angle.sin())
    };
    let centers = match num_cells {
        1 => vec![Point::ORIGIN],
        3 => vec![Point::ORIGIN, ring(0), ring(1)],
        7 => std::iter::once(Point::ORIGIN).chain((0..6).map(ring)).collect(),
        got => return Err(Error::UnsupportedCellCount { got }),
    };
    Ok(CellLayout {
        centers,
        cell_radius: params.cell_radius,
    })
}

/// User positions, `users_per_cell` per cell, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub users_per_cell: usize,
    pub positions: Vec<Point>,
}

impl UserDrop {
    pub fn num_cells(&self) -> usize {
        self.positions.len() / self.users_per_cell.max(1)
    }

    pub fn position(&self, cell: usize, user: usize) -> Point {
        self.positions[cell * self.users_per_cell + user]
    }
}

/// Drops `users_per_cell` users uniformly over each hexagon by rejection
/// from the bounding box, redrawing any user closer than `min_distance` to
/// a site.
pub fn drop_users<R: Rng + ?Sized>(
    layout: &CellLayout,
    users_per_cell: usize,
    params: &PathlossParams,
    rng: &mut R,
) -> Result<UserDrop> {
    if users_per_cell == 0 {
        return Err(Error::InvalidParameter {
            name: "users_per_cell",
            reason: "must be at least 1".into(),
        });
    }
    params.validate()?;
    let radius = layout.cell_radius;
    let half_width = 0.5 * SQRT_3 * radius;
    let mut positions = Vec::with_capacity(layout.num_cells() * users_per_cell);
    for &center in &layout.centers {
        for _ in 0..users_per_cell {
            let p = loop {
                let dx = rng.random_range(-half_width..=half_width);
                let dy = rng.random_range(-radius..=radius);
                if !in_hexagon(dx, dy, radius) {
                    continue;
                }
                let p = Point::new(center.x + dx, center.y + dy);
                if layout
                    .centers
                    .iter()
                    .all(|&bs| bs.distance(p) >= params.min_distance)
                {
                    break p;
                }
            };
            positions.push(p);
        }
    }
    Ok(UserDrop {
        users_per_cell,
        positions,
    })
}

/// Large-scale gains Ψ between every base station `l` and every user
/// `(j, k)`, in linear power units, indexed `[l][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsfTensor {
    num_cells: usize,
    users_per_cell: usize,
    psi: Vec<f64>,
}

impl LsfTensor {
    /// Wraps a flat `[l][j][k]` gain vector, rejecting non-positive or
    /// non-finite entries.
    pub fn from_vec(num_cells: usize, users_per_cell: usize, psi: Vec<f64>) -> Result<Self> {
        if psi.len() != num_cells * num_cells * users_per_cell {
            return Err(Error::DimensionMismatch(format!(
                "expected {} gains for L = {num_cells}, K = {users_per_cell}, got {}",
                num_cells * num_cells * users_per_cell,
                psi.len()
            )));
        }
        if let Some(bad) = psi.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "psi",
                reason: format!("gain {bad} is not positive and finite"),
            });
        }
        Ok(Self {
            num_cells,
            users_per_cell,
            psi,
        })
    }

    /// Builds a tensor from `f(l, j, k)`.
    pub fn from_fn(
        num_cells: usize,
        users_per_cell: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut psi = Vec::with_capacity(num_cells * num_cells * users_per_cell);
        for l in 0..num_cells {
            for j in 0..num_cells {
                for k in 0..users_per_cell {
                    psi.push(f(l, j, k));
                }
            }
        }
        Self::from_vec(num_cells, users_per_cell, psi)
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    #[inline]
    pub fn get(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.psi[(bs * self.num_cells + cell) * self.users_per_cell + user]
    }

    /// Diagonal entry `[D_lj]_kk = √Ψ_ljk`.
    #[inline]
    pub fn amplitude(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.get(bs, cell, user).sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.psi
    }
}

/// Ψ_ljk = c₀ · z_ljk · (r_ljk / R)^(−α) with log-normal shadowing z of
/// `shadowing_sigma_db` standard deviation in dB, drawn independently per link.
pub fn compute_large_scale_fading<R: Rng + ?Sized>(
    layout: &CellLayout,
    drop: &UserDrop,
    params: &PathlossParams,
    rng: &mut R,
) -> Result<LsfTensor> {
    params.validate()?;
    let num_cells = layout.num_cells();
    if drop.positions.len() != num_cells * drop.users_per_cell {
        return Err(Error::DimensionMismatch(format!(
            "{} user positions for {num_cells} cells of {} users",
            drop.positions.len(),
            drop.users_per_cell
        )));
    }
    LsfTensor::from_fn(num_cells, drop.users_per_cell, |l, j, k| {
        let r = layout.centers[l].distance(drop.position(j, k));
        let shadow_db = if params.shadowing_sigma_db > 0.0 {
            params.shadowing_sigma_db * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        params.mean_gain(r) * db_to_linear(shadow_db)
    })
}
