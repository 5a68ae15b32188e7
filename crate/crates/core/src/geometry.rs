//! Simulation domain, grids and the 2D vector type.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::constants::HBAR;
use crate::error::{Result, SimError};

/// Plain 2D vector (position in nm or momentum in eV·fs/nm).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn component(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    #[inline]
    pub fn with_component(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
        }
        self
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// One of the two in-plane coordinate axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// Behaviour of a domain edge pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Particles crossing the edge are removed and logged.
    Absorbing,
    /// Position folded back, normal momentum negated.
    Reflective,
}

/// Rectangular simulation domain `[0, extent_x] × [0, extent_y]` with the
/// observable grid resolution and per-axis boundary behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain2D {
    /// Extent along x (nm).
    pub extent_x: f64,
    /// Extent along y (nm).
    pub extent_y: f64,
    /// Observable grid cells along x.
    pub cells_x: usize,
    /// Observable grid cells along y.
    pub cells_y: usize,
    pub boundary_x: BoundaryKind,
    pub boundary_y: BoundaryKind,
}

impl Domain2D {
    pub fn new(
        extent_x: f64,
        extent_y: f64,
        cells_x: usize,
        cells_y: usize,
        boundary_x: BoundaryKind,
        boundary_y: BoundaryKind,
    ) -> Result<Self> {
        let d = Domain2D { extent_x, extent_y, cells_x, cells_y, boundary_x, boundary_y };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent_x > 0.0 && self.extent_y > 0.0) {
            return Err(SimError::domain(format!(
                "domain extents must be positive, got {} x {}",
                self.extent_x, self.extent_y
            )));
        }
        if self.cells_x == 0 || self.cells_y == 0 {
            return Err(SimError::domain("domain cell counts must be positive"));
        }
        if !(self.dx() > 0.0 && self.dy() > 0.0) {
            return Err(SimError::domain("domain cell sizes must be positive"));
        }
        Ok(())
    }

    /// Cell size along x (nm).
    #[inline]
    pub fn dx(&self) -> f64 {
        self.extent_x / self.cells_x as f64
    }

    /// Cell size along y (nm).
    #[inline]
    pub fn dy(&self) -> f64 {
        self.extent_y / self.cells_y as f64
    }

    #[inline]
    pub fn extent(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.extent_x,
            Axis::Y => self.extent_y,
        }
    }

    #[inline]
    pub fn cells(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.cells_x,
            Axis::Y => self.cells_y,
        }
    }

    #[inline]
    pub fn boundary(&self, axis: Axis) -> BoundaryKind {
        match axis {
            Axis::X => self.boundary_x,
            Axis::Y => self.boundary_y,
        }
    }

    #[inline]
    pub fn contains(&self, r: Vec2) -> bool {
        r.x >= 0.0 && r.x < self.extent_x && r.y >= 0.0 && r.y < self.extent_y
    }

    /// Observable-grid cell of a position, or None outside the domain.
    #[inline]
    pub fn cell_of(&self, r: Vec2) -> Option<(usize, usize)> {
        if !self.contains(r) {
            return None;
        }
        let ix = ((r.x / self.dx()) as usize).min(self.cells_x - 1);
        let iy = ((r.y / self.dy()) as usize).min(self.cells_y - 1);
        Some((ix, iy))
    }

    /// Center coordinate of cell index along the given axis.
    #[inline]
    pub fn cell_center(&self, axis: Axis, index: usize) -> f64 {
        let step = match axis {
            Axis::X => self.dx(),
            Axis::Y => self.dy(),
        };
        (index as f64 + 0.5) * step
    }
}

/// Semi-discrete momentum grid: values q_n = n·Δq for n in −n_half..=n_half,
/// with Δq = πħ/L_coh tied to the coherence length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    /// Momentum quantum Δq (eV·fs/nm).
    pub delta_q: f64,
    /// Half-width of the grid in quanta.
    pub n_half: usize,
}

impl MomentumGrid {
    /// Grid matched to a coherence length (nm).
    pub fn for_coherence_length(l_coh: f64, n_half: usize) -> Result<Self> {
        if !(l_coh > 0.0) {
            return Err(SimError::domain(format!("coherence length must be positive, got {l_coh}")));
        }
        if n_half == 0 {
            return Err(SimError::domain("momentum grid needs at least one quantum"));
        }
        Ok(MomentumGrid { delta_q: std::f64::consts::PI * HBAR / l_coh, n_half })
    }

    /// The coherence length this grid corresponds to.
    #[inline]
    pub fn coherence_length(&self) -> f64 {
        std::f64::consts::PI * HBAR / self.delta_q
    }

    /// Momentum value of quantum index n (may be negative).
    #[inline]
    pub fn momentum_of(&self, n: i32) -> f64 {
        n as f64 * self.delta_q
    }

    /// Nearest quantum index of a momentum value, clamped to the grid.
    #[inline]
    pub fn index_of(&self, p: f64) -> i32 {
        let n = (p / self.delta_q).round();
        let lim = self.n_half as f64;
        n.clamp(-lim, lim) as i32
    }

    /// Unclamped bin index: which Δq-wide bin a momentum falls in.
    #[inline]
    pub fn raw_index_of(&self, p: f64) -> i64 {
        (p / self.delta_q).round() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_rejects_bad_extents() {
        assert!(Domain2D::new(0.0, 60.0, 80, 120, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .is_err());
        assert!(Domain2D::new(40.0, 60.0, 0, 120, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .is_err());
    }

    #[test]
    fn cell_lookup() {
        let d = Domain2D::new(40.0, 60.0, 80, 120, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .unwrap();
        assert_eq!(d.cell_of(Vec2::new(0.0, 0.0)), Some((0, 0)));
        assert_eq!(d.cell_of(Vec2::new(39.99, 59.99)), Some((79, 119)));
        assert_eq!(d.cell_of(Vec2::new(40.0, 30.0)), None);
        assert_eq!(d.cell_of(Vec2::new(-0.01, 30.0)), None);
        assert!((d.cell_center(Axis::X, 0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn momentum_grid_quantum() {
        let g = MomentumGrid::for_coherence_length(30.0, 64).unwrap();
        assert!((g.delta_q - std::f64::consts::PI * HBAR / 30.0).abs() < 1e-15);
        assert!((g.coherence_length() - 30.0).abs() < 1e-12);
        assert_eq!(g.index_of(g.delta_q * 3.4), 3);
        assert_eq!(g.index_of(-g.delta_q * 200.0), -64);
    }
}
