//! Classical Newtonian trajectories under the linear magnetic field — the
//! characteristics of the transport operator — via a volume-preserving
//! rotation integrator, plus analytic constant-field orbits used as an
//! oracle and the classical mean paths drawn in the figures.

use crate::constants::{cyclotron_frequency, effective_mass};
use crate::error::{Result, SimError};
use crate::fields::LinearMagneticField;
use crate::geometry::{Domain2D, Vec2};

/// Phase-space point on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    /// Position (nm).
    pub r: Vec2,
    /// Kinetic momentum (eV·fs/nm).
    pub p: Vec2,
    /// Time (fs).
    pub t: f64,
}

impl TrajectoryState {
    pub fn new(r: Vec2, p: Vec2, t: f64) -> Self {
        TrajectoryState { r, p, t }
    }
}

/// Rotation phase per step above which the step is refused. Keeps the
/// rotation-angle error well below Monte Carlo noise.
pub const MAX_ROTATION_PER_STEP: f64 = 0.5;

/// One half-drift / momentum-rotation / half-drift step of size `dt` (fs).
///
/// The rotation angle is 2·atan(ω dt/2) with ω the signed in-plane
/// rotation frequency evaluated at the mid-step position, so |p| is
/// preserved exactly and the map is second-order accurate for a
/// spatially linear field.
pub fn boris_step(
    s: TrajectoryState,
    field: &LinearMagneticField,
    m_eff_ratio: f64,
    dt: f64,
) -> Result<TrajectoryState> {
    if !(dt > 0.0) {
        return Err(SimError::numerics(format!("step size must be positive, got {dt}")));
    }
    let w_here = field.rotation_frequency(s.r, m_eff_ratio);
    if dt * w_here.abs() >= MAX_ROTATION_PER_STEP {
        return Err(SimError::numerics(format!(
            "step size {dt} fs rotates by {:.3} rad ≥ {MAX_ROTATION_PER_STEP}; reduce dt",
            dt * w_here.abs()
        )));
    }
    Ok(boris_step_unchecked(s, field, m_eff_ratio, dt))
}

/// The step body without the guard; the engine validates dt against the
/// domain-wide maximum |ω| once per run instead of per step.
#[inline]
pub fn boris_step_unchecked(
    s: TrajectoryState,
    field: &LinearMagneticField,
    m_eff_ratio: f64,
    dt: f64,
) -> TrajectoryState {
    let inv_m = 1.0 / effective_mass(m_eff_ratio);
    let half = 0.5 * dt;
    let r_mid = s.r + s.p * (inv_m * half);
    let w = field.rotation_frequency(r_mid, m_eff_ratio);
    // tan of the half rotation angle; cos/sin built from it keep the
    // rotation exactly norm-preserving.
    let t = 0.5 * w * dt;
    let denom = 1.0 / (1.0 + t * t);
    let cos = (1.0 - t * t) * denom;
    let sin = 2.0 * t * denom;
    let p_new = Vec2::new(cos * s.p.x + sin * s.p.y, -sin * s.p.x + cos * s.p.y);
    let r_new = r_mid + p_new * (inv_m * half);
    TrajectoryState { r: r_new, p: p_new, t: s.t + dt }
}

/// Exact orbit in a uniform field of `b_tesla` using the barrier-geometry
/// rotation convention (dp_x/dt = +ω p_y). For B = 0 this degenerates to
/// the free drift.
pub fn analytic_constant_b_orbit(
    s0: TrajectoryState,
    b_tesla: f64,
    m_eff_ratio: f64,
    t: f64,
) -> TrajectoryState {
    let m = effective_mass(m_eff_ratio);
    if b_tesla == 0.0 {
        return TrajectoryState { r: s0.r + s0.p * (t / m), p: s0.p, t: s0.t + t };
    }
    let w = cyclotron_frequency(b_tesla, m_eff_ratio);
    let (sin, cos) = (w * t).sin_cos();
    let p = Vec2::new(s0.p.x * cos + s0.p.y * sin, -s0.p.x * sin + s0.p.y * cos);
    let r = Vec2::new(
        s0.r.x + (s0.p.x * sin + s0.p.y * (1.0 - cos)) / (m * w),
        s0.r.y + (-s0.p.x * (1.0 - cos) + s0.p.y * sin) / (m * w),
    );
    TrajectoryState { r, p, t: s0.t + t }
}

/// A timed polyline point of a classical path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    pub r: Vec2,
}

/// Classical path of a point particle launched from (r0, p0) under the
/// magnetic force only — the electrostatic barrier is never applied as a
/// classical force. Integration stops at domain exit or `t_max`.
pub fn classical_path(
    r0: Vec2,
    p0: Vec2,
    field: &LinearMagneticField,
    m_eff_ratio: f64,
    domain: &Domain2D,
    dt: f64,
    t_max: f64,
) -> Vec<PathPoint> {
    let mut out = Vec::with_capacity((t_max / dt).ceil() as usize + 1);
    let mut s = TrajectoryState::new(r0, p0, 0.0);
    out.push(PathPoint { t: s.t, r: s.r });
    while s.t < t_max && domain.contains(s.r) {
        s = boris_step_unchecked(s, field, m_eff_ratio, dt);
        if !domain.contains(s.r) {
            break;
        }
        out.push(PathPoint { t: s.t, r: s.r });
    }
    out
}
