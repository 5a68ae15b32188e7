//! Electrostatic potential profiles and the linear out-of-plane magnetic
//! field, with Lorentz-force evaluation.

use crate::constants::cyclotron_frequency;
use crate::error::{Result, SimError};
use crate::geometry::{Axis, Domain2D, Vec2};

/// Electrostatic potential varying along exactly one axis.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialProfile {
    /// V ≡ 0.
    Zero,
    /// Piecewise-constant barrier of the given height over
    /// `[center − thickness/2, center + thickness/2)` along `axis`
    /// (closed at the lower edge, open at the upper edge).
    RectangularBarrier { height_ev: f64, center_nm: f64, thickness_nm: f64, axis: Axis },
    /// Samples on the observable grid along `axis`, piecewise constant
    /// per cell; constant along the orthogonal axis.
    Tabulated { axis: Axis, samples: Vec<f64> },
}

impl PotentialProfile {
    /// The axis along which the profile varies (Zero reports y, the
    /// direction used by every potential in the reference experiments).
    pub fn axis(&self) -> Axis {
        match self {
            PotentialProfile::Zero => Axis::Y,
            PotentialProfile::RectangularBarrier { axis, .. } => *axis,
            PotentialProfile::Tabulated { axis, .. } => *axis,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialProfile::Zero => true,
            PotentialProfile::RectangularBarrier { height_ev, .. } => *height_ev == 0.0,
            PotentialProfile::Tabulated { samples, .. } => samples.iter().all(|v| *v == 0.0),
        }
    }

    pub fn validate(&self, domain: &Domain2D) -> Result<()> {
        match self {
            PotentialProfile::Zero => Ok(()),
            PotentialProfile::RectangularBarrier { height_ev, center_nm, thickness_nm, axis } => {
                if *height_ev < 0.0 {
                    return Err(SimError::domain("barrier height must be non-negative"));
                }
                if !(*thickness_nm > 0.0) {
                    return Err(SimError::domain("barrier thickness must be positive"));
                }
                let lo = center_nm - thickness_nm / 2.0;
                let hi = center_nm + thickness_nm / 2.0;
                if lo < 0.0 || hi > domain.extent(*axis) {
                    return Err(SimError::domain(format!(
                        "barrier support [{lo}, {hi}] nm lies outside the domain"
                    )));
                }
                Ok(())
            }
            PotentialProfile::Tabulated { axis, samples } => {
                if samples.len() != domain.cells(*axis) {
                    return Err(SimError::domain(format!(
                        "tabulated profile has {} samples but the domain has {} cells along {}",
                        samples.len(),
                        domain.cells(*axis),
                        axis.label()
                    )));
                }
                if samples.iter().any(|v| !v.is_finite()) {
                    return Err(SimError::domain("tabulated profile contains non-finite values"));
                }
                Ok(())
            }
        }
    }

    /// Potential evaluated along the profile axis at coordinate `c` (nm).
    /// Unlike [`potential_at`] this does not check domain membership and
    /// returns 0 outside any support; used by the Wigner-potential
    /// quadrature whose sampling arm extends past the domain.
    pub fn value_along_axis(&self, c: f64, domain: &Domain2D) -> f64 {
        match self {
            PotentialProfile::Zero => 0.0,
            PotentialProfile::RectangularBarrier { height_ev, center_nm, thickness_nm, .. } => {
                let lo = center_nm - thickness_nm / 2.0;
                let hi = center_nm + thickness_nm / 2.0;
                if c >= lo && c < hi {
                    *height_ev
                } else {
                    0.0
                }
            }
            PotentialProfile::Tabulated { axis, samples } => {
                let step = domain.extent(*axis) / samples.len() as f64;
                if c < 0.0 || c >= domain.extent(*axis) {
                    return 0.0;
                }
                let i = ((c / step) as usize).min(samples.len() - 1);
                samples[i]
            }
        }
    }
}

/// Potential at a position inside the domain (eV).
pub fn potential_at(profile: &PotentialProfile, r: Vec2, domain: &Domain2D) -> Result<f64> {
    if !domain.contains(r) {
        return Err(SimError::domain(format!(
            "position ({}, {}) nm is outside the domain",
            r.x, r.y
        )));
    }
    Ok(profile.value_along_axis(r.component(profile.axis()), domain))
}

/// Out-of-plane magnetic field B(c) = B₀ + B₁·c, linear along one
/// in-plane axis, constant along the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMagneticField {
    /// Offset B₀ (tesla).
    pub b0: f64,
    /// Gradient B₁ (tesla/nm).
    pub b1: f64,
    /// The in-plane coordinate the field depends on.
    pub axis: Axis,
}

impl LinearMagneticField {
    pub fn new(b0: f64, b1: f64, axis: Axis) -> Self {
        LinearMagneticField { b0, b1, axis }
    }

    pub fn uniform(b0: f64) -> Self {
        LinearMagneticField { b0, b1: 0.0, axis: Axis::Y }
    }

    pub fn is_zero(&self) -> bool {
        self.b0 == 0.0 && self.b1 == 0.0
    }

    /// Coordinate along the field axis where B vanishes.
    pub fn zero_line(&self) -> Option<f64> {
        if self.b1 != 0.0 {
            Some(-self.b0 / self.b1)
        } else {
            None
        }
    }

    /// Field value at a position (tesla).
    #[inline]
    pub fn at(&self, r: Vec2) -> f64 {
        self.b0 + self.b1 * r.component(self.axis)
    }

    /// Largest |B| over the domain (the field is linear, so it is
    /// attained at an edge).
    pub fn max_abs_in(&self, domain: &Domain2D) -> f64 {
        let c_max = domain.extent(self.axis);
        self.at(Vec2::ZERO).abs().max((self.b0 + self.b1 * c_max).abs())
    }

    /// Signed in-plane rotation frequency (rad/fs) at a position.
    ///
    /// The evolution equation is written with the field linearity along y;
    /// the waveguide geometry exchanges x and y, which mirrors the plane
    /// and flips the sense of the momentum rotation. A positive value
    /// rotates p clockwise: dp_x/dt = +ω p_y, dp_y/dt = −ω p_x.
    #[inline]
    pub fn rotation_frequency(&self, r: Vec2, m_eff_ratio: f64) -> f64 {
        let w = cyclotron_frequency(self.at(r), m_eff_ratio);
        match self.axis {
            Axis::Y => w,
            Axis::X => -w,
        }
    }
}

/// Field value at a position (tesla).
#[inline]
pub fn magnetic_field_at(field: &LinearMagneticField, r: Vec2) -> f64 {
    field.at(r)
}

/// Magnetic Lorentz force on the kinetic momentum, (eV·fs/nm)/fs.
///
/// In the barrier geometry (field along y) this is the evolution
/// equation's (e/m)(p_y B, −p_x B); in the waveguide geometry (field
/// along x) the axes are exchanged and the sign of the rotation flips.
#[inline]
pub fn lorentz_force(field: &LinearMagneticField, r: Vec2, p: Vec2, m_eff_ratio: f64) -> Vec2 {
    let w = field.rotation_frequency(r, m_eff_ratio);
    Vec2::new(w * p.y, -w * p.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::effective_mass;
    use crate::geometry::BoundaryKind;
    use proptest::prelude::*;

    fn barrier_domain() -> Domain2D {
        Domain2D::new(40.0, 60.0, 80, 120, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .unwrap()
    }

    fn barrier() -> PotentialProfile {
        PotentialProfile::RectangularBarrier {
            height_ev: 0.3,
            center_nm: 30.0,
            thickness_nm: 1.0,
            axis: Axis::Y,
        }
    }

    #[test]
    fn barrier_values() {
        let d = barrier_domain();
        let b = barrier();
        assert_eq!(potential_at(&b, Vec2::new(20.0, 30.0), &d).unwrap(), 0.3);
        assert_eq!(potential_at(&b, Vec2::new(20.0, 10.0), &d).unwrap(), 0.0);
        // Closed-left / open-right support convention.
        assert_eq!(potential_at(&b, Vec2::new(20.0, 29.5), &d).unwrap(), 0.3);
        assert_eq!(potential_at(&b, Vec2::new(20.0, 30.5), &d).unwrap(), 0.0);
    }

    #[test]
    fn potential_outside_domain_is_an_error() {
        let d = barrier_domain();
        assert!(potential_at(&barrier(), Vec2::new(20.0, 61.0), &d).is_err());
        assert!(potential_at(&barrier(), Vec2::new(-1.0, 30.0), &d).is_err());
    }

    #[test]
    fn barrier_outside_domain_rejected() {
        let d = barrier_domain();
        let b = PotentialProfile::RectangularBarrier {
            height_ev: 0.3,
            center_nm: 59.9,
            thickness_nm: 1.0,
            axis: Axis::Y,
        };
        assert!(b.validate(&d).is_err());
    }

    #[test]
    fn field_case_values() {
        // Case 3: zero at the barrier.
        let case3 = LinearMagneticField::new(-6.0, 0.2, Axis::Y);
        assert_eq!(magnetic_field_at(&case3, Vec2::new(20.0, 30.0)), 0.0);
        assert_eq!(case3.zero_line(), Some(30.0));
        // Case 4: −8 T at the barrier.
        let case4 = LinearMagneticField::new(-2.0, -0.2, Axis::Y);
        assert_eq!(magnetic_field_at(&case4, Vec2::new(20.0, 30.0)), -8.0);
        // Snake field spans −1..+1 T across the waveguide.
        let snake = LinearMagneticField::new(-1.0, 1.0 / 300.0, Axis::X);
        assert_eq!(magnetic_field_at(&snake, Vec2::new(0.0, 100.0)), -1.0);
        assert!((magnetic_field_at(&snake, Vec2::new(600.0, 100.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn force_examples() {
        let m = 0.19;
        let zero = LinearMagneticField::uniform(0.0);
        let f = lorentz_force(&zero, Vec2::new(3.0, 4.0), Vec2::new(0.1, -0.2), m);
        assert_eq!(f, Vec2::ZERO);

        // Field along y, p along +y: force purely along +x for B > 0.
        let b = LinearMagneticField::uniform(2.0);
        let p = Vec2::new(0.0, 0.3);
        let f = lorentz_force(&b, Vec2::new(1.0, 1.0), p, m);
        assert!(f.y == 0.0 && f.x > 0.0);
        let expected = crate::constants::TESLA_TO_FORCE * 2.0 * 0.3 / effective_mass(m);
        assert!((f.x - expected).abs() < 1e-15);

        // Waveguide geometry: exchanged axes flip the rotation sense.
        let bx = LinearMagneticField::new(2.0, 0.0, Axis::X);
        let fx = lorentz_force(&bx, Vec2::new(1.0, 1.0), p, m);
        assert!((fx.x + expected).abs() < 1e-15 && fx.y == 0.0);
    }

    proptest! {
        #[test]
        fn force_is_perpendicular_to_momentum(
            b0 in -8.0f64..8.0,
            b1 in -0.3f64..0.3,
            axis_y in any::<bool>(),
            rx in 0.0f64..600.0,
            ry in 0.0f64..600.0,
            px in -2.0f64..2.0,
            py in -2.0f64..2.0,
        ) {
            let axis = if axis_y { Axis::Y } else { Axis::X };
            let field = LinearMagneticField::new(b0, b1, axis);
            let p = Vec2::new(px, py);
            let f = lorentz_force(&field, Vec2::new(rx, ry), p, 0.19);
            let scale = f.norm() * p.norm();
            prop_assert!(f.dot(p).abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn field_is_linear(
            b0 in -8.0f64..8.0,
            b1 in -0.3f64..0.3,
            c1 in 0.0f64..600.0,
            c2 in 0.0f64..600.0,
        ) {
            let field = LinearMagneticField::new(b0, b1, Axis::Y);
            let lhs = field.at(Vec2::new(0.0, c1)) + field.at(Vec2::new(0.0, c2));
            let rhs = 2.0 * field.at(Vec2::new(0.0, (c1 + c2) / 2.0));
            let scale = lhs.abs().max(rhs.abs()).max(1e-12);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }
    }
}
