//! Minimum-uncertainty Gaussian Wigner states and energy/momentum helpers.

use crate::constants::{effective_mass, HBAR, TESLA_TO_FORCE};
use crate::error::{Result, SimError};
use crate::geometry::Vec2;

/// A minimum-uncertainty Gaussian state in phase space.
///
/// Its Wigner function factorizes per axis into a spatial Gaussian of
/// standard deviation σ and a momentum Gaussian of standard deviation
/// ħ/(2σ), so σ_r·σ_p = ħ/2 exactly and the function is non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWignerState {
    /// Mean position (nm).
    pub center: Vec2,
    /// Mean kinetic momentum (eV·fs/nm).
    pub mean_momentum: Vec2,
    /// Spatial standard deviation along x (nm).
    pub sigma_x: f64,
    /// Spatial standard deviation along y (nm).
    pub sigma_y: f64,
    /// Effective mass in units of the electron mass.
    pub m_eff_ratio: f64,
}

impl GaussianWignerState {
    pub fn new(
        center: Vec2,
        mean_momentum: Vec2,
        sigma_x: f64,
        sigma_y: f64,
        m_eff_ratio: f64,
    ) -> Result<Self> {
        let s = GaussianWignerState { center, mean_momentum, sigma_x, sigma_y, m_eff_ratio };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_x > 0.0 && self.sigma_y > 0.0) {
            return Err(SimError::domain("state standard deviations must be positive"));
        }
        if !(self.m_eff_ratio > 0.0) {
            return Err(SimError::domain("effective mass ratio must be positive"));
        }
        if !self.center.is_finite() || !self.mean_momentum.is_finite() {
            return Err(SimError::domain("state parameters must be finite"));
        }
        Ok(())
    }

    /// Momentum standard deviation ħ/(2σ) along x.
    #[inline]
    pub fn momentum_sigma_x(&self) -> f64 {
        HBAR / (2.0 * self.sigma_x)
    }

    /// Momentum standard deviation ħ/(2σ) along y.
    #[inline]
    pub fn momentum_sigma_y(&self) -> f64 {
        HBAR / (2.0 * self.sigma_y)
    }

    /// Effective mass in internal units (eV·fs²/nm²).
    #[inline]
    pub fn mass(&self) -> f64 {
        effective_mass(self.m_eff_ratio)
    }

    /// Peak value of the Wigner function, reached at the phase-space mean.
    pub fn peak_value(&self) -> f64 {
        1.0 / (std::f64::consts::PI * HBAR).powi(2)
    }

    /// Wigner function value at (r, p); normalized so the phase-space
    /// integral is 1.
    pub fn value(&self, r: Vec2, p: Vec2) -> f64 {
        let dr = r - self.center;
        let dp = p - self.mean_momentum;
        let spatial = dr.x * dr.x / (2.0 * self.sigma_x * self.sigma_x)
            + dr.y * dr.y / (2.0 * self.sigma_y * self.sigma_y);
        let momentum = (dp.x * dp.x * 2.0 * self.sigma_x * self.sigma_x
            + dp.y * dp.y * 2.0 * self.sigma_y * self.sigma_y)
            / (HBAR * HBAR);
        self.peak_value() * (-spatial - momentum).exp()
    }
}

/// Kinetic momentum magnitude p = sqrt(2 m* E) in eV·fs/nm.
pub fn kinetic_momentum_from_energy(energy_ev: f64, m_eff_ratio: f64) -> Result<f64> {
    if energy_ev < 0.0 {
        return Err(SimError::domain(format!("kinetic energy must be non-negative, got {energy_ev}")));
    }
    if !(m_eff_ratio > 0.0) {
        return Err(SimError::domain(format!("effective mass ratio must be positive, got {m_eff_ratio}")));
    }
    Ok((2.0 * effective_mass(m_eff_ratio) * energy_ev).sqrt())
}

/// Cyclotron period T_c = 2π m*/(e|B|) in fs.
pub fn cyclotron_period(b_tesla: f64, m_eff_ratio: f64) -> Result<f64> {
    if b_tesla == 0.0 {
        return Err(SimError::domain("cyclotron period is infinite for B = 0"));
    }
    if !(m_eff_ratio > 0.0) {
        return Err(SimError::domain("effective mass ratio must be positive"));
    }
    Ok(2.0 * std::f64::consts::PI * effective_mass(m_eff_ratio) / (TESLA_TO_FORCE * b_tesla.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_state() -> GaussianWignerState {
        GaussianWignerState::new(
            Vec2::new(20.0, 6.0),
            Vec2::new(0.0, 0.4648),
            3.0,
            3.0,
            0.19,
        )
        .unwrap()
    }

    #[test]
    fn momentum_from_energy_zero() {
        assert_eq!(kinetic_momentum_from_energy(0.0, 0.19).unwrap(), 0.0);
        assert_eq!(kinetic_momentum_from_energy(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn momentum_from_energy_waveguide_speed() {
        // E = 0.045 eV at m* = 0.19 m_e gives v = 2.886e5 m/s = 0.2886 nm/fs.
        let p = kinetic_momentum_from_energy(0.045, 0.19).unwrap();
        let v = p / effective_mass(0.19);
        assert!((v / 0.2886 - 1.0).abs() < 2e-4, "v = {v} nm/fs");
    }

    #[test]
    fn momentum_from_energy_rejects_bad_input() {
        assert!(kinetic_momentum_from_energy(-0.1, 0.19).is_err());
        assert!(kinetic_momentum_from_energy(0.1, 0.0).is_err());
        assert!(kinetic_momentum_from_energy(0.1, -1.0).is_err());
    }

    #[test]
    fn gaussian_peaks_at_mean() {
        let s = test_state();
        let peak = s.value(s.center, s.mean_momentum);
        assert_eq!(peak, s.peak_value());
        // One spatial sigma away the value drops by exp(-1/2).
        let off = s.value(s.center + Vec2::new(s.sigma_x, 0.0), s.mean_momentum);
        assert!((off / peak - (-0.5f64).exp()).abs() < 1e-12);
        // One momentum sigma along y likewise.
        let offp = s.value(s.center, s.mean_momentum + Vec2::new(0.0, s.momentum_sigma_y()));
        assert!((offp / peak - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_symmetric_and_positive() {
        let s = test_state();
        for (dr, dp) in [
            (Vec2::new(1.0, -2.0), Vec2::new(0.05, -0.01)),
            (Vec2::new(-4.0, 0.3), Vec2::new(-0.2, 0.13)),
        ] {
            let a = s.value(s.center + dr, s.mean_momentum + dp);
            let b = s.value(s.center - dr, s.mean_momentum - dp);
            assert!(a > 0.0);
            assert!((a - b).abs() <= 1e-15 * a.abs());
        }
    }

    #[test]
    fn gaussian_normalized_by_quadrature() {
        // 4D midpoint quadrature over ±5σ per axis.
        let s = test_state();
        let n = 24;
        let mut total = 0.0;
        let (sx, sy) = (s.sigma_x, s.sigma_y);
        let (spx, spy) = (s.momentum_sigma_x(), s.momentum_sigma_y());
        let hx = 10.0 * sx / n as f64;
        let hy = 10.0 * sy / n as f64;
        let hpx = 10.0 * spx / n as f64;
        let hpy = 10.0 * spy / n as f64;
        for ix in 0..n {
            let x = s.center.x - 5.0 * sx + (ix as f64 + 0.5) * hx;
            for iy in 0..n {
                let y = s.center.y - 5.0 * sy + (iy as f64 + 0.5) * hy;
                for ipx in 0..n {
                    let px = s.mean_momentum.x - 5.0 * spx + (ipx as f64 + 0.5) * hpx;
                    for ipy in 0..n {
                        let py = s.mean_momentum.y - 5.0 * spy + (ipy as f64 + 0.5) * hpy;
                        total += s.value(Vec2::new(x, y), Vec2::new(px, py));
                    }
                }
            }
        }
        total *= hx * hy * hpx * hpy;
        assert!((total - 1.0).abs() < 1e-3, "integral = {total}");
    }

    #[test]
    fn minimum_uncertainty_product() {
        let s = test_state();
        assert_eq!(s.sigma_x * s.momentum_sigma_x(), HBAR / 2.0);
        assert_eq!(s.sigma_y * s.momentum_sigma_y(), HBAR / 2.0);
    }

    #[test]
    fn cyclotron_periods() {
        // 1 T, bare electron mass: 35.72 ps.
        let t = cyclotron_period(1.0, 1.0).unwrap();
        assert!((t / 35_720.0 - 1.0).abs() < 3e-4, "T = {t} fs");
        // Scaling by the mass ratio.
        let t19 = cyclotron_period(1.0, 0.19).unwrap();
        assert!((t19 / (t * 0.19) - 1.0).abs() < 1e-12);
        assert!((t19 / 6_790.0 - 1.0).abs() < 1e-3, "T = {t19} fs");
        // Inverse proportionality in |B| is exact.
        let t2 = cyclotron_period(2.0, 1.0).unwrap();
        assert_eq!(t2, t / 2.0);
        assert_eq!(cyclotron_period(-1.0, 1.0).unwrap(), t);
        assert!(cyclotron_period(0.0, 1.0).is_err());
    }
}
