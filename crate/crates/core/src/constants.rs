//! Physical constants and unit conversions.
//!
//! Internal unit system: lengths in nm, times in fs, energies in eV.
//! Momentum is carried in eV·fs/nm (so that v = p/m comes out in nm/fs),
//! mass in eV·fs²/nm², and magnetic fields stay in tesla and are folded
//! into the force through [`TESLA_TO_FORCE`].

/// Reduced Planck constant ħ (eV·fs).
pub const HBAR: f64 = 0.6582119569;

/// Elementary charge (C), exact SI value.
pub const E_CHARGE_SI: f64 = 1.602_176_634e-19;

/// Electron rest mass (kg), CODATA 2018.
pub const M_E_SI: f64 = 9.109_383_7015e-31;

/// Electron rest energy m_e·c² (eV), CODATA 2018.
pub const M_E_C2_EV: f64 = 510_998.950_00;

/// Speed of light (nm/fs), exact.
pub const C_NM_PER_FS: f64 = 299.792_458;

/// Electron rest mass in internal units (eV·fs²/nm²).
///
/// m = (m c²)/c² with c in nm/fs; ≈ 5.6856 eV·fs²/nm².
pub const M_E: f64 = M_E_C2_EV / (C_NM_PER_FS * C_NM_PER_FS);

/// Converts (v × B) into a momentum rate: with v in nm/fs and B in tesla,
/// dp/dt = TESLA_TO_FORCE · v · B comes out in (eV·fs/nm)/fs.
///
/// The factor is exactly 10⁻³: e·v·B in newton, divided by e/nm per eV,
/// leaves 10⁶ (m/s per nm/fs) × 10⁻⁹ (nm per m).
pub const TESLA_TO_FORCE: f64 = 1e-3;

/// Momentum conversion: 1 eV·fs/nm in kg·m/s.
pub const MOMENTUM_TO_SI: f64 = E_CHARGE_SI * 1e-15 / 1e-9;

/// Velocity conversion: 1 nm/fs in m/s.
pub const VELOCITY_TO_SI: f64 = 1e6;

/// Bundled constants of the unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// ħ (eV·fs).
    pub hbar: f64,
    /// Elementary charge (C).
    pub e_charge: f64,
    /// Electron rest mass (kg).
    pub m_e: f64,
    /// Force conversion factor, see [`TESLA_TO_FORCE`].
    pub q_over_m_unit: f64,
}

/// The one and only set of constants used by the simulation.
pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: HBAR,
    e_charge: E_CHARGE_SI,
    m_e: M_E_SI,
    q_over_m_unit: TESLA_TO_FORCE,
};

/// Effective mass in internal units for a mass ratio m*/m_e.
#[inline]
pub fn effective_mass(m_eff_ratio: f64) -> f64 {
    m_eff_ratio * M_E
}

/// Cyclotron angular frequency ω_c = eB/m* (rad/fs), signed with B.
#[inline]
pub fn cyclotron_frequency(b_tesla: f64, m_eff_ratio: f64) -> f64 {
    TESLA_TO_FORCE * b_tesla / effective_mass(m_eff_ratio)
}
