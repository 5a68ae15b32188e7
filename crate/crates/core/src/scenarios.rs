//! Built-in experiment presets and the full scenario description.

use crate::engine::InjectionSpec;
use crate::error::{Result, SimError};
use crate::fields::{LinearMagneticField, PotentialProfile};
use crate::geometry::{Axis, BoundaryKind, Domain2D, MomentumGrid, Vec2};
use crate::initial_state::{kinetic_momentum_from_energy, GaussianWignerState};
use crate::trajectories::{classical_path, PathPoint};

/// Numerical knobs of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    /// Integrator step (fs).
    pub dt: f64,
    /// Coherence length fixing Δq = πħ/L_coh (nm).
    pub l_coh: f64,
    /// Momentum grid half-width in quanta.
    pub n_half: usize,
    pub seed: u64,
    /// Initial ensemble size for transient runs.
    pub particles: usize,
    /// Recording / reporting interval (fs).
    pub record_interval: f64,
    /// Annihilation cadence (fs); ignored for zero potentials.
    pub annihilate_interval: f64,
    /// Hard cap on the ensemble size.
    pub max_particles: usize,
    /// Scale on the self-scattering bound γ_max (≥ 1).
    pub gamma_max_multiplier: f64,
}

/// Run mode: steady state with periodic injection, or the transient
/// evolution of a single initial ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum RunMode {
    SteadyState {
        /// Discarded warm-up time (fs).
        t_transient: f64,
        /// Averaging window (fs).
        t_average: f64,
    },
    Transient {
        /// Snapshot times (fs), strictly increasing.
        snapshots: Vec<f64>,
    },
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub domain: Domain2D,
    pub potential: PotentialProfile,
    pub field: LinearMagneticField,
    pub initial: GaussianWignerState,
    pub injection: Option<InjectionSpec>,
    pub mode: RunMode,
    pub numerics: Numerics,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.potential.validate(&self.domain)?;
        self.initial.validate()?;
        if let Some(inj) = &self.injection {
            inj.validate()?;
        }
        let n = &self.numerics;
        if !(n.dt > 0.0 && n.l_coh > 0.0 && n.record_interval > 0.0 && n.annihilate_interval > 0.0)
        {
            return Err(SimError::config("dt, l_coh and intervals must be positive"));
        }
        if n.n_half == 0 {
            return Err(SimError::config("n_half must be positive"));
        }
        if n.max_particles == 0 {
            return Err(SimError::config("max_particles must be positive"));
        }
        if n.gamma_max_multiplier < 1.0 {
            return Err(SimError::config("gamma_max_multiplier must be at least 1"));
        }
        match &self.mode {
            RunMode::SteadyState { t_transient, t_average } => {
                if !(*t_transient > 0.0 && *t_average > 0.0) {
                    return Err(SimError::config("steady-state times must be positive"));
                }
                if self.injection.is_none() {
                    return Err(SimError::config("steady-state mode requires injection"));
                }
            }
            RunMode::Transient { snapshots } => {
                if snapshots.is_empty() {
                    return Err(SimError::config("transient mode needs at least one snapshot"));
                }
                if snapshots.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(SimError::config("snapshot times must be strictly increasing"));
                }
                if snapshots.iter().any(|t| *t < 0.0) {
                    return Err(SimError::config("snapshot times must be non-negative"));
                }
            }
        }
        Ok(())
    }

    pub fn momentum_grid(&self) -> Result<MomentumGrid> {
        MomentumGrid::for_coherence_length(self.numerics.l_coh, self.numerics.n_half)
    }

    /// Classical mean path from the initial state's phase-space mean
    /// under the magnetic force only (the dashed-line overlay of the
    /// density figures).
    pub fn classical_mean_path(&self, t_max: f64) -> Vec<PathPoint> {
        classical_path(
            self.initial.center,
            self.initial.mean_momentum,
            &self.field,
            self.initial.m_eff_ratio,
            &self.domain,
            self.numerics.dt,
            t_max,
        )
    }

    /// Simulated horizon: transient + averaging window, or the last
    /// snapshot time.
    pub fn horizon(&self) -> f64 {
        match &self.mode {
            RunMode::SteadyState { t_transient, t_average } => t_transient + t_average,
            RunMode::Transient { snapshots } => *snapshots.last().unwrap_or(&0.0),
        }
    }
}

pub const PRESET_NAMES: [&str; 6] = ["case1", "case2", "case3", "case4", "snake", "edge"];

fn magnetotunneling_preset(name: &str, b0: f64, b1: f64) -> Scenario {
    let domain =
        Domain2D::new(40.0, 60.0, 80, 120, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .expect("static preset");
    // Effective mass is not part of the published setup; the waveguide
    // value 0.19 is used everywhere.
    let m_eff_ratio = 0.19;
    let p0 = kinetic_momentum_from_energy(0.1, m_eff_ratio).expect("static preset");
    let initial = GaussianWignerState::new(
        Vec2::new(20.0, 6.0),
        Vec2::new(0.0, p0),
        3.0,
        3.0,
        m_eff_ratio,
    )
    .expect("static preset");
    Scenario {
        name: name.to_string(),
        domain,
        potential: PotentialProfile::RectangularBarrier {
            height_ev: 0.3,
            center_nm: 30.0,
            thickness_nm: 1.0,
            axis: Axis::Y,
        },
        field: LinearMagneticField::new(b0, b1, Axis::Y),
        initial,
        injection: Some(InjectionSpec { period: 25.0, batch_size: 2000, source_state: initial }),
        mode: RunMode::SteadyState { t_transient: 500.0, t_average: 2000.0 },
        numerics: Numerics {
            dt: 0.25,
            l_coh: 30.0,
            n_half: 48,
            seed: 7_654_321,
            particles: 100_000,
            record_interval: 25.0,
            annihilate_interval: 1.0,
            max_particles: 20_000_000,
            gamma_max_multiplier: 1.0,
        },
    }
}

fn waveguide_preset(
    name: &str,
    length: f64,
    b0: f64,
    b1: f64,
    x0: f64,
    snapshots: Vec<f64>,
) -> Scenario {
    let domain = Domain2D::new(
        600.0,
        length,
        120,
        500,
        BoundaryKind::Reflective,
        BoundaryKind::Absorbing,
    )
    .expect("static preset");
    let m_eff_ratio = 0.19;
    let p0 = kinetic_momentum_from_energy(0.045, m_eff_ratio).expect("static preset");
    let initial = GaussianWignerState::new(
        Vec2::new(x0, 300.0),
        Vec2::new(0.0, p0),
        35.0,
        35.0,
        m_eff_ratio,
    )
    .expect("static preset");
    Scenario {
        name: name.to_string(),
        domain,
        potential: PotentialProfile::Zero,
        field: LinearMagneticField::new(b0, b1, Axis::X),
        initial,
        injection: None,
        mode: RunMode::Transient { snapshots },
        numerics: Numerics {
            dt: 1.0,
            l_coh: 30.0,
            n_half: 48,
            seed: 7_654_321,
            particles: 100_000,
            record_interval: 100.0,
            annihilate_interval: 100.0,
            max_particles: 20_000_000,
            gamma_max_multiplier: 1.0,
        },
    }
}

/// A fully populated named preset.
pub fn preset(name: &str) -> Result<Scenario> {
    let scenario = match name {
        "case1" => magnetotunneling_preset("case1", 0.0, 0.0),
        "case2" => magnetotunneling_preset("case2", -6.0, 0.0),
        "case3" => magnetotunneling_preset("case3", -6.0, 0.2),
        "case4" => magnetotunneling_preset("case4", -2.0, -0.2),
        // B₁ stored as exactly ±1/300 T/nm so B(600 nm) = ∓B₀ exactly;
        // the printed 0.0033 is the rounded value.
        "snake" => waveguide_preset(
            "snake",
            2500.0,
            -1.0,
            1.0 / 300.0,
            370.0,
            vec![0.0, 1600.0, 3200.0, 5000.0, 6400.0],
        ),
        "edge" => waveguide_preset(
            "edge",
            3000.0,
            1.0,
            -1.0 / 300.0,
            300.0,
            vec![0.0, 2500.0, 5000.0, 8000.0],
        ),
        other => {
            return Err(SimError::config(format!(
                "unknown preset '{other}'; valid presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    debug_assert!(scenario.validate().is_ok());
    Ok(scenario)
}
