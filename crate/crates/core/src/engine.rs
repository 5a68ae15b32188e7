//! The signed-particle Monte Carlo engine: ensemble sampling, injection,
//! free flight with the magnetic force, pair generation at rate γ through
//! self-scattering, annihilation, and boundary handling.

use rand::rngs::SmallRng;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::fields::LinearMagneticField;
use crate::geometry::{BoundaryKind, Domain2D, MomentumGrid, Vec2};
use crate::initial_state::GaussianWignerState;
use crate::trajectories::{boris_step_unchecked, TrajectoryState, MAX_ROTATION_PER_STEP};
use crate::wigner_potential::{generation_rate, sample_offset, WignerPotentialTable};

/// One phase-space sample of the ensemble. Each particle carries its own
/// random stream so results do not depend on work scheduling.
#[derive(Debug, Clone)]
pub struct SignedParticle {
    /// Position (nm).
    pub r: Vec2,
    /// Kinetic momentum (eV·fs/nm).
    pub p: Vec2,
    /// ±1.
    pub sign: i8,
    /// Birth time (fs).
    pub t_birth: f64,
    rng: SmallRng,
}

impl SignedParticle {
    fn from_stream(r: Vec2, p: Vec2, sign: i8, t_birth: f64, stream_seed: u64) -> Self {
        SignedParticle { r, p, sign, t_birth, rng: SmallRng::seed_from_u64(stream_seed) }
    }

    /// The observable state, used by tests comparing ensembles bit-wise.
    pub fn snapshot(&self) -> (f64, f64, f64, f64, i8, f64) {
        (self.r.x, self.r.y, self.p.x, self.p.y, self.sign, self.t_birth)
    }
}

/// The evolving particle ensemble.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub particles: Vec<SignedParticle>,
    pub rng_seed: u64,
    next_id: u64,
}

impl Ensemble {
    pub fn empty(rng_seed: u64) -> Self {
        Ensemble { particles: Vec::new(), rng_seed, next_id: 0 }
    }

    /// Net signed weight Σ sign — conserved by generation and
    /// annihilation, changed only by injection and absorption.
    pub fn net_weight(&self) -> i64 {
        self.particles.iter().map(|p| p.sign as i64).sum()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }
}

/// Periodic injection of fresh positive samples of the source state.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionSpec {
    /// Injection period (fs).
    pub period: f64,
    /// Samples per injection event.
    pub batch_size: usize,
    /// State the samples are drawn from.
    pub source_state: GaussianWignerState,
}

impl InjectionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) {
            return Err(SimError::domain("injection period must be positive"));
        }
        if self.batch_size == 0 {
            return Err(SimError::domain("injection batch size must be positive"));
        }
        self.source_state.validate()
    }
}

/// SplitMix64 finalizer; spreads (seed, id) pairs into stream seeds.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn stream_seed(run_seed: u64, particle_id: u64) -> u64 {
    mix64(run_seed ^ mix64(particle_id))
}

fn draw_gaussian_sample(state: &GaussianWignerState, rng: &mut SmallRng) -> (Vec2, Vec2) {
    let zx: f64 = rng.sample(StandardNormal);
    let zy: f64 = rng.sample(StandardNormal);
    let zpx: f64 = rng.sample(StandardNormal);
    let zpy: f64 = rng.sample(StandardNormal);
    let r = Vec2::new(state.center.x + state.sigma_x * zx, state.center.y + state.sigma_y * zy);
    let p = Vec2::new(
        state.mean_momentum.x + state.momentum_sigma_x() * zpx,
        state.mean_momentum.y + state.momentum_sigma_y() * zpy,
    );
    (r, p)
}

/// Draws `n` positive samples of a (non-negative) Gaussian Wigner state.
/// Deterministic for a fixed seed.
pub fn sample_initial_ensemble(state: &GaussianWignerState, n: usize, seed: u64) -> Ensemble {
    let mut ens = Ensemble::empty(seed);
    ens.particles.reserve(n);
    for _ in 0..n {
        let id = ens.fresh_id();
        let mut rng = SmallRng::seed_from_u64(stream_seed(seed, id));
        let (r, p) = draw_gaussian_sample(state, &mut rng);
        ens.particles.push(SignedParticle { r, p, sign: 1, t_birth: 0.0, rng });
    }
    ens
}

/// Injects one batch at time `t`; samples landing outside the domain are
/// discarded. Returns the number of particles actually added.
pub fn inject(ens: &mut Ensemble, spec: &InjectionSpec, domain: &Domain2D, t: f64) -> usize {
    let mut added = 0;
    for _ in 0..spec.batch_size {
        let id = ens.fresh_id();
        let mut rng = SmallRng::seed_from_u64(stream_seed(ens.rng_seed, id));
        let (r, p) = draw_gaussian_sample(&spec.source_state, &mut rng);
        if domain.contains(r) {
            ens.particles.push(SignedParticle { r, p, sign: 1, t_birth: t, rng });
            added += 1;
        }
    }
    added
}

/// Domain edge identifiers for the absorption ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    XMin,
    XMax,
    YMin,
    YMax,
}

impl Edge {
    pub fn label(self) -> &'static str {
        match self {
            Edge::XMin => "x_min",
            Edge::XMax => "x_max",
            Edge::YMin => "y_min",
            Edge::YMax => "y_max",
        }
    }
}

/// One absorption event: when, where, and what weight left the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorptionEvent {
    pub t: f64,
    pub edge: Edge,
    pub sign: i8,
    /// Exit position (nm), recorded for flux analysis.
    pub r: Vec2,
}

enum BoundaryOutcome {
    Inside,
    Absorbed(Edge),
}

/// Folds or absorbs a phase-space point that may have left the domain.
fn resolve_boundary(r: &mut Vec2, p: &mut Vec2, domain: &Domain2D) -> BoundaryOutcome {
    for _ in 0..8 {
        if domain.contains(*r) {
            return BoundaryOutcome::Inside;
        }
        if r.x < 0.0 {
            match domain.boundary_x {
                BoundaryKind::Absorbing => return BoundaryOutcome::Absorbed(Edge::XMin),
                BoundaryKind::Reflective => {
                    r.x = -r.x;
                    p.x = -p.x;
                }
            }
        } else if r.x >= domain.extent_x {
            match domain.boundary_x {
                BoundaryKind::Absorbing => return BoundaryOutcome::Absorbed(Edge::XMax),
                BoundaryKind::Reflective => {
                    r.x = 2.0 * domain.extent_x - r.x;
                    p.x = -p.x;
                }
            }
        } else if r.y < 0.0 {
            match domain.boundary_y {
                BoundaryKind::Absorbing => return BoundaryOutcome::Absorbed(Edge::YMin),
                BoundaryKind::Reflective => {
                    r.y = -r.y;
                    p.y = -p.y;
                }
            }
        } else if r.y >= domain.extent_y {
            match domain.boundary_y {
                BoundaryKind::Absorbing => return BoundaryOutcome::Absorbed(Edge::YMax),
                BoundaryKind::Reflective => {
                    r.y = 2.0 * domain.extent_y - r.y;
                    p.y = -p.y;
                }
            }
        }
    }
    // Pathological fold chain (reflective edges with an exact-edge hit):
    // clamp just inside.
    r.x = r.x.clamp(0.0, domain.extent_x * (1.0 - 1e-15));
    r.y = r.y.clamp(0.0, domain.extent_y * (1.0 - 1e-15));
    BoundaryOutcome::Inside
}

/// Applies the domain boundaries to a whole ensemble at time `t`:
/// reflective axes fold position and negate the normal momentum,
/// absorbing axes remove the particle and log it to the ledger.
pub fn apply_boundaries(
    ens: &mut Ensemble,
    domain: &Domain2D,
    t: f64,
    ledger: &mut Vec<AbsorptionEvent>,
) {
    ens.particles.retain_mut(|part| {
        let exit = part.r;
        match resolve_boundary(&mut part.r, &mut part.p, domain) {
            BoundaryOutcome::Inside => true,
            BoundaryOutcome::Absorbed(edge) => {
                ledger.push(AbsorptionEvent { t, edge, sign: part.sign, r: exit });
                false
            }
        }
    });
}

/// Fixed evolution parameters of a run.
#[derive(Debug, Clone, Copy)]
pub struct EngineParams {
    pub domain: Domain2D,
    pub field: LinearMagneticField,
    pub m_eff_ratio: f64,
    /// Integrator step (fs).
    pub dt: f64,
    /// Hard cap on the ensemble size.
    pub max_particles: usize,
    /// Scale applied to the self-scattering bound γ_max (≥ 1).
    pub gamma_max_multiplier: f64,
}

impl EngineParams {
    pub fn validate(&self, table: &WignerPotentialTable) -> Result<()> {
        self.domain.validate()?;
        if !(self.dt > 0.0) {
            return Err(SimError::numerics("integrator step must be positive"));
        }
        let w_max = crate::constants::cyclotron_frequency(
            self.field.max_abs_in(&self.domain),
            self.m_eff_ratio,
        )
        .abs();
        if self.dt * w_max >= MAX_ROTATION_PER_STEP {
            return Err(SimError::numerics(format!(
                "dt = {} fs rotates momenta by {:.3} rad at the strongest field; reduce dt",
                self.dt,
                self.dt * w_max
            )));
        }
        if self.gamma_max_multiplier < 1.0 {
            return Err(SimError::numerics("gamma_max multiplier must be at least 1"));
        }
        if self.max_particles == 0 {
            return Err(SimError::resource("particle cap must be positive"));
        }
        let _ = table;
        Ok(())
    }
}

/// Outcome of evolving one reporting interval.
#[derive(Debug, Default)]
pub struct IntervalStats {
    pub generation_events: u64,
    pub absorbed: Vec<AbsorptionEvent>,
}

const EVOLVE_CHUNK: usize = 4096;

struct ChunkOutcome {
    survivors: Vec<SignedParticle>,
    absorbed: Vec<AbsorptionEvent>,
    events: u64,
}

/// Evolves every particle over `[t_start, t_start + duration)`:
/// Boris free flight interleaved with pair-generation events from an
/// exponential clock at rate γ_max, accepted with probability
/// γ(r)/γ_max (self-scattering). Accepted events leave the parent
/// unchanged and спавn two children at the parent position with momenta
/// p ± q along the potential axis and signs (+sign, −sign).
pub fn evolve_interval(
    ens: &mut Ensemble,
    table: &WignerPotentialTable,
    params: &EngineParams,
    t_start: f64,
    duration: f64,
) -> Result<IntervalStats> {
    if !(duration > 0.0) {
        return Err(SimError::numerics("reporting interval must be positive"));
    }
    let gamma_max = table.gamma_max() * params.gamma_max_multiplier;
    let cap = params.max_particles;

    let particles = std::mem::take(&mut ens.particles);
    let outcomes: Vec<Result<ChunkOutcome>> = particles
        .into_par_iter()
        .chunks(EVOLVE_CHUNK)
        .map(|chunk| {
            let mut out = ChunkOutcome {
                survivors: Vec::with_capacity(chunk.len() + chunk.len() / 4),
                absorbed: Vec::new(),
                events: 0,
            };
            for p in chunk {
                advance_particle(p, table, params, gamma_max, t_start, duration, cap, &mut out)?;
            }
            Ok(out)
        })
        .collect();

    let mut stats = IntervalStats::default();
    let mut survivors = Vec::new();
    for outcome in outcomes {
        let mut o = outcome?;
        survivors.append(&mut o.survivors);
        stats.absorbed.append(&mut o.absorbed);
        stats.generation_events += o.events;
        if survivors.len() > cap {
            return Err(cap_error(survivors.len(), cap));
        }
    }
    ens.particles = survivors;
    Ok(stats)
}

fn cap_error(size: usize, cap: usize) -> SimError {
    SimError::resource(format!(
        "ensemble grew to {size} particles, past the cap of {cap}; \
         decrease the annihilation interval or the injection rate"
    ))
}

/// Evolves one particle and its generation subtree over the interval,
/// accumulating into the chunk outcome.
#[allow(clippy::too_many_arguments)]
fn advance_particle(
    root: SignedParticle,
    table: &WignerPotentialTable,
    params: &EngineParams,
    gamma_max: f64,
    t_start: f64,
    duration: f64,
    cap: usize,
    out: &mut ChunkOutcome,
) -> Result<()> {
    let offset_axis = table.axis();
    // (particle, elapsed time within the interval)
    let mut stack: Vec<(SignedParticle, f64)> = vec![(root, 0.0)];

    while let Some((mut part, mut tau)) = stack.pop() {
        let mut alive = true;
        'life: while tau < duration {
            let next_event = if gamma_max > 0.0 {
                let u: f64 = part.rng.gen();
                tau - (1.0 - u).ln() / gamma_max
            } else {
                f64::INFINITY
            };
            let target = next_event.min(duration);

            // Free flight to the event or the interval end.
            while tau < target {
                let h = (target - tau).min(params.dt);
                if h <= params.dt * 1e-12 {
                    tau = target;
                    break;
                }
                let s = boris_step_unchecked(
                    TrajectoryState::new(part.r, part.p, 0.0),
                    &params.field,
                    params.m_eff_ratio,
                    h,
                );
                part.r = s.r;
                part.p = s.p;
                tau += h;
                let exit = part.r;
                match resolve_boundary(&mut part.r, &mut part.p, &params.domain) {
                    BoundaryOutcome::Inside => {}
                    BoundaryOutcome::Absorbed(edge) => {
                        out.absorbed.push(AbsorptionEvent {
                            t: t_start + tau,
                            edge,
                            sign: part.sign,
                            r: exit,
                        });
                        alive = false;
                        break 'life;
                    }
                }
            }

            if target >= duration {
                break;
            }

            // Candidate generation event at the current (continuous)
            // position; accept with probability γ(r)/γ_max.
            let accept: f64 = part.rng.gen();
            let g = generation_rate(table, part.r);
            if accept * gamma_max < g {
                out.events += 1;
                let u_q: f64 = part.rng.gen();
                let q = sample_offset(table, part.r, u_q)?;
                let kick = Vec2::ZERO.with_component(offset_axis, q);
                let t_abs = t_start + tau;
                let seed_plus = part.rng.next_u64();
                let seed_minus = part.rng.next_u64();
                stack.push((
                    SignedParticle::from_stream(part.r, part.p + kick, part.sign, t_abs, seed_plus),
                    tau,
                ));
                stack.push((
                    SignedParticle::from_stream(
                        part.r,
                        part.p - kick,
                        -part.sign,
                        t_abs,
                        seed_minus,
                    ),
                    tau,
                ));
                if out.survivors.len() + stack.len() > cap {
                    return Err(cap_error(out.survivors.len() + stack.len(), cap));
                }
            }
        }
        if alive {
            out.survivors.push(part);
        }
    }
    Ok(())
}

/// Annihilation cell key: observable spatial cell × Δq-wide momentum
/// bins (unbounded in the momentum indices).
type CellKey = (u32, u32, i32, i32);

fn annihilation_key(p: &SignedParticle, domain: &Domain2D, grid: &MomentumGrid) -> CellKey {
    let (ix, iy) = domain.cell_of(p.r).unwrap_or((0, 0));
    (ix as u32, iy as u32, grid.raw_index_of(p.p.x) as i32, grid.raw_index_of(p.p.y) as i32)
}

/// Removes opposite-sign pairs sharing a phase-space cell; survivors keep
/// their exact coordinates and original order. Net weight is unchanged.
/// Returns the number of particles removed.
pub fn annihilate(ens: &mut Ensemble, domain: &Domain2D, grid: &MomentumGrid) -> usize {
    let n = ens.particles.len();
    if n < 2 {
        return 0;
    }
    let mut keyed: Vec<(CellKey, u32)> = ens
        .particles
        .iter()
        .enumerate()
        .map(|(i, p)| (annihilation_key(p, domain, grid), i as u32))
        .collect();
    keyed.sort_unstable();

    let mut keep = vec![false; n];
    let mut run_start = 0;
    for i in 0..=keyed.len() {
        if i == keyed.len() || keyed[i].0 != keyed[run_start].0 {
            let run = &keyed[run_start..i];
            let net: i64 = run.iter().map(|(_, idx)| ens.particles[*idx as usize].sign as i64).sum();
            let majority: i8 = if net >= 0 { 1 } else { -1 };
            let mut remaining = net.abs();
            for (_, idx) in run {
                if remaining == 0 {
                    break;
                }
                if ens.particles[*idx as usize].sign == majority {
                    keep[*idx as usize] = true;
                    remaining -= 1;
                }
            }
            run_start = i;
        }
    }

    let mut i = 0;
    ens.particles.retain(|_| {
        let k = keep[i];
        i += 1;
        k
    });
    n - ens.particles.len()
}

/// Mean and standard deviation of the positive-sign particle positions.
pub fn ensemble_moments(ens: &Ensemble) -> (Vec2, Vec2) {
    let mut n = 0.0;
    let (mut mx, mut my, mut mxx, mut myy) = (0.0, 0.0, 0.0, 0.0);
    for p in &ens.particles {
        if p.sign > 0 {
            n += 1.0;
            mx += p.r.x;
            my += p.r.y;
            mxx += p.r.x * p.r.x;
            myy += p.r.y * p.r.y;
        }
    }
    if n == 0.0 {
        return (Vec2::ZERO, Vec2::ZERO);
    }
    let mean = Vec2::new(mx / n, my / n);
    let var = Vec2::new(
        (mxx / n - mean.x * mean.x).max(0.0),
        (myy / n - mean.y * mean.y).max(0.0),
    );
    (mean, Vec2::new(var.x.sqrt(), var.y.sqrt()))
}
