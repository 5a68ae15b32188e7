//! Run orchestration: drives the engine through a scenario's schedule and
//! collects histograms, time series and the absorption ledger.

use crate::engine::{
    annihilate, apply_boundaries, ensemble_moments, evolve_interval, inject,
    sample_initial_ensemble, AbsorptionEvent, Edge, EngineParams, Ensemble,
};
use crate::error::{Result, SimError};
use crate::geometry::Vec2;
use crate::histogram::{HistogramSpec, PhaseSpaceHistogram};
use crate::scenarios::{RunMode, Scenario};
use crate::wigner_potential::{build_wigner_potential, WignerPotentialTable};

/// Execution options that are not part of the scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; None uses the process default.
    pub workers: Option<usize>,
    /// Emit `t=<fs> particles=<n> net_weight=<w>` lines to stderr.
    pub progress: bool,
}

/// Per-reporting-interval bookkeeping for the manifest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalLog {
    pub t: f64,
    pub particles: usize,
    pub net_weight: i64,
}

/// Ensemble moments along the evolution, one row per reporting interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePoint {
    pub t: f64,
    pub mean: Vec2,
    pub sigma: Vec2,
}

/// Output of a steady-state run.
#[derive(Debug)]
pub struct SteadyResult {
    /// Time-averaged histogram over the averaging window.
    pub histogram: PhaseSpaceHistogram,
    /// The same average split into window halves, for noise estimation.
    pub halves: (PhaseSpaceHistogram, PhaseSpaceHistogram),
    pub absorption: Vec<AbsorptionEvent>,
    pub intervals: Vec<IntervalLog>,
    pub generation_events: u64,
    pub annihilated: u64,
    pub injected_total: i64,
    /// Positive weight injected inside the averaging window.
    pub injected_window: i64,
    /// Net absorbed weight over the whole run (the per-event ledger only
    /// covers the averaging window).
    pub absorbed_net_total: i64,
    /// Averaging window bounds (fs).
    pub window: (f64, f64),
}

impl SteadyResult {
    /// Net absorbed weight at one edge inside the averaging window.
    pub fn absorbed_at(&self, edge: Edge) -> i64 {
        self.absorption
            .iter()
            .filter(|a| a.edge == edge && a.t > self.window.0 && a.t <= self.window.1)
            .map(|a| a.sign as i64)
            .sum()
    }

    /// Net absorbed weight past a given coordinate along y inside the
    /// window, over the named edges. Used for transmitted-flux estimates.
    pub fn absorbed_beyond_y(&self, y_cut: f64) -> i64 {
        self.absorption
            .iter()
            .filter(|a| a.t > self.window.0 && a.t <= self.window.1)
            .filter(|a| match a.edge {
                Edge::YMax => true,
                Edge::XMin | Edge::XMax => a.r.y >= y_cut,
                Edge::YMin => false,
            })
            .map(|a| a.sign as i64)
            .sum()
    }
}

/// Output of a transient run.
#[derive(Debug)]
pub struct TransientResult {
    /// (time, instantaneous histogram) per requested snapshot.
    pub snapshots: Vec<(f64, PhaseSpaceHistogram)>,
    pub series: Vec<TimePoint>,
    pub absorption: Vec<AbsorptionEvent>,
    pub intervals: Vec<IntervalLog>,
    pub generation_events: u64,
    pub annihilated: u64,
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| SimError::numerics(format!("worker pool: {e}")))?;
            pool.install(f)
        }
    }
}

struct Stepper<'a> {
    params: EngineParams,
    table: &'a WignerPotentialTable,
    annihilate_every: f64,
    skip_annihilation: bool,
    since_annihilation: f64,
    generation_events: u64,
    annihilated: u64,
    /// Events before this time are folded into `absorbed_net` only; the
    /// churn flux out of the boundaries makes storing them all too costly.
    keep_events_after: f64,
    absorption: Vec<AbsorptionEvent>,
    absorbed_net: i64,
}

impl<'a> Stepper<'a> {
    /// Advances the ensemble by `duration`, interleaving annihilation at
    /// the configured cadence.
    fn advance(&mut self, ens: &mut Ensemble, t_start: f64, duration: f64) -> Result<()> {
        let mut done = 0.0;
        while done < duration - 1e-9 {
            let chunk = (duration - done)
                .min(self.annihilate_every - self.since_annihilation)
                .max(self.params.dt.min(duration - done));
            let stats = evolve_interval(ens, self.table, &self.params, t_start + done, chunk)?;
            self.generation_events += stats.generation_events;
            for event in stats.absorbed {
                self.absorbed_net += event.sign as i64;
                if event.t > self.keep_events_after {
                    self.absorption.push(event);
                }
            }
            done += chunk;
            self.since_annihilation += chunk;
            if !self.skip_annihilation && self.since_annihilation >= self.annihilate_every - 1e-9 {
                self.annihilated +=
                    annihilate(ens, &self.params.domain, &self.table.grid()) as u64;
                self.since_annihilation = 0.0;
            }
        }
        Ok(())
    }
}

fn make_stepper<'a>(
    scenario: &Scenario,
    table: &'a WignerPotentialTable,
    keep_events_after: f64,
) -> Stepper<'a> {
    Stepper {
        params: EngineParams {
            domain: scenario.domain,
            field: scenario.field,
            m_eff_ratio: scenario.initial.m_eff_ratio,
            dt: scenario.numerics.dt,
            max_particles: scenario.numerics.max_particles,
            gamma_max_multiplier: scenario.numerics.gamma_max_multiplier,
        },
        table,
        annihilate_every: scenario.numerics.annihilate_interval,
        skip_annihilation: scenario.potential.is_zero(),
        since_annihilation: 0.0,
        generation_events: 0,
        annihilated: 0,
        keep_events_after,
        absorption: Vec::new(),
        absorbed_net: 0,
    }
}

fn deposit(hist: &mut PhaseSpaceHistogram, ens: &Ensemble) {
    for p in &ens.particles {
        hist.add(p.r, p.p, p.sign as f64);
    }
    hist.finish_record();
}

fn progress_line(t: f64, ens: &Ensemble) {
    eprintln!("t={t} particles={} net_weight={}", ens.len(), ens.net_weight());
}

/// Steady-state run: periodic injection, transient discarded, histograms
/// time-averaged over the averaging window.
pub fn run_steady_state(scenario: &Scenario, options: &RunOptions) -> Result<SteadyResult> {
    scenario.validate()?;
    let (t_transient, t_average) = match scenario.mode {
        RunMode::SteadyState { t_transient, t_average } => (t_transient, t_average),
        _ => return Err(SimError::config("run_steady_state needs a steady-state scenario")),
    };
    let injection = scenario
        .injection
        .clone()
        .ok_or_else(|| SimError::config("steady-state mode requires injection"))?;
    let grid = scenario.momentum_grid()?;
    let table = build_wigner_potential(&scenario.potential, grid, &scenario.domain, scenario.numerics.l_coh)?;
    let spec = HistogramSpec::new(scenario.domain, grid);

    with_pool(options.workers, move || {
        let mut stepper = make_stepper(scenario, &table, t_transient);
        stepper.params.validate(&table)?;
        let mut ens = Ensemble::empty(scenario.numerics.seed);
        let mut histogram = PhaseSpaceHistogram::new(spec);
        let mut half_a = PhaseSpaceHistogram::new(spec);
        let mut half_b = PhaseSpaceHistogram::new(spec);
        let mut intervals = Vec::new();
        let mut injected_total: i64 = 0;
        let mut injected_window: i64 = 0;

        let record = scenario.numerics.record_interval;
        let horizon = t_transient + t_average;
        let window = (t_transient, horizon);
        let mid = t_transient + t_average / 2.0;
        let mut t = 0.0;
        let mut next_inject = 0.0;

        while t < horizon - 1e-9 {
            while next_inject <= t + 1e-9 {
                let added = inject(&mut ens, &injection, &scenario.domain, t) as i64;
                injected_total += added;
                if t >= t_transient - 1e-9 {
                    injected_window += added;
                }
                next_inject += injection.period;
            }
            let chunk = record.min(horizon - t);
            stepper.advance(&mut ens, t, chunk)?;
            t += chunk;

            // Exact signed-weight ledger: injection minus absorption.
            let expected = injected_total - stepper.absorbed_net;
            if ens.net_weight() != expected {
                return Err(SimError::numerics(format!(
                    "net weight ledger broken at t = {t} fs: ensemble {} vs ledger {expected}",
                    ens.net_weight()
                )));
            }

            if t > t_transient + 1e-9 {
                deposit(&mut histogram, &ens);
                if t <= mid + 1e-9 {
                    deposit(&mut half_a, &ens);
                } else {
                    deposit(&mut half_b, &ens);
                }
            }
            intervals.push(IntervalLog { t, particles: ens.len(), net_weight: ens.net_weight() });
            if options.progress {
                progress_line(t, &ens);
            }
        }

        histogram.normalization = injected_window as f64;
        half_a.normalization = injected_window as f64 / 2.0;
        half_b.normalization = injected_window as f64 / 2.0;
        Ok(SteadyResult {
            histogram,
            halves: (half_a, half_b),
            absorption: stepper.absorption,
            intervals,
            generation_events: stepper.generation_events,
            annihilated: stepper.annihilated,
            injected_total,
            injected_window,
            absorbed_net_total: stepper.absorbed_net,
            window,
        })
    })
}

/// Transient run: a single initial ensemble, no injection, instantaneous
/// snapshots at the requested times.
pub fn run_transient(scenario: &Scenario, options: &RunOptions) -> Result<TransientResult> {
    scenario.validate()?;
    let snapshots = match &scenario.mode {
        RunMode::Transient { snapshots } => snapshots.clone(),
        _ => return Err(SimError::config("run_transient needs a transient scenario")),
    };
    let grid = scenario.momentum_grid()?;
    let table = build_wigner_potential(&scenario.potential, grid, &scenario.domain, scenario.numerics.l_coh)?;
    let spec = HistogramSpec::new(scenario.domain, grid);

    with_pool(options.workers, move || {
        let mut stepper = make_stepper(scenario, &table, -1.0);
        stepper.params.validate(&table)?;
        let mut ens =
            sample_initial_ensemble(&scenario.initial, scenario.numerics.particles, scenario.numerics.seed);
        // Clip the (typically vanishing) tail sampled outside the domain.
        apply_boundaries(&mut ens, &scenario.domain, 0.0, &mut stepper.absorption);

        let mut result = TransientResult {
            snapshots: Vec::new(),
            series: Vec::new(),
            absorption: Vec::new(),
            intervals: Vec::new(),
            generation_events: 0,
            annihilated: 0,
        };
        let record = scenario.numerics.record_interval;
        let mut t = 0.0;

        let record_point = |t: f64, ens: &Ensemble, result: &mut TransientResult| {
            let (mean, sigma) = ensemble_moments(ens);
            result.series.push(TimePoint { t, mean, sigma });
            result
                .intervals
                .push(IntervalLog { t, particles: ens.len(), net_weight: ens.net_weight() });
            if options.progress {
                progress_line(t, ens);
            }
        };
        record_point(0.0, &ens, &mut result);

        for &t_snap in &snapshots {
            while t < t_snap - 1e-9 {
                let chunk = record.min(t_snap - t);
                stepper.advance(&mut ens, t, chunk)?;
                t += chunk;
                record_point(t, &ens, &mut result);
            }
            let mut h = PhaseSpaceHistogram::new(spec);
            deposit(&mut h, &ens);
            h.normalization = scenario.numerics.particles as f64;
            result.snapshots.push((t_snap, h));
        }

        result.absorption = stepper.absorption;
        result.generation_events = stepper.generation_events;
        result.annihilated = stepper.annihilated;
        Ok(result)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::preset;

    fn small_snake() -> Scenario {
        let mut s = preset("snake").unwrap();
        s.numerics.particles = 2000;
        s.mode = RunMode::Transient { snapshots: vec![0.0, 400.0, 800.0] };
        s
    }

    #[test]
    fn transient_snapshot_zero_matches_initial_gaussian() {
        let s = small_snake();
        let r = run_transient(&s, &RunOptions::default()).unwrap();
        assert_eq!(r.snapshots.len(), 3);
        let (t0, h0) = &r.snapshots[0];
        assert_eq!(*t0, 0.0);
        let (mean, sigma) = crate::observables::mean_and_sigma(h0);
        assert!((mean.x - 370.0).abs() < 2.5, "mean x {}", mean.x);
        assert!((mean.y - 300.0).abs() < 2.5, "mean y {}", mean.y);
        assert!((sigma.x / 35.0 - 1.0).abs() < 0.1, "sigma x {}", sigma.x);
        assert_eq!(r.generation_events, 0);
    }

    #[test]
    fn transient_is_deterministic_across_worker_counts() {
        let s = small_snake();
        let one = run_transient(&s, &RunOptions { workers: Some(1), progress: false }).unwrap();
        let four = run_transient(&s, &RunOptions { workers: Some(4), progress: false }).unwrap();
        let d1 = crate::observables::density2d(&one.snapshots[2].1);
        let d4 = crate::observables::density2d(&four.snapshots[2].1);
        assert_eq!(d1.values, d4.values);
        assert_eq!(one.series.len(), four.series.len());
        for (a, b) in one.series.iter().zip(four.series.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn steady_state_ledger_and_window_counters() {
        let mut s = preset("case1").unwrap();
        // Tiny but complete steady run; a soft low barrier keeps the
        // generation cascade cheap.
        s.potential = crate::fields::PotentialProfile::RectangularBarrier {
            height_ev: 0.05,
            center_nm: 30.0,
            thickness_nm: 1.0,
            axis: crate::geometry::Axis::Y,
        };
        s.numerics.l_coh = 15.0;
        s.numerics.n_half = 24;
        s.injection.as_mut().unwrap().batch_size = 150;
        s.mode = RunMode::SteadyState { t_transient: 100.0, t_average: 100.0 };
        let r = run_steady_state(&s, &RunOptions::default()).unwrap();
        assert!(r.injected_total > 0);
        assert!(r.injected_window > 0);
        assert!(r.generation_events > 0, "barrier should generate pairs");
        assert!(r.histogram.records > 0);
        assert_eq!(
            r.histogram.records,
            r.halves.0.records + r.halves.1.records,
            "window halves must partition the records"
        );
        // Ledger sanity is enforced inside the loop; spot check the final row.
        let last = r.intervals.last().unwrap();
        assert_eq!(last.net_weight, r.injected_total - r.absorbed_net_total);
        // The per-event ledger is window-scoped.
        assert!(r.absorption.iter().all(|a| a.t > r.window.0));
    }
}
