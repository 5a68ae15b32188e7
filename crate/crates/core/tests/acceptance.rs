//! Acceptance suite: every shipping criterion with its pinned tolerance,
//! one pass/fail line per criterion.
//!
//! The steady-state experiments are shared between criteria; run with
//! `cargo test -p wigner-transport --test acceptance -- --nocapture`
//! to watch the lines appear. The full suite takes tens of minutes on a
//! single core.

use std::sync::OnceLock;

use wigner_transport::constants::{HBAR, TESLA_TO_FORCE};
use wigner_transport::engine::Edge;
use wigner_transport::fields::{LinearMagneticField, PotentialProfile};
use wigner_transport::geometry::{Axis, BoundaryKind, Domain2D, Vec2};
use wigner_transport::initial_state::{cyclotron_period, GaussianWignerState};
use wigner_transport::observables::{
    bimodality, higher_order_term_estimate, marginal_x, marginal_y, negativity_marginal_y,
    oscillation_amplitude, Profile,
};
use wigner_transport::oracle::split_step_packet_transmission;
use wigner_transport::runner::{run_steady_state, run_transient, RunOptions, SteadyResult};
use wigner_transport::scenarios::{preset, RunMode, Scenario};
use wigner_transport::trajectories::{
    analytic_constant_b_orbit, boris_step, classical_path, TrajectoryState,
};
use wigner_transport::wigner_potential::build_wigner_potential;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {id:2} ({name}): {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn options() -> RunOptions {
    RunOptions { workers: None, progress: false }
}

// ---------------------------------------------------------------------
// Shared steady-state runs of the four barrier experiments.

static CASE_RESULTS: [OnceLock<SteadyResult>; 4] =
    [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

fn case_scenario(index: usize) -> Scenario {
    preset(["case1", "case2", "case3", "case4"][index - 1]).unwrap()
}

fn case_result(index: usize) -> &'static SteadyResult {
    CASE_RESULTS[index - 1].get_or_init(|| {
        let s = case_scenario(index);
        eprintln!("[acceptance] running {} steady state ...", s.name);
        let started = std::time::Instant::now();
        let r = run_steady_state(&s, &options()).unwrap();
        eprintln!(
            "[acceptance] {} done in {:.0?} (injected {}, {} generation events)",
            s.name,
            started.elapsed(),
            r.injected_window,
            r.generation_events
        );
        r
    })
}

fn fringe_width(s: &Scenario) -> f64 {
    std::f64::consts::PI * HBAR / s.initial.mean_momentum.y
}

// ---------------------------------------------------------------------

#[test]
fn criterion_01_integrator_vs_analytic_orbit() {
    // Constant B = 1 T, m* = 0.19, 1000 steps per period.
    let m = 0.19;
    let field = LinearMagneticField::uniform(1.0);
    let p0 = wigner_transport::initial_state::kinetic_momentum_from_energy(0.045, m).unwrap();
    let start = TrajectoryState::new(Vec2::new(0.0, 0.0), Vec2::new(0.0, p0), 0.0);
    let t_c = cyclotron_period(1.0, m).unwrap();
    let dt = t_c / 1000.0;

    let mut s = start;
    for _ in 0..1000 {
        s = boris_step(s, &field, m, dt).unwrap();
    }
    let radius = p0 / TESLA_TO_FORCE;
    let circumference = 2.0 * std::f64::consts::PI * radius;
    let closing = (s.r - start.r).norm() / circumference;
    let p_drift = (s.p.norm() / p0 - 1.0).abs();

    // Convergence order from dt-halving against the analytic orbit.
    let err = |steps: usize| {
        let dt = t_c / 4.0 / steps as f64;
        let mut s = start;
        for _ in 0..steps {
            s = boris_step(s, &field, m, dt).unwrap();
        }
        (s.r - analytic_constant_b_orbit(start, 1.0, m, t_c / 4.0).r).norm()
    };
    let order = (err(250) / err(500)).log2();

    let pass = closing < 1e-4 && p_drift < 1e-12 && (1.9..=2.1).contains(&order);
    report(
        1,
        "integrator vs analytic orbit",
        pass,
        &format!("closing error {closing:.2e} of circumference, |p| drift {p_drift:.2e}, order {order:.3}"),
    );
}

#[test]
fn criterion_02_conservation_suite() {
    // Net signed weight must stay an exact integer identity across at
    // least a million generation/annihilation events in a case-3 run.
    let mut s = case_scenario(3);
    s.mode = RunMode::SteadyState { t_transient: 60.0, t_average: 90.0 };
    let r = run_steady_state(&s, &options()).unwrap();
    let events = r.generation_events + r.annihilated;
    let final_net = r.intervals.last().unwrap().net_weight;
    let identity = final_net == r.injected_total - r.absorbed_net_total;
    let pass = identity && events >= 1_000_000;
    report(
        2,
        "net-weight conservation",
        pass,
        &format!(
            "{} generation + {} annihilation events, final net {} == injected {} − absorbed {}",
            r.generation_events, r.annihilated, final_net, r.injected_total, r.absorbed_net_total
        ),
    );
}

#[test]
fn criterion_03_free_packet_spreading() {
    // Barrier-free, field-free packet over 1 ps: σ(t) follows the
    // analytic dispersion within 3%.
    let base = case_scenario(1);
    let initial = GaussianWignerState::new(
        Vec2::new(400.0, 400.0),
        base.initial.mean_momentum,
        3.0,
        3.0,
        base.initial.m_eff_ratio,
    )
    .unwrap();
    let scenario = Scenario {
        name: "free-spreading".into(),
        domain: Domain2D::new(800.0, 1400.0, 160, 280, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .unwrap(),
        potential: PotentialProfile::Zero,
        field: LinearMagneticField::uniform(0.0),
        initial,
        injection: None,
        mode: RunMode::Transient { snapshots: vec![250.0, 500.0, 1000.0] },
        numerics: wigner_transport::scenarios::Numerics {
            dt: 2.0,
            particles: 100_000,
            record_interval: 50.0,
            ..base.numerics.clone()
        },
    };
    let r = run_transient(&scenario, &options()).unwrap();
    let m = initial.mass();
    let sigma0 = 3.0;
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for point in r.series.iter().filter(|p| p.t > 0.0) {
        let expected = sigma0 * (1.0 + (HBAR * point.t / (2.0 * m * sigma0 * sigma0)).powi(2)).sqrt();
        for sigma in [point.sigma.x, point.sigma.y] {
            worst = worst.max((sigma / expected - 1.0).abs());
        }
        if (point.t - 1000.0).abs() < 1.0 {
            detail = format!(
                "σ(1 ps) = ({:.2}, {:.2}) nm vs analytic {:.2} nm",
                point.sigma.x, point.sigma.y, expected
            );
        }
    }
    report(
        3,
        "free-packet spreading",
        worst < 0.03,
        &format!("{detail}; worst relative deviation {worst:.4}"),
    );
}

#[test]
fn criterion_04_ehrenfest_overlay() {
    // Barrier-free case-2 field in an enlarged domain (so absorption
    // cannot bias the mean): ensemble mean path vs classical path.
    let base = case_scenario(2);
    let start = Vec2::new(250.0, 50.0);
    let initial = GaussianWignerState::new(
        start,
        base.initial.mean_momentum,
        3.0,
        3.0,
        base.initial.m_eff_ratio,
    )
    .unwrap();
    let domain =
        Domain2D::new(400.0, 300.0, 80, 60, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .unwrap();
    let horizon = 250.0;
    let scenario = Scenario {
        name: "ehrenfest".into(),
        domain,
        potential: PotentialProfile::Zero,
        field: base.field,
        initial,
        injection: None,
        mode: RunMode::Transient { snapshots: vec![horizon] },
        numerics: wigner_transport::scenarios::Numerics {
            dt: 0.5,
            particles: 100_000,
            record_interval: 10.0,
            ..base.numerics.clone()
        },
    };
    let r = run_transient(&scenario, &options()).unwrap();
    let classical = classical_path(
        start,
        initial.mean_momentum,
        &base.field,
        initial.m_eff_ratio,
        &domain,
        0.5,
        horizon,
    );
    let mut worst: f64 = 0.0;
    for point in &r.series {
        let Some(cl) = classical.iter().find(|c| (c.t - point.t).abs() < 1e-6) else {
            continue;
        };
        worst = worst.max((point.mean - cl.r).norm());
    }
    report(
        4,
        "Ehrenfest overlay",
        worst < 2.0 && r.series.len() > 20,
        &format!("max |quantum mean − classical| = {worst:.3} nm over {} samples", r.series.len()),
    );
}

#[test]
fn criterion_05_tunneling_vs_split_step_oracle() {
    let r = case_result(1);
    let injected = r.injected_window as f64;
    let top = r.absorbed_at(Edge::YMax) as f64;
    // The 2D packet spreads laterally while crossing, so transmitted
    // weight also leaves through the side walls above the barrier.
    let transmitted = r.absorbed_beyond_y(30.5) as f64;
    let t_top = top / injected;
    let t_mc = transmitted / injected;
    let t_ss = split_step_packet_transmission(0.3, 1.0, 0.1, 3.0, 0.19).unwrap();
    let rel = (t_mc / t_ss - 1.0).abs();
    report(
        5,
        "tunneling vs split-step oracle",
        rel < 0.15,
        &format!("MC transmitted fraction {t_mc:.4} (top edge only {t_top:.4}) vs split-step {t_ss:.4}, rel {rel:.3}"),
    );
}

#[test]
fn criterion_06_oscillation_grouping() {
    let s1 = case_scenario(1);
    let window = (32.0, 55.0);
    let fringe = fringe_width(&s1);
    let metric = |idx: usize| {
        let ny = marginal_y(&case_result(idx).histogram);
        oscillation_amplitude(&ny, window, fringe).unwrap()
    };
    let (m1, m2, m3, m4) = (metric(1), metric(2), metric(3), metric(4));
    let ratio31 = m3 / m1;
    let pass = m2 < 0.5 * m1 && m4 < 0.5 * m3 && (0.5..=2.0).contains(&ratio31);
    report(
        6,
        "oscillation grouping",
        pass,
        &format!("metrics: case1 {m1:.4}, case2 {m2:.4}, case3 {m3:.4}, case4 {m4:.4}; case3/case1 {ratio31:.2}"),
    );
}

/// Band sum of a profile over y in [lo, hi).
fn band_sum(p: &Profile, lo: f64, hi: f64) -> f64 {
    p.values
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let y = p.coordinate(*i);
            y >= lo && y < hi
        })
        .map(|(_, v)| *v)
        .sum()
}

#[test]
fn criterion_07_negativity_non_locality() {
    // Pre-barrier negativity band: below y = 25 nm, well clear of the
    // injection region.
    let band = (10.0, 25.0);
    let r1 = case_result(1);
    let neg1 = band_sum(&negativity_marginal_y(&r1.histogram), band.0, band.1);
    // Noise scale from the two half-window estimates.
    let h1 = band_sum(&negativity_marginal_y(&r1.halves.0), band.0, band.1);
    let h2 = band_sum(&negativity_marginal_y(&r1.halves.1), band.0, band.1);
    let noise = ((h1 - h2).abs() / 2.0).max(1e-12);

    let r2 = case_result(2);
    let neg2 = band_sum(&negativity_marginal_y(&r2.histogram), band.0, band.1);

    let pass = neg1 > 3.0 * noise && neg2 > neg1;
    report(
        7,
        "negativity non-locality",
        pass,
        &format!(
            "case1 pre-barrier negativity {neg1:.3} (noise scale {noise:.3}), case2 {neg2:.3}"
        ),
    );
}

#[test]
fn criterion_08_snake_crossings_and_focusing() {
    let s = preset("snake").unwrap();
    let r = run_transient(&s, &options()).unwrap();

    // Classical crossing times of the zero line x = 300 nm.
    let classical = s.classical_mean_path(6400.0);
    let crossings = |xs: &[(f64, f64)]| -> Vec<f64> {
        let mut t = Vec::new();
        for w in xs.windows(2) {
            let (t0, x0) = w[0];
            let (t1, x1) = w[1];
            if (x0 - 300.0).signum() != (x1 - 300.0).signum() {
                let f = (300.0 - x0) / (x1 - x0);
                t.push(t0 + f * (t1 - t0));
            }
        }
        t
    };
    let classical_t = crossings(&classical.iter().map(|p| (p.t, p.r.x)).collect::<Vec<_>>());
    let quantum_t = crossings(&r.series.iter().map(|p| (p.t, p.mean.x)).collect::<Vec<_>>());

    let compared = classical_t.len().min(quantum_t.len()).min(2);
    let mut worst = 0.0f64;
    for i in 0..compared {
        worst = worst.max((quantum_t[i] / classical_t[i] - 1.0).abs());
    }

    let sigma0 = r.series.first().unwrap().sigma.x;
    let sigma16 = r
        .series
        .iter()
        .min_by(|a, b| (a.t - 1600.0).abs().total_cmp(&(b.t - 1600.0).abs()))
        .unwrap()
        .sigma
        .x;

    let pass = compared >= 1 && worst < 0.10 && sigma16 < sigma0;
    report(
        8,
        "snake crossings and focusing",
        pass,
        &format!(
            "crossings classical {classical_t:.0?} vs quantum {quantum_t:.0?} (worst rel {worst:.3}); σ_x(1.6 ps) {sigma16:.2} < σ_x(0) {sigma0:.2}"
        ),
    );
}

#[test]
fn criterion_09_edge_state_bimodality() {
    let s = preset("edge").unwrap();
    let r = run_transient(&s, &options()).unwrap();
    let (t_last, last) = r.snapshots.last().unwrap();
    let nx = marginal_x(last);
    let b = bimodality(&nx);
    let two = b.peaks.len() == 2;
    let opposite = two && b.peaks[0].position < 300.0 && b.peaks[1].position > 300.0;
    let valley = b.valley_depth_ratio.unwrap_or(1.0);
    let pass = two && opposite && valley < 0.7;
    let positions: Vec<f64> = b.peaks.iter().map(|p| p.position).collect();
    report(
        9,
        "edge-state bimodality",
        pass,
        &format!(
            "t = {t_last} fs: {} peaks at {positions:.0?}, valley depth ratio {valley:.3}",
            b.peaks.len()
        ),
    );
}

#[test]
fn criterion_10_higher_order_term_ratio() {
    let mut details = Vec::new();
    let mut pass = true;
    for idx in 1..=4 {
        let s = case_scenario(idx);
        let r = case_result(idx);
        let grid = s.momentum_grid().unwrap();
        let table =
            build_wigner_potential(&s.potential, grid, &s.domain, s.numerics.l_coh).unwrap();
        let diag = higher_order_term_estimate(
            &r.histogram,
            &table,
            s.field.b1,
            s.initial.m_eff_ratio,
            2,
            4,
        )
        .unwrap();
        let ratio = diag.ratio();
        pass &= ratio <= 1e-2;
        details.push(format!("{} ratio {ratio:.2e}", s.name));
    }
    report(10, "higher-order term ratio", pass, &details.join(", "));
}
