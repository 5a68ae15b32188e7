//! Manual calibration sweeps for the steady-state numerics. Ignored by
//! default; run explicitly with
//! `cargo test -p wigner-transport --test calibration -- --ignored --nocapture`.

use std::time::Instant;

use wigner_transport::observables::{marginal_y, negativity_marginal_y, oscillation_amplitude};
use wigner_transport::runner::{run_steady_state, RunOptions};
use wigner_transport::scenarios::{preset, RunMode};

#[test]
#[ignore]
fn population_sweep() {
    for (label, l_coh, n_half, ann, batch) in [
        ("L10/n16/ann1.0/b100", 10.0, 16usize, 1.0, 100usize),
        ("L15/n24/ann1.0/b100", 15.0, 24, 1.0, 100),
        ("L15/n24/ann0.5/b100", 15.0, 24, 0.5, 100),
        ("L20/n32/ann0.5/b100", 20.0, 32, 0.5, 100),
    ] {
        let mut s = preset("case1").unwrap();
        s.numerics.l_coh = l_coh;
        s.numerics.n_half = n_half;
        s.numerics.annihilate_interval = ann;
        s.numerics.max_particles = 3_000_000;
        s.injection.as_mut().unwrap().batch_size = batch;
        s.mode = RunMode::SteadyState { t_transient: 150.0, t_average: 150.0 };
        eprintln!("=== {label} ===");
        let start = Instant::now();
        match run_steady_state(&s, &RunOptions { workers: None, progress: true }) {
            Ok(r) => {
                let peak = r.intervals.iter().map(|i| i.particles).max().unwrap_or(0);
                let last = r.intervals.last().unwrap();
                eprintln!(
                    "{label}: ok in {:.1?} peak={} final={} gen={} annih={} cells={}",
                    start.elapsed(),
                    peak,
                    last.particles,
                    r.generation_events,
                    r.annihilated,
                    r.histogram.occupied_cells(),
                );
            }
            Err(e) => eprintln!("{label}: FAILED after {:.1?}: {e}", start.elapsed()),
        }
    }
}

#[test]
#[ignore]
fn physics_check() {
    // Split-step packet transmission for the case-1 packet is ≈ 0.35.
    for (label, l_coh, n_half, dt, batch) in [
        ("L10/n16", 10.0, 16usize, 0.5, 400usize),
        ("L15/n16", 15.0, 16, 0.5, 400),
    ] {
        let mut s = preset("case1").unwrap();
        s.numerics.l_coh = l_coh;
        s.numerics.n_half = n_half;
        s.numerics.dt = dt;
        s.numerics.annihilate_interval = 0.5;
        s.numerics.max_particles = 4_000_000;
        s.injection.as_mut().unwrap().batch_size = batch;
        s.mode = RunMode::SteadyState { t_transient: 500.0, t_average: 1000.0 };
        let start = Instant::now();
        match run_steady_state(&s, &RunOptions::default()) {
            Ok(r) => {
                let injected = r.injected_window as f64;
                let top = r.absorbed_at(wigner_transport::engine::Edge::YMax) as f64;
                let beyond = r.absorbed_beyond_y(30.5) as f64;
                let ny = marginal_y(&r.histogram);
                let fringe = std::f64::consts::PI * wigner_transport::constants::HBAR
                    / s.initial.mean_momentum.y;
                let osc = oscillation_amplitude(&ny, (32.0, 55.0), fringe).unwrap();
                let mean_above: f64 = ny
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| {
                        let y = ny.coordinate(*i);
                        (32.0..55.0).contains(&y)
                    })
                    .map(|(_, v)| *v)
                    .sum::<f64>()
                    / 46.0;
                let neg = negativity_marginal_y(&r.histogram);
                let neg_pre: f64 = neg
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| neg.coordinate(*i) < 25.0)
                    .map(|(_, v)| *v)
                    .sum();
                let peak = r.intervals.iter().map(|i| i.particles).max().unwrap_or(0);
                println!(
                    "{label}: {:.0?} T_top={:.3} T_beyond={:.3} osc={:.3} n_above={:.3} rel={:.2} neg_pre={:.2} peak={}",
                    start.elapsed(),
                    top / injected,
                    beyond / injected,
                    osc,
                    mean_above,
                    osc / mean_above.max(1e-12),
                    neg_pre,
                    peak,
                );
            }
            Err(e) => println!("{label}: FAILED after {:.0?}: {e}", start.elapsed()),
        }
    }
}

/// Controlled 1D validation: a transient packet against the barrier,
/// compared with the split-step density at the same instant.
#[test]
#[ignore]
fn transient_vs_split_step() {
    use wigner_transport::oracle::split_step_density;
    use wigner_transport::scenarios::Scenario;

    let base = preset("case1").unwrap();
    let start_y = 18.0;
    let t_final = 40.0;
    let initial = wigner_transport::initial_state::GaussianWignerState::new(
        wigner_transport::geometry::Vec2::new(20.0, start_y),
        base.initial.mean_momentum,
        3.0,
        3.0,
        0.19,
    )
    .unwrap();

    for (label, l_coh, n_half, annihilate) in [
        ("L10/no-annih", 10.0, 16usize, 1e9),
        ("L10/annih0.5", 10.0, 16, 0.5),
        ("L15/no-annih", 15.0, 24, 1e9),
    ] {
        let scenario = Scenario {
            name: "control".into(),
            initial,
            injection: None,
            mode: RunMode::Transient { snapshots: vec![t_final] },
            numerics: wigner_transport::scenarios::Numerics {
                dt: 0.25,
                l_coh,
                n_half,
                particles: 30_000,
                record_interval: 10.0,
                annihilate_interval: annihilate,
                max_particles: 5_000_000,
                ..base.numerics.clone()
            },
            ..base.clone()
        };
        let started = Instant::now();
        let r = match wigner_transport::runner::run_transient(&scenario, &RunOptions::default()) {
            Ok(r) => r,
            Err(e) => {
                println!("{label}: FAILED {e}");
                continue;
            }
        };
        let mc = marginal_y(&r.snapshots[0].1);
        let final_count = r.intervals.last().unwrap().particles;

        // Reference curve binned to the same grid.
        let ss = split_step_density(0.3, 1.0, 0.1, 3.0, 0.19, 30.0 - start_y, t_final).unwrap();
        let mut reference = vec![0.0; mc.values.len()];
        for (y_rel, dens) in ss {
            let y = y_rel + 30.0;
            if y >= 0.0 && y < 60.0 {
                reference[(y / 0.5) as usize] += dens;
            }
        }
        let norm = |v: &[f64]| {
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect::<Vec<f64>>()
        };
        let mc_n = norm(&mc.values);
        let ref_n = norm(&reference);
        let l1: f64 = mc_n.iter().zip(ref_n.iter()).map(|(a, b)| (a - b).abs()).sum();
        println!(
            "{label}: {:.0?} particles={} gen={} L1={:.4}",
            started.elapsed(),
            final_count,
            r.generation_events,
            l1
        );
        // Coarse shape table: 5 nm bands.
        for band in 0..12 {
            let lo = band * 10;
            let hi = lo + 10;
            let a: f64 = mc_n[lo..hi].iter().sum();
            let b: f64 = ref_n[lo..hi].iter().sum();
            println!("  y {:2}-{:2} nm: mc {a:.4} vs ss {b:.4}", lo / 2, hi / 2);
        }
    }
}
