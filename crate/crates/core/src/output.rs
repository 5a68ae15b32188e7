//! Output emission: CSV files, the higher-order diagnostic report, the
//! run manifest, and the `run` orchestration tying engine and observables
//! together.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::engine::AbsorptionEvent;
use crate::error::Result;
use crate::histogram::PhaseSpaceHistogram;
use crate::observables::{
    density2d, higher_order_term_estimate, marginal_x, marginal_y, negativity_marginal_y,
    DensityGrid, HigherOrderDiagnostic, Profile,
};
use crate::runner::{run_steady_state, run_transient, IntervalLog, RunOptions, TimePoint};
use crate::scenarios::{RunMode, Scenario};
use crate::trajectories::PathPoint;
use crate::wigner_potential::build_wigner_potential;

/// Values are printed with 12 significant digits so they re-parse to
/// within 1 part in 10⁹.
fn csv_num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Snapshot-time file suffix: integral femtoseconds render bare,
/// fractional ones replace the decimal point.
fn time_tag(t: f64) -> String {
    if (t - t.round()).abs() < 1e-9 {
        format!("{}", t.round() as i64)
    } else {
        format!("{t}").replace('.', "p")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_density_csv(path: &Path, d: &DensityGrid) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# electron density n(x, y), arbitrary units")?;
    writeln!(w, "# grid: {} x {} cells, cell size {} x {} nm", d.nx, d.ny, d.dx, d.dy)?;
    writeln!(w, "# extent: {} x {} nm; rows run along y, columns along x", d.nx as f64 * d.dx, d.ny as f64 * d.dy)?;
    for iy in 0..d.ny {
        let row: Vec<String> = (0..d.nx).map(|ix| csv_num(d.at(ix, iy))).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Raw column-dump alternative for large grids: a one-line text header
/// followed by little-endian float64 values, row-major along y.
pub fn write_density_raw(path: &Path, d: &DensityGrid) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "raw float64 little-endian nx={} ny={} dx_nm={} dy_nm={}", d.nx, d.ny, d.dx, d.dy)?;
    for v in &d.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_profile_csv(path: &Path, p: &Profile, quantity: &str) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# {} along {}; coordinate in nm, value in arbitrary units", quantity, p.axis.label())?;
    writeln!(w, "{}_nm,{}", p.axis.label(), quantity)?;
    for (i, v) in p.values.iter().enumerate() {
        writeln!(w, "{},{}", p.coordinate(i), csv_num(*v))?;
    }
    Ok(())
}

pub fn write_classical_path_csv(path: &Path, points: &[PathPoint]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# classical mean path under the magnetic force only")?;
    writeln!(w, "x_nm,y_nm")?;
    for p in points {
        writeln!(w, "{},{}", csv_num(p.r.x), csv_num(p.r.y))?;
    }
    Ok(())
}

pub fn write_series_csv(path: &Path, series: &[TimePoint]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# ensemble mean path and spread over time (positive weights)")?;
    writeln!(w, "t_fs,mean_x_nm,mean_y_nm,sigma_x_nm,sigma_y_nm")?;
    for p in series {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.t,
            csv_num(p.mean.x),
            csv_num(p.mean.y),
            csv_num(p.sigma.x),
            csv_num(p.sigma.y)
        )?;
    }
    Ok(())
}

/// Density-weighted mean x per y row — the quantum counterpart of the
/// dashed classical path in the steady-state figures.
pub fn steady_mean_path(d: &DensityGrid) -> Vec<(f64, f64)> {
    let mut rows = Vec::new();
    for iy in 0..d.ny {
        let mut w_sum = 0.0;
        let mut x_sum = 0.0;
        for ix in 0..d.nx {
            let v = d.at(ix, iy).max(0.0);
            w_sum += v;
            x_sum += v * (ix as f64 + 0.5) * d.dx;
        }
        if w_sum > 0.0 {
            rows.push(((iy as f64 + 0.5) * d.dy, x_sum / w_sum));
        }
    }
    rows
}

pub fn write_steady_mean_path_csv(path: &Path, rows: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# density-weighted mean x per y row (steady state)")?;
    writeln!(w, "y_nm,mean_x_nm")?;
    for (y, x) in rows {
        writeln!(w, "{},{}", y, csv_num(*x))?;
    }
    Ok(())
}

pub fn write_absorption_csv(path: &Path, events: &[AbsorptionEvent]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# absorption ledger: time (fs), edge, sign")?;
    writeln!(w, "t_fs,edge,sign")?;
    for e in events {
        writeln!(w, "{},{},{}", e.t, e.edge.label(), e.sign)?;
    }
    Ok(())
}

pub fn write_hot_diagnostic(
    path: &Path,
    diag: Option<&HigherOrderDiagnostic>,
    note: Option<&str>,
) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# higher-order operator magnitude vs Wigner potential term")?;
    match diag {
        Some(d) => {
            writeln!(w, "max_higher_order_term_per_fs = {}", csv_num(d.max_higher_order))?;
            writeln!(w, "max_wigner_potential_term_per_fs = {}", csv_num(d.max_wigner_term))?;
            let ratio = d.ratio();
            if ratio.is_finite() {
                writeln!(w, "ratio = {}", csv_num(ratio))?;
            } else {
                writeln!(w, "ratio = undefined (zero Wigner-potential term)")?;
            }
            writeln!(w, "space_coarsening = {}", d.space_factor)?;
            writeln!(w, "momentum_coarsening = {}", d.momentum_factor)?;
        }
        None => writeln!(w, "unavailable")?,
    }
    if let Some(n) = note {
        writeln!(w, "# {n}")?;
    }
    Ok(())
}

fn write_manifest(
    path: &Path,
    scenario: &Scenario,
    seed_note: &str,
    wall_s: f64,
    intervals: &[IntervalLog],
    absorbed: &[AbsorptionEvent],
    generation_events: u64,
    annihilated: u64,
) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# run manifest — parse this file as a config to reproduce the run")?;
    writeln!(w, "# engine version = {}", env!("CARGO_PKG_VERSION"))?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    writeln!(w, "# created_unix_s = {stamp}")?;
    writeln!(w, "# wall_time_s = {wall_s:.3}")?;
    writeln!(w, "# {seed_note}")?;
    write!(w, "{}", crate::config::serialize_scenario(scenario))?;
    writeln!(w, "\n# --- run record ---")?;
    writeln!(w, "# generation_events = {generation_events}")?;
    writeln!(w, "# annihilated_particles = {annihilated}")?;
    let mut per_edge = std::collections::BTreeMap::new();
    for e in absorbed {
        *per_edge.entry(e.edge.label()).or_insert(0i64) += e.sign as i64;
    }
    for (edge, net) in per_edge {
        writeln!(w, "# absorbed_net_{edge} = {net}")?;
    }
    writeln!(w, "# interval log: t_fs particles net_weight")?;
    for row in intervals {
        writeln!(w, "# interval {} {} {}", row.t, row.particles, row.net_weight)?;
    }
    Ok(())
}

/// Everything `run` wrote, in emission order.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

/// Executes a scenario and writes the full output file set into `out_dir`.
pub fn execute_run(
    scenario: &Scenario,
    out_dir: &Path,
    options: &RunOptions,
    raw_density: bool,
    dump_wigner_table: bool,
) -> Result<RunSummary> {
    scenario.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = std::time::Instant::now();
    let mut files = Vec::new();
    let mut emit = |name: &str| files.push(name.to_string());

    let grid = scenario.momentum_grid()?;
    let table =
        build_wigner_potential(&scenario.potential, grid, &scenario.domain, scenario.numerics.l_coh)?;

    if dump_wigner_table {
        let path = out_dir.join("wigner_table.csv");
        let mut w = create(&path)?;
        table.dump_csv(&mut w)?;
        emit("wigner_table.csv");
    }

    let classical = scenario.classical_mean_path(scenario.horizon());
    write_classical_path_csv(&out_dir.join("mean_path_classical.csv"), &classical)?;
    emit("mean_path_classical.csv");

    let diag_of = |h: &PhaseSpaceHistogram| -> Option<HigherOrderDiagnostic> {
        higher_order_term_estimate(h, &table, scenario.field.b1, scenario.initial.m_eff_ratio, 2, 4)
            .ok()
    };

    match &scenario.mode {
        RunMode::SteadyState { .. } => {
            let result = run_steady_state(scenario, options)?;
            let d = density2d(&result.histogram);
            write_density_csv(&out_dir.join("density_steady.csv"), &d)?;
            emit("density_steady.csv");
            if raw_density {
                write_density_raw(&out_dir.join("density_steady.f64"), &d)?;
                emit("density_steady.f64");
            }
            write_profile_csv(&out_dir.join("marginal_y.csv"), &marginal_y(&result.histogram), "n")?;
            emit("marginal_y.csv");
            write_profile_csv(&out_dir.join("marginal_x.csv"), &marginal_x(&result.histogram), "n")?;
            emit("marginal_x.csv");
            write_profile_csv(
                &out_dir.join("negativity_y.csv"),
                &negativity_marginal_y(&result.histogram),
                "negativity",
            )?;
            emit("negativity_y.csv");
            write_steady_mean_path_csv(
                &out_dir.join("mean_path_quantum.csv"),
                &steady_mean_path(&d),
            )?;
            emit("mean_path_quantum.csv");
            write_hot_diagnostic(
                &out_dir.join("diagnostic_hot.txt"),
                diag_of(&result.histogram).as_ref(),
                None,
            )?;
            emit("diagnostic_hot.txt");
            write_absorption_csv(&out_dir.join("absorption.csv"), &result.absorption)?;
            emit("absorption.csv");
            write_manifest(
                &out_dir.join("manifest.txt"),
                scenario,
                &format!("injected_total = {}", result.injected_total),
                started.elapsed().as_secs_f64(),
                &result.intervals,
                &result.absorption,
                result.generation_events,
                result.annihilated,
            )?;
            emit("manifest.txt");
        }
        RunMode::Transient { .. } => {
            let result = run_transient(scenario, options)?;
            for (t, h) in &result.snapshots {
                let d = density2d(h);
                let name = format!("density_t{}.csv", time_tag(*t));
                write_density_csv(&out_dir.join(&name), &d)?;
                emit(&name);
                if raw_density {
                    let name = format!("density_t{}.f64", time_tag(*t));
                    write_density_raw(&out_dir.join(&name), &d)?;
                    emit(&name);
                }
            }
            if let Some((_, last)) = result.snapshots.last() {
                write_profile_csv(&out_dir.join("marginal_y.csv"), &marginal_y(last), "n")?;
                emit("marginal_y.csv");
                write_profile_csv(&out_dir.join("marginal_x.csv"), &marginal_x(last), "n")?;
                emit("marginal_x.csv");
                write_profile_csv(
                    &out_dir.join("negativity_y.csv"),
                    &negativity_marginal_y(last),
                    "negativity",
                )?;
                emit("negativity_y.csv");
                write_hot_diagnostic(
                    &out_dir.join("diagnostic_hot.txt"),
                    diag_of(last).as_ref(),
                    Some("diagnostic computed on the final snapshot"),
                )?;
                emit("diagnostic_hot.txt");
            }
            write_series_csv(&out_dir.join("mean_path_quantum.csv"), &result.series)?;
            emit("mean_path_quantum.csv");
            write_absorption_csv(&out_dir.join("absorption.csv"), &result.absorption)?;
            emit("absorption.csv");
            write_manifest(
                &out_dir.join("manifest.txt"),
                scenario,
                &format!("initial_particles = {}", scenario.numerics.particles),
                started.elapsed().as_secs_f64(),
                &result.intervals,
                &result.absorption,
                result.generation_events,
                result.annihilated,
            )?;
            emit("manifest.txt");
        }
    }

    Ok(RunSummary { out_dir: out_dir.to_path_buf(), files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_tags() {
        assert_eq!(time_tag(0.0), "0");
        assert_eq!(time_tag(1600.0), "1600");
        assert_eq!(time_tag(12.5), "12p5");
    }

    #[test]
    fn csv_numbers_carry_twelve_digits() {
        let v = 0.123456789012345;
        let s = csv_num(v);
        let back: f64 = s.parse().unwrap();
        assert!((back - v).abs() <= 1e-9 * v.abs());
    }

    #[test]
    fn density_csv_round_trips_values() {
        let d = DensityGrid {
            nx: 3,
            ny: 2,
            dx: 0.5,
            dy: 0.5,
            values: vec![0.0, 1.5, -0.25, 3.125, 4.0, 5.5],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("density.csv");
        write_density_csv(&path, &d).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut parsed = Vec::new();
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            for tok in line.split(',') {
                parsed.push(tok.parse::<f64>().unwrap());
            }
        }
        assert_eq!(parsed.len(), 6);
        for (a, b) in parsed.iter().zip(d.values.iter()) {
            let scale = b.abs().max(1e-12);
            assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn raw_dump_layout() {
        let d = DensityGrid { nx: 2, ny: 1, dx: 1.0, dy: 1.0, values: vec![1.0, -2.0] };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("density.f64");
        write_density_raw(&path, &d).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header_end = bytes.iter().position(|b| *b == b'\n').unwrap() + 1;
        assert_eq!(bytes.len() - header_end, 16);
        let v0 = f64::from_le_bytes(bytes[header_end..header_end + 8].try_into().unwrap());
        assert_eq!(v0, 1.0);
    }
}
