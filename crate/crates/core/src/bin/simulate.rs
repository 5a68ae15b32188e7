//! Command-line runner for the phase-space electron simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wigner_transport::config::{parse_config, serialize_scenario};
use wigner_transport::error::SimError;
use wigner_transport::oracle::schrodinger_oracle_1d;
use wigner_transport::output::execute_run;
use wigner_transport::runner::RunOptions;
use wigner_transport::scenarios::{preset, RunMode, Scenario};

/// Signed-particle phase-space simulation of 2D electron states under
/// electrostatic barriers and linear magnetic fields.
#[derive(Parser)]
#[command(name = "simulate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioSource {
    /// Built-in preset name (case1..case4, snake, edge).
    #[arg(long, value_name = "NAME", conflicts_with = "config")]
    preset: Option<String>,
    /// Configuration file; may start from a preset and override keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

impl ScenarioSource {
    fn is_given(&self) -> bool {
        self.preset.is_some() || self.config.is_some()
    }

    fn load(&self) -> Result<Scenario, SimError> {
        match (&self.preset, &self.config) {
            (Some(name), None) => preset(name),
            (None, Some(path)) => parse_config(path),
            _ => Err(SimError::config("give exactly one of --preset or --config")),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the output file set.
    Run {
        #[command(flatten)]
        source: ScenarioSource,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Override the random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the particle budget: initial ensemble size for
        /// transient runs, injection batch size for steady-state runs.
        #[arg(long)]
        particles: Option<usize>,
        /// Worker threads (default: available parallelism, or
        /// SIMULATE_WORKERS if set).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the integrator step (fs).
        #[arg(long, value_name = "FS")]
        dt: Option<f64>,
        /// Additionally dump densities as raw little-endian float64.
        #[arg(long)]
        raw: bool,
        /// Additionally dump the Wigner potential table as CSV.
        #[arg(long)]
        dump_wigner_table: bool,
        /// Suppress per-interval progress lines on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Print a preset (or parsed config) in the config file format.
    PresetDump {
        #[command(flatten)]
        source: ScenarioSource,
        /// Write to a file instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Tunneling oracle: analytic rectangular-barrier transmission plus
    /// an independent split-step packet estimate.
    Oracle {
        /// Take barrier, energy, packet width and mass from a scenario.
        #[command(flatten)]
        source: ScenarioSource,
        /// Barrier height (eV) when not using a scenario.
        #[arg(long, value_name = "EV")]
        height: Option<f64>,
        /// Barrier thickness (nm).
        #[arg(long, value_name = "NM")]
        thickness: Option<f64>,
        /// Packet kinetic energy (eV).
        #[arg(long, value_name = "EV")]
        energy: Option<f64>,
        /// Effective mass ratio m*/m_e.
        #[arg(long, value_name = "RATIO")]
        mass: Option<f64>,
        /// Packet spatial standard deviation (nm).
        #[arg(long, value_name = "NM")]
        sigma: Option<f64>,
    },
}

fn workers_from_env() -> Option<usize> {
    std::env::var("SIMULATE_WORKERS").ok().and_then(|v| v.parse().ok())
}

fn apply_overrides(
    scenario: &mut Scenario,
    seed: Option<u64>,
    particles: Option<usize>,
    dt: Option<f64>,
) {
    if let Some(s) = seed {
        scenario.numerics.seed = s;
    }
    if let Some(n) = particles {
        match scenario.mode {
            RunMode::Transient { .. } => scenario.numerics.particles = n,
            RunMode::SteadyState { .. } => {
                if let Some(inj) = scenario.injection.as_mut() {
                    inj.batch_size = n;
                }
            }
        }
    }
    if let Some(step) = dt {
        scenario.numerics.dt = step;
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            ExitCode::FAILURE
        }
    }
}

fn run_command(command: Command) -> Result<(), SimError> {
    match command {
        Command::Run {
            source,
            out,
            seed,
            particles,
            workers,
            dt,
            raw,
            dump_wigner_table,
            quiet,
        } => {
            let mut scenario = source.load()?;
            apply_overrides(&mut scenario, seed, particles, dt);
            let options =
                RunOptions { workers: workers.or_else(workers_from_env), progress: !quiet };
            let summary = execute_run(&scenario, &out, &options, raw, dump_wigner_table)?;
            eprintln!(
                "wrote {} files to {}: {}",
                summary.files.len(),
                summary.out_dir.display(),
                summary.files.join(", ")
            );
            Ok(())
        }
        Command::PresetDump { source, out } => {
            let scenario = source.load()?;
            let text = serialize_scenario(&scenario);
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Oracle { source, height, thickness, energy, mass, sigma } => {
            let (profile, e, sig, m) = if source.is_given() {
                let s = source.load()?;
                let m = mass.unwrap_or(s.initial.m_eff_ratio);
                let p = s.initial.mean_momentum.norm();
                let e_scenario = p * p / (2.0 * wigner_transport::constants::effective_mass(m));
                (
                    s.potential.clone(),
                    energy.unwrap_or(e_scenario),
                    sigma.unwrap_or(s.initial.sigma_y),
                    m,
                )
            } else {
                let (Some(v0), Some(a), Some(e)) = (height, thickness, energy) else {
                    return Err(SimError::config(
                        "oracle needs --preset/--config or all of --height --thickness --energy",
                    ));
                };
                let profile = wigner_transport::fields::PotentialProfile::RectangularBarrier {
                    height_ev: v0,
                    center_nm: a,
                    thickness_nm: a,
                    axis: wigner_transport::geometry::Axis::Y,
                };
                (profile, e, sigma.unwrap_or(3.0), mass.unwrap_or(0.19))
            };
            let result = schrodinger_oracle_1d(&profile, e, sig, m)?;
            println!("plane_wave_transmission = {:.6}", result.analytic);
            println!("packet_averaged_transmission = {:.6}", result.packet_analytic);
            println!("split_step_transmission = {:.6}", result.split_step);
            Ok(())
        }
    }
}
