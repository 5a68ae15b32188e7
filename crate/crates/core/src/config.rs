//! Flat key-value configuration format with bracketed sections.
//!
//! A file either describes a scenario completely or starts from a named
//! preset (`preset = case2` before the first section) and overrides
//! individual keys. Unknown keys are hard errors; `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::engine::InjectionSpec;
use crate::error::{Result, SimError};
use crate::fields::{LinearMagneticField, PotentialProfile};
use crate::geometry::{Axis, BoundaryKind, Domain2D, Vec2};
use crate::initial_state::{kinetic_momentum_from_energy, GaussianWignerState};
use crate::scenarios::{preset, Numerics, RunMode, Scenario};

const SECTIONS: [&str; 5] = ["domain", "field", "initial", "numerics", "mode"];

const KEYS: &[(&str, &str)] = &[
    ("domain", "extent_x_nm"),
    ("domain", "extent_y_nm"),
    ("domain", "cells_x"),
    ("domain", "cells_y"),
    ("domain", "boundary_x"),
    ("domain", "boundary_y"),
    ("field", "b0_tesla"),
    ("field", "b1_tesla_per_nm"),
    ("field", "field_axis"),
    ("field", "potential"),
    ("field", "barrier_height_ev"),
    ("field", "barrier_center_nm"),
    ("field", "barrier_thickness_nm"),
    ("field", "barrier_axis"),
    ("initial", "center_x_nm"),
    ("initial", "center_y_nm"),
    ("initial", "sigma_x_nm"),
    ("initial", "sigma_y_nm"),
    ("initial", "m_eff_ratio"),
    ("initial", "momentum_x"),
    ("initial", "momentum_y"),
    ("initial", "energy_ev"),
    ("numerics", "dt_fs"),
    ("numerics", "l_coh_nm"),
    ("numerics", "n_half"),
    ("numerics", "seed"),
    ("numerics", "particles"),
    ("numerics", "record_interval_fs"),
    ("numerics", "annihilate_interval_fs"),
    ("numerics", "max_particles"),
    ("numerics", "gamma_max_multiplier"),
    ("mode", "kind"),
    ("mode", "t_transient_fs"),
    ("mode", "t_average_fs"),
    ("mode", "injection_period_fs"),
    ("mode", "injection_batch"),
    ("mode", "snapshots_fs"),
];

type KeyMap = BTreeMap<(String, String), String>;

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips exactly.
    format!("{v}")
}

fn scenario_to_map(s: &Scenario) -> KeyMap {
    let mut m = KeyMap::new();
    let mut put = |section: &str, key: &str, value: String| {
        m.insert((section.to_string(), key.to_string()), value);
    };
    put("domain", "extent_x_nm", fmt_f64(s.domain.extent_x));
    put("domain", "extent_y_nm", fmt_f64(s.domain.extent_y));
    put("domain", "cells_x", s.domain.cells_x.to_string());
    put("domain", "cells_y", s.domain.cells_y.to_string());
    let bname = |b: BoundaryKind| match b {
        BoundaryKind::Absorbing => "absorbing",
        BoundaryKind::Reflective => "reflective",
    };
    put("domain", "boundary_x", bname(s.domain.boundary_x).to_string());
    put("domain", "boundary_y", bname(s.domain.boundary_y).to_string());

    put("field", "b0_tesla", fmt_f64(s.field.b0));
    put("field", "b1_tesla_per_nm", fmt_f64(s.field.b1));
    put("field", "field_axis", s.field.axis.label().to_string());
    match &s.potential {
        PotentialProfile::Zero => put("field", "potential", "zero".to_string()),
        PotentialProfile::RectangularBarrier { height_ev, center_nm, thickness_nm, axis } => {
            put("field", "potential", "barrier".to_string());
            put("field", "barrier_height_ev", fmt_f64(*height_ev));
            put("field", "barrier_center_nm", fmt_f64(*center_nm));
            put("field", "barrier_thickness_nm", fmt_f64(*thickness_nm));
            put("field", "barrier_axis", axis.label().to_string());
        }
        PotentialProfile::Tabulated { .. } => {
            // Tabulated profiles are built programmatically; they have no
            // file representation.
            put("field", "potential", "tabulated".to_string());
        }
    }

    put("initial", "center_x_nm", fmt_f64(s.initial.center.x));
    put("initial", "center_y_nm", fmt_f64(s.initial.center.y));
    put("initial", "sigma_x_nm", fmt_f64(s.initial.sigma_x));
    put("initial", "sigma_y_nm", fmt_f64(s.initial.sigma_y));
    put("initial", "m_eff_ratio", fmt_f64(s.initial.m_eff_ratio));
    put("initial", "momentum_x", fmt_f64(s.initial.mean_momentum.x));
    put("initial", "momentum_y", fmt_f64(s.initial.mean_momentum.y));

    put("numerics", "dt_fs", fmt_f64(s.numerics.dt));
    put("numerics", "l_coh_nm", fmt_f64(s.numerics.l_coh));
    put("numerics", "n_half", s.numerics.n_half.to_string());
    put("numerics", "seed", s.numerics.seed.to_string());
    put("numerics", "particles", s.numerics.particles.to_string());
    put("numerics", "record_interval_fs", fmt_f64(s.numerics.record_interval));
    put("numerics", "annihilate_interval_fs", fmt_f64(s.numerics.annihilate_interval));
    put("numerics", "max_particles", s.numerics.max_particles.to_string());
    put("numerics", "gamma_max_multiplier", fmt_f64(s.numerics.gamma_max_multiplier));

    match &s.mode {
        RunMode::SteadyState { t_transient, t_average } => {
            put("mode", "kind", "steady".to_string());
            put("mode", "t_transient_fs", fmt_f64(*t_transient));
            put("mode", "t_average_fs", fmt_f64(*t_average));
            let inj = s.injection.as_ref().expect("steady scenario carries injection");
            put("mode", "injection_period_fs", fmt_f64(inj.period));
            put("mode", "injection_batch", inj.batch_size.to_string());
        }
        RunMode::Transient { snapshots } => {
            put("mode", "kind", "transient".to_string());
            let list: Vec<String> = snapshots.iter().map(|t| fmt_f64(*t)).collect();
            put("mode", "snapshots_fs", list.join(","));
        }
    }
    m
}

/// Renders a scenario in the config format; the output parses back to an
/// identical scenario.
pub fn serialize_scenario(s: &Scenario) -> String {
    let map = scenario_to_map(s);
    let mut out = String::new();
    writeln!(out, "# scenario configuration").unwrap();
    writeln!(out, "name = {}", s.name).unwrap();
    for section in SECTIONS {
        writeln!(out, "\n[{section}]").unwrap();
        for ((sec, key), value) in &map {
            if sec == section {
                writeln!(out, "{key} = {value}").unwrap();
            }
        }
    }
    out
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_f64(e: &Entry, what: &str) -> Result<f64> {
    e.value
        .parse::<f64>()
        .map_err(|_| SimError::config_at(e.line, format!("{what}: expected a number, got '{}'", e.value)))
}

fn parse_usize(e: &Entry, what: &str) -> Result<usize> {
    e.value
        .parse::<usize>()
        .map_err(|_| SimError::config_at(e.line, format!("{what}: expected a non-negative integer, got '{}'", e.value)))
}

fn parse_u64(e: &Entry, what: &str) -> Result<u64> {
    e.value
        .parse::<u64>()
        .map_err(|_| SimError::config_at(e.line, format!("{what}: expected a non-negative integer, got '{}'", e.value)))
}

fn parse_axis(e: &Entry, what: &str) -> Result<Axis> {
    match e.value.as_str() {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        other => Err(SimError::config_at(e.line, format!("{what}: expected 'x' or 'y', got '{other}'"))),
    }
}

fn parse_boundary(e: &Entry, what: &str) -> Result<BoundaryKind> {
    match e.value.as_str() {
        "absorbing" => Ok(BoundaryKind::Absorbing),
        "reflective" => Ok(BoundaryKind::Reflective),
        other => Err(SimError::config_at(
            e.line,
            format!("{what}: expected 'absorbing' or 'reflective', got '{other}'"),
        )),
    }
}

struct Parsed {
    name: Option<String>,
    preset_name: Option<String>,
    entries: BTreeMap<(String, String), Entry>,
}

fn parse_text(text: &str) -> Result<Parsed> {
    let mut section: Option<String> = None;
    let mut parsed = Parsed { name: None, preset_name: None, entries: BTreeMap::new() };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| SimError::config_at(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(SimError::config_at(
                    line_no,
                    format!("unknown section '[{name}]'; expected one of {SECTIONS:?}"),
                ));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SimError::config_at(line_no, format!("expected 'key = value', got '{line}'"))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        match (&section, key.as_str()) {
            (None, "preset") => {
                parsed.preset_name = Some(value);
                continue;
            }
            (None, "name") => {
                parsed.name = Some(value);
                continue;
            }
            (None, other) => {
                return Err(SimError::config_at(
                    line_no,
                    format!("key '{other}' appears before any section (only 'preset' and 'name' may)"),
                ));
            }
            (Some(sec), _) => {
                if !KEYS.contains(&(sec.as_str(), key.as_str())) {
                    return Err(SimError::config_at(
                        line_no,
                        format!("unknown key '{key}' in section [{sec}]"),
                    ));
                }
                let slot = (sec.clone(), key.clone());
                if parsed.entries.contains_key(&slot) {
                    return Err(SimError::config_at(
                        line_no,
                        format!("duplicate key '{key}' in section [{sec}]"),
                    ));
                }
                parsed.entries.insert(slot, Entry { line: line_no, value });
            }
        }
    }
    Ok(parsed)
}

struct MapReader {
    entries: BTreeMap<(String, String), Entry>,
}

impl MapReader {
    fn take(&mut self, section: &str, key: &str) -> Result<Entry> {
        self.entries.remove(&(section.to_string(), key.to_string())).ok_or_else(|| {
            SimError::config(format!("missing key '{key}' in section [{section}]"))
        })
    }

    fn take_opt(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }
}

fn build_scenario(name: String, entries: BTreeMap<(String, String), Entry>) -> Result<Scenario> {
    let mut r = MapReader { entries };

    let domain = Domain2D::new(
        parse_f64(&r.take("domain", "extent_x_nm")?, "extent_x_nm")?,
        parse_f64(&r.take("domain", "extent_y_nm")?, "extent_y_nm")?,
        parse_usize(&r.take("domain", "cells_x")?, "cells_x")?,
        parse_usize(&r.take("domain", "cells_y")?, "cells_y")?,
        parse_boundary(&r.take("domain", "boundary_x")?, "boundary_x")?,
        parse_boundary(&r.take("domain", "boundary_y")?, "boundary_y")?,
    )?;

    let field = LinearMagneticField::new(
        parse_f64(&r.take("field", "b0_tesla")?, "b0_tesla")?,
        parse_f64(&r.take("field", "b1_tesla_per_nm")?, "b1_tesla_per_nm")?,
        parse_axis(&r.take("field", "field_axis")?, "field_axis")?,
    );

    let potential_kind = r.take("field", "potential")?;
    let potential = match potential_kind.value.as_str() {
        "zero" => {
            for k in ["barrier_height_ev", "barrier_center_nm", "barrier_thickness_nm", "barrier_axis"] {
                if let Some(e) = r.take_opt("field", k) {
                    return Err(SimError::config_at(
                        e.line,
                        format!("'{k}' makes no sense with potential = zero"),
                    ));
                }
            }
            PotentialProfile::Zero
        }
        "barrier" => PotentialProfile::RectangularBarrier {
            height_ev: parse_f64(&r.take("field", "barrier_height_ev")?, "barrier_height_ev")?,
            center_nm: parse_f64(&r.take("field", "barrier_center_nm")?, "barrier_center_nm")?,
            thickness_nm: parse_f64(
                &r.take("field", "barrier_thickness_nm")?,
                "barrier_thickness_nm",
            )?,
            axis: parse_axis(&r.take("field", "barrier_axis")?, "barrier_axis")?,
        },
        other => {
            return Err(SimError::config_at(
                potential_kind.line,
                format!("potential must be 'zero' or 'barrier', got '{other}'"),
            ))
        }
    };

    let m_eff_ratio = parse_f64(&r.take("initial", "m_eff_ratio")?, "m_eff_ratio")?;
    let energy = r.take_opt("initial", "energy_ev");
    let mean_momentum = match energy {
        Some(e) => {
            if let Some(px) = r.take_opt("initial", "momentum_x") {
                return Err(SimError::config_at(
                    px.line,
                    "give either energy_ev or momentum_x/momentum_y, not both",
                ));
            }
            if let Some(py) = r.take_opt("initial", "momentum_y") {
                return Err(SimError::config_at(
                    py.line,
                    "give either energy_ev or momentum_x/momentum_y, not both",
                ));
            }
            // Energy shorthand: evolution towards +y.
            Vec2::new(0.0, kinetic_momentum_from_energy(parse_f64(&e, "energy_ev")?, m_eff_ratio)?)
        }
        None => Vec2::new(
            parse_f64(&r.take("initial", "momentum_x")?, "momentum_x")?,
            parse_f64(&r.take("initial", "momentum_y")?, "momentum_y")?,
        ),
    };
    let initial = GaussianWignerState::new(
        Vec2::new(
            parse_f64(&r.take("initial", "center_x_nm")?, "center_x_nm")?,
            parse_f64(&r.take("initial", "center_y_nm")?, "center_y_nm")?,
        ),
        mean_momentum,
        parse_f64(&r.take("initial", "sigma_x_nm")?, "sigma_x_nm")?,
        parse_f64(&r.take("initial", "sigma_y_nm")?, "sigma_y_nm")?,
        m_eff_ratio,
    )?;

    let numerics = Numerics {
        dt: parse_f64(&r.take("numerics", "dt_fs")?, "dt_fs")?,
        l_coh: parse_f64(&r.take("numerics", "l_coh_nm")?, "l_coh_nm")?,
        n_half: parse_usize(&r.take("numerics", "n_half")?, "n_half")?,
        seed: parse_u64(&r.take("numerics", "seed")?, "seed")?,
        particles: parse_usize(&r.take("numerics", "particles")?, "particles")?,
        record_interval: parse_f64(&r.take("numerics", "record_interval_fs")?, "record_interval_fs")?,
        annihilate_interval: parse_f64(
            &r.take("numerics", "annihilate_interval_fs")?,
            "annihilate_interval_fs",
        )?,
        max_particles: parse_usize(&r.take("numerics", "max_particles")?, "max_particles")?,
        gamma_max_multiplier: parse_f64(
            &r.take("numerics", "gamma_max_multiplier")?,
            "gamma_max_multiplier",
        )?,
    };

    let kind = r.take("mode", "kind")?;
    let (mode, injection) = match kind.value.as_str() {
        "steady" => {
            let mode = RunMode::SteadyState {
                t_transient: parse_f64(&r.take("mode", "t_transient_fs")?, "t_transient_fs")?,
                t_average: parse_f64(&r.take("mode", "t_average_fs")?, "t_average_fs")?,
            };
            let injection = InjectionSpec {
                period: parse_f64(&r.take("mode", "injection_period_fs")?, "injection_period_fs")?,
                batch_size: parse_usize(&r.take("mode", "injection_batch")?, "injection_batch")?,
                source_state: initial,
            };
            // Snapshot list from an overridden preset is no longer meaningful.
            r.take_opt("mode", "snapshots_fs");
            (mode, Some(injection))
        }
        "transient" => {
            let list = r.take("mode", "snapshots_fs")?;
            let snapshots: Result<Vec<f64>> = list
                .value
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| {
                        SimError::config_at(
                            list.line,
                            format!("snapshots_fs: bad entry '{}'", tok.trim()),
                        )
                    })
                })
                .collect();
            r.take_opt("mode", "t_transient_fs");
            r.take_opt("mode", "t_average_fs");
            r.take_opt("mode", "injection_period_fs");
            r.take_opt("mode", "injection_batch");
            (RunMode::Transient { snapshots: snapshots? }, None)
        }
        other => {
            return Err(SimError::config_at(
                kind.line,
                format!("kind must be 'steady' or 'transient', got '{other}'"),
            ))
        }
    };

    let scenario = Scenario { name, domain, potential, field, initial, injection, mode, numerics };
    scenario.validate()?;
    Ok(scenario)
}

/// Parses configuration text into a scenario.
pub fn parse_config_text(text: &str) -> Result<Scenario> {
    let parsed = parse_text(text)?;
    let mut entries: BTreeMap<(String, String), Entry>;
    let name;
    match &parsed.preset_name {
        Some(preset_name) => {
            let base = preset(preset_name)?;
            entries = scenario_to_map(&base)
                .into_iter()
                .map(|(k, v)| (k, Entry { line: 0, value: v }))
                .collect();
            // A mode switch discards the base's mode-specific keys.
            if let Some(kind) = parsed.entries.get(&("mode".to_string(), "kind".to_string())) {
                let base_kind = matches!(base.mode, RunMode::SteadyState { .. });
                let new_steady = kind.value == "steady";
                if base_kind != new_steady {
                    entries.retain(|(sec, key), _| !(sec == "mode" && key != "kind"));
                }
            }
            for (k, e) in parsed.entries {
                entries.insert(k, e);
            }
            name = parsed.name.unwrap_or_else(|| preset_name.clone());
        }
        None => {
            entries = parsed.entries;
            name = parsed.name.unwrap_or_else(|| "custom".to_string());
        }
    }
    build_scenario(name, entries)
}

/// Parses a configuration file.
pub fn parse_config(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        SimError::config(format!("cannot read config '{}': {e}", path.display()))
    })?;
    parse_config_text(&text)
}
