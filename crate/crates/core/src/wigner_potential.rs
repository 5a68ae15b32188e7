//! Semi-discrete Wigner potential of a one-axis electrostatic profile,
//! its positive part, and the pair-generation rate γ.

use std::io::Write;

use crate::constants::HBAR;
use crate::error::{Result, SimError};
use crate::fields::PotentialProfile;
use crate::geometry::{Domain2D, MomentumGrid, Vec2};

/// Tabulated V_w(q_n, c) over the spatial cells `c` along the potential
/// axis and momentum quanta q_n = n·Δq, plus the derived generation rate
/// γ(c) = Σ_q max(V_w, 0) and per-cell cumulative tables for sampling.
///
/// Values carry units of 1/fs. For a real potential the table is exactly
/// antisymmetric in q, which the construction guarantees by computing the
/// positive quanta and mirroring.
#[derive(Debug, Clone)]
pub struct WignerPotentialTable {
    domain: Domain2D,
    axis: crate::geometry::Axis,
    grid: MomentumGrid,
    cells: usize,
    /// Row-major `[cell][n_half + n]`, n in −n_half..=n_half.
    values: Vec<f64>,
    /// γ per cell (1/fs).
    gamma: Vec<f64>,
    /// Per-cell running sum of max(values, 0) over the q index, same
    /// layout as `values`; last entry of a row equals γ of that cell.
    cumulative: Vec<f64>,
    gamma_max: f64,
}

impl WignerPotentialTable {
    pub fn grid(&self) -> MomentumGrid {
        self.grid
    }

    pub fn axis(&self) -> crate::geometry::Axis {
        self.axis
    }

    /// Largest γ over all cells (1/fs); the self-scattering bound.
    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    pub fn n_quanta(&self) -> usize {
        2 * self.grid.n_half + 1
    }

    fn cell_index(&self, r: Vec2) -> Option<usize> {
        if !self.domain.contains(r) {
            return None;
        }
        let c = r.component(self.axis);
        let step = self.domain.extent(self.axis) / self.cells as f64;
        Some(((c / step) as usize).min(self.cells - 1))
    }

    /// Table value V_w(q_n, cell).
    pub fn value(&self, cell: usize, n: i32) -> f64 {
        let off = (n + self.grid.n_half as i32) as usize;
        self.values[cell * self.n_quanta() + off]
    }

    /// γ at a cell index.
    pub fn gamma_at_cell(&self, cell: usize) -> f64 {
        self.gamma[cell]
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Sum of the positive part by momentum magnitude — diagnostic view
    /// used by the higher-order-term comparison.
    pub fn row(&self, cell: usize) -> &[f64] {
        let w = self.n_quanta();
        &self.values[cell * w..(cell + 1) * w]
    }

    /// Writes the table as CSV: cell coordinate (nm), q index, value (1/fs).
    pub fn dump_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# wigner potential table: coordinate along {} (nm), q index, value (1/fs)", self.axis.label())?;
        writeln!(out, "coordinate_nm,q_index,value_per_fs")?;
        let n_half = self.grid.n_half as i32;
        for cell in 0..self.cells {
            let c = self.domain.cell_center(self.axis, cell);
            for n in -n_half..=n_half {
                writeln!(out, "{},{},{:.12e}", c, n, self.value(cell, n))?;
            }
        }
        Ok(())
    }
}

/// Builds the semi-discrete Wigner potential
/// V_w(q_n, c) = 1/(2iħL) ∫_{−L}^{L} ds e^{−i q_n s/ħ} [V(c+s/2) − V(c−s/2)]
/// by midpoint quadrature. The difference term is odd in s, so only the
/// sine survives and the result is real:
/// V_w(q, c) = −(1/(ħL)) ∫_0^{L} sin(q s/ħ) [V(c+s/2) − V(c−s/2)] ds.
///
/// Window and prefactor are tied to the grid: the plane waves of the
/// quanta Δq = πħ/L form an orthogonal basis on a transform arm of
/// length 2L, and the kernel is the continuum transform times the
/// Riemann weight Δq. The discrete first moment Σ_q q·V_w then
/// reproduces the classical force −V′ exactly (checked in the tests
/// below), which pins both choices.
pub fn build_wigner_potential(
    profile: &PotentialProfile,
    grid: MomentumGrid,
    domain: &Domain2D,
    l_coh: f64,
) -> Result<WignerPotentialTable> {
    if !(l_coh > 0.0) {
        return Err(SimError::config("coherence length must be positive"));
    }
    let expected_dq = std::f64::consts::PI * HBAR / l_coh;
    if (grid.delta_q - expected_dq).abs() > 1e-12 * expected_dq {
        return Err(SimError::config(format!(
            "momentum grid Δq = {} does not match πħ/L_coh = {}",
            grid.delta_q, expected_dq
        )));
    }
    profile.validate(domain)?;

    let axis = profile.axis();
    let cells = domain.cells(axis);
    let n_half = grid.n_half;
    let width = 2 * n_half + 1;
    let mut values = vec![0.0; cells * width];

    if !profile.is_zero() {
        // Sub-feature quadrature resolution along the transform arm.
        let feature = match profile {
            PotentialProfile::RectangularBarrier { thickness_nm, .. } => *thickness_nm,
            PotentialProfile::Tabulated { .. } => domain.extent(axis) / cells as f64,
            PotentialProfile::Zero => unreachable!(),
        };
        let step = 0.1f64.min(feature / 10.0);
        let arm = l_coh;
        let m = (arm / step).ceil() as usize;
        let h = arm / m as f64;

        // Precompute the odd difference V(c + s/2) − V(c − s/2) at the
        // quadrature midpoints once per cell, then run all quanta on it.
        let mut diff = vec![0.0; m];
        for cell in 0..cells {
            let c = domain.cell_center(axis, cell);
            for (j, d) in diff.iter_mut().enumerate() {
                let s = (j as f64 + 0.5) * h;
                *d = profile.value_along_axis(c + s / 2.0, domain)
                    - profile.value_along_axis(c - s / 2.0, domain);
            }
            for n in 1..=n_half {
                let k = grid.momentum_of(n as i32) / HBAR;
                let mut acc = 0.0;
                for (j, d) in diff.iter().enumerate() {
                    let s = (j as f64 + 0.5) * h;
                    acc += (k * s).sin() * d;
                }
                let v = -(1.0 / (HBAR * l_coh)) * acc * h;
                values[cell * width + n_half + n] = v;
                values[cell * width + n_half - n] = -v;
            }
        }
    }

    let mut gamma = vec![0.0; cells];
    let mut cumulative = vec![0.0; cells * width];
    for cell in 0..cells {
        let mut run = 0.0;
        for k in 0..width {
            let v = values[cell * width + k];
            if v > 0.0 {
                run += v;
            }
            cumulative[cell * width + k] = run;
        }
        gamma[cell] = run;
    }
    let gamma_max = gamma.iter().cloned().fold(0.0, f64::max);

    Ok(WignerPotentialTable {
        domain: *domain,
        axis,
        grid,
        cells,
        values,
        gamma,
        cumulative,
        gamma_max,
    })
}

/// Pair-generation rate γ at a position (1/fs); 0 outside the domain.
pub fn generation_rate(table: &WignerPotentialTable, r: Vec2) -> f64 {
    match table.cell_index(r) {
        Some(c) => table.gamma[c],
        None => 0.0,
    }
}

/// Draws a momentum offset q_n distributed ∝ max(V_w(q_n, r), 0) by
/// inverting the per-cell cumulative table. `u` must lie in [0, 1);
/// u = 0 maps to the smallest-index positive entry.
pub fn sample_offset(table: &WignerPotentialTable, r: Vec2, u: f64) -> Result<f64> {
    let cell = table
        .cell_index(r)
        .ok_or_else(|| SimError::domain("sample_offset called outside the domain"))?;
    let g = table.gamma[cell];
    if !(g > 0.0) {
        return Err(SimError::domain("sample_offset requires a positive generation rate"));
    }
    let width = table.n_quanta();
    let row = &table.cumulative[cell * width..(cell + 1) * width];
    let target = u * g;
    // First index whose cumulative exceeds the target.
    let idx = match row.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
        Ok(mut i) => {
            // Landed on a cumulative value equal to the target: step to the
            // next strictly-greater entry.
            while i < width - 1 && row[i] <= target {
                i += 1;
            }
            i
        }
        Err(i) => i.min(width - 1),
    };
    let n = idx as i32 - table.grid.n_half as i32;
    debug_assert!(n != 0);
    Ok(table.grid.momentum_of(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Axis, BoundaryKind};

    fn domain() -> Domain2D {
        Domain2D::new(40.0, 60.0, 80, 120, BoundaryKind::Absorbing, BoundaryKind::Absorbing)
            .unwrap()
    }

    fn barrier() -> PotentialProfile {
        PotentialProfile::RectangularBarrier {
            height_ev: 0.3,
            center_nm: 30.0,
            thickness_nm: 1.0,
            axis: Axis::Y,
        }
    }

    fn table(height: f64) -> WignerPotentialTable {
        let d = domain();
        let grid = MomentumGrid::for_coherence_length(30.0, 48).unwrap();
        let profile = PotentialProfile::RectangularBarrier {
            height_ev: height,
            center_nm: 30.0,
            thickness_nm: 1.0,
            axis: Axis::Y,
        };
        build_wigner_potential(&profile, grid, &d, 30.0).unwrap()
    }

    /// Closed-form V_w of a rectangular barrier when the transform arm
    /// stays clear of the window edges: −(2V₀/(L q)) sin(2qu/ħ) sin(qa/ħ)
    /// with u the distance from the evaluation point to the barrier center.
    fn analytic_barrier_vw(v0: f64, a: f64, l: f64, u: f64, q: f64) -> f64 {
        -(2.0 * v0 / (l * q)) * (2.0 * q * u / HBAR).sin() * (q * a / HBAR).sin()
    }

    /// The kernel's first moment Σ_q q·V_w(q, c) must equal the classical
    /// force −V′(c) once the potential's wavelength is resolved by the
    /// momentum grid (here λ = 6 nm against Δq = πħ/30, i.e. 5 quanta).
    /// This pins the kernel normalization.
    #[test]
    fn first_moment_reproduces_the_classical_force() {
        let d = Domain2D::new(
            40.0,
            60.0,
            80,
            120,
            BoundaryKind::Absorbing,
            BoundaryKind::Absorbing,
        )
        .unwrap();
        let lambda = 6.0;
        let k = 2.0 * std::f64::consts::PI / lambda;
        let amp = 0.05;
        let v = |y: f64| amp * (1.0 + (k * y).sin());
        let samples: Vec<f64> = (0..120).map(|i| v((i as f64 + 0.5) * 0.5)).collect();
        let profile = PotentialProfile::Tabulated { axis: Axis::Y, samples };
        let grid = MomentumGrid::for_coherence_length(30.0, 64).unwrap();
        let t = build_wigner_potential(&profile, grid, &d, 30.0).unwrap();
        for cell in [30usize, 57, 90] {
            let y = d.cell_center(Axis::Y, cell);
            let force_expected = -amp * k * (k * y).cos();
            let mut moment = 0.0;
            for n in -(grid.n_half as i32)..=(grid.n_half as i32) {
                moment += grid.momentum_of(n) * t.value(cell, n);
            }
            assert!(
                (moment - force_expected).abs() < 0.05 * amp * k,
                "cell {cell}: moment {moment:.6e} vs force {force_expected:.6e}"
            );
        }
    }

    #[test]
    fn zero_potential_gives_empty_table() {
        let d = domain();
        let grid = MomentumGrid::for_coherence_length(30.0, 48).unwrap();
        let t = build_wigner_potential(&PotentialProfile::Zero, grid, &d, 30.0).unwrap();
        assert!(t.values.iter().all(|v| *v == 0.0));
        assert!(t.gamma.iter().all(|g| *g == 0.0));
        assert_eq!(t.gamma_max(), 0.0);
        assert_eq!(generation_rate(&t, Vec2::new(20.0, 30.0)), 0.0);
    }

    #[test]
    fn mismatched_quantum_rejected() {
        let d = domain();
        let grid = MomentumGrid::for_coherence_length(25.0, 48).unwrap();
        assert!(build_wigner_potential(&barrier(), grid, &d, 30.0).is_err());
    }

    #[test]
    fn antisymmetry_and_zero_row_sum_exact() {
        let t = table(0.3);
        let n_half = t.grid.n_half as i32;
        for cell in 0..t.cells {
            let mut paired = 0.0;
            let mut sequential = 0.0;
            for n in -n_half..=n_half {
                assert_eq!(t.value(cell, n), -t.value(cell, -n));
                sequential += t.value(cell, n);
            }
            for n in 1..=n_half {
                paired += t.value(cell, n) + t.value(cell, -n);
            }
            assert_eq!(paired, 0.0);
            // Sequential summation only cancels to round-off.
            assert!(sequential.abs() <= 1e-14 * t.gamma_at_cell(cell).max(1e-3));
            assert_eq!(t.value(cell, 0), 0.0);
        }
    }

    #[test]
    fn gamma_scale_matches_nanostructure_rate() {
        // γ near the barrier should be of order 10^14..10^15 s⁻¹,
        // i.e. 0.1..1 fs⁻¹.
        let t = table(0.3);
        let g = t.gamma_max();
        assert!(g > 0.1 && g < 2.0, "gamma_max = {g} 1/fs");
        // And it must be attained close to the barrier.
        let best = (0..t.cells).max_by(|a, b| t.gamma[*a].total_cmp(&t.gamma[*b])).unwrap();
        let y = t.domain.cell_center(Axis::Y, best);
        assert!((y - 30.0).abs() <= 30.0 / 2.0 + 1.0, "gamma peaks at y = {y} nm");
    }

    #[test]
    fn gamma_vanishes_beyond_coherence_window() {
        let t = table(0.3);
        // Kernel support reaches |y − 30| ≤ (L + a)/2 = 15.5 nm; y = 10 nm
        // is outside.
        assert_eq!(generation_rate(&t, Vec2::new(20.0, 10.0)), 0.0);
        assert_eq!(generation_rate(&t, Vec2::new(20.0, 55.0)), 0.0);
        // Outside the domain the rate reports 0 rather than an error.
        assert_eq!(generation_rate(&t, Vec2::new(20.0, 75.0)), 0.0);
        assert!(generation_rate(&t, Vec2::new(20.0, 27.0)) > 0.0);
    }

    #[test]
    fn table_is_linear_in_the_potential() {
        let t1 = table(0.3);
        let t2 = table(0.6);
        for (a, b) in t1.values.iter().zip(t2.values.iter()) {
            assert_eq!(*b, 2.0 * *a);
        }
    }

    #[test]
    fn gamma_invariant_under_sign_flip() {
        let d = domain();
        let grid = MomentumGrid::for_coherence_length(30.0, 48).unwrap();
        let mut samples = vec![0.0; 120];
        for (i, s) in samples.iter_mut().enumerate() {
            let y = (i as f64 + 0.5) * 0.5;
            if (29.5..30.5).contains(&y) {
                *s = 0.3;
            }
        }
        let flipped: Vec<f64> = samples.iter().map(|v| -v).collect();
        let tp = build_wigner_potential(
            &PotentialProfile::Tabulated { axis: Axis::Y, samples },
            grid,
            &d,
            30.0,
        )
        .unwrap();
        let tn = build_wigner_potential(
            &PotentialProfile::Tabulated { axis: Axis::Y, samples: flipped },
            grid,
            &d,
            30.0,
        )
        .unwrap();
        for cell in 0..tp.cells {
            // The positive entries sit at mirrored indices, so only the
            // summation order differs.
            let (a, b) = (tp.gamma[cell], tn.gamma[cell]);
            assert!((a - b).abs() <= 1e-12 * a.max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let t = table(0.3);
        // Cell at y = 27.75 nm sits u = 2.25 nm below the barrier center,
        // comfortably inside the window.
        let cell = 55;
        let u = 30.0 - t.domain.cell_center(Axis::Y, cell);
        for n in [1i32, 3, 7, 12, 20, 35] {
            let q = t.grid.momentum_of(n);
            let expect = analytic_barrier_vw(0.3, 1.0, 30.0, u, q);
            let got = t.value(cell, n);
            assert!(
                (got - expect).abs() < 0.03 * expect.abs().max(0.01),
                "n = {n}: quadrature {got}, closed form {expect}"
            );
        }
    }

    #[test]
    fn offsets_follow_positive_part() {
        let t = table(0.3);
        let r = Vec2::new(20.0, 27.75);
        let cell = t.cell_index(r).unwrap();
        let g = t.gamma[cell];
        assert!(g > 0.0);

        // u = 0 lands on the smallest-index positive entry.
        let n_half = t.grid.n_half as i32;
        let first_positive = (-n_half..=n_half)
            .find(|n| t.value(cell, *n) > 0.0)
            .unwrap();
        assert_eq!(sample_offset(&t, r, 0.0).unwrap(), t.grid.momentum_of(first_positive));

        // Histogram of many quasi-uniform draws against V_w⁺/γ within
        // multinomial 3σ + discretization slack per bin.
        let m = 1_000_000usize;
        let mut counts = vec![0usize; t.n_quanta()];
        for i in 0..m {
            let u = (i as f64 + 0.5) / m as f64;
            let q = sample_offset(&t, r, u).unwrap();
            assert!(q != 0.0);
            let n = (q / t.grid.delta_q).round() as i32;
            counts[(n + n_half) as usize] += 1;
        }
        for n in -n_half..=n_half {
            let p = t.value(cell, n).max(0.0) / g;
            let expected = p * m as f64;
            let tol = 3.0 * (expected.max(1.0) * (1.0 - p)).sqrt() + 2.0;
            let got = counts[(n + n_half) as usize] as f64;
            assert!(
                (got - expected).abs() <= tol,
                "n = {n}: got {got}, expected {expected} ± {tol}"
            );
        }
    }

    #[test]
    fn sampling_zero_rate_is_an_error() {
        let t = table(0.3);
        assert!(sample_offset(&t, Vec2::new(20.0, 5.0), 0.5).is_err());
    }

    #[test]
    fn dump_csv_round_trips_values() {
        let t = table(0.3);
        let mut buf = Vec::new();
        t.dump_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines().skip(2);
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[1].parse::<i32>().unwrap(), -(t.grid.n_half as i32));
        let v: f64 = fields[2].parse().unwrap();
        assert!((v - t.value(0, -(t.grid.n_half as i32))).abs() <= v.abs() * 1e-9);
    }
}
