//! Observables over reconstructed phase-space histograms: densities,
//! marginals, negativity, moments, fringe and bimodality metrics, and
//! the higher-order-term magnitude diagnostic.

use crate::constants::{effective_mass, HBAR, TESLA_TO_FORCE};
use crate::error::{Result, SimError};
use crate::geometry::Axis;
use crate::histogram::PhaseSpaceHistogram;
use crate::wigner_potential::WignerPotentialTable;

/// Spatial density on the observable grid, arbitrary units. Values may
/// carry small negative entries from Monte Carlo noise; they are
/// reported as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Row-major over y, i.e. `values[iy * nx + ix]`.
    pub values: Vec<f64>,
}

impl DensityGrid {
    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// A 1D profile over equally spaced bins along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub axis: Axis,
    /// Coordinate of the first bin center (nm).
    pub start: f64,
    /// Bin width (nm).
    pub step: f64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn coordinate(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    fn bin_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = ((lo - self.start) / self.step).ceil().max(0.0) as usize;
        let last = (((hi - self.start) / self.step).floor() as usize + 1).min(self.values.len());
        first..last.max(first)
    }
}

/// n(x, y): the histogram summed over both momentum axes.
pub fn density2d(h: &PhaseSpaceHistogram) -> DensityGrid {
    let nx = h.spec.domain.cells_x;
    let ny = h.spec.domain.cells_y;
    let mut values = vec![0.0; nx * ny];
    for ((ix, iy, _, _), v) in h.sorted_cells() {
        values[iy * nx + ix] += v;
    }
    DensityGrid { nx, ny, dx: h.spec.domain.dx(), dy: h.spec.domain.dy(), values }
}

fn marginal(h: &PhaseSpaceHistogram, axis: Axis) -> Profile {
    let n = h.spec.domain.cells(axis);
    let step = match axis {
        Axis::X => h.spec.domain.dx(),
        Axis::Y => h.spec.domain.dy(),
    };
    let mut values = vec![0.0; n];
    for ((ix, iy, _, _), v) in h.sorted_cells() {
        let i = match axis {
            Axis::X => ix,
            Axis::Y => iy,
        };
        values[i] += v;
    }
    Profile { axis, start: step / 2.0, step, values }
}

/// n(y): integrated over x and both momenta.
pub fn marginal_y(h: &PhaseSpaceHistogram) -> Profile {
    marginal(h, Axis::Y)
}

/// n(x): integrated over y and both momenta.
pub fn marginal_x(h: &PhaseSpaceHistogram) -> Profile {
    marginal(h, Axis::X)
}

/// Negativity profile along y: the magnitude of the cell-wise negative
/// part of the reconstructed quasi-distribution, summed over x and both
/// momenta. Non-negative by construction.
pub fn negativity_marginal_y(h: &PhaseSpaceHistogram) -> Profile {
    let ny = h.spec.domain.cells_y;
    let step = h.spec.domain.dy();
    let mut values = vec![0.0; ny];
    for ((_, iy, _, _), v) in h.sorted_cells() {
        if v < 0.0 {
            values[iy] += -v;
        }
    }
    Profile { axis: Axis::Y, start: step / 2.0, step, values }
}

/// Positive-part marginal along y; together with the negativity profile
/// this decomposes the |f| marginal cell-wise.
pub fn positive_marginal_y(h: &PhaseSpaceHistogram) -> Profile {
    let ny = h.spec.domain.cells_y;
    let step = h.spec.domain.dy();
    let mut values = vec![0.0; ny];
    for ((_, iy, _, _), v) in h.sorted_cells() {
        if v > 0.0 {
            values[iy] += v;
        }
    }
    Profile { axis: Axis::Y, start: step / 2.0, step, values }
}

/// Mean position and per-axis standard deviation of the positive-weight
/// part of a histogram.
pub fn mean_and_sigma(h: &PhaseSpaceHistogram) -> (crate::geometry::Vec2, crate::geometry::Vec2) {
    let mut w_sum = 0.0;
    let (mut mx, mut my, mut mxx, mut myy) = (0.0, 0.0, 0.0, 0.0);
    let domain = &h.spec.domain;
    for ((ix, iy, _, _), v) in h.sorted_cells() {
        if v <= 0.0 {
            continue;
        }
        let x = domain.cell_center(Axis::X, ix);
        let y = domain.cell_center(Axis::Y, iy);
        w_sum += v;
        mx += v * x;
        my += v * y;
        mxx += v * x * x;
        myy += v * y * y;
    }
    if w_sum <= 0.0 {
        return (crate::geometry::Vec2::ZERO, crate::geometry::Vec2::ZERO);
    }
    let mean = crate::geometry::Vec2::new(mx / w_sum, my / w_sum);
    let var_x = (mxx / w_sum - mean.x * mean.x).max(0.0);
    let var_y = (myy / w_sum - mean.y * mean.y).max(0.0);
    (mean, crate::geometry::Vec2::new(var_x.sqrt(), var_y.sqrt()))
}

/// Root-mean-square of the detrended profile inside `window`, the fringe
/// strength metric. The trend is a moving average over one expected
/// fringe width.
pub fn oscillation_amplitude(
    profile: &Profile,
    window: (f64, f64),
    fringe_width: f64,
) -> Result<f64> {
    let (lo, hi) = window;
    if !(fringe_width > 0.0) {
        return Err(SimError::diagnostic("fringe width must be positive"));
    }
    if hi - lo < 3.0 * fringe_width {
        return Err(SimError::diagnostic(format!(
            "window [{lo}, {hi}] nm is shorter than 3 fringe widths ({} nm)",
            3.0 * fringe_width
        )));
    }
    let range = profile.bin_range(lo, hi);
    if range.is_empty() {
        return Err(SimError::diagnostic("window lies outside the profile support"));
    }
    // Moving-average half width in bins, sized so the averaging window
    // spans one fringe and a pure fringe has zero trend.
    let half = (((fringe_width / profile.step - 1.0) / 2.0).round() as usize).max(1);
    let n = profile.values.len();
    let mut sq_sum = 0.0;
    let mut count = 0usize;
    for i in range {
        if i < half || i + half >= n {
            continue;
        }
        let lo_i = i - half;
        let hi_i = i + half;
        let trend: f64 =
            profile.values[lo_i..=hi_i].iter().sum::<f64>() / (hi_i - lo_i + 1) as f64;
        let resid = profile.values[i] - trend;
        sq_sum += resid * resid;
        count += 1;
    }
    if count == 0 {
        return Err(SimError::diagnostic("window too small for the detrending stencil"));
    }
    Ok((sq_sum / count as f64).sqrt())
}

/// A detected profile peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Bin-center coordinate (nm).
    pub position: f64,
    pub value: f64,
}

/// Peak structure of a 1D profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Bimodality {
    pub peaks: Vec<Peak>,
    /// min-between-the-two-highest-peaks / smaller-peak, when 2+ peaks.
    pub valley_depth_ratio: Option<f64>,
}

/// Finds local maxima with prominence above `prominence_fraction` of the
/// global maximum (default 0.1 via [`bimodality`]) and reports the valley
/// depth between the two dominant peaks.
pub fn bimodality_with_threshold(profile: &Profile, prominence_fraction: f64) -> Bimodality {
    let v = &profile.values;
    let n = v.len();
    if n == 0 {
        return Bimodality { peaks: vec![], valley_depth_ratio: None };
    }
    let global_max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = prominence_fraction * global_max;

    // Candidate local maxima; plateaus collapse to their center bin.
    let mut candidates: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[j + 1] == v[i] {
            j += 1;
        }
        let left_ok = i == 0 || v[i - 1] < v[i];
        let right_ok = j + 1 == n || v[j + 1] < v[i];
        if left_ok && right_ok && v[i] > 0.0 {
            candidates.push((i + j) / 2);
        }
        i = j + 1;
    }

    // Prominence: height above the higher of the two bracketing minima,
    // where each bracket runs to the nearest strictly higher value.
    let mut peaks: Vec<Peak> = Vec::new();
    for &c in &candidates {
        let mut min_l = v[c];
        let mut k = c;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if v[k] > v[c] {
                break;
            }
            min_l = min_l.min(v[k]);
        }
        let mut min_r = v[c];
        let mut k = c;
        loop {
            if k + 1 == n {
                break;
            }
            k += 1;
            if v[k] > v[c] {
                break;
            }
            min_r = min_r.min(v[k]);
        }
        let prominence = v[c] - min_l.max(min_r);
        if prominence >= threshold {
            peaks.push(Peak { position: profile.coordinate(c), value: v[c] });
        }
    }

    let valley_depth_ratio = if peaks.len() >= 2 {
        let mut by_height = peaks.clone();
        by_height.sort_by(|a, b| b.value.total_cmp(&a.value));
        let (a, b) = (by_height[0], by_height[1]);
        let (lo, hi) = if a.position < b.position { (a, b) } else { (b, a) };
        let i_lo = ((lo.position - profile.start) / profile.step).round() as usize;
        let i_hi = ((hi.position - profile.start) / profile.step).round() as usize;
        let valley = v[i_lo..=i_hi].iter().cloned().fold(f64::INFINITY, f64::min);
        Some(valley / a.value.min(b.value))
    } else {
        None
    };

    Bimodality { peaks, valley_depth_ratio }
}

/// [`bimodality_with_threshold`] at the default 10% prominence threshold.
pub fn bimodality(profile: &Profile) -> Bimodality {
    bimodality_with_threshold(profile, 0.1)
}

/// Magnitudes of the neglected higher-order operator and of the Wigner
/// potential term, evaluated on a smoothed, coarsened dense rebin of the
/// histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HigherOrderDiagnostic {
    /// max |(B₁ħ²e/12m)(∂²_py ∂_x − ∂_px ∂_py ∂_y) f|.
    pub max_higher_order: f64,
    /// max |Σ_q V_w(q, r) f(p − q, r)| on the same grid.
    pub max_wigner_term: f64,
    /// Coarsening factor applied to the spatial axes.
    pub space_factor: usize,
    /// Coarsening factor applied to the momentum axes.
    pub momentum_factor: usize,
}

impl HigherOrderDiagnostic {
    pub fn ratio(&self) -> f64 {
        if self.max_wigner_term > 0.0 {
            self.max_higher_order / self.max_wigner_term
        } else if self.max_higher_order == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Dense working grid for the diagnostic.
struct DenseRebin {
    nx: usize,
    ny: usize,
    np: usize,
    dx: f64,
    dy: f64,
    dp: f64,
    values: Vec<f64>,
}

impl DenseRebin {
    #[inline]
    fn idx(&self, ix: usize, iy: usize, kx: usize, ky: usize) -> usize {
        ((ix * self.ny + iy) * self.np + kx) * self.np + ky
    }

    fn boxcar_smooth(&mut self) {
        // One 3-cell boxcar pass per axis, edge-truncated.
        let dims = [self.nx, self.ny, self.np, self.np];
        let strides = [
            self.ny * self.np * self.np,
            self.np * self.np,
            self.np,
            1usize,
        ];
        let mut scratch = vec![0.0; self.values.len()];
        for axis in 0..4 {
            let stride = strides[axis];
            let len = dims[axis];
            scratch.copy_from_slice(&self.values);
            for (flat, out) in self.values.iter_mut().enumerate() {
                let coord = flat / stride % len;
                let mut acc = scratch[flat];
                let mut cnt = 1.0;
                if coord > 0 {
                    acc += scratch[flat - stride];
                    cnt += 1.0;
                }
                if coord + 1 < len {
                    acc += scratch[flat + stride];
                    cnt += 1.0;
                }
                *out = acc / cnt;
            }
        }
    }
}

/// Estimates the neglected higher-order term against the Wigner potential
/// term from a recorded histogram, using central finite differences on a
/// boxcar-smoothed coarse rebin. `b1` in tesla/nm.
pub fn higher_order_term_estimate(
    h: &PhaseSpaceHistogram,
    table: &WignerPotentialTable,
    b1: f64,
    m_eff_ratio: f64,
    space_factor: usize,
    momentum_factor: usize,
) -> Result<HigherOrderDiagnostic> {
    if space_factor == 0 || momentum_factor == 0 {
        return Err(SimError::diagnostic("coarsening factors must be positive"));
    }
    let nx = h.spec.domain.cells_x.div_ceil(space_factor);
    let ny = h.spec.domain.cells_y.div_ceil(space_factor);
    let n_half = h.spec.momentum.n_half;
    let fine_bins = 2 * n_half + 1;
    let np = fine_bins.div_ceil(momentum_factor);
    if nx < 4 || ny < 4 || np < 4 {
        return Err(SimError::diagnostic(format!(
            "diagnostic grid {nx}x{ny}x{np}x{np} is under-resolved; need at least 4 cells per axis"
        )));
    }
    if table.axis() != Axis::Y {
        return Err(SimError::diagnostic(
            "higher-order diagnostic expects the potential to vary along y",
        ));
    }

    let mut dense = DenseRebin {
        nx,
        ny,
        np,
        dx: h.spec.domain.dx() * space_factor as f64,
        dy: h.spec.domain.dy() * space_factor as f64,
        dp: h.spec.momentum.delta_q * momentum_factor as f64,
        values: vec![0.0; nx * ny * np * np],
    };
    for ((ix, iy, kpx, kpy), v) in h.sorted_cells() {
        let i = dense.idx(
            ix / space_factor,
            iy / space_factor,
            kpx / momentum_factor,
            kpy / momentum_factor,
        );
        dense.values[i] += v;
    }
    dense.boxcar_smooth();

    // Higher-order operator prefactor (B₁ ħ² / m)(e / 12); TESLA_TO_FORCE
    // carries e and the unit bookkeeping for B in tesla.
    let prefactor = TESLA_TO_FORCE * b1 / effective_mass(m_eff_ratio) * HBAR * HBAR / 12.0;
    let mut max_hot = 0.0f64;
    for ix in 1..nx - 1 {
        for iy in 1..ny - 1 {
            for kx in 1..np - 1 {
                for ky in 1..np - 1 {
                    let f = |dix: i64, diy: i64, dkx: i64, dky: i64| {
                        dense.values[dense.idx(
                            (ix as i64 + dix) as usize,
                            (iy as i64 + diy) as usize,
                            (kx as i64 + dkx) as usize,
                            (ky as i64 + dky) as usize,
                        )]
                    };
                    // ∂²_py ∂_x f
                    let d2py_dx = ((f(1, 0, 0, 1) - 2.0 * f(1, 0, 0, 0) + f(1, 0, 0, -1))
                        - (f(-1, 0, 0, 1) - 2.0 * f(-1, 0, 0, 0) + f(-1, 0, 0, -1)))
                        / (2.0 * dense.dx * dense.dp * dense.dp);
                    // ∂_px ∂_py ∂_y f
                    let mut dpx_dpy_dy = 0.0;
                    for (sy, wy) in [(1i64, 1.0), (-1i64, -1.0)] {
                        for (sx, wx) in [(1i64, 1.0), (-1i64, -1.0)] {
                            for (sp, wp) in [(1i64, 1.0), (-1i64, -1.0)] {
                                dpx_dpy_dy += wy * wx * wp * f(0, sy, sx, sp);
                            }
                        }
                    }
                    dpx_dpy_dy /= 8.0 * dense.dy * dense.dp * dense.dp;
                    let hot = prefactor * (d2py_dx - dpx_dpy_dy);
                    max_hot = max_hot.max(hot.abs());
                }
            }
        }
    }

    // Wigner potential term Σ_q V_w(q, y) f(px, py − q) on the coarse
    // grid: aggregate the Δq-resolved table into coarse offsets and
    // average it over the fine spatial cells of each coarse y row.
    let fine_ny = h.spec.domain.cells_y;
    let coarse_q_half = (n_half as i64 + momentum_factor as i64 - 1) / momentum_factor as i64;
    let mut max_vw = 0.0f64;
    let mut v_coarse = vec![0.0f64; (2 * coarse_q_half + 1) as usize];
    for iy in 0..ny {
        // Average table rows over the fine cells inside this coarse row.
        for v in v_coarse.iter_mut() {
            *v = 0.0;
        }
        let lo = iy * space_factor;
        let hi = ((iy + 1) * space_factor).min(fine_ny);
        let n_rows = (hi - lo) as f64;
        for fine_iy in lo..hi {
            for n in -(n_half as i32)..=(n_half as i32) {
                let m = (n as i64).div_euclid(momentum_factor as i64);
                let m = m.clamp(-coarse_q_half, coarse_q_half);
                v_coarse[(m + coarse_q_half) as usize] +=
                    table.value(fine_iy, n) / n_rows;
            }
        }
        for ix in 0..nx {
            for kx in 0..np {
                for ky in 0..np {
                    let mut acc = 0.0;
                    for (mi, vq) in v_coarse.iter().enumerate() {
                        if *vq == 0.0 {
                            continue;
                        }
                        let m = mi as i64 - coarse_q_half;
                        let src = ky as i64 - m;
                        if src < 0 || src >= np as i64 {
                            continue;
                        }
                        acc += vq * dense.values[dense.idx(ix, iy, kx, src as usize)];
                    }
                    max_vw = max_vw.max(acc.abs());
                }
            }
        }
    }

    Ok(HigherOrderDiagnostic {
        max_higher_order: max_hot,
        max_wigner_term: max_vw,
        space_factor,
        momentum_factor,
    })
}
