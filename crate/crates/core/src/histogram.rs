//! Sparse signed 4D phase-space histogram used to reconstruct the
//! quasi-distribution from particle ensembles.

use indexmap::IndexMap;

use crate::geometry::{Domain2D, MomentumGrid, Vec2};

/// Binning layout of a [`PhaseSpaceHistogram`]: the observable spatial
/// grid of the domain crossed with Δq-wide momentum bins spanning
/// ±n_half quanta per axis (momenta outside are clamped to the edge bins).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub domain: Domain2D,
    pub momentum: MomentumGrid,
}

impl HistogramSpec {
    pub fn new(domain: Domain2D, momentum: MomentumGrid) -> Self {
        HistogramSpec { domain, momentum }
    }

    #[inline]
    pub fn momentum_bins(&self) -> usize {
        2 * self.momentum.n_half + 1
    }

    /// Phase-space cell volume (nm² · (eV·fs/nm)²).
    pub fn cell_volume(&self) -> f64 {
        self.domain.dx() * self.domain.dy() * self.momentum.delta_q * self.momentum.delta_q
    }

    #[inline]
    fn key(&self, ix: usize, iy: usize, kpx: usize, kpy: usize) -> u64 {
        let npx = self.momentum_bins() as u64;
        let npy = npx;
        (((ix as u64 * self.domain.cells_y as u64) + iy as u64) * npx + kpx as u64) * npy
            + kpy as u64
    }

    #[inline]
    fn unkey(&self, key: u64) -> (usize, usize, usize, usize) {
        let npx = self.momentum_bins() as u64;
        let kpy = key % npx;
        let rest = key / npx;
        let kpx = rest % npx;
        let rest = rest / npx;
        let iy = rest % self.domain.cells_y as u64;
        let ix = rest / self.domain.cells_y as u64;
        (ix as usize, iy as usize, kpx as usize, kpy as usize)
    }

    /// Cell of a phase-space point; positions must be inside the domain,
    /// momenta clamp to the grid edges.
    #[inline]
    pub fn cell_of(&self, r: Vec2, p: Vec2) -> Option<u64> {
        let (ix, iy) = self.domain.cell_of(r)?;
        let kpx = (self.momentum.index_of(p.x) + self.momentum.n_half as i32) as usize;
        let kpy = (self.momentum.index_of(p.y) + self.momentum.n_half as i32) as usize;
        Some(self.key(ix, iy, kpx, kpy))
    }
}

/// Sparse signed-weight histogram over (x, y, p_x, p_y).
///
/// `records` counts how many ensemble deposits were accumulated; reading
/// operations report time-averaged values (sums divided by `records`).
/// `normalization` carries the total positive weight injected while the
/// histogram was recording, for observables reported per injected weight.
#[derive(Debug, Clone)]
pub struct PhaseSpaceHistogram {
    pub spec: HistogramSpec,
    bins: IndexMap<u64, f64>,
    pub records: u64,
    pub normalization: f64,
}

impl PhaseSpaceHistogram {
    pub fn new(spec: HistogramSpec) -> Self {
        PhaseSpaceHistogram { spec, bins: IndexMap::new(), records: 0, normalization: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn occupied_cells(&self) -> usize {
        self.bins.len()
    }

    /// Adds one weighted sample.
    #[inline]
    pub fn add(&mut self, r: Vec2, p: Vec2, weight: f64) {
        if let Some(key) = self.spec.cell_of(r, p) {
            *self.bins.entry(key).or_insert(0.0) += weight;
        }
    }

    /// Marks the end of one ensemble deposit.
    pub fn finish_record(&mut self) {
        self.records += 1;
    }

    /// Time-average divisor.
    #[inline]
    pub fn record_norm(&self) -> f64 {
        self.records.max(1) as f64
    }

    /// Iterates cells in deterministic (sorted-key) order as
    /// ((ix, iy, kpx, kpy), time-averaged value).
    pub fn sorted_cells(&self) -> Vec<((usize, usize, usize, usize), f64)> {
        let mut keys: Vec<u64> = self.bins.keys().copied().collect();
        keys.sort_unstable();
        let norm = self.record_norm();
        keys.into_iter()
            .map(|k| (self.spec.unkey(k), self.bins[&k] / norm))
            .collect()
    }

    /// Raw accumulated signed weight (not divided by records).
    pub fn total_weight(&self) -> f64 {
        let mut keys: Vec<u64> = self.bins.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter().map(|k| self.bins[&k]).sum()
    }

    /// In-place `self += scale · other`; layouts must match.
    pub fn accumulate_scaled(&mut self, other: &PhaseSpaceHistogram, scale: f64) {
        assert_eq!(self.spec, other.spec, "histogram layouts differ");
        let mut keys: Vec<u64> = other.bins.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            *self.bins.entry(k).or_insert(0.0) += scale * other.bins[&k];
        }
        self.records += other.records;
        self.normalization += scale * other.normalization;
    }
}
