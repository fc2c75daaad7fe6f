//! Frostman measures on the line and on direction space.
//!
//! Both constructions are the bottom-up dyadic one: every occupied cell starts
//! with the largest mass a single cell may carry, and each dyadic block is then
//! scaled down, level by level, until no block carries more than `ℓ^s`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Direction, Interval};

/// Slack between dyadic-interval control and control on arbitrary intervals.
pub const DYADIC_SLACK: f64 = 4.0;

/// A nonnegative measure that is uniform on each cell `[jδ, (j+1)δ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMeasure1D {
    delta: f64,
    lo: i64,
    weights: Vec<f64>,
}

impl StepMeasure1D {
    pub fn new(delta: f64, lo: i64, weights: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell width must be positive, got {delta}")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("cell masses must be finite and >= 0, got {w}")));
        }
        Ok(StepMeasure1D { delta, lo, weights })
    }

    pub fn zero(delta: f64) -> Self {
        StepMeasure1D { delta, lo: 0, weights: Vec::new() }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Index of the first stored cell.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// One past the last stored cell.
    pub fn hi(&self) -> i64 {
        self.lo + self.weights.len() as i64
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell(&self, j: i64) -> f64 {
        if j < self.lo || j >= self.hi() {
            0.0
        } else {
            self.weights[(j - self.lo) as usize]
        }
    }

    /// Cells with positive mass, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0).map(move |(i, w)| (self.lo + i as i64, *w))
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass of `[a, b)`, treating the measure as uniform inside each cell.
    pub fn measure(&self, a: f64, b: f64) -> f64 {
        if b <= a || self.weights.is_empty() {
            return 0.0;
        }
        let first = ((a / self.delta).floor() as i64).max(self.lo);
        let last = ((b / self.delta).ceil() as i64).min(self.hi());
        let mut total = 0.0;
        for j in first..last {
            let c0 = j as f64 * self.delta;
            let overlap = (b.min(c0 + self.delta) - a.max(c0)).max(0.0);
            total += self.cell(j) * overlap / self.delta;
        }
        total
    }

    pub fn scaled(&self, k: f64) -> Self {
        StepMeasure1D { delta: self.delta, lo: self.lo, weights: self.weights.iter().map(|w| w * k).collect() }
    }

    /// Drops leading and trailing empty cells.
    pub fn trimmed(&self) -> Self {
        let first = self.weights.iter().position(|w| *w > 0.0);
        let last = self.weights.iter().rposition(|w| *w > 0.0);
        match (first, last) {
            (Some(a), Some(b)) => StepMeasure1D {
                delta: self.delta,
                lo: self.lo + a as i64,
                weights: self.weights[a..=b].to_vec(),
            },
            _ => StepMeasure1D::zero(self.delta),
        }
    }
}

/// A finite union of grid cells `[jδ, (j+1)δ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactGridSet1D {
    delta_bits: u64,
    occupied: BTreeSet<i64>,
}

impl CompactGridSet1D {
    pub fn new(delta: f64, occupied: impl IntoIterator<Item = i64>) -> Self {
        CompactGridSet1D { delta_bits: delta.to_bits(), occupied: occupied.into_iter().collect() }
    }

    /// Cells meeting any of the intervals `[lo, hi)`; a degenerate interval
    /// selects the cell containing its point.
    pub fn from_intervals(delta: f64, intervals: &[Interval]) -> Self {
        let eps = 1e-9;
        let mut occupied = BTreeSet::new();
        for iv in intervals {
            let a = (iv.lo / delta + eps).floor() as i64;
            let b = ((iv.hi / delta - eps).ceil() as i64).max(a + 1);
            occupied.extend(a..b);
        }
        CompactGridSet1D { delta_bits: delta.to_bits(), occupied }
    }

    pub fn delta(&self) -> f64 {
        f64::from_bits(self.delta_bits)
    }

    pub fn cells(&self) -> &BTreeSet<i64> {
        &self.occupied
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn union(&self, other: &CompactGridSet1D) -> CompactGridSet1D {
        CompactGridSet1D {
            delta_bits: self.delta_bits,
            occupied: self.occupied.union(&other.occupied).copied().collect(),
        }
    }
}

/// Cell indices are shifted by this before taking dyadic blocks, so every
/// set lies in one fixed dyadic window and blocks on both sides of zero merge.
const WINDOW_SHIFT: i64 = 1 << 40;

/// Dyadic ascent on sorted cell indices with per-cell cap `width^exponent`.
///
/// Returns the masses aligned with `cells`. Blocks are the absolute dyadic
/// blocks `[m·2^k, (m+1)·2^k)` of the fixed window, so enlarging the set
/// never lowers any block's mass.
fn dyadic_ascent(cells: &[i64], width: f64, exponent: f64) -> Vec<f64> {
    let mut mass = vec![width.powf(exponent); cells.len()];
    if cells.is_empty() {
        return mass;
    }
    let cells: Vec<i64> = cells.iter().map(|c| c + WINDOW_SHIFT).collect();
    let mut level = 0u32;
    loop {
        level += 1;
        let block_len = width * (1u64 << level) as f64;
        let cap = block_len.powf(exponent);
        let mut start = 0;
        while start < cells.len() {
            let block = cells[start] >> level;
            let mut end = start + 1;
            while end < cells.len() && cells[end] >> level == block {
                end += 1;
            }
            let total: f64 = mass[start..end].iter().sum();
            if total > cap {
                let k = cap / total;
                mass[start..end].iter_mut().for_each(|m| *m *= k);
            }
            start = end;
        }
        if cells[0] >> level == cells[cells.len() - 1] >> level {
            break;
        }
    }
    mass
}

/// Frostman measure on a grid set: every dyadic interval `I` at scales
/// `>= δ` gets `μ(I) <= ℓ(I)^s`, and the mass is comparable to the set's
/// `s`-content (see [`grid_content`]).
pub fn frostman_build_1d(set: &CompactGridSet1D, s: f64) -> Result<StepMeasure1D> {
    if set.is_empty() {
        return Err(Error::EmptySupport);
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent s must lie in (0, 1], got {s}")));
    }
    let delta = set.delta();
    let cells: Vec<i64> = set.cells().iter().copied().collect();
    let mass = dyadic_ascent(&cells, delta, s);
    let lo = cells[0];
    let mut weights = vec![0.0; (cells[cells.len() - 1] - lo + 1) as usize];
    for (j, m) in cells.iter().zip(mass) {
        weights[(j - lo) as usize] = m;
    }
    StepMeasure1D::new(delta, lo, weights)
}

/// `max μ([pδ, qδ)) / ((q-p)δ)^s` over grid-aligned intervals.
///
/// Only intervals whose end cells carry mass can be maximal, so the scan runs
/// over pairs of support cells.
pub fn growth_ratio(mu: &StepMeasure1D, s: f64) -> f64 {
    let support: Vec<(i64, f64)> = mu.support().collect();
    let mut prefix = Vec::with_capacity(support.len() + 1);
    prefix.push(0.0);
    for (_, m) in &support {
        prefix.push(prefix.last().unwrap() + m);
    }
    let delta = mu.delta();
    let mut worst: f64 = 0.0;
    for a in 0..support.len() {
        for b in a..support.len() {
            let len = (support[b].0 - support[a].0 + 1) as f64 * delta;
            worst = worst.max((prefix[b + 1] - prefix[a]) / len.powf(s));
        }
    }
    worst
}

/// `H^s_∞` of the set among covers by grid-aligned intervals, by dynamic
/// programming over contiguous runs of the sorted cells (optimal covers of
/// subsets of the line by intervals never interleave).
pub fn grid_content(set: &CompactGridSet1D, s: f64) -> f64 {
    let cells: Vec<i64> = set.cells().iter().copied().collect();
    let delta = set.delta();
    let mut best = vec![0.0f64; cells.len() + 1];
    for i in 1..=cells.len() {
        let mut b = f64::INFINITY;
        for k in 0..i {
            let len = (cells[i - 1] - cells[k] + 1) as f64 * delta;
            b = b.min(best[k] + len.powf(s));
        }
        best[i] = b;
    }
    best[cells.len()]
}

/// Set of angular cells on direction space `[0, π)`, split into `n` cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AngularCells {
    pub n: usize,
    pub occupied: BTreeSet<usize>,
}

impl AngularCells {
    pub fn new(n: usize, occupied: impl IntoIterator<Item = usize>) -> Self {
        AngularCells { n, occupied: occupied.into_iter().filter(|&i| i < n).collect() }
    }

    pub fn full(n: usize) -> Self {
        AngularCells::new(n, 0..n)
    }

    pub fn width(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn cell_of(&self, e: Direction) -> usize {
        ((e.angle() / self.width()).floor() as usize).min(self.n - 1)
    }
}

/// Nonnegative measure on direction space with growth `σ(B(e,r)) <= r^{1-t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleMeasure {
    masses: Vec<f64>,
    t: f64,
}

impl CircleMeasure {
    pub fn new(masses: Vec<f64>, t: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::EmptySupport);
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidParameter("circle masses must be finite and >= 0".into()));
        }
        Ok(CircleMeasure { masses, t })
    }

    /// A unit point mass in the cell containing `e`.
    pub fn point_mass(n: usize, e: Direction, t: f64) -> Self {
        let cells = AngularCells::full(n);
        let mut masses = vec![0.0; n];
        masses[cells.cell_of(e)] = 1.0;
        CircleMeasure { masses, t }
    }

    pub fn cells(&self) -> usize {
        self.masses.len()
    }

    pub fn width(&self) -> f64 {
        PI / self.masses.len() as f64
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn exponent(&self) -> f64 {
        1.0 - self.t
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn center(&self, i: usize) -> Direction {
        Direction::from_angle((i as f64 + 0.5) * self.width())
    }

    /// `σ(A)` for a set of cell indices.
    pub fn mass_of(&self, cells: impl IntoIterator<Item = usize>) -> f64 {
        cells.into_iter().filter(|&i| i < self.masses.len()).map(|i| self.masses[i]).sum()
    }

    /// `max σ(B)/r^{1-t}` over balls of radius `r >= w` (w the cell width),
    /// treating each cell's mass as sitting at its centre. A run of `m`
    /// consecutive cells needs radius at least `chord((m-1)w/2)`.
    pub fn grid_ball_ratio(&self) -> f64 {
        let n = self.masses.len();
        let w = self.width();
        let exponent = self.exponent();
        let radius: Vec<f64> = (1..=n)
            .map(|m| {
                let half_angle = ((m - 1) as f64 * w / 2.0).min(PI / 2.0);
                (2.0 * (half_angle / 2.0).sin()).max(w).powf(exponent)
            })
            .collect();
        let mut worst: f64 = 0.0;
        for start in 0..n {
            if self.masses[start] == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for m in 1..=n {
                let idx = (start + m - 1) % n;
                acc += self.masses[idx];
                // runs ending on an empty cell are dominated by shorter ones
                if self.masses[idx] > 0.0 {
                    worst = worst.max(acc / radius[m - 1]);
                }
            }
        }
        worst
    }
}

/// Frostman measure on a set of angular cells with growth exponent `1 - t`.
///
/// The dyadic ascent runs on the cell indices (padded to a power of two) and
/// the result is then normalized so that the grid-ball check of
/// [`CircleMeasure::grid_ball_ratio`] holds exactly.
pub fn circle_frostman(arcs: &AngularCells, t: f64) -> Result<CircleMeasure> {
    if arcs.occupied.is_empty() {
        return Err(Error::EmptySupport);
    }
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t must lie in [0, 1), got {t}")));
    }
    let cells: Vec<i64> = arcs.occupied.iter().map(|&i| i as i64).collect();
    let mass = dyadic_ascent(&cells, arcs.width(), 1.0 - t);
    let mut masses = vec![0.0; arcs.n];
    for (i, m) in cells.iter().zip(mass) {
        masses[*i as usize] = m;
    }
    let mut sigma = CircleMeasure { masses, t };
    let ratio = sigma.grid_ball_ratio();
    if ratio > 1.0 {
        sigma.masses.iter_mut().for_each(|m| *m /= ratio);
    }
    Ok(sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RieszReport {
    pub value: f64,
    /// Set when `t >= s`: the energy need not stay bounded as cells shrink.
    pub may_diverge: bool,
}

/// `Σ_e σ(cell_e)·max(|e - ξ|, w)^{s-1}`, with `w` the cell width.
pub fn riesz_potential(sigma: &CircleMeasure, at: Direction, s: f64) -> f64 {
    let w = sigma.width();
    sigma
        .masses
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0)
        .map(|(i, m)| m * sigma.center(i).chord_distance(at).max(w).powf(s - 1.0))
        .sum()
}

/// Supremum of [`riesz_potential`] over the support cells of `sigma`.
pub fn riesz_integral(sigma: &CircleMeasure, s: f64) -> RieszReport {
    let value = (0..sigma.cells())
        .filter(|&i| sigma.masses[i] > 0.0)
        .map(|i| riesz_potential(sigma, sigma.center(i), s))
        .fold(0.0, f64::max);
    RieszReport { value, may_diverge: sigma.t >= s }
}
