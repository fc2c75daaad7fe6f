//! The multi-line maximal operator `M^δ f(e)`.
//!
//! `∫ f dμ = Σ a_T ∫_{R_T} f`, and the constraints on a measure couple only
//! the weights, never the rectangle positions. So the supremum splits into a
//! best rectangle per tube followed by a linear program over the weights.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{cell_slab_area, Direction, Interval, Point, RectSpec, TubeId};
use crate::lp;
use crate::testsets::RasterSet;
use crate::tube_measures::TubeRectMeasure;

/// Up to this many weighted tubes every interval constraint is posed at once;
/// beyond it constraints are added by separation.
const FULL_CONSTRAINTS: usize = 40;

/// Mass of `f` across a tube, binned by the normal coordinate of raster
/// cell centres. Bin `k` covers `[start + k·h, start + (k+1)·h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TubeProfile {
    pub start: f64,
    pub bin: f64,
    pub bins: Vec<f64>,
}

impl TubeProfile {
    /// Number of bins in a rectangle of unit length.
    pub fn window(&self) -> usize {
        (1.0 / self.bin).round().max(1.0) as usize
    }

    /// Rectangle integrals for every offset `start + k·h`, clamped at `δ`
    /// (the rectangle's area, which a `[0,1]`-valued `f` cannot exceed).
    pub fn window_sums(&self, delta: f64) -> Vec<f64> {
        let len = self.window();
        let mut prefix = Vec::with_capacity(self.bins.len() + 1);
        prefix.push(0.0);
        for b in &self.bins {
            prefix.push(prefix.last().unwrap() + b);
        }
        let count = self.bins.len().saturating_sub(len) + 1;
        (0..count)
            .map(|k| {
                let end = (k + len).min(self.bins.len());
                (prefix[end] - prefix[k]).clamp(0.0, delta)
            })
            .collect()
    }

    pub fn offset(&self, k: usize) -> f64 {
        self.start + k as f64 * self.bin
    }

    /// Window index of a rectangle offset on this profile's lattice.
    pub fn index_of(&self, offset: f64) -> Option<usize> {
        let k = ((offset - self.start) / self.bin).round();
        (k >= 0.0).then_some(k as usize)
    }
}

/// Normal-coordinate lattice shared by all tubes of a direction.
fn lattice_start(f: &RasterSet, e: Direction) -> f64 {
    let g = &f.grid;
    let n = e.normal();
    let (a, b) = (g.origin, g.max_corner());
    let lo = [a, b, Point::new(a.x, b.y), Point::new(b.x, a.y)]
        .iter()
        .map(|p| p.dot(n))
        .fold(f64::INFINITY, f64::min);
    let h = g.h();
    (lo / h).floor() * h - h
}

/// Bins `f` restricted to the tube's slab. Cells are split between tubes by
/// their exact overlap with the slab.
pub fn tube_profile(f: &RasterSet, tube: &TubeId) -> TubeProfile {
    tube_profile_inset(f, tube, 0.0)
}

/// As [`tube_profile`], on the slab narrowed by `inset` on both sides.
pub fn tube_profile_inset(f: &RasterSet, tube: &TubeId, inset: f64) -> TubeProfile {
    tube_profile_with(f, tube, inset, |c| c)
}

/// Bins `weight(coverage)` over the narrowed slab, for every raster cell.
pub fn tube_profile_with(f: &RasterSet, tube: &TubeId, inset: f64, weight: impl Fn(f64) -> f64) -> TubeProfile {
    let g = &f.grid;
    let h = g.h();
    let n = g.cells_per_side;
    let e = tube.direction;
    let u = e.unit();
    let nrm = e.normal();
    let full = tube.slab();
    let slab = Interval::new(full.lo + inset, full.hi - inset);
    let reach = 0.5 * h * (u.x.abs() + u.y.abs());
    let start = lattice_start(f, e);
    let mut bins: Vec<f64> = Vec::new();
    for iy in 0..n {
        let cy = g.origin.y + (iy as f64 + 0.5) * h;
        let (ix0, ix1) = if u.x.abs() > 1e-12 {
            let a = (slab.lo - reach - cy * u.y) / u.x;
            let b = (slab.hi + reach - cy * u.y) / u.x;
            let (a, b) = (a.min(b), a.max(b));
            let i0 = ((a - g.origin.x) / h - 0.5).floor().max(0.0);
            let i1 = ((b - g.origin.x) / h + 0.5).ceil().min(n as f64);
            if i1 <= i0 {
                continue;
            }
            (i0 as usize, i1 as usize)
        } else {
            let p = cy * u.y;
            if p + reach <= slab.lo || p - reach >= slab.hi {
                continue;
            }
            (0, n)
        };
        let row = &f.coverage[iy * n..(iy + 1) * n];
        for ix in ix0..ix1 {
            let w = weight(row[ix]);
            if w == 0.0 {
                continue;
            }
            let c = g.cell_center(ix, iy);
            let area = cell_slab_area(h, e, c.dot(u), slab.lo, slab.hi);
            if area <= 0.0 {
                continue;
            }
            let k = ((c.dot(nrm) - start) / h).floor().max(0.0) as usize;
            if bins.len() <= k {
                bins.resize(k + 1, 0.0);
            }
            bins[k] += w * area;
        }
    }
    TubeProfile { start, bin: h, bins }
}

/// Best rectangle in a tube: the smallest lattice offset whose window
/// integral is maximal, and that integral. Empty tubes give `(0, 0)`.
pub fn tube_best_rect(f: &RasterSet, tube: &TubeId) -> Result<(f64, f64)> {
    f.grid.check_resolution(tube.delta)?;
    Ok(best_window(&tube_profile(f, tube), tube.delta))
}

fn best_window(profile: &TubeProfile, delta: f64) -> (f64, f64) {
    if profile.bins.is_empty() {
        return (0.0, 0.0);
    }
    let sums = profile.window_sums(delta);
    let max = sums.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return (0.0, 0.0);
    }
    // ties within rounding go to the smallest offset
    let k = sums.iter().position(|&v| v >= max - 1e-12 * delta).unwrap();
    (profile.offset(k), sums[k])
}

/// `∫ f dμ`, with each rectangle integral evaluated by the same binned
/// quadrature the rectangle search uses.
pub fn measure_integral(mu: &TubeRectMeasure, f: &RasterSet) -> f64 {
    mu.rects()
        .map(|(rect, weight)| {
            let profile = tube_profile(f, &rect.tube);
            let v = profile
                .index_of(rect.offset)
                .and_then(|k| profile.window_sums(rect.delta()).get(k).copied())
                .unwrap_or(0.0);
            weight * v
        })
        .sum()
}

/// The weight LP: maximize `Σ a_j v_j` subject to `δ Σ_{j∈I} a_j <=
/// min(1, (|I|δ)^s)` for every interval `I` of tubes.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProgram {
    pub delta: f64,
    pub s: f64,
    /// Index of the first tube.
    pub first: i64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSolution {
    /// `a_j`, aligned with the program's values.
    pub weights: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub duality_gap: f64,
    /// Length of the longest interval constraint with a positive dual.
    pub binding_length: f64,
}

impl WeightProgram {
    /// Cap on `δ Σ a_j` over an interval of `cells` tubes.
    pub fn cap(&self, cells: i64) -> f64 {
        (cells as f64 * self.delta).powf(self.s).min(1.0)
    }

    fn positive(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] > 0.0).collect()
    }
}

/// Solves the weight LP by the dense simplex. Large programs start from
/// singleton, dyadic and full-range constraints and add violated intervals
/// until none remain, so the result is optimal for the full constraint set.
pub fn solve_weights(p: &WeightProgram) -> WeightSolution {
    let pos = p.positive();
    let np = pos.len();
    let mut weights = vec![0.0; p.values.len()];
    if np == 0 {
        return WeightSolution { weights, objective: 0.0, iterations: 0, duality_gap: 0.0, binding_length: 0.0 };
    }
    let c: Vec<f64> = pos.iter().map(|&i| p.values[i] / p.delta).collect();
    let cap = |a: usize, b: usize| p.cap(pos[b] as i64 - pos[a] as i64 + 1);
    let mut active: Vec<(usize, usize)> = if np <= FULL_CONSTRAINTS {
        (0..np).flat_map(|a| (a..np).map(move |b| (a, b))).collect()
    } else {
        let mut v: Vec<(usize, usize)> = Vec::new();
        let mut len = 1;
        while len < np {
            for a in (0..np).step_by(len) {
                v.push((a, (a + len - 1).min(np - 1)));
            }
            len *= 2;
        }
        v.push((0, np - 1));
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut iterations = 0;
    loop {
        let a: Vec<Vec<f64>> =
            active.iter().map(|&(lo, hi)| (0..np).map(|k| if (lo..=hi).contains(&k) { 1.0 } else { 0.0 }).collect()).collect();
        let b: Vec<f64> = active.iter().map(|&(lo, hi)| cap(lo, hi)).collect();
        let sol = lp::maximize(&c, &a, &b);
        iterations += sol.iterations;
        let mut prefix = vec![0.0; np + 1];
        for k in 0..np {
            prefix[k + 1] = prefix[k] + sol.x[k];
        }
        let mut violated: Vec<(f64, usize, usize)> = Vec::new();
        for lo in 0..np {
            for hi in lo..np {
                let excess = prefix[hi + 1] - prefix[lo] - cap(lo, hi);
                if excess > 1e-12 {
                    violated.push((excess, lo, hi));
                }
            }
        }
        if violated.is_empty() {
            let gap = sol.duality_gap(&b);
            let binding_length = active
                .iter()
                .zip(&sol.duals)
                .filter(|(_, y)| **y > 1e-12)
                .map(|(&(lo, hi), _)| (pos[hi] - pos[lo] + 1) as f64 * p.delta)
                .fold(0.0, f64::max);
            for (k, &i) in pos.iter().enumerate() {
                weights[i] = sol.x[k] / p.delta;
            }
            return WeightSolution { weights, objective: sol.objective, iterations, duality_gap: gap, binding_length };
        }
        violated.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        active.extend(violated.into_iter().take(np).map(|(_, lo, hi)| (lo, hi)));
        active.sort_unstable();
        active.dedup();
    }
}

/// Water-filling: tubes in decreasing order of value each take the largest
/// weight the constraints still allow.
pub fn greedy_weights(p: &WeightProgram) -> Vec<f64> {
    let n = p.values.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| p.values[i] > 0.0).collect();
    order.sort_by(|&a, &b| p.values[b].total_cmp(&p.values[a]).then(a.cmp(&b)));
    let mut mass = vec![0.0; n];
    for &k in &order {
        let mut room = f64::INFINITY;
        for lo in 0..=k {
            let before: f64 = mass[lo..k].iter().sum();
            let mut inside = before;
            for hi in k..n {
                if hi > k {
                    inside += mass[hi];
                }
                room = room.min(p.cap((hi - lo + 1) as i64) - inside);
            }
        }
        mass[k] = room.max(0.0);
    }
    mass.into_iter().map(|m| m / p.delta).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximalResult {
    pub angle: f64,
    pub delta: f64,
    pub s: f64,
    pub value: f64,
    /// `δ Σ a_T` of the optimal measure.
    pub mass: f64,
    pub binding_length: f64,
    pub iterations: usize,
    pub duality_gap: f64,
    #[serde(skip)]
    pub measure: TubeRectMeasure,
}

/// Range of tube indices meeting the raster.
pub fn tube_range(f: &RasterSet, e: Direction, delta: f64) -> (i64, i64) {
    let g = &f.grid;
    let u = e.unit();
    let (a, b) = (g.origin, g.max_corner());
    let corners = [a.x * u.x + a.y * u.y, b.x * u.x + a.y * u.y, a.x * u.x + b.y * u.y, b.x * u.x + b.y * u.y];
    let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ((lo / delta).floor() as i64, (hi / delta).ceil() as i64)
}

/// `M^δ f(e)` together with a measure attaining it.
pub fn maximal_value(f: &RasterSet, e: Direction, delta: f64, s: f64) -> Result<MaximalResult> {
    f.grid.check_resolution(delta)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(crate::Error::InvalidParameter(format!("exponent s must lie in (0, 1], got {s}")));
    }
    let (j0, j1) = tube_range(f, e, delta);
    let best: Vec<(f64, f64)> =
        (j0..j1).map(|j| best_window(&tube_profile(f, &TubeId { direction: e, delta, index: j }), delta)).collect();
    let program = WeightProgram { delta, s, first: j0, values: best.iter().map(|b| b.1).collect() };
    let sol = solve_weights(&program);
    let entries = sol
        .weights
        .iter()
        .zip(&best)
        .enumerate()
        .filter(|(_, (w, _))| **w > 0.0)
        .map(|(i, (w, b))| (j0 + i as i64, b.0, *w));
    let measure = TubeRectMeasure::new(e, delta, s, entries)?;
    let value = sol.weights.iter().zip(&best).map(|(w, b)| w * b.1).sum();
    Ok(MaximalResult {
        angle: e.angle(),
        delta,
        s,
        value,
        mass: measure.mass(),
        binding_length: sol.binding_length,
        iterations: sol.iterations,
        duality_gap: sol.duality_gap,
        measure,
    })
}

/// Directions `kπ/n`, `k = 0..n`.
pub fn sweep_directions(n_dirs: usize) -> Vec<Direction> {
    (0..n_dirs).map(|k| Direction::from_angle(k as f64 * PI / n_dirs as f64)).collect()
}

/// `maximal_value` on `n_dirs` equispaced directions, in angle order.
pub fn direction_sweep(f: &RasterSet, delta: f64, s: f64, n_dirs: usize) -> Result<Vec<MaximalResult>> {
    if n_dirs < 2 {
        return Err(crate::Error::InvalidParameter(format!("need at least 2 directions, got {n_dirs}")));
    }
    sweep_directions(n_dirs).into_par_iter().map(|e| maximal_value(f, e, delta, s)).collect()
}

/// The rectangle a result assigns to tube `j`, if any.
pub fn chosen_rect(result: &MaximalResult, j: i64) -> Option<RectSpec> {
    result.measure.rects().find(|(r, _)| r.tube.index == j).map(|(r, _)| r)
}
