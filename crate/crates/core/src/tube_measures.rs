//! Measures made of one weighted δ×1 rectangle per tube, and the pipeline
//! that builds them from a set's segment family: Frostman measure on the
//! projection, discretization to tubes, then one rectangle per tube.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frostman::{frostman_build_1d, growth_ratio, CompactGridSet1D, StepMeasure1D};
use crate::geometry::{projection_interval, rect_intersection_area, Direction, Point, RectSpec, TubeId};
use crate::maximal::tube_profile_with;
use crate::testsets::{RasterSet, SetRecipe};

/// Tolerance on mass and growth checks.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Factor applied when discretizing a Frostman measure to tubes.
pub const DISCRETIZATION_FACTOR: f64 = 0.1;

/// Cells of the Frostman construction per tube.
pub const FROSTMAN_REFINEMENT: u32 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct TubeRectMeasure {
    direction: Direction,
    delta: f64,
    s: f64,
    /// tube index -> (offset, weight)
    entries: BTreeMap<i64, (f64, f64)>,
}

impl TubeRectMeasure {
    /// Builds and validates a measure from `(tube index, offset, weight)`
    /// triples. Zero weights are dropped.
    pub fn new(
        direction: Direction,
        delta: f64,
        s: f64,
        entries: impl IntoIterator<Item = (i64, f64, f64)>,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidMeasure(format!("delta must be positive, got {delta}")));
        }
        let mut map = BTreeMap::new();
        for (j, offset, weight) in entries {
            if !(weight.is_finite() && weight >= 0.0 && offset.is_finite()) {
                return Err(Error::InvalidMeasure(format!("tube {j}: bad weight {weight} or offset {offset}")));
            }
            if weight == 0.0 {
                continue;
            }
            if map.insert(j, (offset, weight)).is_some() {
                return Err(Error::InvalidMeasure(format!("tube {j} holds more than one rectangle")));
            }
        }
        let mu = TubeRectMeasure { direction, delta, s, entries: map };
        mu.validate()?;
        Ok(mu)
    }

    pub fn empty(direction: Direction, delta: f64, s: f64) -> Self {
        TubeRectMeasure { direction, delta, s, entries: BTreeMap::new() }
    }

    /// Checks the mass cap and the growth condition on grid intervals.
    pub fn validate(&self) -> Result<()> {
        let mass = self.mass();
        if mass > 1.0 + VALIDATION_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {mass} exceeds 1")));
        }
        let ratio = growth_ratio(&pushforward(self), self.s);
        if ratio > 1.0 + VALIDATION_TOL {
            return Err(Error::InvalidMeasure(format!("growth ratio {ratio} exceeds 1 at exponent {}", self.s)));
        }
        Ok(())
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(tube index, offset, weight)` in tube order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.entries.iter().map(|(&j, &(o, w))| (j, o, w))
    }

    pub fn rects(&self) -> impl Iterator<Item = (RectSpec, f64)> + '_ {
        self.entries().map(|(j, o, w)| (self.rect(j, o), w))
    }

    fn rect(&self, j: i64, offset: f64) -> RectSpec {
        RectSpec::new(TubeId { direction: self.direction, delta: self.delta, index: j }, offset)
    }

    /// `‖μ‖₁ = δ Σ a_T`.
    pub fn mass(&self) -> f64 {
        self.delta * self.entries.values().map(|e| e.1).sum::<f64>()
    }

    pub fn growth_ratio(&self) -> f64 {
        growth_ratio(&pushforward(self), self.s)
    }
}

/// Projection of the measure onto the direction: tube `j` puts `δ a_j` on
/// cell `j`.
pub fn pushforward(mu: &TubeRectMeasure) -> StepMeasure1D {
    let (Some((&lo, _)), Some((&hi, _))) = (mu.entries.first_key_value(), mu.entries.last_key_value()) else {
        return StepMeasure1D::zero(mu.delta);
    };
    let mut weights = vec![0.0; (hi - lo + 1) as usize];
    for (j, _, w) in mu.entries() {
        weights[(j - lo) as usize] = mu.delta * w;
    }
    StepMeasure1D::new(mu.delta, lo, weights).expect("weights are validated")
}

/// Re-bins a measure onto cells of width `delta` by exact overlap and
/// scales it by [`DISCRETIZATION_FACTOR`].
pub fn discretize_frostman(nu_tilde: &StepMeasure1D, delta: f64) -> Result<StepMeasure1D> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("cell width must be positive, got {delta}")));
    }
    let trimmed = nu_tilde.trimmed();
    if trimmed.weights().is_empty() {
        return Ok(StepMeasure1D::zero(delta));
    }
    let w = trimmed.delta();
    let lo = ((trimmed.lo() as f64 * w) / delta + 1e-9).floor() as i64;
    let hi = ((trimmed.hi() as f64 * w) / delta - 1e-9).ceil() as i64;
    let weights =
        (lo..hi).map(|j| DISCRETIZATION_FACTOR * trimmed.measure(j as f64 * delta, (j + 1) as f64 * delta)).collect();
    Ok(StepMeasure1D::new(delta, lo, weights)?.trimmed())
}

/// Cells a rectangle's long sides may cross without counting as leaving
/// `K(δ)`. Raster neighbourhoods are exact only up to a cell diagonal.
pub const LIFT_INSET_CELLS: f64 = 2.0;

/// One rectangle per occupied tube, each inside `K(δ)`, with weight
/// `ν(cell)/δ`. Picks the smallest admissible offset.
///
/// A rectangle is inside the raster set when every cell meeting it is fully
/// covered. Tubes with no such offset fall back to the core, the rectangle
/// with both long sides moved inwards by [`LIFT_INSET_CELLS`] cells. The
/// rectangle (or core) must also lie in the raster.
pub fn lift_to_rectangles(nu: &StepMeasure1D, k_delta: &RasterSet, e: Direction, s: f64) -> Result<TubeRectMeasure> {
    let delta = nu.delta();
    let g = &k_delta.grid;
    g.check_resolution(delta)?;
    let (lo, hi) = (g.origin, g.max_corner());
    let inside = |p: Point| p.x >= lo.x - 1e-12 && p.y >= lo.y - 1e-12 && p.x <= hi.x + 1e-12 && p.y <= hi.y + 1e-12;
    let span = e.normal().x.abs() + e.normal().y.abs();
    let lattice_bins = (g.side * span / g.h()).ceil() as usize + 3;
    let smallest_offset = |tube: &TubeId, inset: f64| {
        let mut deficit = tube_profile_with(k_delta, tube, inset, |c| 1.0 - c);
        if deficit.bins.len() < lattice_bins {
            deficit.bins.resize(lattice_bins, 0.0);
        }
        let slab = tube.slab();
        let fits = |offset: f64| {
            let (a, b) = (slab.lo + inset, slab.hi - inset);
            let (u, n) = (e.unit(), e.normal());
            [(a, offset), (a, offset + 1.0), (b, offset), (b, offset + 1.0)]
                .iter()
                .all(|&(p, q)| inside(Point::new(p * u.x + q * n.x, p * u.y + q * n.y)))
        };
        // cells straddling a short side have their centre within one bin
        // of the window, so the window is widened by a bin at each end
        let mut prefix = vec![0.0];
        for b in &deficit.bins {
            prefix.push(prefix.last().unwrap() + b);
        }
        let len = deficit.window();
        let tol = 1e-9 * delta;
        (1..deficit.bins.len().saturating_sub(len))
            .find(|&k| prefix[k + len + 1] - prefix[k - 1] <= tol && fits(deficit.offset(k)))
            .map(|k| deficit.offset(k))
    };
    let support: Vec<(i64, f64)> = nu.support().collect();
    let placed: Vec<(i64, Option<f64>, f64)> = support
        .par_iter()
        .map(|&(j, m)| {
            let tube = TubeId { direction: e, delta, index: j };
            let offset =
                smallest_offset(&tube, 0.0).or_else(|| smallest_offset(&tube, LIFT_INSET_CELLS * g.h()));
            (j, offset, m / delta)
        })
        .collect();
    let failed: Vec<i64> = placed.iter().filter(|p| p.1.is_none()).map(|p| p.0).collect();
    if !failed.is_empty() {
        return Err(Error::LiftFailed { tubes: failed });
    }
    TubeRectMeasure::new(e, delta, s, placed.into_iter().map(|(j, o, a)| (j, o.unwrap(), a)))
}

/// `∫ μ₁ μ₂ dx`, summing exact rectangle overlaps over pairs whose
/// projections onto the first direction meet.
pub fn correlation(mu1: &TubeRectMeasure, mu2: &TubeRectMeasure) -> f64 {
    let e = mu1.direction;
    let mut others: Vec<(f64, f64, RectSpec, f64)> = mu2
        .rects()
        .map(|(r, w)| {
            let iv = projection_interval(e, &r);
            (iv.lo, iv.hi, r, w)
        })
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0));
    let width = others.iter().map(|o| o.1 - o.0).fold(0.0, f64::max);
    let rows: Vec<(RectSpec, f64)> = mu1.rects().collect();
    let partial: Vec<f64> = rows
        .par_iter()
        .map(|(r, w)| {
            let slab = projection_interval(e, r);
            let first = others.partition_point(|o| o.0 < slab.lo - width - 1e-12);
            let mut sum = 0.0;
            for (lo, hi, other, w2) in &others[first..] {
                if *lo > slab.hi {
                    break;
                }
                if *hi < slab.lo {
                    continue;
                }
                sum += w2 * rect_intersection_area(r, other);
            }
            w * sum
        })
        .collect();
    partial.iter().sum()
}

/// Builds the pipeline measure in direction `e`: the recipe's segment family
/// projects to a set on the line, which carries a Frostman measure built on
/// cells of width `δ/4`; that is discretized to tubes and lifted into `K(δ)`.
pub fn pipeline_measure(
    recipe: &SetRecipe,
    k_delta: &RasterSet,
    e: Direction,
    delta: f64,
    s: f64,
) -> Result<TubeRectMeasure> {
    let nu_tilde = pipeline_frostman(recipe, e, delta, s)?;
    let nu = discretize_frostman(&nu_tilde, delta)?;
    lift_to_rectangles(&nu, k_delta, e, s)
}

/// The Frostman measure on the projection of the segment family.
pub fn pipeline_frostman(recipe: &SetRecipe, e: Direction, delta: f64, s: f64) -> Result<StepMeasure1D> {
    let family = recipe.segment_family(e).ok_or_else(|| {
        Error::InvalidParameter(format!("recipe has no segment family in direction {:.6}", e.angle()))
    })?;
    let fine = delta / FROSTMAN_REFINEMENT as f64;
    let set = CompactGridSet1D::from_intervals(fine, &family.projections);
    frostman_build_1d(&set, s)
}
