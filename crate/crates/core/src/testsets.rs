//! Raster test sets and δ-neighbourhoods.
//!
//! Sets are described by a [`SetRecipe`] and rasterized into coverage
//! fractions. Coverage is exact along `x` and sampled on [`SUBROWS`] lines per
//! cell along `y`, which keeps unions of overlapping shapes exact at the
//! sample lines.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Direction, GridSpec, Interval, Point};

/// Sample lines per cell row.
pub const SUBROWS: usize = 8;

/// Pivot for all rotations: the centre of the unit square.
pub const PIVOT: Point = Point::new(0.5, 0.5);

#[derive(Clone, Debug, PartialEq)]
pub struct RasterSet {
    pub grid: GridSpec,
    pub coverage: Vec<f64>,
}

impl RasterSet {
    pub fn empty(grid: GridSpec) -> Self {
        RasterSet { grid, coverage: vec![0.0; grid.cell_count()] }
    }

    pub fn from_coverage(grid: GridSpec, coverage: Vec<f64>) -> Result<Self> {
        if coverage.len() != grid.cell_count() {
            return Err(Error::InvalidParameter(format!(
                "coverage has {} cells, grid needs {}",
                coverage.len(),
                grid.cell_count()
            )));
        }
        if coverage.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParameter("coverage values must lie in [0, 1]".into()));
        }
        Ok(RasterSet { grid, coverage })
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.coverage[self.grid.index(ix, iy)]
    }

    pub fn area(&self) -> f64 {
        self.grid.cell_area() * self.coverage.iter().sum::<f64>()
    }

    /// Cells with coverage `>= level` set to one, the rest to zero.
    pub fn thresholded(&self, level: f64) -> RasterSet {
        RasterSet {
            grid: self.grid,
            coverage: self.coverage.iter().map(|&c| if c >= level { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coverage.iter().all(|&c| c == 0.0)
    }

    /// Pointwise `self <= other`.
    pub fn is_subset_of(&self, other: &RasterSet) -> bool {
        self.grid == other.grid && self.coverage.iter().zip(&other.coverage).all(|(a, b)| a <= b)
    }
}

/// A convex shape that can report its horizontal span at height `y`.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Convex polygon, vertices in order.
    Polygon(Vec<Point>),
    Disc { center: Point, radius: f64 },
}

impl Shape {
    fn y_range(&self) -> (f64, f64) {
        match self {
            Shape::Polygon(p) => p.iter().fold((f64::MAX, f64::MIN), |m, q| (m.0.min(q.y), m.1.max(q.y))),
            Shape::Disc { center, radius } => (center.y - radius, center.y + radius),
        }
    }

    fn row_span(&self, y: f64) -> Option<(f64, f64)> {
        match self {
            Shape::Polygon(p) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..p.len() {
                    let a = p[i];
                    let b = p[(i + 1) % p.len()];
                    if (a.y <= y && y <= b.y) || (b.y <= y && y <= a.y) {
                        let x = if a.y == b.y { a.x.min(b.x) } else { a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x) };
                        let x2 = if a.y == b.y { a.x.max(b.x) } else { x };
                        lo = lo.min(x);
                        hi = hi.max(x2);
                    }
                }
                (lo < hi).then_some((lo, hi))
            }
            Shape::Disc { center, radius } => {
                let d = y - center.y;
                let w2 = radius * radius - d * d;
                (w2 > 0.0).then(|| (center.x - w2.sqrt(), center.x + w2.sqrt()))
            }
        }
    }

    fn rotated(&self, angle: f64) -> Shape {
        match self {
            Shape::Polygon(p) => Shape::Polygon(p.iter().map(|q| q.rotate_about(PIVOT, angle)).collect()),
            Shape::Disc { center, radius } => Shape::Disc { center: center.rotate_about(PIVOT, angle), radius: *radius },
        }
    }

    /// Length of the chord `{x ∈ shape : x·e = p}`.
    fn chord_length(&self, e: Direction, p: f64) -> f64 {
        match self {
            Shape::Disc { center, radius } => {
                let d = p - center.dot(e.unit());
                let w2 = radius * radius - d * d;
                if w2 > 0.0 {
                    2.0 * w2.sqrt()
                } else {
                    0.0
                }
            }
            Shape::Polygon(poly) => {
                let u = e.unit();
                let n = e.normal();
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..poly.len() {
                    let a = poly[i];
                    let b = poly[(i + 1) % poly.len()];
                    let (pa, pb) = (a.dot(u), b.dot(u));
                    if (pa <= p && p <= pb) || (pb <= p && p <= pa) {
                        let pts = if pa == pb {
                            vec![a.dot(n), b.dot(n)]
                        } else {
                            let q = a + (b - a) * ((p - pa) / (pb - pa));
                            vec![q.dot(n)]
                        };
                        for v in pts {
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                    }
                }
                (hi - lo).max(0.0)
            }
        }
    }

    fn projection(&self, e: Direction) -> Interval {
        match self {
            Shape::Disc { center, radius } => {
                let c = center.dot(e.unit());
                Interval::new(c - radius, c + radius)
            }
            Shape::Polygon(p) => {
                let u = e.unit();
                p.iter().fold(Interval::new(f64::MAX, f64::MIN), |iv, q| Interval::new(iv.lo.min(q.dot(u)), iv.hi.max(q.dot(u))))
            }
        }
    }

    /// `{p : chord_length(e, p) >= 1}`; an interval since the chord length
    /// of a convex body is concave in `p`.
    fn unit_chord_projection(&self, e: Direction) -> Option<Interval> {
        let span = self.projection(e);
        let samples = 4096;
        let step = span.len() / samples as f64;
        let ok = |p: f64| self.chord_length(e, p) >= 1.0 - 1e-12;
        let first = (0..=samples).map(|i| span.lo + i as f64 * step).find(|&p| ok(p))?;
        let last = (0..=samples).rev().map(|i| span.lo + i as f64 * step).find(|&p| ok(p))?;
        let refine = |mut inside: f64, mut outside: f64| {
            for _ in 0..60 {
                let mid = 0.5 * (inside + outside);
                if ok(mid) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        let lo = if first > span.lo { refine(first, first - step) } else { first };
        let hi = if last < span.hi { refine(last, last + step) } else { last };
        Some(Interval::new(lo, hi))
    }
}

/// Recipe for a compact test set. Angles are radians; rotations are about
/// the centre of the unit square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetRecipe {
    /// `[0, side]²`.
    Square { side: f64 },
    /// Disc centred at `(0.5, 0.5)`.
    Disc { radius: f64 },
    /// `C_depth × [0, 1]` rotated so the segments are perpendicular to the
    /// direction `angle`; `C_depth` keeps the outer intervals of ratio `ratio`
    /// at every stage, so its dimension is `log 2 / log(1/ratio)`.
    CantorProduct { ratio: f64, depth: u32, angle: f64 },
    UnionRotations { base: Box<SetRecipe>, angles: Vec<f64> },
    /// Single-sector Perron tree over `2^depth` triangles.
    PerronTree { depth: u32 },
    /// A raster stored on disk as PGM + JSON sidecar.
    Custom { path: PathBuf },
}

/// Segments perpendicular to a direction, described by their projections.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentFamily {
    pub direction: Direction,
    /// Union of these intervals is `ρ_e(L^e)`.
    pub projections: Vec<Interval>,
}

impl SetRecipe {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            SetRecipe::Square { side } if !(*side > 0.0) => bad(format!("square side must be positive, got {side}")),
            SetRecipe::Disc { radius } if !(*radius > 0.0) => bad(format!("disc radius must be positive, got {radius}")),
            SetRecipe::CantorProduct { ratio, depth, .. } => {
                if !(*ratio > 0.0 && *ratio < 0.5) {
                    bad(format!("cantor ratio must lie in (0, 1/2), got {ratio}"))
                } else if *depth > 12 {
                    bad(format!("depth must be at most 12, got {depth}"))
                } else {
                    Ok(())
                }
            }
            SetRecipe::PerronTree { depth } if *depth > 12 => bad(format!("depth must be at most 12, got {depth}")),
            SetRecipe::UnionRotations { base, angles } => {
                if angles.is_empty() {
                    bad("union of rotations needs at least one angle".into())
                } else {
                    base.validate()
                }
            }
            _ => Ok(()),
        }
    }

    /// Smallest geometric feature the raster must resolve.
    pub fn min_feature(&self) -> Option<f64> {
        match self {
            SetRecipe::Square { side } => Some(*side),
            SetRecipe::Disc { radius } => Some(*radius),
            SetRecipe::CantorProduct { ratio, depth, .. } => {
                let piece = ratio.powi(*depth as i32);
                let gap = if *depth == 0 { 1.0 } else { (1.0 - 2.0 * ratio) * ratio.powi(*depth as i32 - 1) };
                Some(piece.min(gap))
            }
            SetRecipe::UnionRotations { base, .. } => base.min_feature(),
            SetRecipe::PerronTree { depth } => Some(2f64.powi(-(*depth as i32))),
            SetRecipe::Custom { .. } => None,
        }
    }

    /// Convex pieces whose union is the set.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        self.validate()?;
        Ok(match self {
            SetRecipe::Square { side } => vec![Shape::Polygon(vec![
                Point::new(0.0, 0.0),
                Point::new(*side, 0.0),
                Point::new(*side, *side),
                Point::new(0.0, *side),
            ])],
            SetRecipe::Disc { radius } => vec![Shape::Disc { center: PIVOT, radius: *radius }],
            SetRecipe::CantorProduct { ratio, depth, angle } => cantor_intervals(*ratio, *depth)
                .into_iter()
                .map(|iv| {
                    Shape::Polygon(vec![
                        Point::new(iv.lo, 0.0),
                        Point::new(iv.hi, 0.0),
                        Point::new(iv.hi, 1.0),
                        Point::new(iv.lo, 1.0),
                    ])
                    .rotated(*angle)
                })
                .collect(),
            SetRecipe::UnionRotations { base, angles } => {
                let pieces = base.shapes()?;
                angles.iter().flat_map(|a| pieces.iter().map(move |p| p.rotated(*a))).collect()
            }
            SetRecipe::PerronTree { depth } => perron_tree(*depth).into_iter().map(Shape::Polygon).collect(),
            SetRecipe::Custom { .. } => Vec::new(),
        })
    }

    /// Directions in which the recipe declares segment families; `None`
    /// when it has one in every direction.
    pub fn declared_directions(&self) -> Option<Vec<Direction>> {
        match self {
            SetRecipe::Square { side } if *side >= 1.0 => None,
            SetRecipe::Disc { radius } if *radius >= 0.5 => None,
            SetRecipe::CantorProduct { angle, .. } => Some(vec![Direction::from_angle(*angle)]),
            SetRecipe::UnionRotations { base, angles } => {
                let own = base.declared_directions()?;
                let mut out: Vec<Direction> = Vec::new();
                for a in angles {
                    for d in &own {
                        let r = Direction::from_angle(d.angle() + a);
                        if !out.contains(&r) {
                            out.push(r);
                        }
                    }
                }
                Some(out)
            }
            _ => Some(Vec::new()),
        }
    }

    /// The family of unit segments perpendicular to `e` contained in the
    /// set, or `None` if the recipe has no such family in direction `e`.
    pub fn segment_family(&self, e: Direction) -> Option<SegmentFamily> {
        let projections = match self {
            SetRecipe::Square { .. } | SetRecipe::Disc { .. } => {
                let shape = self.shapes().ok()?.pop()?;
                vec![shape.unit_chord_projection(e)?]
            }
            SetRecipe::CantorProduct { ratio, depth, angle } => {
                let own = Direction::from_angle(*angle);
                if own != e {
                    return None;
                }
                // projection of a + (pivot·e - 0.5); an e of opposite sign
                // (angle wrapped by π) reverses the coordinate
                let unit = Direction::from_angle(*angle).unit();
                let raw = Point::new(angle.cos(), angle.sin());
                let sign = if raw.dot(unit) > 0.0 { 1.0 } else { -1.0 };
                let shift = PIVOT.dot(raw) - 0.5;
                cantor_intervals(*ratio, *depth)
                    .into_iter()
                    .map(|iv| {
                        let (a, b) = (sign * (iv.lo + shift), sign * (iv.hi + shift));
                        Interval::new(a.min(b), a.max(b))
                    })
                    .collect()
            }
            SetRecipe::UnionRotations { base, angles } => {
                let mut all = Vec::new();
                for a in angles {
                    // x ↦ R_a(x) maps the base family in direction e - a to
                    // ours, and (R_a x)·e = c·e + σ (x - c)·e' with c the pivot
                    let back = Direction::from_angle(e.angle() - a);
                    let Some(f) = base.segment_family(back) else { continue };
                    let turned = e.unit().rotate_about(Point::new(0.0, 0.0), -a);
                    let sign = if turned.dot(back.unit()) > 0.0 { 1.0 } else { -1.0 };
                    let (ce, cb) = (PIVOT.dot(e.unit()), PIVOT.dot(back.unit()));
                    for iv in f.projections {
                        let (x, y) = (ce + sign * (iv.lo - cb), ce + sign * (iv.hi - cb));
                        all.push(Interval::new(x.min(y), x.max(y)));
                    }
                }
                if all.is_empty() {
                    return None;
                }
                all
            }
            SetRecipe::PerronTree { .. } | SetRecipe::Custom { .. } => return None,
        };
        Some(SegmentFamily { direction: e, projections })
    }
}

/// Stage-`depth` intervals of the Cantor set keeping the outer `ratio`
/// fraction at each step.
pub fn cantor_intervals(ratio: f64, depth: u32) -> Vec<Interval> {
    let mut out = vec![Interval::new(0.0, 1.0)];
    for _ in 0..depth {
        out = out
            .iter()
            .flat_map(|iv| {
                let w = iv.len() * ratio;
                [Interval::new(iv.lo, iv.lo + w), Interval::new(iv.hi - w, iv.hi)]
            })
            .collect();
    }
    out
}

/// Overlap parameter of the Perron tree at a given depth. Chosen to minimize
/// the union area of the single-sector tree over depths 1..8.
pub fn perron_alpha(depth: u32) -> f64 {
    1.0 - 0.46 / ((depth + 1) as f64).sqrt()
}

/// Triangles of the single-sector Perron tree.
///
/// Starts from the triangle with base `[0,1]×{0}` and apex `(0,1)`, which
/// holds a unit segment in every direction of a 45° sector. The base is cut
/// into `2^depth` pieces; adjacent groups are then paired level by level, the
/// right group sliding left so the two hearts first touch and then overlap up
/// to a fraction `α` of their height. The result is recentred on the pivot.
pub fn perron_tree(depth: u32) -> Vec<Vec<Point>> {
    let n = 1usize << depth;
    let b = 1.0 / n as f64;
    let alpha = perron_alpha(depth);
    let mut shift = vec![0.0; n];
    // (members, heart left end, heart base length)
    let mut groups: Vec<(Vec<usize>, f64, f64)> = (0..n).map(|i| (vec![i], i as f64 * b, b)).collect();
    while groups.len() > 1 {
        let mut next = Vec::with_capacity(groups.len() / 2);
        for pair in groups.chunks(2) {
            let (left, right) = (&pair[0], &pair[1]);
            let gap = right.1 - (left.1 + left.2);
            let d = gap + 2.0 * (1.0 - alpha) * left.2;
            for &i in &right.0 {
                shift[i] -= d;
            }
            let members = left.0.iter().chain(&right.0).copied().collect();
            next.push((members, left.1, 2.0 * alpha * left.2));
        }
        groups = next;
    }
    let tris: Vec<Vec<Point>> = (0..n)
        .map(|i| {
            let s = shift[i];
            vec![Point::new(i as f64 * b + s, 0.0), Point::new((i + 1) as f64 * b + s, 0.0), Point::new(s, 1.0)]
        })
        .collect();
    let (xlo, xhi) = tris.iter().flatten().fold((f64::MAX, f64::MIN), |m, p| (m.0.min(p.x), m.1.max(p.x)));
    let dx = 0.5 - 0.5 * (xlo + xhi);
    tris.into_iter().map(|t| t.into_iter().map(|p| Point::new(p.x + dx, p.y)).collect()).collect()
}

/// Coverage raster of a union of convex shapes.
pub fn rasterize_shapes(shapes: &[Shape], g: &GridSpec) -> RasterSet {
    let n = g.cells_per_side;
    let h = g.h();
    let mut coverage = vec![0.0; g.cell_count()];
    let mut indexed: Vec<(f64, f64, &Shape)> = shapes
        .iter()
        .map(|s| {
            let (a, b) = s.y_range();
            (a, b, s)
        })
        .collect();
    indexed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let weight = 1.0 / SUBROWS as f64;
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for iy in 0..n {
        let y0 = g.origin.y + iy as f64 * h;
        for k in 0..SUBROWS {
            let y = y0 + (k as f64 + 0.5) * h / SUBROWS as f64;
            spans.clear();
            for (ylo, yhi, shape) in &indexed {
                if *ylo > y {
                    break;
                }
                if *yhi < y {
                    continue;
                }
                if let Some(sp) = shape.row_span(y) {
                    spans.push(sp);
                }
            }
            if spans.is_empty() {
                continue;
            }
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
            for &(a, b) in &spans {
                match merged.last_mut() {
                    Some(last) if a <= last.1 => last.1 = last.1.max(b),
                    _ => merged.push((a, b)),
                }
            }
            let row = &mut coverage[iy * n..(iy + 1) * n];
            for (a, b) in merged {
                let Some((ix0, ix1)) = g.cell_range(a, b, g.origin.x) else { continue };
                for (ix, cell) in row.iter_mut().enumerate().take(ix1).skip(ix0) {
                    let cx0 = g.origin.x + ix as f64 * h;
                    let overlap = (b.min(cx0 + h) - a.max(cx0)).max(0.0);
                    *cell += weight * overlap / h;
                }
            }
        }
    }
    for c in &mut coverage {
        *c = c.clamp(0.0, 1.0);
    }
    RasterSet { grid: *g, coverage }
}

/// Rasterizes a recipe. Rejects grids too coarse for its smallest feature.
pub fn generate(recipe: &SetRecipe, g: &GridSpec) -> Result<RasterSet> {
    if let SetRecipe::Custom { path } = recipe {
        let raster = crate::io::read_raster(path)?;
        return Ok(raster);
    }
    if let Some(feature) = recipe.min_feature() {
        if g.h() > feature * (1.0 + 1e-12) {
            return Err(Error::FeatureTooSmall { required: feature, actual: g.h() });
        }
    }
    Ok(rasterize_shapes(&recipe.shapes()?, g))
}

/// 1-D squared Euclidean distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let mut first_finite = f[0].is_finite();
    for q in 1..n {
        if !f[q].is_finite() {
            continue;
        }
        if !first_finite {
            v[0] = q;
            first_finite = true;
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else if s <= z[k] {
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    if !first_finite {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared distance, in cell units, from each cell centre to the nearest
/// centre of a cell with positive coverage.
pub fn squared_distance_to_support(k: &RasterSet) -> Vec<f64> {
    let n = k.grid.cells_per_side;
    let mut d: Vec<f64> = k.coverage.iter().map(|&c| if c > 0.0 { 0.0 } else { f64::INFINITY }).collect();
    let mut col = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for ix in 0..n {
        for iy in 0..n {
            col[iy] = d[iy * n + ix];
        }
        edt_1d(&col, &mut out, &mut v, &mut z);
        for iy in 0..n {
            d[iy * n + ix] = out[iy];
        }
    }
    for iy in 0..n {
        col.copy_from_slice(&d[iy * n..(iy + 1) * n]);
        edt_1d(&col, &mut out, &mut v, &mut z);
        d[iy * n..(iy + 1) * n].copy_from_slice(&out);
    }
    d
}

/// Closed δ-dilation `K(δ)`: cells whose centre lies within `δ` of the
/// centre of a cell meeting `K` are filled; other cells keep their coverage.
pub fn neighborhood(k: &RasterSet, delta: f64) -> Result<RasterSet> {
    let h = k.grid.h();
    if delta < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!("neighbourhood radius {delta} is below 2h = {}", 2.0 * h)));
    }
    let r2 = (delta / h).powi(2) * (1.0 + 1e-12);
    let d = squared_distance_to_support(k);
    let coverage = k.coverage.iter().zip(&d).map(|(&c, &dd)| if dd <= r2 { 1.0 } else { c }).collect();
    Ok(RasterSet { grid: k.grid, coverage })
}

/// Raster area of the single-sector Perron tree at each depth, optionally of
/// its δ-neighbourhood.
pub fn perron_area_trend(depths: &[u32], g: &GridSpec, delta: Option<f64>) -> Result<Vec<f64>> {
    depths
        .iter()
        .map(|&k| {
            let raster = generate(&SetRecipe::PerronTree { depth: k }, g)?;
            match delta {
                Some(d) => Ok(neighborhood(&raster, d)?.area()),
                None => Ok(raster.area()),
            }
        })
        .collect()
}
