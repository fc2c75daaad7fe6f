//! Directions, projections, δ-tubes and δ×1 rectangles.
//!
//! A direction `e` is stored as an angle in `[0, π)`; the tubes for `e` and
//! `-e` coincide, so nothing is lost. The tube with index `j` is the half-open
//! slab `{x : jδ <= x·e < (j+1)δ}` and a rectangle in that tube spans the full
//! slab width along `e` and unit length along the normal `e⊥ = (-sin, cos)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Rotates counter-clockwise by `angle` about `pivot`.
    pub fn rotate_about(self, pivot: Point, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        let d = self - pivot;
        pivot + Point::new(c * d.x - s * d.y, s * d.x + c * d.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// A line direction, identified with its angle modulo π.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(into = "f64", from = "f64")]
pub struct Direction {
    angle: f64,
}

impl Direction {
    pub fn from_angle(theta: f64) -> Self {
        let mut a = theta.rem_euclid(PI);
        // rem_euclid can round up to exactly π
        if a >= PI {
            a = 0.0;
        }
        Direction { angle: a }
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    /// Unit vector `e = (cos θ, sin θ)`.
    pub fn unit(self) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(c, s)
    }

    /// Unit normal `e⊥ = (-sin θ, cos θ)`, the long axis of tubes in this direction.
    pub fn normal(self) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(-s, c)
    }

    /// Angle between the two lines, in `[0, π/2]`.
    pub fn angle_gap(self, other: Direction) -> f64 {
        let d = (self.angle - other.angle).abs();
        d.min(PI - d)
    }

    /// `min(|e - ξ|, |e + ξ|)`, the chord distance between the lines.
    pub fn chord_distance(self, other: Direction) -> f64 {
        2.0 * (0.5 * self.angle_gap(other)).sin()
    }
}

impl PartialEq for Direction {
    fn eq(&self, other: &Self) -> bool {
        self.angle_gap(*other) < 1e-12
    }
}

impl From<f64> for Direction {
    fn from(theta: f64) -> Self {
        Direction::from_angle(theta)
    }
}

impl From<Direction> for f64 {
    fn from(d: Direction) -> f64 {
        d.angle
    }
}

/// `ρ_e(x) = x·e`.
pub fn project(e: Direction, x: Point) -> f64 {
    x.dot(e.unit())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeId {
    pub direction: Direction,
    pub delta: f64,
    pub index: i64,
}

impl TubeId {
    /// Projection range `[jδ, (j+1)δ)` of the slab.
    pub fn slab(&self) -> Interval {
        let lo = self.index as f64 * self.delta;
        Interval::new(lo, lo + self.delta)
    }

    pub fn contains(&self, x: Point) -> bool {
        let p = project(self.direction, x);
        let slab = self.slab();
        slab.lo <= p && p < slab.hi
    }
}

pub fn tube_of(e: Direction, delta: f64, x: Point) -> TubeId {
    TubeId { direction: e, delta, index: (project(e, x) / delta).floor() as i64 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// Closed-interval overlap test.
    pub fn meets(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// A closed δ×1 rectangle inside a tube. `offset` is the normal coordinate
/// `x·e⊥` of the near short edge; the rectangle spans `[offset, offset + 1]`
/// along `e⊥`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectSpec {
    pub tube: TubeId,
    pub offset: f64,
}

/// A half-plane `{x : x·normal <= bound}`.
#[derive(Clone, Copy, Debug)]
struct HalfPlane {
    normal: Point,
    bound: f64,
}

impl RectSpec {
    pub fn new(tube: TubeId, offset: f64) -> Self {
        RectSpec { tube, offset }
    }

    pub fn direction(&self) -> Direction {
        self.tube.direction
    }

    pub fn delta(&self) -> f64 {
        self.tube.delta
    }

    pub fn area(&self) -> f64 {
        self.tube.delta
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Point; 4] {
        let e = self.tube.direction.unit();
        let n = self.tube.direction.normal();
        let slab = self.tube.slab();
        let (a, b) = (self.offset, self.offset + 1.0);
        [e * slab.lo + n * a, e * slab.hi + n * a, e * slab.hi + n * b, e * slab.lo + n * b]
    }

    fn half_planes(&self) -> [HalfPlane; 4] {
        let e = self.tube.direction.unit();
        let n = self.tube.direction.normal();
        let slab = self.tube.slab();
        [
            HalfPlane { normal: e, bound: slab.hi },
            HalfPlane { normal: e * -1.0, bound: -slab.lo },
            HalfPlane { normal: n, bound: self.offset + 1.0 },
            HalfPlane { normal: n * -1.0, bound: -self.offset },
        ]
    }

    /// Clips a convex polygon to this rectangle.
    pub fn clip(&self, poly: &[Point]) -> Vec<Point> {
        let mut out = poly.to_vec();
        let mut scratch = Vec::with_capacity(poly.len() + 4);
        for hp in self.half_planes() {
            clip_half_plane(&out, hp, &mut scratch);
            std::mem::swap(&mut out, &mut scratch);
            if out.is_empty() {
                break;
            }
        }
        out
    }
}

fn clip_half_plane(poly: &[Point], hp: HalfPlane, out: &mut Vec<Point>) {
    out.clear();
    let n = poly.len();
    if n == 0 {
        return;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = a.dot(hp.normal) - hp.bound;
        let db = b.dot(hp.normal) - hp.bound;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
}

/// Shoelace area, absolute value.
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        twice += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * twice.abs()
}

/// Exact area of `R1 ∩ R2` via convex clipping.
pub fn rect_intersection_area(r1: &RectSpec, r2: &RectSpec) -> f64 {
    let clipped = r2.clip(&r1.corners());
    polygon_area(&clipped).clamp(0.0, r1.area().min(r2.area()))
}

/// `ρ_e(R)`, the projection of the rectangle's vertices onto `e`.
pub fn projection_interval(e: Direction, r: &RectSpec) -> Interval {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in r.corners() {
        let p = project(e, c);
        lo = lo.min(p);
        hi = hi.max(p);
    }
    Interval::new(lo, hi)
}

/// Square grid of `cells_per_side²` cells with lower-left corner `origin`.
/// Cells are stored row-major with row index increasing in `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: Point,
    pub side: f64,
    pub cells_per_side: usize,
}

impl GridSpec {
    pub fn new(origin: Point, side: f64, cells_per_side: usize) -> Self {
        GridSpec { origin, side, cells_per_side }
    }

    pub fn h(&self) -> f64 {
        self.side / self.cells_per_side as f64
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_side * self.cells_per_side
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.cells_per_side + ix
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        let h = self.h();
        Point::new(self.origin.x + (ix as f64 + 0.5) * h, self.origin.y + (iy as f64 + 0.5) * h)
    }

    /// Cell corners, counter-clockwise from the lower-left.
    pub fn cell_corners(&self, ix: usize, iy: usize) -> [Point; 4] {
        let h = self.h();
        let x0 = self.origin.x + ix as f64 * h;
        let y0 = self.origin.y + iy as f64 * h;
        [Point::new(x0, y0), Point::new(x0 + h, y0), Point::new(x0 + h, y0 + h), Point::new(x0, y0 + h)]
    }

    pub fn max_corner(&self) -> Point {
        Point::new(self.origin.x + self.side, self.origin.y + self.side)
    }

    /// Range of cell indices along one axis overlapping `[lo, hi]`.
    pub fn cell_range(&self, lo: f64, hi: f64, axis_origin: f64) -> Option<(usize, usize)> {
        let h = self.h();
        let n = self.cells_per_side as f64;
        let a = ((lo - axis_origin) / h).floor().max(0.0);
        let b = ((hi - axis_origin) / h).ceil().min(n);
        if b <= a {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }

    /// Rejects grids coarser than `h <= δ/4`.
    pub fn check_resolution(&self, delta: f64) -> Result<()> {
        let limit = delta / 4.0;
        let h = self.h();
        if h > limit * (1.0 + 1e-12) {
            Err(Error::GridTooCoarse { h, limit })
        } else {
            Ok(())
        }
    }
}

/// Sparse per-cell coverage fractions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellCoverage {
    pub cells: Vec<(usize, usize, f64)>,
}

impl CellCoverage {
    pub fn total_fraction(&self) -> f64 {
        self.cells.iter().map(|c| c.2).sum()
    }
}

/// Fraction of each grid cell covered by `r`, computed by exact clipping.
pub fn rasterize_rect(r: &RectSpec, g: &GridSpec) -> Result<CellCoverage> {
    g.check_resolution(r.delta())?;
    let corners = r.corners();
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in corners {
        xlo = xlo.min(c.x);
        xhi = xhi.max(c.x);
        ylo = ylo.min(c.y);
        yhi = yhi.max(c.y);
    }
    let mut out = CellCoverage::default();
    let (Some((ix0, ix1)), Some((iy0, iy1))) =
        (g.cell_range(xlo, xhi, g.origin.x), g.cell_range(ylo, yhi, g.origin.y))
    else {
        return Ok(out);
    };
    let cell_area = g.cell_area();
    for iy in iy0..iy1 {
        for ix in ix0..ix1 {
            let a = polygon_area(&r.clip(&g.cell_corners(ix, iy)));
            if a > 0.0 {
                out.cells.push((ix, iy, (a / cell_area).min(1.0)));
            }
        }
    }
    Ok(out)
}

/// Area of an axis-aligned square cell of side `h` lying in the slab
/// `{x : lo <= x·e < hi}`, where `center_proj` is the projection of the
/// cell centre. Closed form: the projection of a uniform point of the cell
/// is the sum of two centred uniforms, whose CDF is piecewise quadratic.
pub fn cell_slab_area(h: f64, e: Direction, center_proj: f64, lo: f64, hi: f64) -> f64 {
    let u = e.unit();
    let a = 0.5 * h * u.x.abs();
    let b = 0.5 * h * u.y.abs();
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    let cdf = |z: f64| -> f64 {
        if z <= -(big + small) {
            0.0
        } else if z >= big + small {
            1.0
        } else if small <= 1e-15 * big {
            ((z + big) / (2.0 * big)).clamp(0.0, 1.0)
        } else if z <= -(big - small) {
            let w = z + big + small;
            w * w / (8.0 * big * small)
        } else if z <= big - small {
            (z + big) / (2.0 * big)
        } else {
            let w = big + small - z;
            1.0 - w * w / (8.0 * big * small)
        }
    };
    h * h * (cdf(hi - center_proj) - cdf(lo - center_proj)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect(angle: f64, delta: f64, j: i64, offset: f64) -> RectSpec {
        RectSpec::new(TubeId { direction: Direction::from_angle(angle), delta, index: j }, offset)
    }

    /// Rectangle of given width through `center`, long axis along the normal.
    fn centered_rect(angle: f64, delta: f64, center: Point) -> RectSpec {
        let e = Direction::from_angle(angle);
        let p = project(e, center);
        // choose j so the slab is centred on p: tubes are indexed on a grid,
        // so shift the whole picture by rebuilding a rect whose slab contains p.
        let j = (p / delta).floor() as i64;
        RectSpec::new(TubeId { direction: e, delta, index: j }, center.dot(e.normal()) - 0.5)
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(Direction::from_angle(0.0), Point::new(0.3, 7.0)), 0.3);
        let e = Direction::from_angle(PI / 2.0);
        assert!((project(e, Point::new(2.0, -1.0)) + 1.0).abs() < 1e-15);
        let d = Direction::from_angle(PI / 4.0);
        assert!((project(d, Point::new(1.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn direction_normalizes_mod_pi() {
        let a = Direction::from_angle(0.25);
        let b = Direction::from_angle(0.25 + PI);
        let c = Direction::from_angle(0.25 - 3.0 * PI);
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!((a.unit().norm() - 1.0).abs() < 1e-12);
        assert!(Direction::from_angle(-1e-300).angle() < PI);
        // near-antipodal angles are close lines
        let x = Direction::from_angle(0.01);
        let y = Direction::from_angle(PI - 0.01);
        assert!((x.angle_gap(y) - 0.02).abs() < 1e-12);
        assert!((x.chord_distance(y) - 2.0 * 0.01f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn tube_of_examples() {
        let e = Direction::from_angle(0.0);
        assert_eq!(tube_of(e, 0.25, Point::new(0.6, 3.0)).index, 2);
        assert_eq!(tube_of(e, 0.25, Point::new(0.5, 0.0)).index, 2);
        assert_eq!(tube_of(e, 0.25, Point::new(-0.1, 0.0)).index, -1);
    }

    #[test]
    fn self_intersection_is_delta() {
        let r = rect(0.7, 0.1, 3, -0.2);
        assert!((rect_intersection_area(&r, &r) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_crossing_is_delta_squared() {
        let r1 = rect(0.0, 0.1, 0, -0.5);
        // e = (0,1): slab in y ∈ [0, 0.1), long axis along -x, offset so x ∈ [-0.45, 0.55]
        let r2 = RectSpec::new(
            TubeId { direction: Direction::from_angle(PI / 2.0), delta: 0.1, index: 0 },
            -0.55,
        );
        assert!((rect_intersection_area(&r1, &r2) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn disjoint_rectangles_have_zero_area() {
        let r1 = rect(0.0, 0.1, 0, 0.0);
        let r2 = rect(0.0, 0.1, 5, 0.0);
        assert_eq!(rect_intersection_area(&r1, &r2), 0.0);
    }

    /// Midpoint-rule point count on a fine lattice, independent of clipping.
    fn raster_oracle(r1: &RectSpec, r2: &RectSpec, step: f64) -> f64 {
        let inside = |r: &RectSpec, p: Point| {
            let e = r.direction().unit();
            let n = r.direction().normal();
            let s = r.tube.slab();
            let a = p.dot(e);
            let b = p.dot(n);
            a >= s.lo && a <= s.hi && b >= r.offset && b <= r.offset + 1.0
        };
        let mut count = 0usize;
        let c = r1.corners();
        let (x0, x1) = c.iter().fold((f64::MAX, f64::MIN), |m, p| (m.0.min(p.x), m.1.max(p.x)));
        let (y0, y1) = c.iter().fold((f64::MAX, f64::MIN), |m, p| (m.0.min(p.y), m.1.max(p.y)));
        let nx = ((x1 - x0) / step).ceil() as usize;
        let ny = ((y1 - y0) / step).ceil() as usize;
        for i in 0..nx {
            for k in 0..ny {
                let p = Point::new(x0 + (i as f64 + 0.5) * step, y0 + (k as f64 + 0.5) * step);
                if inside(r1, p) && inside(r2, p) {
                    count += 1;
                }
            }
        }
        count as f64 * step * step
    }

    #[test]
    fn generic_crossing_matches_raster_and_bound() {
        // angle gap 0.2, δ = 0.05, rectangles crossing near their middles
        let delta = 0.05;
        let center = Point::new(0.31, 0.47);
        let mut worst: f64 = 0.0;
        for k in 0..12 {
            let shift = Point::new(0.0, 0.01 * k as f64);
            let r1 = centered_rect(0.4, delta, center);
            let r2 = centered_rect(0.6, delta, center + shift);
            let exact = rect_intersection_area(&r1, &r2);
            let oracle = raster_oracle(&r1, &r2, delta / 200.0);
            assert!((exact - oracle).abs() <= 0.02 * exact.max(1e-4), "{exact} vs {oracle}");
            let gap = r1.direction().chord_distance(r2.direction());
            worst = worst.max(exact * (gap + delta) / (delta * delta));
        }
        assert!(worst > 0.5 && worst <= 1.0 + 2f64.sqrt(), "C = {worst}");
    }

    #[test]
    fn projection_interval_examples() {
        let xi = rect(0.2, 0.1, 4, 0.3);
        let aligned = projection_interval(Direction::from_angle(0.2), &xi);
        assert!((aligned.len() - 0.1).abs() < 1e-12);
        let perp = projection_interval(Direction::from_angle(0.2 + PI / 2.0), &xi);
        assert!((perp.len() - 1.0).abs() < 1e-12);
        let r = rect(0.0, 0.05, 1, 0.0);
        let tilted = projection_interval(Direction::from_angle(0.3), &r);
        let expect = 0.3f64.sin() + 0.3f64.cos() * 0.05;
        assert!((tilted.len() - expect).abs() < 1e-12);
        assert!((tilted.len() - 0.3433).abs() < 1e-4);
    }

    #[test]
    fn rasterize_examples() {
        let g = GridSpec::new(Point::new(-1.0, -1.0), 4.0, 320);
        // axis-aligned, exactly on cell boundaries
        let r = rect(0.0, 0.1, 0, 0.0);
        let cov = rasterize_rect(&r, &g).unwrap();
        assert!((cov.total_fraction() * g.cell_area() - 0.1).abs() < 1e-9);

        let far = rect(0.0, 0.1, 200, 0.0);
        assert!(rasterize_rect(&far, &g).unwrap().cells.is_empty());

        let g8 = GridSpec::new(Point::new(-1.0, -1.0), 4.0, 320 * 2);
        let rot = rect(PI / 6.0, 0.1, 2, -0.4);
        let cov = rasterize_rect(&rot, &g8).unwrap();
        assert!((cov.total_fraction() * g8.cell_area() - 0.1).abs() < 1e-6);
        assert!(cov.cells.iter().all(|c| (0.0..=1.0).contains(&c.2)));
    }

    #[test]
    fn rasterize_rejects_coarse_grid() {
        let g = GridSpec::new(Point::new(0.0, 0.0), 1.0, 16);
        let r = rect(0.0, 0.1, 0, 0.0);
        assert!(matches!(rasterize_rect(&r, &g), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn cell_slab_area_matches_clipping() {
        let g = GridSpec::new(Point::new(0.0, 0.0), 1.0, 10);
        let h = g.h();
        for &angle in &[0.0, 0.3, PI / 4.0, 1.2, PI / 2.0, 2.5] {
            let e = Direction::from_angle(angle);
            for j in -3..20 {
                let tube = TubeId { direction: e, delta: 0.07, index: j };
                let slab = tube.slab();
                let (ix, iy) = (3, 4);
                let c = project(e, g.cell_center(ix, iy));
                let closed = cell_slab_area(h, e, c, slab.lo, slab.hi);
                // a unit-length rectangle centred on the cell covers it along the normal
                let offset = g.cell_center(ix, iy).dot(e.normal()) - 0.5;
                let clipped = polygon_area(&RectSpec::new(tube, offset).clip(&g.cell_corners(ix, iy)));
                assert!((clipped - closed).abs() < 1e-12, "angle {angle} j {j}: {clipped} vs {closed}");
            }
        }
    }

    proptest! {
        #[test]
        fn tube_of_brackets_projection(angle in 0.0..PI, delta in 0.01f64..1.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let e = Direction::from_angle(angle);
            let p = Point::new(x, y);
            let t = tube_of(e, delta, p);
            let v = project(e, p);
            prop_assert!(t.index as f64 * delta <= v + 1e-12);
            prop_assert!(v < (t.index + 1) as f64 * delta + 1e-12);
        }

        #[test]
        fn intersection_symmetric_and_rigid(
            a1 in 0.0..PI, a2 in 0.0..PI, j1 in -4i64..4, j2 in -4i64..4,
            o1 in -1.0f64..0.5, o2 in -1.0f64..0.5, rot in -3.0f64..3.0,
            k in 0usize..5,
        ) {
            let delta = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0][k];
            let r1 = rect(a1, delta, j1, o1);
            let r2 = rect(a2, delta, j2, o2);
            let area = rect_intersection_area(&r1, &r2);
            prop_assert!((area - rect_intersection_area(&r2, &r1)).abs() < 1e-9);
            // rotate both about the origin; wrapping past π flips e and e⊥
            let rotated = |a: f64, j: i64, o: f64| {
                if (((a + rot) / PI).floor() as i64).rem_euclid(2) == 1 {
                    rect(a + rot, delta, -j - 1, -o - 1.0)
                } else {
                    rect(a + rot, delta, j, o)
                }
            };
            let q1 = rotated(a1, j1, o1);
            let q2 = rotated(a2, j2, o2);
            prop_assert!((area - rect_intersection_area(&q1, &q2)).abs() < 1e-9);
            prop_assert!((0.0..=delta + 1e-15).contains(&area));
        }
    }

    #[test]
    fn area_bound_holds_over_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for i in 0..10_000 {
            let delta = 2f64.powi(-(4 + (i % 5) as i32));
            let c = Point::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            let r1 = centered_rect(rng.gen_range(0.0..PI), delta, Point::new(0.0, 0.0));
            let r2 = centered_rect(rng.gen_range(0.0..PI), delta, c);
            let area = rect_intersection_area(&r1, &r2);
            let gap = r1.direction().chord_distance(r2.direction());
            worst = worst.max(area * (gap + delta) / (delta * delta));

            let proj = projection_interval(r1.direction(), &r2);
            assert!(proj.len() <= PI / 2.0 * (gap + delta) + 1e-12);
        }
        // area <= min(δ, δ²/sin∠) gives C <= 1 + √2 with chord distance
        assert!(worst <= 1.0 + 2f64.sqrt(), "C = {worst}");
        assert!(worst > 0.5);
    }
}
