//! Per-triangle metric kernel.
//!
//! Everything here is a pure function of vertex coordinates. Angles are taken
//! from `atan2(|cross|, dot)` and the cross product uses Kahan's fused
//! 2x2 determinant, so elements with a maximum angle within 1e-8 of π keep
//! full relative accuracy in `sin(max_angle)` and the area.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Collinearity threshold relative to the squared longest edge.
pub const COLLINEAR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate triangle: |signed area| = {area:e} against scale {scale:e}")]
    DegenerateTriangle { area: f64, scale: f64 },
    #[error("zero-length vector")]
    ZeroVector,
}

/// A point (or free vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// Free vectors share the point representation.
pub type Vec2 = Point2;

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// `self.x * o.y - self.y * o.x` with a single rounding error.
    pub fn cross(self, o: Self) -> f64 {
        let w = self.y * o.x;
        let e = (-self.y).mul_add(o.x, w);
        let f = self.x.mul_add(o.y, -w);
        f + e
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise rotation by π/2.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Result<Self, GeometryError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(GeometryError::ZeroVector);
        }
        Ok(self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn midpoint(self, o: Self) -> Self {
        Self::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Cached metrics of one triangle.
///
/// `max_angle_vertex` indexes `vertices`; the remaining two vertices in
/// cyclic order are B and C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleGeom {
    pub vertices: [Point2; 3],
    pub area: f64,
    /// True when the vertices are given counter-clockwise.
    pub ccw: bool,
    /// Longest edge length.
    pub diameter: f64,
    pub max_angle: f64,
    /// `sin(max_angle)`, computed as `2|K| / (|AB||AC|)` rather than through
    /// the angle so it stays accurate as the angle approaches π.
    pub sin_max_angle: f64,
    pub max_angle_vertex: usize,
    pub circumradius: f64,
    /// Interior angles at each vertex.
    pub angles: [f64; 3],
}

impl TriangleGeom {
    /// Maximum-angle vertex A_K.
    pub fn a(&self) -> Point2 {
        self.vertices[self.max_angle_vertex]
    }

    pub fn b(&self) -> Point2 {
        self.vertices[(self.max_angle_vertex + 1) % 3]
    }

    pub fn c(&self) -> Point2 {
        self.vertices[(self.max_angle_vertex + 2) % 3]
    }

    pub fn centroid(&self) -> Point2 {
        let [p, q, r] = self.vertices;
        Point2::new((p.x + q.x + r.x) / 3.0, (p.y + q.y + r.y) / 3.0)
    }

    /// Local indices (A, B, C).
    pub fn abc_indices(&self) -> [usize; 3] {
        let a = self.max_angle_vertex;
        [a, (a + 1) % 3, (a + 2) % 3]
    }
}

/// Exact metrics of the triangle `(p0, p1, p2)`.
pub fn tri_metrics(p0: Point2, p1: Point2, p2: Point2) -> Result<TriangleGeom, GeometryError> {
    let pts = [p0, p1, p2];
    // squared length of the edge opposite vertex i
    let opp: [f64; 3] = [
        (p1 - p2).norm_sq(),
        (p2 - p0).norm_sq(),
        (p0 - p1).norm_sq(),
    ];
    let mut a = 0;
    for i in 1..3 {
        if opp[i] > opp[a] {
            a = i;
        }
    }
    let diameter = opp[a].sqrt();

    let corner = |i: usize| {
        let e1 = pts[(i + 1) % 3] - pts[i];
        let e2 = pts[(i + 2) % 3] - pts[i];
        (e1, e2, e1.cross(e2))
    };

    let (ab, ac, cross_a) = corner(a);
    let scale = diameter * diameter;
    if !(cross_a.abs() > COLLINEAR_TOL * scale) || !cross_a.is_finite() {
        return Err(GeometryError::DegenerateTriangle {
            area: 0.5 * cross_a,
            scale,
        });
    }

    let mut angles = [0.0; 3];
    for (i, ang) in angles.iter_mut().enumerate() {
        let (e1, e2, cr) = corner(i);
        *ang = cr.abs().atan2(e1.dot(e2));
    }

    let area = 0.5 * cross_a.abs();
    let len_ab = ab.norm();
    let len_ac = ac.norm();
    let sin_max_angle = cross_a.abs() / (len_ab * len_ac);
    let circumradius = diameter * len_ab * len_ac / (4.0 * area);

    Ok(TriangleGeom {
        vertices: pts,
        area,
        ccw: cross_a > 0.0,
        diameter,
        max_angle: angles[a],
        sin_max_angle,
        max_angle_vertex: a,
        circumradius,
        angles,
    })
}

/// Frame attached to the maximum-angle vertex: the foot of the altitude
/// from A_K onto line(B_K, C_K), the unit edge direction `v1 = (C-B)/|C-B|`
/// and the unit normal `v2` pointing from the foot towards A_K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeFrame {
    pub foot: Point2,
    pub v1: Vec2,
    pub v2: Vec2,
    /// |A_K - foot|
    pub height: f64,
}

pub fn altitude_frame(g: &TriangleGeom) -> AltitudeFrame {
    let (a, b, c) = (g.a(), g.b(), g.c());
    let bc = c - b;
    let len = bc.norm();
    let v1 = bc * (1.0 / len);
    let ab = a - b;
    let t = ab.dot(v1);
    let foot = b + v1 * t;
    let side = v1.cross(ab);
    let v2 = if side >= 0.0 { v1.perp() } else { -v1.perp() };
    AltitudeFrame {
        foot,
        v1,
        v2,
        height: side.abs(),
    }
}

/// Unsigned angle between two vectors, in `[0, π]`.
pub fn angle_between(a: Vec2, b: Vec2) -> Result<f64, GeometryError> {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    Ok(a.cross(b).abs().atan2(a.dot(b)))
}

/// `π - angle`, clamped at zero.
pub fn supplement(angle: f64) -> f64 {
    (PI - angle).max(0.0)
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sq();
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Distance between two closed segments.
pub fn segment_distance(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> f64 {
    let d1 = (a1 - a0).cross(b0 - a0);
    let d2 = (a1 - a0).cross(b1 - a0);
    let d3 = (b1 - b0).cross(a0 - b0);
    let d4 = (b1 - b0).cross(a1 - b0);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

/// Diameter of a finite point set (via its convex hull).
pub fn point_set_diameter(points: &[Point2]) -> f64 {
    let hull = convex_hull(points);
    let mut d2: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            d2 = d2.max((hull[i] - hull[j]).norm_sq());
        }
    }
    d2.sqrt()
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let n = hull.len();
                if (hull[n - 1] - hull[n - 2]).cross(p - hull[n - 2]) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Uniform bucket grid over a point set for radius queries.
#[derive(Debug, Clone)]
pub struct SpatialHash {
    cell: f64,
    buckets: std::collections::HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl SpatialHash {
    pub fn new(points: Vec<Point2>, cell: f64) -> Self {
        let cell = if cell > 0.0 && cell.is_finite() { cell } else { 1.0 };
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> =
            std::collections::HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(cell, *p)).or_default().push(i);
        }
        Self {
            cell,
            buckets,
            points,
        }
    }

    fn key(cell: f64, p: Point2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices of points with `|p - center| < radius`, in increasing order.
    pub fn within(&self, center: Point2, radius: f64) -> Vec<usize> {
        let lo = Self::key(self.cell, center - Point2::new(radius, radius));
        let hi = Self::key(self.cell, center + Point2::new(radius, radius));
        let mut out = Vec::new();
        if (hi.0 - lo.0 + 1).saturating_mul(hi.1 - lo.1 + 1) > 4 * self.buckets.len() as i64 + 16 {
            out.extend((0..self.points.len()).filter(|&i| self.points[i].dist(center) < radius));
            return out;
        }
        for cx in lo.0..=hi.0 {
            for cy in lo.1..=hi.1 {
                if let Some(list) = self.buckets.get(&(cx, cy)) {
                    out.extend(list.iter().copied().filter(|&i| self.points[i].dist(center) < radius));
                }
            }
        }
        out.sort_unstable();
        out
    }
}
