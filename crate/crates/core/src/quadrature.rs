//! Quadrature rules on triangles and segments.

use crate::geometry::Point2;

/// Rule selection for element integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    /// Edge midpoints, exact for quadratics.
    #[default]
    EdgeMidpoint,
    /// Radon's 7-point rule, exact for degree 5.
    Radon7,
}

/// Barycentric points and weights (weights sum to 1).
const MIDPOINT: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

fn radon_rule() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let b1 = (9.0 + 2.0 * s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let a2 = (6.0 + s15) / 21.0;
    let b2 = (9.0 - 2.0 * s15) / 21.0;
    let w2 = (155.0 + s15) / 1200.0;
    let t = 1.0 / 3.0;
    [
        ([t, t, t], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

/// Integrates `f` over the triangle with vertices `v` and area `area`.
pub fn integrate_triangle<F: FnMut(Point2) -> f64>(
    v: &[Point2; 3],
    area: f64,
    rule: Rule,
    mut f: F,
) -> f64 {
    let at = |l: &[f64; 3]| {
        Point2::new(
            l[0] * v[0].x + l[1] * v[1].x + l[2] * v[2].x,
            l[0] * v[0].y + l[1] * v[1].y + l[2] * v[2].y,
        )
    };
    let sum: f64 = match rule {
        Rule::EdgeMidpoint => MIDPOINT.iter().map(|(l, w)| w * f(at(l))).sum(),
        Rule::Radon7 => radon_rule().iter().map(|(l, w)| w * f(at(l))).sum(),
    };
    sum * area
}

/// Edge-midpoint quadrature of `f * λ_i` for each vertex hat function
/// `λ_i`; exact when `f` is linear.
pub fn load_triangle<F: FnMut(Point2) -> f64>(v: &[Point2; 3], area: f64, mut f: F) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (l, w) in MIDPOINT.iter() {
        let p = Point2::new(
            l[0] * v[0].x + l[1] * v[1].x + l[2] * v[2].x,
            l[0] * v[0].y + l[1] * v[1].y + l[2] * v[2].y,
        );
        let fp = f(p);
        for i in 0..3 {
            out[i] += w * fp * l[i] * area;
        }
    }
    out
}

/// Three-point Gauss-Legendre rule on `[p, q]`, exact for degree 5.
pub fn integrate_segment<F: FnMut(Point2) -> f64>(p: Point2, q: Point2, mut f: F) -> f64 {
    let s = (0.6f64).sqrt();
    let nodes = [(-s, 5.0 / 9.0), (0.0, 8.0 / 9.0), (s, 5.0 / 9.0)];
    let len = p.dist(q);
    let mut sum = 0.0;
    for (x, w) in nodes {
        let t = 0.5 * (1.0 + x);
        sum += w * f(p + (q - p) * t);
    }
    0.5 * len * sum
}
