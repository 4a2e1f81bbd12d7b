//! Manufactured solutions of −Δu = f.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Vec2};
use crate::quadrature::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManufacturedSolution {
    /// `c0 + cx·x + cy·y`
    Linear { c0: f64, cx: f64, cy: f64 },
    /// `a·x² + b·xy + c·y² + d·x + e·y + f`
    Quadratic {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        e: f64,
        f: f64,
    },
    /// `sin(πx)·sin(πy)`
    SinSin,
}

impl ManufacturedSolution {
    /// The test solution `x² + y²`, with `f = −4`.
    pub fn quadratic() -> Self {
        Self::Quadratic {
            a: 1.0,
            b: 0.0,
            c: 1.0,
            d: 0.0,
            e: 0.0,
            f: 0.0,
        }
    }

    pub fn linear(c0: f64, cx: f64, cy: f64) -> Self {
        Self::Linear { c0, cx, cy }
    }

    /// Looks up `quadratic`, `sinsin` or `linear` (u = 1 + 2x − 3y).
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "quadratic" => Some(Self::quadratic()),
            "sinsin" => Some(Self::SinSin),
            "linear" => Some(Self::linear(1.0, 2.0, -3.0)),
            _ => None,
        }
    }

    pub fn u(&self, p: Point2) -> f64 {
        let (x, y) = (p.x, p.y);
        match *self {
            Self::Linear { c0, cx, cy } => c0 + cx * x + cy * y,
            Self::Quadratic { a, b, c, d, e, f } => {
                a * x * x + b * x * y + c * y * y + d * x + e * y + f
            }
            Self::SinSin => (PI * x).sin() * (PI * y).sin(),
        }
    }

    pub fn grad(&self, p: Point2) -> Vec2 {
        let (x, y) = (p.x, p.y);
        match *self {
            Self::Linear { cx, cy, .. } => Vec2::new(cx, cy),
            Self::Quadratic { a, b, c, d, e, .. } => {
                Vec2::new(2.0 * a * x + b * y + d, b * x + 2.0 * c * y + e)
            }
            Self::SinSin => Vec2::new(
                PI * (PI * x).cos() * (PI * y).sin(),
                PI * (PI * x).sin() * (PI * y).cos(),
            ),
        }
    }

    /// Source term `f = −Δu`.
    pub fn f(&self, p: Point2) -> f64 {
        match *self {
            Self::Linear { .. } => 0.0,
            Self::Quadratic { a, c, .. } => -2.0 * (a + c),
            Self::SinSin => 2.0 * PI * PI * self.u(p),
        }
    }

    /// `|u|_{2,∞}`: the largest absolute second partial derivative.
    pub fn seminorm_2inf(&self) -> f64 {
        match *self {
            Self::Linear { .. } => 0.0,
            Self::Quadratic { a, b, c, .. } => (2.0 * a).abs().max(b.abs()).max((2.0 * c).abs()),
            Self::SinSin => PI * PI,
        }
    }

    /// `|u|_2` on the unit square.
    pub fn seminorm_2(&self) -> Option<f64> {
        match *self {
            Self::Linear { .. } => Some(0.0),
            Self::Quadratic { a, b, c, .. } => {
                Some((4.0 * a * a + 2.0 * b * b + 4.0 * c * c).sqrt())
            }
            Self::SinSin => Some(PI * PI),
        }
    }

    /// Quadrature rule that integrates `|∇u − ∇v_h|²` exactly (or to
    /// degree 5 for non-polynomial `u`).
    pub fn error_rule(&self) -> Rule {
        match self {
            Self::Linear { .. } | Self::Quadratic { .. } => Rule::EdgeMidpoint,
            Self::SinSin => Rule::Radon7,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all() -> Vec<ManufacturedSolution> {
        vec![
            ManufacturedSolution::quadratic(),
            ManufacturedSolution::linear(1.0, 2.0, -3.0),
            ManufacturedSolution::Quadratic {
                a: 0.3,
                b: -1.2,
                c: 2.0,
                d: 0.5,
                e: -0.7,
                f: 1.0,
            },
            ManufacturedSolution::SinSin,
        ]
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let step = 1e-5;
        for u in all() {
            for _ in 0..200 {
                let p = Point2::new(rng.gen(), rng.gen());
                let g = u.grad(p);
                let fx = (u.u(p + Vec2::new(step, 0.0)) - u.u(p - Vec2::new(step, 0.0))) / (2.0 * step);
                let fy = (u.u(p + Vec2::new(0.0, step)) - u.u(p - Vec2::new(0.0, step))) / (2.0 * step);
                let err = (Vec2::new(fx, fy) - g).norm();
                assert!(err <= 1e-6 * g.norm().max(1.0), "{u:?} at {p:?}");
            }
        }
    }

    #[test]
    fn source_is_negative_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = 1e-4;
        for u in all() {
            for _ in 0..50 {
                let p = Point2::new(rng.gen(), rng.gen());
                let lap = (u.u(p + Vec2::new(s, 0.0)) + u.u(p - Vec2::new(s, 0.0))
                    + u.u(p + Vec2::new(0.0, s))
                    + u.u(p - Vec2::new(0.0, s))
                    - 4.0 * u.u(p))
                    / (s * s);
                assert!((u.f(p) + lap).abs() < 1e-4, "{u:?}");
            }
        }
    }

    #[test]
    fn test_solution_values() {
        let u = ManufacturedSolution::quadratic();
        assert_eq!(u.u(Point2::new(0.5, 0.5)), 0.5);
        assert_eq!(u.f(Point2::new(0.3, 0.1)), -4.0);
        assert_eq!(u.seminorm_2inf(), 2.0);
        assert!((u.seminorm_2().unwrap() - 8f64.sqrt()).abs() < 1e-15);
    }
}
