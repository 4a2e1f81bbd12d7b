//! P1 finite elements for −Δu = f with Dirichlet data `u` on the boundary.

pub mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::h1_error;
use crate::geometry::TriangleGeom;
use crate::interp::NodalField;
use crate::mesh::Triangulation;
use crate::quadrature::load_triangle;
use crate::solution::ManufacturedSolution;
pub use solver::{CsrMatrix, SolveMethod, SolveStats};
use solver::{solve_spd, TARGET_RESIDUAL};

#[derive(Debug, Error)]
pub enum FemError {
    #[error("solver breakdown: relative residual {relative_residual:e} after {iterations} iterations")]
    SolverBreakdown {
        relative_residual: f64,
        iterations: usize,
    },
    #[error("candidate {candidate} differs from the solution at boundary vertex {vertex}")]
    BoundaryMismatch { candidate: usize, vertex: usize },
    #[error("field has {found} values, mesh has {expected} vertices")]
    LengthMismatch { expected: usize, found: usize },
}

/// Interior system after eliminating the Dirichlet vertices.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Nodal values of the boundary data (zero at interior vertices).
    pub dirichlet_values: Vec<f64>,
    /// Mesh vertex of every unknown.
    pub interior: Vec<usize>,
}

/// Exact P1 stiffness matrix of one element, in local vertex order.
pub fn element_stiffness(g: &TriangleGeom) -> [[f64; 3]; 3] {
    let p = g.vertices;
    let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
    let s = 1.0 / (4.0 * g.area);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = e[i].dot(e[j]) * s;
        }
    }
    k
}

/// Stiffness matrix over all vertices.
pub fn stiffness(tri: &Triangulation) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * tri.num_triangles());
    for t in 0..tri.num_triangles() {
        let k = element_stiffness(tri.geom(t));
        let v = tri.triangle(t);
        for i in 0..3 {
            for j in 0..3 {
                trip.push((v[i], v[j], k[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(tri.num_vertices(), &trip)
}

pub fn assemble(tri: &Triangulation, u: &ManufacturedSolution) -> LinearSystem {
    let nv = tri.num_vertices();
    let mut dof = vec![usize::MAX; nv];
    let mut interior = Vec::new();
    let mut dirichlet_values = vec![0.0; nv];
    for v in 0..nv {
        if tri.is_boundary_vertex(v) {
            dirichlet_values[v] = u.u(tri.vertex(v));
        } else {
            dof[v] = interior.len();
            interior.push(v);
        }
    }
    let mut rhs = vec![0.0; interior.len()];
    let mut trip = Vec::with_capacity(9 * tri.num_triangles());
    for t in 0..tri.num_triangles() {
        let g = tri.geom(t);
        let k = element_stiffness(g);
        let load = load_triangle(&g.vertices, g.area, |x| u.f(x));
        let v = tri.triangle(t);
        for i in 0..3 {
            let di = dof[v[i]];
            if di == usize::MAX {
                continue;
            }
            rhs[di] += load[i];
            for j in 0..3 {
                let dj = dof[v[j]];
                if dj == usize::MAX {
                    rhs[di] -= k[i][j] * dirichlet_values[v[j]];
                } else {
                    trip.push((di, dj, k[i][j]));
                }
            }
        }
    }
    LinearSystem {
        matrix: CsrMatrix::from_triplets(interior.len(), &trip),
        rhs,
        dirichlet_values,
        interior,
    }
}

pub fn solve_with_stats(sys: &LinearSystem) -> Result<(NodalField, SolveStats), FemError> {
    let (x, stats) = solve_spd(&sys.matrix, &sys.rhs);
    if !(stats.relative_residual <= TARGET_RESIDUAL) {
        return Err(FemError::SolverBreakdown {
            relative_residual: stats.relative_residual,
            iterations: stats.iterations,
        });
    }
    let mut values = sys.dirichlet_values.clone();
    for (d, &v) in sys.interior.iter().enumerate() {
        values[v] = x[d];
    }
    Ok((NodalField::new(values), stats))
}

pub fn solve(sys: &LinearSystem) -> Result<NodalField, FemError> {
    solve_with_stats(sys).map(|(f, _)| f)
}

/// Assembles and solves in one step.
pub fn solve_poisson(
    tri: &Triangulation,
    u: &ManufacturedSolution,
) -> Result<(NodalField, SolveStats), FemError> {
    solve_with_stats(&assemble(tri, u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeaReport {
    /// `|u − U|₁`.
    pub fem_error: f64,
    /// `|u − v|₁` per candidate.
    pub candidate_errors: Vec<f64>,
    pub holds: Vec<bool>,
    pub all_hold: bool,
}

/// Checks `|u − U|₁ ≤ |u − v|₁` for candidates `v` in the same affine space
/// as `U`.
pub fn cea_check(
    u: &ManufacturedSolution,
    tri: &Triangulation,
    fem: &NodalField,
    candidates: &[NodalField],
) -> Result<CeaReport, FemError> {
    let nv = tri.num_vertices();
    for f in std::iter::once(fem).chain(candidates) {
        if f.len() != nv {
            return Err(FemError::LengthMismatch {
                expected: nv,
                found: f.len(),
            });
        }
    }
    for (c, cand) in candidates.iter().enumerate() {
        for v in (0..nv).filter(|&v| tri.is_boundary_vertex(v)) {
            let (a, b) = (fem.values[v], cand.values[v]);
            if (a - b).abs() > 1e-13 * a.abs().max(1.0) {
                return Err(FemError::BoundaryMismatch {
                    candidate: c,
                    vertex: v,
                });
            }
        }
    }
    let fem_error = h1_error(u, fem, tri, None);
    let scale = crate::analysis::h1_seminorm(fem, tri, None).max(1.0);
    let candidate_errors: Vec<f64> = candidates.iter().map(|c| h1_error(u, c, tri, None)).collect();
    let holds: Vec<bool> = candidate_errors
        .iter()
        .map(|&e| fem_error <= e * (1.0 + 1e-9) + 1e-12 * scale)
        .collect();
    Ok(CeaReport {
        fem_error,
        all_hold: holds.iter().all(|&h| h),
        candidate_errors,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::lagrange;
    use crate::meshgen::unit_square_uniform;

    #[test]
    fn single_interior_vertex() {
        let m = unit_square_uniform(2).unwrap();
        let sys = assemble(&m, &ManufacturedSolution::quadratic());
        assert_eq!(sys.matrix.n, 1);
        assert!((sys.matrix.get(0, 0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn row_sums_vanish() {
        let m = unit_square_uniform(5).unwrap();
        let k = stiffness(&m);
        for i in 0..k.n {
            let s: f64 = k.row(i).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-12);
        }
        assert!(k.asymmetry() < 1e-13);
    }

    #[test]
    fn linear_solution_reproduced() {
        let m = unit_square_uniform(6).unwrap();
        let u = ManufacturedSolution::linear(0.3, 1.7, -2.2);
        let (f, _) = solve_poisson(&m, &u).unwrap();
        for (p, v) in m.vertices().iter().zip(&f.values) {
            assert!((u.u(*p) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn cea_against_interpolant() {
        let m = unit_square_uniform(16).unwrap();
        let u = ManufacturedSolution::quadratic();
        let (f, _) = solve_poisson(&m, &u).unwrap();
        let r = cea_check(&u, &m, &f, &[f.clone(), lagrange(&u, &m)]).unwrap();
        assert!(r.all_hold);
        assert_eq!(r.candidate_errors[0], r.fem_error);
        let mut bad = lagrange(&u, &m);
        bad.values[0] += 1.0;
        assert!(matches!(
            cea_check(&u, &m, &f, &[bad]),
            Err(FemError::BoundaryMismatch { .. })
        ));
    }
}
