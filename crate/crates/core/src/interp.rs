//! Lagrange and modified Lagrange interpolation, C¹ bumps and the
//! correction function that makes the Lagrange interpolant of `u + w`
//! coincide with the modified interpolant on degenerate elements.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{altitude_frame, point_set_diameter, segment_distance, AltitudeFrame, Point2, SpatialHash, TriangleGeom, Vec2};
use crate::mesh::{MeshClassification, Triangulation};
use crate::quadrature::{integrate_triangle, Rule};
use crate::solution::ManufacturedSolution;

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("bump radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("classification does not match the mesh: {0}")]
    InconsistentClassification(String),
    #[error("correction is not admissible ({} violations)", .0.len())]
    InadmissibleCorrection(Vec<Violation>),
}

/// Continuous piecewise-linear function given by its vertex values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalField {
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Constant gradient on element `t`.
    pub fn gradient(&self, tri: &Triangulation, t: usize) -> Vec2 {
        let [i, j, k] = tri.triangle(t);
        let [p0, p1, p2] = tri.geom(t).vertices;
        linear_gradient(
            [p0, p1, p2],
            [self.values[i], self.values[j], self.values[k]],
        )
    }

    /// Writes `nv` followed by one value per line.
    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.values.len())?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn read_text<R: std::io::BufRead>(r: R) -> Result<Self, String> {
        let mut it = r.lines();
        let n: usize = it
            .next()
            .ok_or("empty field file")?
            .map_err(|e| e.to_string())?
            .trim()
            .parse()
            .map_err(|_| "bad value count")?;
        let mut values = Vec::with_capacity(n);
        for line in it.take(n) {
            let line = line.map_err(|e| e.to_string())?;
            values.push(line.trim().parse::<f64>().map_err(|_| format!("bad value `{line}`"))?);
        }
        if values.len() != n {
            return Err(format!("expected {n} values, found {}", values.len()));
        }
        Ok(Self { values })
    }
}

/// Gradient of the affine function with values `v` at the points `p`.
pub fn linear_gradient(p: [Point2; 3], v: [f64; 3]) -> Vec2 {
    let d1 = p[1] - p[0];
    let d2 = p[2] - p[0];
    let (u1, u2) = (v[1] - v[0], v[2] - v[0]);
    let det = d1.cross(d2);
    Vec2::new((u1 * d2.y - u2 * d1.y) / det, (u2 * d1.x - u1 * d2.x) / det)
}

/// Cubic bump `φ_r(x) = φ̃(|x|/r)` with `φ̃(t) = 2(t−1)³ + 3(t−1)²` on
/// `[0, 1]` and zero beyond. Returns value and gradient.
pub fn eval_phi(r: f64, x: Vec2) -> Result<(f64, Vec2), InterpError> {
    if !(r > 0.0) {
        return Err(InterpError::NonpositiveRadius(r));
    }
    let t = x.norm() / r;
    if t >= 1.0 {
        return Ok((0.0, Vec2::ZERO));
    }
    let s = t - 1.0;
    let value = 2.0 * s * s * s + 3.0 * s * s;
    // φ̃'(t)/r · x/|x| = 6(t−1)t/r · x/|x| = 6(t−1)/r² · x
    Ok((value, x * (6.0 * s / (r * r))))
}

/// Table-mountain bump: 1 on `|x| ≤ r`, `2(t−2)³ + 3(t−2)²` for
/// `t = |x|/r ∈ [1, 2]`, 0 beyond.
pub fn eval_psi(r: f64, x: Vec2) -> Result<(f64, Vec2), InterpError> {
    if !(r > 0.0) {
        return Err(InterpError::NonpositiveRadius(r));
    }
    let d = x.norm();
    let t = d / r;
    if t <= 1.0 {
        return Ok((1.0, Vec2::ZERO));
    }
    if t >= 2.0 {
        return Ok((0.0, Vec2::ZERO));
    }
    let s = t - 2.0;
    let value = 2.0 * s * s * s + 3.0 * s * s;
    let slope = 6.0 * s * (t - 1.0) / r;
    Ok((value, x * (slope / d)))
}

pub fn lagrange(u: &ManufacturedSolution, tri: &Triangulation) -> NodalField {
    NodalField::new(tri.vertices().iter().map(|&p| u.u(p)).collect())
}

/// Modified Lagrange interpolant on one element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedInterp {
    /// Values at `(A_K, B_K, C_K)`.
    pub values: [f64; 3],
    /// `v(A_K) − u(A_K)`.
    pub delta: f64,
    pub frame: AltitudeFrame,
}

impl ModifiedInterp {
    pub fn gradient(&self, g: &TriangleGeom) -> Vec2 {
        linear_gradient([g.a(), g.b(), g.c()], self.values)
    }
}

/// The affine `v` with `v(B) = u(B)`, `v(C) = u(C)` and
/// `∇v·v2 = ∇u(x_K)·v2`, where `x_K` is the foot of the altitude from `A`.
pub fn modified_element_interp(u: &ManufacturedSolution, g: &TriangleGeom) -> ModifiedInterp {
    let (a, b, c) = (g.a(), g.b(), g.c());
    let frame = altitude_frame(g);
    let (ub, uc) = (u.u(b), u.u(c));
    let s = (frame.foot - b).dot(frame.v1) / (c - b).norm();
    let v_foot = ub + s * (uc - ub);
    let va = v_foot + frame.height * u.grad(frame.foot).dot(frame.v2);
    ModifiedInterp {
        values: [va, ub, uc],
        delta: va - u.u(a),
        frame,
    }
}

/// Affine function `value + grad·(x − anchor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFn {
    pub value: f64,
    pub grad: Vec2,
    pub anchor: Point2,
}

impl LinearFn {
    pub fn eval(&self, x: Point2) -> f64 {
        self.value + self.grad.dot(x - self.anchor)
    }
}

pub fn tangent_plane(u: &ManufacturedSolution, x_c: Point2) -> LinearFn {
    LinearFn {
        value: u.u(x_c),
        grad: u.grad(x_c),
        anchor: x_c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpKind {
    /// `amplitude · φ_r(x − center)` for the isolated element `element`.
    Phi { amplitude: f64, element: usize },
    /// `(plane(x) − u(x)) · ψ_r(x − center)` for cluster `cluster`.
    Psi { plane: LinearFn, cluster: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Point2,
    pub radius: f64,
    pub kind: BumpKind,
}

impl Bump {
    /// Radius of the support.
    pub fn outer_radius(&self) -> f64 {
        match self.kind {
            BumpKind::Phi { .. } => self.radius,
            BumpKind::Psi { .. } => 2.0 * self.radius,
        }
    }

    pub fn eval(&self, u: &ManufacturedSolution, x: Point2) -> (f64, Vec2) {
        let d = x - self.center;
        match self.kind {
            BumpKind::Phi { amplitude, .. } => {
                let (v, g) = eval_phi(self.radius, d).expect("radius checked at construction");
                (amplitude * v, g * amplitude)
            }
            BumpKind::Psi { plane, .. } => {
                let (v, g) = eval_psi(self.radius, d).expect("radius checked at construction");
                if v == 0.0 {
                    return (0.0, Vec2::ZERO);
                }
                let diff = plane.eval(x) - u.u(x);
                let dgrad = plane.grad - u.grad(x);
                (diff * v, dgrad * v + g * diff)
            }
        }
    }
}

/// Admissibility condition of a correction function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Bump supports pairwise disjoint.
    SupportsDisjoint,
    /// No B/C vertex of another degenerate element inside a φ support.
    ForeignVertices,
    /// `Σ h_K²` over isolated degenerate elements within budget.
    DiameterBudget,
    /// `r_C ≤ c·h^{1/2}` for every cluster.
    ClusterDiameter,
    /// Cluster boundaries at least `2(r_i + r_j)` apart.
    ClusterSeparation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub message: String,
}

/// Measured quantities behind the admissibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionChecks {
    pub sum_h2: f64,
    pub budget: f64,
    /// Smallest `|c_i − c_j| − (R_i + R_j)` over bump pairs (∞ if < 2 bumps).
    #[serde(with = "crate::serde_float")]
    pub min_support_gap: f64,
    /// Smallest `dist(A_K, foreign vertex) / r_K` (∞ if none nearby).
    #[serde(with = "crate::serde_float")]
    pub min_foreign_ratio: f64,
    /// Largest `r_C / h^{1/2}`.
    pub max_cluster_ratio: f64,
    pub cluster_c: f64,
    /// Smallest `dist(C_i, C_j) / (2(r_i + r_j))`.
    #[serde(with = "crate::serde_float")]
    pub min_cluster_separation_ratio: f64,
    /// Violation count per condition (the message list is capped).
    pub violation_counts: Vec<(Condition, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSpec {
    pub bumps: Vec<Bump>,
    pub admissible: bool,
    pub violations: Vec<Violation>,
    pub checks: CorrectionChecks,
    /// Isolated degenerate elements, one φ bump each.
    pub isolated: Vec<usize>,
}

impl CorrectionSpec {
    /// Value and gradient of `w` at `x`.
    pub fn eval(&self, u: &ManufacturedSolution, x: Point2) -> (f64, Vec2) {
        self.bumps.iter().fold((0.0, Vec2::ZERO), |(v, g), b| {
            if b.center.dist(x) >= b.outer_radius() {
                return (v, g);
            }
            let (bv, bg) = b.eval(u, x);
            (v + bv, g + bg)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOptions {
    /// `Σ h_K² ≤ budget_factor · |Ω|`.
    pub budget_factor: f64,
    /// `r_C ≤ cluster_c · h^{1/2}`.
    pub cluster_c: f64,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        Self {
            budget_factor: 4.0,
            cluster_c: 2.0,
        }
    }
}

const MAX_REPORTED: usize = 20;

struct Collector {
    list: Vec<Violation>,
    counts: HashMap<Condition, usize>,
}

impl Collector {
    fn push(&mut self, condition: Condition, message: impl FnOnce() -> String) {
        let n = self.counts.entry(condition).or_insert(0);
        *n += 1;
        if *n <= MAX_REPORTED {
            self.list.push(Violation {
                condition,
                message: message(),
            });
        }
    }
}

/// Builds the correction function for the degenerate elements of
/// `classification`: a φ bump at `A_K` for every isolated element and a ψ
/// bump around each cluster.
pub fn build_correction(
    u: &ManufacturedSolution,
    tri: &Triangulation,
    classification: &MeshClassification,
    clusters: &[Vec<usize>],
    opts: CorrectionOptions,
) -> Result<CorrectionSpec, InterpError> {
    let ne = tri.num_triangles();
    if classification.num_elements() != ne {
        return Err(InterpError::InconsistentClassification(format!(
            "classification covers {} elements, mesh has {ne}",
            classification.num_elements()
        )));
    }
    for (ci, c) in classification.t1.iter().chain(&classification.t2).enumerate() {
        if *c >= ne {
            return Err(InterpError::InconsistentClassification(format!(
                "element index {c} at position {ci} out of range"
            )));
        }
    }
    let mut in_cluster = vec![usize::MAX; ne];
    for (k, c) in clusters.iter().enumerate() {
        if c.is_empty() {
            return Err(InterpError::InconsistentClassification(format!("cluster {k} is empty")));
        }
        for &t in c {
            if t >= ne {
                return Err(InterpError::InconsistentClassification(format!(
                    "cluster {k} references element {t}"
                )));
            }
            if in_cluster[t] != usize::MAX {
                return Err(InterpError::InconsistentClassification(format!(
                    "element {t} belongs to two clusters"
                )));
            }
            in_cluster[t] = k;
        }
    }

    let isolated: Vec<usize> = classification
        .t2
        .iter()
        .copied()
        .filter(|&t| in_cluster[t] == usize::MAX)
        .collect();

    let mut bumps = Vec::with_capacity(isolated.len() + clusters.len());
    for &t in &isolated {
        let g = tri.geom(t);
        let (a, b, c) = (g.a(), g.b(), g.c());
        let r = 0.5 * a.dist(b).min(a.dist(c));
        let m = modified_element_interp(u, g);
        bumps.push(Bump {
            center: a,
            radius: r,
            kind: BumpKind::Phi {
                amplitude: m.delta,
                element: t,
            },
        });
    }
    for (k, c) in clusters.iter().enumerate() {
        let pts: Vec<Point2> = c
            .iter()
            .flat_map(|&t| tri.triangle(t))
            .map(|v| tri.vertex(v))
            .collect();
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in &pts {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let x_c = lo.midpoint(hi);
        let r = point_set_diameter(&pts);
        if !(r > 0.0) {
            return Err(InterpError::NonpositiveRadius(r));
        }
        bumps.push(Bump {
            center: x_c,
            radius: r,
            kind: BumpKind::Psi {
                plane: tangent_plane(u, x_c),
                cluster: k,
            },
        });
    }

    let mut col = Collector {
        list: Vec::new(),
        counts: HashMap::new(),
    };

    // (a) pairwise support disjointness
    let mut min_gap = f64::INFINITY;
    let n_phi = isolated.len();
    let max_phi = bumps[..n_phi].iter().map(|b| b.radius).fold(0.0, f64::max);
    let centers = SpatialHash::new(bumps[..n_phi].iter().map(|b| b.center).collect(), 2.0 * max_phi);
    for i in 0..bumps.len() {
        let bi = bumps[i];
        let candidates: Vec<usize> = if i < n_phi {
            centers
                .within(bi.center, bi.outer_radius() + max_phi + f64::EPSILON)
                .into_iter()
                .filter(|&j| j > i)
                .chain(n_phi..bumps.len())
                .collect()
        } else {
            (i + 1..bumps.len()).collect()
        };
        for j in candidates {
            let bj = bumps[j];
            let gap = bi.center.dist(bj.center) - (bi.outer_radius() + bj.outer_radius());
            min_gap = min_gap.min(gap);
            if gap < 0.0 {
                col.push(Condition::SupportsDisjoint, || {
                    format!("supports of bumps {i} and {j} overlap by {:e}", -gap)
                });
            }
        }
    }

    // (b) foreign B/C vertices inside φ supports
    let mut owners: Vec<(Point2, usize)> = Vec::new();
    for &t in &classification.t2 {
        let g = tri.geom(t);
        owners.push((g.b(), t));
        owners.push((g.c(), t));
    }
    let hash = SpatialHash::new(owners.iter().map(|o| o.0).collect(), 2.0 * max_phi);
    let mut min_ratio = f64::INFINITY;
    for b in &bumps[..n_phi] {
        let BumpKind::Phi { element, .. } = b.kind else { unreachable!() };
        for k in hash.within(b.center, 2.0 * b.radius) {
            let (p, owner) = owners[k];
            if owner == element {
                continue;
            }
            let ratio = p.dist(b.center) / b.radius;
            min_ratio = min_ratio.min(ratio);
            if ratio < 1.0 {
                col.push(Condition::ForeignVertices, || {
                    format!(
                        "vertex ({}, {}) of element {owner} lies within r_K of A_K for element {element}",
                        p.x, p.y
                    )
                });
            }
        }
    }

    // (c) Σ h_K² budget
    let sum_h2: f64 = isolated.iter().map(|&t| tri.geom(t).diameter.powi(2)).sum();
    let budget = opts.budget_factor * tri.domain_area();
    if sum_h2 > budget {
        col.push(Condition::DiameterBudget, || {
            format!("sum of squared diameters {sum_h2} exceeds budget {budget}")
        });
    }

    // (d) cluster diameters
    let sqrt_h = tri.h().sqrt();
    let mut max_cluster_ratio: f64 = 0.0;
    for b in &bumps[n_phi..] {
        let BumpKind::Psi { cluster, .. } = b.kind else { unreachable!() };
        let ratio = b.radius / sqrt_h;
        max_cluster_ratio = max_cluster_ratio.max(ratio);
        if ratio > opts.cluster_c {
            col.push(Condition::ClusterDiameter, || {
                format!("cluster {cluster}: r_C / h^1/2 = {ratio} > {}", opts.cluster_c)
            });
        }
    }

    // (e) cluster separation
    let mut min_sep = f64::INFINITY;
    let boundary_segments: Vec<Vec<(Point2, Point2)>> = clusters
        .iter()
        .map(|c| {
            tri.boundary_loops(c)
                .iter()
                .flat_map(|l| {
                    (0..l.len()).map(move |i| (l[i], l[(i + 1) % l.len()]))
                })
                .map(|(a, b)| (tri.vertex(a), tri.vertex(b)))
                .collect()
        })
        .collect();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let mut d = f64::INFINITY;
            for &(a0, a1) in &boundary_segments[i] {
                for &(b0, b1) in &boundary_segments[j] {
                    d = d.min(segment_distance(a0, a1, b0, b1));
                }
            }
            let need = 2.0 * (bumps[n_phi + i].radius + bumps[n_phi + j].radius);
            min_sep = min_sep.min(d / need);
            if d < need {
                col.push(Condition::ClusterSeparation, || {
                    format!("clusters {i} and {j} are {d} apart, need {need}")
                });
            }
        }
    }

    let mut violation_counts: Vec<(Condition, usize)> = col.counts.into_iter().collect();
    violation_counts.sort();
    Ok(CorrectionSpec {
        admissible: col.list.is_empty(),
        violations: col.list,
        checks: CorrectionChecks {
            sum_h2,
            budget,
            min_support_gap: min_gap,
            min_foreign_ratio: min_ratio,
            max_cluster_ratio,
            cluster_c: opts.cluster_c,
            min_cluster_separation_ratio: min_sep,
            violation_counts,
        },
        bumps,
        isolated,
    })
}

/// Lagrange interpolant of `u + w`.
pub fn corrected_interpolant(
    u: &ManufacturedSolution,
    tri: &Triangulation,
    spec: &CorrectionSpec,
) -> Result<NodalField, InterpError> {
    if !spec.admissible {
        return Err(InterpError::InadmissibleCorrection(spec.violations.clone()));
    }
    let mut field = lagrange(u, tri);
    if spec.bumps.is_empty() {
        return Ok(field);
    }
    let cell = tri.h().max(1e-300);
    let hash = SpatialHash::new(tri.vertices().to_vec(), cell);
    for b in &spec.bumps {
        for v in hash.within(b.center, b.outer_radius()) {
            field.values[v] += b.eval(u, tri.vertex(v)).0;
        }
    }
    Ok(field)
}

/// `|w|_{H¹}` over the given elements by degree-5 quadrature.
pub fn correction_seminorm(
    u: &ManufacturedSolution,
    tri: &Triangulation,
    spec: &CorrectionSpec,
    elements: &[usize],
) -> f64 {
    elements
        .iter()
        .map(|&t| {
            let g = tri.geom(t);
            integrate_triangle(&g.vertices, g.area, Rule::Radon7, |x| spec.eval(u, x).1.norm_sq())
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tri_metrics;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_endpoints() {
        let (v, g) = eval_phi(0.3, Vec2::ZERO).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(g, Vec2::ZERO);
        let (v, g) = eval_phi(0.3, Vec2::new(0.0, 0.3)).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, Vec2::ZERO);
        assert!(matches!(eval_phi(0.0, Vec2::ZERO), Err(InterpError::NonpositiveRadius(_))));
    }

    #[test]
    fn psi_plateau_and_support() {
        let (v, g) = eval_psi(0.2, Vec2::new(0.1, 0.0)).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(g, Vec2::ZERO);
        let (v, _) = eval_psi(0.2, Vec2::new(0.0, 0.4)).unwrap();
        assert_eq!(v, 0.0);
        assert!(eval_psi(-1.0, Vec2::ZERO).is_err());
    }

    #[test]
    fn bump_gradients_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-6;
        for _ in 0..10_000 {
            let r: f64 = rng.gen_range(0.05..2.0);
            let x = Vec2::new(rng.gen_range(-2.2 * r..2.2 * r), rng.gen_range(-2.2 * r..2.2 * r));
            for f in [eval_phi, eval_psi] {
                let (_, g) = f(r, x).unwrap();
                let dx = Vec2::new(step, 0.0);
                let dy = Vec2::new(0.0, step);
                let fx = (f(r, x + dx).unwrap().0 - f(r, x - dx).unwrap().0) / (2.0 * step);
                let fy = (f(r, x + dy).unwrap().0 - f(r, x - dy).unwrap().0) / (2.0 * step);
                assert!((fx - g.x).abs() < 1e-6 && (fy - g.y).abs() < 1e-6, "r={r} x={x:?}");
            }
        }
    }

    #[test]
    fn modified_interp_exact_on_linear() {
        let u = ManufacturedSolution::linear(0.5, -1.5, 2.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let p: Vec<Point2> = (0..3).map(|_| Point2::new(rng.gen(), rng.gen())).collect();
            let Ok(g) = tri_metrics(p[0], p[1], p[2]) else { continue };
            let m = modified_element_interp(&u, &g);
            assert!(m.delta.abs() < 1e-12);
            assert!((m.gradient(&g) - u.grad(g.a())).norm() < 1e-9 * (1.0 / g.sin_max_angle));
        }
    }

    #[test]
    fn modified_interp_matches_definition() {
        let u = ManufacturedSolution::quadratic();
        let g = tri_metrics(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.4, 0.01)).unwrap();
        let m = modified_element_interp(&u, &g);
        assert_eq!(m.values[1], u.u(g.b()));
        assert_eq!(m.values[2], u.u(g.c()));
        let grad = m.gradient(&g);
        let want = u.grad(m.frame.foot).dot(m.frame.v2);
        assert!((grad.dot(m.frame.v2) - want).abs() < 1e-12);
    }

    #[test]
    fn tangent_plane_examples() {
        let u = ManufacturedSolution::quadratic();
        let p = tangent_plane(&u, Point2::ZERO);
        assert_eq!(p.eval(Point2::new(0.3, -0.7)), 0.0);
        let lin = ManufacturedSolution::linear(1.0, 2.0, 3.0);
        let p = tangent_plane(&lin, Point2::new(0.2, 0.9));
        let x = Point2::new(-0.4, 0.25);
        assert!((p.eval(x) - lin.u(x)).abs() < 1e-15);
    }

    #[test]
    fn nodal_field_text_round_trip() {
        let f = NodalField::new(vec![0.1 + 0.2, -1.0 / 3.0, 5e-300]);
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        assert_eq!(NodalField::read_text(&buf[..]).unwrap(), f);
    }
}
