//! Error measurement and band quantities.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{angle_between, tri_metrics, Point2, Vec2};
use crate::interp::{linear_gradient, CorrectionSpec, LinearFn, NodalField, Violation};
use crate::mesh::{MeshClassification, Triangulation};
use crate::meshgen::Band;
use crate::quadrature::{integrate_segment, integrate_triangle, Rule};
use crate::solution::ManufacturedSolution;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("band is inconsistent with the mesh: {0}")]
    BandInconsistent(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
}

/// `(Σ_K ∫_K |∇u − ∇U|²)^{1/2}` over `subset` (all elements by default),
/// with the quadrature chosen by [`ManufacturedSolution::error_rule`].
pub fn h1_error(
    u: &ManufacturedSolution,
    field: &NodalField,
    tri: &Triangulation,
    subset: Option<&[usize]>,
) -> f64 {
    h1_error_with_rule(u, field, tri, subset, u.error_rule())
}

pub fn h1_error_with_rule(
    u: &ManufacturedSolution,
    field: &NodalField,
    tri: &Triangulation,
    subset: Option<&[usize]>,
    rule: Rule,
) -> f64 {
    let elem = |t: usize| {
        let g = tri.geom(t);
        let gu = field.gradient(tri, t);
        integrate_triangle(&g.vertices, g.area, rule, |x| (u.grad(x) - gu).norm_sq())
    };
    let sum: f64 = match subset {
        Some(s) => s.iter().map(|&t| elem(t)).sum(),
        None => (0..tri.num_triangles()).map(elem).sum(),
    };
    sum.sqrt()
}

/// `|U|₁` over `subset`.
pub fn h1_seminorm(field: &NodalField, tri: &Triangulation, subset: Option<&[usize]>) -> f64 {
    let elem = |t: usize| field.gradient(tri, t).norm_sq() * tri.geom(t).area;
    let sum: f64 = match subset {
        Some(s) => s.iter().map(|&t| elem(t)).sum(),
        None => (0..tri.num_triangles()).map(elem).sum(),
    };
    sum.sqrt()
}

/// `‖u − U‖_{L²(Γ)}` for Γ given as a list of mesh edges.
pub fn l2_boundary_error(
    u: &ManufacturedSolution,
    field: &NodalField,
    tri: &Triangulation,
    gamma_edges: &[[usize; 2]],
) -> f64 {
    gamma_edges
        .iter()
        .map(|&[a, b]| {
            let (p, q) = (tri.vertex(a), tri.vertex(b));
            let (fa, fb) = (field.values[a], field.values[b]);
            let len = p.dist(q);
            integrate_segment(p, q, |x| {
                let s = x.dist(p) / len;
                let d = u.u(x) - (fa + s * (fb - fa));
                d * d
            })
        })
        .sum::<f64>()
        .sqrt()
}

/// `‖u_Γ − Π¹u_Γ‖_{L²(0,L)}` for `u_Γ(t) = c·t² + linear`, where Π¹ is the
/// L²-orthogonal projection onto linear functions.
pub fn proj_p1_residual(l: f64, c: f64) -> f64 {
    c.abs() * l.powf(2.5) / (6.0 * 5f64.sqrt())
}

/// Trace of a field along a band's Γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTrace {
    /// `h_i`, the Γ-edge lengths.
    pub interval_lengths: Vec<f64>,
    /// `U′_i = ∇U|_{K_i}·g`.
    pub slopes: Vec<f64>,
    /// Slope of the secant through the trace endpoints.
    pub secant_slope: f64,
    /// `w′_i = U′_i − Ū′`.
    pub wprime: Vec<f64>,
    /// `Σ h_i w′_i`.
    pub weighted_sum: f64,
    /// `Σ_{i≥1} (U′_i − U′_{i−1})²`.
    pub slope_jumps_sq: f64,
}

pub fn band_trace(field: &NodalField, band: &Band, tri: &Triangulation) -> Result<BandTrace, AnalysisError> {
    band.validate_structure(tri).map_err(AnalysisError::BandInconsistent)?;
    let g = band.direction_g;
    let interval_lengths: Vec<f64> = band
        .gamma_edges
        .iter()
        .map(|e| tri.vertex(e[0]).dist(tri.vertex(e[1])))
        .collect();
    let slopes: Vec<f64> = band
        .odd_elements
        .iter()
        .map(|&k| field.gradient(tri, k).dot(g))
        .collect();
    let first = band.gamma_edges[0][0];
    let last = band.gamma_edges.last().unwrap()[1];
    let length: f64 = interval_lengths.iter().sum();
    let secant_slope = (field.values[last] - field.values[first]) / length;
    let wprime: Vec<f64> = slopes.iter().map(|s| s - secant_slope).collect();
    let weighted_sum = interval_lengths.iter().zip(&wprime).map(|(h, w)| h * w).sum();
    let slope_jumps_sq = slopes.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(BandTrace {
        interval_lengths,
        slopes,
        secant_slope,
        wprime,
        weighted_sum,
        slope_jumps_sq,
    })
}

/// `(Σ(a_i − a_{i−1})², A/(L·N))` with `A = Σ h_i a_i²`, `L = Σ h_i`,
/// `N + 1 = len`, after shifting `a` so that `Σ h_i a_i = 0`.
pub fn difference_bound_oracle(h: &[f64], a: &[f64]) -> (f64, f64) {
    assert_eq!(h.len(), a.len(), "h and a must have equal length");
    assert!(h.iter().all(|&x| x > 0.0), "h_i must be positive");
    if a.len() < 2 {
        return (0.0, 0.0);
    }
    let l: f64 = h.iter().sum();
    let mean = h.iter().zip(a).map(|(h, a)| h * a).sum::<f64>() / l;
    let a: Vec<f64> = a.iter().map(|x| x - mean).collect();
    let lhs = a.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let big_a: f64 = h.iter().zip(&a).map(|(h, a)| h * a * a).sum();
    let n = (a.len() - 1) as f64;
    (lhs, big_a / (l * n))
}

/// Split of the H¹ error on the `K̃` elements into the gradient-jump part
/// `a1` and the remainder `a2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandErrorSplit {
    pub a1: f64,
    pub a2: f64,
    pub h1_error_on_tilde: f64,
}

pub fn band_split(
    u: &ManufacturedSolution,
    field: &NodalField,
    band: &Band,
    tri: &Triangulation,
) -> Result<BandErrorSplit, AnalysisError> {
    band.validate_structure(tri).map_err(AnalysisError::BandInconsistent)?;
    let g = band.direction_g;
    let mut s = 0.0;
    for (i, &kt) in band.even_elements.iter().enumerate() {
        let gm = field.gradient(tri, band.odd_elements[i]);
        let gp = field.gradient(tri, band.odd_elements[i + 1]);
        let geo = tri.geom(kt);
        let jump = (gp - gm).dot(g);
        s += geo.area * jump * jump / (geo.sin_max_angle * geo.sin_max_angle);
    }
    let a1 = s.sqrt();
    let h1 = h1_error(u, field, tri, Some(&band.even_elements));
    Ok(BandErrorSplit {
        a1,
        a2: h1 - a1,
        h1_error_on_tilde: h1,
    })
}

/// Necessary-condition quantities of one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandNecessary {
    pub n: usize,
    pub length_l: f64,
    /// `min_i 1/sin(π − α̃_i)`.
    #[serde(with = "crate::serde_float")]
    pub min_inv_sin: f64,
    /// `min_i |K̃_i|`.
    #[serde(with = "crate::serde_float")]
    pub min_tilde_area: f64,
    /// `min 1/sin · min|K̃|^{1/2} · L · N^{−1/2}`.
    pub lhs: f64,
    /// `h² h̄^{−1/2} L^{1/2} / (4√2)` for the band's base and height.
    pub closed_form: f64,
    /// Range of `|K̃_i| / |K_i|` over neighbouring pairs.
    #[serde(with = "crate::serde_float::pair")]
    pub area_ratio_range: (f64, f64),
    /// Range of `sin α̃_i / sin α_{K_i}` over neighbouring pairs.
    #[serde(with = "crate::serde_float::pair")]
    pub sin_ratio_range: (f64, f64),
    /// `C_L · h^{2α/5}`, to be compared with `L`.
    pub length_threshold: f64,
    pub length_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub alpha: f64,
    pub c_l: f64,
    pub bands: Vec<BandNecessary>,
    /// `(Σ_b min sin⁻² · min|K̃| · L_b² / N_b)^{1/2}`.
    pub aggregate: f64,
    /// Root sum of squares of the per-band closed forms; equals `h² h̄^{−1} L / (4√2)` for `L/h̄` identical stacked bands.
    pub aggregate_closed_form: f64,
}

pub fn necessary_lhs(bands: &[Band], tri: &Triangulation, alpha: f64, c_l: f64) -> NecessaryReport {
    let s2 = 4.0 * 2f64.sqrt();
    let mut agg = 0.0;
    let mut out = Vec::with_capacity(bands.len());
    for b in bands {
        let n = b.n();
        let mut min_inv_sin = f64::INFINITY;
        let mut min_area = f64::INFINITY;
        let mut ar = (f64::INFINITY, f64::NEG_INFINITY);
        let mut sr = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, &kt) in b.even_elements.iter().enumerate() {
            let g = tri.geom(kt);
            min_inv_sin = min_inv_sin.min(1.0 / g.sin_max_angle);
            min_area = min_area.min(g.area);
            for &k in &b.odd_elements[i..i + 2] {
                let gk = tri.geom(k);
                let r = g.area / gk.area;
                ar = (ar.0.min(r), ar.1.max(r));
                let q = g.sin_max_angle / gk.sin_max_angle;
                sr = (sr.0.min(q), sr.1.max(q));
            }
        }
        let (lhs, contrib) = if n == 0 {
            (0.0, 0.0)
        } else {
            let l = b.length_l;
            (
                min_inv_sin * min_area.sqrt() * l / (n as f64).sqrt(),
                min_inv_sin * min_inv_sin * min_area * l * l / n as f64,
            )
        };
        agg += contrib;
        let (h, hb, l) = (b.base_h, b.height_hbar, b.length_l);
        let threshold = c_l * h.powf(2.0 * alpha / 5.0);
        out.push(BandNecessary {
            n,
            length_l: l,
            min_inv_sin,
            min_tilde_area: min_area,
            lhs,
            closed_form: h * h * l.sqrt() / (hb.sqrt() * s2),
            area_ratio_range: ar,
            sin_ratio_range: sr,
            length_threshold: threshold,
            length_ok: l >= threshold,
        });
    }
    // For m = L/h̄ identical stacked bands this is h² L / (4√2 h̄).
    let aggregate_closed_form = out.iter().map(|b| b.closed_form * b.closed_form).sum::<f64>().sqrt();
    NecessaryReport {
        alpha,
        c_l,
        bands: out,
        aggregate: agg.sqrt(),
        aggregate_closed_form,
    }
}

/// Measured sufficient-condition quantities and the overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientReport {
    pub alpha0: f64,
    /// Largest maximum angle over T¹ (0 if T¹ is empty).
    pub max_angle_t1: f64,
    pub t2_count: usize,
    pub isolated_count: usize,
    pub cluster_count: usize,
    pub sum_h2: f64,
    pub budget: f64,
    #[serde(with = "crate::serde_float")]
    pub min_support_gap: f64,
    #[serde(with = "crate::serde_float")]
    pub min_foreign_ratio: f64,
    pub max_cluster_ratio: f64,
    #[serde(with = "crate::serde_float")]
    pub min_cluster_separation_ratio: f64,
    pub offenders: Vec<Violation>,
    pub verdict: bool,
}

pub fn sufficient_check(
    tri: &Triangulation,
    classification: &MeshClassification,
    spec: &CorrectionSpec,
    clusters: &[Vec<usize>],
) -> SufficientReport {
    let max_angle_t1 = classification
        .t1
        .iter()
        .map(|&t| tri.geom(t).max_angle)
        .fold(0.0, f64::max);
    let c = &spec.checks;
    SufficientReport {
        alpha0: classification.alpha0,
        max_angle_t1,
        t2_count: classification.t2.len(),
        isolated_count: spec.isolated.len(),
        cluster_count: clusters.len(),
        sum_h2: c.sum_h2,
        budget: c.budget,
        min_support_gap: c.min_support_gap,
        min_foreign_ratio: c.min_foreign_ratio,
        max_cluster_ratio: c.max_cluster_ratio,
        min_cluster_separation_ratio: c.min_cluster_separation_ratio,
        offenders: spec.violations.clone(),
        verdict: spec.admissible && max_angle_t1 <= classification.alpha0,
    }
}

/// Three consecutive band elements: `K0 = (p0, p1, q0)`,
/// `K̃1 = (p1, q1, q0)`, `K1 = (p1, p2, q1)`, with `p0, p1, p2` on Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub p0: Point2,
    pub p1: Point2,
    pub p2: Point2,
    pub q0: Point2,
    pub q1: Point2,
}

impl Triplet {
    /// Random triplet whose middle element has angle `alpha_tilde` at `p1`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, alpha_tilde: f64) -> Self {
        let gap = std::f64::consts::PI - alpha_tilde;
        let split: f64 = rng.gen_range(0.1..0.9);
        let (b0, b1) = (gap * split, gap * (1.0 - split));
        let r0: f64 = rng.gen_range(0.5..2.0);
        let r1: f64 = rng.gen_range(0.5..2.0);
        let theta: f64 = rng.gen_range(-0.5..0.5);
        let rot = |p: Point2| {
            let (s, c) = theta.sin_cos();
            Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
        };
        let origin = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let q0 = Point2::new(-r0 * b0.cos(), r0 * b0.sin());
        let q1 = Point2::new(r1 * b1.cos(), r1 * b1.sin());
        let p0 = Point2::new(-rng.gen_range(0.5..2.0), 0.0);
        let p2 = Point2::new(rng.gen_range(0.5..2.0), 0.0);
        Self {
            p0: origin + rot(p0),
            p1: origin,
            p2: origin + rot(p2),
            q0: origin + rot(q0),
            q1: origin + rot(q1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// `|∇(Ũ1 − U1)|`
    pub lhs: f64,
    /// `|cos ξ| / sin(π − α̃) · |∇(U0 − U1)|`
    pub rhs: f64,
    /// Angle between `∇(U0 − U1)` and the edge `K0 ∩ K̃1`.
    pub xi: f64,
    pub alpha_tilde: f64,
    pub relative_gap: f64,
}

/// Builds `Ũ1` on `K̃1` from continuity with `U0` across `K0 ∩ K̃1` and with
/// `U1` across `K̃1 ∩ K1`, and compares `|∇(Ũ1 − U1)|` with the closed form.
/// `U0` is shifted by a constant so that both functions agree at `p1`.
pub fn three_element_identity_check(
    trip: &Triplet,
    u0: &LinearFn,
    u1: &LinearFn,
) -> Result<IdentityCheck, AnalysisError> {
    for (name, [a, b, c]) in [
        ("K0", [trip.p0, trip.p1, trip.q0]),
        ("K̃1", [trip.p1, trip.q1, trip.q0]),
        ("K1", [trip.p1, trip.p2, trip.q1]),
    ] {
        let g = tri_metrics(a, b, c)
            .map_err(|e| AnalysisError::InvalidConfiguration(format!("{name}: {e}")))?;
        if !g.ccw {
            return Err(AnalysisError::InvalidConfiguration(format!("{name} is not counter-clockwise")));
        }
    }
    let shift = u1.eval(trip.p1) - u0.eval(trip.p1);
    let u0v = |x: Point2| u0.eval(x) + shift;
    let tilde = [u1.eval(trip.p1), u1.eval(trip.q1), u0v(trip.q0)];
    let grad_tilde = linear_gradient([trip.p1, trip.q1, trip.q0], tilde);
    let lhs = (grad_tilde - u1.grad).norm();

    let v = trip.q0 - trip.p1;
    let alpha_tilde = angle_between(v, trip.q1 - trip.p1)
        .map_err(|e| AnalysisError::InvalidConfiguration(e.to_string()))?;
    let sin_a = v.cross(trip.q1 - trip.p1).abs() / (v.norm() * (trip.q1 - trip.p1).norm());
    let d: Vec2 = u0.grad - u1.grad;
    let (xi, rhs) = if d.norm() == 0.0 {
        (std::f64::consts::FRAC_PI_2, 0.0)
    } else {
        let xi = angle_between(d, v).unwrap();
        // |cos ξ|·|d| = |d·v|/|v|, evaluated without the cosine round-off
        (xi, d.dot(v).abs() / v.norm() / sin_a)
    };
    let scale = lhs.max(rhs);
    let relative_gap = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    Ok(IdentityCheck {
        lhs,
        rhs,
        xi,
        alpha_tilde,
        relative_gap,
    })
}

/// Least-squares fit `ln e = slope · ln h + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_rate(h: &[f64], err: &[f64]) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(RateFit {
        slope,
        intercept,
        residual,
    })
}
