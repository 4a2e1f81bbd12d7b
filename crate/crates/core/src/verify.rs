//! Randomized verification suites behind the `verify` command.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    band_split, band_trace, difference_bound_oracle, h1_error, necessary_lhs, proj_p1_residual,
    three_element_identity_check, Triplet,
};
use crate::fem::solve_poisson;
use crate::geometry::{tri_metrics, Point2, TriangleGeom, Vec2};
use crate::interp::{
    build_correction, correction_seminorm, corrected_interpolant, eval_phi, eval_psi, lagrange,
    modified_element_interp, CorrectionOptions, Condition, LinearFn,
};
use crate::mesh::classify;
use crate::meshgen::{babuska_aziz, single_band_mesh, subdivided_band_mesh, DEFAULT_ALPHA0};
use crate::quadrature::{integrate_triangle, Rule};
use crate::solution::ManufacturedSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Interp,
    Correction,
    Necessary,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identities" => Ok(Self::Identities),
            "interp" => Ok(Self::Interp),
            "correction" => Ok(Self::Correction),
            "necessary" => Ok(Self::Necessary),
            _ => Err(format!("unknown suite `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match suite {
        Suite::Identities => identities(&mut rng),
        Suite::Interp => interp(&mut rng),
        Suite::Correction => correction(&mut rng),
        Suite::Necessary => necessary(),
    };
    SuiteReport { suite, seed, checks }
}

/// Random triangle with maximum angle `alpha` at its first vertex, randomly
/// rotated, scaled and placed in `[-1, 1]²`.
pub fn random_obtuse_triangle<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> TriangleGeom {
    loop {
        let s: f64 = rng.gen_range(0.05..0.95);
        let (beta, gamma) = ((PI - alpha) * s, (PI - alpha) * (1.0 - s));
        let len: f64 = rng.gen_range(0.05..1.0);
        let t = len * gamma.sin() / alpha.sin();
        let b = Point2::ZERO;
        let c = Point2::new(len, 0.0);
        let a = Point2::new(t * beta.cos(), t * beta.sin());
        let theta: f64 = rng.gen_range(0.0..2.0 * PI);
        let (sn, cs) = theta.sin_cos();
        let shift = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let m = |p: Point2| Point2::new(cs * p.x - sn * p.y, sn * p.x + cs * p.y) + shift;
        if let Ok(g) = tri_metrics(m(a), m(b), m(c)) {
            return g;
        }
    }
}

fn identities(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for i in 0..1000 {
        // gaps π − α̃ log-uniform in [1e-6, 0.1π]
        let gap = if i == 0 { 1e-6 } else { (rng.gen_range((1e-6f64).ln()..(0.1 * PI).ln())).exp() };
        let trip = Triplet::random(rng, PI - gap);
        let lin = |rng: &mut ChaCha8Rng| LinearFn {
            value: rng.gen_range(-1.0..1.0),
            grad: Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            anchor: Point2::ZERO,
        };
        let (u0, u1) = (lin(rng), lin(rng));
        match three_element_identity_check(&trip, &u0, &u1) {
            Ok(r) => {
                worst = worst.max(r.relative_gap);
                if r.relative_gap > 1e-10 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    out.push(check(
        "three-element gradient identity",
        failures == 0,
        format!("1000 triplets, worst relative gap {worst:.3e}, {failures} failures"),
    ));

    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..100_000 {
        let n = rng.gen_range(2..40);
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (lhs, rhs) = difference_bound_oracle(&h, &a);
        if rhs > 0.0 {
            min_ratio = min_ratio.min(lhs / rhs);
        }
        if lhs < rhs * (1.0 - 1e-12) {
            violations += 1;
        }
    }
    out.push(check(
        "difference inequality",
        violations == 0,
        format!("1e5 samples, min lhs/rhs {min_ratio:.4}, {violations} violations"),
    ));

    let want = 1.0 / (6.0 * 5f64.sqrt());
    let got = proj_p1_residual(1.0, 1.0);
    let got2 = proj_p1_residual(2.0, 1.0);
    out.push(check(
        "projection residual",
        (got - want).abs() <= 1e-12 && (got2 - 2f64.powf(2.5) * want).abs() <= 1e-12 && proj_p1_residual(1.0, 0.0) == 0.0,
        format!("L=1: {got:.12}, L=2: {got2:.10}"),
    ));
    out
}

fn interp(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let u = ManufacturedSolution::quadratic();
    let s = u.seminorm_2inf();
    let (mut bad_delta, mut bad_h1) = (0, 0);
    let (mut worst_delta, mut worst_h1): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let alpha = rng.gen_range(0.9 * PI..0.9999 * PI);
        let g = random_obtuse_triangle(rng, alpha);
        let m = modified_element_interp(&u, &g);
        let x = m.frame.foot;
        let bound = (x.dist(g.b()) * x.dist(g.c()) + x.dist(g.a()).powi(2)) * s;
        worst_delta = worst_delta.max(m.delta.abs() / bound);
        if m.delta.abs() > bound {
            bad_delta += 1;
        }
        let gv = m.gradient(&g);
        let err = integrate_triangle(&g.vertices, g.area, Rule::EdgeMidpoint, |p| (u.grad(p) - gv).norm_sq()).sqrt();
        let bound = 13f64.sqrt() * g.diameter * s * g.area.sqrt();
        worst_h1 = worst_h1.max(err / bound);
        if err > bound {
            bad_h1 += 1;
        }
    }
    vec![
        check(
            "modified interpolation vertex perturbation",
            bad_delta == 0,
            format!("1000 triangles, worst |δ|/bound {worst_delta:.4}, {bad_delta} violations"),
        ),
        check(
            "modified interpolation H1 bound",
            bad_h1 == 0,
            format!("1000 triangles, worst error/bound {worst_h1:.4}, {bad_h1} violations"),
        ),
    ]
}

fn correction(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let (mut sup_phi, mut sup_psi): (f64, f64) = (0.0, 0.0);
    for _ in 0..100_000 {
        let r: f64 = rng.gen_range(1e-3..1.0);
        let phi_x = Vec2::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        let psi_x = Vec2::new(rng.gen_range(-2.0 * r..2.0 * r), rng.gen_range(-2.0 * r..2.0 * r));
        sup_phi = sup_phi.max(eval_phi(r, phi_x).unwrap().1.norm() * r);
        sup_psi = sup_psi.max(eval_psi(r, psi_x).unwrap().1.norm() * r);
    }
    let lim = 1.5 * (1.0 + 1e-9);
    out.push(check(
        "bump gradient bounds",
        sup_phi <= lim && sup_psi <= lim,
        format!("sup r|∇φ| = {sup_phi:.9}, sup r|∇ψ| = {sup_psi:.9}, limit 1.5"),
    ));

    let u = ManufacturedSolution::quadratic();
    let hbar = 1.0 / 512.0;
    let sd = subdivided_band_mesh(8, hbar).expect("valid parameters");
    let cls = classify(&sd.mesh, DEFAULT_ALPHA0);
    let spec = build_correction(&u, &sd.mesh, &cls, &[], CorrectionOptions::default()).expect("consistent input");
    out.push(check(
        "subdivided band correction admissible",
        spec.admissible && spec.bumps.len() == sd.tilde_elements.len(),
        format!("{} bumps, {} violations", spec.bumps.len(), spec.violations.len()),
    ));
    if spec.admissible {
        let field = corrected_interpolant(&u, &sd.mesh, &spec).expect("admissible");
        let lag = lagrange(&u, &sd.mesh);
        let mut worst: f64 = 0.0;
        for &t in &cls.t2 {
            let m = modified_element_interp(&u, sd.mesh.geom(t));
            let [a, b, c] = sd.mesh.abc(t);
            worst = worst
                .max((field.values[a] - u.u(sd.mesh.vertex(a)) - m.delta).abs())
                .max((field.values[b] - u.u(sd.mesh.vertex(b))).abs())
                .max((field.values[c] - u.u(sd.mesh.vertex(c))).abs());
        }
        out.push(check(
            "correction reproduces modified interpolant on T²",
            worst <= 1e-13,
            format!("worst vertex deviation {worst:.3e}"),
        ));
        let outside = (0..sd.mesh.num_vertices())
            .filter(|&v| spec.bumps.iter().all(|b| b.center.dist(sd.mesh.vertex(v)) >= b.outer_radius()))
            .all(|v| field.values[v] == lag.values[v]);
        out.push(check(
            "corrected interpolant equals Lagrange outside supports",
            outside,
            String::new(),
        ));
        let w1 = correction_seminorm(&u, &sd.mesh, &spec, &cls.t1);
        let bound = 6.0 * sd.mesh.domain_area().sqrt() * sd.mesh.h() * u.seminorm_2inf();
        out.push(check(
            "correction H1 seminorm on T¹",
            w1 <= bound,
            format!("|w|_1 = {w1:.4e}, bound {bound:.4e}"),
        ));
    }

    let sb = single_band_mesh(8, hbar).expect("valid parameters");
    let cls = classify(sb.mesh(), DEFAULT_ALPHA0);
    let spec = build_correction(&u, sb.mesh(), &cls, &[], CorrectionOptions::default()).expect("consistent input");
    let foreign = spec.violations.iter().any(|v| v.condition == Condition::ForeignVertices);
    out.push(check(
        "unsubdivided band rejected",
        !spec.admissible && foreign,
        format!("{} violations", spec.violations.len()),
    ));
    out
}

fn necessary() -> Vec<Check> {
    let u = ManufacturedSolution::quadratic();
    let mut out = Vec::new();
    for nx in [8usize, 16, 32] {
        let h = 1.0 / nx as f64;
        let sb = match single_band_mesh(nx, h.powi(3)) {
            Ok(sb) => sb,
            Err(e) => {
                out.push(check("single band generation", false, e.to_string()));
                continue;
            }
        };
        let (field, _) = match solve_poisson(sb.mesh(), &u) {
            Ok(f) => f,
            Err(e) => {
                out.push(check("single band solve", false, e.to_string()));
                continue;
            }
        };
        let band = sb.band();
        let tr = band_trace(&field, band, sb.mesh()).expect("generated band");
        let scale: f64 = tr.interval_lengths.iter().zip(&tr.wprime).map(|(h, w)| (h * w).abs()).sum();
        out.push(check(
            &format!("trace telescoping, h = 1/{nx}"),
            tr.weighted_sum.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE),
            format!("Σ h_i w'_i = {:.3e}, scale {scale:.3e}", tr.weighted_sum),
        ));
        let sp = band_split(&u, &field, band, sb.mesh()).expect("generated band");
        let direct = h1_error(&u, &field, sb.mesh(), Some(&band.even_elements));
        out.push(check(
            &format!("error split, h = 1/{nx}"),
            ((sp.a1 + sp.a2) - direct).abs() <= 1e-12 * direct,
            format!("a1 = {:.6e}, a2 = {:.6e}, error on K̃ = {direct:.6e}", sp.a1, sp.a2),
        ));
        let rep = necessary_lhs(std::slice::from_ref(band), sb.mesh(), 1.0, 1.0);
        let b = &rep.bands[0];
        out.push(check(
            &format!("necessary LHS vs closed form, h = 1/{nx}"),
            b.lhs >= b.closed_form,
            format!("lhs {:.6e}, closed form {:.6e}", b.lhs, b.closed_form),
        ));
    }
    let rm = babuska_aziz(8, 64).expect("valid parameters");
    let rep = necessary_lhs(&rm.bands, &rm.mesh, 1.0, 1.0);
    out.push(check(
        "multi-band aggregate vs closed form",
        rep.aggregate >= rep.aggregate_closed_form,
        format!("aggregate {:.6e}, closed form {:.6e}", rep.aggregate, rep.aggregate_closed_form),
    ));
    out
}
