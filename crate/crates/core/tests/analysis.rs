use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use degenfem::analysis::{
    band_split, band_trace, difference_bound_oracle, fit_rate, h1_error, l2_boundary_error, necessary_lhs,
    sufficient_check, three_element_identity_check, Triplet,
};
use degenfem::fem::solve_poisson;
use degenfem::interp::{build_correction, lagrange, CorrectionOptions, LinearFn, NodalField};
use degenfem::mesh::classify;
use degenfem::meshgen::{babuska_aziz, row_mesh, single_band_mesh, subdivided_band_mesh, unit_square_uniform, RowSpec};
use degenfem::{ManufacturedSolution, Point2, Triangulation, Vec2};

fn quadratic() -> ManufacturedSolution {
    ManufacturedSolution::quadratic()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn difference_inequality_holds(
        pairs in prop::collection::vec((1e-4f64..1.0, -10.0f64..10.0), 2..50)
    ) {
        let (h, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (lhs, rhs) = difference_bound_oracle(&h, &a);
        prop_assert!(lhs >= rhs * (1.0 - 1e-12), "{} < {}", lhs, rhs);
    }
}

#[test]
fn difference_oracle_alternating() {
    // N + 1 = 6 uniform intervals, a = ±1 alternating: Σ h a = 0 already
    let h = vec![1.0 / 6.0; 6];
    let a: Vec<f64> = (0..6).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let (lhs, rhs) = difference_bound_oracle(&h, &a);
    assert_relative_eq!(lhs, 20.0, max_relative = 1e-14);
    assert_relative_eq!(rhs, 1.0 / 5.0, max_relative = 1e-14);
    assert_eq!(difference_bound_oracle(&h, &[0.0; 6]), (0.0, 0.0));
}

#[test]
fn h1_error_matches_sampling() {
    let tri = Triangulation::build(
        vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 1.0)],
        vec![[0, 1, 2], [1, 3, 2]],
    )
    .unwrap();
    let u = quadratic();
    let field = lagrange(&u, &tri);
    let quad = h1_error(&u, &field, &tri, Some(&[0]));
    // ∫_K |(2x − 1, 2y − 1)|² over the reference triangle: split each grid
    // cell into two sub-triangles and sample at their centroids
    let n = 2000;
    let f = |x: f64, y: f64| (2.0 * x - 1.0).powi(2) + (2.0 * y - 1.0).powi(2);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n - i {
            s += f((i as f64 + 1.0 / 3.0) / n as f64, (j as f64 + 1.0 / 3.0) / n as f64);
            if i + j < n - 1 {
                s += f((i as f64 + 2.0 / 3.0) / n as f64, (j as f64 + 2.0 / 3.0) / n as f64);
            }
        }
    }
    let sampled = (s * 0.5 / (n * n) as f64).sqrt();
    assert_relative_eq!(quad, (1.0f64 / 3.0).sqrt(), max_relative = 1e-13);
    assert_relative_eq!(quad, sampled, max_relative = 1e-6);
}

#[test]
fn l2_boundary_error_examples() {
    let u = quadratic();
    let tri = unit_square_uniform(4).unwrap();
    let gamma: Vec<[usize; 2]> = (0..4)
        .map(|i| {
            let find = |x: f64| tri.vertices().iter().position(|p| *p == Point2::new(x, 0.5)).unwrap();
            [find(i as f64 / 4.0), find((i + 1) as f64 / 4.0)]
        })
        .collect();
    // along y = 1/2 the interpolation error of x² is (x − x_i)(x_{i+1} − x)
    let e = l2_boundary_error(&u, &lagrange(&u, &tri), &tri, &gamma);
    let h: f64 = 0.25;
    assert_relative_eq!(e, (h.powi(4) / 30.0).sqrt(), max_relative = 1e-12);

    let lin = ManufacturedSolution::linear(1.0, 2.0, -1.0);
    assert!(l2_boundary_error(&lin, &lagrange(&lin, &tri), &tri, &gamma) < 1e-14);

    let ns = [8usize, 16, 32];
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let tri = unit_square_uniform(n).unwrap();
            let (fem, _) = solve_poisson(&tri, &u).unwrap();
            let gamma: Vec<[usize; 2]> = (0..n)
                .map(|i| {
                    let find = |x: f64| {
                        tri.vertices()
                            .iter()
                            .position(|p| (p.x - x).abs() < 1e-12 && p.y == 0.5)
                            .unwrap()
                    };
                    [find(i as f64 / n as f64), find((i + 1) as f64 / n as f64)]
                })
                .collect();
            l2_boundary_error(&u, &fem, &tri, &gamma)
        })
        .collect();
    assert!(fit_rate(&hs, &errs).unwrap().slope >= 1.4, "{errs:?}");
}

#[test]
fn band_trace_examples() {
    let sb = single_band_mesh(8, 1.0 / 512.0).unwrap();
    let band = sb.band();
    let lin = ManufacturedSolution::linear(0.2, 1.5, -0.5);
    let tr = band_trace(&lagrange(&lin, sb.mesh()), band, sb.mesh()).unwrap();
    assert!(tr.wprime.iter().all(|w| w.abs() < 1e-12));
    let sp = band_split(&lin, &lagrange(&lin, sb.mesh()), band, sb.mesh()).unwrap();
    assert!(sp.a1 < 1e-9);

    let (fem, _) = solve_poisson(sb.mesh(), &quadratic()).unwrap();
    let tr = band_trace(&fem, band, sb.mesh()).unwrap();
    let max_w = tr.wprime.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    assert!(tr.weighted_sum.abs() <= 1e-10 * max_w.max(f64::MIN_POSITIVE));
    // slope jumps from per-element gradients
    let jumps: f64 = band
        .odd_elements
        .windows(2)
        .map(|w| {
            let d = fem.gradient(sb.mesh(), w[1]) - fem.gradient(sb.mesh(), w[0]);
            d.dot(band.direction_g).powi(2)
        })
        .sum();
    assert_relative_eq!(tr.slope_jumps_sq, jumps, max_relative = 1e-12);

    // chain: a1 ≥ min 1/sin · min|K̃|^{1/2} · (Σ jumps²)^{1/2}
    let sp = band_split(&quadratic(), &fem, band, sb.mesh()).unwrap();
    let rep = necessary_lhs(std::slice::from_ref(band), sb.mesh(), 1.0, 1.0);
    let b = &rep.bands[0];
    assert!(sp.a1 >= b.min_inv_sin * b.min_tilde_area.sqrt() * tr.slope_jumps_sq.sqrt() * (1.0 - 1e-12));
    assert_relative_eq!(sp.a1 + sp.a2, sp.h1_error_on_tilde, max_relative = 1e-14);
}

#[test]
fn necessary_lhs_examples() {
    let sb = single_band_mesh(8, 1.0 / 512.0).unwrap();
    let rep = necessary_lhs(std::slice::from_ref(sb.band()), sb.mesh(), 1.0, 1.0);
    let closed = (1.0 / 64.0) * 512f64.sqrt() / (4.0 * 2f64.sqrt());
    assert_relative_eq!(rep.bands[0].closed_form, closed, max_relative = 1e-14);
    assert!(rep.bands[0].lhs >= closed);

    let (h, hbar) = (1.0 / 8.0, 1.0 / 64.0);
    let rm = babuska_aziz(8, 64).unwrap();
    let rep = necessary_lhs(&rm.bands, &rm.mesh, 1.0, 1.0);
    assert_relative_eq!(rep.aggregate_closed_form, h * h / (hbar * 4.0 * 2f64.sqrt()), max_relative = 1e-12);
    assert!(rep.aggregate >= rep.aggregate_closed_form);

    // right isosceles elements: h̄ = h/2
    let rm = row_mesh(&RowSpec::uniform(16), 1.0 / 8.0).unwrap();
    let rep = necessary_lhs(&rm.bands, &rm.mesh, 1.0, 1.0);
    for b in &rep.bands {
        assert!(b.lhs.is_finite() && b.lhs < 1.0);
        assert_relative_eq!(b.min_inv_sin, 1.0, max_relative = 1e-12);
    }
}

#[test]
fn sufficient_check_examples() {
    let u = quadratic();
    let opts = CorrectionOptions::default();

    let tri = unit_square_uniform(8).unwrap();
    let cls = classify(&tri, 0.9 * PI);
    let spec = build_correction(&u, &tri, &cls, &[], opts).unwrap();
    let rep = sufficient_check(&tri, &cls, &spec, &[]);
    assert!(rep.verdict && rep.t2_count == 0);

    let sd = subdivided_band_mesh(8, 1.0 / 512.0).unwrap();
    let cls = classify(&sd.mesh, 0.9 * PI);
    let spec = build_correction(&u, &sd.mesh, &cls, &[], opts).unwrap();
    let rep = sufficient_check(&sd.mesh, &cls, &spec, &[]);
    assert!(rep.verdict, "{:?}", rep.offenders);
    assert!(rep.sum_h2 <= rep.budget);

    let sb = single_band_mesh(8, 1.0 / 512.0).unwrap();
    let cls = classify(sb.mesh(), 0.9 * PI);
    let spec = build_correction(&u, sb.mesh(), &cls, &[], opts).unwrap();
    let rep = sufficient_check(sb.mesh(), &cls, &spec, &[]);
    assert!(!rep.verdict && !rep.offenders.is_empty());
}

#[test]
fn identity_with_orthogonal_gradient_jump() {
    let trip = Triplet {
        p0: Point2::new(-1.0, 0.0),
        p1: Point2::new(0.0, 0.0),
        p2: Point2::new(1.0, 0.0),
        q0: Point2::new(-0.8, 0.05),
        q1: Point2::new(0.7, 0.04),
    };
    let v = trip.q0 - trip.p1;
    let u1 = LinearFn {
        value: 0.3,
        grad: Vec2::new(0.5, -1.0),
        anchor: Point2::ZERO,
    };
    // ∇(U0 − U1) ⊥ v
    let u0 = LinearFn {
        grad: u1.grad + v.perp() * 2.0,
        ..u1
    };
    let r = three_element_identity_check(&trip, &u0, &u1).unwrap();
    assert!(r.rhs < 1e-15 && r.lhs < 1e-12, "{r:?}");
    assert_relative_eq!(r.xi, PI / 2.0, epsilon = 1e-12);
}

#[test]
fn band_errors_on_mismatched_mesh() {
    let sb = single_band_mesh(8, 1.0 / 512.0).unwrap();
    let other = unit_square_uniform(4).unwrap();
    let field = NodalField::new(vec![0.0; other.num_vertices()]);
    assert!(band_trace(&field, sb.band(), &other).is_err());
}
