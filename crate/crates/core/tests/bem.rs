//! Single-layer solver against the sphere's modal solution, the ellipsoid's
//! conductor potential, and solver-independent scattering identities.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use num_complex::Complex64;
use soft_scatter::bem::*;
use soft_scatter::farfield::ParamSurface;
use soft_scatter::mie::build_mie;
use soft_scatter::sphgrid::{l2_norm, Direction, SphereGrid};
use soft_scatter::Error;

/// Conductor potentials from `oracle/bem_values.py`.
const POTENTIAL_1_12_08: f64 = 0.96257473166185820973;
const POTENTIAL_1_1_15: f64 = 1.2912268228920121061;

fn dir(x: f64, y: f64, z: f64) -> Direction {
    Direction::new(x, y, z).unwrap()
}

fn rel_l2(a: &[Complex64], b: &[Complex64], grid: &SphereGrid) -> f64 {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(&d, grid).unwrap() / l2_norm(b, grid).unwrap()
}

#[test]
fn matrix_is_complex_symmetric() {
    let op = assemble(ParamSurface::ellipsoid(1.0, 1.2, 0.8).unwrap(), 2.0, 8, 16).unwrap();
    assert!(op.symmetry_defect() <= 1e-10);
    let m = op.matrix();
    assert!((m[(3, 40)] - m[(40, 3)]).norm() == 0.0);
    assert!(
        (m[(3, 40)].conj() - m[(40, 3)]).norm() > 0.0,
        "symmetric, not hermitian"
    );
}

#[test]
fn static_row_sums_equal_the_radius() {
    for a in [1.0, 1.7] {
        let op = assemble(ParamSurface::sphere(a).unwrap(), 1e-9, 8, 16).unwrap();
        for v in op.static_row_sums() {
            assert!((v - a).abs() <= 1e-10 * a, "{v} vs {a}");
        }
        // Applying the operator to a constant density reproduces ∫ g ≈ a in the k → 0 limit.
        let ones = vec![Complex64::new(1.0, 0.0); op.len()];
        for v in op.apply(&ones).unwrap() {
            assert!((v.re - a).abs() <= 1e-2 * a);
        }
    }
}

#[test]
fn conductor_density_gives_constant_potential_on_ellipsoids() {
    for (axes, v) in [
        ([1.0, 1.2, 0.8], POTENTIAL_1_12_08),
        ([1.0, 1.0, 1.5], POTENTIAL_1_1_15),
    ] {
        let s = ParamSurface::ellipsoid(axes[0], axes[1], axes[2]).unwrap();
        let op = assemble(s, 1e-9, 16, 32).unwrap();
        let sigma: Vec<Complex64> = op
            .quadrature()
            .points()
            .iter()
            .map(|x| {
                let q = (0..3).map(|i| x[i] * x[i] / axes[i].powi(4)).sum::<f64>();
                Complex64::new(1.0 / q.sqrt(), 0.0)
            })
            .collect();
        let total: f64 = sigma
            .iter()
            .zip(op.quadrature().weights())
            .map(|(s, w)| s.re * w)
            .sum();
        assert!((total - 4.0 * PI * axes[0] * axes[1] * axes[2]).abs() <= 1e-8);
        let worst = op
            .apply(&sigma)
            .unwrap()
            .iter()
            .map(|p| (p.re - v).abs())
            .fold(0.0, f64::max);
        assert!(
            worst <= 1e-2 * v,
            "{axes:?}: worst potential defect {worst:e}"
        );
    }
}

#[test]
fn sphere_matches_the_modal_solution() {
    let op = assemble(ParamSurface::sphere(1.0).unwrap(), 2.0, 24, 48).unwrap();
    let m = build_mie(1.0, 2.0).unwrap();
    let beta = SphereGrid::with_exactness(60).unwrap();
    for alpha in [dir(0.0, 0.0, 1.0), dir(0.6, -0.3, 0.2)] {
        let sol = op.solve_normal_derivative(&alpha).unwrap();
        assert!(sol.residual <= 1e-8);
        let exact = m.boundary_normal_derivative(op.quadrature().grid(), &alpha);
        let d: Vec<Complex64> = sol
            .trace
            .values()
            .iter()
            .zip(exact.values())
            .map(|(a, b)| a - b)
            .collect();
        let q = op.quadrature();
        let herr = q.l2_norm(&d).unwrap() / q.l2_norm(exact.values()).unwrap();
        assert!(herr <= 1e-2, "u_N error {herr:e}");
        let ff = op.far_field(&alpha, &beta).unwrap();
        let ferr = rel_l2(
            ff.values(),
            m.far_field_pattern(&alpha, &beta).values(),
            &beta,
        );
        assert!(ferr <= 1e-2, "far-field error {ferr:e}");
    }
}

#[test]
fn far_field_self_converges() {
    let s = ParamSurface::ellipsoid(1.0, 1.2, 0.8).unwrap();
    let alpha = dir(0.3, 0.1, -0.9);
    let beta = SphereGrid::with_exactness(50).unwrap();
    let fields: Vec<Vec<Complex64>> = [(8, 16), (12, 24), (16, 32), (24, 48)]
        .iter()
        .map(|&(t, p)| {
            assemble(s, 2.0, t, p)
                .unwrap()
                .far_field(&alpha, &beta)
                .unwrap()
                .values()
                .to_vec()
        })
        .collect();
    let reference = &fields[3];
    let gaps: Vec<f64> = fields[..3]
        .iter()
        .map(|f| rel_l2(f, reference, &beta))
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[2] <= 1e-2, "{gaps:?}");
}

#[test]
fn nearly_spherical_ellipsoid_is_close_to_the_sphere() {
    let op = assemble(
        ParamSurface::ellipsoid(1.0, 1.0, 1.001).unwrap(),
        2.0,
        16,
        32,
    )
    .unwrap();
    let alpha = dir(0.2, 0.3, 0.9);
    let beta = SphereGrid::with_exactness(50).unwrap();
    let ff = op.far_field(&alpha, &beta).unwrap();
    let mie = build_mie(1.0, 2.0)
        .unwrap()
        .far_field_pattern(&alpha, &beta);
    let err = rel_l2(ff.values(), mie.values(), &beta);
    assert!(err <= 5e-2, "{err:e}");
    assert!(err > 1e-5, "the perturbation should be visible: {err:e}");
}

#[test]
fn reciprocity_and_optical_theorem_on_an_ellipsoid() {
    let k = 2.0;
    let op = assemble(ParamSurface::ellipsoid(1.0, 1.2, 0.8).unwrap(), k, 16, 32).unwrap();
    let beta = SphereGrid::with_exactness(2 * (3 + 20) + 4).unwrap();
    let dirs = [
        dir(0.0, 0.0, 1.0),
        dir(0.7, -0.2, 0.4),
        dir(-0.3, 0.9, 0.1),
        dir(0.2, 0.2, -1.0),
    ];
    let amp = |b: &Direction, a: &Direction| {
        let sol = op.solve_normal_derivative(a).unwrap();
        let q = sol.trace.quadrature();
        let sum: Complex64 = q
            .points()
            .iter()
            .zip(q.weights())
            .zip(sol.trace.values())
            .map(|((s, w), h)| Complex64::from_polar(1.0, -k * b.dot_point(s)) * h * *w)
            .sum();
        -sum / (4.0 * PI)
    };
    let mut scale = 0.0_f64;
    let mut worst = 0.0_f64;
    for a in &dirs {
        for b in &dirs {
            let lhs = amp(b, a);
            let rhs = amp(&-*a, &-*b);
            scale = scale.max(lhs.norm());
            worst = worst.max((lhs - rhs).norm());
        }
    }
    assert!(
        worst <= 1e-2 * scale,
        "reciprocity defect {worst:e} vs max|A| {scale:e}"
    );

    for a in &dirs {
        let pattern = op.far_field(a, &beta).unwrap();
        let power = l2_norm(pattern.values(), &beta).unwrap().powi(2);
        let forward = amp(a, a).im;
        let rhs = k / (4.0 * PI) * power;
        let defect = (forward - rhs).abs() / rhs;
        assert!(defect <= 1e-2, "optical theorem defect {defect:e}");
    }
}

#[test]
fn condition_peak_localizes_the_first_eigenvalue() {
    let s = ParamSurface::sphere(1.0).unwrap();
    let step = 0.02;
    let ks: Vec<f64> = (0..16).map(|i| 3.0 + step * i as f64).collect();
    let sweep = condition_sweep(s, 10, 20, &ks).unwrap();
    let (kmax, _) = sweep
        .iter()
        .cloned()
        .fold((0.0, 0.0), |b, p| if p.1 > b.1 { p } else { b });
    assert!((kmax - PI).abs() <= step, "peak at {kmax}");
    let base = assemble(s, 2.0, 10, 20).unwrap().condition_estimate();
    let (kpeak, cpeak) = refine_condition_peak(s, 10, 20, kmax - step, kmax + step, 1e-8).unwrap();
    assert!((kpeak - PI).abs() <= 1e-2);
    assert!(cpeak >= 1e2 * base, "{cpeak:e} vs {base:e}");
}

#[test]
fn ill_conditioned_solve_is_refused_with_the_estimate() {
    let s = ParamSurface::sphere(1.0).unwrap();
    let (kpeak, cpeak) = refine_condition_peak(s, 8, 16, 3.1, 3.2, 1e-8).unwrap();
    let op = assemble(s, kpeak, 8, 16)
        .unwrap()
        .with_condition_limit(cpeak / 10.0);
    match op.solve_normal_derivative(&dir(0.0, 0.0, 1.0)) {
        Err(Error::IllConditioned { estimate }) => assert_eq!(estimate, op.condition_estimate()),
        other => panic!("expected refusal, got {other:?}"),
    }
    let (zero, distance) = op.eigen_distance().unwrap().unwrap();
    assert_eq!((zero.ell, zero.index), (0, 1));
    assert!((distance - (PI - kpeak).abs()).abs() <= 1e-12);
    assert!(distance < 2e-2, "coarse-grid shift {distance}");
}

#[test]
fn invalid_inputs() {
    let s = ParamSurface::sphere(1.0).unwrap();
    assert!(matches!(assemble(s, 0.0, 4, 8), Err(Error::Domain(_))));
    assert!(matches!(
        assemble(s, 1.0, 200, 100),
        Err(Error::Size { .. })
    ));
    let op = assemble(s, 1.0, 4, 8).unwrap();
    assert!(matches!(
        op.apply(&[Complex64::new(1.0, 0.0)]),
        Err(Error::Shape {
            expected: 32,
            got: 1
        })
    ));
    let e = assemble(ParamSurface::ellipsoid(1.0, 1.2, 0.8).unwrap(), 1.0, 4, 8).unwrap();
    assert!(e.eigen_distance().unwrap().is_none());
}
