#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use num_complex::Complex64;
use soft_scatter::farfield::*;
use soft_scatter::mie::build_mie;
use soft_scatter::specfun::{bessel_zeros, sph_bessel_j, sph_harmonic, HarmonicIndex};
use soft_scatter::sphgrid::{truncation_degree, Direction, HarmonicCoeffs, SphereGrid};

const J3_AT_2: f64 = 0.060722097662874828461;
const ANNIHILATION_AT_2: f64 = 0.33958965553081805212;

fn minus_i_pow(ell: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ][ell % 4]
}

fn idx(l: usize, m: i64) -> HarmonicIndex {
    HarmonicIndex::new(l, m).unwrap()
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn j3_zero() -> f64 {
    bessel_zeros(3, 1).unwrap()[0].x
}

#[test]
fn harmonic_trace_maps_to_bessel_weighted_harmonic() {
    let (a, k) = (1.3, 2.0);
    let beta = SphereGrid::with_exactness(20).unwrap();
    for (l, m) in [(0, 0), (1, -1), (3, 1), (4, 2), (6, -5)] {
        let i = idx(l, m);
        let need = 2 * truncation_degree(k, a) + l;
        let quad = SurfaceQuadrature::new(
            ParamSurface::sphere(a).unwrap(),
            SphereGrid::with_exactness(need).unwrap(),
        );
        let trace: Vec<Complex64> = quad
            .grid()
            .nodes()
            .iter()
            .map(|s| sph_harmonic(i, s))
            .collect();
        let got = amplitude_from_boundary(&quad, &trace, k, &beta).unwrap();
        let factor = -minus_i_pow(l) * a * a * sph_bessel_j(l, k * a).unwrap();
        let expected: Vec<Complex64> = beta
            .nodes()
            .iter()
            .map(|b| factor * sph_harmonic(i, b))
            .collect();
        let err = max_gap(got.values(), &expected);
        assert!(err <= 1e-10, "({l},{m}): {err:e}");
    }
}

#[test]
fn boundary_amplitude_is_stable_under_refinement() {
    let m = build_mie(1.0, 2.0).unwrap();
    let alpha = Direction::new(0.4, 0.2, -0.9).unwrap();
    let beta = SphereGrid::with_exactness(60).unwrap();
    let base = SphereGrid::with_exactness(2 * m.max_degree()).unwrap();
    let fine = SphereGrid::new(2 * base.n_theta(), 2 * base.n_phi()).unwrap();
    let coarse_a = m
        .boundary_normal_derivative(&base, &alpha)
        .far_field(2.0, &beta)
        .unwrap();
    let fine_a = m
        .boundary_normal_derivative(&fine, &alpha)
        .far_field(2.0, &beta)
        .unwrap();
    assert!(max_gap(coarse_a.values(), fine_a.values()) <= 1e-10);
    let closed = m.far_field_pattern(&alpha, &beta);
    assert!(max_gap(coarse_a.values(), closed.values()) <= 1e-8);
}

#[test]
fn pattern_samples_and_coefficients_agree() {
    let m = build_mie(1.0, 2.0).unwrap();
    let grid = SphereGrid::with_exactness(2 * m.max_degree()).unwrap();
    let p = m
        .far_field_pattern(&Direction::new(0.0, 1.0, 1.0).unwrap(), &grid)
        .with_coeffs(m.max_degree())
        .unwrap();
    assert!(p.coefficient_consistency().unwrap() <= 1e-10);
}

#[test]
fn herglotz_is_diagonal_on_harmonics() {
    let k = 2.5;
    let points: [[f64; 3]; 4] = [
        [0.1, 0.2, 0.3],
        [0.0, 0.0, -0.9],
        [0.7, -0.4, 0.2],
        [1.1, 0.3, -0.5],
    ];
    for (l, m) in [(0, 0), (2, 1), (3, -3), (5, 0), (7, 4)] {
        let i = idx(l, m);
        let f = HarmonicCoeffs::single(i, Complex64::new(1.0, 0.0));
        for x in points {
            let r: f64 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let x0 = Direction::new(x[0], x[1], x[2]).unwrap();
            let expected =
                minus_i_pow(l) * 4.0 * PI * sph_bessel_j(l, k * r).unwrap() * sph_harmonic(i, &x0);
            let got = herglotz(&f, k, &x).unwrap();
            assert!(
                (got - expected).norm() <= 1e-10,
                "({l},{m}) at {x:?}: {got} vs {expected}"
            );
        }
    }
}

#[test]
fn herglotz_from_samples_matches_coefficients_and_refines() {
    let k = 2.0;
    let x = [0.3, -0.6, 0.5];
    let mut f = HarmonicCoeffs::zeros(4);
    f.set(idx(2, 0), Complex64::new(0.5, 0.1));
    f.set(idx(4, -3), Complex64::new(-0.2, 0.9));
    let g1 = SphereGrid::with_exactness(2 * truncation_degree(k, 1.0)).unwrap();
    let g2 = SphereGrid::new(2 * g1.n_theta(), 2 * g1.n_phi()).unwrap();
    let w1 = herglotz_samples(&g1.sample(|d| f.evaluate(d)), &g1, k, &x).unwrap();
    let w2 = herglotz_samples(&g2.sample(|d| f.evaluate(d)), &g2, k, &x).unwrap();
    let wc = herglotz(&f, k, &x).unwrap();
    assert!((w1 - w2).norm() <= 1e-11);
    assert!((w1 - wc).norm() <= 1e-11);
}

#[test]
fn herglotz_vanishes_on_the_sphere_at_the_eigenvalue() {
    let k = j3_zero();
    let f = HarmonicCoeffs::single(idx(3, 1), Complex64::new(1.0, 0.0));
    let quad =
        SurfaceQuadrature::with_resolution(ParamSurface::sphere(1.0).unwrap(), 16, 32).unwrap();
    let worst = annihilation_residual(&f, &quad, k).unwrap();
    assert!(worst <= 1e-10 * 4.0 * PI, "max |w| on S = {worst:e}");
    // Inside the ball the same field is nonzero.
    let inner = herglotz(&f, k, &[0.3, 0.2, 0.4]).unwrap();
    assert!(inner.norm() > 1e-2);
}

#[test]
fn annihilation_residual_away_from_the_eigenvalue() {
    let i = idx(3, 1);
    let f = HarmonicCoeffs::single(i, Complex64::new(1.0, 0.0));
    let quad =
        SurfaceQuadrature::with_resolution(ParamSurface::sphere(1.0).unwrap(), 40, 80).unwrap();
    let got = annihilation_residual(&f, &quad, 2.0).unwrap();
    let node_peak = quad
        .grid()
        .nodes()
        .iter()
        .map(|s| sph_harmonic(i, s).norm())
        .fold(0.0, f64::max);
    let expected = 4.0 * PI * J3_AT_2 * node_peak;
    assert!((got - expected).abs() <= 1e-10, "{got} vs {expected}");
    assert!(got > 0.01);
    assert!(
        (ANNIHILATION_AT_2 * (1.0 - 5e-3)..=ANNIHILATION_AT_2).contains(&got),
        "{got}"
    );
    let zero = HarmonicCoeffs::zeros(3);
    assert_eq!(annihilation_residual(&zero, &quad, 2.0).unwrap(), 0.0);
}

#[test]
fn helmholtz_residual_is_second_order() {
    let f = HarmonicCoeffs::single(idx(2, 0), Complex64::new(1.0, 0.0));
    let x = [0.1, 0.2, 0.3];
    let w = herglotz(&f, 2.0, &x).unwrap().norm();
    let r1 = helmholtz_residual(&f, 2.0, &x, 1e-3).unwrap();
    let r2 = helmholtz_residual(&f, 2.0, &x, 5e-4).unwrap();
    assert!(r1 <= 1e-4 * w, "residual {r1:e}, |w| = {w:e}");
    let ratio = r1 / r2;
    assert!((3.9..4.1).contains(&ratio), "halving ratio {ratio}");
    assert!(helmholtz_residual(&f, 2.0, &x, 0.0).is_err());
}

#[test]
fn trace_csv_layout() {
    let quad =
        SurfaceQuadrature::with_resolution(ParamSurface::ellipsoid(1.0, 1.2, 0.8).unwrap(), 2, 4)
            .unwrap();
    let values = vec![Complex64::new(0.5, -1.5); quad.len()];
    let trace = BoundaryTrace::new(quad, values).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf, None).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,phi,re_h,im_h"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!((row[2], row[3]), (0.5, -1.5));
    assert_eq!(lines.count(), 7);
}

#[test]
fn stencil_laplacian_equals_direct_differences() {
    let f = HarmonicCoeffs::single(idx(3, -2), Complex64::new(0.3, 0.8));
    let (x, h) = ([0.2, -0.1, 0.4], 2e-2);
    let w = HerglotzEvaluator::from_coeffs(&f, 3.0, 1.0).unwrap();
    let mut direct = w.eval(&x).unwrap() * -6.0;
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut y = x;
            y[axis] += sign * h;
            direct += w.eval(&y).unwrap();
        }
    }
    direct /= h * h;
    let got = w.stencil_laplacian(&x, h).unwrap();
    assert!(
        (got - direct).norm() <= 1e-9 * direct.norm(),
        "{got} vs {direct}"
    );
}
