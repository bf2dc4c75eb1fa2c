//! Real-argument special functions.
//!
//! Spherical harmonics use the orthonormal complex convention with the
//! Condon–Shortley phase:
//!
//! ```text
//! Y_lm(θ, φ) = sqrt((2l+1)/(4π) · (l-m)!/(l+m)!) · P_l^m(cos θ) · e^{imφ}
//! P_l^m(t)   = (-1)^m (1-t²)^{m/2} d^m/dt^m P_l(t)
//! Y_l,-m     = (-1)^m conj(Y_lm)
//! ```
//!
//! so that `∫ Y_lm conj(Y_l'm') = δ_ll' δ_mm'` over the unit sphere. Every
//! module of the crate relies on this single convention.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::sphgrid::Direction;
use crate::{Error, Result};

/// Largest degree accepted by the Bessel and harmonic routines.
pub const MAX_DEGREE: usize = 200;

/// A spherical-harmonic index `(ℓ, m)` with `|m| ≤ ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicIndex {
    ell: usize,
    m: i64,
}

impl HarmonicIndex {
    pub fn new(ell: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > ell {
            return Err(Error::Domain(format!(
                "harmonic order m={m} exceeds degree {ell}"
            )));
        }
        if ell > MAX_DEGREE {
            return Err(Error::UnsupportedDegree {
                degree: ell,
                cap: MAX_DEGREE,
            });
        }
        Ok(Self { ell, m })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    /// Position in an ℓ-major, m-inner table: `ℓ² + ℓ + m`.
    pub fn flat(&self) -> usize {
        ((self.ell * self.ell + self.ell) as i64 + self.m) as usize
    }

    /// All indices with degree `≤ lmax`, ℓ-major then m ascending.
    pub fn up_to(lmax: usize) -> impl Iterator<Item = HarmonicIndex> {
        (0..=lmax)
            .flat_map(|ell| (-(ell as i64)..=ell as i64).map(move |m| HarmonicIndex { ell, m }))
    }
}

/// A positive zero of `j_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselZero {
    pub ell: usize,
    /// 1-based position among the positive zeros.
    pub index: usize,
    pub x: f64,
}

fn check_degree(ell: usize) -> Result<()> {
    if ell > MAX_DEGREE {
        Err(Error::UnsupportedDegree {
            degree: ell,
            cap: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        Err(Error::Domain(format!(
            "spherical Bessel argument must be finite and non-negative, got {x}"
        )))
    } else {
        Ok(())
    }
}

/// `j_0(x), …, j_lmax(x)`.
///
/// Upward recurrence while `lmax ≤ x`; otherwise Miller's downward recurrence
/// normalised with the sum rule `Σ (2n+1) j_n(x)² = 1`, which stays accurate
/// near the zeros of `j_0`.
pub fn sph_bessel_j_array(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(lmax)?;
    check_argument(x)?;
    let mut out = vec![0.0; lmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let (s, c) = x.sin_cos();
    if (lmax as f64) <= x {
        out[0] = s / x;
        if lmax >= 1 {
            out[1] = s / (x * x) - c / x;
        }
        for n in 1..lmax {
            out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        }
        return Ok(out);
    }

    let top = lmax.max(x.ceil() as usize);
    let start = top + 20 + (40.0 * top.max(1) as f64).sqrt().ceil() as usize;
    let mut f = vec![0.0; start + 2];
    f[start] = 1.0;
    for n in (1..=start).rev() {
        f[n - 1] = (2 * n + 1) as f64 / x * f[n] - f[n + 1];
        if f[n - 1].abs() > 1e250 {
            for v in f[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let peak = f.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let sum: f64 = f
        .iter()
        .enumerate()
        .map(|(n, v)| (2 * n + 1) as f64 * (v / peak) * (v / peak))
        .sum();
    let mut scale = 1.0 / (peak * sum.sqrt());
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let flip = if j0.abs() >= j1.abs() {
        j0 * f[0] < 0.0
    } else {
        j1 * f[1] < 0.0
    };
    if flip {
        scale = -scale;
    }
    for (o, v) in out.iter_mut().zip(f.iter()) {
        *o = v * scale;
    }
    Ok(out)
}

/// Spherical Bessel function of the first kind `j_ℓ(x)`.
pub fn sph_bessel_j(ell: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_j_array(ell, x)?[ell])
}

/// `y_0(x), …, y_lmax(x)` by upward recurrence (stable for the Neumann family).
pub fn sph_bessel_y_array(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(lmax)?;
    check_argument(x)?;
    if x == 0.0 {
        return Err(Error::SingularArgument("y_l is singular at x = 0".into()));
    }
    let (s, c) = x.sin_cos();
    let mut out = vec![0.0; lmax + 1];
    out[0] = -c / x;
    if lmax >= 1 {
        out[1] = -c / (x * x) - s / x;
    }
    for n in 1..lmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    Ok(out)
}

pub fn sph_bessel_y(ell: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_y_array(ell, x)?[ell])
}

/// `h_ℓ^{(1)}(x) = j_ℓ(x) + i y_ℓ(x)` for `ℓ = 0..=lmax`.
pub fn sph_hankel1_array(lmax: usize, x: f64) -> Result<Vec<Complex64>> {
    if x == 0.0 {
        return Err(Error::SingularArgument(
            "h_l^(1) is singular at x = 0".into(),
        ));
    }
    let j = sph_bessel_j_array(lmax, x)?;
    let y = sph_bessel_y_array(lmax, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(j, y)| Complex64::new(j, y))
        .collect())
}

pub fn sph_hankel1(ell: usize, x: f64) -> Result<Complex64> {
    Ok(sph_hankel1_array(ell, x)?[ell])
}

/// Derivatives from values: `f_ℓ' = f_{ℓ-1} - (ℓ+1)/x f_ℓ`, `f_0' = -f_1`.
///
/// `values` must hold degrees `0..=lmax+1`; the result holds `0..=lmax`.
pub fn derivatives_from_values<T>(values: &[T], x: f64) -> Vec<T>
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Neg<Output = T>,
{
    let lmax = values.len() - 2;
    (0..=lmax)
        .map(|n| {
            if n == 0 {
                -values[1]
            } else {
                values[n - 1] - values[n] * ((n + 1) as f64 / x)
            }
        })
        .collect()
}

pub fn sph_bessel_j_derivative(ell: usize, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if ell == 1 { 1.0 / 3.0 } else { 0.0 });
    }
    let j = sph_bessel_j_array(ell + 1, x)?;
    Ok(derivatives_from_values(&j, x)[ell])
}

pub fn sph_hankel1_derivative(ell: usize, x: f64) -> Result<Complex64> {
    let h = sph_hankel1_array(ell + 1, x)?;
    Ok(derivatives_from_values(&h, x)[ell])
}

/// Legendre polynomials `P_0(t), …, P_lmax(t)`; `t` must already lie in `[-1, 1]`.
pub(crate) fn legendre_array_unchecked(lmax: usize, t: f64) -> Vec<f64> {
    let mut p = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = t;
    }
    for n in 1..lmax {
        p[n + 1] = ((2 * n + 1) as f64 * t * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
    }
    p
}

fn clamp_cosine(t: f64) -> Result<f64> {
    if !t.is_finite() || t.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "Legendre argument {t} outside [-1, 1]"
        )));
    }
    Ok(t.clamp(-1.0, 1.0))
}

pub fn legendre_array(lmax: usize, t: f64) -> Result<Vec<f64>> {
    Ok(legendre_array_unchecked(lmax, clamp_cosine(t)?))
}

/// Legendre polynomial `P_ℓ(t)` by the three-term recurrence.
pub fn legendre_p(ell: usize, t: f64) -> Result<f64> {
    Ok(legendre_array(ell, t)?[ell])
}

/// Orthonormalised associated Legendre functions `P̄_ℓ^m` (Condon–Shortley
/// phase included), such that `Y_ℓm(θ, φ) = P̄_ℓ^m(cos θ) e^{imφ}` for `m ≥ 0`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    lmax: usize,
    values: Vec<f64>,
}

impl LegendreTable {
    /// Table at `cos θ = t`, `sin θ = s ≥ 0`, both supplied to keep accuracy near the poles.
    pub fn new(lmax: usize, t: f64, s: f64) -> Self {
        let mut values = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
        let mut pmm = 1.0 / (4.0 * PI).sqrt();
        for m in 0..=lmax {
            if m > 0 {
                pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
            }
            values[Self::slot(m, m)] = pmm;
            if m == lmax {
                break;
            }
            let mut prev2 = pmm;
            let mut prev1 = ((2 * m + 3) as f64).sqrt() * t * pmm;
            values[Self::slot(m + 1, m)] = prev1;
            for l in m + 2..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let cur = a * (t * prev1 - b * prev2);
                values[Self::slot(l, m)] = cur;
                prev2 = prev1;
                prev1 = cur;
            }
        }
        Self { lmax, values }
    }

    fn slot(l: usize, m: usize) -> usize {
        l * (l + 1) / 2 + m
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// `P̄_ℓ^m` for `0 ≤ m ≤ ℓ ≤ lmax`.
    pub fn get(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m <= l && l <= self.lmax);
        self.values[Self::slot(l, m)]
    }
}

/// Orthonormal complex spherical harmonic `Y_ℓm` at a direction.
pub fn sph_harmonic(idx: HarmonicIndex, dir: &Direction) -> Complex64 {
    let (ell, m) = (idx.ell(), idx.m());
    let mabs = m.unsigned_abs() as usize;
    let [x, y, z] = dir.xyz();
    let s = x.hypot(y);
    let table = LegendreTable::new(ell, z, s);
    let phase = if s > 0.0 {
        Complex64::new(x / s, y / s)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let positive = phase.powi(mabs as i32) * table.get(ell, mabs);
    if m >= 0 {
        positive
    } else if mabs.is_multiple_of(2) {
        positive.conj()
    } else {
        -positive.conj()
    }
}

fn j_and_derivative(ell: usize, x: f64) -> (f64, f64) {
    let j = sph_bessel_j_array(ell + 1, x).expect("degree validated by caller");
    let d = derivatives_from_values(&j, x);
    (j[ell], d[ell])
}

/// Root of `j_ℓ` inside a sign-changing bracket: bisection down to a narrow
/// interval, then safeguarded Newton.
fn refine_zero(ell: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = j_and_derivative(ell, lo).0;
    for _ in 0..200 {
        if hi - lo <= 1e-3 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = j_and_derivative(ell, mid).0;
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..60 {
        let (f, df) = j_and_derivative(ell, x);
        if f == 0.0 {
            return x;
        }
        if (f < 0.0) == (flo < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}

/// First `count` positive zeros of `j_ℓ`.
///
/// Starts from the zeros `nπ` of `j_0` and walks up in degree: the `n`-th zero
/// of `j_{ℓ+1}` lies strictly between the `n`-th and `(n+1)`-th zeros of `j_ℓ`.
pub fn bessel_zeros(ell: usize, count: usize) -> Result<Vec<BesselZero>> {
    check_degree(ell)?;
    if count == 0 {
        return Err(Error::Domain("zero count must be at least 1".into()));
    }
    let mut zeros: Vec<f64> = (1..=count + ell).map(|n| n as f64 * PI).collect();
    for l in 1..=ell {
        zeros = zeros
            .windows(2)
            .map(|w| refine_zero(l, w[0], w[1]))
            .collect();
    }
    Ok(zeros
        .into_iter()
        .enumerate()
        .map(|(i, x)| BesselZero {
            ell,
            index: i + 1,
            x,
        })
        .collect())
}

/// Positive zeros of `j_ℓ` lying in `[lo, hi]`.
pub fn bessel_zeros_in(ell: usize, lo: f64, hi: f64) -> Result<Vec<BesselZero>> {
    check_degree(ell)?;
    // The n-th zero of j_l exceeds nπ, so hi/π + 1 zeros always reach past hi.
    let count = (hi / PI).floor() as usize + 1;
    Ok(bessel_zeros(ell, count)?
        .into_iter()
        .filter(|z| z.x >= lo && z.x <= hi)
        .collect())
}

/// The zero of some `j_ℓ` (`ℓ ≤ lmax`) nearest to `x`.
pub fn nearest_bessel_zero(lmax: usize, x: f64) -> Result<Option<BesselZero>> {
    let mut best: Option<BesselZero> = None;
    for ell in 0..=lmax {
        for z in bessel_zeros_in(ell, 0.0, x + PI)? {
            if best.is_none_or(|b| (z.x - x).abs() < (b.x - x).abs()) {
                best = Some(z);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_at_pi_and_origin() {
        assert!(sph_bessel_j(0, PI).unwrap().abs() < 1e-15);
        assert_eq!(sph_bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(sph_bessel_j(4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn degree_cap_is_enforced() {
        assert!(matches!(
            sph_bessel_j(201, 1.0),
            Err(Error::UnsupportedDegree { .. })
        ));
        assert!(sph_bessel_j(200, 1.0).is_ok());
    }

    #[test]
    fn hankel_rejects_zero() {
        assert!(matches!(
            sph_hankel1(0, 0.0),
            Err(Error::SingularArgument(_))
        ));
    }

    #[test]
    fn hankel0_closed_form() {
        for &x in &[0.1, 1.0, 3.7, 25.0] {
            let expected = -Complex64::i() * Complex64::new(0.0, x).exp() / x;
            let got = sph_hankel1(0, x).unwrap();
            assert!((got - expected).norm() <= 1e-15 * expected.norm());
        }
    }

    #[test]
    fn legendre_small_cases() {
        for l in 0..30 {
            assert!((legendre_p(l, 1.0).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((legendre_p(2, 0.0).unwrap() + 0.5).abs() < 1e-16);
        assert!(matches!(legendre_p(3, 1.1), Err(Error::Domain(_))));
        assert!(legendre_p(3, 1.0 + 1e-13).is_ok());
    }

    #[test]
    fn y00_is_constant() {
        let idx = HarmonicIndex::new(0, 0).unwrap();
        for d in [
            Direction::from_angles(0.3, 1.0),
            Direction::from_angles(2.0, 5.0),
        ] {
            let y = sph_harmonic(idx, &d);
            assert!((y.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-16 && y.im == 0.0);
        }
    }

    #[test]
    fn invalid_index() {
        assert!(HarmonicIndex::new(2, 3).is_err());
        assert!(HarmonicIndex::new(2, -2).is_ok());
    }

    #[test]
    fn flat_index_is_ell_major() {
        let flat: Vec<usize> = HarmonicIndex::up_to(3).map(|i| i.flat()).collect();
        assert_eq!(flat, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn j0_zeros_are_multiples_of_pi() {
        let z = bessel_zeros(0, 2).unwrap();
        assert!((z[0].x - PI).abs() <= 1e-13 * PI);
        assert!((z[1].x - 2.0 * PI).abs() <= 2e-13 * PI);
    }

    #[test]
    fn zero_count_must_be_positive() {
        assert!(bessel_zeros(1, 0).is_err());
    }
}
