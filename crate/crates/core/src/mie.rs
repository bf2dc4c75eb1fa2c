//! Scattering of a plane wave `e^{ikα·x}` by a sound-soft ball of radius `a`.
//!
//! Expanding the incident wave in Legendre modes and imposing `u = 0` on
//! `|x| = a` termwise gives
//!
//! ```text
//! u(x)   = e^{ikα·x} + Σ_ℓ (2ℓ+1) i^ℓ c_ℓ h_ℓ(k|x|) P_ℓ(α·x̂),   c_ℓ = -j_ℓ(ka) / h_ℓ(ka)
//! A(β,α) = (1/(ik)) Σ_ℓ (2ℓ+1) c_ℓ P_ℓ(β·α)
//! u_N(s) = (-i/(k a²)) Σ_ℓ (2ℓ+1) i^ℓ P_ℓ(α·s⁰) / h_ℓ(ka)
//! ```
//!
//! with `h_ℓ = h_ℓ^{(1)}`. The last line uses the Wronskian
//! `j_ℓ h_ℓ' - j_ℓ' h_ℓ = i/x²`. Modal sums stop at `L = ⌈ka⌉ + 20`.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::farfield::{BoundaryTrace, FarFieldPattern, ParamSurface, SurfaceQuadrature};
use crate::specfun::{
    derivatives_from_values, legendre_array_unchecked, sph_bessel_j_array, sph_hankel1_array,
};
use crate::sphgrid::{truncation_degree, Direction, SphereGrid};
use crate::{Error, Result};

fn i_pow(n: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][n % 4]
}

/// `-j / (j + iy)` without overflowing when `|y|` is huge.
fn reflection(j: f64, y: f64) -> Complex64 {
    if j == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if !y.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    // -j/(j + iy) = -1/(1 + i t), t = y/j
    let t = y / j;
    if t.abs() > 1e150 {
        return Complex64::new(0.0, 1.0 / t);
    }
    let d = 1.0 + t * t;
    Complex64::new(-1.0 / d, t / d)
}

/// Modal solution for a sound-soft ball.
#[derive(Debug, Clone)]
pub struct MieModel {
    radius: f64,
    k: f64,
    max_degree: usize,
    coeffs: Vec<Complex64>,
    hankel_ka: Vec<Complex64>,
}

/// Builds the modal solution for radius `a` and wavenumber `k`.
pub fn build_mie(a: f64, k: f64) -> Result<MieModel> {
    MieModel::new(a, k)
}

impl MieModel {
    pub fn new(a: f64, k: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain(format!(
                "sphere radius must be positive, got {a}"
            )));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        let max_degree = truncation_degree(k, a);
        let ka = k * a;
        let j = sph_bessel_j_array(max_degree, ka)?;
        let h = sph_hankel1_array(max_degree, ka)?;
        let coeffs = j
            .iter()
            .zip(&h)
            .map(|(j, h)| reflection(*j, h.im))
            .collect();
        Ok(Self {
            radius: a,
            k,
            max_degree,
            coeffs,
            hankel_ka: h,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Modal reflection coefficients `c_0..=c_L`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `A` as a function of `cos γ = β·α`.
    pub fn far_field_cos(&self, t: f64) -> Complex64 {
        let p = legendre_array_unchecked(self.max_degree, t.clamp(-1.0, 1.0));
        let sum: Complex64 = self
            .coeffs
            .iter()
            .zip(&p)
            .enumerate()
            .map(|(l, (c, p))| c * ((2 * l + 1) as f64 * p))
            .sum();
        sum / Complex64::new(0.0, self.k)
    }

    /// Scattering amplitude `A(β, α, k)`.
    pub fn far_field(&self, beta: &Direction, alpha: &Direction) -> Complex64 {
        self.far_field_cos(beta.dot(alpha))
    }

    pub fn far_field_pattern(&self, alpha: &Direction, grid: &SphereGrid) -> FarFieldPattern {
        let values = grid
            .nodes()
            .par_iter()
            .map(|b| self.far_field(b, alpha))
            .collect();
        FarFieldPattern::new(grid.clone(), values).expect("grid-sized samples")
    }

    fn check_exterior(&self, x: &[f64; 3]) -> Result<f64> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r.is_nan() || r < self.radius * (1.0 - 1e-14) {
            return Err(Error::Domain(format!(
                "point at radius {r} lies inside the ball of radius {}",
                self.radius
            )));
        }
        Ok(r)
    }

    /// Scattered field `v` and its radial derivative `v_r` at an exterior point.
    pub fn scattered_field(
        &self,
        x: &[f64; 3],
        alpha: &Direction,
    ) -> Result<(Complex64, Complex64)> {
        let r = self.check_exterior(x)?;
        let kr = self.k * r;
        let t = alpha.dot_point(x) / r;
        let p = legendre_array_unchecked(self.max_degree, t.clamp(-1.0, 1.0));
        let h = sph_hankel1_array(self.max_degree + 1, kr)?;
        let dh = derivatives_from_values(&h, kr);
        let mut v = Complex64::new(0.0, 0.0);
        let mut vr = Complex64::new(0.0, 0.0);
        for l in 0..=self.max_degree {
            let a = i_pow(l) * self.coeffs[l] * ((2 * l + 1) as f64 * p[l]);
            v += a * h[l];
            vr += a * dh[l];
        }
        Ok((v, vr * self.k))
    }

    /// Total field `u = e^{ikα·x} + v` at an exterior point.
    pub fn scattering_solution(&self, x: &[f64; 3], alpha: &Direction) -> Result<Complex64> {
        let (v, _) = self.scattered_field(x, alpha)?;
        Ok(Complex64::from_polar(1.0, self.k * alpha.dot_point(x)) + v)
    }

    /// `u_N` at the unit direction `s⁰` of a boundary point.
    pub fn normal_derivative_at(&self, s0: &Direction, alpha: &Direction) -> Complex64 {
        let p = legendre_array_unchecked(self.max_degree, alpha.dot(s0).clamp(-1.0, 1.0));
        let sum: Complex64 = (0..=self.max_degree)
            .map(|l| i_pow(l) * ((2 * l + 1) as f64 * p[l]) / self.hankel_ka[l])
            .sum();
        sum * Complex64::new(0.0, -1.0 / (self.k * self.radius * self.radius))
    }

    /// `u_N` sampled on the ball's surface, with grid nodes read as `s⁰`.
    pub fn boundary_normal_derivative(
        &self,
        grid: &SphereGrid,
        alpha: &Direction,
    ) -> BoundaryTrace {
        let quad = SurfaceQuadrature::new(
            ParamSurface::Sphere {
                radius: self.radius,
            },
            grid.clone(),
        );
        let values = grid
            .nodes()
            .par_iter()
            .map(|s| self.normal_derivative_at(s, alpha))
            .collect();
        BoundaryTrace::new(quad, values).expect("grid-sized samples")
    }

    /// Far-field slice `A(cos γ)` at `n` equispaced cosines in `[-1, 1]`.
    pub fn far_field_slice(&self, n: usize) -> Vec<(f64, Complex64)> {
        (0..n)
            .map(|i| {
                let t = if n == 1 {
                    1.0
                } else {
                    -1.0 + 2.0 * i as f64 / (n - 1) as f64
                };
                (t, self.far_field_cos(t))
            })
            .collect()
    }

    /// CSV with columns `cos_theta,re_A,im_A`.
    pub fn write_slice_csv<W: Write>(
        &self,
        mut w: W,
        n: usize,
        comment: Option<&str>,
    ) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "cos_theta,re_A,im_A")?;
        for (t, a) in self.far_field_slice(n) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", t, a.re, a.im)?;
        }
        Ok(())
    }
}
