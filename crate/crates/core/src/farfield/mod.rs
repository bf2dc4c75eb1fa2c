//! The far-field map from boundary normal derivatives to scattering amplitudes,
//! and Herglotz wave functions `w(x) = ∫ e^{-ikβ·x} f(β) dβ`.

mod surface;

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

pub use surface::{BoundaryTrace, ParamSurface, SurfaceQuadrature};

use crate::sphgrid::{analyze, synthesize_function, truncation_degree, HarmonicCoeffs, SphereGrid};
use crate::{Error, Result};

/// Scattering amplitude `A(β)` for one incident direction, sampled on a β-grid.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    grid: SphereGrid,
    values: Vec<Complex64>,
    coeffs: Option<HarmonicCoeffs>,
}

impl FarFieldPattern {
    pub fn new(grid: SphereGrid, values: Vec<Complex64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self {
            grid,
            values,
            coeffs: None,
        })
    }

    /// Attaches the harmonic coefficients up to `lmax`.
    pub fn with_coeffs(mut self, lmax: usize) -> Result<Self> {
        self.coeffs = Some(analyze(&self.values, &self.grid, lmax)?);
        Ok(self)
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coeffs(&self) -> Option<&HarmonicCoeffs> {
        self.coeffs.as_ref()
    }

    /// Largest pointwise gap between the samples and the attached coefficients.
    pub fn coefficient_consistency(&self) -> Option<f64> {
        let c = self.coeffs.as_ref()?;
        let synth = synthesize_function(c, &self.grid);
        Some(
            synth
                .iter()
                .zip(&self.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    }

    /// CSV with columns `theta,phi,re_A,im_A`.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "theta,phi,re_A,im_A")?;
        for (d, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                d.theta(),
                d.phi(),
                v.re,
                v.im
            )?;
        }
        Ok(())
    }
}

/// `A(β_j) = -(1/4π) Σ_s w_s e^{-ikβ_j·s} u_N(s)`.
pub fn amplitude_from_boundary(
    quad: &SurfaceQuadrature,
    normal_derivative: &[Complex64],
    k: f64,
    beta_grid: &SphereGrid,
) -> Result<FarFieldPattern> {
    if normal_derivative.len() != quad.len() {
        return Err(Error::Shape {
            expected: quad.len(),
            got: normal_derivative.len(),
        });
    }
    let weighted: Vec<Complex64> = normal_derivative
        .iter()
        .zip(quad.weights())
        .map(|(h, w)| h * w)
        .collect();
    let values = beta_grid
        .nodes()
        .par_iter()
        .map(|beta| {
            let sum: Complex64 = quad
                .points()
                .iter()
                .zip(&weighted)
                .map(|(s, h)| Complex64::from_polar(1.0, -k * beta.dot_point(s)) * h)
                .sum();
            -sum / (4.0 * PI)
        })
        .collect();
    FarFieldPattern::new(beta_grid.clone(), values)
}

impl BoundaryTrace {
    pub fn far_field(&self, k: f64, beta_grid: &SphereGrid) -> Result<FarFieldPattern> {
        amplitude_from_boundary(self.quadrature(), self.values(), k, beta_grid)
    }
}

fn norm3(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Herglotz wave function of a sampled kernel, valid on `|x| ≤ radius`.
#[derive(Debug, Clone)]
pub struct HerglotzEvaluator {
    grid: SphereGrid,
    weighted: Vec<Complex64>,
    k: f64,
    radius: f64,
}

impl HerglotzEvaluator {
    /// Kernel given by nodal samples. The grid must integrate degree
    /// `2·(⌈k·radius⌉ + 20)` exactly.
    pub fn from_samples(f: &[Complex64], grid: &SphereGrid, k: f64, radius: f64) -> Result<Self> {
        grid.check_len(f.len())?;
        let needed = 2 * truncation_degree(k, radius);
        if grid.exactness_degree() < needed {
            return Err(Error::Resolution {
                needed,
                available: grid.exactness_degree(),
            });
        }
        let weighted = f.iter().zip(grid.weights()).map(|(v, w)| v * w).collect();
        Ok(Self {
            grid: grid.clone(),
            weighted,
            k,
            radius,
        })
    }

    /// Band-limited kernel; the quadrature grid is chosen to integrate the
    /// product with the truncated plane wave exactly.
    pub fn from_coeffs(f: &HarmonicCoeffs, k: f64, radius: f64) -> Result<Self> {
        let lw = truncation_degree(k, radius);
        let grid = SphereGrid::with_exactness((2 * lw).max(lw + f.max_degree()))?;
        let samples = synthesize_function(f, &grid);
        Self::from_samples(&samples, &grid, k, radius)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, x: &[f64; 3]) -> Result<Complex64> {
        let r = norm3(x);
        if r > self.radius * (1.0 + 1e-12) {
            return Err(Error::Resolution {
                needed: 2 * truncation_degree(self.k, r),
                available: self.grid.exactness_degree(),
            });
        }
        Ok(self
            .grid
            .nodes()
            .iter()
            .zip(&self.weighted)
            .map(|(b, f)| Complex64::from_polar(1.0, -self.k * b.dot_point(x)) * f)
            .sum())
    }

    /// 7-point finite-difference Laplacian of `w` at `x`. Each plane wave's
    /// second difference along an axis is `-4 sin²(khβ_i/2)` times its value,
    /// which avoids the cancellation of differencing `w` itself.
    pub fn stencil_laplacian(&self, x: &[f64; 3], h: f64) -> Result<Complex64> {
        let r = norm3(x) + h;
        if r > self.radius * (1.0 + 1e-12) {
            return Err(Error::Resolution {
                needed: 2 * truncation_degree(self.k, r),
                available: self.grid.exactness_degree(),
            });
        }
        let half = 0.5 * self.k * h;
        let sum: Complex64 = self
            .grid
            .nodes()
            .iter()
            .zip(&self.weighted)
            .map(|(b, f)| {
                let s: f64 = b.xyz().iter().map(|c| (half * c).sin().powi(2)).sum();
                Complex64::from_polar(1.0, -self.k * b.dot_point(x)) * f * s
            })
            .sum();
        Ok(sum * (-4.0 / (h * h)))
    }
}

/// `w(x) = ∫_{S²} e^{-ikβ·x} f(β) dβ` for a band-limited kernel.
pub fn herglotz(f: &HarmonicCoeffs, k: f64, x: &[f64; 3]) -> Result<Complex64> {
    HerglotzEvaluator::from_coeffs(f, k, norm3(x))?.eval(x)
}

/// Same for a kernel sampled on a β-grid.
pub fn herglotz_samples(
    f: &[Complex64],
    grid: &SphereGrid,
    k: f64,
    x: &[f64; 3],
) -> Result<Complex64> {
    HerglotzEvaluator::from_samples(f, grid, k, norm3(x))?.eval(x)
}

/// `|Δ_h w + k² w|` at `x` with the 7-point Laplacian of step `h`.
pub fn helmholtz_residual(f: &HarmonicCoeffs, k: f64, x: &[f64; 3], h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Domain(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let w = HerglotzEvaluator::from_coeffs(f, k, norm3(x) + 2.0 * h)?;
    let center = w.eval(x)?;
    Ok((w.stencil_laplacian(x, h)? + center * (k * k)).norm())
}

/// `max_s |w(s)|` over the surface nodes: how far `f` is from annihilating
/// every plane wave `e^{-ikβ·s}` with `s` on the surface.
pub fn annihilation_residual(f: &HarmonicCoeffs, quad: &SurfaceQuadrature, k: f64) -> Result<f64> {
    let radius = quad.points().iter().map(norm3).fold(0.0, f64::max);
    let w = HerglotzEvaluator::from_coeffs(f, k, radius)?;
    let values: Vec<f64> = quad
        .points()
        .par_iter()
        .map(|s| w.eval(s).map(|v| v.norm()))
        .collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}
