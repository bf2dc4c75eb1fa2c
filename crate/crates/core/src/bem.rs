//! First-kind single-layer solver for sound-soft scattering by smooth closed
//! surfaces. With `u = 0` on `S`, Green's representation gives
//!
//! ```text
//! ∫_S g(x, s) h(s) ds = e^{ikα·x},   x ∈ S,   g(x, s) = e^{ik|x-s|} / (4π|x-s|)
//! ```
//!
//! whose solution is `h = u_N`. The equation is discretized by a Nyström
//! rule on the surface's parameter grid. The kernel is split as
//! `g = 1/(4πr) + (e^{ikr} - 1)/(4πr)`; the second part is smooth with
//! diagonal limit `ik/4π`, the first is handled by singularity subtraction
//! against the node's self-integral `I_i = ∫_S ds / (4π|x_i - s|)`, which is
//! computed by a polar rule centred at the node. Scaling rows and columns by
//! `√w` makes the matrix complex symmetric.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::farfield::{
    amplitude_from_boundary, BoundaryTrace, FarFieldPattern, ParamSurface, SurfaceQuadrature,
};
use crate::specfun::{nearest_bessel_zero, BesselZero};
use crate::sphgrid::{gauss_legendre, Direction, SphereGrid};
use crate::{Error, Result};

/// Largest node count accepted by [`assemble`].
pub const MAX_NODES: usize = 10_000;

/// Condition estimate above which solves are refused.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

const SELF_THETA: usize = 48;
const SELF_PHI: usize = 96;

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn orthonormal_frame(p: &Direction) -> ([f64; 3], [f64; 3]) {
    let [x, y, z] = p.xyz();
    let helper = if z.abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let mut e1 = [
        helper[1] * z - helper[2] * y,
        helper[2] * x - helper[0] * z,
        helper[0] * y - helper[1] * x,
    ];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|c| *c /= n);
    let e2 = [
        y * e1[2] - z * e1[1],
        z * e1[0] - x * e1[2],
        x * e1[1] - y * e1[0],
    ];
    (e1, e2)
}

/// `∫_S ds / (4π|r(p) - s|)` by Gauss in the polar angle about `p` and the
/// trapezoid rule in azimuth. In these coordinates the integrand is smooth.
fn self_integral(surface: &ParamSurface, p: &Direction, nodes: &[f64], weights: &[f64]) -> f64 {
    let x = surface.point(p);
    let (e1, e2) = orthonormal_frame(p);
    let pc = p.xyz();
    let dphi = 2.0 * PI / SELF_PHI as f64;
    let mut total = 0.0;
    for (t, wt) in nodes.iter().zip(weights) {
        let theta = 0.5 * PI * (t + 1.0);
        let (st, ct) = theta.sin_cos();
        let mut ring = 0.0;
        for j in 0..SELF_PHI {
            let (sp, cp) = (j as f64 * dphi).sin_cos();
            let q = Direction::new(
                ct * pc[0] + st * (cp * e1[0] + sp * e2[0]),
                ct * pc[1] + st * (cp * e1[1] + sp * e2[1]),
                ct * pc[2] + st * (cp * e1[2] + sp * e2[2]),
            )
            .expect("unit combination");
            ring += surface.area_element(&q) / dist(&x, &surface.point(&q));
        }
        total += wt * 0.5 * PI * st * ring * dphi;
    }
    total / (4.0 * PI)
}

/// Dense symmetric discretization of the single-layer operator together with its factorization.
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    quad: SurfaceQuadrature,
    k: f64,
    matrix: DMatrix<Complex64>,
    sqrt_w: Vec<f64>,
    self_integrals: Vec<f64>,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
    condition_limit: f64,
}

/// Discretizes the single layer on `surface` with an `n_theta × n_phi` parameter grid.
pub fn assemble(
    surface: ParamSurface,
    k: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<BoundaryOperator> {
    BoundaryOperator::assemble(surface, k, n_theta, n_phi)
}

/// Result of one solve.
#[derive(Debug, Clone)]
pub struct BemSolution {
    pub trace: BoundaryTrace,
    /// `‖Sh - u_inc‖_∞ / ‖u_inc‖_∞` for the discrete operator.
    pub residual: f64,
}

impl BoundaryOperator {
    pub fn assemble(surface: ParamSurface, k: f64, n_theta: usize, n_phi: usize) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        let size = n_theta.saturating_mul(n_phi);
        if size > MAX_NODES {
            return Err(Error::Size {
                size,
                cap: MAX_NODES,
            });
        }
        let quad = SurfaceQuadrature::with_resolution(surface, n_theta, n_phi)?;
        let n = quad.len();
        let (gl, gw) = gauss_legendre(SELF_THETA);
        let self_integrals: Vec<f64> = quad
            .grid()
            .nodes()
            .par_iter()
            .map(|p| self_integral(&surface, p, &gl, &gw))
            .collect();

        let pts = quad.points();
        let w = quad.weights();
        let sqrt_w: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        let ik = Complex64::new(0.0, k);
        // Column j of the symmetric matrix; entries above the diagonal are
        // computed once per pair by taking i < j and mirrored afterwards.
        let columns: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                let mut static_sum = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let r = dist(&pts[i], &pts[j]);
                    static_sum += w[j] / (4.0 * PI * r);
                    col[j] = Complex64::from_polar(1.0, k * r) / (4.0 * PI * r)
                        * (sqrt_w[i] * sqrt_w[j]);
                }
                col[i] =
                    Complex64::new(self_integrals[i] - static_sum, 0.0) + ik * (w[i] / (4.0 * PI));
                col
            })
            .collect();
        let mut matrix = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (j, col) in columns.iter().enumerate() {
            for i in 0..n {
                // Mirror the lower triangle so the stored matrix is exactly symmetric.
                matrix[(i, j)] = if i >= j { col[i] } else { columns[i][j] };
            }
        }
        let norm1 = one_norm(&matrix);
        let lu = matrix.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::SingularMatrix(n));
        }
        let condition = norm1 * inverse_one_norm_estimate(&lu, n);
        Ok(Self {
            quad,
            k,
            matrix,
            sqrt_w,
            self_integrals,
            lu,
            condition,
            condition_limit: DEFAULT_CONDITION_LIMIT,
        })
    }

    pub fn with_condition_limit(mut self, limit: f64) -> Self {
        self.condition_limit = limit;
        self
    }

    pub fn condition_limit(&self) -> f64 {
        self.condition_limit
    }

    pub fn surface(&self) -> &ParamSurface {
        self.quad.surface()
    }

    pub fn quadrature(&self) -> &SurfaceQuadrature {
        &self.quad
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.quad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quad.is_empty()
    }

    /// The symmetrized matrix `W^{1/2} K W^{-1/2}`.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Estimated 1-norm condition number of the discrete operator.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// `∫_S ds / (4π|x_i - s|)` at every node; the row sums of the static part.
    pub fn static_row_sums(&self) -> &[f64] {
        &self.self_integrals
    }

    /// `‖M - Mᵀ‖_F / ‖M‖_F`.
    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).norm() / self.matrix.norm()
    }

    /// Distance in `ka` units to the nearest ball eigenvalue when the surface is a ball.
    pub fn eigen_distance(&self) -> Result<Option<(BesselZero, f64)>> {
        let Some(a) = self.surface().sphere_radius() else {
            return Ok(None);
        };
        let ka = self.k * a;
        let lmax = crate::sphgrid::truncation_degree(self.k, a);
        Ok(nearest_bessel_zero(lmax, ka)?.map(|z| (z, (z.x - ka).abs())))
    }

    /// Applies the discrete single layer to nodal density samples: `(Sh)(x_i)`.
    pub fn apply(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        if h.len() != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got: h.len(),
            });
        }
        let psi = nalgebra::DVector::from_iterator(
            h.len(),
            h.iter().zip(&self.sqrt_w).map(|(v, s)| v * *s),
        );
        let out = &self.matrix * psi;
        Ok(out.iter().zip(&self.sqrt_w).map(|(v, s)| v / *s).collect())
    }

    fn solve_symmetric(&self, rhs: &nalgebra::DVector<Complex64>) -> nalgebra::DVector<Complex64> {
        self.lu
            .solve(rhs)
            .expect("factorization checked at assembly")
    }

    /// Solves for `h = u_N` under the incident wave `e^{ikα·x}`, with one step
    /// of iterative refinement.
    pub fn solve_normal_derivative(&self, alpha: &Direction) -> Result<BemSolution> {
        if self.condition.is_nan() || self.condition > self.condition_limit {
            return Err(Error::IllConditioned {
                estimate: self.condition,
            });
        }
        let u: Vec<Complex64> = self
            .quad
            .points()
            .iter()
            .map(|x| Complex64::from_polar(1.0, self.k * alpha.dot_point(x)))
            .collect();
        let rhs = nalgebra::DVector::from_iterator(
            u.len(),
            u.iter().zip(&self.sqrt_w).map(|(v, s)| v * *s),
        );
        let mut psi = self.solve_symmetric(&rhs);
        let r = &rhs - &self.matrix * &psi;
        psi += self.solve_symmetric(&r);
        let r = &rhs - &self.matrix * &psi;
        let residual = r
            .iter()
            .zip(&self.sqrt_w)
            .map(|(v, s)| v.norm() / s)
            .fold(0.0, f64::max);
        let values = psi.iter().zip(&self.sqrt_w).map(|(v, s)| v / *s).collect();
        Ok(BemSolution {
            trace: BoundaryTrace::new(self.quad.clone(), values)?,
            residual,
        })
    }

    pub fn far_field(&self, alpha: &Direction, beta_grid: &SphereGrid) -> Result<FarFieldPattern> {
        bem_far_field(self, alpha, beta_grid)
    }
}

/// Far-field pattern of the BEM solution for incident direction `alpha`.
pub fn bem_far_field(
    op: &BoundaryOperator,
    alpha: &Direction,
    beta_grid: &SphereGrid,
) -> Result<FarFieldPattern> {
    let sol = op.solve_normal_derivative(alpha)?;
    amplitude_from_boundary(sol.trace.quadrature(), sol.trace.values(), op.k, beta_grid)
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager–Higham estimate of `‖A⁻¹‖₁` for a complex symmetric `A`, so that
/// `A⁻ᴴ y = conj(A⁻¹ conj(y))`.
fn inverse_one_norm_estimate(
    lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
) -> f64 {
    use nalgebra::DVector;
    let solve = |v: &DVector<Complex64>| lu.solve(v).expect("invertible");
    let solve_h = |v: &DVector<Complex64>| solve(&v.map(|c| c.conj())).map(|c| c.conj());
    let norm1 = |v: &DVector<Complex64>| v.iter().map(|c| c.norm()).sum::<f64>();

    // A start vector without the grid's symmetries: the all-ones vector is
    // orthogonal to every non-axisymmetric mode of a body of revolution.
    let golden = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            Complex64::from_polar(
                1.0 / n as f64,
                2.0 * PI * ((i as f64 + 1.0) * golden).fract(),
            )
        }),
    );
    let mut estimate = 0.0;
    let mut last_index = usize::MAX;
    for _ in 0..5 {
        let y = solve(&x);
        estimate = norm1(&y);
        let xi = y.map(|c| {
            if c.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                c / c.norm()
            }
        });
        let z = solve_h(&xi);
        let (j, zmax) = z.iter().enumerate().fold((0, 0.0), |(bj, bm), (i, c)| {
            if c.norm() > bm {
                (i, c.norm())
            } else {
                (bj, bm)
            }
        });
        let zx: f64 = z.iter().zip(x.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        if zmax <= zx || j == last_index {
            break;
        }
        last_index = j;
        x = DVector::from_element(n, Complex64::new(0.0, 0.0));
        x[j] = Complex64::new(1.0, 0.0);
    }
    // Higham's alternating test vector guards against unlucky iterations.
    let alt = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        }),
    );
    let alt_est = 2.0 * norm1(&solve(&alt)) / (3.0 * n as f64);
    estimate.max(alt_est)
}

/// Condition estimates at each wavenumber, in input order.
pub fn condition_sweep(
    surface: ParamSurface,
    n_theta: usize,
    n_phi: usize,
    ks: &[f64],
) -> Result<Vec<(f64, f64)>> {
    ks.par_iter()
        .map(|&k| {
            Ok((
                k,
                BoundaryOperator::assemble(surface, k, n_theta, n_phi)?.condition_estimate(),
            ))
        })
        .collect()
}

/// Golden-section search for the wavenumber in `[lo, hi]` that maximizes the
/// condition estimate. Returns `(k, condition)`.
pub fn refine_condition_peak(
    surface: ParamSurface,
    n_theta: usize,
    n_phi: usize,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::Domain(format!(
            "invalid search interval [{lo}, {hi}] with tolerance {tol}"
        )));
    }
    let cond = |k: f64| {
        BoundaryOperator::assemble(surface, k, n_theta, n_phi).map(|op| op.condition_estimate())
    };
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cond(c)?, cond(d)?);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cond(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cond(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_oversized_grids() {
        let s = ParamSurface::sphere(1.0).unwrap();
        assert!(matches!(
            assemble(s, 1.0, 101, 100),
            Err(Error::Size {
                size: 10100,
                cap: MAX_NODES
            })
        ));
    }

    #[test]
    fn frame_is_orthonormal() {
        for p in [
            Direction::new(0.0, 0.0, 1.0).unwrap(),
            Direction::new(0.3, -0.5, 0.1).unwrap(),
        ] {
            let (e1, e2) = orthonormal_frame(&p);
            let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert!(
                dot(e1, p.xyz()).abs() < 1e-15
                    && dot(e2, p.xyz()).abs() < 1e-15
                    && dot(e1, e2).abs() < 1e-15
            );
            assert!((dot(e1, e1) - 1.0).abs() < 1e-15 && (dot(e2, e2) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn condition_estimate_of_diagonal_matrix() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1e-3),
            Complex64::new(2.0, 0.0),
        ]));
        let est = inverse_one_norm_estimate(&m.clone().lu(), 3) * one_norm(&m);
        assert!((est - 2e3).abs() < 1e-9);
    }
}
