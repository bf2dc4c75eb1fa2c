//! Approximating a target pattern `f` on `S²` by finite combinations of
//! scattering amplitudes `Σ_j c_j A(·, α_j, k)`, and the obstruction that
//! appears when `k` is an interior Dirichlet eigenvalue of the scatterer.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bem::BoundaryOperator;
use crate::mie::{build_mie, MieModel};
use crate::specfun::{bessel_zeros_in, nearest_bessel_zero};
use crate::sphgrid::{
    synthesize_function, truncation_degree, Direction, HarmonicCoeffs, SphereGrid,
};
use crate::{Error, Result};

/// Relative singular-value cutoff used when none is given.
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-10;

/// `|ka - zero|` below which a run is flagged as sitting on an eigenvalue.
pub const EIGEN_FLAG_THRESHOLD: f64 = 1e-8;

/// How a [`DirectionSet`] was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionRule {
    Spiral,
    Grid,
    Explicit,
}

impl DirectionRule {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spiral => "spiral",
            Self::Grid => "grid",
            Self::Explicit => "explicit",
        }
    }
}

/// Incident directions `α_1, …, α_M`.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    directions: Vec<Direction>,
    rule: DirectionRule,
}

/// Smallest angle allowed between two directions of a set.
pub const MIN_SEPARATION: f64 = 1e-6;

impl DirectionSet {
    /// Quasi-uniform nested set: point `i` takes `(z, φ)` from the additive
    /// recurrence `frac(s + i·(1/ρ, 1/ρ²))` with `ρ` the plastic number and
    /// an area-preserving map to the sphere. Any prefix is itself a set of
    /// the same kind, so growing `m` only appends directions.
    pub fn spiral(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Configuration(
                "direction count must be positive".into(),
            ));
        }
        let rho = 1.324_717_957_244_746_f64;
        let (g1, g2) = (1.0 / rho, 1.0 / (rho * rho));
        let s1 = (0.5 + seed as f64 * (2.0_f64.sqrt() - 1.0)).fract();
        let s2 = (0.5 + seed as f64 * (3.0_f64.sqrt() - 1.0)).fract();
        let directions = (0..m)
            .map(|i| {
                let u = (s1 + (i as f64 + 1.0) * g1).fract();
                let v = (s2 + (i as f64 + 1.0) * g2).fract();
                let z = 1.0 - 2.0 * u;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * PI * v;
                Direction::new(r * phi.cos(), r * phi.sin(), z).expect("unit vector")
            })
            .collect();
        Self::checked(directions, DirectionRule::Spiral)
    }

    /// The nodes of a Gauss-by-trapezoid grid.
    pub fn grid(n_theta: usize, n_phi: usize) -> Result<Self> {
        Self::checked(
            SphereGrid::new(n_theta, n_phi)?.nodes().to_vec(),
            DirectionRule::Grid,
        )
    }

    pub fn explicit(directions: Vec<Direction>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Configuration("direction list is empty".into()));
        }
        Self::checked(directions, DirectionRule::Explicit)
    }

    fn checked(directions: Vec<Direction>, rule: DirectionRule) -> Result<Self> {
        for (i, a) in directions.iter().enumerate() {
            for (j, b) in directions[..i].iter().enumerate() {
                if a.angle_to(b) <= MIN_SEPARATION {
                    return Err(Error::Configuration(format!(
                        "directions {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Self { directions, rule })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn rule(&self) -> DirectionRule {
        self.rule
    }

    /// The first `m` directions.
    pub fn prefix(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return Err(Error::Configuration(format!(
                "prefix of length {m} from a set of {}",
                self.len()
            )));
        }
        Ok(Self {
            directions: self.directions[..m].to_vec(),
            rule: self.rule,
        })
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = PI;
        for (i, a) in self.directions.iter().enumerate() {
            for b in &self.directions[..i] {
                best = best.min(a.angle_to(b));
            }
        }
        best
    }
}

/// Nearest interior Dirichlet eigenvalue of a ball, in `ka` units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenProximity {
    pub ell: usize,
    pub index: usize,
    /// The zero `x` of `j_ℓ`; the eigen-wavenumber is `x / a`.
    pub zero: f64,
    /// `|ka - x|`.
    pub distance: f64,
}

impl EigenProximity {
    pub fn flagged(&self) -> bool {
        self.distance < EIGEN_FLAG_THRESHOLD
    }
}

/// Anything that produces far-field patterns at a fixed wavenumber.
pub trait ScatteringSolver: Sync {
    fn wavenumber(&self) -> f64;

    /// `A(β_i, α)` at every node of `grid`.
    fn amplitude_samples(&self, alpha: &Direction, grid: &SphereGrid) -> Result<Vec<Complex64>>;

    /// Nearest ball eigenvalue, when the scatterer is a ball.
    fn eigen_proximity(&self) -> Result<Option<EigenProximity>>;
}

fn proximity(lmax: usize, ka: f64) -> Result<Option<EigenProximity>> {
    Ok(nearest_bessel_zero(lmax, ka)?.map(|z| EigenProximity {
        ell: z.ell,
        index: z.index,
        zero: z.x,
        distance: (z.x - ka).abs(),
    }))
}

impl ScatteringSolver for MieModel {
    fn wavenumber(&self) -> f64 {
        MieModel::wavenumber(self)
    }

    fn amplitude_samples(&self, alpha: &Direction, grid: &SphereGrid) -> Result<Vec<Complex64>> {
        Ok(grid
            .nodes()
            .iter()
            .map(|b| self.far_field(b, alpha))
            .collect())
    }

    fn eigen_proximity(&self) -> Result<Option<EigenProximity>> {
        proximity(
            self.max_degree(),
            MieModel::wavenumber(self) * self.radius(),
        )
    }
}

impl ScatteringSolver for BoundaryOperator {
    fn wavenumber(&self) -> f64 {
        BoundaryOperator::wavenumber(self)
    }

    fn amplitude_samples(&self, alpha: &Direction, grid: &SphereGrid) -> Result<Vec<Complex64>> {
        Ok(self.far_field(alpha, grid)?.values().to_vec())
    }

    fn eigen_proximity(&self) -> Result<Option<EigenProximity>> {
        let Some(a) = self.surface().sphere_radius() else {
            return Ok(None);
        };
        let k = BoundaryOperator::wavenumber(self);
        proximity(truncation_degree(k, a), k * a)
    }
}

/// Amplitude samples: column `j` is `A(·, α_j)` on the β-grid.
#[derive(Debug, Clone)]
pub struct Dictionary {
    grid: SphereGrid,
    k: f64,
    columns: DMatrix<Complex64>,
    eigen: Option<EigenProximity>,
}

pub fn build_dictionary<S: ScatteringSolver + ?Sized>(
    model: &S,
    dirs: &DirectionSet,
    beta_grid: &SphereGrid,
) -> Result<Dictionary> {
    let cols: Vec<Vec<Complex64>> = dirs
        .directions()
        .par_iter()
        .map(|a| model.amplitude_samples(a, beta_grid))
        .collect::<Result<_>>()?;
    let n = beta_grid.len();
    let mut columns = DMatrix::from_element(n, cols.len(), Complex64::new(0.0, 0.0));
    for (j, col) in cols.iter().enumerate() {
        if col.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: col.len(),
            });
        }
        columns.column_mut(j).copy_from_slice(col);
    }
    Ok(Dictionary {
        grid: beta_grid.clone(),
        k: model.wavenumber(),
        columns,
        eigen: model.eigen_proximity()?,
    })
}

impl Dictionary {
    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    pub fn columns(&self) -> &DMatrix<Complex64> {
        &self.columns
    }

    pub fn eigen_proximity(&self) -> Option<EigenProximity> {
        self.eigen
    }

    /// The first `m` columns.
    pub fn prefix(&self, m: usize) -> Result<Self> {
        if m > self.len() {
            return Err(Error::Configuration(format!(
                "prefix of {m} columns from a dictionary of {}",
                self.len()
            )));
        }
        Ok(Self {
            columns: self.columns.columns(0, m).into_owned(),
            ..self.clone()
        })
    }

    /// Weighted Gram matrix `G_ij = Σ_β w A_i^* A_j`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let weighted = self.weighted();
        weighted.adjoint() * weighted
    }

    fn weighted(&self) -> DMatrix<Complex64> {
        let mut m = self.columns.clone();
        for (i, w) in self.grid.weights().iter().enumerate() {
            let s = w.sqrt();
            m.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        m
    }
}

/// Outcome of one least-squares fit.
#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub k: f64,
    pub m: usize,
    pub coefficients: Vec<Complex64>,
    /// `‖Σ c_j A(·, α_j) - f‖` in the β-grid quadrature norm.
    pub residual: f64,
    pub target_norm: f64,
    /// `(σ_max / σ_min)²` of the weighted dictionary.
    pub gram_condition: f64,
    /// Singular values kept by the cutoff.
    pub rank: usize,
    pub eigen: Option<EigenProximity>,
}

impl SynthesisReport {
    pub fn relative_residual(&self) -> f64 {
        if self.target_norm == 0.0 {
            0.0
        } else {
            self.residual / self.target_norm
        }
    }

    pub fn eigenflag(&self) -> bool {
        self.eigen.is_some_and(|e| e.flagged())
    }
}

fn weighted_norm(v: &[Complex64], grid: &SphereGrid) -> f64 {
    v.iter()
        .zip(grid.weights())
        .map(|(x, w)| x.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// Weighted least squares through a truncated singular value decomposition.
pub fn solve_ls(dict: &Dictionary, f: &[Complex64], svd_cutoff: f64) -> Result<SynthesisReport> {
    if dict.is_empty() {
        return Err(Error::Configuration("dictionary has no columns".into()));
    }
    if f.len() != dict.grid.len() {
        return Err(Error::Shape {
            expected: dict.grid.len(),
            got: f.len(),
        });
    }
    if !(svd_cutoff.is_finite() && svd_cutoff >= 0.0) {
        return Err(Error::Configuration(format!(
            "svd_cutoff must be non-negative, got {svd_cutoff}"
        )));
    }
    let a = dict.weighted();
    let b = DVector::from_iterator(
        f.len(),
        f.iter().zip(dict.grid.weights()).map(|(v, w)| v * w.sqrt()),
    );
    let svd = a.svd(true, true);
    let u = svd.u.as_ref().expect("left vectors requested");
    let vt = svd.v_t.as_ref().expect("right vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.max();
    let smin = sigma.min();
    let mut coeffs = DVector::from_element(dict.len(), Complex64::new(0.0, 0.0));
    let mut rank = 0;
    if smax > 0.0 {
        for (i, s) in sigma.iter().enumerate() {
            if *s > svd_cutoff * smax {
                rank += 1;
                let proj = u.column(i).dotc(&b) / *s;
                coeffs += vt.row(i).adjoint() * proj;
            }
        }
    }
    let fitted = &dict.columns * &coeffs;
    let diff: Vec<Complex64> = fitted.iter().zip(f).map(|(a, b)| a - b).collect();
    let gram_condition = if smin > 0.0 {
        (smax / smin).powi(2)
    } else {
        f64::INFINITY
    };
    Ok(SynthesisReport {
        k: dict.k,
        m: dict.len(),
        coefficients: coeffs.iter().copied().collect(),
        residual: weighted_norm(&diff, &dict.grid),
        target_norm: weighted_norm(f, &dict.grid),
        gram_condition,
        rank,
        eigen: dict.eigen,
    })
}

/// Samples of a band-limited target on `grid`; the grid must integrate
/// `|f|²` exactly.
pub fn target_samples(f: &HarmonicCoeffs, grid: &SphereGrid) -> Result<Vec<Complex64>> {
    let needed = 2 * f.max_degree();
    if grid.exactness_degree() < needed {
        return Err(Error::Resolution {
            needed,
            available: grid.exactness_degree(),
        });
    }
    Ok(synthesize_function(f, grid))
}

/// β-grid integrating degree `2L + 1` exactly, `L = ⌈ka⌉ + 20`.
pub fn default_beta_grid(k: f64, radius: f64) -> Result<SphereGrid> {
    let l = truncation_degree(k, radius);
    SphereGrid::new(l + 1, 2 * l + 2)
}

/// Residuals for every prefix length in `m_list` of one nested direction set.
pub fn nested_residuals<S: ScatteringSolver + ?Sized>(
    model: &S,
    dirs: &DirectionSet,
    m_list: &[usize],
    f: &[Complex64],
    beta_grid: &SphereGrid,
    svd_cutoff: f64,
) -> Result<Vec<SynthesisReport>> {
    let mmax = m_list
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::Configuration("empty M list".into()))?;
    let full = build_dictionary(model, &dirs.prefix(mmax)?, beta_grid)?;
    m_list
        .par_iter()
        .map(|&m| solve_ls(&full.prefix(m)?, f, svd_cutoff))
        .collect()
}

/// Norm of the part of `f` that no amplitude of the ball of radius `a` can
/// reach: at `j_ℓ0(ka) = 0` every amplitude is orthogonal to degree `ℓ0`, so
/// `‖P_ℓ0 f‖` bounds every achievable residual from below. Zero when `k` is
/// not within `1e-10` of such an eigenvalue with `ℓ0 ≤ f.max_degree()`.
pub fn projection_lower_bound(f: &HarmonicCoeffs, a: f64, k: f64) -> Result<f64> {
    if !(a > 0.0 && k > 0.0) {
        return Err(Error::Domain(format!(
            "radius and wavenumber must be positive, got a={a}, k={k}"
        )));
    }
    let tol = 1e-10;
    let mut total = 0.0;
    for ell in 0..=f.max_degree() {
        let zeros = bessel_zeros_in(ell, (k - tol) * a, (k + tol) * a)?;
        if zeros.iter().any(|z| (z.x / a - k).abs() <= tol) {
            total += f.degree_norm(ell).powi(2);
        }
    }
    Ok(total.sqrt())
}

/// Parameters of a residual-versus-wavenumber sweep on a ball.
#[derive(Debug, Clone)]
pub struct ObstructionSweep {
    pub radius: f64,
    pub ell0: usize,
    pub directions: usize,
    pub seed: u64,
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
    pub svd_cutoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub k: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub gram_condition: f64,
    pub eigenflag: bool,
}

/// A local maximum of the residual curve and the nearest `j_ℓ0` eigen-wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePeak {
    pub k: f64,
    pub residual: f64,
    pub nearest_eigen_k: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ObstructionProfile {
    pub points: Vec<ProfilePoint>,
    pub peaks: Vec<ProfilePeak>,
    /// Eigen-wavenumbers `x/a` with `j_ℓ0(x) = 0` inside the range.
    pub eigen_ks: Vec<f64>,
    pub step: f64,
}

impl ObstructionProfile {
    /// The sample with the largest residual.
    pub fn global_peak(&self) -> Option<ProfilePoint> {
        self.points
            .iter()
            .copied()
            .fold(None, |best, p| match best {
                Some(b) if b.residual >= p.residual => Some(b),
                _ => Some(p),
            })
    }

    /// `max / min` of the residual over the curve.
    pub fn flatness(&self) -> f64 {
        let max = self.points.iter().map(|p| p.residual).fold(0.0, f64::max);
        let min = self
            .points
            .iter()
            .map(|p| p.residual)
            .fold(f64::INFINITY, f64::min);
        max / min
    }
}

impl ObstructionSweep {
    pub fn wavenumbers(&self) -> Vec<f64> {
        if self.n_k == 1 {
            return vec![self.k_min];
        }
        let h = (self.k_max - self.k_min) / (self.n_k - 1) as f64;
        (0..self.n_k).map(|i| self.k_min + h * i as f64).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Configuration(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if !(self.k_min > 0.0 && self.k_max >= self.k_min && self.k_max.is_finite()) {
            return Err(Error::Configuration(format!(
                "invalid k range [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if self.n_k == 0 || self.directions == 0 {
            return Err(Error::Configuration(
                "n_k and direction count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Residual of the best fit to `f` by `directions` ball amplitudes at each
/// wavenumber of the sweep, on one β-grid sized for the largest sampled `k`.
pub fn obstruction_profile(
    sweep: &ObstructionSweep,
    f: &HarmonicCoeffs,
) -> Result<ObstructionProfile> {
    sweep.validate()?;
    let ks = sweep.wavenumbers();
    let grid = default_beta_grid(ks[ks.len() - 1], sweep.radius)?;
    let samples = target_samples(f, &grid)?;
    let dirs = DirectionSet::spiral(sweep.directions, sweep.seed)?;
    let points: Vec<ProfilePoint> = ks
        .par_iter()
        .map(|&k| {
            let model = build_mie(sweep.radius, k)?;
            let report = solve_ls(
                &build_dictionary(&model, &dirs, &grid)?,
                &samples,
                sweep.svd_cutoff,
            )?;
            Ok(ProfilePoint {
                k,
                residual: report.residual,
                relative_residual: report.relative_residual(),
                gram_condition: report.gram_condition,
                eigenflag: report.eigenflag(),
            })
        })
        .collect::<Result<_>>()?;
    let eigen_ks: Vec<f64> = bessel_zeros_in(
        sweep.ell0,
        sweep.k_min * sweep.radius,
        sweep.k_max * sweep.radius,
    )?
    .iter()
    .map(|z| z.x / sweep.radius)
    .collect();
    let nearest = |k: f64| {
        eigen_ks
            .iter()
            .copied()
            .fold(None, |best: Option<f64>, z| match best {
                Some(b) if (b - k).abs() <= (z - k).abs() => Some(b),
                _ => Some(z),
            })
    };
    let peaks = points
        .windows(3)
        .filter(|w| w[1].residual > w[0].residual && w[1].residual >= w[2].residual)
        .map(|w| ProfilePeak {
            k: w[1].k,
            residual: w[1].residual,
            nearest_eigen_k: nearest(w[1].k),
        })
        .collect();
    let step = if ks.len() > 1 { ks[1] - ks[0] } else { 0.0 };
    Ok(ObstructionProfile {
        points,
        peaks,
        eigen_ks,
        step,
    })
}
