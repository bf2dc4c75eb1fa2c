//! Quadrature on the unit sphere, `L²(S²)` inner products and the forward and
//! inverse spherical-harmonic transforms.
//!
//! Grids are tensor products of Gauss–Legendre nodes in `cos θ` and a uniform
//! trapezoid rule in `φ`. Nodes are stored ring by ring (θ ascending, φ inner).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::ops::Neg;

use num_complex::Complex64;

use crate::specfun::{HarmonicIndex, LegendreTable, MAX_DEGREE};
use crate::{Error, Result};

/// Truncation degree for expanding `e^{ikβ·x}` with `|x| ≤ radius`.
pub fn truncation_degree(k: f64, radius: f64) -> usize {
    (k * radius).ceil().max(0.0) as usize + 20
}

/// A unit vector on `S²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    xyz: [f64; 3],
}

impl Direction {
    /// Normalises `(x, y, z)`; fails on a zero or non-finite vector.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::Domain(format!(
                "cannot normalise ({x}, {y}, {z}) to a direction"
            )));
        }
        Ok(Self {
            xyz: [x / n, y / n, z / n],
        })
    }

    /// Polar angle `θ ∈ [0, π]`, azimuth `φ`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            xyz: [st * cp, st * sp, ct],
        }
    }

    pub fn xyz(&self) -> [f64; 3] {
        self.xyz
    }

    pub fn x(&self) -> f64 {
        self.xyz[0]
    }

    pub fn y(&self) -> f64 {
        self.xyz[1]
    }

    pub fn z(&self) -> f64 {
        self.xyz[2]
    }

    pub fn theta(&self) -> f64 {
        self.x().hypot(self.y()).atan2(self.z())
    }

    /// Azimuth in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        let p = self.y().atan2(self.x());
        if p < 0.0 {
            p + 2.0 * PI
        } else {
            p
        }
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.xyz[0] * other.xyz[0] + self.xyz[1] * other.xyz[1] + self.xyz[2] * other.xyz[2]
    }

    pub fn dot_point(&self, p: &[f64; 3]) -> f64 {
        self.xyz[0] * p[0] + self.xyz[1] * p[1] + self.xyz[2] * p[2]
    }

    /// Great-circle angle to another direction.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let [a, b, c] = self.xyz;
        let [d, e, f] = other.xyz;
        let cross = [b * f - c * e, c * d - a * f, a * e - b * d];
        let s = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        s.atan2(self.dot(other))
    }

    pub fn scaled(&self, r: f64) -> [f64; 3] {
        [r * self.xyz[0], r * self.xyz[1], r * self.xyz[2]]
    }
}

impl Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction {
            xyz: [-self.xyz[0], -self.xyz[1], -self.xyz[2]],
        }
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * t * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Tensor-product quadrature on `S²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    n_theta: usize,
    n_phi: usize,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    ring_weights: Vec<f64>,
    phis: Vec<f64>,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    exactness: usize,
}

impl SphereGrid {
    /// `n_theta` Gauss–Legendre rings in `cos θ` times `n_phi` uniform azimuths.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 4 {
            return Err(Error::Configuration(format!(
                "sphere grid needs n_theta >= 2 and n_phi >= 4, got {n_theta} x {n_phi}"
            )));
        }
        let (t, w) = gauss_legendre(n_theta);
        // θ ascending means cos θ descending.
        let cos_theta: Vec<f64> = t.iter().rev().copied().collect();
        let ring_weights: Vec<f64> = w.iter().rev().copied().collect();
        let sin_theta: Vec<f64> = cos_theta
            .iter()
            .map(|c| ((1.0 - c) * (1.0 + c)).sqrt())
            .collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let phis: Vec<f64> = (0..n_phi).map(|j| j as f64 * dphi).collect();
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            for &phi in &phis {
                let (sp, cp) = phi.sin_cos();
                nodes.push(Direction {
                    xyz: [sin_theta[i] * cp, sin_theta[i] * sp, cos_theta[i]],
                });
                weights.push(ring_weights[i] * dphi);
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            cos_theta,
            sin_theta,
            ring_weights,
            phis,
            nodes,
            weights,
            exactness: (2 * n_theta - 1).min(n_phi - 1),
        })
    }

    /// Smallest grid of this family integrating polynomials of degree `degree` exactly.
    pub fn with_exactness(degree: usize) -> Result<Self> {
        Self::new((degree / 2 + 1).max(2), (degree + 1).max(4))
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness
    }

    /// `(cos θ_i, sin θ_i)` for each ring.
    pub fn ring(&self, i: usize) -> (f64, f64) {
        (self.cos_theta[i], self.sin_theta[i])
    }

    pub fn ring_weight(&self, i: usize) -> f64 {
        self.ring_weights[i]
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// Evaluates `f` at every node.
    pub fn sample<T, F: Fn(&Direction) -> T>(&self, f: F) -> Vec<T> {
        self.nodes.iter().map(f).collect()
    }

    pub fn integrate(&self, f: &[Complex64]) -> Result<Complex64> {
        self.check_len(f.len())?;
        Ok(f.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// CSV with columns `theta,phi,weight`.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "theta,phi,weight")?;
        for (d, wt) in self.nodes.iter().zip(&self.weights) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", d.theta(), d.phi(), wt)?;
        }
        Ok(())
    }

    /// `e^{-imφ_j}` for `m = -lmax..=lmax` (row `m + lmax`).
    fn azimuth_table(&self, lmax: usize) -> Vec<Vec<Complex64>> {
        let l = lmax as i64;
        (-l..=l)
            .map(|m| {
                self.phis
                    .iter()
                    .map(|&phi| {
                        let (s, c) = (m as f64 * phi).sin_cos();
                        Complex64::new(c, -s)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Bilinear pairing `Σ w_j f_j g_j` (no conjugation).
pub fn inner_product(f: &[Complex64], g: &[Complex64], grid: &SphereGrid) -> Result<Complex64> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    Ok(f.iter()
        .zip(g)
        .zip(grid.weights())
        .map(|((a, b), w)| a * b * w)
        .sum())
}

/// Hermitian pairing `Σ w_j f_j conj(g_j)`.
pub fn hermitian_inner_product(
    f: &[Complex64],
    g: &[Complex64],
    grid: &SphereGrid,
) -> Result<Complex64> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    Ok(f.iter()
        .zip(g)
        .zip(grid.weights())
        .map(|((a, b), w)| a * b.conj() * w)
        .sum())
}

/// Quadrature `L²(S²)` norm.
pub fn l2_norm(f: &[Complex64], grid: &SphereGrid) -> Result<f64> {
    grid.check_len(f.len())?;
    Ok(f.iter()
        .zip(grid.weights())
        .map(|(a, w)| a.norm_sqr() * w)
        .sum::<f64>()
        .sqrt())
}

/// Truncated spherical-harmonic coefficient table `f_ℓm`, `ℓ ≤ L`, stored ℓ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    max_degree: usize,
    coeffs: Vec<Complex64>,
}

impl HarmonicCoeffs {
    pub fn zeros(max_degree: usize) -> Self {
        Self {
            max_degree,
            coeffs: vec![Complex64::new(0.0, 0.0); (max_degree + 1) * (max_degree + 1)],
        }
    }

    pub fn from_vec(max_degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = (max_degree + 1) * (max_degree + 1);
        if coeffs.len() != expected {
            return Err(Error::Shape {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { max_degree, coeffs })
    }

    /// A single harmonic `value · Y_ℓm`.
    pub fn single(idx: HarmonicIndex, value: Complex64) -> Self {
        let mut c = Self::zeros(idx.ell());
        c.set(idx, value);
        c
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Zero for degrees beyond the table.
    pub fn get(&self, idx: HarmonicIndex) -> Complex64 {
        if idx.ell() > self.max_degree {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx.flat()]
        }
    }

    /// Convenience accessor; panics on an invalid `(ℓ, m)`.
    pub fn get_lm(&self, ell: usize, m: i64) -> Complex64 {
        self.get(HarmonicIndex::new(ell, m).expect("valid harmonic index"))
    }

    /// Grows the table when `idx` lies beyond the current degree.
    pub fn set(&mut self, idx: HarmonicIndex, value: Complex64) {
        if idx.ell() > self.max_degree {
            *self = self.with_degree(idx.ell());
        }
        self.coeffs[idx.flat()] = value;
    }

    /// Copy truncated or zero-padded to `max_degree`.
    pub fn with_degree(&self, max_degree: usize) -> Self {
        let mut out = Self::zeros(max_degree);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (HarmonicIndex, Complex64)> + '_ {
        HarmonicIndex::up_to(self.max_degree).zip(self.coeffs.iter().copied())
    }

    /// Coefficient `ℓ²` norm (equal to the `L²(S²)` norm of the synthesized function).
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm of the degree-`ℓ` block.
    pub fn degree_norm(&self, ell: usize) -> f64 {
        if ell > self.max_degree {
            return 0.0;
        }
        self.coeffs[ell * ell..(ell + 1) * (ell + 1)]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient modulus within degree `ℓ`.
    pub fn degree_max_abs(&self, ell: usize) -> f64 {
        if ell > self.max_degree {
            return 0.0;
        }
        self.coeffs[ell * ell..(ell + 1) * (ell + 1)]
            .iter()
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            max_degree: self.max_degree,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Pointwise `Σ c_ℓm Y_ℓm(dir)`.
    pub fn evaluate(&self, dir: &Direction) -> Complex64 {
        let [x, y, z] = dir.xyz();
        let s = x.hypot(y);
        let table = LegendreTable::new(self.max_degree, z, s);
        let e = if s > 0.0 {
            Complex64::new(x / s, y / s)
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut sum = Complex64::new(0.0, 0.0);
        for ell in 0..=self.max_degree {
            let mut epow = Complex64::new(1.0, 0.0);
            for m in 0..=ell {
                if m > 0 {
                    epow *= e;
                }
                let p = table.get(ell, m);
                let base = ell * ell + ell;
                sum += self.coeffs[base + m] * epow * p;
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    sum += self.coeffs[base - m] * epow.conj() * (sign * p);
                }
            }
        }
        sum
    }

    /// CSV with columns `ell,m,re,im`, ℓ-major.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "ell,m,re,im")?;
        for (idx, c) in self.iter() {
            writeln!(w, "{},{},{:.16e},{:.16e}", idx.ell(), idx.m(), c.re, c.im)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, comment: Option<&str>) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, comment)
            .expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses the `ell,m,re,im` format. Lines starting with `#` are skipped,
    /// missing indices are zero and the degree is the largest one present.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut saw_header = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                saw_header = true;
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols != ["ell", "m", "re", "im"] {
                    return Err(Error::Parse(format!(
                        "line {}: expected header ell,m,re,im",
                        lineno + 1
                    )));
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!(
                    "line {}: expected 4 columns",
                    lineno + 1
                )));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: invalid {what}", lineno + 1));
            let ell: usize = cols[0].parse().map_err(|_| bad("ell"))?;
            let m: i64 = cols[1].parse().map_err(|_| bad("m"))?;
            let re: f64 = cols[2].parse().map_err(|_| bad("re"))?;
            let im: f64 = cols[3].parse().map_err(|_| bad("im"))?;
            entries.push((HarmonicIndex::new(ell, m)?, Complex64::new(re, im)));
        }
        if !saw_header {
            return Err(Error::Parse("missing header ell,m,re,im".into()));
        }
        let lmax = entries.iter().map(|(i, _)| i.ell()).max().unwrap_or(0);
        let mut out = Self::zeros(lmax);
        for (idx, v) in entries {
            out.set(idx, v);
        }
        Ok(out)
    }

    /// Short human-readable form, e.g. `Y(3,1)*(1+0i)`.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (idx, c) in self.iter().filter(|(_, c)| c.norm() > 0.0) {
            if !s.is_empty() {
                s.push_str(" + ");
            }
            let _ = write!(s, "Y({},{})*({}{:+}i)", idx.ell(), idx.m(), c.re, c.im);
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

/// Coefficients `f_ℓm = Σ_j w_j f(β_j) conj(Y_ℓm(β_j))` for `ℓ ≤ lmax`.
pub fn analyze(f: &[Complex64], grid: &SphereGrid, lmax: usize) -> Result<HarmonicCoeffs> {
    grid.check_len(f.len())?;
    if lmax > MAX_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree: lmax,
            cap: MAX_DEGREE,
        });
    }
    if 2 * lmax > grid.exactness_degree() {
        return Err(Error::Resolution {
            needed: 2 * lmax,
            available: grid.exactness_degree(),
        });
    }
    let l = lmax as i64;
    let azimuth = grid.azimuth_table(lmax);
    let dphi = 2.0 * PI / grid.n_phi() as f64;
    let mut out = HarmonicCoeffs::zeros(lmax);
    for i in 0..grid.n_theta() {
        let row = &f[i * grid.n_phi()..(i + 1) * grid.n_phi()];
        // G_m = Δφ Σ_j f_ij e^{-imφ_j}
        let g: Vec<Complex64> = azimuth
            .iter()
            .map(|e| row.iter().zip(e).map(|(v, e)| v * e).sum::<Complex64>() * dphi)
            .collect();
        let (t, s) = grid.ring(i);
        let table = LegendreTable::new(lmax, t, s);
        let w = grid.ring_weight(i);
        for ell in 0..=lmax {
            for m in -(ell as i64)..=(ell as i64) {
                let mabs = m.unsigned_abs() as usize;
                let sign = if m < 0 && mabs % 2 == 1 { -1.0 } else { 1.0 };
                let idx = (ell * ell + ell) as i64 + m;
                out.coeffs[idx as usize] += g[(m + l) as usize] * (w * sign * table.get(ell, mabs));
            }
        }
    }
    Ok(out)
}

/// Samples `Σ_ℓm c_ℓm Y_ℓm(β_j)` at every grid node.
pub fn synthesize_function(c: &HarmonicCoeffs, grid: &SphereGrid) -> Vec<Complex64> {
    let lmax = c.max_degree();
    let l = lmax as i64;
    // e^{+imφ} is the conjugate of the analysis table.
    let azimuth = grid.azimuth_table(lmax);
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.n_theta() {
        let (t, s) = grid.ring(i);
        let table = LegendreTable::new(lmax, t, s);
        let mut g = vec![Complex64::new(0.0, 0.0); 2 * lmax + 1];
        for ell in 0..=lmax {
            for m in -(ell as i64)..=(ell as i64) {
                let mabs = m.unsigned_abs() as usize;
                let sign = if m < 0 && mabs % 2 == 1 { -1.0 } else { 1.0 };
                let idx = ((ell * ell + ell) as i64 + m) as usize;
                g[(m + l) as usize] += c.coeffs[idx] * (sign * table.get(ell, mabs));
            }
        }
        for j in 0..grid.n_phi() {
            out.push(
                g.iter()
                    .zip(&azimuth)
                    .map(|(gr, az)| gr * az[j].conj())
                    .sum(),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_small_sizes() {
        assert!(matches!(
            SphereGrid::new(1, 8),
            Err(Error::Configuration(_))
        ));
        assert!(matches!(
            SphereGrid::new(4, 3),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn weights_sum_to_four_pi() {
        let g = SphereGrid::new(16, 32).unwrap();
        assert_eq!(g.len(), 512);
        let s: f64 = g.weights().iter().sum();
        assert!((s - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn exactness_rule() {
        assert_eq!(SphereGrid::new(4, 8).unwrap().exactness_degree(), 7);
        assert_eq!(SphereGrid::new(16, 20).unwrap().exactness_degree(), 19);
        assert!(SphereGrid::with_exactness(60).unwrap().exactness_degree() >= 60);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (t, w) = gauss_legendre(7);
        for p in 0..=13 {
            let q: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(p)).sum();
            let exact = if p % 2 == 1 {
                0.0
            } else {
                2.0 / (p as f64 + 1.0)
            };
            assert!((q - exact).abs() < 1e-15, "degree {p}");
        }
    }

    #[test]
    fn direction_round_trip() {
        let d = Direction::new(1.0, -2.0, 0.5).unwrap();
        let e = Direction::from_angles(d.theta(), d.phi());
        for (a, b) in d.xyz().iter().zip(e.xyz()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(Direction::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn shape_errors() {
        let g = SphereGrid::new(4, 8).unwrap();
        let f = vec![Complex64::new(1.0, 0.0); 5];
        assert!(matches!(
            inner_product(&f, &f, &g),
            Err(Error::Shape {
                expected: 32,
                got: 5
            })
        ));
        assert!(matches!(analyze(&f, &g, 1), Err(Error::Shape { .. })));
    }

    #[test]
    fn analyze_rejects_underresolved_degree() {
        let g = SphereGrid::new(4, 8).unwrap();
        let f = vec![Complex64::new(1.0, 0.0); g.len()];
        assert!(analyze(&f, &g, 3).is_ok());
        assert!(matches!(
            analyze(&f, &g, 4),
            Err(Error::Resolution {
                needed: 8,
                available: 7
            })
        ));
    }

    #[test]
    fn constant_has_only_monopole() {
        let g = SphereGrid::new(10, 20).unwrap();
        let f = vec![Complex64::new(1.0, 0.0); g.len()];
        let c = analyze(&f, &g, 4).unwrap();
        assert!((c.get_lm(0, 0).re - (4.0 * PI).sqrt()).abs() < 1e-13);
        for (idx, v) in c.iter().skip(1) {
            assert!(v.norm() < 1e-13, "{idx:?}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut c = HarmonicCoeffs::zeros(2);
        c.set(
            HarmonicIndex::new(2, -1).unwrap(),
            Complex64::new(0.1, -3.0e-17),
        );
        c.set(
            HarmonicIndex::new(0, 0).unwrap(),
            Complex64::new(1.0 / 3.0, 2.0),
        );
        let text = c.to_csv_string(Some("test"));
        assert!(text.starts_with("# test\nell,m,re,im\n"));
        assert_eq!(HarmonicCoeffs::parse_csv(&text).unwrap(), c);
    }

    #[test]
    fn csv_parse_errors() {
        assert!(HarmonicCoeffs::parse_csv("ell,m,re\n").is_err());
        assert!(HarmonicCoeffs::parse_csv("ell,m,re,im\n1,2,0,0\n").is_err());
        assert!(HarmonicCoeffs::parse_csv("").is_err());
    }

    #[test]
    fn set_grows_table() {
        let mut c = HarmonicCoeffs::zeros(1);
        c.set(HarmonicIndex::new(3, 2).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(c.max_degree(), 3);
        assert_eq!(c.get_lm(3, 2), Complex64::new(1.0, 0.0));
        assert_eq!(c.get_lm(10, 0), Complex64::new(0.0, 0.0));
    }
}
