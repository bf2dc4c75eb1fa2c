//! Smooth closed surfaces parametrised over the unit sphere and their quadrature.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::sphgrid::{Direction, SphereGrid};
use crate::{Error, Result};

/// A closed star-shaped surface given as a smooth map `p ↦ r(p)` from the unit
/// sphere. `area_element` is the surface measure relative to `dp` on `S²`
/// (the `(θ, φ)` Jacobian divided by `sin θ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSurface {
    Sphere { radius: f64 },
    Ellipsoid { semi_axes: [f64; 3] },
}

impl ParamSurface {
    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self::Sphere { radius })
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        if [a, b, c].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(format!(
                "ellipsoid semi-axes must be positive, got ({a}, {b}, {c})"
            )));
        }
        Ok(Self::Ellipsoid {
            semi_axes: [a, b, c],
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Sphere { .. } => "sphere",
            Self::Ellipsoid { .. } => "ellipsoid",
        }
    }

    fn axes(&self) -> [f64; 3] {
        match *self {
            Self::Sphere { radius } => [radius; 3],
            Self::Ellipsoid { semi_axes } => semi_axes,
        }
    }

    /// Radius when the surface is a ball centred at the origin.
    pub fn sphere_radius(&self) -> Option<f64> {
        let [a, b, c] = self.axes();
        (a == b && b == c).then_some(a)
    }

    pub fn bounding_radius(&self) -> f64 {
        self.axes().iter().fold(0.0, |m: f64, v| m.max(*v))
    }

    pub fn point(&self, p: &Direction) -> [f64; 3] {
        let [a, b, c] = self.axes();
        [a * p.x(), b * p.y(), c * p.z()]
    }

    /// Unit normal pointing out of the enclosed domain.
    pub fn normal(&self, p: &Direction) -> Direction {
        let [a, b, c] = self.axes();
        Direction::new(p.x() / a, p.y() / b, p.z() / c).expect("nonzero gradient")
    }

    pub fn area_element(&self, p: &Direction) -> f64 {
        let [a, b, c] = self.axes();
        let g = [p.x() / a, p.y() / b, p.z() / c];
        a * b * c * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
    }
}

/// A surface sampled on a parameter grid, with the Jacobian folded into the weights.
#[derive(Debug, Clone)]
pub struct SurfaceQuadrature {
    surface: ParamSurface,
    grid: SphereGrid,
    points: Vec<[f64; 3]>,
    normals: Vec<Direction>,
    weights: Vec<f64>,
}

impl SurfaceQuadrature {
    pub fn new(surface: ParamSurface, grid: SphereGrid) -> Self {
        let points = grid.nodes().iter().map(|p| surface.point(p)).collect();
        let normals = grid.nodes().iter().map(|p| surface.normal(p)).collect();
        let weights = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(p, w)| w * surface.area_element(p))
            .collect();
        Self {
            surface,
            grid,
            points,
            normals,
            weights,
        }
    }

    pub fn with_resolution(surface: ParamSurface, n_theta: usize, n_phi: usize) -> Result<Self> {
        Ok(Self::new(surface, SphereGrid::new(n_theta, n_phi)?))
    }

    pub fn surface(&self) -> &ParamSurface {
        &self.surface
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn normals(&self) -> &[Direction] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Quadrature `L²(S)` norm of nodal samples.
    pub fn l2_norm(&self, values: &[Complex64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt())
    }
}

/// Samples of the normal derivative `u_N` on a surface quadrature.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    quadrature: SurfaceQuadrature,
    values: Vec<Complex64>,
}

impl BoundaryTrace {
    pub fn new(quadrature: SurfaceQuadrature, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != quadrature.len() {
            return Err(Error::Shape {
                expected: quadrature.len(),
                got: values.len(),
            });
        }
        Ok(Self { quadrature, values })
    }

    pub fn quadrature(&self) -> &SurfaceQuadrature {
        &self.quadrature
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// CSV with columns `theta,phi,re_h,im_h` (parameter angles of each node).
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "theta,phi,re_h,im_h")?;
        for (p, v) in self.quadrature.grid().nodes().iter().zip(&self.values) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                p.theta(),
                p.phi(),
                v.re,
                v.im
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_geometry() {
        assert!(ParamSurface::sphere(0.0).is_err());
        assert!(ParamSurface::ellipsoid(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn sphere_area_and_normals() {
        let q =
            SurfaceQuadrature::with_resolution(ParamSurface::sphere(2.0).unwrap(), 8, 16).unwrap();
        assert!((q.area() - 16.0 * PI).abs() < 1e-12);
        for (p, n) in q.points().iter().zip(q.normals()) {
            assert!((n.dot_point(p) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn prolate_spheroid_area() {
        let (a, c) = (1.0_f64, 1.5_f64);
        let e = (1.0 - a * a / (c * c)).sqrt();
        let exact = 2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin());
        let q =
            SurfaceQuadrature::with_resolution(ParamSurface::ellipsoid(a, a, c).unwrap(), 30, 60)
                .unwrap();
        assert!((q.area() - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn ellipsoid_normals_point_outward() {
        let s = ParamSurface::ellipsoid(1.0, 1.2, 0.8).unwrap();
        let q = SurfaceQuadrature::with_resolution(s, 10, 20).unwrap();
        for (p, n) in q.points().iter().zip(q.normals()) {
            assert!(n.dot_point(p) > 0.0);
            let [x, y, z] = n.xyz();
            assert!((x * x + y * y + z * z - 1.0).abs() < 1e-12);
        }
        assert!(q.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn trace_length_is_checked() {
        let q =
            SurfaceQuadrature::with_resolution(ParamSurface::sphere(1.0).unwrap(), 4, 8).unwrap();
        assert!(matches!(
            BoundaryTrace::new(q, vec![Complex64::new(0.0, 0.0); 3]),
            Err(Error::Shape {
                expected: 32,
                got: 3
            })
        ));
    }
}
