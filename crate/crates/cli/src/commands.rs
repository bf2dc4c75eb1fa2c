//! The four experiment commands. Each resolves its whole configuration before
//! computing anything and returns the files to write; nothing touches the
//! filesystem here.

use std::fmt::Write as _;

use serde_json::json;
use soft_scatter::bem::{assemble, BoundaryOperator, DEFAULT_CONDITION_LIMIT, MAX_NODES};
use soft_scatter::farfield::{amplitude_from_boundary, FarFieldPattern, ParamSurface};
use soft_scatter::mie::build_mie;
use soft_scatter::specfun::{bessel_zeros, MAX_DEGREE};
use soft_scatter::sphgrid::{truncation_degree, HarmonicCoeffs, SphereGrid};
use soft_scatter::synthesis::{
    default_beta_grid, nested_residuals, obstruction_profile, projection_lower_bound,
    target_samples, DirectionSet, EigenProximity, ObstructionSweep, ScatteringSolver,
    SynthesisReport, DEFAULT_SVD_CUTOFF,
};
use soft_scatter::Error;

use crate::config::{Config, Resolved, Resolver};
use crate::CliError;

/// Largest boundary-quadrature discrepancy accepted by `farfield` on a sphere.
pub const BOUNDARY_CHECK_LIMIT: f64 = 1e-6;

const MAX_DIRECTIONS: usize = 2000;
const MAX_GRID: i64 = 400;

#[derive(Debug, Default)]
pub struct Outcome {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    /// Summary lines for standard output.
    pub messages: Vec<String>,
}

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with the config comment and header row.
fn csv(resolved: &Resolved, header: &str, rows: &[String]) -> String {
    let mut s = format!("# {}\n{header}\n", resolved.comment());
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

pub fn eigens(cfg: Config) -> Result<Outcome, CliError> {
    let mut r = Resolver::new("eigens", cfg);
    let ell_max = r.int("ell_max", None, 0, MAX_DEGREE as i64)? as usize;
    let count = r.int("count", None, 1, 1000)? as usize;
    let a = r.positive_f64("radius", Some(1.0))?;
    let resolved = r.finish()?;

    let mut rows = Vec::new();
    for ell in 0..=ell_max {
        for z in bessel_zeros(ell, count)? {
            rows.push(format!("{},{},{},{}", z.ell, z.index, e(z.x), e(z.x / a)));
        }
    }
    let n = rows.len();
    Ok(Outcome {
        files: vec![("eigens.csv".into(), csv(&resolved, "ell,index,ka,k", &rows))],
        messages: vec![format!(
            "{n} eigen-wavenumbers for ell <= {ell_max}, a = {a}"
        )],
    })
}

enum Solver {
    Mie,
    Bem {
        n_theta: usize,
        n_phi: usize,
        cond_limit: f64,
    },
}

struct Geometry {
    surface: ParamSurface,
    solver: Solver,
}

impl Geometry {
    fn resolve(r: &mut Resolver, allow_bem: bool) -> Result<Self, CliError> {
        let kind = r.string(
            "geometry",
            "sphere",
            if allow_bem {
                &["sphere", "ellipsoid"]
            } else {
                &["sphere"]
            },
        )?;
        let surface = if kind == "sphere" {
            ParamSurface::sphere(r.positive_f64("radius", Some(1.0))?)?
        } else {
            let [a, b, c] = r.triple("semi_axes", [1.0, 1.2, 0.8])?;
            ParamSurface::ellipsoid(a, b, c)
                .map_err(|err| CliError::Config(format!("`semi_axes`: {err}")))?
        };
        if !allow_bem {
            return Ok(Self {
                surface,
                solver: Solver::Mie,
            });
        }
        let default = if kind == "sphere" { "mie" } else { "bem" };
        let allowed: &[&str] = if kind == "sphere" {
            &["mie", "bem"]
        } else {
            &["bem"]
        };
        let solver = if r.string("solver", default, allowed)? == "mie" {
            Solver::Mie
        } else {
            let n_theta = r.int("bem_n_theta", Some(16), 2, MAX_GRID)?;
            let n_phi = r.int("bem_n_phi", Some(2 * n_theta), 3, 2 * MAX_GRID)?;
            if (n_theta * n_phi) as usize > MAX_NODES {
                return Err(CliError::Config(format!(
                    "bem_n_theta × bem_n_phi = {} exceeds the node cap {MAX_NODES}",
                    n_theta * n_phi
                )));
            }
            let cond_limit = r.positive_f64("bem_cond_limit", Some(DEFAULT_CONDITION_LIMIT))?;
            Solver::Bem {
                n_theta: n_theta as usize,
                n_phi: n_phi as usize,
                cond_limit,
            }
        };
        Ok(Self { surface, solver })
    }

    fn radius(&self) -> f64 {
        self.surface.bounding_radius()
    }

    fn name(&self) -> &'static str {
        match self.solver {
            Solver::Mie => "mie",
            Solver::Bem { .. } => "bem",
        }
    }

    fn build(&self, k: f64) -> Result<Box<dyn ScatteringSolver>, CliError> {
        Ok(match self.solver {
            Solver::Mie => Box::new(build_mie(self.radius(), k)?),
            Solver::Bem {
                n_theta,
                n_phi,
                cond_limit,
            } => Box::new(self.bem(k, n_theta, n_phi, cond_limit)?),
        })
    }

    fn bem(
        &self,
        k: f64,
        n_theta: usize,
        n_phi: usize,
        limit: f64,
    ) -> Result<BoundaryOperator, CliError> {
        let op = assemble(self.surface, k, n_theta, n_phi)?.with_condition_limit(limit);
        let cond = op.condition_estimate();
        if cond > limit {
            let mut msg = format!(
                "boundary operator at k = {k} ({} nodes) is ill-conditioned: condition estimate {cond:.6e} exceeds the limit {limit:.6e}",
                op.len()
            );
            if let Ok(Some((z, d))) = op.eigen_distance() {
                let _ = write!(
                    msg,
                    "; nearest ball eigenvalue is zero {} of j_{} at ka = {}, |ka - x| = {d:.3e}",
                    z.index, z.ell, z.x
                );
            }
            return Err(CliError::Numerical(msg));
        }
        Ok(op)
    }
}

/// Optional explicit β-grid, else the default grid for `k_max`.
fn beta_grid(r: &mut Resolver, k_max: f64, radius: f64) -> Result<SphereGrid, CliError> {
    let n_theta = r.optional_int("beta_n_theta", 1, MAX_GRID)?;
    let n_phi = r.optional_int("beta_n_phi", 1, 2 * MAX_GRID)?;
    Ok(match (n_theta, n_phi) {
        (None, None) => default_beta_grid(k_max, radius)?,
        (Some(t), p) => SphereGrid::new(t as usize, p.unwrap_or(2 * t) as usize)?,
        (None, Some(_)) => {
            return Err(CliError::Config(
                "`beta_n_phi` requires `beta_n_theta`".into(),
            ))
        }
    })
}

fn eigen_json(e: &Option<EigenProximity>) -> serde_json::Value {
    match e {
        Some(p) => {
            json!({ "ell": p.ell, "index": p.index, "zero": p.zero, "distance": p.distance })
        }
        None => serde_json::Value::Null,
    }
}

pub fn farfield(cfg: Config) -> Result<Outcome, CliError> {
    let mut r = Resolver::new("farfield", cfg);
    let geom = Geometry::resolve(&mut r, true)?;
    let radius = geom.radius();
    let k = r.wavenumber("k", radius, None)?;
    let alpha = r.direction("alpha", [0.0, 0.0, 1.0])?;
    let grid = beta_grid(&mut r, k, radius)?;
    let default_lmax = truncation_degree(k, radius).min(grid.exactness_degree() / 2);
    let lmax = r.int(
        "coeff_lmax",
        Some(default_lmax as i64),
        0,
        MAX_DEGREE as i64,
    )? as usize;
    if 2 * lmax > grid.exactness_degree() {
        return Err(CliError::Config(format!(
            "`coeff_lmax` = {lmax} needs a β-grid exact to degree {}, the grid reaches {}",
            2 * lmax,
            grid.exactness_degree()
        )));
    }
    let resolved = r.finish()?;

    let mut messages = vec![format!(
        "far field: solver {}, k = {k}, {} β-directions",
        geom.name(),
        grid.len()
    )];
    let pattern = match geom.solver {
        Solver::Mie => build_mie(radius, k)?.far_field_pattern(&alpha, &grid),
        Solver::Bem {
            n_theta,
            n_phi,
            cond_limit,
        } => {
            let op = geom.bem(k, n_theta, n_phi, cond_limit)?;
            messages.push(format!(
                "boundary operator: {} nodes, condition estimate {:.6e}",
                op.len(),
                op.condition_estimate()
            ));
            op.far_field(&alpha, &grid)?
        }
    };
    let pattern: FarFieldPattern = pattern.with_coeffs(lmax)?;
    let coeffs = pattern.coeffs().expect("coefficients attached");

    if let Some(a) = geom.surface.sphere_radius() {
        let mie = build_mie(a, k)?;
        let boundary = SphereGrid::with_exactness(4 * mie.max_degree())?;
        let trace = mie.boundary_normal_derivative(&boundary, &alpha);
        let via_boundary = amplitude_from_boundary(trace.quadrature(), trace.values(), k, &grid)?;
        let closed = mie.far_field_pattern(&alpha, &grid);
        let gap = max_gap(via_boundary.values(), closed.values());
        messages.push(format!(
            "boundary-quadrature amplitude vs closed form: max discrepancy {gap:.6e}"
        ));
        if gap.is_nan() || gap > BOUNDARY_CHECK_LIMIT {
            return Err(CliError::Numerical(format!(
                "boundary-quadrature discrepancy {gap:.6e} exceeds {BOUNDARY_CHECK_LIMIT:e}"
            )));
        }
        if matches!(geom.solver, Solver::Bem { .. }) {
            let gap = max_gap(pattern.values(), closed.values());
            messages.push(format!(
                "boundary-element amplitude vs closed form: max discrepancy {gap:.6e}"
            ));
        }
        if let Some(p) = ScatteringSolver::eigen_proximity(&mie)? {
            messages.push(degree_report(coeffs, &p));
        }
    }

    let rows: Vec<String> = grid
        .nodes()
        .iter()
        .zip(pattern.values())
        .map(|(d, v)| format!("{},{},{},{}", e(d.theta()), e(d.phi()), e(v.re), e(v.im)))
        .collect();
    let coeff_rows: Vec<String> = coeffs
        .iter()
        .map(|(i, c)| format!("{},{},{},{}", i.ell(), i.m(), e(c.re), e(c.im)))
        .collect();
    Ok(Outcome {
        files: vec![
            (
                "farfield.csv".into(),
                csv(&resolved, "theta,phi,re_A,im_A", &rows),
            ),
            (
                "farfield_coeffs.csv".into(),
                csv(&resolved, "ell,m,re,im", &coeff_rows),
            ),
        ],
        messages,
    })
}

fn max_gap(a: &[soft_scatter::Complex64], b: &[soft_scatter::Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn degree_report(coeffs: &HarmonicCoeffs, p: &EigenProximity) -> String {
    let size = if p.ell <= coeffs.max_degree() {
        coeffs.degree_max_abs(p.ell)
    } else {
        0.0
    };
    format!(
        "nearest ball eigenvalue: zero {} of j_{} at ka = {}, |ka - x| = {:.3e}{}; max |A_{},m| = {:.3e}",
        p.index,
        p.ell,
        p.zero,
        p.distance,
        if p.flagged() { " (eigenvalue)" } else { "" },
        p.ell,
        size
    )
}

fn directions(r: &mut Resolver, max_m: usize) -> Result<DirectionSet, CliError> {
    let rule = r.string("direction_rule", "spiral", &["spiral", "grid"])?;
    let set = if rule == "spiral" {
        let seed = r.int("direction_seed", Some(0), 0, i64::from(u32::MAX))? as u64;
        DirectionSet::spiral(max_m, seed)?
    } else {
        let t = r.int("direction_n_theta", None, 1, MAX_GRID)? as usize;
        let p = r.int("direction_n_phi", Some(2 * t as i64), 1, 2 * MAX_GRID)? as usize;
        let set = DirectionSet::grid(t, p)?;
        if set.len() < max_m {
            return Err(CliError::Config(format!(
                "`m_list` needs {max_m} directions, the direction grid has {}",
                set.len()
            )));
        }
        set.prefix(max_m)?
    };
    Ok(set)
}

pub fn synthesize(cfg: Config) -> Result<Outcome, CliError> {
    let mut r = Resolver::new("synthesize", cfg);
    let geom = Geometry::resolve(&mut r, true)?;
    let radius = geom.radius();
    let ks = r.wavenumbers("k", radius)?;
    let target = r.target("target")?;
    let m_list = r.int_list("m_list", &[4, 9, 16, 25, 36, 49], MAX_DIRECTIONS)?;
    let dirs = directions(&mut r, *m_list.last().expect("non-empty"))?;
    let cutoff = r.non_negative_f64("svd_cutoff", DEFAULT_SVD_CUTOFF)?;
    let grid = beta_grid(&mut r, ks[ks.len() - 1], radius)?;
    let resolved = r.finish()?;
    let samples = target_samples(&target, &grid)?;

    let mut reports: Vec<(SynthesisReport, Option<f64>)> = Vec::new();
    for &k in &ks {
        let model = geom.build(k)?;
        let bound = match geom.surface.sphere_radius() {
            Some(a) => Some(projection_lower_bound(&target, a, k)?),
            None => None,
        };
        for rep in nested_residuals(model.as_ref(), &dirs, &m_list, &samples, &grid, cutoff)? {
            reports.push((rep, bound));
        }
    }

    let mut jsonl = serde_json::to_string(&resolved.json()).expect("serializable") + "\n";
    let mut rows = Vec::new();
    let mut messages = vec![format!(
        "synthesis: target {}, solver {}, {} wavenumbers, M in {:?}, {} β-directions",
        target.describe(),
        geom.name(),
        ks.len(),
        m_list,
        grid.len()
    )];
    for (rep, bound) in &reports {
        let coeffs: Vec<[f64; 2]> = rep.coefficients.iter().map(|c| [c.re, c.im]).collect();
        let line = json!({
            "k": rep.k,
            "m": rep.m,
            "residual": rep.residual,
            "relative_residual": rep.relative_residual(),
            "target_norm": rep.target_norm,
            "gram_condition": rep.gram_condition,
            "rank": rep.rank,
            "eigenflag": rep.eigenflag(),
            "nearest_eigen": eigen_json(&rep.eigen),
            "projection_lower_bound": bound,
            "coefficients": coeffs,
        });
        jsonl.push_str(&serde_json::to_string(&line).expect("serializable"));
        jsonl.push('\n');
        rows.push(format!(
            "{},{},{},{},{},{},{},{}",
            e(rep.k),
            rep.m,
            e(rep.residual),
            e(rep.relative_residual()),
            e(rep.gram_condition),
            rep.rank,
            rep.eigenflag(),
            bound.map(e).unwrap_or_default()
        ));
    }
    for k in &ks {
        let last = reports
            .iter()
            .filter(|(rep, _)| rep.k == *k)
            .map(|(rep, _)| rep)
            .next_back()
            .expect("one per M");
        let mut msg = format!(
            "k = {k}: residual at M = {} is {:.6e} (relative {:.6e})",
            last.m,
            last.residual,
            last.relative_residual()
        );
        if last.eigenflag() {
            msg.push_str("; k is an interior eigenvalue of the ball, the residual cannot vanish");
        }
        messages.push(msg);
    }
    Ok(Outcome {
        files: vec![
            ("synthesis.jsonl".into(), jsonl),
            (
                "synthesis_residuals.csv".into(),
                csv(
                    &resolved,
                    "k,m,residual,relative_residual,gram_condition,rank,eigenflag,projection_lower_bound",
                    &rows,
                ),
            ),
        ],
        messages,
    })
}

pub fn sweep(cfg: Config) -> Result<Outcome, CliError> {
    let mut r = Resolver::new("sweep", cfg);
    let geom = Geometry::resolve(&mut r, false)?;
    let radius = geom.radius();
    let target = r.target("target")?;
    let ell0 = r.int(
        "ell0",
        Some(target.max_degree() as i64),
        0,
        MAX_DEGREE as i64,
    )? as usize;
    let m = r.int("sweep_m", Some(16), 1, MAX_DIRECTIONS as i64)? as usize;
    let seed = r.int("direction_seed", Some(0), 0, i64::from(u32::MAX))? as u64;
    let k_min = r.wavenumber("k_min", radius, None)?;
    let k_max = r.wavenumber("k_max", radius, None)?;
    let n_k = r.int("n_k", Some(101), 1, 100_000)? as usize;
    if k_max < k_min {
        return Err(CliError::Config(format!(
            "`k_max` = {k_max} is below `k_min` = {k_min}"
        )));
    }
    let cutoff = r.non_negative_f64("svd_cutoff", DEFAULT_SVD_CUTOFF)?;
    let resolved = r.finish()?;
    let plan = ObstructionSweep {
        radius,
        ell0,
        directions: m,
        seed,
        k_min,
        k_max,
        n_k,
        svd_cutoff: cutoff,
    };
    let last_k = *plan.wavenumbers().last().expect("n_k >= 1");
    target_samples(&target, &default_beta_grid(last_k, radius)?)?;

    let profile = obstruction_profile(&plan, &target)?;
    let mut rows: Vec<String> = profile
        .points
        .iter()
        .map(|p| {
            format!(
                "sample,{},{},{},{},{},",
                e(p.k),
                e(p.residual),
                e(p.relative_residual),
                e(p.gram_condition),
                p.eigenflag
            )
        })
        .collect();
    let mut messages = vec![format!(
        "sweep: target {}, M = {m}, {} wavenumbers in [{k_min}, {k_max}], flatness {:.6}",
        target.describe(),
        profile.points.len(),
        profile.flatness()
    )];
    for z in &profile.eigen_ks {
        messages.push(format!("eigen-wavenumber of j_{ell0} in range: {z}"));
    }
    for p in &profile.peaks {
        let nearest = p.nearest_eigen_k.map(e).unwrap_or_default();
        rows.push(format!("peak,{},{},,,,{nearest}", e(p.k), e(p.residual)));
        messages.push(format!(
            "peak at k = {} (residual {:.6e}), nearest eigen-wavenumber {nearest}",
            p.k, p.residual
        ));
    }
    Ok(Outcome {
        files: vec![(
            "sweep.csv".into(),
            csv(
                &resolved,
                "kind,k,residual,relative_residual,gram_condition,eigenflag,nearest_eigen_k",
                &rows,
            ),
        )],
        messages,
    })
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::IllConditioned { .. }
            | Error::SingularMatrix(_)
            | Error::SingularArgument(_) => CliError::Numerical(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}
