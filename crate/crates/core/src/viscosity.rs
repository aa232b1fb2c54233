//! Finite-difference checks of candidate solutions of the limit problem
//!
//! ```text
//! -min{ |grad u| - beta u, Delta_inf u } = 0   in Omega
//!  min{ |grad u| - beta u, du/dnu      } = 0   on dOmega
//! ```
//!
//! Residuals are classical and pointwise. Points within `2h` of the ridge of
//! the boundary distance (where the candidates stop being smooth) or without
//! a full stencil are excluded instead of being tested in the viscosity sense.
//! Fields are sup-normalized before any residual is taken.

use std::io::Write;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance_field, fmt_f64, make_grid, Domain, Grid, Layout, ScalarField};
use crate::radial::limit_profile;

/// Tolerance on pointwise lower-barrier and upper-barrier comparisons.
pub const BARRIER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `|grad u| - beta u` attains the min.
    Eikonal,
    /// `Delta_inf u` (or its log-transformed counterpart) attains the min.
    Infinity,
    /// `du/dnu` attains the boundary min.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum PointCheck {
    Interior { residual: f64, branch: Branch },
    Boundary { residual: f64, branch: Branch },
    Excluded,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViscosityReport {
    #[serde(skip)]
    pub points: Vec<PointCheck>,
    pub worst_interior: f64,
    pub worst_boundary: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub excluded_count: usize,
}

impl ViscosityReport {
    fn from_points(points: Vec<PointCheck>, tolerance: f64) -> Self {
        let mut worst_interior: f64 = 0.0;
        let mut worst_boundary: f64 = 0.0;
        let mut excluded_count = 0;
        for pc in &points {
            match *pc {
                PointCheck::Interior { residual, .. } => worst_interior = worst_interior.max(residual.abs()),
                PointCheck::Boundary { residual, .. } => worst_boundary = worst_boundary.max(residual.abs()),
                PointCheck::Excluded => excluded_count += 1,
            }
        }
        let pass = worst_interior.max(worst_boundary) <= tolerance;
        Self { points, worst_interior, worst_boundary, tolerance, pass, excluded_count }
    }

    pub fn excluded(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().enumerate().filter(|(_, pc)| matches!(pc, PointCheck::Excluded)).map(|(i, _)| i)
    }

    pub fn worst(&self) -> f64 {
        self.worst_interior.max(self.worst_boundary)
    }

    /// Writes `index, coords..., class, residual, branch`.
    pub fn write_csv<W: Write>(&self, grid: &Grid, mut out: W) -> Result<()> {
        let tensor = matches!(grid.layout(), Layout::Tensor { .. });
        if tensor {
            writeln!(out, "index,x,y,class,residual,branch")?;
        } else {
            writeln!(out, "index,s,class,residual,branch")?;
        }
        for (i, (pc, p)) in self.points.iter().zip(grid.points()).enumerate() {
            let coords = if tensor { format!("{},{}", fmt_f64(p[0]), fmt_f64(p[1])) } else { fmt_f64(p[0]) };
            let (class, residual, branch) = match *pc {
                PointCheck::Interior { residual, branch } => ("interior", fmt_f64(residual), branch_name(branch)),
                PointCheck::Boundary { residual, branch } => ("boundary", fmt_f64(residual), branch_name(branch)),
                PointCheck::Excluded => ("excluded", String::new(), ""),
            };
            writeln!(out, "{i},{coords},{class},{residual},{branch}")?;
        }
        Ok(())
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Eikonal => "eikonal",
        Branch::Infinity => "infinity",
        Branch::Normal => "normal",
    }
}

/// Central first and second differences at an interior point:
/// gradient and Hessian `[uxx, uxy, uyy]`. `None` without a full stencil.
fn central_derivatives(u: &[f64], grid: &Grid, i: usize) -> Option<([f64; 2], [f64; 3])> {
    if grid.is_boundary(i) {
        return None;
    }
    match grid.layout() {
        Layout::Line { nodes } => {
            if i == 0 || i + 1 >= nodes {
                return None;
            }
            let h = grid.axis_spacing()[0];
            let d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
            let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            Some(([d1, 0.0], [d2, 0.0, 0.0]))
        }
        Layout::Tensor { nx, ny } => {
            let (ii, jj) = (i % nx, i / nx);
            if ii == 0 || jj == 0 || ii + 1 >= nx || jj + 1 >= ny {
                return None;
            }
            let [hx, hy] = grid.axis_spacing();
            let at = |a: usize, b: usize| u[b * nx + a];
            let ux = (at(ii + 1, jj) - at(ii - 1, jj)) / (2.0 * hx);
            let uy = (at(ii, jj + 1) - at(ii, jj - 1)) / (2.0 * hy);
            let uxx = (at(ii + 1, jj) - 2.0 * at(ii, jj) + at(ii - 1, jj)) / (hx * hx);
            let uyy = (at(ii, jj + 1) - 2.0 * at(ii, jj) + at(ii, jj - 1)) / (hy * hy);
            let uxy =
                (at(ii + 1, jj + 1) - at(ii + 1, jj - 1) - at(ii - 1, jj + 1) + at(ii - 1, jj - 1)) / (4.0 * hx * hy);
            Some(([ux, uy], [uxx, uxy, uyy]))
        }
    }
}

fn infinity_form(g: [f64; 2], hess: [f64; 3]) -> f64 {
    let [ux, uy] = g;
    let [uxx, uxy, uyy] = hess;
    ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy
}

/// `<D^2 u grad u, grad u>` at a grid point from central differences; `None`
/// when the point lacks a full stencil.
pub fn infinity_laplacian(field: &ScalarField, grid: &Grid, index: usize) -> Option<f64> {
    if !field.belongs_to(grid) {
        return None;
    }
    central_derivatives(field.values(), grid, index).map(|(g, h)| infinity_form(g, h))
}

/// Second-order one-sided derivative `(-3 f0 + 4 f1 - f2) / (2h)` along the
/// direction of increasing index offset.
fn one_sided(f0: f64, f1: f64, f2: f64, h: f64) -> f64 {
    (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
}

/// Gradient at a boundary point: one-sided along axes that hit the boundary,
/// central along the others.
fn boundary_gradient(u: &[f64], grid: &Grid, i: usize) -> Option<[f64; 2]> {
    match grid.layout() {
        Layout::Line { nodes } => {
            let h = grid.axis_spacing()[0];
            if nodes < 3 {
                return None;
            }
            if i == 0 {
                Some([one_sided(u[0], u[1], u[2], h), 0.0])
            } else if i + 1 == nodes {
                Some([-one_sided(u[i], u[i - 1], u[i - 2], h), 0.0])
            } else {
                None
            }
        }
        Layout::Tensor { nx, ny } => {
            let (ii, jj) = (i % nx, i / nx);
            let [hx, hy] = grid.axis_spacing();
            let at = |a: usize, b: usize| u[b * nx + a];
            let axis = |k: usize, n: usize, h: f64, f: &dyn Fn(usize) -> f64| -> f64 {
                if k == 0 {
                    one_sided(f(0), f(1), f(2), h)
                } else if k + 1 == n {
                    -one_sided(f(k), f(k - 1), f(k - 2), h)
                } else {
                    (f(k + 1) - f(k - 1)) / (2.0 * h)
                }
            };
            let ux = axis(ii, nx, hx, &|a| at(a, jj));
            let uy = axis(jj, ny, hy, &|b| at(ii, b));
            Some([ux, uy])
        }
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: [f64; 2]) -> f64 {
    dot(a, a).sqrt()
}

/// Points tested by the checker: not within `2h` of the ridge and, for
/// interior points, with a full central stencil.
fn included(grid: &Grid, u: &[f64], i: usize) -> bool {
    let h = grid.spacing();
    if grid.domain().ridge_distance(grid.points()[i]) <= 2.0 * h {
        return false;
    }
    grid.is_boundary(i) || central_derivatives(u, grid, i).is_some()
}

fn sup_normalized_values(field: &ScalarField, grid: &Grid) -> Result<Vec<f64>> {
    field.ensure_on(grid)?;
    field.ensure_positive()?;
    Ok(field.sup_normalized().into_values())
}

fn limit_residuals(u: &[f64], grid: &Grid, beta: f64) -> Vec<PointCheck> {
    (0..grid.len())
        .map(|i| {
            if !included(grid, u, i) {
                return PointCheck::Excluded;
            }
            if grid.is_boundary(i) {
                let Some(g) = boundary_gradient(u, grid, i) else {
                    return PointCheck::Excluded;
                };
                let eik = norm(g) - beta * u[i];
                // corners: each normal separately, keep the worst
                grid.normals(i)
                    .iter()
                    .map(|&nu| {
                        let dn = dot(g, nu);
                        if eik <= dn {
                            (eik, Branch::Eikonal)
                        } else {
                            (dn, Branch::Normal)
                        }
                    })
                    .max_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
                    .map(|(residual, branch)| PointCheck::Boundary { residual, branch })
                    .unwrap_or(PointCheck::Excluded)
            } else {
                let (g, hess) = central_derivatives(u, grid, i).expect("included interior point");
                let eik = norm(g) - beta * u[i];
                let inf = infinity_form(g, hess);
                let (m, branch) = if eik <= inf { (eik, Branch::Eikonal) } else { (inf, Branch::Infinity) };
                PointCheck::Interior { residual: -m, branch }
            }
        })
        .collect()
}

/// Residual tolerance `C sqrt(h)`.
pub fn tolerance(h: f64) -> f64 {
    tolerance_constant() * h.sqrt()
}

/// `C` such that the exact profile `exp(-d)` on `(-1, 1)` at resolution 64
/// passes with a factor-two margin.
pub fn tolerance_constant() -> f64 {
    static CONSTANT: OnceLock<f64> = OnceLock::new();
    *CONSTANT.get_or_init(|| {
        let grid = make_grid(Domain::Interval { a: -1.0, b: 1.0 }, 64).expect("valid calibration grid");
        let u = limit_profile(1.0, &grid).into_values();
        let points = limit_residuals(&u, &grid, 1.0);
        let worst = ViscosityReport::from_points(points, f64::INFINITY).worst();
        2.0 * worst / grid.spacing().sqrt()
    })
}

/// Pointwise residuals of the limit problem for a positive candidate.
pub fn check_limit_pde(field: &ScalarField, grid: &Grid, beta: f64) -> Result<ViscosityReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive (got {beta})")));
    }
    let u = sup_normalized_values(field, grid)?;
    let points = limit_residuals(&u, grid, beta);
    Ok(ViscosityReport::from_points(points, tolerance(grid.spacing())))
}

/// Residual of `-min{|grad v| - lambda, Delta_inf v + |grad v|^4}` for
/// `v = log(field)` at included interior points.
pub fn log_transform_check(field: &ScalarField, grid: &Grid, lambda: f64) -> Result<ViscosityReport> {
    let u = sup_normalized_values(field, grid)?;
    let v: Vec<f64> = u.iter().map(|x| x.ln()).collect();
    let points = (0..grid.len())
        .map(|i| {
            if grid.is_boundary(i) || !included(grid, &v, i) {
                return PointCheck::Excluded;
            }
            let (g, hess) = central_derivatives(&v, grid, i).expect("included interior point");
            let gn = norm(g);
            let eik = gn - lambda;
            let inf = infinity_form(g, hess) + gn.powi(4);
            let (m, branch) = if eik <= inf { (eik, Branch::Eikonal) } else { (inf, Branch::Infinity) };
            PointCheck::Interior { residual: -m, branch }
        })
        .collect();
    Ok(ViscosityReport::from_points(points, tolerance(grid.spacing())))
}

#[derive(Debug, Clone, Serialize)]
pub struct BarrierOutcome {
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `min_x [v(x) - v(x0) - g(x)]`; non-negative when the lower barrier holds.
    pub lower_margin: f64,
    /// `min_{d <= band} [v(x0) + h(x) - v(x)]`; non-negative when the upper
    /// barrier holds.
    pub upper_margin: f64,
    /// Boundary point where `v` is largest.
    pub anchor: usize,
    pub band_width: f64,
}

/// Compares `v = log u` (sup-normalized) with the barriers
/// `g = -(lambda + eps) d + gamma d^2` everywhere and
/// `h = -(lambda - eps) d` in the band `d <= R / 4`, both anchored at the
/// boundary maximum of `v`. The upper barrier only counts when
/// `lambda > eps`, i.e. when `h` decreases into the domain.
pub fn barrier_compare(field: &ScalarField, grid: &Grid, lambda: f64, eps: f64, gamma: f64) -> Result<BarrierOutcome> {
    if !(eps > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("eps and gamma must be positive (got {eps}, {gamma})")));
    }
    let u = sup_normalized_values(field, grid)?;
    let d = distance_field(grid);
    let d = d.values();
    let reach = d.iter().copied().fold(0.0, f64::max);
    let limit = eps / (2.0 * reach);
    if !(gamma < limit) {
        return Err(Error::BarrierConstraint { gamma, limit });
    }
    let v: Vec<f64> = u.iter().map(|x| x.ln()).collect();
    let anchor = grid
        .boundary_indices()
        .max_by(|&a, &b| v[a].total_cmp(&v[b]))
        .ok_or_else(|| Error::InvalidParameter("grid has no boundary points".into()))?;
    let v0 = v[anchor];
    let band_width = 0.25 * reach;

    let mut lower_margin = f64::INFINITY;
    let mut upper_margin = f64::INFINITY;
    for (vi, &di) in v.iter().zip(d) {
        let g = -(lambda + eps) * di + gamma * di * di;
        lower_margin = lower_margin.min(vi - v0 - g);
        if di <= band_width {
            let h = -(lambda - eps) * di;
            upper_margin = upper_margin.min(v0 + h - vi);
        }
    }
    Ok(BarrierOutcome {
        lower_ok: lower_margin >= -BARRIER_SLACK,
        upper_ok: lambda > eps && upper_margin >= -BARRIER_SLACK,
        lower_margin,
        upper_margin,
        anchor,
        band_width,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueBracket {
    pub lambda_low: Option<f64>,
    pub lambda_high: Option<f64>,
    pub beta: f64,
    pub min_eps: f64,
    pub width: Option<f64>,
    pub contains_beta: bool,
    pub pass: bool,
}

/// Scans `lambda` over `(0, 4 beta]` in steps of `min(eps) / 50` and keeps
/// the values for which both barriers hold for every `eps` in the grid
/// (with `gamma = eps / (4R)`).
pub fn eigenvalue_bracket(field: &ScalarField, grid: &Grid, beta: f64, eps_grid: &[f64]) -> Result<EigenvalueBracket> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("eps grid must be non-empty and positive".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive (got {beta})")));
    }
    let reach = distance_field(grid).values().iter().copied().fold(0.0, f64::max);
    let min_eps = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let step = min_eps / 50.0;
    let count = (4.0 * beta / step).ceil() as usize;

    let mut low = None;
    let mut high = None;
    for k in 1..=count {
        let lambda = k as f64 * step;
        let mut admissible = true;
        for &eps in eps_grid {
            let out = barrier_compare(field, grid, lambda, eps, eps / (4.0 * reach))?;
            if !(out.lower_ok && out.upper_ok) {
                admissible = false;
                break;
            }
        }
        if admissible {
            low.get_or_insert(lambda);
            high = Some(lambda);
        }
    }
    let width = low.zip(high).map(|(l, h)| h - l);
    let contains_beta = matches!((low, high), (Some(l), Some(h)) if l <= beta && beta <= h);
    let pass = contains_beta && width.is_some_and(|w| w <= 2.0 * min_eps);
    Ok(EigenvalueBracket { lambda_low: low, lambda_high: high, beta, min_eps, width, contains_beta, pass })
}
