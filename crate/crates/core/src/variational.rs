//! Direct minimization of the discrete Rayleigh quotient
//!
//! ```text
//! R(w) = ( sum_cells |grad_h w|^p  -  beta^p sum_bdy |w|^p ) / sum_vol |w|^p
//! ```
//!
//! Gradients are piecewise constant: one difference per cell on line grids,
//! and on tensor grids four one-sided "corner" gradients per cell (each
//! built from the two cell edges meeting at that corner, weight `area / 4`).
//! Mass and boundary terms use the grid's trapezoid weights.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Grid, Layout, ScalarField};

/// Eigenvalue, positive eigenfunction and solver diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub p: f64,
    pub beta: f64,
    pub domain: Domain,
    pub lambda: f64,
    #[serde(skip)]
    pub u: ScalarField,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    Plateau,
    LineSearchStalled,
    IterationLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub history_len: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop once the max-norm of the quotient gradient drops below this.
    pub tolerance: f64,
    /// Relative quotient change over [`MinimizeOptions::plateau_window`]
    /// iterations that counts as a plateau.
    pub plateau: f64,
    pub plateau_window: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iters: 200_000, tolerance: 1e-10, plateau: 1e-12, plateau_window: 5 }
    }
}

/// Multiplicative step of the p-continuation.
pub const CONTINUATION_FACTOR: f64 = 1.5;

const POSITIVITY_FLOOR: f64 = 1e-14;
const SMOOTHING: f64 = 1e-10;

fn check_p_beta(p: f64, beta: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must be a finite exponent > 1 (got {p})")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive (got {beta})")));
    }
    Ok(())
}

/// The three p-homogeneous pieces of the quotient and their gradients.
struct Pieces {
    stiffness: f64,
    boundary: f64,
    mass: f64,
    grad: Option<[Vec<f64>; 3]>,
}

/// `(|g|^2 + eps^2)^{p/2}` and its derivative factor `p (|g|^2 + eps^2)^{(p-2)/2}`.
#[inline]
fn power_and_flux(g2: f64, p: f64, eps: f64) -> (f64, f64) {
    let r2 = g2 + eps * eps;
    if r2 == 0.0 {
        return (0.0, 0.0);
    }
    let base = r2.powf(0.5 * (p - 2.0));
    (base * r2, p * base)
}

/// Evaluates the pieces on `w` (expected to be max-normalized).
fn pieces(p: f64, grid: &Grid, w: &[f64], eps: f64, with_grad: bool) -> Pieces {
    let n = w.len();
    let mut ga = if with_grad { vec![0.0; n] } else { Vec::new() };
    let mut stiffness = 0.0;
    let cells = grid.cell_measures();
    match grid.layout() {
        Layout::Line { .. } => {
            let h = grid.axis_spacing()[0];
            for (k, &c) in cells.iter().enumerate() {
                let g = (w[k + 1] - w[k]) / h;
                let (e, flux) = power_and_flux(g * g, p, eps);
                stiffness += c * e;
                if with_grad {
                    let f = c * flux * g / h;
                    ga[k + 1] += f;
                    ga[k] -= f;
                }
            }
        }
        Layout::Tensor { nx, ny } => {
            let [hx, hy] = grid.axis_spacing();
            let idx = |i: usize, j: usize| j * nx + i;
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    let quarter = 0.25 * cells[j * (nx - 1) + i];
                    for (ci, cj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let (r0, r1) = (idx(i, j + cj), idx(i + 1, j + cj));
                        let (c0, c1) = (idx(i + ci, j), idx(i + ci, j + 1));
                        let gx = (w[r1] - w[r0]) / hx;
                        let gy = (w[c1] - w[c0]) / hy;
                        let (e, flux) = power_and_flux(gx * gx + gy * gy, p, eps);
                        stiffness += quarter * e;
                        if with_grad {
                            let fx = quarter * flux * gx / hx;
                            let fy = quarter * flux * gy / hy;
                            ga[r1] += fx;
                            ga[r0] -= fx;
                            ga[c1] += fy;
                            ga[c0] -= fy;
                        }
                    }
                }
            }
        }
    }

    let mut boundary = 0.0;
    let mut mass = 0.0;
    let mut gb = if with_grad { vec![0.0; n] } else { Vec::new() };
    let mut gc = if with_grad { vec![0.0; n] } else { Vec::new() };
    for (i, (&m, &b)) in grid.volume_weights().iter().zip(grid.boundary_weights()).enumerate() {
        let a = w[i].abs();
        if a == 0.0 {
            continue;
        }
        let ap1 = a.powf(p - 1.0);
        let ap = ap1 * a;
        mass += m * ap;
        boundary += b * ap;
        if with_grad {
            let d = p * ap1 * w[i].signum();
            gc[i] = m * d;
            gb[i] = b * d;
        }
    }
    Pieces { stiffness, boundary, mass, grad: with_grad.then_some([ga, gb, gc]) }
}

fn check_field(grid: &Grid, w: &ScalarField) -> Result<f64> {
    w.ensure_on(grid)?;
    let scale = w.max_abs();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    Ok(scale)
}

/// Quotient value and, optionally, its gradient with respect to nodal values.
fn quotient_parts(
    p: f64,
    beta: f64,
    grid: &Grid,
    w: &[f64],
    scale: f64,
    eps: f64,
    with_grad: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    // max-factoring: R is 0-homogeneous, so evaluate on w / max|w|
    let normalized: Vec<f64> = w.iter().map(|v| v / scale).collect();
    let parts = pieces(p, grid, &normalized, eps, with_grad);
    if !(parts.mass > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let bp = beta.powf(p);
    let q = (parts.stiffness - bp * parts.boundary) / parts.mass;
    let grad = parts.grad.map(|[ga, gb, gc]| {
        ga.iter().zip(&gb).zip(&gc).map(|((a, b), c)| (a - bp * b - q * c) / parts.mass / scale).collect()
    });
    Ok((q, grad))
}

/// Discrete Rayleigh quotient of `w`.
pub fn rayleigh_quotient(p: f64, beta: f64, grid: &Grid, w: &ScalarField) -> Result<f64> {
    check_p_beta(p, beta)?;
    let scale = check_field(grid, w)?;
    quotient_parts(p, beta, grid, w.values(), scale, 0.0, false).map(|(q, _)| q)
}

/// Exact gradient of [`rayleigh_quotient`] with respect to the nodal values.
pub fn quotient_gradient(p: f64, beta: f64, grid: &Grid, w: &ScalarField) -> Result<ScalarField> {
    check_p_beta(p, beta)?;
    let scale = check_field(grid, w)?;
    let (_, g) = quotient_parts(p, beta, grid, w.values(), scale, 0.0, true)?;
    ScalarField::new(grid, g.expect("gradient requested"))
}

/// `(sum_bdy |w|^p)^{1/p}`.
pub fn boundary_lp_norm(p: f64, grid: &Grid, w: &[f64]) -> f64 {
    let scale = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = w.iter().zip(grid.boundary_weights()).map(|(v, b)| b * (v.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

/// Discrete `||w||_p^p` over the domain and `||grad_h w||_p^p`.
pub fn lp_energies(p: f64, grid: &Grid, w: &ScalarField) -> Result<(f64, f64)> {
    w.ensure_on(grid)?;
    let parts = pieces(p, grid, w.values(), 0.0, false);
    Ok((parts.mass, parts.stiffness))
}

fn normalize_boundary(p: f64, grid: &Grid, w: &mut [f64]) {
    let norm = boundary_lp_norm(p, grid, w);
    if norm > 0.0 && norm.is_finite() {
        w.iter_mut().for_each(|v| *v /= norm);
    }
}

fn clamp_positive(w: &mut [f64]) {
    let floor = POSITIVITY_FLOOR * w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    w.iter_mut().for_each(|v| *v = v.max(floor));
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes the quotient by nonlinear conjugate gradients (Polak-Ribiere+)
/// with Armijo backtracking; iterates are clamped positive and renormalized
/// to unit boundary `L^p` norm after every step.
pub fn minimize(
    p: f64,
    beta: f64,
    grid: &Grid,
    init: Option<&ScalarField>,
    opts: &MinimizeOptions,
) -> Result<EigenPair> {
    check_p_beta(p, beta)?;
    let mut w: Vec<f64> = match init {
        Some(f) => {
            f.ensure_on(grid)?;
            if let Some(i) = f.values().iter().position(|&v| !(v > 0.0)) {
                return Err(Error::NonPositiveField { index: i, value: f.values()[i] });
            }
            f.values().to_vec()
        }
        None => vec![1.0; grid.len()],
    };
    normalize_boundary(p, grid, &mut w);

    let eval = |w: &[f64]| -> Result<(f64, Vec<f64>)> {
        let scale = max_norm(w);
        let eps = SMOOTHING;
        let (q, g) = quotient_parts(p, beta, grid, w, scale, eps, true)?;
        Ok((q, g.unwrap()))
    };
    let value = |w: &[f64]| -> Result<f64> {
        let scale = max_norm(w);
        quotient_parts(p, beta, grid, w, scale, SMOOTHING, false).map(|(q, _)| q)
    };

    let (mut q, mut g) = eval(&w)?;
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut alpha = 1e-2 * max_norm(&w) / max_norm(&d).max(f64::MIN_POSITIVE);
    let mut history = vec![q];
    let mut iterations = 0;
    let stop;

    loop {
        let gnorm = max_norm(&g);
        if gnorm <= opts.tolerance {
            stop = StopReason::GradientTolerance;
            break;
        }
        let k = history.len();
        if k > opts.plateau_window {
            let old = history[k - 1 - opts.plateau_window];
            if (q - old).abs() <= opts.plateau * q.abs() {
                stop = StopReason::Plateau;
                break;
            }
        }
        if iterations >= opts.max_iters {
            stop = StopReason::IterationLimit;
            break;
        }
        iterations += 1;

        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        // Armijo backtracking on the projected (clamped) step, with a
        // quadratic-interpolation refinement of accepted steps
        let project = |step: f64| {
            let mut trial: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            clamp_positive(&mut trial);
            trial
        };
        let quad_min = |step: f64, qt: f64| {
            let curv = qt - q - slope * step;
            (curv > 0.0).then(|| -slope * step * step / (2.0 * curv))
        };
        let mut step = alpha * 2.0;
        let mut accepted: Option<(f64, Vec<f64>, f64)> = None;
        for _ in 0..80 {
            let trial = project(step);
            let qt = value(&trial).unwrap_or(f64::INFINITY);
            if qt <= q + 1e-4 * step * slope {
                let mut best = (step, trial, qt);
                if let Some(s2) = quad_min(step, qt).filter(|s2| *s2 > 0.0 && *s2 <= 4.0 * step) {
                    let t2 = project(s2);
                    if let Ok(q2) = value(&t2) {
                        if q2 < best.2 {
                            best = (s2, t2, q2);
                        }
                    }
                }
                accepted = Some(best);
                break;
            }
            step = match quad_min(step, qt) {
                Some(s2) if qt.is_finite() => s2.clamp(0.1 * step, 0.5 * step),
                _ => 0.5 * step,
            };
        }
        let Some((step, mut next, _)) = accepted else {
            stop = StopReason::LineSearchStalled;
            break;
        };
        alpha = step;

        let before = boundary_lp_norm(p, grid, &next);
        normalize_boundary(p, grid, &mut next);
        let (qn, gn) = eval(&next)?;

        // Polak-Ribiere+, direction carried into the renormalized frame
        let gg = dot(&g, &g);
        let beta_pr = if gg > 0.0 { (dot(&gn, &gn) - dot(&gn, &g)).max(0.0) / gg } else { 0.0 };
        let rescale = if before > 0.0 { 1.0 / before } else { 1.0 };
        d = gn.iter().zip(&d).map(|(gv, dv)| -gv + beta_pr * rescale * dv).collect();
        alpha *= rescale;

        w = next;
        q = qn;
        g = gn;
        history.push(q);
    }

    let u = ScalarField::new(grid, w)?;
    let lambda = rayleigh_quotient(p, beta, grid, &u)?;
    let pair = EigenPair {
        p,
        beta,
        domain: *grid.domain(),
        lambda,
        u,
        diagnostics: Diagnostics { iterations, gradient_norm: max_norm(&g), history_len: history.len(), stop },
    };
    match stop {
        StopReason::IterationLimit => {
            Err(Error::NotConverged { iterations, gradient_norm: pair.diagnostics.gradient_norm, best: Box::new(pair) })
        }
        _ => Ok(pair),
    }
}

/// The exponents visited by continuation toward `p_target`, starting at 2.
pub fn continuation_path(p_target: f64) -> Vec<f64> {
    if p_target <= 2.0 {
        return vec![p_target];
    }
    let mut path = vec![2.0];
    let mut p = 2.0;
    while p * CONTINUATION_FACTOR < p_target {
        p *= CONTINUATION_FACTOR;
        path.push(p);
    }
    path.push(p_target);
    path
}

/// Solves at `p = 2` and steps `p` by [`CONTINUATION_FACTOR`] up to
/// `p_target`, seeding each solve with the previous minimizer.
pub fn minimize_continuation(p_target: f64, beta: f64, grid: &Grid, opts: &MinimizeOptions) -> Result<EigenPair> {
    check_p_beta(p_target, beta)?;
    let mut current: Option<EigenPair> = None;
    for p in continuation_path(p_target) {
        let init = current.as_ref().map(|pair| &pair.u);
        current = Some(minimize(p, beta, grid, init, opts)?);
    }
    Ok(current.expect("path is never empty"))
}

/// Per-node weak-form residual
/// `int |grad u|^{p-2} grad u . grad phi_i - lambda int |u|^{p-2} u phi_i - beta^p int_bdy |u|^{p-2} u phi_i`
/// against the nodal test functions, divided by `||u||_{L^p}^{p-1}`.
pub fn euler_lagrange_residuals(p: f64, beta: f64, lambda: f64, grid: &Grid, u: &ScalarField) -> Result<ScalarField> {
    check_p_beta(p, beta)?;
    let scale = check_field(grid, u)?;
    let normalized: Vec<f64> = u.values().iter().map(|v| v / scale).collect();
    let parts = pieces(p, grid, &normalized, 0.0, true);
    if !(parts.mass > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let [ga, gb, gc] = parts.grad.unwrap();
    let bp = beta.powf(p);
    let norm = parts.mass.powf((p - 1.0) / p);
    let values = ga.iter().zip(&gb).zip(&gc).map(|((a, b), c)| (a - lambda * c - bp * b) / p / norm).collect();
    ScalarField::new(grid, values)
}

/// Largest absolute weak-form residual of an eigenpair.
pub fn euler_lagrange_residual(pair: &EigenPair, grid: &Grid) -> Result<f64> {
    let r = euler_lagrange_residuals(pair.p, pair.beta, pair.lambda, grid, &pair.u)?;
    Ok(r.max_abs())
}

impl EigenPair {
    pub fn root(&self) -> f64 {
        (-self.lambda).powf(1.0 / self.p)
    }

    /// Relative defect of `(-lambda) ||u||_p^p + ||grad u||_p^p = beta^p`
    /// for the boundary-normalized eigenfunction.
    pub fn energy_defect(&self, grid: &Grid) -> Result<f64> {
        let mut u = self.u.values().to_vec();
        normalize_boundary(self.p, grid, &mut u);
        let u = ScalarField::new(grid, u)?;
        let (mass, stiff) = lp_energies(self.p, grid, &u)?;
        let bp = self.beta.powf(self.p);
        Ok(((-self.lambda) * mass + stiff - bp) / bp)
    }
}
