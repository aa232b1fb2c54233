//! Experiments on the asymptotic regimes: `p -> infinity` sweeps, the
//! large-`beta` expansion and the shell versus ball comparison.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fmt_f64, make_grid, unit_ball_volume, Domain, Grid, ScalarField};
use crate::radial::{default_steps, limit_profile, solve_eigen_radial, solve_eigen_radial_with_steps};
use crate::variational::{
    boundary_lp_norm, continuation_path, lp_energies, minimize, EigenPair, MinimizeOptions, CONTINUATION_FACTOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Radial,
    Variational,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Radial => "radial",
            SolverKind::Variational => "variational",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub solver: SolverKind,
    /// Grid resolution on which fields are compared.
    pub resolution: usize,
    pub minimize: MinimizeOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { solver: SolverKind::Radial, resolution: 400, minimize: MinimizeOptions::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub p: f64,
    pub lambda: f64,
    /// `(-lambda)^{1/p}`.
    pub root: f64,
    /// Sup distance between the sup-normalized eigenfunction and `exp(-beta d)`.
    pub profile_gap: f64,
    pub solver: SolverKind,
    /// `||u||_p^p` and `||grad u||_p^p` with unit boundary `L^p` norm.
    pub volume_lp: f64,
    pub gradient_lp: f64,
    /// Relative defect of `(-lambda) ||u||_p^p + ||grad u||_p^p = beta^p`.
    pub energy_defect: f64,
}

impl SweepRecord {
    /// `beta ||u||_p <= root ||u||_p <= beta`, up to `tol` relative to `beta`.
    pub fn norm_bounds_hold(&self, beta: f64, tol: f64) -> bool {
        let norm = self.volume_lp.powf(1.0 / self.p);
        let middle = self.root * norm;
        beta * norm <= middle + tol * beta && middle <= beta * (1.0 + tol)
    }
}

/// One sweep entry: the record and its sup-normalized eigenfunction, or the
/// solver error for that exponent.
#[derive(Debug)]
pub struct SweepEntry {
    pub p: f64,
    pub outcome: Result<(SweepRecord, ScalarField)>,
}

#[derive(Debug)]
pub struct Sweep {
    pub domain: Domain,
    pub beta: f64,
    pub grid: Grid,
    pub entries: Vec<SweepEntry>,
}

impl Sweep {
    pub fn records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.entries.iter().filter_map(|e| e.outcome.as_ref().ok().map(|(r, _)| r))
    }

    pub fn fields(&self) -> impl Iterator<Item = &ScalarField> {
        self.entries.iter().filter_map(|e| e.outcome.as_ref().ok().map(|(_, f)| f))
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &Error)> {
        self.entries.iter().filter_map(|e| e.outcome.as_ref().err().map(|err| (e.p, err)))
    }

    /// Root sequence strictly decreasing over the successful entries.
    pub fn roots_decreasing(&self) -> bool {
        let roots: Vec<f64> = self.records().map(|r| r.root).collect();
        roots.windows(2).all(|w| w[1] < w[0])
    }

    pub fn gaps_decreasing(&self) -> bool {
        let gaps: Vec<f64> = self.records().map(|r| r.profile_gap).collect();
        gaps.windows(2).all(|w| w[1] < w[0])
    }

    /// `|root - beta| / beta` at the largest successful exponent.
    pub fn final_root_error(&self) -> Option<f64> {
        self.records().last().map(|r| (r.root - self.beta).abs() / self.beta)
    }

    /// Writes `p, lambda, root, profile_gap`; failed entries keep empty cells.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "p,lambda,root,profile_gap")?;
        for e in &self.entries {
            match &e.outcome {
                Ok((r, _)) => writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(r.p),
                    fmt_f64(r.lambda),
                    fmt_f64(r.root),
                    fmt_f64(r.profile_gap)
                )?,
                Err(_) => writeln!(out, "{},,,", fmt_f64(e.p))?,
            }
        }
        Ok(())
    }
}

fn check_exponents(p_list: &[f64]) -> Result<()> {
    if p_list.is_empty() {
        return Err(Error::InvalidParameter("exponent list is empty".into()));
    }
    if let Some(p) = p_list.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
        return Err(Error::InvalidParameter(format!("exponents must exceed 1 (got {p})")));
    }
    if p_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("exponents must be strictly increasing".into()));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("beta must be positive and finite (got {beta})")))
    }
}

/// Exponents visited when continuing from `from` to `to`.
fn continuation_steps(from: Option<f64>, to: f64) -> Vec<f64> {
    match from {
        None => continuation_path(to),
        Some(mut p) => {
            let mut path = Vec::new();
            while p * CONTINUATION_FACTOR < to {
                p *= CONTINUATION_FACTOR;
                path.push(p);
            }
            path.push(to);
            path
        }
    }
}

/// Solves for every exponent in `p_list` and compares each eigenfunction with
/// the limit profile. Solver failures are recorded per entry.
pub fn sweep_p(domain: &Domain, beta: f64, p_list: &[f64], opts: &SweepOptions) -> Result<Sweep> {
    check_exponents(p_list)?;
    check_beta(beta)?;
    let grid = make_grid(*domain, opts.resolution)?;
    let limit = limit_profile(beta, &grid);

    let finish = |p: f64, lambda: f64, volume_lp: f64, gradient_lp: f64, field: ScalarField, solver| {
        let field = field.sup_normalized();
        let profile_gap = field.sup_distance(&limit)?;
        let bp = beta.powf(p);
        let record = SweepRecord {
            p,
            lambda,
            root: (-lambda).powf(1.0 / p),
            profile_gap,
            solver,
            volume_lp,
            gradient_lp,
            energy_defect: ((-lambda) * volume_lp + gradient_lp - bp) / bp,
        };
        Ok((record, field))
    };

    let mut entries = Vec::with_capacity(p_list.len());
    match opts.solver {
        SolverKind::Radial => {
            for &p in p_list {
                let outcome = solve_eigen_radial(p, beta, domain).and_then(|eig| {
                    let field = eig.profile.sample(&grid)?;
                    finish(p, eig.lambda, eig.volume_lp, eig.gradient_lp, field, SolverKind::Radial)
                });
                entries.push(SweepEntry { p, outcome });
            }
        }
        SolverKind::Variational => {
            let mut seed: Option<(f64, ScalarField)> = None;
            for &p in p_list {
                let solve = || -> Result<_> {
                    let mut last = None;
                    for q in continuation_steps(seed.as_ref().map(|s| s.0), p) {
                        let init = last.as_ref().map(|pair: &EigenPair| &pair.u).or(seed.as_ref().map(|s| &s.1));
                        last = Some(minimize(q, beta, &grid, init, &opts.minimize)?);
                    }
                    Ok(last.expect("continuation visits the target"))
                };
                let outcome = solve().and_then(|pair| {
                    let (mass, stiff) = unit_boundary_energies(&pair, &grid)?;
                    seed = Some((p, pair.u.clone()));
                    finish(p, pair.lambda, mass, stiff, pair.u, SolverKind::Variational)
                });
                entries.push(SweepEntry { p, outcome });
            }
        }
    }
    Ok(Sweep { domain: *domain, beta, grid, entries })
}

fn unit_boundary_energies(pair: &EigenPair, grid: &Grid) -> Result<(f64, f64)> {
    let b = boundary_lp_norm(pair.p, grid, pair.u.values());
    let u = pair.u.scaled(1.0 / b);
    lp_energies(pair.p, grid, &u)
}

#[derive(Debug, Clone)]
pub struct LimitEstimate {
    /// Largest-p sup-normalized eigenfunction.
    pub estimate: ScalarField,
    /// Sup distances between successive sup-normalized fields.
    pub cauchy_gaps: Vec<f64>,
    /// Whether the gaps strictly decrease. Non-monotone sequences are
    /// flagged, not rejected.
    pub monotone: bool,
}

/// Takes the last field as the limit estimate and reports successive gaps.
pub fn extrapolate_limit(fields: &[ScalarField]) -> Result<LimitEstimate> {
    if fields.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 fields (got {})", fields.len())));
    }
    let key = fields[0].key();
    if fields.iter().any(|f| f.key() != key) {
        return Err(Error::GridMismatch);
    }
    let normalized: Vec<ScalarField> = fields.iter().map(ScalarField::sup_normalized).collect();
    let cauchy_gaps = normalized.windows(2).map(|w| w[0].sup_distance(&w[1])).collect::<Result<Vec<_>>>()?;
    let monotone = cauchy_gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(LimitEstimate { estimate: normalized.last().unwrap().clone(), cauchy_gaps, monotone })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionRecord {
    pub beta: f64,
    pub lambda: f64,
    /// `-(p-1) beta^{p^2/(p-1)}`.
    pub leading: f64,
    /// `(lambda - leading) / beta^p`.
    pub curvature_coeff: f64,
}

#[derive(Debug, Serialize)]
pub struct Expansion {
    pub p: f64,
    pub records: Vec<ExpansionRecord>,
    /// `-(n-1) H_max`.
    pub target: f64,
    /// `|curvature_coeff - target|` at the last successful entry.
    pub last_deviation: Option<f64>,
    /// Betas whose solve failed, with the error message.
    pub flagged: Vec<(f64, String)>,
}

impl Expansion {
    /// Deviation from the target shrinks along the records.
    pub fn trending(&self) -> bool {
        let dev: Vec<f64> = self.records.iter().map(|r| (r.curvature_coeff - self.target).abs()).collect();
        dev.first().zip(dev.last()).is_some_and(|(a, b)| b <= a)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "beta,lambda,leading,curvature_coeff")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(r.beta),
                fmt_f64(r.lambda),
                fmt_f64(r.leading),
                fmt_f64(r.curvature_coeff)
            )?;
        }
        Ok(())
    }
}

/// Leading term `-(p-1) beta^{p^2/(p-1)}` of the large-beta expansion.
pub fn leading_term(p: f64, beta: f64) -> f64 {
    -(p - 1.0) * beta.powf(p * p / (p - 1.0))
}

/// Solves along `beta_list` on a ball or shell and compares the
/// second-order coefficient with `-(n-1) H_max`.
pub fn beta_expansion_check(domain: &Domain, p: f64, beta_list: &[f64]) -> Result<Expansion> {
    let n = match *domain {
        Domain::Ball { n, .. } | Domain::Shell { n, .. } => n,
        _ => {
            return Err(Error::UnsupportedDomain { operation: "large-beta expansion", domain: domain.name() });
        }
    };
    domain.validate()?;
    check_exponents(&[p])?;
    if beta_list.is_empty() {
        return Err(Error::InvalidParameter("beta list is empty".into()));
    }
    for &b in beta_list {
        check_beta(b)?;
    }
    if beta_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("betas must be strictly increasing".into()));
    }
    let target = -((n - 1) as f64) * domain.max_mean_curvature()?;

    let mut records = Vec::new();
    let mut flagged = Vec::new();
    for &beta in beta_list {
        // resolve the boundary layer of width ~ beta^{-p/(p-1)}
        let layer = beta.powf(p / (p - 1.0));
        let steps = default_steps(p).max((200.0 * layer).ceil() as usize);
        match solve_eigen_radial_with_steps(p, beta, domain, steps) {
            Ok(eig) => {
                let leading = leading_term(p, beta);
                records.push(ExpansionRecord {
                    beta,
                    lambda: eig.lambda,
                    leading,
                    curvature_coeff: (eig.lambda - leading) / beta.powf(p),
                });
            }
            Err(e) => flagged.push((beta, e.to_string())),
        }
    }
    let last_deviation = records.last().map(|r| (r.curvature_coeff - target).abs());
    Ok(Expansion { p, records, target, last_deviation, flagged })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellComparison {
    pub n: usize,
    pub volume: f64,
    pub ball_radius: f64,
    pub inner: f64,
    pub outer: f64,
    pub lambda_ball: f64,
    pub lambda_shell: f64,
    /// `lambda_shell > lambda_ball`.
    pub verdict: bool,
}

/// Compares the ball with the shell of inner radius `inner` and the same
/// volume.
pub fn shell_vs_ball(n: usize, volume: f64, inner: f64, p: f64, beta: f64) -> Result<ShellComparison> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::InvalidParameter(format!("volume must be positive (got {volume})")));
    }
    let vn = unit_ball_volume(n);
    let nf = n as f64;
    let ball_radius = (volume / vn).powf(1.0 / nf);
    let outer = (volume / vn + inner.powf(nf)).powf(1.0 / nf);
    let ball = Domain::Ball { n, radius: ball_radius };
    let shell = Domain::Shell { n, inner, outer };
    shell.validate()?;
    let lambda_ball = solve_eigen_radial(p, beta, &ball)?.lambda;
    let lambda_shell = solve_eigen_radial(p, beta, &shell)?.lambda;
    Ok(ShellComparison {
        n,
        volume,
        ball_radius,
        inner,
        outer,
        lambda_ball,
        lambda_shell,
        verdict: lambda_shell > lambda_ball,
    })
}
