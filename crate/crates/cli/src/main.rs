//! `robinlab`: reproducible experiments on the first Robin p-Laplacian
//! eigenvalue with negative boundary parameter.
//!
//! Exit codes: 0 success or check passed, 1 check did not pass, 2 invalid
//! configuration or input file, 3 solver failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robin_core::asymptotics::{beta_expansion_check, extrapolate_limit, shell_vs_ball, SolverKind, SweepOptions};
use robin_core::geometry::{fmt_f64, make_grid, Grid, Layout, ScalarField};
use robin_core::radial::{limit_profile, solve_eigen_radial};
use robin_core::variational::{minimize_continuation, MinimizeOptions};
use robin_core::viscosity::{check_limit_pde, eigenvalue_bracket, log_transform_check};
use serde::Serialize;
use serde_json::{json, Value};

use config::{load_file, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "robinlab", version, about = "First Robin p-Laplacian eigenvalue experiments")]
struct Cli {
    /// TOML file with the same keys as the flags (flags win).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one eigenproblem.
    Solve(Overrides),
    /// Sweep p and compare with the limit eigenvalue and profile.
    Sweep(Overrides),
    /// Large-beta expansion on a ball or shell.
    Expand(Overrides),
    /// Shell versus ball of equal volume.
    Compare(Overrides),
    /// Check a field against the limit problem.
    Check(Overrides),
    /// Bracket the limit eigenvalue with distance barriers.
    Bracket(Overrides),
}

enum Failure {
    Invalid(String),
    Solver(String),
}

impl From<robin_core::Error> for Failure {
    fn from(e: robin_core::Error) -> Self {
        match e {
            robin_core::Error::Io(e) => Failure::Invalid(format!("i/o error: {e}")),
            e @ (robin_core::Error::InvalidDomain(_)
            | robin_core::Error::InvalidParameter(_)
            | robin_core::Error::UnsupportedDomain { .. }
            | robin_core::Error::CurvatureUndefined(_)
            | robin_core::Error::GridMismatch
            | robin_core::Error::NonPositiveField { .. }
            | robin_core::Error::BarrierConstraint { .. }) => Failure::Invalid(e.to_string()),
            e => Failure::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(format!("i/o error: {e}"))
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = match cli.command {
        Command::Solve(o) => ("solve", o),
        Command::Sweep(o) => ("sweep", o),
        Command::Expand(o) => ("expand", o),
        Command::Compare(o) => ("compare", o),
        Command::Check(o) => ("check", o),
        Command::Bracket(o) => ("bracket", o),
    };
    let resolved =
        cli.config.as_deref().map(load_file).transpose().and_then(|file| RunConfig::resolve(name, flags, file));
    let outcome = resolved.map_err(Failure::Invalid).and_then(|cfg| {
        fs::create_dir_all(&cfg.out)?;
        match name {
            "solve" => cmd_solve(&cfg),
            "sweep" => cmd_sweep(&cfg),
            "expand" => cmd_expand(&cfg),
            "compare" => cmd_compare(&cfg),
            "check" => cmd_check(&cfg),
            "bracket" => cmd_bracket(&cfg),
            _ => unreachable!(),
        }
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Invalid(msg)) => report_error("invalid_input", &msg, 2),
        Err(Failure::Solver(msg)) => report_error("solver_failure", &msg, 3),
    }
}

fn report_error(kind: &str, message: &str, code: u8) -> ExitCode {
    println!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), Failure> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Invalid(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn minimize_options(cfg: &RunConfig) -> MinimizeOptions {
    MinimizeOptions { max_iters: cfg.max_iters, tolerance: cfg.tolerance, ..MinimizeOptions::default() }
}

fn cmd_solve(cfg: &RunConfig) -> Outcome {
    let (domain, p, beta) = (cfg.domain(), cfg.p.unwrap(), cfg.beta.unwrap());
    let grid = make_grid(domain, cfg.resolution)?;
    for kind in cfg.solver.kinds() {
        let tag = kind.as_str();
        let (lambda, field, extra) = match kind {
            SolverKind::Radial => {
                let eig = solve_eigen_radial(p, beta, &domain)?;
                let mut prof = create(&cfg.out, "profile.csv")?;
                eig.profile.write_csv(&mut prof)?;
                prof.flush()?;
                let extra = json!({
                    "volume_lp": eig.volume_lp,
                    "gradient_lp": eig.gradient_lp,
                    "energy_defect": eig.energy_defect(),
                    "diagnostics": eig.diagnostics,
                });
                (eig.lambda, eig.profile.sample(&grid)?, extra)
            }
            SolverKind::Variational => {
                let pair = minimize_continuation(p, beta, &grid, &minimize_options(cfg))?;
                let extra = json!({
                    "energy_defect": pair.energy_defect(&grid)?,
                    "diagnostics": pair.diagnostics,
                });
                (pair.lambda, pair.u, extra)
            }
        };
        let root = (-lambda).powf(1.0 / p);
        let mut record = json!({
            "solver": tag,
            "p": p,
            "beta": beta,
            "domain": domain,
            "lambda": lambda,
            "root": root,
            "config": cfg,
        });
        record.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
        write_json(&cfg.out, &format!("eigenpair_{tag}.json"), &record)?;
        let mut out = create(&cfg.out, &format!("field_{tag}.csv"))?;
        field.write_csv(&grid, &mut out)?;
        out.flush()?;
        println!("solver={tag} lambda={} root={}", fmt_f64(lambda), fmt_f64(root));
    }
    Ok(true)
}

fn cmd_sweep(cfg: &RunConfig) -> Outcome {
    let (domain, beta) = (cfg.domain(), cfg.beta.unwrap());
    let solver = cfg.solver.kinds()[0];
    let opts = SweepOptions { solver, resolution: cfg.resolution, minimize: minimize_options(cfg) };
    let sweep = robin_core::asymptotics::sweep_p(&domain, beta, cfg.p_list.as_deref().unwrap(), &opts)?;

    let mut csv = create(&cfg.out, "sweep.csv")?;
    sweep.write_csv(&mut csv)?;
    csv.flush()?;

    let fields: Vec<ScalarField> = sweep.fields().cloned().collect();
    let limit = extrapolate_limit(&fields)
        .map_err(|e| Failure::Solver(format!("summary needs at least 3 successful entries: {e}")))?;
    let mut out = create(&cfg.out, "limit_field.csv")?;
    limit.estimate.write_csv(&sweep.grid, &mut out)?;
    out.flush()?;

    let last = sweep.records().last().expect("at least three records");
    let final_error = sweep.final_root_error().unwrap();
    let failures: Vec<Value> = sweep.failures().map(|(p, e)| json!({ "p": p, "error": e.to_string() })).collect();
    let max_defect = sweep.records().map(|r| r.energy_defect.abs()).fold(0.0, f64::max);
    let pass = failures.is_empty() && final_error < 0.05 && sweep.gaps_decreasing();
    let (argmax, _) = limit.estimate.argmax();
    let summary = json!({
        "limit_estimate": last.root,
        "target_beta": beta,
        "pass": pass,
        "final_relative_error": final_error,
        "roots_decreasing": sweep.roots_decreasing(),
        "gaps_decreasing": sweep.gaps_decreasing(),
        "final_profile_gap": last.profile_gap,
        "cauchy_gaps": limit.cauchy_gaps,
        "cauchy_monotone": limit.monotone,
        "max_energy_defect": max_defect,
        "limit_max_on_boundary": sweep.grid.is_boundary(argmax),
        "records": sweep.records().collect::<Vec<_>>(),
        "failures": failures,
        "config": cfg,
    });
    write_json(&cfg.out, "summary.json", &summary)?;
    println!("limit_estimate={} target_beta={} pass={pass}", fmt_f64(last.root), fmt_f64(beta));
    Ok(pass)
}

fn cmd_expand(cfg: &RunConfig) -> Outcome {
    let exp = beta_expansion_check(&cfg.domain(), cfg.p.unwrap(), cfg.beta_list.as_deref().unwrap())?;
    let mut csv = create(&cfg.out, "expansion.csv")?;
    exp.write_csv(&mut csv)?;
    csv.flush()?;
    let pass = exp.flagged.is_empty() && exp.last_deviation.is_some_and(|d| d < 0.15);
    let summary = json!({
        "target": exp.target,
        "last_deviation": exp.last_deviation,
        "trending": exp.trending(),
        "records": exp.records,
        "flagged": exp.flagged,
        "pass": pass,
        "config": cfg,
    });
    write_json(&cfg.out, "summary.json", &summary)?;
    println!(
        "target={} last_deviation={} pass={pass}",
        fmt_f64(exp.target),
        exp.last_deviation.map_or("none".into(), fmt_f64)
    );
    Ok(pass)
}

fn cmd_compare(cfg: &RunConfig) -> Outcome {
    let (n, volume, inner, p) = (cfg.n.unwrap(), cfg.volume.unwrap(), cfg.inner.unwrap(), cfg.p.unwrap());
    let mut rows = Vec::new();
    for beta in cfg.betas() {
        rows.push((beta, shell_vs_ball(n, volume, inner, p, beta)?));
    }
    let mut csv = create(&cfg.out, "compare.csv")?;
    writeln!(csv, "beta,lambda_ball,lambda_shell,verdict")?;
    for (beta, c) in &rows {
        writeln!(csv, "{},{},{},{}", fmt_f64(*beta), fmt_f64(c.lambda_ball), fmt_f64(c.lambda_shell), c.verdict)?;
        println!(
            "beta={} lambda_ball={} lambda_shell={} verdict={}",
            fmt_f64(*beta),
            fmt_f64(c.lambda_ball),
            fmt_f64(c.lambda_shell),
            c.verdict
        );
    }
    csv.flush()?;
    let pass = rows.iter().all(|(_, c)| c.verdict);
    let comparisons: Vec<Value> = rows.iter().map(|(b, c)| json!({ "beta": b, "result": c })).collect();
    write_json(&cfg.out, "summary.json", &json!({ "comparisons": comparisons, "pass": pass, "config": cfg }))?;
    Ok(pass)
}

/// Loads `exact`, `constant` or a field CSV written by this tool.
fn load_field(source: &str, grid: &Grid, beta: f64) -> Result<ScalarField, Failure> {
    match source {
        "exact" => return Ok(limit_profile(beta, grid)),
        "constant" => return Ok(ScalarField::constant(grid, 1.0)),
        _ => {}
    }
    let bad = |msg: String| Failure::Invalid(format!("field file {source}: {msg}"));
    let file = File::open(source).map_err(|e| bad(e.to_string()))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let tensor = matches!(grid.layout(), Layout::Tensor { .. });
    let expected = if tensor { "index,x,y,u" } else { "index,s,u" };
    if header.trim() != expected {
        return Err(bad(format!("header `{}` does not match `{expected}` for this grid", header.trim())));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| bad(format!("row {row}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let dims = if tensor { 2 } else { 1 };
        if cells.len() != dims + 2 {
            return Err(bad(format!("row {row} has {} columns", cells.len())));
        }
        let Some(point) = grid.points().get(values.len()) else {
            return Err(bad(format!("more rows than the {} grid points", grid.len())));
        };
        for k in 0..dims {
            if (cells[1 + k] - point[k]).abs() > 1e-9 * (1.0 + point[k].abs()) {
                return Err(bad(format!("row {row} coordinates do not match the grid")));
            }
        }
        values.push(cells[dims + 1]);
    }
    if values.len() != grid.len() {
        return Err(bad(format!("{} rows for {} grid points", values.len(), grid.len())));
    }
    Ok(ScalarField::new(grid, values)?)
}

fn cmd_check(cfg: &RunConfig) -> Outcome {
    let beta = cfg.beta.unwrap();
    let grid = make_grid(cfg.domain(), cfg.resolution)?;
    let field = load_field(cfg.field.as_deref().unwrap(), &grid, beta)?;
    let report = check_limit_pde(&field, &grid, beta)?;
    let log = log_transform_check(&field, &grid, beta)?;
    let mut csv = create(&cfg.out, "report.csv")?;
    report.write_csv(&grid, &mut csv)?;
    csv.flush()?;
    let summary = json!({
        "worst_interior": report.worst_interior,
        "worst_boundary": report.worst_boundary,
        "pass": report.pass,
        "excluded_count": report.excluded_count,
        "tolerance": report.tolerance,
        "log_transform": log,
        "config": cfg,
    });
    write_json(&cfg.out, "report.json", &summary)?;
    println!(
        "worst_interior={} worst_boundary={} tolerance={} pass={}",
        fmt_f64(report.worst_interior),
        fmt_f64(report.worst_boundary),
        fmt_f64(report.tolerance),
        report.pass
    );
    Ok(report.pass)
}

fn cmd_bracket(cfg: &RunConfig) -> Outcome {
    let beta = cfg.beta.unwrap();
    let grid = make_grid(cfg.domain(), cfg.resolution)?;
    let field = load_field(cfg.field.as_deref().unwrap(), &grid, beta)?;
    let b = eigenvalue_bracket(&field, &grid, beta, &cfg.eps_grid())?;
    let admissible = b.lambda_low.is_some();
    let summary = json!({
        "bracket": b,
        "admissible": admissible,
        "note": if admissible { Value::Null } else { json!("no admissible lambda") },
        "pass": b.pass,
        "config": cfg,
    });
    write_json(&cfg.out, "bracket.json", &summary)?;
    match (b.lambda_low, b.lambda_high) {
        (Some(lo), Some(hi)) => println!("lambda_low={} lambda_high={} pass={}", fmt_f64(lo), fmt_f64(hi), b.pass),
        _ => println!("no admissible lambda pass=false"),
    }
    Ok(b.pass)
}
