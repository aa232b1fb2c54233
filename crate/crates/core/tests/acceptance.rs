//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances are pinned here on purpose.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robin_core::asymptotics::{beta_expansion_check, extrapolate_limit, shell_vs_ball, sweep_p, Sweep, SweepOptions};
use robin_core::geometry::{make_grid, Domain, Grid, ScalarField};
use robin_core::radial::{limit_profile, solve_eigen_radial, RadialEigen};
use robin_core::variational::{minimize, quotient_gradient, rayleigh_quotient, EigenPair, MinimizeOptions};
use robin_core::viscosity::{barrier_compare, check_limit_pde, eigenvalue_bracket};

const SWEEP_P: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
const SWEEP_RESOLUTION: usize = 400;

/// Per-solve facts collected along the way and judged by criterion 8.
#[derive(Default)]
struct Solves {
    bound: Vec<(String, bool)>,
    boundary_max: Vec<(String, bool)>,
}

impl Solves {
    fn radial(&mut self, label: String, eig: &RadialEigen, grid: &Grid) {
        let d = &eig.profile.domain;
        let bound = -eig.profile.beta.powf(eig.profile.p) * d.perimeter_volume_ratio();
        self.bound.push((label.clone(), eig.lambda <= bound + 1e-8 * bound.abs()));
        let field = eig.profile.sample(grid).expect("grid built on the profile's domain");
        self.field(label, &field, grid);
    }

    fn variational(&mut self, label: String, pair: &EigenPair, grid: &Grid) {
        let bound = -pair.beta.powf(pair.p) * grid.total_boundary_weight() / grid.total_volume_weight();
        self.bound.push((label.clone(), pair.lambda <= bound + 1e-8 * bound.abs()));
        self.field(label, &pair.u, grid);
    }

    fn field(&mut self, label: String, field: &ScalarField, grid: &Grid) {
        let (i, m) = field.argmax();
        let on_boundary = grid.is_boundary(i) || grid.boundary_indices().any(|b| field.values()[b] == m);
        self.boundary_max.push((label, on_boundary));
    }

    fn sweep(&mut self, label: &str, s: &Sweep) {
        for (r, f) in s.records().zip(s.fields()) {
            let bound = -s.beta.powf(r.p) * s.domain.perimeter_volume_ratio();
            self.bound.push((format!("{label} p={}", r.p), r.lambda <= bound + 1e-8 * bound.abs()));
            self.field(format!("{label} p={}", r.p), f, &s.grid);
        }
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    v.detail.push_str(&format!("; runtime {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()));
    v.pass &= in_time;
    v
}

fn tanh_root(c: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, c.max(1.0) + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.tanh() < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn interval() -> Domain {
    Domain::Interval { a: -1.0, b: 1.0 }
}

fn disc() -> Domain {
    Domain::Ball { n: 2, radius: 1.0 }
}

fn criterion_1(solves: &mut Solves) -> Verdict {
    let grid = make_grid(interval(), 400).unwrap();
    let (mut rad_err, mut var_err) = (0.0_f64, 0.0_f64);
    let mut ok = true;
    for beta in [0.5, 1.0, 2.0] {
        let k = tanh_root(beta * beta);
        let exact = -k * k;
        match solve_eigen_radial(2.0, beta, &interval()) {
            Ok(eig) => {
                rad_err = rad_err.max(((eig.lambda - exact) / exact).abs());
                solves.radial(format!("oracle radial beta={beta}"), &eig, &grid);
            }
            Err(_) => ok = false,
        }
        match minimize(2.0, beta, &grid, None, &MinimizeOptions::default()) {
            Ok(pair) => {
                var_err = var_err.max(((pair.lambda - exact) / exact).abs());
                solves.variational(format!("oracle variational beta={beta}"), &pair, &grid);
            }
            Err(_) => ok = false,
        }
    }
    Verdict {
        pass: ok && rad_err <= 1e-8 && var_err <= 1e-2,
        detail: format!("radial rel err {rad_err:.2e} (tol 1e-8), variational rel err {var_err:.2e} (tol 1e-2)"),
    }
}

fn run_sweeps() -> Vec<(String, Sweep)> {
    let opts = SweepOptions { resolution: SWEEP_RESOLUTION, ..SweepOptions::default() };
    let mut out = Vec::new();
    for (name, d) in [("interval", interval()), ("ball2", disc())] {
        for beta in [1.0, 2.0] {
            out.push((format!("{name} beta={beta}"), sweep_p(&d, beta, &SWEEP_P, &opts).unwrap()));
        }
    }
    out
}

fn criterion_2(sweeps: &[(String, Sweep)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, s) in sweeps {
        let complete = s.failures().count() == 0;
        let decreasing = s.roots_decreasing();
        let err = s.final_root_error().unwrap_or(f64::INFINITY);
        let defect = s.records().map(|r| r.energy_defect.abs()).fold(0.0, f64::max);
        pass &= complete && decreasing && err < 0.05 && defect <= 1e-6;
        parts
            .push(format!("{label}: decreasing={decreasing} final err {:.2}% energy defect {defect:.1e}", 100.0 * err));
    }
    Verdict { pass, detail: parts.join(" | ") }
}

fn criterion_3(sweeps: &[(String, Sweep)], solves: &mut Solves) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, s) in sweeps.iter().filter(|(l, _)| l.starts_with("interval")) {
        let last_gap = s.records().last().map_or(f64::INFINITY, |r| r.profile_gap);
        let decreasing = s.gaps_decreasing();
        pass &= decreasing && last_gap < 0.1;
        let fields: Vec<ScalarField> = s.fields().cloned().collect();
        if let Ok(est) = extrapolate_limit(&fields) {
            solves.field(format!("{label} limit estimate"), &est.estimate, &s.grid);
        }
        parts.push(format!("{label}: gaps decreasing={decreasing}, final gap {last_gap:.2e} (tol 0.1)"));
    }
    Verdict { pass, detail: parts.join(" | ") }
}

fn criterion_4() -> Verdict {
    let calib = make_grid(interval(), 64).unwrap();
    let calib_report = check_limit_pde(&limit_profile(1.0, &calib), &calib, 1.0).unwrap();
    let c = calib_report.worst() / calib.spacing();
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    for d in [interval(), disc(), Domain::Rectangle { width: 1.0, height: 1.0 }] {
        for res in [64, 128] {
            let g = make_grid(d, res).unwrap();
            let exact = check_limit_pde(&limit_profile(1.0, &g), &g, 1.0).unwrap();
            let flat = check_limit_pde(&ScalarField::constant(&g, 1.0), &g, 1.0).unwrap();
            let ratio = exact.worst() / g.spacing();
            worst_ratio = worst_ratio.max(ratio);
            pass &= exact.pass && ratio <= c * (1.0 + 1e-9) && !flat.pass;
        }
    }
    Verdict {
        pass,
        detail: format!("interval/ball/rectangle at 64,128: max residual/h {worst_ratio:.3e} (C {c:.3e}), tol(h) pass and constant-field rejection required"),
    }
}

fn criterion_5(solves: &mut Solves) -> Verdict {
    let beta = 1.0;
    let eps_grid = [0.2, 0.1];
    let res = 128;
    let sweep =
        sweep_p(&interval(), beta, &[64.0], &SweepOptions { resolution: res, ..SweepOptions::default() }).unwrap();
    let grid = &sweep.grid;
    let eigen = match sweep.fields().next() {
        Some(f) => f.clone(),
        None => return Verdict { pass: false, detail: "p=64 solve failed".into() },
    };
    solves.sweep("bracket interval beta=1", &sweep);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, field) in [("exact", limit_profile(beta, grid)), ("p=64", eigen)] {
        let b = eigenvalue_bracket(&field, grid, beta, &eps_grid).unwrap();
        let width = b.width.unwrap_or(f64::INFINITY);
        let ok = b.contains_beta && width <= 0.2;
        let rejects = [0.5 * beta, 2.0 * beta].iter().all(|&lambda| {
            let out = barrier_compare(&field, grid, lambda, 0.1, 0.1 / 4.0).unwrap();
            !(out.lower_ok && out.upper_ok)
        });
        pass &= ok && rejects;
        parts.push(format!(
            "{name}: bracket [{:.3}, {:.3}] width {width:.3} (tol 0.2), rejects 0.5b and 2b={rejects}",
            b.lambda_low.unwrap_or(f64::NAN),
            b.lambda_high.unwrap_or(f64::NAN)
        ));
    }
    Verdict { pass, detail: parts.join(" | ") }
}

fn criterion_6() -> Verdict {
    let betas = [2.0, 4.0, 8.0, 16.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, target) in [(disc(), -1.0), (Domain::Ball { n: 3, radius: 1.0 }, -2.0)] {
        let e = beta_expansion_check(&d, 2.0, &betas).unwrap();
        let dev = e.last_deviation.unwrap_or(f64::INFINITY);
        pass &= e.flagged.is_empty() && (e.target - target).abs() < 1e-12 && e.trending() && dev < 0.15;
        let coeffs: Vec<String> = e.records.iter().map(|r| format!("{:.4}", r.curvature_coeff)).collect();
        parts.push(format!(
            "n={}: coeffs [{}] -> {target}, last deviation {dev:.2e} (tol 0.15)",
            d.dimension(),
            coeffs.join(", ")
        ));
    }
    Verdict { pass, detail: parts.join(" | ") }
}

fn criterion_7() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [6.0, 8.0] {
        match shell_vs_ball(2, std::f64::consts::PI, 1.0, 2.0, beta) {
            Ok(c) => {
                pass &= c.verdict;
                parts.push(format!("beta={beta}: shell {:.4} vs ball {:.4}", c.lambda_shell, c.lambda_ball));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("beta={beta}: {e}"));
            }
        }
    }
    Verdict { pass, detail: parts.join(" | ") }
}

fn random_field(rng: &mut ChaCha8Rng, grid: &Grid) -> ScalarField {
    ScalarField::new(grid, (0..grid.len()).map(|_| rng.gen_range(0.2..2.0)).collect()).unwrap()
}

fn criterion_8(solves: &Solves) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let grids = [
        make_grid(interval(), 16).unwrap(),
        make_grid(disc(), 16).unwrap(),
        make_grid(Domain::Shell { n: 3, inner: 0.5, outer: 1.0 }, 12).unwrap(),
        make_grid(Domain::Rectangle { width: 1.0, height: 1.0 }, 6).unwrap(),
    ];

    let mut homogeneity: f64 = 0.0;
    for (k, g) in grids.iter().enumerate() {
        for p in [2.0, 3.0, 6.0] {
            let w = random_field(&mut rng, g);
            let q = rayleigh_quotient(p, 1.0 + k as f64 * 0.5, g, &w).unwrap();
            for c in [0.5, 3.0] {
                let qc = rayleigh_quotient(p, 1.0 + k as f64 * 0.5, g, &w.scaled(c)).unwrap();
                homogeneity = homogeneity.max((qc - q).abs() / q.abs());
            }
        }
    }

    let mut fd_err: f64 = 0.0;
    for trial in 0..20 {
        let p = [2.0, 3.0, 6.0][trial % 3];
        let g = &grids[trial % grids.len()];
        let w = random_field(&mut rng, g);
        let grad = quotient_gradient(p, 1.0, g, &w).unwrap();
        let scale = grad.max_abs().max(1.0);
        let h = 1e-6;
        for i in 0..g.len() {
            let shifted = |delta: f64| {
                let mut v = w.values().to_vec();
                v[i] += delta;
                rayleigh_quotient(p, 1.0, g, &ScalarField::new(g, v).unwrap()).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            fd_err = fd_err.max((fd - grad.values()[i]).abs() / scale);
        }
    }

    let bound_fail: Vec<&str> = solves.bound.iter().filter(|(_, ok)| !ok).map(|(l, _)| l.as_str()).collect();
    let max_fail: Vec<&str> = solves.boundary_max.iter().filter(|(_, ok)| !ok).map(|(l, _)| l.as_str()).collect();
    Verdict {
        pass: homogeneity <= 1e-12 && fd_err <= 1e-5 && bound_fail.is_empty() && max_fail.is_empty(),
        detail: format!(
            "homogeneity {homogeneity:.1e} (tol 1e-12), gradient vs FD {fd_err:.1e} (tol 1e-5), bound holds on {}/{} solves, boundary max on {}/{} fields{}",
            solves.bound.len() - bound_fail.len(),
            solves.bound.len(),
            solves.boundary_max.len() - max_fail.len(),
            solves.boundary_max.len(),
            if bound_fail.is_empty() && max_fail.is_empty() {
                String::new()
            } else {
                format!(" (failing: {:?} {:?})", bound_fail, max_fail)
            }
        ),
    }
}

fn main() -> ExitCode {
    let mut solves = Solves::default();
    let mut results = Vec::new();

    results.push(("1 closed-form oracle, p=2 interval", timed(Duration::from_secs(5), || criterion_1(&mut solves))));

    let start = Instant::now();
    let sweeps = run_sweeps();
    let sweep_time = start.elapsed();
    for (label, s) in &sweeps {
        solves.sweep(label, s);
    }
    let mut v2 = criterion_2(&sweeps);
    v2.detail.push_str(&format!("; runtime {:.2} s (limit 120 s)", sweep_time.as_secs_f64()));
    v2.pass &= sweep_time <= Duration::from_secs(120);
    results.push(("2 root (-lambda)^(1/p) -> beta", v2));
    results.push(("3 uniform convergence to exp(-beta d)", criterion_3(&sweeps, &mut solves)));

    results.push(("4 limit problem residuals", timed(Duration::from_secs(10), criterion_4)));
    results.push((
        "5 barrier bracket of the limit eigenvalue",
        timed(Duration::from_secs(10), || criterion_5(&mut solves)),
    ));
    results.push(("6 large-beta curvature coefficient", timed(Duration::from_secs(30), criterion_6)));
    results.push(("7 shell beats ball at equal volume", timed(Duration::from_secs(10), criterion_7)));
    results.push(("8 property suites", timed(Duration::from_secs(60), || criterion_8(&solves))));

    let mut all = true;
    for (name, v) in &results {
        all &= v.pass;
        println!("[{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let passed = results.iter().filter(|(_, v)| v.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
