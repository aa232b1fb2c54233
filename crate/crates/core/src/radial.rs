//! Shooting solver for the interval, ball and shell.
//!
//! The radial equation `(s^{n-1} |u'|^{p-2} u')' = mu |u|^{p-2} u s^{n-1}`,
//! `mu = -lambda > 0`, is integrated for the flux `q = |u'|^{p-2} u'` with a
//! fixed-step RK4 scheme. `u' = |q|^{1/(p-1)} sgn(q)` is smooth in `q` even
//! where `u'` vanishes, so the center needs no special treatment beyond the
//! limit `q'(0) = mu u(0)^{p-1} / n`.
//!
//! The equation is (p-1)-homogeneous, so when `u` grows past [`RESCALE_AT`]
//! the state is divided by `u` (flux by `u^{p-1}`) and the logarithm of the
//! factor is carried separately.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance_field, unit_sphere_area, Domain, Grid, ScalarField};

const RESCALE_AT: f64 = 1e100;
const SCAN_POINTS: usize = 96;
const BISECTION_MAX: usize = 200;

/// Nodal values of a radial eigenfunction.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub domain: Domain,
    pub p: f64,
    pub beta: f64,
    pub lambda: f64,
    /// Radial coordinate (distance from the center of symmetry).
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

/// Output of one shooting pass.
#[derive(Debug, Clone)]
pub struct Shot {
    pub profile: RadialProfile,
    /// `q(R) - beta^p u(R)^{p-1}` with `u` normalized to one at the inner
    /// end; saturates to `+-inf` on overflow.
    pub mismatch: f64,
    /// `q(R) / (beta^p u(R)^{p-1}) - 1`, independent of the normalization.
    pub relative_mismatch: f64,
    /// `int |u|^p` over the domain divided by the boundary `L^p` mass.
    pub volume_lp: f64,
    /// `int |u'|^p` over the domain divided by the boundary `L^p` mass.
    pub gradient_lp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialDiagnostics {
    pub steps: usize,
    pub mismatch: f64,
    pub relative_mismatch: f64,
    pub bisection_iterations: usize,
    pub window: [f64; 2],
}

/// First Robin eigenpair from the shooting solver.
#[derive(Debug, Clone)]
pub struct RadialEigen {
    pub lambda: f64,
    pub profile: RadialProfile,
    /// `||u||_{L^p(Omega)}^p` under `||u||_{L^p(dOmega)} = 1`.
    pub volume_lp: f64,
    /// `||u'||_{L^p(Omega)}^p` under the same normalization.
    pub gradient_lp: f64,
    pub diagnostics: RadialDiagnostics,
}

/// Radial reduction of a supported domain.
#[derive(Debug, Clone, Copy)]
struct Reduction {
    n: usize,
    start: f64,
    end: f64,
    /// Robin condition at the inner end (shell) instead of `u'(start) = 0`.
    inner_robin: bool,
}

fn reduce(domain: &Domain) -> Result<Reduction> {
    domain.validate()?;
    match *domain {
        Domain::Interval { a, b } => Ok(Reduction { n: 1, start: 0.0, end: 0.5 * (b - a), inner_robin: false }),
        Domain::Ball { n, radius } => Ok(Reduction { n, start: 0.0, end: radius, inner_robin: false }),
        Domain::Shell { n, inner, outer } => Ok(Reduction { n, start: inner, end: outer, inner_robin: true }),
        Domain::Rectangle { .. } => Err(Error::UnsupportedDomain { operation: "radial shooting", domain: "rectangle" }),
    }
}

/// Default step count: `max(2000, 100 p)`.
pub fn default_steps(p: f64) -> usize {
    2000usize.max((100.0 * p).ceil() as usize)
}

#[inline]
fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

#[derive(Clone, Copy)]
struct Rhs {
    p: f64,
    mu: f64,
    n: usize,
}

impl Rhs {
    /// State: `[u, q, int u^p s^{n-1}, int |u'|^p s^{n-1}]`.
    fn eval(&self, s: f64, y: [f64; 4]) -> [f64; 4] {
        let [u, q, _, _] = y;
        let du = signed_pow(q, 1.0 / (self.p - 1.0));
        let source = self.mu * signed_pow(u, self.p - 1.0);
        let dq = if self.n == 1 {
            source
        } else if s == 0.0 {
            source / self.n as f64
        } else {
            source - (self.n as f64 - 1.0) / s * q
        };
        let jac = if self.n == 1 { 1.0 } else { s.powi(self.n as i32 - 1) };
        [du, dq, u.abs().powf(self.p) * jac, du.abs().powf(self.p) * jac]
    }

    fn rk4(&self, s: f64, h: f64, y: [f64; 4]) -> [f64; 4] {
        let add =
            |a: [f64; 4], k: [f64; 4], c: f64| [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2], a[3] + c * k[3]];
        let k1 = self.eval(s, y);
        let k2 = self.eval(s + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = self.eval(s + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = self.eval(s + h, add(y, k3, h));
        let mut out = y;
        for i in 0..4 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }
}

/// Outcome of integrating one trajectory.
struct Trajectory {
    /// `(u, q)` per node in the local scale, plus that scale's log.
    states: Vec<(f64, f64, f64)>,
    vol: f64,
    grad: f64,
    /// `u` left the positive cone (too little growth).
    lost_positivity: bool,
    /// Non-finite values appeared (too much growth).
    overflowed: bool,
}

fn trajectory(p: f64, mu: f64, beta: f64, red: Reduction, steps: usize, record: bool) -> Trajectory {
    let rhs = Rhs { p, mu, n: red.n };
    let h = (red.end - red.start) / steps as f64;
    let q0 = if red.inner_robin { -beta.powf(p) } else { 0.0 };
    let mut y = [1.0, q0, 0.0, 0.0];
    let mut log_scale = 0.0;
    let mut states = Vec::with_capacity(if record { steps + 1 } else { 0 });
    if record {
        states.push((y[0], y[1], log_scale));
    }
    let mut out = Trajectory { states: Vec::new(), vol: 0.0, grad: 0.0, lost_positivity: false, overflowed: false };
    for k in 0..steps {
        let s = red.start + k as f64 * h;
        y = rhs.rk4(s, h, y);
        if !y.iter().all(|v| v.is_finite()) {
            out.overflowed = true;
            break;
        }
        if y[0] <= 0.0 {
            out.lost_positivity = true;
            break;
        }
        if y[0] > RESCALE_AT {
            let lu = y[0].ln();
            y[1] *= (-(p - 1.0) * lu).exp();
            y[2] *= (-p * lu).exp();
            y[3] *= (-p * lu).exp();
            y[0] = 1.0;
            log_scale += lu;
        }
        if record {
            states.push((y[0], y[1], log_scale));
        }
    }
    out.vol = y[2];
    out.grad = y[3];
    if !record {
        states.push((y[0], y[1], log_scale));
    }
    out.states = states;
    out
}

/// Relative Robin mismatch at the outer end, with overflow mapped to `+inf`
/// and loss of positivity to `-inf`.
fn relative_mismatch(p: f64, beta: f64, traj: &Trajectory) -> f64 {
    if traj.overflowed {
        return f64::INFINITY;
    }
    if traj.lost_positivity {
        return f64::NEG_INFINITY;
    }
    let &(u, q, _) = traj.states.last().expect("trajectory has at least one node");
    if q <= 0.0 {
        // the Robin flux target is positive, so the ratio is <= 0
        let ratio = q / (p * beta.ln() + (p - 1.0) * u.ln()).exp();
        return if ratio.is_finite() { ratio - 1.0 } else { f64::NEG_INFINITY };
    }
    let log_ratio = q.ln() - p * beta.ln() - (p - 1.0) * u.ln();
    log_ratio.exp_m1()
}

fn validate_parameters(p: f64, beta: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must be a finite exponent > 1 (got {p})")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive (got {beta})")));
    }
    Ok(())
}

/// Integrates the radial equation for a given `lambda < 0` and reports the
/// outer Robin mismatch. Interval and ball start from `u = 1, u' = 0` at
/// the center, the shell from `u(r) = 1, u'(r) = -beta^{p/(p-1)}`.
pub fn integrate_radial(p: f64, lambda: f64, beta: f64, domain: &Domain, steps: usize) -> Result<Shot> {
    validate_parameters(p, beta)?;
    if !(lambda < 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be negative (got {lambda})")));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let red = reduce(domain)?;
    let mu = -lambda;
    let traj = trajectory(p, mu, beta, red, steps, true);
    let relative = relative_mismatch(p, beta, &traj);

    let mismatch = if traj.overflowed {
        f64::INFINITY
    } else if traj.lost_positivity {
        f64::NEG_INFINITY
    } else {
        let &(u, q, ls) = traj.states.last().unwrap();
        let scale = ((p - 1.0) * ls).exp();
        q * scale - beta.powf(p) * u.powf(p - 1.0) * scale
    };

    let (profile, volume_lp, gradient_lp) = if traj.overflowed || traj.lost_positivity {
        let nodes = (0..traj.states.len()).map(|k| red.start + k as f64 * (red.end - red.start) / steps as f64);
        let profile = RadialProfile {
            domain: *domain,
            p,
            beta,
            lambda,
            nodes: nodes.collect(),
            values: traj.states.iter().map(|s| s.0 * s.2.exp()).collect(),
            derivatives: traj.states.iter().map(|s| signed_pow(s.1, 1.0 / (p - 1.0)) * s.2.exp()).collect(),
        };
        (profile, f64::NAN, f64::NAN)
    } else {
        assemble(p, beta, lambda, domain, red, steps, &traj)
    };

    Ok(Shot { profile, mismatch, relative_mismatch: relative, volume_lp, gradient_lp })
}

/// Builds the boundary-normalized profile and the energy ratios.
fn assemble(
    p: f64,
    beta: f64,
    lambda: f64,
    domain: &Domain,
    red: Reduction,
    steps: usize,
    traj: &Trajectory,
) -> (RadialProfile, f64, f64) {
    let h = (red.end - red.start) / steps as f64;
    let log_u: Vec<f64> = traj.states.iter().map(|&(u, _, ls)| u.ln() + ls).collect();
    let last = *log_u.last().unwrap();
    let log_norm = if red.inner_robin { last.max(log_u[0]) } else { last };

    let nodes: Vec<f64> = (0..=steps).map(|k| if k == steps { red.end } else { red.start + k as f64 * h }).collect();
    let values = log_u.iter().map(|lu| (lu - log_norm).exp()).collect();
    let derivatives =
        traj.states.iter().map(|&(_, q, ls)| signed_pow(q, 1.0 / (p - 1.0)) * (ls - log_norm).exp()).collect();

    // Boundary L^p mass of u (inner end has u = 1 before normalization).
    let jac = |s: f64| if red.n == 1 { 1.0 } else { s.powi(red.n as i32 - 1) };
    let mut log_terms = vec![jac(red.end).ln() + p * last];
    if red.inner_robin {
        log_terms.push(jac(red.start).ln());
    } else if red.n == 1 {
        // symmetric interval: the left endpoint mirrors the right one
        log_terms.push(jac(red.end).ln() + p * last);
    }
    let log_boundary = log_sum_exp(&log_terms);
    let ls_end = traj.states.last().unwrap().2;
    // Interval integrals cover half the domain; the boundary mass counts both ends.
    let mirror = if red.n == 1 { 2.0_f64.ln() } else { 0.0 };
    let ratio = |acc: f64| {
        if acc <= 0.0 {
            0.0
        } else {
            (acc.ln() + p * ls_end + mirror - log_boundary).exp()
        }
    };
    let volume_lp = ratio(traj.vol);
    let gradient_lp = ratio(traj.grad);

    let profile = RadialProfile { domain: *domain, p, beta, lambda, nodes, values, derivatives };
    (profile, volume_lp, gradient_lp)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Shooting solve for the first eigenvalue using [`default_steps`].
pub fn solve_eigen_radial(p: f64, beta: f64, domain: &Domain) -> Result<RadialEigen> {
    solve_eigen_radial_with_steps(p, beta, domain, default_steps(p))
}

/// Shooting solve with an explicit step count.
///
/// `mu = -lambda` is scanned geometrically downward from
/// `(2 beta)^{p^2/(p-1)} + 10` to `beta^p P / |Omega|`; the first sign change
/// of the mismatch (largest `mu`, i.e. the lowest eigenvalue) is refined by
/// bisection in `ln mu`.
pub fn solve_eigen_radial_with_steps(p: f64, beta: f64, domain: &Domain, steps: usize) -> Result<RadialEigen> {
    validate_parameters(p, beta)?;
    let red = reduce(domain)?;
    let mu_low = beta.powf(p) * domain.perimeter_volume_ratio();
    let mu_high = (2.0 * beta).powf(p * p / (p - 1.0)) + 10.0;
    let window = [-mu_high, -mu_low];
    let failure = Error::BracketFailure { low: window[0], high: window[1] };
    if !(mu_high.is_finite() && mu_low > 0.0) {
        return Err(failure);
    }

    let sign_at = |mu: f64| relative_mismatch(p, beta, &trajectory(p, mu, beta, red, steps, false));

    let (ln_hi, ln_lo) = (mu_high.ln(), mu_low.ln());
    let mut prev_mu = mu_high;
    let mut prev = sign_at(mu_high);
    if !(prev > 0.0) {
        return Err(failure);
    }
    let mut bracket = None;
    for k in 1..=SCAN_POINTS {
        let t = k as f64 / SCAN_POINTS as f64;
        let mu = if k == SCAN_POINTS { mu_low } else { (ln_hi + t * (ln_lo - ln_hi)).exp() };
        let m = sign_at(mu);
        if m <= 0.0 {
            bracket = Some((mu, prev_mu));
            break;
        }
        prev_mu = mu;
        prev = m;
    }
    let (mut lo, mut hi) = bracket.ok_or(failure)?;
    let _ = prev;

    // mismatch(lo) <= 0 < mismatch(hi)
    let mut iterations = 0;
    while iterations < BISECTION_MAX && hi / lo - 1.0 > 4.0 * f64::EPSILON {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        if mid <= lo || mid >= hi {
            break;
        }
        if sign_at(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    // the side with the smaller |mismatch|
    let shot_lo = integrate_radial(p, -lo, beta, domain, steps)?;
    let shot_hi = integrate_radial(p, -hi, beta, domain, steps)?;
    let shot = if shot_lo.relative_mismatch.abs() <= shot_hi.relative_mismatch.abs() { shot_lo } else { shot_hi };

    Ok(RadialEigen {
        lambda: shot.profile.lambda,
        volume_lp: shot.volume_lp,
        gradient_lp: shot.gradient_lp,
        diagnostics: RadialDiagnostics {
            steps,
            mismatch: shot.mismatch,
            relative_mismatch: shot.relative_mismatch,
            bisection_iterations: iterations,
            window,
        },
        profile: shot.profile,
    })
}

impl RadialProfile {
    /// Radial coordinate of a grid point for this profile's domain.
    fn radial_coordinate(&self, x: f64) -> f64 {
        match self.domain {
            Domain::Interval { a, b } => (x - 0.5 * (a + b)).abs(),
            _ => x,
        }
    }

    /// Cubic Hermite interpolation of `u` at radial coordinate `s`.
    pub fn value_at(&self, s: f64) -> f64 {
        let n = self.nodes.len();
        let (s0, s1) = (self.nodes[0], self.nodes[n - 1]);
        let h = (s1 - s0) / (n - 1) as f64;
        let t = ((s - s0) / h).clamp(0.0, (n - 1) as f64);
        let k = (t.floor() as usize).min(n - 2);
        let x = t - k as f64;
        let (u0, u1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivatives[k] * h, self.derivatives[k + 1] * h);
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * u0 + (x3 - 2.0 * x2 + x) * d0 + (-2.0 * x3 + 3.0 * x2) * u1 + (x3 - x2) * d1
    }

    /// Samples the profile on a grid built over the same domain.
    pub fn sample(&self, grid: &Grid) -> Result<ScalarField> {
        if grid.domain() != &self.domain {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField::from_fn(grid, |_, p| self.value_at(self.radial_coordinate(p[0]))))
    }

    /// Writes `s, u, u'`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        use crate::geometry::fmt_f64;
        writeln!(out, "s,u,du")?;
        for ((s, u), du) in self.nodes.iter().zip(&self.values).zip(&self.derivatives) {
            writeln!(out, "{},{},{}", fmt_f64(*s), fmt_f64(*u), fmt_f64(*du))?;
        }
        Ok(())
    }
}

impl RadialEigen {
    /// Boundary `L^p` norm of the stored (sup-on-boundary normalized) profile.
    pub fn boundary_norm(&self) -> f64 {
        let prof = &self.profile;
        let p = prof.p;
        let last = *prof.values.last().unwrap();
        let mass = match prof.domain {
            Domain::Interval { .. } => 2.0 * last.powf(p),
            Domain::Ball { n, radius } => unit_sphere_area(n) * radius.powi(n as i32 - 1) * last.powf(p),
            Domain::Shell { n, inner, outer } => {
                unit_sphere_area(n)
                    * (inner.powi(n as i32 - 1) * prof.values[0].powf(p) + outer.powi(n as i32 - 1) * last.powf(p))
            }
            Domain::Rectangle { .. } => unreachable!("radial profiles never live on rectangles"),
        };
        mass.powf(1.0 / p)
    }

    /// `(-lambda) ||u||_p^p + ||u'||_p^p - beta^p`, relative to `beta^p`.
    pub fn energy_defect(&self) -> f64 {
        let bp = self.profile.beta.powf(self.profile.p);
        ((-self.lambda) * self.volume_lp + self.gradient_lp - bp) / bp
    }

    pub fn root(&self) -> f64 {
        (-self.lambda).powf(1.0 / self.profile.p)
    }
}

/// `x -> exp(-beta d(x, dOmega))`, equal to one on the boundary.
pub fn limit_profile(beta: f64, grid: &Grid) -> ScalarField {
    let d = distance_field(grid);
    ScalarField::from_fn(grid, |i, _| (-beta * d.values()[i]).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn interval() -> Domain {
        Domain::Interval { a: -1.0, b: 1.0 }
    }

    /// Root of `k tanh k = c` by bisection, independent of the ODE path.
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

    #[test]
    fn p2_interval_mismatch_vanishes_at_closed_form() {
        // lambda = -1 pairs with beta^2 = tanh(1)
        let beta = 1.0_f64.tanh().sqrt();
        let shot = integrate_radial(2.0, -1.0, beta, &interval(), 2000).unwrap();
        assert!(shot.relative_mismatch.abs() < 1e-10, "{}", shot.relative_mismatch);
        // the profile is cosh(x) / cosh(1)
        let mid = shot.profile.values[1000];
        assert_relative_eq!(mid, (0.5_f64).cosh() / 1.0_f64.cosh(), max_relative = 1e-10);
    }

    #[test]
    fn mismatch_sign_matches_cosh_formula() {
        for k in [0.5, 1.0, 1.5, 3.0] {
            let shot = integrate_radial(2.0, -k * k, 1.0, &interval(), 2000).unwrap();
            let expected = k * k.tanh() - 1.0;
            assert_eq!(shot.relative_mismatch.signum(), expected.signum());
            // raw mismatch is k sinh k - cosh k with u(0) = 1
            assert_relative_eq!(shot.mismatch, k * k.sinh() - k.cosh(), max_relative = 1e-9);
        }
    }

    #[test]
    fn window_endpoints_bracket_the_root() {
        for (p, domain) in [(2.0, interval()), (5.0, interval()), (3.0, Domain::Ball { n: 2, radius: 1.0 })] {
            let beta = 1.0;
            let low = -beta * domain.perimeter_volume_ratio();
            let lo = integrate_radial(p, low, beta, &domain, default_steps(p)).unwrap();
            let high = -(2.0 * beta).powf(p * p / (p - 1.0)) - 10.0;
            let hi = integrate_radial(p, high, beta, &domain, default_steps(p)).unwrap();
            assert!(lo.relative_mismatch < 0.0 && hi.relative_mismatch > 0.0, "p = {p}");
        }
    }

    #[test]
    fn p2_interval_eigenvalue_matches_transcendental_root() {
        for beta in [0.5_f64, 1.0, 2.0] {
            let k = tanh_root(beta * beta);
            let eig = solve_eigen_radial(2.0, beta, &interval()).unwrap();
            assert_relative_eq!(eig.lambda, -k * k, max_relative = 1e-8);
        }
        let eig = solve_eigen_radial(2.0, 1.0, &interval()).unwrap();
        assert!((eig.lambda + 1.43923).abs() < 1e-4);
    }

    #[test]
    fn large_p_root_tracks_leading_asymptotics() {
        // for large p the interval root is (p-1)^{1/p} beta^{p/(p-1)} up to
        // exponentially small terms; the value at p = 50 was cross-checked
        // with an adaptive DOP853 shooting run
        let eig = solve_eigen_radial(50.0, 1.0, &interval()).unwrap();
        let root = eig.root();
        assert!(root > 1.0 && root < 1.09, "root = {root}");
        assert_relative_eq!(root, 1.0809458079152663, max_relative = 1e-10);
        assert_relative_eq!(root, 49.0_f64.powf(1.0 / 50.0), max_relative = 1e-10);
    }

    #[test]
    fn eigenvalue_respects_test_function_bound() {
        for (p, beta, domain) in [
            (2.0, 1.0, interval()),
            (4.0, 0.7, Domain::Ball { n: 2, radius: 1.0 }),
            (3.0, 1.3, Domain::Ball { n: 3, radius: 0.5 }),
            (2.5, 1.0, Domain::Shell { n: 2, inner: 1.0, outer: 2.0 }),
        ] {
            let eig = solve_eigen_radial(p, beta, &domain).unwrap();
            let bound = -beta.powf(p) * domain.perimeter_volume_ratio();
            assert!(eig.lambda <= bound * (1.0 - 1e-8), "{domain:?}: {} vs {bound}", eig.lambda);
        }
    }

    #[test]
    fn profile_is_monotone_and_boundary_normalized() {
        for domain in [interval(), Domain::Ball { n: 2, radius: 1.0 }] {
            let eig = solve_eigen_radial(6.0, 1.0, &domain).unwrap();
            assert!(eig.profile.derivatives.iter().all(|&d| d >= -1e-10));
            assert!(eig.profile.values.iter().all(|&u| u > 0.0));
            assert_relative_eq!(*eig.profile.values.last().unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn energy_identity_holds() {
        for (p, domain) in [
            (2.0, interval()),
            (8.0, Domain::Ball { n: 2, radius: 1.0 }),
            (3.0, Domain::Shell { n: 2, inner: 1.0, outer: 2.0 }),
        ] {
            let eig = solve_eigen_radial(p, 1.0, &domain).unwrap();
            assert!(eig.energy_defect().abs() < 1e-6, "{domain:?} p={p}: {}", eig.energy_defect());
        }
    }

    #[test]
    fn halving_the_step_barely_moves_lambda() {
        let coarse = solve_eigen_radial_with_steps(4.0, 1.0, &interval(), 2000).unwrap();
        let fine = solve_eigen_radial_with_steps(4.0, 1.0, &interval(), 4000).unwrap();
        assert!(((coarse.lambda - fine.lambda) / fine.lambda).abs() < 1e-7);
    }

    #[test]
    fn rectangle_is_rejected() {
        let r = solve_eigen_radial(2.0, 1.0, &Domain::Rectangle { width: 1.0, height: 1.0 });
        assert!(matches!(r, Err(Error::UnsupportedDomain { .. })));
        assert!(integrate_radial(2.0, 1.0, 1.0, &interval(), 100).is_err());
    }

    #[test]
    fn limit_profile_values() {
        let g = crate::geometry::make_grid(interval(), 10).unwrap();
        assert_eq!(limit_profile(1.0, &g).values()[10], 1.0);
        let b = crate::geometry::make_grid(Domain::Ball { n: 2, radius: 1.0 }, 8).unwrap();
        assert_relative_eq!(limit_profile(2.0, &b).values()[4], (-1.0_f64).exp(), epsilon = 1e-15);
        let sq = crate::geometry::make_grid(Domain::Rectangle { width: 1.0, height: 1.0 }, 10).unwrap();
        let c = sq.tensor_index(5, 5);
        assert_relative_eq!(limit_profile(1.0, &sq).values()[c], (-0.5_f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn sampling_reproduces_nodes() {
        let eig = solve_eigen_radial(2.0, 1.0, &interval()).unwrap();
        let g = crate::geometry::make_grid(interval(), 40).unwrap();
        let f = eig.profile.sample(&g).unwrap();
        let k = tanh_root(1.0);
        for (i, p) in g.points().iter().enumerate() {
            let exact = (k * p[0]).cosh() / k.cosh();
            assert!((f.values()[i] - exact).abs() < 1e-9);
        }
    }
}
