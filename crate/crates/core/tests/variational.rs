use proptest::prelude::*;
use robin_core::geometry::{make_grid, Domain, Grid, ScalarField};
use robin_core::radial::solve_eigen_radial;
use robin_core::variational::{
    boundary_lp_norm, euler_lagrange_residual, euler_lagrange_residuals, minimize, minimize_continuation,
    quotient_gradient, rayleigh_quotient, MinimizeOptions,
};

fn grids() -> Vec<Grid> {
    vec![
        make_grid(Domain::Interval { a: 0.0, b: 1.0 }, 8).unwrap(),
        make_grid(Domain::Ball { n: 2, radius: 1.0 }, 8).unwrap(),
        make_grid(Domain::Shell { n: 3, inner: 0.5, outer: 1.0 }, 6).unwrap(),
        make_grid(Domain::Rectangle { width: 1.0, height: 2.0 }, 4).unwrap(),
    ]
}

/// `k` with `k tanh k = c`, by bisection.
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

fn field_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..2.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quotient_is_zero_homogeneous(g in 0usize..4, p in 1.5f64..9.0, beta in 0.2f64..3.0, seed in field_strategy(64)) {
        let grid = &grids()[g];
        let w = ScalarField::new(grid, (0..grid.len()).map(|i| seed[i % seed.len()]).collect()).unwrap();
        let q = rayleigh_quotient(p, beta, grid, &w).unwrap();
        for c in [0.5, 3.0] {
            let qc = rayleigh_quotient(p, beta, grid, &w.scaled(c)).unwrap();
            prop_assert!((qc - q).abs() <= 1e-12 * q.abs().max(1.0), "{q} vs {qc}");
        }
    }

    #[test]
    fn gradient_matches_central_differences(g in 0usize..4, pi in 0usize..3, seed in field_strategy(64)) {
        let p = [2.0, 3.0, 6.0][pi];
        let beta = 1.0;
        let grid = &grids()[g];
        let w: Vec<f64> = (0..grid.len()).map(|i| seed[i % seed.len()]).collect();
        let field = ScalarField::new(grid, w.clone()).unwrap();
        let grad = quotient_gradient(p, beta, grid, &field).unwrap();
        let scale = grad.max_abs().max(1.0);
        let eps = 1e-6;
        for i in 0..grid.len() {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[i] += eps;
            minus[i] -= eps;
            let qp = rayleigh_quotient(p, beta, grid, &ScalarField::new(grid, plus).unwrap()).unwrap();
            let qm = rayleigh_quotient(p, beta, grid, &ScalarField::new(grid, minus).unwrap()).unwrap();
            let fd = (qp - qm) / (2.0 * eps);
            prop_assert!((fd - grad.values()[i]).abs() <= 1e-5 * scale, "node {i}: {fd} vs {}", grad.values()[i]);
        }
    }
}

#[test]
fn minimizer_matches_the_shooting_oracle() {
    let opts = MinimizeOptions::default();
    for d in [Domain::Interval { a: -1.0, b: 1.0 }, Domain::Ball { n: 2, radius: 1.0 }] {
        let grid = make_grid(d, 400).unwrap();
        for p in [2.0, 4.0, 8.0] {
            let pair = minimize_continuation(p, 1.0, &grid, &opts).unwrap();
            let oracle = solve_eigen_radial(p, 1.0, &d).unwrap().lambda;
            assert!(((pair.lambda - oracle) / oracle).abs() < 0.01, "{d:?} p={p}: {} vs {oracle}", pair.lambda);
        }
    }
}

#[test]
fn eigenpair_invariants_hold() {
    let grid = make_grid(Domain::Rectangle { width: 1.0, height: 1.0 }, 24).unwrap();
    let pair = minimize(3.0, 1.0, &grid, None, &MinimizeOptions::default()).unwrap();
    let bound = -grid.total_boundary_weight() / grid.total_volume_weight();
    assert!(pair.lambda < 0.0);
    assert!(pair.lambda <= bound + 1e-8);
    assert!(pair.u.values().iter().all(|&v| v > 0.0));
    assert!((boundary_lp_norm(3.0, &grid, pair.u.values()) - 1.0).abs() < 1e-12);
    assert!(pair.energy_defect(&grid).unwrap().abs() < 1e-6);
    let (argmax, _) = pair.u.argmax();
    assert!(grid.is_boundary(argmax));
}

#[test]
fn minimizer_is_deterministic() {
    let grid = make_grid(Domain::Ball { n: 2, radius: 1.0 }, 64).unwrap();
    let a = minimize(2.5, 1.0, &grid, None, &MinimizeOptions::default()).unwrap();
    let b = minimize(2.5, 1.0, &grid, None, &MinimizeOptions::default()).unwrap();
    assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    assert_eq!(a.u.values(), b.u.values());
}

#[test]
fn iteration_limit_returns_the_best_iterate() {
    let grid = make_grid(Domain::Interval { a: -1.0, b: 1.0 }, 100).unwrap();
    let opts = MinimizeOptions { max_iters: 3, tolerance: 1e-300, plateau: 0.0, ..MinimizeOptions::default() };
    match minimize(2.0, 1.0, &grid, None, &opts) {
        Err(robin_core::Error::NotConverged { iterations, best, .. }) => {
            assert_eq!(iterations, 3);
            assert!(best.lambda <= -1.0);
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn continuation_reaches_p12() {
    let d = Domain::Interval { a: -1.0, b: 1.0 };
    let grid = make_grid(d, 200).unwrap();
    let pair = minimize_continuation(12.0, 1.0, &grid, &MinimizeOptions::default()).unwrap();
    let root12 = pair.root();
    let root4 = solve_eigen_radial(4.0, 1.0, &d).unwrap().root();
    assert!(root12 > 1.0 && root12 < 1.25, "{root12}");
    assert!(root12 < root4);
    assert!(euler_lagrange_residual(&pair, &grid).unwrap() < 1e-4);
}

#[test]
fn cosh_residual_decreases_under_refinement() {
    let beta = 1.0;
    let k = tanh_root(beta * beta);
    let residual = |res: usize| {
        let grid = make_grid(Domain::Interval { a: -1.0, b: 1.0 }, res).unwrap();
        let u = ScalarField::from_fn(&grid, |_, x| (k * x[0]).cosh());
        euler_lagrange_residuals(2.0, beta, -k * k, &grid, &u).unwrap().max_abs()
    };
    let mut prev = residual(25);
    for res in [50, 100, 200] {
        let r = residual(res);
        assert!(r <= prev / 2.0, "res {res}: {r} vs {prev}");
        prev = r;
    }
}

#[test]
fn cosh_quotient_converges_to_the_closed_form() {
    let beta = 2.0;
    let k = tanh_root(beta * beta);
    let err = |res: usize| {
        let grid = make_grid(Domain::Interval { a: -1.0, b: 1.0 }, res).unwrap();
        let u = ScalarField::from_fn(&grid, |_, x| (k * x[0]).cosh());
        (rayleigh_quotient(2.0, beta, &grid, &u).unwrap() + k * k).abs()
    };
    let (e1, e2) = (err(100), err(200));
    assert!(e1 < 1e-2 * k * k);
    assert!(e2 < e1 / 3.5, "{e1} {e2}");
}
