mod common;

use common::{gaussian, qp_oracle, quad_objective, rng, svc_bias};
use rand::Rng;
use wearauth_core::learn::{ocsvm_train, smo_train, Kernel, SmoParams};

fn tight() -> SmoParams {
    SmoParams {
        tol: 1e-10,
        max_iter: 0,
    }
}

fn random_problem(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, Kernel, f64) {
    let mut r = rng(seed);
    let n = r.random_range(2..=6);
    let dim = r.random_range(1..=3);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| gaussian(&mut r)).collect()).collect();
    let mut y: Vec<f64> = (0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
    y[0] = 1.0;
    y[1] = -1.0;
    let kernel = if r.random::<bool>() {
        Kernel::Rbf {
            gamma: r.random_range(0.1..2.0),
        }
    } else {
        Kernel::polynomial_auto(r.random_range(1..=3), r.random_range(0.0..1.0), &rows)
    };
    (rows, y, kernel, r.random_range(0.1..10.0))
}

#[test]
fn smo_matches_qp_oracle_on_small_problems() {
    for seed in 0..50 {
        let (rows, y, kernel, c) = random_problem(seed);
        let n = rows.len();
        let m = smo_train(&rows, &y, kernel, c, tight()).unwrap();
        m.check_dual_feasibility(1e-8).unwrap();
        let q: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| y[i] * y[j] * kernel.eval(&rows[i], &rows[j])).collect())
            .collect();
        let a = qp_oracle(&q, &vec![-1.0; n], &y, c, 0.0, 20_000);
        let oracle = -quad_objective(&q, &vec![-1.0; n], &a);
        assert!(m.dual_objective() >= oracle - 1e-6, "seed {seed}: {} vs {oracle}", m.dual_objective());
        let b = svc_bias(&q, &y, &a, c);
        let mut r = rng(1000 + seed);
        for _ in 0..20 {
            let x: Vec<f64> = (0..rows[0].len()).map(|_| 2.0 * gaussian(&mut r)).collect();
            let f: f64 = (0..n).map(|i| a[i] * y[i] * kernel.eval(&rows[i], &x)).sum::<f64>() + b;
            assert!((m.decision(&x) - f).abs() < 1e-4, "seed {seed}: {} vs {f}", m.decision(&x));
        }
    }
}

#[test]
fn xor_is_separated() {
    let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let y = [1.0, 1.0, -1.0, -1.0];
    let m = smo_train(&rows, &y, Kernel::Rbf { gamma: 1.0 }, 1e3, SmoParams::default()).unwrap();
    for (x, &t) in rows.iter().zip(&y) {
        assert!(m.decision(x) * t > 0.0);
    }
    // by symmetry every α is equal; the oracle agrees
    let q: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| y[i] * y[j] * Kernel::Rbf { gamma: 1.0 }.eval(&rows[i], &rows[j])).collect())
        .collect();
    let a = qp_oracle(&q, &[-1.0; 4], &y, 1e3, 0.0, 50_000);
    for (coef, ai) in m.dual_coef.iter().zip(&a) {
        assert!((coef.abs() - ai).abs() < 1e-3);
    }
}

fn blob(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n).map(|_| vec![gaussian(&mut r), gaussian(&mut r)]).collect()
}

#[test]
fn one_class_nu_property() {
    let rows = blob(100, 7);
    for nu in [0.1, 0.5, 0.9] {
        let params = SmoParams::default();
        let m = ocsvm_train(&rows, nu, 0.5, params).unwrap();
        m.check_dual_feasibility(1e-8).unwrap();
        let n = rows.len() as f64;
        // free support vectors sit on the boundary only up to the solver tolerance
        let errors = rows.iter().filter(|x| m.decision(x) < -params.tol).count() as f64;
        let svs = m.alpha.len() as f64;
        assert!(errors / n <= nu + 1.0 / n, "ν={nu}: {errors} margin errors");
        assert!(svs / n >= nu - 1.0 / n, "ν={nu}: {svs} support vectors");
    }
}

#[test]
fn one_class_matches_qp_oracle() {
    let rows = blob(6, 9);
    let nu = 0.5;
    let gamma = 0.7;
    let m = ocsvm_train(&rows, nu, gamma, tight()).unwrap();
    let k = Kernel::Rbf { gamma };
    let q: Vec<Vec<f64>> = rows.iter().map(|a| rows.iter().map(|b| k.eval(a, b)).collect()).collect();
    let a = qp_oracle(&q, &[0.0; 6], &[1.0; 6], 1.0 / (nu * 6.0), 1.0, 50_000);
    let mut smo_alpha = vec![0.0; 6];
    for (sv, al) in m.support_vectors.iter().zip(&m.alpha) {
        let i = rows.iter().position(|r| r == sv).unwrap();
        smo_alpha[i] = *al;
    }
    let obj = |x: &[f64]| quad_objective(&q, &[0.0; 6], x);
    assert!((obj(&smo_alpha) - obj(&a)).abs() < 1e-8);
}

#[test]
fn blob_outlier_fraction_near_nu() {
    let rows = blob(100, 11);
    let m = ocsvm_train(&rows, 0.5, 0.05, SmoParams::default()).unwrap();
    let out = rows.iter().filter(|x| m.decision(x) < 0.0).count() as f64 / 100.0;
    assert!((0.4..=0.6).contains(&out), "{out}");
}
