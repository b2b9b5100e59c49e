//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    // Box–Muller, kept separate from the crate's samplers
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Φ(−1).
pub const PHI_MINUS_ONE: f64 = 0.158_655_253_931_457_05;

/// Euclidean projection onto `{α : yᵀα = target, 0 ≤ α ≤ c}` by bisection
/// on the multiplier of the equality constraint.
pub fn project(v: &[f64], y: &[f64], c: f64, target: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> {
        v.iter().zip(y).map(|(vi, yi)| (vi - lam * yi).clamp(0.0, c)).collect()
    };
    let h = |lam: f64| -> f64 { at(lam).iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>() - target };
    // h is non-increasing in λ
    let (mut lo, mut hi) = (-1.0, 1.0);
    while h(lo) < 0.0 {
        lo *= 2.0;
    }
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Minimizes `½ αᵀQα + pᵀα` over the projected set with accelerated
/// projected gradient (FISTA).
pub fn qp_oracle(q: &[Vec<f64>], p: &[f64], y: &[f64], c: f64, target: f64, iters: usize) -> Vec<f64> {
    let n = p.len();
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n).map(|i| p[i] + (0..n).map(|j| q[i][j] * a[j]).sum::<f64>()).collect()
    };
    let mut x = project(&vec![0.0; n], y, c, target);
    let mut z = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let g = grad(&z);
        let step: Vec<f64> = (0..n).map(|i| z[i] - g[i] / lipschitz).collect();
        let next = project(&step, y, c, target);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = (0..n).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - x[i])).collect();
        x = next;
        t = t_next;
    }
    x
}

pub fn quad_objective(q: &[Vec<f64>], p: &[f64], a: &[f64]) -> f64 {
    let n = a.len();
    let mut v = 0.0;
    for i in 0..n {
        v += p[i] * a[i];
        for j in 0..n {
            v += 0.5 * a[i] * q[i][j] * a[j];
        }
    }
    v
}

/// Offset of the C-SVC decision function from an optimal α, by the usual
/// KKT rule: average over free variables, else midpoint of the bounds.
pub fn svc_bias(q: &[Vec<f64>], y: &[f64], a: &[f64], c: f64) -> f64 {
    let n = a.len();
    let eps = 1e-7 * c.max(1.0);
    let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * a[j]).sum::<f64>() - 1.0).collect();
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut free = Vec::new();
    for i in 0..n {
        let yg = y[i] * g[i];
        if a[i] > eps && a[i] < c - eps {
            free.push(yg);
        } else if (a[i] >= c - eps) == (y[i] < 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if !free.is_empty() {
        free.iter().sum::<f64>() / free.len() as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };
    -rho
}

/// The 21 window statistics written straight from their definitions.
pub fn stat_oracle(x: &[f64]) -> [f64; 21] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let moment = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let var = moment(2);
    let std = var.sqrt();
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |s: &[f64], p: f64| {
        let h = (s.len() as f64 - 1.0) * p;
        let k = h.floor();
        let k1 = (k as usize + 1).min(s.len() - 1);
        s[k as usize] + (h - k) * (s[k1] - s[k as usize])
    };
    let median = q(&s, 0.5);
    let (p25, p75) = (q(&s, 0.25), q(&s, 0.75));
    let (min, max) = (s[0], s[s.len() - 1]);
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let mad_mean = x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let mut dev: Vec<f64> = x.iter().map(|v| (v - median).abs()).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let energy = x.iter().map(|v| v * v).sum::<f64>();
    let power = energy / n;
    [
        mean,
        median,
        std,
        var,
        div(std, mean),
        max - min,
        div(max - min, max + min),
        p25,
        p75,
        max,
        p75 - p25,
        div(p75 - p25, p75 + p25),
        mad_mean,
        q(&dev, 0.5),
        energy,
        power,
        power.sqrt(),
        energy.sqrt(),
        div(mean, std),
        div(moment(3), var.powf(1.5)),
        if var == 0.0 { 0.0 } else { moment(4) / (var * var) - 3.0 },
    ]
}
