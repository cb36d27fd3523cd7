//! Reference implementations used to cross-check the library. None of these
//! share code with the crate under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use readiness::linalg::Matrix;
use readiness::regression::Kernel;

pub const COHORT: &str = include_str!("../data/cohort47.csv");

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("X{i}")).collect()
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Matrix {
    let data: Vec<f64> = (0..n * m).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_row_major(n, m, data)
}

/// Intercept followed by slopes, from `(A^T A) beta = A^T y` with `A = [1 | X]`.
pub fn normal_equations(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let (n, m) = (x.rows(), x.cols());
    let a = DMatrix::from_fn(n, m + 1, |i, j| if j == 0 { 1.0 } else { x.get(i, j - 1) });
    let b = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let chol = ata.cholesky().expect("full-rank instance");
    chol.solve(&atb).iter().copied().collect()
}

pub fn gram(x: &Matrix, kernel: &Kernel) -> Vec<Vec<f64>> {
    let n = x.rows();
    (0..n)
        .map(|i| (0..n).map(|j| kernel.eval(x.row(i), x.row(j))).collect())
        .collect()
}

/// Epsilon-SVR dual in difference form,
/// `0.5 b^T K b - y^T b + eps * |b|_1`, to be minimized.
pub fn svr_dual_objective(k: &[Vec<f64>], y: &[f64], eps: f64, beta: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * k[i][j] * beta[j];
        }
    }
    let lin: f64 = (0..n).map(|i| eps * beta[i].abs() - y[i] * beta[i]).sum();
    0.5 * quad + lin
}

/// Euclidean projection onto `{0 <= v <= c, sum_i z_i v_i = 0}`. The
/// solution is `clip(u - mu z)`, with `mu` found by bisection.
fn project(u: &[f64], z: &[f64], c: f64) -> Vec<f64> {
    let balance = |mu: f64| -> f64 { u.iter().zip(z).map(|(ui, zi)| zi * (ui - mu * zi).clamp(0.0, c)).sum() };
    let span = u.iter().fold(0.0f64, |m, v| m.max(v.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    u.iter().zip(z).map(|(ui, zi)| (ui - mu * zi).clamp(0.0, c)).collect()
}

fn largest_eigenvalue(k: &[Vec<f64>]) -> f64 {
    let n = k.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.iter().map(|x| x / norm).collect();
    }
    lambda
}

/// Accelerated projected gradient (with adaptive restart) on the 2n-variable
/// dual `min 0.5 a^T Q a + p^T a`, `Q_st = z_s z_t K`, `p = eps - z y`, over
/// the box `[0, c]` with `z^T a = 0`. Stops when a projected-gradient step
/// from the current point moves no coordinate by more than `tol`. Returns
/// the difference weights.
pub fn svr_dual_oracle(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64, tol: f64) -> Vec<f64> {
    let n = y.len();
    let z: Vec<f64> = (0..2 * n).map(|t| if t < n { 1.0 } else { -1.0 }).collect();
    let p: Vec<f64> = (0..2 * n).map(|t| eps - z[t] * y[t % n]).collect();
    // Returns (objective, gradient).
    let eval = |a: &[f64]| -> (f64, Vec<f64>) {
        let beta: Vec<f64> = (0..n).map(|i| a[i] - a[i + n]).collect();
        let kb: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * beta[j]).sum()).collect();
        let f = 0.5 * beta.iter().zip(&kb).map(|(b, q)| b * q).sum::<f64>()
            + a.iter().zip(&p).map(|(ai, pi)| ai * pi).sum::<f64>();
        let g = (0..2 * n).map(|t| z[t] * kb[t % n] + p[t]).collect();
        (f, g)
    };
    // The Hessian [[K, -K], [-K, K]] has largest eigenvalue 2 lambda_max(K).
    let step = 1.0 / (2.0 * largest_eigenvalue(k) * (1.0 + 1e-9)).max(1e-12);
    let pg_step = |a: &[f64], g: &[f64]| -> Vec<f64> {
        let u: Vec<f64> = a.iter().zip(g).map(|(v, gi)| v - step * gi).collect();
        project(&u, &z, c)
    };

    let mut a = vec![0.0; 2 * n];
    let (mut f_a, mut g_a) = eval(&a);
    let mut yk = a.clone();
    let mut g_y = g_a.clone();
    let mut t = 1.0f64;
    for iter in 0..1_000_000 {
        let next = pg_step(&yk, &g_y);
        let (f_next, g_next) = eval(&next);
        // Restart momentum if it made things worse; a plain step is always taken.
        if f_next > f_a && t > 1.0 {
            t = 1.0;
            yk = a.clone();
            g_y = g_a.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let w = (t - 1.0) / t_next;
        yk = next.iter().zip(&a).map(|(x1, x0)| x1 + w * (x1 - x0)).collect();
        a = next;
        f_a = f_next;
        g_a = g_next;
        g_y = if w == 0.0 { g_a.clone() } else { eval(&yk).1 };
        t = t_next;
        let residual_at = |v: &[f64], g: &[f64]| {
            let fixed = pg_step(v, g);
            fixed.iter().zip(v).fold(0.0f64, |m, (x1, x0)| m.max((x1 - x0).abs()))
        };
        if iter % 25 == 0 && residual_at(&a, &g_a) <= tol {
            break;
        }
    }
    (0..n).map(|i| a[i] - a[i + n]).collect()
}

/// Maximal KKT violation of difference weights `beta`, measured as in the
/// standard working-set test on the split `a = max(beta, 0)`, `a* = max(-beta, 0)`:
/// the largest `-z G` over movable-up variables minus the smallest over
/// movable-down variables. Independent of the bias.
pub fn svr_kkt_violation(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64, beta: &[f64]) -> f64 {
    let n = y.len();
    let slack = 1e-12 * c;
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for i in 0..n {
        let s = y[i] - (0..n).map(|j| k[i][j] * beta[j]).sum::<f64>();
        let a = beta[i].max(0.0);
        let a_star = (-beta[i]).max(0.0);
        if a < c - slack {
            up = up.max(s - eps);
        }
        if a > slack {
            low = low.min(s - eps);
        }
        if a_star > slack {
            up = up.max(s + eps);
        }
        if a_star < c - slack {
            low = low.min(s + eps);
        }
    }
    (up - low).max(0.0)
}

/// Expands a fitted model's sparse weights back onto training rows.
pub fn dense_weights(x: &Matrix, support_vectors: &Matrix, weights: &[f64]) -> Vec<f64> {
    let mut beta = vec![0.0; x.rows()];
    let mut next = 0;
    for (s, w) in weights.iter().enumerate() {
        let sv = support_vectors.row(s);
        let i = (next..x.rows())
            .find(|&i| x.row(i) == sv)
            .expect("support vector is a training row");
        beta[i] = *w;
        next = i + 1;
    }
    beta
}

pub fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}
