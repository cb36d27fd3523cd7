//! Epsilon-insensitive support vector regression trained by SMO.
//!
//! The dual is solved in its 2n-variable form
//!
//! ```text
//! min_a  1/2 a'Qa + p'a    s.t.  z'a = 0,  0 <= a_t <= C
//! ```
//!
//! where for `t < n`: `z_t = +1`, `p_t = eps - y_t` (the alpha_i variables), and
//! for `t >= n`: `z_t = -1`, `p_t = eps + y_t` (the alpha_i^* variables), with
//! `Q_st = z_s z_t K(x_s, x_t)`. Each iteration updates the maximal violating
//! pair chosen by second-order working-set selection. The regression weight of
//! training point `i` is `alpha_i - alpha_i^*`.

use serde::{Deserialize, Serialize};

use super::{check_training_data, Gamma, KernelSpec, ModelError, ModelKind, Regressor, SvrParams};
use crate::linalg::{self, Matrix};

const TAU: f64 = 1e-12;

/// A resolved kernel: RBF carries a concrete `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Linear => linalg::dot(a, b),
        }
    }

    /// Resolves `spec` against a training matrix. `Gamma::Scale` becomes
    /// `1 / (m * var)` with `var` the population variance of all cells, or 1
    /// when that variance is zero.
    pub fn resolve(spec: KernelSpec, x: &Matrix) -> Kernel {
        match spec {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Rbf(Gamma::Value(g)) => Kernel::Rbf { gamma: g },
            KernelSpec::Rbf(Gamma::Scale) => {
                let cells = x.as_slice();
                let n = cells.len() as f64;
                let mean = cells.iter().sum::<f64>() / n;
                let var = cells.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let gamma = if var > 0.0 { 1.0 / (x.cols() as f64 * var) } else { 1.0 };
                Kernel::Rbf { gamma }
            }
        }
    }
}

/// How the optimizer finished.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrDiagnostics {
    pub iterations: usize,
    /// Maximal KKT violation at exit (`m(a) - M(a)` in SMO terms).
    pub kkt_violation: f64,
    /// Final value of the minimized dual objective.
    pub dual_objective: f64,
    pub converged: bool,
}

/// `f(x) = sum_i w_i K(sv_i, x) + bias`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support_vectors: Matrix,
    pub dual_weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub epsilon: f64,
    pub kernel: Kernel,
    pub diagnostics: SvrDiagnostics,
    #[serde(skip)]
    pub(crate) feature_labels: Vec<String>,
}

impl SvrModel {
    /// Assembles a model from explicit parts, e.g. for hand-built kernels.
    pub fn from_parts(
        support_vectors: Matrix,
        dual_weights: Vec<f64>,
        bias: f64,
        kernel: Kernel,
        feature_labels: Vec<String>,
    ) -> Result<Self, ModelError> {
        if support_vectors.rows() != dual_weights.len() {
            return Err(ModelError::DimensionMismatch {
                expected: support_vectors.rows(),
                found: dual_weights.len(),
            });
        }
        if support_vectors.rows() > 0 && support_vectors.cols() != feature_labels.len() {
            return Err(ModelError::DimensionMismatch {
                expected: feature_labels.len(),
                found: support_vectors.cols(),
            });
        }
        let c = dual_weights.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
        Ok(SvrModel {
            support_vectors,
            dual_weights,
            bias,
            c,
            epsilon: 0.0,
            kernel,
            diagnostics: SvrDiagnostics {
                iterations: 0,
                kkt_violation: 0.0,
                dual_objective: 0.0,
                converged: true,
            },
            feature_labels,
        })
    }
}

impl Regressor for SvrModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Svr
    }

    fn feature_labels(&self) -> &[String] {
        &self.feature_labels
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter_rows()
            .zip(&self.dual_weights)
            .map(|(sv, w)| w * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }
}

struct Smo {
    n: usize,
    kernel: Vec<f64>,
    z: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    c: f64,
}

impl Smo {
    #[inline]
    fn k(&self, s: usize, t: usize) -> f64 {
        self.kernel[(s % self.n) * self.n + t % self.n]
    }

    #[inline]
    fn q(&self, s: usize, t: usize) -> f64 {
        self.z[s] * self.z[t] * self.k(s, t)
    }

    #[inline]
    fn in_up(&self, t: usize) -> bool {
        if self.z[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    #[inline]
    fn in_low(&self, t: usize) -> bool {
        if self.z[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    /// Second-order working-set selection. Returns the violation and, when it
    /// is positive, the pair to update.
    fn select(&self) -> (f64, Option<(usize, usize)>) {
        let l = self.alpha.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i = None;
        for t in 0..l {
            if self.in_up(t) {
                let v = -self.z[t] * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i = Some(t);
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = None;
        let mut best = f64::INFINITY;
        for t in 0..l {
            if !self.in_low(t) {
                continue;
            }
            let v = self.z[t] * self.grad[t];
            if v > gmax2 {
                gmax2 = v;
            }
            if let Some(i) = i {
                let diff = gmax + v;
                if diff > 0.0 {
                    let mut quad = self.k(i, i) + self.k(t, t) - 2.0 * self.k(i, t);
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let obj = -(diff * diff) / quad;
                    if obj < best {
                        best = obj;
                        j = Some(t);
                    }
                }
            }
        }
        let violation = gmax + gmax2;
        match (i, j) {
            (Some(i), Some(j)) => (violation, Some((i, j))),
            _ => (violation.max(0.0), None),
        }
    }

    fn update(&mut self, i: usize, j: usize) -> bool {
        let c = self.c;
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let mut quad = self.k(i, i) + self.k(j, j) - 2.0 * self.k(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if self.z[i] != self.z[j] {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        let (di, dj) = (ai - old_i, aj - old_j);
        if di == 0.0 && dj == 0.0 {
            return false;
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        for t in 0..self.alpha.len() {
            self.grad[t] += self.q(t, i) * di + self.q(t, j) * dj;
        }
        true
    }

    /// Offset `rho` with `f(x) = sum w K - rho`: the mean of `z_t G_t` over
    /// free variables, or the midpoint of the feasible interval if none.
    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum, mut free) = (0.0, 0usize);
        for t in 0..self.alpha.len() {
            let yg = self.z[t] * self.grad[t];
            let a = self.alpha[t];
            if a >= self.c {
                if self.z[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if a <= 0.0 {
                if self.z[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }

    fn objective(&self, p: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(&self.grad)
            .zip(p)
            .map(|((a, g), p)| 0.5 * a * (g + p))
            .sum()
    }
}

/// Fits an epsilon-SVR. Training stops when the maximal KKT violation is at
/// most `params.tolerance` or after `params.max_iterations` pair updates. A
/// model that hit the cap is returned with `diagnostics.converged == false`;
/// [`ModelError::NotConverged`] is reserved for runs where no update was
/// possible at all.
pub fn fit_svr(x: &Matrix, y: &[f64], labels: &[String], params: &SvrParams) -> Result<SvrModel, ModelError> {
    check_training_data(x, y, labels, 2)?;
    let n = x.rows();
    let kernel = Kernel::resolve(params.kernel, x);
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(x.row(i), x.row(j));
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }
    let p: Vec<f64> = (0..2 * n)
        .map(|t| if t < n { params.epsilon - y[t] } else { params.epsilon + y[t - n] })
        .collect();
    let mut smo = Smo {
        n,
        kernel: gram,
        z: (0..2 * n).map(|t| if t < n { 1.0 } else { -1.0 }).collect(),
        alpha: vec![0.0; 2 * n],
        grad: p.clone(),
        c: params.c,
    };

    let mut iterations = 0;
    let mut updates = 0;
    let violation = loop {
        let (violation, pair) = smo.select();
        if violation <= params.tolerance {
            break violation;
        }
        let Some((i, j)) = pair else { break violation };
        if iterations >= params.max_iterations {
            break violation;
        }
        iterations += 1;
        if smo.update(i, j) {
            updates += 1;
        } else {
            break violation;
        }
    };
    let converged = violation <= params.tolerance;
    if !converged && updates == 0 {
        return Err(ModelError::NotConverged { iterations, violation });
    }

    let bias = -smo.rho();
    let dual_objective = smo.objective(&p);
    let mut sv_rows = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        let w = smo.alpha[i] - smo.alpha[i + n];
        if w != 0.0 {
            sv_rows.push(i);
            weights.push(w);
        }
    }
    Ok(SvrModel {
        support_vectors: x.select_rows(&sv_rows),
        dual_weights: weights,
        bias,
        c: params.c,
        epsilon: params.epsilon,
        kernel,
        diagnostics: SvrDiagnostics {
            iterations,
            kkt_violation: violation,
            dual_objective,
            converged,
        },
        feature_labels: labels.to_vec(),
    })
}
