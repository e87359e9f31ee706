//! Precomputed-kernel support vector classification.
//!
//! [`solve_smo`] solves the C-SVC dual
//! `max sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij`, `0 <= a <= C`, `sum a_i y_i = 0`
//! by sequential minimal optimization: the first index is the maximal KKT
//! violator, the second maximizes the second-order gain. Multiclass problems
//! are composed one-vs-one.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::kernels::{KernelKind, KernelMatrix};
use crate::{par, Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    pub c: f64,
    /// Stopping threshold on the maximal KKT violation.
    pub tol: f64,
    /// Iteration budget per training row.
    pub max_passes: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10_000,
        }
    }
}

/// Two-class training problem on a square train Gram.
#[derive(Debug, Clone)]
pub struct BinaryProblem<'a> {
    pub gram: ArrayView2<'a, f64>,
    pub kind: KernelKind,
    /// Labels in {-1, +1}.
    pub y: Vec<f64>,
    pub c: f64,
}

impl<'a> BinaryProblem<'a> {
    pub fn new(gram: ArrayView2<'a, f64>, kind: KernelKind, y: Vec<f64>, c: f64) -> Result<Self> {
        if gram.nrows() != gram.ncols() || gram.nrows() != y.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} Gram", y.len()),
                got: format!("{}x{}", gram.nrows(), gram.ncols()),
            });
        }
        if y.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidArgument("binary labels must be -1 or +1".into()));
        }
        if !y.contains(&1.0) || !y.contains(&-1.0) {
            return Err(Error::InvalidArgument("both classes must be present".into()));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
        }
        Ok(BinaryProblem { gram, kind, y, c })
    }

    pub fn from_kernel(gram: &'a KernelMatrix, y: Vec<f64>, c: f64) -> Result<Self> {
        BinaryProblem::new(gram.values.view(), gram.kind, y, c)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Dual objective for a full coefficient vector.
    pub fn dual_objective(&self, alpha: &[f64]) -> f64 {
        let n = self.len();
        let mut quad = 0.0;
        for i in 0..n {
            if alpha[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                quad += alpha[i] * alpha[j] * self.y[i] * self.y[j] * self.gram[[i, j]];
            }
        }
        alpha.iter().sum::<f64>() - 0.5 * quad
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// `alpha_i * y_i` for every support row.
    pub alpha_y: Vec<f64>,
    /// Row indices of the support rows in the training set.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub kind: KernelKind,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl SvmModel {
    /// `f(x) = sum alpha_y_i K(x_i, x) + bias` from kernel values against the
    /// support rows, in `support_indices` order.
    pub fn decision_value(&self, k_row: &[f64]) -> Result<f64> {
        if k_row.len() != self.alpha_y.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} kernel values", self.alpha_y.len()),
                got: format!("{}", k_row.len()),
            });
        }
        Ok(self.alpha_y.iter().zip(k_row).map(|(a, k)| a * k).sum::<f64>() + self.bias)
    }

    /// Decision value from a kernel row against the whole training set.
    pub fn decision_on_row(&self, row: ArrayView1<f64>) -> f64 {
        self.support_indices
            .iter()
            .zip(&self.alpha_y)
            .map(|(&i, a)| a * row[i])
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_binary(&self, k_row: &[f64]) -> Result<f64> {
        Ok(if self.decision_value(k_row)? > 0.0 { 1.0 } else { -1.0 })
    }

    /// Full coefficient vector of length `n`.
    pub fn alphas(&self, n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n];
        for (&i, ay) in self.support_indices.iter().zip(&self.alpha_y) {
            a[i] = ay.abs();
        }
        a
    }
}

fn in_up(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Dual of `grad`: `-1/2 sum a_t (G_t - 1)`.
fn objective_from_grad(alpha: &[f64], grad: &[f64]) -> f64 {
    -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>()
}

pub fn solve_smo(problem: &BinaryProblem, tol: f64, max_passes: usize) -> Result<SvmModel> {
    let n = problem.len();
    let c = problem.c;
    let y = &problem.y;
    let k = &problem.gram;
    let max_iter = max_passes.saturating_mul(n).max(10_000);

    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut last_objective = 0.0f64;

    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(y[t], alpha[t], c) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_gain = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(y[t], alpha[t], c) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = k[[i, i]] + k[[t, t]] - 2.0 * k[[i, t]];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let gain = -(b * b) / a;
                    if gain < best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let violation = gmax - gmin;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if violation < tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                iterations,
                violation,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = k[[i, j]];
        let mut quad = k[[i, i]] + k[[j, j]] - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[[t, i]] * di + y[j] * k[[t, j]] * dj);
        }

        if cfg!(debug_assertions) {
            let obj = objective_from_grad(&alpha, &grad);
            debug_assert!(
                obj >= last_objective - 1e-9 * (1.0 + last_objective.abs()),
                "dual objective decreased from {last_objective} to {obj}"
            );
            last_objective = obj;
        }
    }

    // bias from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    let support_indices: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        alpha_y: support_indices.iter().map(|&t| alpha[t] * y[t]).collect(),
        support_indices,
        bias: -rho,
        kind: problem.kind,
        dual_objective: objective_from_grad(&alpha, &grad),
        iterations,
    })
}

/// Largest per-sample KKT violation of a trained model on its own problem.
pub fn kkt_violation(model: &SvmModel, problem: &BinaryProblem) -> f64 {
    let alpha = model.alphas(problem.len());
    let c = problem.c;
    (0..problem.len())
        .map(|t| {
            let margin = problem.y[t] * model.decision_on_row(problem.gram.row(t));
            let a = alpha[t];
            if a <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if a >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// One binary model per unordered class pair; the lower class is `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    pub positive: usize,
    pub negative: usize,
    /// Support indices refer to rows of the full training Gram.
    pub model: SvmModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassModel {
    pub classes: Vec<usize>,
    pub pairwise: Vec<PairModel>,
}

pub fn train_ovo(gram: &KernelMatrix, labels: &[usize], params: SmoParams) -> Result<MulticlassModel> {
    if gram.rows() != gram.cols() || gram.rows() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0} Gram", labels.len()),
            got: format!("{}x{}", gram.rows(), gram.cols()),
        });
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 classes, got {}",
            classes.len()
        )));
    }
    let mut pairs = Vec::new();
    for (a, &ca) in classes.iter().enumerate() {
        for &cb in &classes[a + 1..] {
            pairs.push((ca, cb));
        }
    }
    let models = par::map_slice(&pairs, |&(ca, cb)| {
        let rows: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == ca || labels[r] == cb).collect();
        let sub = Array2::from_shape_fn((rows.len(), rows.len()), |(i, j)| gram.values[[rows[i], rows[j]]]);
        let y = rows.iter().map(|&r| if labels[r] == ca { 1.0 } else { -1.0 }).collect();
        let problem = BinaryProblem::new(sub.view(), gram.kind, y, params.c)?;
        let mut model = solve_smo(&problem, params.tol, params.max_passes)?;
        for idx in &mut model.support_indices {
            *idx = rows[*idx];
        }
        Ok::<_, Error>(PairModel {
            positive: ca,
            negative: cb,
            model,
        })
    });
    Ok(MulticlassModel {
        classes,
        pairwise: par::collect_results(models)?,
    })
}

impl MulticlassModel {
    /// Majority vote over pairwise signs. Ties go to the class with the larger
    /// summed `|decision value|` over its won duels, then to the lower class.
    pub fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        let k = self.classes.len();
        let mut votes = vec![0usize; k];
        let mut strength = vec![0.0f64; k];
        let slot = |c: usize| self.classes.binary_search(&c).expect("known class");
        for pm in &self.pairwise {
            let f = pm.model.decision_on_row(row);
            let winner = if f > 0.0 { pm.positive } else { pm.negative };
            let s = slot(winner);
            votes[s] += 1;
            strength[s] += f.abs();
        }
        let mut best = 0;
        for s in 1..k {
            if votes[s] > votes[best] || (votes[s] == votes[best] && strength[s] > strength[best]) {
                best = s;
            }
        }
        self.classes[best]
    }
}

/// Predicts one class per row of a test-vs-train kernel matrix.
pub fn predict_ovo(model: &MulticlassModel, k_rows: &ArrayView2<f64>) -> Vec<usize> {
    k_rows.outer_iter().map(|row| model.predict_row(row)).collect()
}
