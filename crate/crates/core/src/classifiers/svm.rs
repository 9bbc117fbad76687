//! Soft-margin kernel SVM trained on the dual with SMO: maximal-violating
//! pair selection using second-order information, analytic two-variable
//! updates, and a KKT-gap stopping tolerance.
//!
//! Score is `σ(f(x))` where `f` is the signed decision value, so the label
//! (`f ≥ 0`) coincides with `score ≥ 0.5`.

use serde::{Deserialize, Serialize};

use super::params::{HyperMap, HyperValue, ParamReader};
use super::{sigmoid, Algorithm, Dataset};
use crate::error::Result;
use crate::features::SparseVector;

const TAU: f64 = 1e-12;
/// Above this many training rows the Gram matrix is not cached.
const GRAM_CACHE_LIMIT: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    /// `1 / n_features`.
    Auto,
    Value(f64),
}

impl Gamma {
    pub fn resolve(self, n_features: usize) -> f64 {
        match self {
            Gamma::Auto => 1.0 / n_features.max(1) as f64,
            Gamma::Value(g) => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: Kernel,
    pub gamma: Gamma,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: Kernel::Rbf,
            gamma: Gamma::Auto,
            tol: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

impl SvmParams {
    pub(crate) fn from_map(map: &HyperMap) -> Result<Self> {
        let d = Self::default();
        let mut r = ParamReader::new(Algorithm::Svm, map);
        let c = r.positive_f64_or("C", d.c)?;
        let kernel = match r.choice_or("kernel", &["linear", "rbf"], "rbf")? {
            "linear" => Kernel::Linear,
            _ => Kernel::Rbf,
        };
        let gamma = match r.raw("gamma") {
            None => d.gamma,
            Some(HyperValue::Str(s)) if s.eq_ignore_ascii_case("auto") => Gamma::Auto,
            Some(HyperValue::Float(g)) if *g > 0.0 && g.is_finite() => Gamma::Value(*g),
            Some(HyperValue::Int(g)) if *g > 0 => Gamma::Value(*g as f64),
            Some(other) => return Err(r.err(format!("gamma must be \"auto\" or positive, got {other}"))),
        };
        let p = SvmParams {
            c,
            kernel,
            gamma,
            tol: r.positive_f64_or("tol", d.tol)?,
            max_iter: r.positive_usize_or("max_iter", d.max_iter)?,
        };
        r.finish()?;
        Ok(p)
    }

    pub(crate) fn to_map(self) -> HyperMap {
        let gamma = match self.gamma {
            Gamma::Auto => "auto".into(),
            Gamma::Value(g) => g.into(),
        };
        HyperMap::from([
            ("C".into(), self.c.into()),
            ("kernel".into(), if self.kernel == Kernel::Linear { "linear" } else { "rbf" }.into()),
            ("gamma".into(), gamma),
            ("tol".into(), self.tol.into()),
            ("max_iter".into(), (self.max_iter as i64).into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
enum DecisionFunction {
    /// Linear kernel collapsed to a primal weight vector.
    Primal { weights: Vec<f64> },
    Kernel {
        support: Vec<SparseVector>,
        /// `α_i y_i` per support vector.
        coef: Vec<f64>,
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    decision: DecisionFunction,
    rho: f64,
    pub gamma_used: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_support: usize,
}

fn kernel_value(kernel: Kernel, gamma: f64, a: &SparseVector, b: &SparseVector) -> f64 {
    match kernel {
        Kernel::Linear => a.dot(b),
        Kernel::Rbf => (-gamma * a.squared_distance_exact(b)).exp(),
    }
}

struct Gram<'a> {
    x: &'a [SparseVector],
    y: Vec<f64>,
    kernel: Kernel,
    gamma: f64,
    cache: Option<Vec<f64>>,
}

impl Gram<'_> {
    /// Row `i` of `Q_ij = y_i y_j K(x_i, x_j)`.
    fn q_row(&self, i: usize) -> Vec<f64> {
        let n = self.x.len();
        match &self.cache {
            Some(k) => (0..n).map(|j| self.y[i] * self.y[j] * k[i * n + j]).collect(),
            None => (0..n)
                .map(|j| self.y[i] * self.y[j] * kernel_value(self.kernel, self.gamma, &self.x[i], &self.x[j]))
                .collect(),
        }
    }
}

impl SvmModel {
    pub(crate) fn fit(params: &SvmParams, data: &Dataset<'_>) -> Result<Self> {
        let n = data.x.len();
        let c = params.c;
        let gamma = params.gamma.resolve(data.dim);
        let y: Vec<f64> = data.y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
        let cache = (n <= GRAM_CACHE_LIMIT).then(|| {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = kernel_value(params.kernel, gamma, &data.x[i], &data.x[j]);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            k
        });
        let gram = Gram {
            x: data.x,
            y: y.clone(),
            kernel: params.kernel,
            gamma,
            cache,
        };
        let qd: Vec<f64> = (0..n)
            .map(|i| kernel_value(params.kernel, gamma, &data.x[i], &data.x[i]))
            .collect();

        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let is_upper = |a: f64| a >= c;
        let is_lower = |a: f64| a <= 0.0;
        let mut iterations = 0;
        let mut converged = false;

        while iterations < params.max_iter {
            // Working set: i maximizes -y_t G_t over I_up, j minimizes the
            // second-order objective decrease over I_low.
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..n {
                if y[t] > 0.0 {
                    if !is_upper(alpha[t]) && -grad[t] >= gmax {
                        gmax = -grad[t];
                        i_sel = Some(t);
                    }
                } else if !is_lower(alpha[t]) && grad[t] >= gmax {
                    gmax = grad[t];
                    i_sel = Some(t);
                }
            }
            let Some(i) = i_sel else {
                converged = true;
                break;
            };
            let q_i = gram.q_row(i);
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut obj_min = f64::INFINITY;
            for t in 0..n {
                let (grad_diff, quad) = if y[t] > 0.0 {
                    if is_lower(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(grad[t]);
                    (gmax + grad[t], qd[i] + qd[t] - 2.0 * y[i] * q_i[t])
                } else {
                    if is_upper(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(-grad[t]);
                    (gmax - grad[t], qd[i] + qd[t] + 2.0 * y[i] * q_i[t])
                };
                if grad_diff > 0.0 {
                    let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
            let j = match j_sel {
                Some(j) if gmax + gmax2 >= params.tol => j,
                _ => {
                    converged = true;
                    break;
                }
            };
            iterations += 1;

            let q_j = gram.q_row(j);
            let (old_i, old_j) = (alpha[i], alpha[j]);
            if y[i] != y[j] {
                let quad = (qd[i] + qd[j] + 2.0 * q_i[j]).max(TAU);
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
                let quad = (qd[i] + qd[j] - 2.0 * q_i[j]).max(TAU);
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
                grad[t] += q_i[t] * di + q_j[t] * dj;
            }
        }
        if !converged {
            log::warn!("SVM solver hit max_iter={} before reaching tol={}", params.max_iter, params.tol);
        }

        // Bias from free support vectors, or the midpoint of the feasible
        // interval when none are free.
        let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if is_upper(alpha[t]) {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if is_lower(alpha[t]) {
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

        let support: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
        let decision = match params.kernel {
            Kernel::Linear => {
                let mut weights = vec![0.0; data.dim];
                for &t in &support {
                    for (j, v) in data.x[t].iter() {
                        weights[j] += alpha[t] * y[t] * v;
                    }
                }
                DecisionFunction::Primal { weights }
            }
            Kernel::Rbf => DecisionFunction::Kernel {
                support: support.iter().map(|&t| data.x[t].clone()).collect(),
                coef: support.iter().map(|&t| alpha[t] * y[t]).collect(),
                gamma,
            },
        };
        Ok(SvmModel {
            decision,
            rho,
            gamma_used: gamma,
            converged,
            iterations,
            n_support: support.len(),
        })
    }

    /// Signed distance-like decision value; positive means explanation need.
    pub fn decision(&self, x: &SparseVector) -> f64 {
        let raw = match &self.decision {
            DecisionFunction::Primal { weights } => x.dot_dense(weights),
            DecisionFunction::Kernel { support, coef, gamma } => support
                .iter()
                .zip(coef)
                .map(|(s, a)| a * (-gamma * s.squared_distance_exact(x)).exp())
                .sum(),
        };
        raw - self.rho
    }

    pub fn score(&self, x: &SparseVector) -> f64 {
        sigmoid(self.decision(x))
    }
}
