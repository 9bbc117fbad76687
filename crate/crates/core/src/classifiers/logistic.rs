//! L2-regularized logistic regression trained by truncated Newton (Hessian
//! products with conjugate gradient, Armijo backtracking).
//!
//! Objective with labels `y ∈ {-1, +1}`:
//! `½‖w‖² [+ ½b²] + C Σ log(1 + exp(−y (w·x + b)))`.
//! `newton-cg` leaves the intercept unpenalized; `liblinear` penalizes it
//! like an ordinary weight on a constant feature.

use serde::{Deserialize, Serialize};

use super::params::{HyperMap, ParamReader};
use super::{sigmoid, Algorithm, Dataset};
use crate::error::Result;
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogisticSolver {
    NewtonCg,
    Liblinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Inverse regularization strength.
    pub c: f64,
    pub solver: LogisticSolver,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            solver: LogisticSolver::NewtonCg,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

impl LogisticParams {
    pub(crate) fn from_map(map: &HyperMap) -> Result<Self> {
        let d = Self::default();
        let mut r = ParamReader::new(Algorithm::LogisticRegression, map);
        let p = LogisticParams {
            c: r.positive_f64_or("C", d.c)?,
            solver: match r.choice_or("solver", &["newton-cg", "liblinear"], "newton-cg")? {
                "liblinear" => LogisticSolver::Liblinear,
                _ => LogisticSolver::NewtonCg,
            },
            max_iter: r.positive_usize_or("max_iter", d.max_iter)?,
            tol: r.positive_f64_or("tol", d.tol)?,
        };
        r.finish()?;
        Ok(p)
    }

    pub(crate) fn to_map(self) -> HyperMap {
        let solver = match self.solver {
            LogisticSolver::NewtonCg => "newton-cg",
            LogisticSolver::Liblinear => "liblinear",
        };
        HyperMap::from([
            ("C".into(), self.c.into()),
            ("solver".into(), solver.into()),
            ("max_iter".into(), (self.max_iter as i64).into()),
            ("tol".into(), self.tol.into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    weights: Vec<f64>,
    intercept: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Problem<'a> {
    data: &'a Dataset<'a>,
    c: f64,
    penalize_intercept: bool,
}

impl Problem<'_> {
    fn sign(&self, i: usize) -> f64 {
        if self.data.y[i] {
            1.0
        } else {
            -1.0
        }
    }

    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.data.x.iter().map(|x| x.dot_dense(w) + b).collect()
    }

    fn objective(&self, w: &[f64], b: f64) -> f64 {
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>()
            + if self.penalize_intercept { 0.5 * b * b } else { 0.0 };
        let loss: f64 = self
            .margins(w, b)
            .iter()
            .enumerate()
            .map(|(i, z)| log1p_exp(-self.sign(i) * z))
            .sum();
        reg + self.c * loss
    }

    /// Gradient and per-sample Hessian weights `σ(z)(1 − σ(z))`.
    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64, Vec<f64>) {
        let mut gw = w.to_vec();
        let mut gb = if self.penalize_intercept { b } else { 0.0 };
        let z = self.margins(w, b);
        let mut curvature = Vec::with_capacity(z.len());
        for (i, x) in self.data.x.iter().enumerate() {
            let y = self.sign(i);
            let coef = -self.c * y * sigmoid(-y * z[i]);
            for (j, v) in x.iter() {
                gw[j] += coef * v;
            }
            gb += coef;
            let s = sigmoid(z[i]);
            curvature.push(s * (1.0 - s));
        }
        (gw, gb, curvature)
    }

    fn hessian_product(&self, curvature: &[f64], vw: &[f64], vb: f64) -> (Vec<f64>, f64) {
        let mut hw = vw.to_vec();
        let mut hb = if self.penalize_intercept { vb } else { 0.0 };
        for (i, x) in self.data.x.iter().enumerate() {
            let t = self.c * curvature[i] * (x.dot_dense(vw) + vb);
            for (j, v) in x.iter() {
                hw[j] += t * v;
            }
            hb += t;
        }
        (hw, hb)
    }
}

fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogisticModel {
    pub(crate) fn fit(params: &LogisticParams, data: &Dataset<'_>) -> Result<Self> {
        let problem = Problem {
            data,
            c: params.c,
            penalize_intercept: params.solver == LogisticSolver::Liblinear,
        };
        let dim = data.dim;
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        let mut f = problem.objective(&w, b);
        let (mut gw, mut gb, mut curv) = problem.gradient(&w, b);
        let g0 = (dot(&gw, &gw) + gb * gb).sqrt();
        let mut converged = g0 == 0.0;
        let mut iterations = 0;

        while !converged && iterations < params.max_iter {
            iterations += 1;
            // Conjugate gradient on H p = -g.
            let gnorm = (dot(&gw, &gw) + gb * gb).sqrt();
            let cg_tol = (0.5f64).min(gnorm.sqrt()) * gnorm;
            let (mut pw, mut pb) = (vec![0.0; dim], 0.0);
            let (mut rw, mut rb): (Vec<f64>, f64) = (gw.iter().map(|g| -g).collect(), -gb);
            let (mut dw, mut db) = (rw.clone(), rb);
            let mut rr = dot(&rw, &rw) + rb * rb;
            for _ in 0..(dim + 1).min(200) {
                if rr.sqrt() <= cg_tol {
                    break;
                }
                let (hw, hb) = problem.hessian_product(&curv, &dw, db);
                let dhd = dot(&dw, &hw) + db * hb;
                if dhd <= 0.0 {
                    break;
                }
                let step = rr / dhd;
                for j in 0..dim {
                    pw[j] += step * dw[j];
                    rw[j] -= step * hw[j];
                }
                pb += step * db;
                rb -= step * hb;
                let rr_new = dot(&rw, &rw) + rb * rb;
                let beta = rr_new / rr;
                for j in 0..dim {
                    dw[j] = rw[j] + beta * dw[j];
                }
                db = rb + beta * db;
                rr = rr_new;
            }
            if dot(&pw, &pw) + pb * pb == 0.0 {
                pw = gw.iter().map(|g| -g).collect();
                pb = -gb;
            }

            // Armijo backtracking.
            let slope = dot(&gw, &pw) + gb * pb;
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let wn: Vec<f64> = w.iter().zip(&pw).map(|(a, p)| a + step * p).collect();
                let bn = b + step * pb;
                let fn_ = problem.objective(&wn, bn);
                if fn_ <= f + 1e-4 * step * slope {
                    w = wn;
                    b = bn;
                    f = fn_;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            (gw, gb, curv) = problem.gradient(&w, b);
            let gnorm = (dot(&gw, &gw) + gb * gb).sqrt();
            if gnorm <= params.tol * g0.max(1.0) || !accepted {
                converged = accepted;
                break;
            }
        }
        if !converged {
            log::warn!("logistic regression stopped after {iterations} iterations without converging");
        }
        Ok(LogisticModel {
            weights: w,
            intercept: b,
            converged,
            iterations,
        })
    }

    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.intercept
    }

    pub fn score(&self, x: &SparseVector) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }
}
