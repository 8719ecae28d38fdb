//! Binary and proportional-odds ordinal logistic regression with an L1
//! penalty on the feature weights.
//!
//! Both objectives are the mean negative log-likelihood. The ordinal model
//! shares one weight vector across all cumulative splits,
//! `P(level <= k) = sigmoid(theta_k - x.w)`, with cutpoints parameterized as
//! `theta_0 = a`, `theta_k = theta_{k-1} + exp(d_k)` so they stay strictly
//! increasing.

use super::prox::{self, Smooth};
use super::{cv, DesignMatrix, FitConfig, FitDiagnostics, ModelKind, RegressionModel, SolverConfig};
use crate::error::{Error, Result};

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-6, 1.0 - 1e-6);
    (p / (1.0 - p)).ln()
}

/// Parameters: `[intercept, w_1..w_p]`.
pub struct BinaryObjective<'a> {
    x: &'a DesignMatrix,
    y: Vec<f64>,
}

impl<'a> BinaryObjective<'a> {
    pub fn new(x: &'a DesignMatrix) -> Self {
        BinaryObjective {
            y: x.binary_target(),
            x,
        }
    }

    fn eta(&self, params: &[f64], i: usize) -> f64 {
        params[0] + self.x.row(i).iter().zip(&params[1..]).map(|(a, b)| a * b).sum::<f64>()
    }
}

impl Smooth for BinaryObjective<'_> {
    fn dim(&self) -> usize {
        self.x.n_cols() + 1
    }

    fn value_grad(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let n = self.x.n_rows() as f64;
        let mut total = 0.0;
        for i in 0..self.x.n_rows() {
            let eta = self.eta(params, i);
            total += softplus(eta) - self.y[i] * eta;
            let r = sigmoid(eta) - self.y[i];
            grad[0] += r;
            for (g, xv) in grad[1..].iter_mut().zip(self.x.row(i)) {
                *g += r * xv;
            }
        }
        grad.iter_mut().for_each(|g| *g /= n);
        total / n
    }

    fn value(&self, params: &[f64]) -> f64 {
        let n = self.x.n_rows() as f64;
        (0..self.x.n_rows())
            .map(|i| {
                let eta = self.eta(params, i);
                softplus(eta) - self.y[i] * eta
            })
            .sum::<f64>()
            / n
    }
}

/// Parameters: `[a, d_1..d_{K-2}, w_1..w_p]` for `K` levels.
pub struct OrdinalObjective<'a> {
    x: &'a DesignMatrix,
    levels: Vec<usize>,
    k: usize,
}

impl<'a> OrdinalObjective<'a> {
    pub fn new(x: &'a DesignMatrix) -> Self {
        let (levels, k) = x.ordinal_target();
        OrdinalObjective { x, levels, k }
    }

    pub fn levels(&self) -> usize {
        self.k
    }

    fn n_cut(&self) -> usize {
        self.k - 1
    }

    pub fn cutpoints(&self, params: &[f64]) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.n_cut());
        theta.push(params[0]);
        for j in 1..self.n_cut() {
            let prev = theta[j - 1];
            theta.push(prev + params[j].exp());
        }
        theta
    }

    /// Log-likelihood of one row and its derivatives with respect to the
    /// upper and lower cutpoint differences `u = theta_y - eta`, `l = theta_{y-1} - eta`.
    fn row_terms(&self, theta: &[f64], level: usize, eta: f64) -> (f64, f64, f64) {
        let top = self.k - 1;
        if level == 0 {
            let u = theta[0] - eta;
            (-softplus(-u), sigmoid(-u), 0.0)
        } else if level == top {
            let l = theta[top - 1] - eta;
            (-softplus(l), 0.0, -sigmoid(l))
        } else {
            let u = theta[level] - eta;
            let l = theta[level - 1] - eta;
            let gap = (u - l).exp_m1();
            let ll = -softplus(-u) - softplus(l) + (-(l - u).exp_m1()).ln();
            (ll, sigmoid(-u) + 1.0 / gap, -sigmoid(l) - 1.0 / gap)
        }
    }

    /// Starting point: zero weights and cutpoints at the empirical cumulative logits.
    pub fn initial(&self) -> Vec<f64> {
        let n = self.levels.len() as f64;
        let mut counts = vec![0usize; self.k];
        for &l in &self.levels {
            counts[l] += 1;
        }
        let mut cum = 0usize;
        let mut theta = Vec::new();
        for c in &counts[..self.n_cut()] {
            cum += c;
            theta.push(logit(cum as f64 / n));
        }
        let mut params = vec![theta[0]];
        for j in 1..theta.len() {
            params.push((theta[j] - theta[j - 1]).max(1e-3).ln());
        }
        params.extend(std::iter::repeat_n(0.0, self.x.n_cols()));
        params
    }
}

impl Smooth for OrdinalObjective<'_> {
    fn dim(&self) -> usize {
        self.n_cut() + self.x.n_cols()
    }

    fn value_grad(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let nc = self.n_cut();
        let theta = self.cutpoints(params);
        let w = &params[nc..];
        let mut g_theta = vec![0.0; nc];
        let mut total = 0.0;
        for i in 0..self.x.n_rows() {
            let row = self.x.row(i);
            let eta: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
            let level = self.levels[i];
            let (ll, du, dl) = self.row_terms(&theta, level, eta);
            total -= ll;
            if level < nc {
                g_theta[level] -= du;
            }
            if level > 0 {
                g_theta[level - 1] -= dl;
            }
            let g_eta = du + dl;
            for (g, xv) in grad[nc..].iter_mut().zip(row) {
                *g += g_eta * xv;
            }
        }
        // Chain rule through the cutpoint parameterization.
        let mut tail = 0.0;
        for j in (0..nc).rev() {
            tail += g_theta[j];
            if j > 0 {
                grad[j] = tail * params[j].exp();
            } else {
                grad[0] = tail;
            }
        }
        let n = self.x.n_rows() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        total / n
    }

    fn value(&self, params: &[f64]) -> f64 {
        let nc = self.n_cut();
        let theta = self.cutpoints(params);
        let w = &params[nc..];
        let total: f64 = (0..self.x.n_rows())
            .map(|i| {
                let eta: f64 = self.x.row(i).iter().zip(w).map(|(a, b)| a * b).sum();
                -self.row_terms(&theta, self.levels[i], eta).0
            })
            .sum();
        total / self.x.n_rows() as f64
    }
}

/// Binary fit at a fixed penalty.
pub fn fit_binary(x: &DesignMatrix, lambda: f64, solver: &SolverConfig) -> Result<RegressionModel> {
    x.validate()?;
    let y = x.binary_target();
    let positives = y.iter().filter(|v| **v == 1.0).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::InvalidInput("binary target has a single class".into()));
    }
    let obj = BinaryObjective::new(x);
    let mut x0 = vec![0.0; obj.dim()];
    x0[0] = logit(positives as f64 / y.len() as f64);
    let res = prox::minimize(&obj, x0, 1..obj.dim(), lambda, solver, "binary logistic regression")?;
    Ok(RegressionModel {
        kind: ModelKind::Binary,
        columns: x.columns.clone(),
        weights: res.x[1..].to_vec(),
        intercepts: vec![res.x[0]],
        diagnostics: FitDiagnostics {
            log_likelihood: -obj.value(&res.x) * x.n_rows() as f64,
            iterations: res.iterations,
            lambda,
            cv_score: None,
        },
    })
}

/// Ordinal fit at a fixed penalty. Falls back to the binary model when the
/// target has fewer than three levels.
pub fn fit_ordinal(x: &DesignMatrix, lambda: f64, solver: &SolverConfig) -> Result<RegressionModel> {
    x.validate()?;
    let obj = OrdinalObjective::new(x);
    if obj.levels() < 3 {
        log::warn!("ordinal target has {} levels; fitting binary model instead", obj.levels());
        return fit_binary(x, lambda, solver);
    }
    let nc = obj.n_cut();
    let res = prox::minimize(&obj, obj.initial(), nc..obj.dim(), lambda, solver, "ordinal logistic regression")?;
    Ok(RegressionModel {
        kind: ModelKind::Ordinal,
        columns: x.columns.clone(),
        weights: res.x[nc..].to_vec(),
        intercepts: obj.cutpoints(&res.x),
        diagnostics: FitDiagnostics {
            log_likelihood: -obj.value(&res.x) * x.n_rows() as f64,
            iterations: res.iterations,
            lambda,
            cv_score: None,
        },
    })
}

/// Binary model with the penalty chosen by k-fold CV accuracy.
pub fn fit_binary_logit(x: &DesignMatrix, cfg: &FitConfig) -> Result<RegressionModel> {
    cv::fit_with_cv(x, cv::Family::Binary, cfg)
}

/// Ordinal model with the penalty chosen by k-fold CV NDCG.
pub fn fit_ordinal_logit(x: &DesignMatrix, cfg: &FitConfig) -> Result<RegressionModel> {
    cv::fit_with_cv(x, cv::Family::Ordinal, cfg)
}

/// Probability that the row's team wins under a binary model.
pub fn predict_win(model: &RegressionModel, row: &[f64]) -> f64 {
    sigmoid(model.intercepts[0] + model.linear_predictor(row))
}
