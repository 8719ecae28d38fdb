//! Deterministic full-batch proximal gradient with backtracking.
//!
//! Minimizes `f(x) + lambda * sum_{i in penalized} |x_i|` for a smooth `f`.
//! Steps start from the Barzilai-Borwein estimate and are halved until the
//! quadratic upper bound holds at the proximal point, so the penalized
//! objective never increases between iterations.

use std::ops::Range;

use super::SolverConfig;
use crate::error::{Error, Result};

pub trait Smooth {
    fn dim(&self) -> usize;
    /// Objective value; fills `grad` with its gradient.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
    fn value(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone)]
pub struct ProxResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Penalized objective after each accepted step (index 0 = start).
    pub trace: Vec<f64>,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn minimize<F: Smooth>(
    f: &F,
    x0: Vec<f64>,
    penalized: Range<usize>,
    lambda: f64,
    cfg: &SolverConfig,
    what: &'static str,
) -> Result<ProxResult> {
    let n = f.dim();
    assert_eq!(x0.len(), n);
    let penalty = |x: &[f64]| lambda * x[penalized.clone()].iter().map(|v| v.abs()).sum::<f64>();

    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut fx = f.value_grad(&x, &mut grad);
    if !fx.is_finite() {
        return Err(Error::InvalidInput(format!("{what}: non-finite objective at start")));
    }
    let mut trace = vec![fx + penalty(&x)];
    let mut step = 1.0;
    let mut z = vec![0.0; n];
    let mut grad_z = vec![0.0; n];

    for iter in 1..=cfg.max_iter {
        let mut fz;
        loop {
            for i in 0..n {
                let v = x[i] - step * grad[i];
                z[i] = if penalized.contains(&i) {
                    soft_threshold(v, step * lambda)
                } else {
                    v
                };
            }
            fz = f.value(&z);
            let diff: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
            let bound = fx + dot(&grad, &diff) + dot(&diff, &diff) / (2.0 * step);
            if fz <= bound {
                break;
            }
            step *= 0.5;
            if step < 1e-30 {
                return Err(Error::NonConvergence {
                    what,
                    iterations: iter,
                });
            }
        }

        let mapping_norm = z
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / step;

        let fz_check = f.value_grad(&z, &mut grad_z);
        debug_assert!((fz_check - fz).abs() <= 1e-9 * (1.0 + fz.abs()));
        let s: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_z.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let ss = dot(&s, &s);

        std::mem::swap(&mut x, &mut z);
        std::mem::swap(&mut grad, &mut grad_z);
        fx = fz_check;
        trace.push(fx + penalty(&x));

        if mapping_norm < cfg.tol {
            return Ok(ProxResult {
                x,
                iterations: iter,
                trace,
            });
        }
        step = if sy > 0.0 && ss > 0.0 {
            (ss / sy).clamp(1e-10, 1e10)
        } else {
            (step * 2.0).min(1e10)
        };
    }
    Err(Error::NonConvergence {
        what,
        iterations: cfg.max_iter,
    })
}
