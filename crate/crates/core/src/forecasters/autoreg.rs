//! Autoregression fitted by ordinary least squares on lagged values.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::linalg::least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArOrder {
    pub p: usize,
}

impl ArOrder {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(contract("AR order must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArParams {
    pub intercept: f64,
    /// `coefs[i]` multiplies the value `i + 1` steps back.
    pub coefs: Vec<f64>,
}

impl ArParams {
    /// One-step prediction from `history`, whose last element is the most
    /// recent value.
    pub fn predict_next(&self, history: &[f64]) -> f64 {
        let n = history.len();
        self.intercept
            + self
                .coefs
                .iter()
                .enumerate()
                .map(|(i, phi)| phi * history[n - 1 - i])
                .sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct ArFit {
    pub params: ArParams,
    /// One-step fitted values for `values[p..]`.
    pub fitted: Vec<f64>,
}

/// Lag design `[1, y_{t-1}, ..., y_{t-p}]` for `t = p..n`, row-major.
pub(crate) fn lag_design(values: &[f64], p: usize) -> Vec<f64> {
    let rows = values.len() - p;
    let mut design = Vec::with_capacity(rows * (p + 1));
    for t in p..values.len() {
        design.push(1.0);
        for i in 1..=p {
            design.push(values[t - i]);
        }
    }
    design
}

pub fn fit_autoreg(values: &[f64], order: ArOrder) -> Result<ArFit> {
    order.validate()?;
    let p = order.p;
    if values.len() <= p + 1 {
        return Err(contract(format!(
            "AR({p}) needs more than {} values, got {}",
            p + 1,
            values.len()
        )));
    }
    let design = lag_design(values, p);
    let beta = least_squares(&design, values.len() - p, p + 1, &values[p..])?;
    let params = ArParams {
        intercept: beta[0],
        coefs: beta[1..].to_vec(),
    };
    let fitted = (p..values.len())
        .map(|t| params.predict_next(&values[..t]))
        .collect();
    Ok(ArFit { params, fitted })
}

/// Sum of squared one-step residuals over `t = p..n`.
pub fn sum_of_squares(params: &ArParams, values: &[f64]) -> f64 {
    let p = params.coefs.len();
    (p..values.len())
        .map(|t| {
            let e = values[t] - params.predict_next(&values[..t]);
            e * e
        })
        .sum()
}

/// Recursive forecast; forecasts feed back as lagged inputs.
pub fn forecast_autoreg(params: &ArParams, tail: &[f64], horizon: usize) -> Vec<f64> {
    let p = params.coefs.len();
    let mut history: Vec<f64> = tail[tail.len().saturating_sub(p)..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next = params.predict_next(&history);
        history.push(next);
        out.push(next);
    }
    out
}
