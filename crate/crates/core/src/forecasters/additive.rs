//! Decomposable trend plus seasonality model.
//!
//! `y(t) = a + b t + sum_j delta_j max(0, t - c_j) + sum_k (u_k cos(2 pi k t / P) + v_k sin(2 pi k t / P))`
//!
//! Time is the day index within the training window. The hinge slopes
//! `delta_j` carry a ridge penalty so the trend only bends where the data
//! insist on it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::linalg::ridge_least_squares;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveConfig {
    pub n_changepoints: usize,
    pub changepoint_penalty: f64,
    pub fourier_order: usize,
    #[serde(default = "default_period")]
    pub period_days: f64,
}

fn default_period() -> f64 {
    7.0
}

impl Default for AdditiveConfig {
    fn default() -> Self {
        AdditiveConfig {
            n_changepoints: 10,
            changepoint_penalty: 1.0,
            fourier_order: 2,
            period_days: default_period(),
        }
    }
}

impl AdditiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.changepoint_penalty >= 0.0 && self.changepoint_penalty.is_finite()) {
            return Err(contract("changepoint penalty must be non-negative"));
        }
        if !(self.period_days > 0.0 && self.period_days.is_finite()) {
            return Err(contract("seasonal period must be positive"));
        }
        Ok(())
    }

    pub fn columns(&self) -> usize {
        2 + self.n_changepoints + 2 * self.fourier_order
    }
}

/// Changepoints at the `j / (k + 1)` fractions of `n` training days.
pub fn changepoints(n: usize, k: usize) -> Result<Vec<f64>> {
    let cps: Vec<f64> = (1..=k).map(|j| j as f64 * n as f64 / (k + 1) as f64).collect();
    if let Some(&last) = cps.last() {
        if n < 2 || last >= (n - 1) as f64 {
            return Err(contract(format!(
                "{k} changepoints do not fit strictly inside {n} training days"
            )));
        }
    }
    Ok(cps)
}

/// Row-major design with columns `[1, t, hinges..., cos_1, sin_1, ...]`.
pub fn build_additive_design(
    times: &[f64],
    changepoints: &[f64],
    fourier_order: usize,
    period_days: f64,
) -> Vec<f64> {
    let cols = 2 + changepoints.len() + 2 * fourier_order;
    let mut design = Vec::with_capacity(times.len() * cols);
    for &t in times {
        design.push(1.0);
        design.push(t);
        design.extend(changepoints.iter().map(|c| (t - c).max(0.0)));
        for k in 1..=fourier_order {
            let angle = 2.0 * PI * k as f64 * t / period_days;
            design.push(libm::cos(angle));
            design.push(libm::sin(angle));
        }
    }
    design
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveParams {
    pub coefs: Vec<f64>,
    pub changepoints: Vec<f64>,
    pub fourier_order: usize,
    pub period_days: f64,
    /// Number of training days; forecasts start at `t = n_train`.
    pub n_train: usize,
}

impl AdditiveParams {
    pub fn intercept(&self) -> f64 {
        self.coefs[0]
    }

    pub fn slope(&self) -> f64 {
        self.coefs[1]
    }

    pub fn hinge_coefs(&self) -> &[f64] {
        &self.coefs[2..2 + self.changepoints.len()]
    }

    pub fn seasonal_coefs(&self) -> &[f64] {
        &self.coefs[2 + self.changepoints.len()..]
    }

    pub fn evaluate(&self, times: &[f64]) -> Vec<f64> {
        let design = build_additive_design(times, &self.changepoints, self.fourier_order, self.period_days);
        design
            .chunks(self.coefs.len())
            .map(|row| row.iter().zip(&self.coefs).map(|(x, b)| x * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct AdditiveFit {
    pub params: AdditiveParams,
    /// In-sample fitted values for every training day.
    pub fitted: Vec<f64>,
}

pub fn fit_additive(values: &[f64], config: &AdditiveConfig) -> Result<AdditiveFit> {
    config.validate()?;
    let n = values.len();
    let cps = changepoints(n, config.n_changepoints)?;
    let times: Vec<f64> = (0..n).map(|t| t as f64).collect();
    let design = build_additive_design(&times, &cps, config.fourier_order, config.period_days);
    let cols = config.columns();
    let mut penalty = vec![0.0; cols];
    penalty[2..2 + cps.len()].fill(config.changepoint_penalty);
    let coefs = ridge_least_squares(&design, n, cols, values, Some(&penalty))?;
    let params = AdditiveParams {
        coefs,
        changepoints: cps,
        fourier_order: config.fourier_order,
        period_days: config.period_days,
        n_train: n,
    };
    let fitted = params.evaluate(&times);
    Ok(AdditiveFit { params, fitted })
}

/// Evaluates the model on the `horizon` days after training, continuing the
/// final trend segment.
pub fn forecast_additive(params: &AdditiveParams, horizon: usize) -> Vec<f64> {
    let times: Vec<f64> = (params.n_train..params.n_train + horizon)
        .map(|t| t as f64)
        .collect();
    params.evaluate(&times)
}
