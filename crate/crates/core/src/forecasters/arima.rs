//! ARIMA(p, d, q) by conditional sum of squares.
//!
//! The series is differenced `d` times. On the differenced values `y` the
//! one-step residuals are
//!
//! ```text
//! e_t = y_t - c - sum_i phi_i y_{t-i} - sum_j theta_j e_{t-j},   t = p..n
//! ```
//!
//! with residuals before `t = p` fixed at zero. Estimation starts from a
//! Hannan-Rissanen regression and refines with Levenberg-Marquardt using the
//! exact recursive Jacobian.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::autoreg::{fit_autoreg, ArOrder};
use super::{fit, FittedModel, ForecasterSpec, Hyperparameters};
use crate::data::Series;
use crate::error::{contract, Error, Result};
use crate::linalg::{companion_moduli, least_squares, solve_square};
use crate::metrics::{mse, ScorePair};
use crate::transform::{difference_values, integrate_forecast, DifferenceState};

const MAX_ITERATIONS: usize = 200;
const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        ArimaOrder { p, d, q }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 && self.p + self.q == 0 {
            return Err(contract("ARIMA(0,0,0) is an empty model"));
        }
        Ok(())
    }

    fn complexity(&self) -> usize {
        self.p + self.d + self.q
    }
}

/// `(c, phi_1..phi_p, theta_1..theta_q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaCoefficients {
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
}

impl ArmaCoefficients {
    fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.ar.len() + self.ma.len());
        v.push(self.intercept);
        v.extend_from_slice(&self.ar);
        v.extend_from_slice(&self.ma);
        v
    }

    fn from_slice(beta: &[f64], p: usize) -> Self {
        ArmaCoefficients {
            intercept: beta[0],
            ar: beta[1..1 + p].to_vec(),
            ma: beta[1 + p..].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaParams {
    pub coefficients: ArmaCoefficients,
    /// Last `p` differenced training values, oldest first.
    pub recent_values: Vec<f64>,
    /// Last `q` training residuals, oldest first.
    pub recent_residuals: Vec<f64>,
}

/// Conditional residuals on the differenced scale; the first `p` are zero.
pub fn css_residuals(coef: &ArmaCoefficients, diffed: &[f64]) -> Vec<f64> {
    let p = coef.ar.len();
    let mut e = vec![0.0; diffed.len()];
    for t in p..diffed.len() {
        // summed in ArParams::predict_next order
        let ar: f64 = coef
            .ar
            .iter()
            .enumerate()
            .map(|(i, phi)| phi * diffed[t - 1 - i])
            .sum();
        let ma: f64 = coef
            .ma
            .iter()
            .enumerate()
            .filter(|(j, _)| t > *j)
            .map(|(j, theta)| theta * e[t - 1 - j])
            .sum();
        e[t] = diffed[t] - (coef.intercept + ar + ma);
    }
    e
}

/// Conditional sum of squares over `t = p..n`.
pub fn arima_css_objective(coef: &ArmaCoefficients, diffed: &[f64]) -> f64 {
    let p = coef.ar.len();
    css_residuals(coef, diffed)[p.min(diffed.len())..]
        .iter()
        .map(|e| e * e)
        .sum()
}

/// Residuals plus their Jacobian (rows `t = p..n`, row-major) with respect
/// to `(c, phi, theta)`.
fn css_jacobian(coef: &ArmaCoefficients, diffed: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = coef.ar.len();
    let q = coef.ma.len();
    let k = 1 + p + q;
    let n = diffed.len();
    let e = css_residuals(coef, diffed);
    // de[t * k + m]; zero for t < p
    let mut de = vec![0.0; n * k];
    for t in p..n {
        let mut row = vec![0.0; k];
        row[0] = -1.0;
        for i in 0..p {
            row[1 + i] = -diffed[t - 1 - i];
        }
        for j in 0..q {
            if t > j {
                row[1 + p + j] = -e[t - 1 - j];
            }
        }
        for (j, theta) in coef.ma.iter().enumerate() {
            if t > j {
                let prev = &de[(t - 1 - j) * k..(t - j) * k];
                for m in 0..k {
                    row[m] -= theta * prev[m];
                }
            }
        }
        de[t * k..(t + 1) * k].copy_from_slice(&row);
    }
    (e[p..].to_vec(), de[p * k..].to_vec())
}

/// Two-stage initial estimate: a long autoregression supplies residual
/// proxies, then `y_t` is regressed on its own lags and lagged proxies.
pub fn hannan_rissanen(diffed: &[f64], p: usize, q: usize) -> Result<ArmaCoefficients> {
    let n = diffed.len();
    if q == 0 {
        if p == 0 {
            let mean = diffed.iter().sum::<f64>() / n as f64;
            return Ok(ArmaCoefficients {
                intercept: mean,
                ar: Vec::new(),
                ma: Vec::new(),
            });
        }
        let fit = fit_autoreg(diffed, ArOrder { p })?;
        return Ok(ArmaCoefficients {
            intercept: fit.params.intercept,
            ar: fit.params.coefs,
            ma: Vec::new(),
        });
    }

    let log_order = libm::ceil(10.0 * libm::log10(n as f64)) as usize;
    let long = log_order.max(p + q + 1).min((n.saturating_sub(1)) / 4).max(1);
    let long_fit = fit_autoreg(diffed, ArOrder { p: long })?;
    let mut proxy = vec![0.0; n];
    for t in long..n {
        proxy[t] = diffed[t] - long_fit.fitted[t - long];
    }

    let start = p.max(long + q);
    let cols = 1 + p + q;
    if n <= start + cols {
        return Err(Error::SingularFit(
            "series too short for the Hannan-Rissanen regression".into(),
        ));
    }
    let mut design = Vec::with_capacity((n - start) * cols);
    for t in start..n {
        design.push(1.0);
        for i in 1..=p {
            design.push(diffed[t - i]);
        }
        for j in 1..=q {
            design.push(proxy[t - j]);
        }
    }
    let beta = least_squares(&design, n - start, cols, &diffed[start..])?;
    Ok(ArmaCoefficients::from_slice(&beta, p))
}

/// Outcome of a Levenberg-Marquardt refinement.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub coefficients: ArmaCoefficients,
    pub initial_objective: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Minimises the CSS objective from `start` by damped Gauss-Newton steps.
/// Only improving steps are accepted, so the objective never increases.
pub fn refine_css(start: ArmaCoefficients, diffed: &[f64]) -> Result<Refinement> {
    let p = start.ar.len();
    let mut beta = start.to_vec();
    let k = beta.len();
    let mut current = ArmaCoefficients::from_slice(&beta, p);
    let initial = arima_css_objective(&current, diffed);
    if !initial.is_finite() {
        return Err(Error::Divergence("initial CSS objective is not finite".into()));
    }
    let mut objective = initial;
    let mut damping = 1e-3;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS && objective > 0.0 {
        iterations += 1;
        let (resid, jac) = css_jacobian(&current, diffed);
        let rows = resid.len();
        let mut jtj = vec![0.0; k * k];
        let mut jte = vec![0.0; k];
        for r in 0..rows {
            let row = &jac[r * k..(r + 1) * k];
            for a in 0..k {
                jte[a] += row[a] * resid[r];
                for b in a..k {
                    jtj[a * k + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                jtj[a * k + b] = jtj[b * k + a];
            }
        }
        if jtj.iter().chain(&jte).any(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!(
                "non-finite Jacobian at iteration {iterations}"
            )));
        }
        let scale = (0..k).map(|a| jtj[a * k + a]).fold(0.0, f64::max).max(1e-300);

        let mut accepted = None;
        while damping < 1e16 {
            let mut system = jtj.clone();
            for a in 0..k {
                system[a * k + a] += damping * (jtj[a * k + a] + 1e-12 * scale);
            }
            let rhs: Vec<f64> = jte.iter().map(|g| -g).collect();
            if let Some(step) = solve_square(&system, k, &rhs) {
                let candidate: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + s).collect();
                let coef = ArmaCoefficients::from_slice(&candidate, p);
                let value = arima_css_objective(&coef, diffed);
                if value.is_finite() && value <= objective {
                    accepted = Some((candidate, coef, value));
                    break;
                }
            }
            damping *= 10.0;
        }

        let Some((candidate, coef, value)) = accepted else {
            break;
        };
        let change = (objective - value) / objective;
        beta = candidate;
        current = coef;
        objective = value;
        damping = (damping / 10.0).max(1e-12);
        if change < RELATIVE_TOLERANCE {
            break;
        }
    }

    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence("non-finite ARMA coefficients".into()));
    }
    Ok(Refinement {
        coefficients: current,
        initial_objective: initial,
        objective,
        iterations,
    })
}

#[derive(Debug, Clone)]
pub struct ArimaFit {
    pub params: ArimaParams,
    pub diff_state: DifferenceState,
    /// One-step fitted levels for `values[fitted_offset..]`.
    pub fitted: Vec<f64>,
    pub fitted_offset: usize,
    pub initial_objective: f64,
    pub objective: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

pub fn fit_arima(values: &[f64], order: ArimaOrder) -> Result<ArimaFit> {
    order.validate()?;
    let ArimaOrder { p, d, q } = order;
    let (diffed, diff_state) = difference_values(values, d)?;
    if diffed.len() <= p + q + 1 {
        return Err(contract(format!(
            "ARIMA({p},{d},{q}) needs more than {} differenced values, got {}",
            p + q + 1,
            diffed.len()
        )));
    }

    let start = match hannan_rissanen(&diffed, p, q) {
        Ok(c) if arima_css_objective(&c, &diffed).is_finite() => c,
        _ => {
            // pure-AR start with the MA part switched off
            let mut c = hannan_rissanen(&diffed, p, 0)?;
            c.ma = vec![0.0; q];
            c
        }
    };
    let refined = refine_css(start, &diffed)?;
    let coefficients = refined.coefficients;

    let mut warnings = Vec::new();
    if companion_moduli(&coefficients.ar).iter().any(|m| *m >= 1.0) {
        warnings.push("AR polynomial has a root on or inside the unit circle (non-stationary)".to_string());
    }
    let neg_ma: Vec<f64> = coefficients.ma.iter().map(|t| -t).collect();
    if companion_moduli(&neg_ma).iter().any(|m| *m >= 1.0) {
        warnings.push("MA polynomial has a root on or inside the unit circle (non-invertible)".to_string());
    }

    let resid = css_residuals(&coefficients, &diffed);
    let fitted = (p..diffed.len())
        .map(|t| values[t + d] - resid[t])
        .collect();
    let params = ArimaParams {
        recent_values: diffed[diffed.len() - p..].to_vec(),
        recent_residuals: resid[resid.len() - q..].to_vec(),
        coefficients,
    };
    Ok(ArimaFit {
        params,
        diff_state,
        fitted,
        fitted_offset: p + d,
        initial_objective: refined.initial_objective,
        objective: refined.objective,
        iterations: refined.iterations,
        warnings,
    })
}

/// ARMA recursion with future shocks at zero, integrated back to levels.
pub fn forecast_arima(params: &ArimaParams, state: &DifferenceState, horizon: usize) -> Result<Vec<f64>> {
    let coef = &params.coefficients;
    let mut values = params.recent_values.clone();
    let mut shocks = params.recent_residuals.clone();
    let mut diffs = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut next = coef.intercept;
        let (nv, ns) = (values.len(), shocks.len());
        for (i, phi) in coef.ar.iter().enumerate() {
            next += phi * values[nv - 1 - i];
        }
        for (j, theta) in coef.ma.iter().enumerate() {
            next += theta * shocks[ns - 1 - j];
        }
        values.push(next);
        shocks.push(0.0);
        diffs.push(next);
    }
    integrate_forecast(&diffs, state)
}

/// Every `(p, d, q)` with `p <= p_max`, `d` in `{0, 1}`, `q <= q_max`,
/// excluding the empty model.
pub fn arima_grid(p_max: usize, q_max: usize) -> Vec<ArimaOrder> {
    let mut grid = Vec::new();
    for p in 0..=p_max {
        for d in 0..=1 {
            for q in 0..=q_max {
                let order = ArimaOrder { p, d, q };
                if order.validate().is_ok() {
                    grid.push(order);
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone)]
pub struct ArimaSelection {
    pub order: ArimaOrder,
    pub model: FittedModel,
    pub mse: f64,
    /// Validation MSE of every candidate that fitted, in grid order.
    pub evaluated: Vec<(ArimaOrder, f64)>,
    pub skipped: Vec<(ArimaOrder, Error)>,
}

/// Picks the order whose `|validation|`-step forecast has the lowest MSE
/// against `validation` (normalised with the training scaler). Exact ties go
/// to the smaller `p + d + q`, then smaller `d`, then smaller `p`.
pub fn grid_search_arima(
    train: &Series,
    validation: &Series,
    p_max: usize,
    q_max: usize,
) -> Result<ArimaSelection> {
    let grid = arima_grid(p_max, q_max);
    let mut evaluated = Vec::new();
    let mut skipped = Vec::new();
    let mut best: Option<(ArimaOrder, FittedModel, f64)> = None;

    for order in grid.iter().copied() {
        let spec = ForecasterSpec::new(Hyperparameters::Arima(order), 0);
        let scored = fit(&spec, train).and_then(|f| {
            let forecast = f.model.forecast(validation.len())?;
            let actual = f.model.scaler.scale_values(validation.values());
            let score = mse(&ScorePair::new(&actual, &forecast)?);
            Ok((f.model, score))
        });
        match scored {
            Ok((model, score)) if score.is_finite() => {
                evaluated.push((order, score));
                let better = match &best {
                    None => true,
                    Some((o, _, s)) => {
                        (score, order.complexity(), order.d, order.p)
                            < (*s, o.complexity(), o.d, o.p)
                    }
                };
                if better {
                    best = Some((order, model, score));
                }
            }
            Ok(_) => skipped.push((order, Error::Divergence("non-finite validation MSE".into()))),
            Err(e) => skipped.push((order, e)),
        }
    }

    let (order, model, score) = best.ok_or(Error::ExhaustedGrid(grid.len()))?;
    Ok(ArimaSelection {
        order,
        model,
        mse: score,
        evaluated,
        skipped,
    })
}
