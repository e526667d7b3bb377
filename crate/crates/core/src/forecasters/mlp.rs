//! Feed-forward network with one tanh hidden layer on the windowed framing,
//! optionally with day-of-week indicators of the predicted day.
//!
//! With `hidden_units = 0` the network is a linear autoregression.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::framing::Framing;
use crate::error::{contract, Error, Result};
use crate::rng::{seeded, uniform};
use crate::transform::make_windows_values;

const INIT_RANGE: f64 = 0.08;
const WEEKDAYS: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub window: usize,
    pub hidden_units: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Append a day-of-week one-hot of the predicted day to each input.
    #[serde(default)]
    pub seasonal: bool,
    /// Express each window relative to its last value and predict the change.
    #[serde(default)]
    pub anchored: bool,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            window: 7,
            hidden_units: 16,
            epochs: 2000,
            learning_rate: 0.05,
            seasonal: false,
            anchored: false,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(contract("MLP window must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(contract("MLP learning rate must be positive"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.window + if self.seasonal { WEEKDAYS } else { 0 }
    }
}

/// `prediction = out_bias + out_weights . tanh(hidden_weights x + hidden_bias)
/// + linear . x`, where `linear` is used only when there is no hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParameters {
    pub input_dim: usize,
    pub hidden_units: usize,
    /// Row-major `hidden_units x input_dim`.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub out_weights: Vec<f64>,
    pub out_bias: f64,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub framing: Framing,
}

impl MlpParameters {
    pub fn zeros(input_dim: usize, hidden_units: usize) -> Self {
        MlpParameters {
            input_dim,
            hidden_units,
            hidden_weights: vec![0.0; hidden_units * input_dim],
            hidden_bias: vec![0.0; hidden_units],
            out_weights: vec![0.0; hidden_units],
            out_bias: 0.0,
            linear: if hidden_units == 0 { vec![0.0; input_dim] } else { Vec::new() },
            framing: Framing::direct(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.hidden_weights
            .iter()
            .chain(&self.hidden_bias)
            .chain(&self.out_weights)
            .chain(core::iter::once(&self.out_bias))
            .chain(&self.linear)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.hidden_weights
            .iter_mut()
            .chain(self.hidden_bias.iter_mut())
            .chain(self.out_weights.iter_mut())
            .chain(core::iter::once(&mut self.out_bias))
            .chain(self.linear.iter_mut())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self) -> Result<()> {
        let (d, h) = (self.input_dim, self.hidden_units);
        let linear_len = if h == 0 { d } else { 0 };
        if self.hidden_weights.len() != h * d
            || self.hidden_bias.len() != h
            || self.out_weights.len() != h
            || self.linear.len() != linear_len
        {
            return Err(contract("inconsistent MLP parameter shapes"));
        }
        Ok(())
    }

    fn hidden_into(&self, x: &[f64], hidden: &mut Vec<f64>) {
        hidden.clear();
        let d = self.input_dim;
        for j in 0..self.hidden_units {
            let row = &self.hidden_weights[j * d..(j + 1) * d];
            let pre = self.hidden_bias[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            hidden.push(libm::tanh(pre));
        }
    }

    fn output(&self, x: &[f64], hidden: &[f64]) -> f64 {
        self.out_bias
            + self.out_weights.iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>()
            + self.linear.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Accumulates `d_prediction * d(prediction)/d(theta)` into `grad`.
    fn accumulate_gradient(&self, x: &[f64], hidden: &[f64], d_prediction: f64, grad: &mut MlpParameters) {
        let d = self.input_dim;
        grad.out_bias += d_prediction;
        for (g, v) in grad.linear.iter_mut().zip(x) {
            *g += d_prediction * v;
        }
        for j in 0..self.hidden_units {
            let a = hidden[j];
            grad.out_weights[j] += d_prediction * a;
            let dpre = d_prediction * self.out_weights[j] * (1.0 - a * a);
            grad.hidden_bias[j] += dpre;
            for (g, v) in grad.hidden_weights[j * d..(j + 1) * d].iter_mut().zip(x) {
                *g += dpre * v;
            }
        }
    }
}

/// Network output for one feature vector.
pub fn mlp_predict(params: &MlpParameters, x: &[f64]) -> Result<f64> {
    params.check()?;
    if x.len() != params.input_dim {
        return Err(contract(format!(
            "MLP input has {} features, expected {}",
            x.len(),
            params.input_dim
        )));
    }
    let mut hidden = Vec::with_capacity(params.hidden_units);
    params.hidden_into(x, &mut hidden);
    Ok(params.output(x, &hidden))
}

/// Gradient of `d_prediction * prediction(x)` with respect to every parameter.
pub fn mlp_gradient(params: &MlpParameters, x: &[f64], d_prediction: f64) -> Result<MlpParameters> {
    mlp_predict(params, x)?;
    let mut hidden = Vec::new();
    params.hidden_into(x, &mut hidden);
    let mut grad = MlpParameters::zeros(params.input_dim, params.hidden_units);
    params.accumulate_gradient(x, &hidden, d_prediction, &mut grad);
    Ok(grad)
}

/// Feature vector for predicting the value on `target_date` from `window`;
/// returns the framing anchor.
fn features(
    framing: &Framing,
    seasonal: bool,
    window: &[f64],
    target_date: NaiveDate,
    out: &mut Vec<f64>,
) -> f64 {
    let a = framing.encode(window, out);
    if seasonal {
        let dow = target_date.weekday().num_days_from_monday() as usize;
        out.extend((0..WEEKDAYS).map(|k| if k == dow { 1.0 } else { 0.0 }));
    }
    a
}

fn date_after(start: NaiveDate, days: usize) -> Result<NaiveDate> {
    start
        .checked_add_days(Days::new(days as u64))
        .ok_or_else(|| contract("date out of range"))
}

#[derive(Debug, Clone)]
pub struct MlpFit {
    pub params: MlpParameters,
    /// Losses are on the network's target scale, which differs from the
    /// series scale under the anchored framing.
    pub loss_history: Vec<f64>,
    pub initial_mse: f64,
    pub final_mse: f64,
    /// One-step predictions for `values[window..]`.
    pub fitted: Vec<f64>,
}

/// Full-batch gradient descent on the windowed series starting at `start_date`.
pub fn fit_mlp(values: &[f64], start_date: NaiveDate, config: &MlpConfig, seed: u64) -> Result<MlpFit> {
    config.validate()?;
    let w = config.window;
    if values.len() <= w + 1 {
        return Err(contract(format!(
            "MLP with window {w} needs more than {} values, got {}",
            w + 1,
            values.len()
        )));
    }
    let windows = make_windows_values(values, w)?;
    let rows = windows.rows();
    let dim = config.input_dim();

    let framing = Framing::from_training(values, config.anchored);
    let mut inputs = Vec::with_capacity(rows * dim);
    let mut anchors = Vec::with_capacity(rows);
    let mut targets = Vec::with_capacity(rows);
    let mut buf = Vec::with_capacity(dim);
    for i in 0..rows {
        let a = features(&framing, config.seasonal, windows.row(i), date_after(start_date, i + w)?, &mut buf);
        inputs.extend_from_slice(&buf);
        anchors.push(a);
        targets.push(framing.encode_target(windows.targets[i], a));
    }

    let mut rng = seeded(seed);
    let mut params = MlpParameters::zeros(dim, config.hidden_units);
    for v in params.iter_mut() {
        *v = uniform(&mut rng, -INIT_RANGE, INIT_RANGE);
    }
    params.hidden_bias.fill(0.0);
    params.out_bias = 0.0;
    params.framing = framing;

    let mut hidden = Vec::with_capacity(config.hidden_units);
    let mut grad = MlpParameters::zeros(dim, config.hidden_units);
    let evaluate = |params: &MlpParameters, hidden: &mut Vec<f64>| -> Vec<f64> {
        inputs
            .chunks(dim)
            .map(|x| {
                params.hidden_into(x, hidden);
                params.output(x, hidden)
            })
            .collect()
    };
    let mse_of = |pred: &[f64]| -> f64 {
        pred.iter()
            .zip(&targets)
            .map(|(p, y)| (p - y) * (p - y))
            .sum::<f64>()
            / rows as f64
    };
    let initial_mse = mse_of(&evaluate(&params, &mut hidden));

    let mut loss_history = Vec::with_capacity(config.epochs);
    let scale = 2.0 / rows as f64;
    for epoch in 1..=config.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for (x, y) in inputs.chunks(dim).zip(&targets) {
            params.hidden_into(x, &mut hidden);
            let err = params.output(x, &hidden) - y;
            total += err * err;
            params.accumulate_gradient(x, &hidden, scale * err, &mut grad);
        }
        let loss = total / rows as f64;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "MLP training loss became non-finite in epoch {epoch}"
            )));
        }
        loss_history.push(loss);
        for (p, g) in params.iter_mut().zip(grad.iter()) {
            *p -= config.learning_rate * g;
        }
    }

    let pred = evaluate(&params, &mut hidden);
    let final_mse = mse_of(&pred);
    if !final_mse.is_finite() {
        return Err(Error::Divergence("MLP final training loss is not finite".into()));
    }
    let fitted = pred.iter().zip(&anchors).map(|(p, a)| framing.decode(*p, *a)).collect();
    Ok(MlpFit {
        params,
        loss_history,
        initial_mse,
        final_mse,
        fitted,
    })
}

/// Recursive forecast for the `horizon` days after `last_date`, seeded with
/// the trailing observed window.
pub fn forecast_mlp(
    params: &MlpParameters,
    config: &MlpConfig,
    tail: &[f64],
    last_date: NaiveDate,
    horizon: usize,
) -> Result<Vec<f64>> {
    params.check()?;
    if params.input_dim != config.input_dim() {
        return Err(contract("MLP parameters do not match the configuration"));
    }
    let w = config.window;
    if tail.len() < w {
        return Err(contract("MLP forecast needs a full window of history"));
    }
    let mut history = tail[tail.len() - w..].to_vec();
    let mut buf = Vec::with_capacity(params.input_dim);
    let mut hidden = Vec::with_capacity(params.hidden_units);
    let mut out = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        let a = features(
            &params.framing,
            config.seasonal,
            &history[history.len() - w..],
            date_after(last_date, k)?,
            &mut buf,
        );
        params.hidden_into(&buf, &mut hidden);
        let next = params.framing.decode(params.output(&buf, &hidden), a);
        history.push(next);
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn random_params(dim: usize, hidden: usize, seed: u64) -> MlpParameters {
        let mut rng = seeded(seed);
        let mut p = MlpParameters::zeros(dim, hidden);
        for v in p.iter_mut() {
            *v = uniform(&mut rng, -0.7, 0.7);
        }
        p
    }

    #[test]
    fn prediction_matches_formula() {
        let p = random_params(3, 2, 1);
        let x = [0.2, -0.5, 0.9];
        let mut want = p.out_bias;
        for j in 0..2 {
            let mut pre = p.hidden_bias[j];
            for m in 0..3 {
                pre += p.hidden_weights[j * 3 + m] * x[m];
            }
            want += p.out_weights[j] * libm::tanh(pre);
        }
        assert!((mlp_predict(&p, &x).unwrap() - want).abs() < 1e-15);
        assert!(mlp_predict(&p, &[0.1]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for hidden in [0, 4] {
            let mut p = random_params(5, hidden, 7 + hidden as u64);
            let x = [0.3, -0.1, 0.8, 0.5, -0.6];
            let y = 0.25;
            let loss = |p: &MlpParameters| {
                let e = mlp_predict(p, &x).unwrap() - y;
                e * e
            };
            let pred = mlp_predict(&p, &x).unwrap();
            let grad: Vec<f64> = mlp_gradient(&p, &x, 2.0 * (pred - y)).unwrap().iter().copied().collect();
            let eps = 1e-5;
            for idx in 0..p.len() {
                let orig = *p.iter().nth(idx).unwrap();
                *p.iter_mut().nth(idx).unwrap() = orig + eps;
                let up = loss(&p);
                *p.iter_mut().nth(idx).unwrap() = orig - eps;
                let down = loss(&p);
                *p.iter_mut().nth(idx).unwrap() = orig;
                let fd = (up - down) / (2.0 * eps);
                let rel = (grad[idx] - fd).abs() / grad[idx].abs().max(1.0);
                assert!(rel < 1e-4, "hidden {hidden} param {idx}");
            }
        }
    }

    #[test]
    fn linear_network_learns_halving() {
        let mut ys = vec![1.0];
        for _ in 0..40 {
            let last = *ys.last().unwrap();
            ys.push(0.5 * last);
        }
        let config = MlpConfig {
            window: 1,
            hidden_units: 0,
            epochs: 20_000,
            learning_rate: 0.5,
            ..MlpConfig::default()
        };
        let fit = fit_mlp(&ys, day(2020, 1, 1), &config, 3).unwrap();
        assert!(fit.final_mse < 1e-6, "{}", fit.final_mse);
    }

    #[test]
    fn deterministic_replay() {
        let values: Vec<f64> = (0..50).map(|t| libm::sin(t as f64 / 5.0) * 0.5 + 0.5).collect();
        let config = MlpConfig {
            epochs: 50,
            seasonal: true,
            ..MlpConfig::default()
        };
        let a = fit_mlp(&values, day(2020, 3, 1), &config, 5).unwrap();
        let b = fit_mlp(&values, day(2020, 3, 1), &config, 5).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loss_history, b.loss_history);
        assert!(a.final_mse <= a.initial_mse);
    }

    #[test]
    fn seasonal_features_follow_target_weekday() {
        let config = MlpConfig {
            window: 2,
            seasonal: true,
            ..MlpConfig::default()
        };
        let mut buf = Vec::new();
        let framing = Framing::direct();
        // 2021-03-15 is a Monday
        features(&framing, config.seasonal, &[0.1, 0.2], day(2021, 3, 15), &mut buf);
        assert_eq!(buf, vec![0.1, 0.2, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        features(&framing, config.seasonal, &[0.1, 0.2], day(2021, 3, 21), &mut buf);
        assert_eq!(buf[8], 1.0);
    }

    #[test]
    fn forecast_recursion() {
        let config = MlpConfig {
            window: 2,
            hidden_units: 3,
            ..MlpConfig::default()
        };
        let p = random_params(2, 3, 11);
        let out = forecast_mlp(&p, &config, &[0.4, 0.6], day(2021, 1, 1), 3).unwrap();
        let one = mlp_predict(&p, &[0.4, 0.6]).unwrap();
        let two = mlp_predict(&p, &[0.6, one]).unwrap();
        let three = mlp_predict(&p, &[one, two]).unwrap();
        assert_eq!(out, vec![one, two, three]);
    }

    #[test]
    fn anchored_forecast_adds_increment() {
        let config = MlpConfig {
            window: 2,
            hidden_units: 0,
            anchored: true,
            ..MlpConfig::default()
        };
        let mut p = MlpParameters::zeros(2, 0);
        p.framing = Framing {
            anchored: true,
            step_scale: 0.5,
        };
        p.out_bias = 0.2;
        let out = forecast_mlp(&p, &config, &[0.3, 0.5], day(2021, 1, 1), 3).unwrap();
        let want = [0.6, 0.7, 0.8];
        for (o, w) in out.iter().zip(want) {
            assert!((o - w).abs() < 1e-12);
        }
    }

    #[test]
    fn short_series_rejected() {
        let config = MlpConfig {
            window: 4,
            ..MlpConfig::default()
        };
        assert!(fit_mlp(&[0.1; 5], day(2020, 1, 1), &config, 0).is_err());
    }
}
