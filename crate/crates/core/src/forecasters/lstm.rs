//! Stacked LSTM regressor trained from scratch with backpropagation through
//! time and plain mini-batch gradient descent.
//!
//! Each layer uses the standard gate formulation on `z = [x; h_prev]`:
//!
//! ```text
//! i = sigmoid(W_i z + b_i)   f = sigmoid(W_f z + b_f)   o = sigmoid(W_o z + b_o)
//! g = tanh(W_g z + b_g)      c = f * c_prev + i * g     h = o * tanh(c)
//! ```
//!
//! Layer `l + 1` consumes the hidden sequence of layer `l`; a linear head maps
//! the final hidden state of the top layer to the prediction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::framing::Framing;
use crate::error::{contract, Error, Result};
use crate::rng::{seeded, uniform, SeededRng};
use crate::transform::make_windows_values;

const INIT_RANGE: f64 = 0.08;
const FORGET_BIAS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub layers: usize,
    pub num_units: usize,
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Express each window relative to its last value and predict the change.
    #[serde(default)]
    pub anchored: bool,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            layers: 2,
            num_units: 16,
            window: 7,
            epochs: 200,
            learning_rate: 0.01,
            batch_size: 8,
            anchored: false,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.num_units == 0 || self.window == 0 || self.batch_size == 0 {
            return Err(contract("LSTM layers, units, window and batch size must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(contract("LSTM learning rate must be positive"));
        }
        Ok(())
    }
}

/// One recurrent layer. `weights` is row-major `(4 * units) x (input_dim + units)`
/// with gate blocks in the order input, forget, output, candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayer {
    pub input_dim: usize,
    pub units: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LstmLayer {
    pub fn zeros(input_dim: usize, units: usize) -> Self {
        LstmLayer {
            input_dim,
            units,
            weights: vec![0.0; 4 * units * (input_dim + units)],
            bias: vec![0.0; 4 * units],
        }
    }

    fn stride(&self) -> usize {
        self.input_dim + self.units
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParameters {
    pub layers: Vec<LstmLayer>,
    pub head_weights: Vec<f64>,
    pub head_bias: f64,
    #[serde(default)]
    pub framing: Framing,
}

impl LstmParameters {
    /// All-zero parameters for a univariate input.
    pub fn zeros(layers: usize, units: usize) -> Self {
        let layers = (0..layers)
            .map(|l| LstmLayer::zeros(if l == 0 { 1 } else { units }, units))
            .collect();
        LstmParameters {
            layers,
            head_weights: vec![0.0; units],
            head_bias: 0.0,
            framing: Framing::direct(),
        }
    }

    /// Uniform weights in `[-0.08, 0.08]`, zero biases except the forget gate.
    pub fn initialize(config: &LstmConfig, rng: &mut SeededRng) -> Self {
        let mut params = Self::zeros(config.layers, config.num_units);
        for layer in &mut params.layers {
            for w in &mut layer.weights {
                *w = uniform(rng, -INIT_RANGE, INIT_RANGE);
            }
            let u = layer.units;
            layer.bias[u..2 * u].fill(FORGET_BIAS);
        }
        for w in &mut params.head_weights {
            *w = uniform(rng, -INIT_RANGE, INIT_RANGE);
        }
        params
    }

    pub fn zeros_like(&self) -> Self {
        LstmParameters {
            layers: self
                .layers
                .iter()
                .map(|l| LstmLayer::zeros(l.input_dim, l.units))
                .collect(),
            head_weights: vec![0.0; self.head_weights.len()],
            head_bias: 0.0,
            framing: self.framing,
        }
    }

    fn units(&self) -> usize {
        self.head_weights.len()
    }

    /// Number of scalar parameters.
    pub fn len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum::<usize>()
            + self.head_weights.len()
            + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every parameter in a fixed order: per layer weights then bias, then
    /// the head weights and bias.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()))
            .chain(self.head_weights.iter())
            .chain(core::iter::once(&self.head_bias))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
            .chain(self.head_weights.iter_mut())
            .chain(core::iter::once(&mut self.head_bias))
    }

    fn fill_zero(&mut self) {
        self.iter_mut().for_each(|v| *v = 0.0);
    }

    fn add_scaled(&mut self, alpha: f64, other: &LstmParameters) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += alpha * b;
        }
    }

    fn check(&self) -> Result<()> {
        let mut input = 1;
        for layer in &self.layers {
            let u = layer.units;
            if layer.input_dim != input
                || layer.weights.len() != 4 * u * (layer.input_dim + u)
                || layer.bias.len() != 4 * u
            {
                return Err(contract("inconsistent LSTM layer shapes"));
            }
            input = u;
        }
        if self.layers.is_empty() || self.head_weights.len() != input {
            return Err(contract("LSTM head does not match the top layer"));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Writes activated gates `[i, f, o, g]`, the new cell and hidden state.
fn step_into(
    layer: &LstmLayer,
    z: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    c: &mut [f64],
    tanh_c: &mut [f64],
    h: &mut [f64],
) {
    let u = layer.units;
    let stride = layer.stride();
    for (r, gate) in gates.iter_mut().enumerate() {
        let row = &layer.weights[r * stride..(r + 1) * stride];
        let mut acc = layer.bias[r];
        for (w, v) in row.iter().zip(z) {
            acc += w * v;
        }
        *gate = if r < 3 * u { sigmoid(acc) } else { libm::tanh(acc) };
    }
    for k in 0..u {
        let (i, f, o, g) = (gates[k], gates[u + k], gates[2 * u + k], gates[3 * u + k]);
        c[k] = f * c_prev[k] + i * g;
        tanh_c[k] = libm::tanh(c[k]);
        h[k] = o * tanh_c[k];
    }
}

/// One cell update for input `x` and previous state `(h_prev, c_prev)`.
pub fn lstm_cell_step(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    layer: &LstmLayer,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let u = layer.units;
    if x.len() != layer.input_dim || h_prev.len() != u || c_prev.len() != u {
        return Err(contract(format!(
            "cell step shapes: x {} (want {}), h {} and c {} (want {u})",
            x.len(),
            layer.input_dim,
            h_prev.len(),
            c_prev.len()
        )));
    }
    let mut z = Vec::with_capacity(layer.stride());
    z.extend_from_slice(x);
    z.extend_from_slice(h_prev);
    let mut gates = vec![0.0; 4 * u];
    let (mut c, mut tanh_c, mut h) = (vec![0.0; u], vec![0.0; u], vec![0.0; u]);
    step_into(layer, &z, c_prev, &mut gates, &mut c, &mut tanh_c, &mut h);
    Ok((h, c))
}

#[derive(Debug, Clone, Default)]
struct LayerCache {
    z: Vec<f64>,
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

/// Activations of one forward pass, everything backward needs.
#[derive(Debug, Clone, Default)]
pub struct LstmCache {
    steps: usize,
    layers: Vec<LayerCache>,
    pub prediction: f64,
}

impl LstmCache {
    fn prepare(&mut self, params: &LstmParameters, steps: usize) {
        self.steps = steps;
        self.layers.resize_with(params.layers.len(), LayerCache::default);
        for (cache, layer) in self.layers.iter_mut().zip(&params.layers) {
            let u = layer.units;
            cache.z.resize(steps * layer.stride(), 0.0);
            cache.gates.resize(steps * 4 * u, 0.0);
            cache.c.resize(steps * u, 0.0);
            cache.tanh_c.resize(steps * u, 0.0);
            cache.h.resize(steps * u, 0.0);
        }
    }

    /// Final hidden state of the top layer.
    pub fn last_hidden(&self) -> &[f64] {
        let top = &self.layers[self.layers.len() - 1];
        let u = top.h.len() / self.steps;
        &top.h[(self.steps - 1) * u..]
    }
}

fn forward_into(cache: &mut LstmCache, window: &[f64], params: &LstmParameters) -> f64 {
    let steps = window.len();
    cache.prepare(params, steps);
    let mut zero_state = Vec::new();
    for l in 0..params.layers.len() {
        let layer = &params.layers[l];
        let (u, stride, input_dim) = (layer.units, layer.stride(), layer.input_dim);
        zero_state.clear();
        zero_state.resize(u, 0.0);
        let (below, rest) = cache.layers.split_at_mut(l);
        let lc = &mut rest[0];
        for t in 0..steps {
            let z = &mut lc.z[t * stride..(t + 1) * stride];
            if l == 0 {
                z[0] = window[t];
            } else {
                z[..input_dim].copy_from_slice(&below[l - 1].h[t * input_dim..(t + 1) * input_dim]);
            }
            if t == 0 {
                z[input_dim..].fill(0.0);
            } else {
                let (prev_h, _) = lc.h.split_at(t * u);
                z[input_dim..].copy_from_slice(&prev_h[(t - 1) * u..]);
            }
            let (c_before, c_rest) = lc.c.split_at_mut(t * u);
            let c_prev: &[f64] = if t == 0 { &zero_state } else { &c_before[(t - 1) * u..] };
            step_into(
                layer,
                &lc.z[t * stride..(t + 1) * stride],
                c_prev,
                &mut lc.gates[t * 4 * u..(t + 1) * 4 * u],
                &mut c_rest[..u],
                &mut lc.tanh_c[t * u..(t + 1) * u],
                &mut lc.h[t * u..(t + 1) * u],
            );
        }
    }
    let h = cache.last_hidden();
    let prediction = params.head_bias
        + params
            .head_weights
            .iter()
            .zip(h)
            .map(|(w, v)| w * v)
            .sum::<f64>();
    cache.prediction = prediction;
    prediction
}

/// Runs `window` through every layer and the output head.
pub fn lstm_forward(window: &[f64], params: &LstmParameters) -> Result<(f64, LstmCache)> {
    params.check()?;
    if window.is_empty() {
        return Err(contract("LSTM window must be non-empty"));
    }
    let mut cache = LstmCache::default();
    let prediction = forward_into(&mut cache, window, params);
    Ok((prediction, cache))
}

#[derive(Debug, Default)]
struct BackwardScratch {
    dh_above: Vec<f64>,
    dx_below: Vec<f64>,
    dh_next: Vec<f64>,
    dc_next: Vec<f64>,
    da: Vec<f64>,
    dz: Vec<f64>,
}

/// Accumulates `d_prediction * d(prediction)/d(theta)` into `grad`.
fn backward_into(
    cache: &LstmCache,
    params: &LstmParameters,
    d_prediction: f64,
    grad: &mut LstmParameters,
    s: &mut BackwardScratch,
) {
    let steps = cache.steps;
    let top_units = params.units();
    grad.head_bias += d_prediction;
    for (g, h) in grad.head_weights.iter_mut().zip(cache.last_hidden()) {
        *g += d_prediction * h;
    }

    s.dh_above.clear();
    s.dh_above.resize(steps * top_units, 0.0);
    for (d, w) in s.dh_above[(steps - 1) * top_units..]
        .iter_mut()
        .zip(&params.head_weights)
    {
        *d = d_prediction * w;
    }

    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let gl = &mut grad.layers[l];
        let lc = &cache.layers[l];
        let (u, stride, input_dim) = (layer.units, layer.stride(), layer.input_dim);
        s.dh_next.clear();
        s.dh_next.resize(u, 0.0);
        s.dc_next.clear();
        s.dc_next.resize(u, 0.0);
        s.dx_below.clear();
        s.dx_below.resize(steps * input_dim, 0.0);
        s.da.resize(4 * u, 0.0);
        s.dz.resize(stride, 0.0);

        for t in (0..steps).rev() {
            let gates = &lc.gates[t * 4 * u..(t + 1) * 4 * u];
            let tanh_c = &lc.tanh_c[t * u..(t + 1) * u];
            for k in 0..u {
                let (i, f, o, g) = (gates[k], gates[u + k], gates[2 * u + k], gates[3 * u + k]);
                let c_prev = if t == 0 { 0.0 } else { lc.c[(t - 1) * u + k] };
                let dh = s.dh_above[t * u + k] + s.dh_next[k];
                let tc = tanh_c[k];
                let d_o = dh * tc;
                let dc = s.dc_next[k] + dh * o * (1.0 - tc * tc);
                let d_i = dc * g;
                let d_g = dc * i;
                let d_f = dc * c_prev;
                s.dc_next[k] = dc * f;
                s.da[k] = d_i * i * (1.0 - i);
                s.da[u + k] = d_f * f * (1.0 - f);
                s.da[2 * u + k] = d_o * o * (1.0 - o);
                s.da[3 * u + k] = d_g * (1.0 - g * g);
            }
            let z = &lc.z[t * stride..(t + 1) * stride];
            s.dz.fill(0.0);
            for r in 0..4 * u {
                let a = s.da[r];
                gl.bias[r] += a;
                if a == 0.0 {
                    continue;
                }
                let grow = &mut gl.weights[r * stride..(r + 1) * stride];
                let wrow = &layer.weights[r * stride..(r + 1) * stride];
                for m in 0..stride {
                    grow[m] += a * z[m];
                    s.dz[m] += a * wrow[m];
                }
            }
            s.dx_below[t * input_dim..(t + 1) * input_dim].copy_from_slice(&s.dz[..input_dim]);
            s.dh_next.copy_from_slice(&s.dz[input_dim..]);
        }
        core::mem::swap(&mut s.dh_above, &mut s.dx_below);
    }
}

/// Gradient of `d_prediction * prediction` with respect to every parameter.
/// For a squared-error loss pass `d_prediction = 2 * (prediction - target)`.
pub fn lstm_backward(cache: &LstmCache, params: &LstmParameters, d_prediction: f64) -> LstmParameters {
    let mut grad = params.zeros_like();
    let mut scratch = BackwardScratch::default();
    backward_into(cache, params, d_prediction, &mut grad, &mut scratch);
    grad
}

#[derive(Debug, Clone)]
pub struct LstmFit {
    pub params: LstmParameters,
    /// Mean training loss per epoch on the network's target scale, accumulated
    /// while the epoch's batches update the weights.
    pub loss_history: Vec<f64>,
    pub initial_mse: f64,
    pub final_mse: f64,
    /// One-step predictions for `values[window..]`.
    pub fitted: Vec<f64>,
}

fn predict_rows(params: &LstmParameters, inputs: &[f64], window: usize, cache: &mut LstmCache) -> Vec<f64> {
    let mut buf = Vec::with_capacity(window);
    inputs
        .chunks(window)
        .map(|row| {
            let a = params.framing.encode(row, &mut buf);
            params.framing.decode(forward_into(cache, &buf, params), a)
        })
        .collect()
}

fn mean_squared(pred: &[f64], targets: &[f64]) -> f64 {
    pred.iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / targets.len() as f64
}

/// Trains on the windowed series. Identical inputs, config and seed give
/// bit-identical parameters.
pub fn train_lstm(values: &[f64], config: &LstmConfig, seed: u64) -> Result<LstmFit> {
    config.validate()?;
    if values.len() <= config.window + 1 {
        return Err(contract(format!(
            "LSTM with window {} needs more than {} values, got {}",
            config.window,
            config.window + 1,
            values.len()
        )));
    }
    let windows = make_windows_values(values, config.window)?;
    let rows = windows.rows();
    let w = config.window;

    let mut rng = seeded(seed);
    let mut params = LstmParameters::initialize(config, &mut rng);
    params.framing = Framing::from_training(values, config.anchored);
    let framing = params.framing;
    let mut grad = params.zeros_like();
    let mut cache = LstmCache::default();
    let mut scratch = BackwardScratch::default();
    let mut buf = Vec::with_capacity(w);

    let initial_pred = predict_rows(&params, &windows.inputs, w, &mut cache);
    let initial_mse = mean_squared(&initial_pred, &windows.targets);

    let mut order: Vec<usize> = (0..rows).collect();
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.fill_zero();
            let scale = 2.0 / batch.len() as f64;
            for &idx in batch {
                let row = windows.row(idx);
                let a = framing.encode(row, &mut buf);
                let pred = forward_into(&mut cache, &buf, &params);
                let err = pred - framing.encode_target(windows.targets[idx], a);
                total += err * err;
                backward_into(&cache, &params, scale * err, &mut grad, &mut scratch);
            }
            params.add_scaled(-config.learning_rate, &grad);
        }
        let epoch_loss = total / rows as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Divergence(format!(
                "LSTM training loss became non-finite in epoch {epoch}"
            )));
        }
        loss_history.push(epoch_loss);
    }

    let fitted = predict_rows(&params, &windows.inputs, w, &mut cache);
    let final_mse = mean_squared(&fitted, &windows.targets);
    if !final_mse.is_finite() {
        return Err(Error::Divergence("LSTM final training loss is not finite".into()));
    }
    Ok(LstmFit {
        params,
        loss_history,
        initial_mse,
        final_mse,
        fitted,
    })
}

/// Recursive multi-step forecast from the last `window` observed values.
pub fn forecast_lstm(
    params: &LstmParameters,
    config: &LstmConfig,
    tail: &[f64],
    horizon: usize,
) -> Result<Vec<f64>> {
    params.check()?;
    if tail.len() < config.window {
        return Err(contract("LSTM forecast needs a full window of history"));
    }
    let mut history = tail[tail.len() - config.window..].to_vec();
    let mut cache = LstmCache::default();
    let mut buf = Vec::with_capacity(config.window);
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let window = &history[history.len() - config.window..];
        let a = params.framing.encode(window, &mut buf);
        let next = params.framing.decode(forward_into(&mut cache, &buf, params), a);
        history.push(next);
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_params(layers: usize, units: usize, seed: u64, range: f64) -> LstmParameters {
        let mut rng = seeded(seed);
        let mut p = LstmParameters::zeros(layers, units);
        for v in p.iter_mut() {
            *v = uniform(&mut rng, -range, range);
        }
        p
    }

    /// Scalar-by-scalar cell evaluation with explicit gate formulas.
    fn cell_oracle(x: &[f64], h: &[f64], c: &[f64], layer: &LstmLayer) -> (Vec<f64>, Vec<f64>) {
        let u = layer.units;
        let stride = layer.input_dim + u;
        let pre = |gate: usize, k: usize| {
            let r = gate * u + k;
            let mut s = layer.bias[r];
            for (m, xv) in x.iter().enumerate() {
                s += layer.weights[r * stride + m] * xv;
            }
            for (m, hv) in h.iter().enumerate() {
                s += layer.weights[r * stride + layer.input_dim + m] * hv;
            }
            s
        };
        let sig = |v: f64| 1.0 / (1.0 + libm::exp(-v));
        let mut h_new = vec![0.0; u];
        let mut c_new = vec![0.0; u];
        for k in 0..u {
            let i = sig(pre(0, k));
            let f = sig(pre(1, k));
            let o = sig(pre(2, k));
            let g = libm::tanh(pre(3, k));
            c_new[k] = f * c[k] + i * g;
            h_new[k] = o * libm::tanh(c_new[k]);
        }
        (h_new, c_new)
    }

    #[test]
    fn zero_parameters_are_a_fixed_point() {
        let layer = LstmLayer::zeros(1, 3);
        let (h, c) = lstm_cell_step(&[0.7], &[0.0; 3], &[0.0; 3], &layer).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(c, vec![0.0; 3]);
    }

    #[test]
    fn saturated_forget_gate_keeps_cell() {
        let mut layer = LstmLayer::zeros(1, 2);
        layer.bias[2..4].fill(20.0);
        let c_prev = [0.3, -0.6];
        let (_, c) = lstm_cell_step(&[0.5], &[0.1, 0.2], &c_prev, &layer).unwrap();
        for (a, b) in c.iter().zip(&c_prev) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn cell_step_matches_oracle() {
        let p = random_params(2, 2, 3, 0.5);
        let layer = &p.layers[1];
        let x = [0.4, -0.2];
        let h = [0.1, 0.3];
        let c = [-0.5, 0.2];
        let (h1, c1) = lstm_cell_step(&x, &h, &c, layer).unwrap();
        let (h2, c2) = cell_oracle(&x, &h, &c, layer);
        for k in 0..2 {
            assert!((h1[k] - h2[k]).abs() < 1e-12);
            assert!((c1[k] - c2[k]).abs() < 1e-12);
        }
        assert!(lstm_cell_step(&[0.1], &h, &c, layer).is_err());
    }

    #[test]
    fn forward_matches_oracle() {
        let p = random_params(2, 3, 5, 0.4);
        let window = [0.1, 0.5, -0.3, 0.8];
        let (pred, _) = lstm_forward(&window, &p).unwrap();

        let mut seq: Vec<Vec<f64>> = window.iter().map(|v| vec![*v]).collect();
        for layer in &p.layers {
            let (mut h, mut c) = (vec![0.0; 3], vec![0.0; 3]);
            let mut out = Vec::new();
            for x in &seq {
                let (hn, cn) = cell_oracle(x, &h, &c, layer);
                h = hn;
                c = cn;
                out.push(h.clone());
            }
            seq = out;
        }
        let last = seq.last().unwrap();
        let want = p.head_bias + p.head_weights.iter().zip(last).map(|(w, h)| w * h).sum::<f64>();
        assert!((pred - want).abs() < 1e-12);
    }

    #[test]
    fn zero_parameters_predict_head_bias() {
        let mut p = LstmParameters::zeros(2, 4);
        p.head_bias = 0.37;
        let (pred, _) = lstm_forward(&[0.2, 0.9, 0.4], &p).unwrap();
        assert_eq!(pred, 0.37);
    }

    #[test]
    fn single_step_window_is_cell_plus_head() {
        let p = random_params(1, 3, 8, 0.5);
        let (pred, _) = lstm_forward(&[0.6], &p).unwrap();
        let (h, _) = lstm_cell_step(&[0.6], &[0.0; 3], &[0.0; 3], &p.layers[0]).unwrap();
        let want = p.head_bias + p.head_weights.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>();
        assert!((pred - want).abs() < 1e-15);
    }

    #[test]
    fn backward_terminal_and_zero_cases() {
        let p = random_params(2, 3, 13, 0.3);
        let (_, cache) = lstm_forward(&[0.1, 0.2, 0.3], &p).unwrap();
        let zero = lstm_backward(&cache, &p, 0.0);
        assert!(zero.iter().all(|g| *g == 0.0));
        let g = lstm_backward(&cache, &p, 0.75);
        assert_eq!(g.head_bias, 0.75);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut p = random_params(2, 3, 21, 0.5);
        let window = [0.2, -0.4, 0.6, 0.1, 0.9];
        let target = 0.3;
        let loss = |p: &LstmParameters| {
            let (pred, _) = lstm_forward(&window, p).unwrap();
            (pred - target) * (pred - target)
        };
        let (pred, cache) = lstm_forward(&window, &p).unwrap();
        let grad: Vec<f64> = lstm_backward(&cache, &p, 2.0 * (pred - target)).iter().copied().collect();
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
            assert!(rel < 1e-4, "param {idx}: analytic {} fd {fd}", grad[idx]);
        }
    }

    #[test]
    fn training_is_deterministic_and_improves() {
        let values: Vec<f64> = (0..40).map(|t| t as f64 / 39.0).collect();
        let config = LstmConfig {
            num_units: 4,
            window: 4,
            epochs: 20,
            ..LstmConfig::default()
        };
        let a = train_lstm(&values, &config, 9).unwrap();
        let b = train_lstm(&values, &config, 9).unwrap();
        assert_eq!(a.params, b.params);
        assert!(a.final_mse <= a.initial_mse);
        assert_eq!(a.loss_history.len(), 20);
        let c = train_lstm(&values, &config, 10).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn zero_epochs_returns_initialisation() {
        let values: Vec<f64> = (0..20).map(|t| t as f64 / 19.0).collect();
        let config = LstmConfig {
            num_units: 3,
            window: 3,
            epochs: 0,
            ..LstmConfig::default()
        };
        let fit = train_lstm(&values, &config, 4).unwrap();
        let init = LstmParameters::initialize(&config, &mut seeded(4));
        assert_eq!(fit.params, init);
        assert!(fit.loss_history.is_empty());
        assert_eq!(fit.initial_mse, fit.final_mse);
    }

    #[test]
    fn short_series_and_bad_config() {
        let config = LstmConfig {
            window: 5,
            ..LstmConfig::default()
        };
        assert!(train_lstm(&[0.1; 6], &config, 0).is_err());
        let bad = LstmConfig {
            learning_rate: 0.0,
            ..LstmConfig::default()
        };
        assert!(train_lstm(&[0.1; 60], &bad, 0).is_err());
    }

    #[test]
    fn forecast_recursion() {
        // a model whose head ignores the state outputs its bias every step
        let mut p = LstmParameters::zeros(2, 3);
        p.head_bias = 0.42;
        let config = LstmConfig {
            num_units: 3,
            window: 3,
            ..LstmConfig::default()
        };
        assert_eq!(forecast_lstm(&p, &config, &[0.1, 0.2, 0.3], 4).unwrap(), vec![0.42; 4]);

        let p = random_params(2, 3, 31, 0.6);
        let tail = [0.5, 0.6, 0.8];
        let out = forecast_lstm(&p, &config, &tail, 3).unwrap();
        let (one, _) = lstm_forward(&tail, &p).unwrap();
        assert_eq!(out[0], one);
        let (two, _) = lstm_forward(&[0.6, 0.8, one], &p).unwrap();
        let (three, _) = lstm_forward(&[0.8, one, two], &p).unwrap();
        assert_eq!(out, vec![one, two, three]);
    }
}
