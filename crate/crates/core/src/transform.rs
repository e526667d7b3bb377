//! Min-max scaling, differencing and supervised windowing.

use alloc::format;
use alloc::vec::Vec;

use chrono::Days;
use serde::{Deserialize, Serialize};

use crate::data::{ScaleState, Series, SeriesKind};
use crate::error::{contract, Error, Result};

/// Affine map of a fitted range onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(contract("cannot fit a scaler on an empty series"));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            return Err(Error::DegenerateScale(min));
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn fit_series(series: &Series) -> Result<Self> {
        Self::fit(series.values())
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    #[inline]
    pub fn scale_value(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    #[inline]
    pub fn inverse_value(&self, z: f64) -> f64 {
        z * (self.max - self.min) + self.min
    }

    pub fn scale_values(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.scale_value(x)).collect()
    }

    pub fn inverse_values(&self, zs: &[f64]) -> Vec<f64> {
        zs.iter().map(|&z| self.inverse_value(z)).collect()
    }

    pub fn scale(&self, series: &Series) -> Series {
        series.derive(
            self.scale_values(series.values()),
            series.start_date(),
            series.kind(),
            ScaleState::Normalized,
        )
    }

    pub fn inverse_scale(&self, series: &Series) -> Series {
        series.derive(
            self.inverse_values(series.values()),
            series.start_date(),
            series.kind(),
            ScaleState::Raw,
        )
    }
}

/// Values consumed by `d` passes of first differencing.
///
/// `heads[k]` is the first value of the input to pass `k` and makes
/// [`integrate`] exact; `tails[k]` is the last value of that input and lets
/// [`integrate_forecast`] continue the series past its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceState {
    pub order: usize,
    pub heads: Vec<f64>,
    pub tails: Vec<f64>,
}

impl DifferenceState {
    fn check(&self) -> Result<()> {
        if self.heads.len() != self.order || self.tails.len() != self.order {
            return Err(contract(format!(
                "difference state of order {} holds {} heads and {} tails",
                self.order,
                self.heads.len(),
                self.tails.len()
            )));
        }
        Ok(())
    }
}

pub fn difference_values(values: &[f64], d: usize) -> Result<(Vec<f64>, DifferenceState)> {
    if d >= values.len() {
        return Err(contract(format!(
            "cannot difference {d} times a series of length {}",
            values.len()
        )));
    }
    let mut current = values.to_vec();
    let mut heads = Vec::with_capacity(d);
    let mut tails = Vec::with_capacity(d);
    for _ in 0..d {
        heads.push(current[0]);
        tails.push(current[current.len() - 1]);
        current = current.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok((
        current,
        DifferenceState {
            order: d,
            heads,
            tails,
        },
    ))
}

pub fn integrate_values(diffed: &[f64], state: &DifferenceState) -> Result<Vec<f64>> {
    state.check()?;
    let mut current = diffed.to_vec();
    for k in (0..state.order).rev() {
        let mut level = Vec::with_capacity(current.len() + 1);
        let mut acc = state.heads[k];
        level.push(acc);
        for &step in &current {
            acc += step;
            level.push(acc);
        }
        current = level;
    }
    Ok(current)
}

/// Turns forecasts on the differenced scale into forecasts on the original
/// scale, starting from the last observed value of each differencing level.
pub fn integrate_forecast(forecast: &[f64], state: &DifferenceState) -> Result<Vec<f64>> {
    state.check()?;
    let mut current = forecast.to_vec();
    for k in (0..state.order).rev() {
        let mut acc = state.tails[k];
        for v in current.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(current)
}

/// Differences a series `d` times. The result starts `d` days later.
pub fn difference(series: &Series, d: usize) -> Result<(Series, DifferenceState)> {
    let (values, state) = difference_values(series.values(), d)?;
    let kind = if d == 0 {
        series.kind()
    } else {
        SeriesKind::Incident
    };
    let out = series.derive(
        values,
        series.start_date() + Days::new(d as u64),
        kind,
        series.scale_state(),
    );
    Ok((out, state))
}

/// Exact inverse of [`difference`].
pub fn integrate(diffed: &Series, state: &DifferenceState) -> Result<Series> {
    let values = integrate_values(diffed.values(), state)?;
    let start = diffed
        .start_date()
        .checked_sub_days(Days::new(state.order as u64))
        .ok_or_else(|| contract("start date underflow"))?;
    let kind = if state.order == 0 {
        diffed.kind()
    } else {
        SeriesKind::Cumulative
    };
    Ok(diffed.derive(values, start, kind, diffed.scale_state()))
}

/// Supervised framing: row `i` holds `values[i..i+w]`, target `values[i+w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    /// Row-major, `(n - w) x w`.
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub window: usize,
}

impl WindowSet {
    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.window..(i + 1) * self.window]
    }
}

pub fn make_windows_values(values: &[f64], window: usize) -> Result<WindowSet> {
    if window == 0 || window >= values.len() {
        return Err(contract(format!(
            "window {window} needs 1 <= w < n (n = {})",
            values.len()
        )));
    }
    let rows = values.len() - window;
    let mut inputs = Vec::with_capacity(rows * window);
    for i in 0..rows {
        inputs.extend_from_slice(&values[i..i + window]);
    }
    Ok(WindowSet {
        inputs,
        targets: values[window..].to_vec(),
        window,
    })
}

pub fn make_windows(series: &Series, window: usize) -> Result<WindowSet> {
    make_windows_values(series.values(), window)
}
