//! Forecast-accuracy scores.

use alloc::format;

use crate::error::{contract, Error, Result};

/// Observed and predicted values of equal, non-zero length.
#[derive(Debug, Clone, Copy)]
pub struct ScorePair<'a> {
    actual: &'a [f64],
    predicted: &'a [f64],
}

impl<'a> ScorePair<'a> {
    pub fn new(actual: &'a [f64], predicted: &'a [f64]) -> Result<Self> {
        if actual.is_empty() || actual.len() != predicted.len() {
            return Err(contract(format!(
                "score pair needs equal non-zero lengths, got {} and {}",
                actual.len(),
                predicted.len()
            )));
        }
        if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
            return Err(contract("score pair contains non-finite values"));
        }
        Ok(ScorePair { actual, predicted })
    }

    pub fn actual(&self) -> &'a [f64] {
        self.actual
    }

    pub fn predicted(&self) -> &'a [f64] {
        self.predicted
    }

    fn len(&self) -> f64 {
        self.actual.len() as f64
    }

    fn errors(&self) -> impl Iterator<Item = f64> + 'a {
        self.actual
            .iter()
            .zip(self.predicted)
            .map(|(y, yhat)| y - yhat)
    }
}

/// Mean squared error.
pub fn mse(sp: &ScorePair<'_>) -> f64 {
    sp.errors().map(|e| e * e).sum::<f64>() / sp.len()
}

pub fn rmse(sp: &ScorePair<'_>) -> f64 {
    libm::sqrt(mse(sp))
}

/// Mean absolute percentage error, in percent.
pub fn mape(sp: &ScorePair<'_>) -> Result<f64> {
    if let Some(i) = sp.actual.iter().position(|&y| y == 0.0) {
        return Err(Error::UndefinedMetric(format!(
            "MAPE needs non-zero actuals (zero at position {i})"
        )));
    }
    let total: f64 = sp
        .actual
        .iter()
        .zip(sp.predicted)
        .map(|(y, yhat)| libm::fabs(y - yhat) / libm::fabs(*y))
        .sum();
    Ok(100.0 * total / sp.len())
}

/// Mean absolute error scaled by the in-sample one-step naive error of `train`.
pub fn mase(sp: &ScorePair<'_>, train: &[f64]) -> Result<f64> {
    if train.len() < 2 {
        return Err(Error::UndefinedMetric(
            "MASE needs at least two training values".into(),
        ));
    }
    let naive = train
        .windows(2)
        .map(|w| libm::fabs(w[1] - w[0]))
        .sum::<f64>()
        / (train.len() - 1) as f64;
    if naive == 0.0 {
        return Err(Error::UndefinedMetric(
            "MASE is undefined for a constant training series".into(),
        ));
    }
    let mae = sp.errors().map(libm::fabs).sum::<f64>() / sp.len();
    Ok(mae / naive)
}

/// Coefficient of determination, `1 - SSE/SST`.
pub fn fit_score(sp: &ScorePair<'_>) -> Result<f64> {
    let mean = sp.actual.iter().sum::<f64>() / sp.len();
    let sst: f64 = sp.actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    if sst == 0.0 {
        return Err(Error::UndefinedMetric(
            "R2 is undefined for constant actuals".into(),
        ));
    }
    let sse: f64 = sp.errors().map(|e| e * e).sum();
    Ok(1.0 - sse / sst)
}
