//! The five forecaster families behind one fit/forecast contract.
//!
//! [`fit`] takes a raw training series, fits a [`MinMaxScaler`] on it, and
//! hands the normalised values to the kind-specific estimator. The returned
//! [`FittedModel`] is self-contained: it carries the scaler, any differencing
//! state and the trailing values recursive forecasting needs, so it can be
//! written to disk and forecast from later without the original data.

pub mod additive;
pub mod arima;
pub mod autoreg;
pub mod framing;
pub mod lstm;
pub mod mlp;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::Series;
use crate::error::{contract, Error, Result};
use crate::transform::{DifferenceState, MinMaxScaler};

pub use additive::{AdditiveConfig, AdditiveParams};
pub use arima::{ArimaOrder, ArimaParams, ArmaCoefficients};
pub use autoreg::{ArOrder, ArParams};
pub use framing::Framing;
pub use lstm::{LstmConfig, LstmParameters};
pub use mlp::{MlpConfig, MlpParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Autoreg,
    Arima,
    Lstm,
    Mlp,
    Additive,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Additive,
        ModelKind::Lstm,
        ModelKind::Autoreg,
        ModelKind::Arima,
        ModelKind::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Autoreg => "autoreg",
            ModelKind::Arima => "arima",
            ModelKind::Lstm => "lstm",
            ModelKind::Mlp => "mlp",
            ModelKind::Additive => "additive",
        }
    }

    /// Name used for series and columns in output files.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Additive => "prophet",
            other => other.as_str(),
        }
    }

    /// Column header in the human-readable comparison table.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Autoreg => "AUTO REG",
            ModelKind::Arima => "ARIMA",
            ModelKind::Lstm => "LSTM",
            ModelKind::Mlp => "MLP",
            ModelKind::Additive => "Prophet",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "autoreg" | "ar" => Ok(ModelKind::Autoreg),
            "arima" => Ok(ModelKind::Arima),
            "lstm" => Ok(ModelKind::Lstm),
            "mlp" | "ann" => Ok(ModelKind::Mlp),
            "additive" | "prophet" => Ok(ModelKind::Additive),
            _ => Err(contract(format!("unknown model kind `{s}`"))),
        }
    }
}

/// Kind-specific hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparameters {
    Autoreg(ArOrder),
    Arima(ArimaOrder),
    Lstm(LstmConfig),
    Mlp(MlpConfig),
    Additive(AdditiveConfig),
}

impl Hyperparameters {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparameters::Autoreg(_) => ModelKind::Autoreg,
            Hyperparameters::Arima(_) => ModelKind::Arima,
            Hyperparameters::Lstm(_) => ModelKind::Lstm,
            Hyperparameters::Mlp(_) => ModelKind::Mlp,
            Hyperparameters::Additive(_) => ModelKind::Additive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparameters::Autoreg(o) => o.validate(),
            Hyperparameters::Arima(o) => o.validate(),
            Hyperparameters::Lstm(c) => c.validate(),
            Hyperparameters::Mlp(c) => c.validate(),
            Hyperparameters::Additive(c) => c.validate(),
        }
    }
}

impl fmt::Display for Hyperparameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparameters::Autoreg(o) => write!(f, "p={}", o.p),
            Hyperparameters::Arima(o) => write!(f, "({},{},{})", o.p, o.d, o.q),
            Hyperparameters::Lstm(c) => write!(
                f,
                "layers={} units={} window={} epochs={} lr={} batch={}{}",
                c.layers,
                c.num_units,
                c.window,
                c.epochs,
                c.learning_rate,
                c.batch_size,
                if c.anchored { " anchored" } else { "" }
            ),
            Hyperparameters::Mlp(c) => write!(
                f,
                "hidden={} window={} epochs={} lr={}{}{}",
                c.hidden_units,
                c.window,
                c.epochs,
                c.learning_rate,
                if c.seasonal { " seasonal" } else { "" },
                if c.anchored { " anchored" } else { "" }
            ),
            Hyperparameters::Additive(c) => write!(
                f,
                "changepoints={} penalty={} fourier={} period={}",
                c.n_changepoints, c.changepoint_penalty, c.fourier_order, c.period_days
            ),
        }
    }
}

/// Hyperparameters plus the seed that fixes every stochastic initialisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterSpec {
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl ForecasterSpec {
    pub fn new(hyperparameters: Hyperparameters, seed: u64) -> Self {
        ForecasterSpec {
            hyperparameters,
            seed,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.hyperparameters.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Parameters {
    Autoreg(ArParams),
    Arima(ArimaParams),
    Lstm(LstmParameters),
    Mlp(MlpParameters),
    Additive(AdditiveParams),
}

/// A trained forecaster, complete enough to forecast on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ForecasterSpec,
    pub parameters: Parameters,
    pub scaler: MinMaxScaler,
    /// Trailing normalised training values used to seed recursive forecasts.
    pub train_tail: Vec<f64>,
    pub diff_state: Option<DifferenceState>,
    /// Date of the last training observation.
    pub last_date: NaiveDate,
    /// Per-epoch training loss for the neural models; empty otherwise.
    pub loss_history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// One-step in-sample predictions, normalised, for `train[offset..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InSample {
    pub offset: usize,
    pub fitted: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub model: FittedModel,
    pub in_sample: InSample,
}

/// Fits `spec` on a raw training series.
pub fn fit(spec: &ForecasterSpec, train: &Series) -> Result<Fit> {
    spec.hyperparameters.validate()?;
    let scaler = MinMaxScaler::fit_series(train)?;
    let values = scaler.scale_values(train.values());
    let last_date = train.end_date();

    let mut diff_state = None;
    let mut loss_history = Vec::new();
    let mut warnings = Vec::new();
    let (parameters, train_tail, in_sample) = match &spec.hyperparameters {
        Hyperparameters::Autoreg(order) => {
            let fit = autoreg::fit_autoreg(&values, *order)?;
            let tail = values[values.len() - order.p..].to_vec();
            let ins = InSample {
                offset: order.p,
                fitted: fit.fitted,
            };
            (Parameters::Autoreg(fit.params), tail, ins)
        }
        Hyperparameters::Arima(order) => {
            let fit = arima::fit_arima(&values, *order)?;
            diff_state = Some(fit.diff_state);
            warnings = fit.warnings;
            let ins = InSample {
                offset: fit.fitted_offset,
                fitted: fit.fitted,
            };
            let tail = values[values.len() - 1..].to_vec();
            (Parameters::Arima(fit.params), tail, ins)
        }
        Hyperparameters::Lstm(config) => {
            let fit = lstm::train_lstm(&values, config, spec.seed)?;
            loss_history = fit.loss_history;
            let tail = values[values.len() - config.window..].to_vec();
            let ins = InSample {
                offset: config.window,
                fitted: fit.fitted,
            };
            (Parameters::Lstm(fit.params), tail, ins)
        }
        Hyperparameters::Mlp(config) => {
            let fit = mlp::fit_mlp(&values, train.start_date(), config, spec.seed)?;
            loss_history = fit.loss_history;
            let tail = values[values.len() - config.window..].to_vec();
            let ins = InSample {
                offset: config.window,
                fitted: fit.fitted,
            };
            (Parameters::Mlp(fit.params), tail, ins)
        }
        Hyperparameters::Additive(config) => {
            let fit = additive::fit_additive(&values, config)?;
            let ins = InSample {
                offset: 0,
                fitted: fit.fitted,
            };
            (Parameters::Additive(fit.params), Vec::new(), ins)
        }
    };

    Ok(Fit {
        model: FittedModel {
            spec: spec.clone(),
            parameters,
            scaler,
            train_tail,
            diff_state,
            last_date,
            loss_history,
            warnings,
        },
        in_sample,
    })
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    /// `horizon` recursive point forecasts on the normalised scale.
    pub fn forecast(&self, horizon: usize) -> Result<Vec<f64>> {
        let out = match (&self.parameters, &self.spec.hyperparameters) {
            (Parameters::Autoreg(p), _) => autoreg::forecast_autoreg(p, &self.train_tail, horizon),
            (Parameters::Arima(p), _) => {
                let state = self
                    .diff_state
                    .as_ref()
                    .ok_or_else(|| contract("ARIMA model without differencing state"))?;
                arima::forecast_arima(p, state, horizon)?
            }
            (Parameters::Lstm(p), Hyperparameters::Lstm(c)) => {
                lstm::forecast_lstm(p, c, &self.train_tail, horizon)?
            }
            (Parameters::Mlp(p), Hyperparameters::Mlp(c)) => {
                mlp::forecast_mlp(p, c, &self.train_tail, self.last_date, horizon)?
            }
            (Parameters::Additive(p), _) => additive::forecast_additive(p, horizon),
            _ => return Err(contract("parameters do not match the model kind")),
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence("forecast produced non-finite values".into()));
        }
        Ok(out)
    }

    /// Forecasts mapped back to the original scale.
    pub fn forecast_raw(&self, horizon: usize) -> Result<Vec<f64>> {
        Ok(self.scaler.inverse_values(&self.forecast(horizon)?))
    }
}
