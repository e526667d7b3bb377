//! Holdout and rolling-origin evaluation, validation-tail grid search and the
//! multi-model comparison report.
//!
//! Every slice of the series handed to a model goes through [`Observer`], so
//! tests can prove that test indices never reach fitting or selection.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::data::{split_len, Series};
use crate::error::{contract, Error, Result};
use crate::forecasters::arima::arima_grid;
use crate::forecasters::{
    fit, AdditiveConfig, ArOrder, FittedModel, ForecasterSpec, Hyperparameters, LstmConfig, MlpConfig,
    ModelKind,
};
use crate::metrics::{fit_score, mase, mape, mse, rmse, ScorePair};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Default share of the training split held out for hyperparameter selection.
pub const VALIDATION_FRACTION: f64 = 0.2;

pub const SELECTION_NOTE: &str = "hyperparameters are selected on a validation tail carved from the \
training split; test observations are used only for the final scores";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalProtocol {
    Holdout {
        test_fraction: f64,
    },
    RollingOrigin {
        initial_train: usize,
        step: usize,
        horizon: usize,
    },
}

/// Why a span of the series was handed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Access {
    /// Training data for a model fit.
    Fit,
    /// Validation targets used to rank grid candidates.
    Validate,
    /// Held-out targets used for final scores.
    Test,
}

/// Hook notified whenever a span of the evaluated series is used.
pub trait Observer {
    fn touched(&mut self, access: Access, indices: Range<usize>);

    /// Monotonic clock in milliseconds, when one is available.
    fn now_ms(&mut self) -> Option<f64> {
        None
    }
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct Silent;

impl Observer for Silent {
    fn touched(&mut self, _: Access, _: Range<usize>) {}
}

/// Records every access for later auditing.
#[derive(Debug, Default, Clone)]
pub struct AccessLog {
    pub entries: Vec<(Access, Range<usize>)>,
}

impl Observer for AccessLog {
    fn touched(&mut self, access: Access, indices: Range<usize>) {
        self.entries.push((access, indices));
    }
}

impl AccessLog {
    /// Highest index (exclusive) used for fitting or validation.
    pub fn selection_end(&self) -> usize {
        self.entries
            .iter()
            .filter(|(a, _)| *a != Access::Test)
            .map(|(_, r)| r.end)
            .max()
            .unwrap_or(0)
    }

    pub fn test_start(&self) -> Option<usize> {
        self.entries
            .iter()
            .filter(|(a, _)| *a == Access::Test)
            .map(|(_, r)| r.start)
            .min()
    }
}

fn view(series: &Series, range: Range<usize>, access: Access, observer: &mut dyn Observer) -> Result<Series> {
    observer.touched(access, range.clone());
    series.slice(range.start, range.end)
}

/// Scores on the normalised scale except `mape_test`, which uses raw values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse_train: f64,
    pub mse_test: f64,
    pub r2_train: f64,
    pub r2_test: f64,
    pub rmse_test: f64,
    pub mape_test: Option<f64>,
    pub mase_test: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HoldoutResult {
    pub model: FittedModel,
    pub metrics: Metrics,
    /// Normalised forecast over the test span.
    pub forecast: Vec<f64>,
}

fn score_fit(spec: &ForecasterSpec, train: &Series, test: &Series) -> Result<HoldoutResult> {
    let fitted = fit(spec, train)?;
    let model = fitted.model;
    let train_scaled = model.scaler.scale_values(train.values());
    let test_scaled = model.scaler.scale_values(test.values());

    let ins = &fitted.in_sample;
    let actual_in = &train_scaled[ins.offset..];
    let in_pair = ScorePair::new(actual_in, &ins.fitted)?;
    let forecast = model.forecast(test.len())?;
    let pair = ScorePair::new(&test_scaled, &forecast)?;

    let raw_forecast = model.scaler.inverse_values(&forecast);
    let mape_test = ScorePair::new(test.values(), &raw_forecast)
        .and_then(|p| mape(&p))
        .ok();
    let metrics = Metrics {
        mse_train: mse(&in_pair),
        mse_test: mse(&pair),
        r2_train: fit_score(&in_pair).unwrap_or(f64::NAN),
        r2_test: fit_score(&pair).unwrap_or(f64::NAN),
        rmse_test: rmse(&pair),
        mape_test,
        mase_test: mase(&pair, &train_scaled).ok(),
    };
    Ok(HoldoutResult {
        model,
        metrics,
        forecast,
    })
}

/// Fits on the leading part of `series` (scaler fitted there only) and scores
/// a forecast of the trailing `test_fraction`.
pub fn holdout_eval(spec: &ForecasterSpec, series: &Series, test_fraction: f64) -> Result<HoldoutResult> {
    let n = series.len();
    let test_len = split_len(n, test_fraction)?;
    let train = series.slice(0, n - test_len)?;
    let test = series.slice(n - test_len, n)?;
    score_fit(spec, &train, &test)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub origin: usize,
    pub horizon: usize,
    pub mse: f64,
}

/// Number of complete folds; zero when none fits.
pub fn fold_count(n: usize, initial_train: usize, step: usize, horizon: usize) -> usize {
    if step == 0 || horizon == 0 || initial_train + horizon > n {
        return 0;
    }
    (n - initial_train - horizon) / step + 1
}

/// Fits on `series[..origin]` and scores `horizon` steps ahead for every
/// origin `initial_train, initial_train + step, ...`.
pub fn rolling_origin_eval(
    spec: &ForecasterSpec,
    series: &Series,
    initial_train: usize,
    step: usize,
    horizon: usize,
) -> Result<Vec<Fold>> {
    let folds = fold_count(series.len(), initial_train, step, horizon);
    if folds == 0 {
        return Err(contract(format!(
            "no complete fold: n = {}, initial_train = {initial_train}, step = {step}, horizon = {horizon}",
            series.len()
        )));
    }
    (0..folds)
        .map(|k| {
            let origin = initial_train + k * step;
            let train = series.slice(0, origin)?;
            let actual = series.slice(origin, origin + horizon)?;
            let model = fit(spec, &train)?.model;
            let forecast = model.forecast(horizon)?;
            let scaled = model.scaler.scale_values(actual.values());
            Ok(Fold {
                origin,
                horizon,
                mse: mse(&ScorePair::new(&scaled, &forecast)?),
            })
        })
        .collect()
}

/// Validation MSE of one candidate: fit on `train[..n - v]`, forecast the
/// last `v` points, score on the fitted scaler's scale.
pub fn evaluate_candidate(
    spec: &ForecasterSpec,
    train: &Series,
    validation_fraction: f64,
    observer: &mut dyn Observer,
) -> Result<f64> {
    let n = train.len();
    let v = split_len(n, validation_fraction)?;
    let fit_part = view(train, 0..n - v, Access::Fit, observer)?;
    let model = fit(spec, &fit_part)?.model;
    let forecast = model.forecast(v)?;
    let target = view(train, n - v..n, Access::Validate, observer)?;
    let scaled = model.scaler.scale_values(target.values());
    let score = mse(&ScorePair::new(&scaled, &forecast)?);
    if !score.is_finite() {
        return Err(Error::Divergence("validation MSE is not finite".into()));
    }
    Ok(score)
}

/// Lowest score wins; exact ties go to the earliest index.
pub fn select_best(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((i, s));
            }
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub index: usize,
    pub spec: ForecasterSpec,
    /// The winning candidate as fitted on the non-validation part of `train`.
    pub model: FittedModel,
    pub validation_mse: f64,
    /// Validation MSE per candidate in grid order; `Err` for failures.
    pub scores: Vec<core::result::Result<f64, Error>>,
}

/// Exhaustive search minimising validation MSE on the tail of `train`.
pub fn grid_search(grid: &[ForecasterSpec], train: &Series, validation_fraction: f64) -> Result<GridResult> {
    grid_search_observed(grid, train, validation_fraction, &mut Silent)
}

pub fn grid_search_observed(
    grid: &[ForecasterSpec],
    train: &Series,
    validation_fraction: f64,
    observer: &mut dyn Observer,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(contract("grid search needs at least one candidate"));
    }
    let scores: Vec<_> = grid
        .iter()
        .map(|spec| evaluate_candidate(spec, train, validation_fraction, observer))
        .collect();
    let flat: Vec<Option<f64>> = scores.iter().map(|s| s.as_ref().ok().copied()).collect();
    let index = select_best(&flat).ok_or(Error::ExhaustedGrid(grid.len()))?;
    let n = train.len();
    let v = split_len(n, validation_fraction)?;
    let fit_part = view(train, 0..n - v, Access::Fit, observer)?;
    let model = fit(&grid[index], &fit_part)?.model;
    Ok(GridResult {
        index,
        spec: grid[index].clone(),
        model,
        validation_mse: flat[index].unwrap_or(f64::NAN),
        scores,
    })
}

/// Default search space for each model family. The LSTM space is sized for
/// a single CPU core; [`extended_lstm_grid`] spans the wider search.
pub fn default_grid(kind: ModelKind) -> Vec<Hyperparameters> {
    let mut grid = Vec::new();
    match kind {
        ModelKind::Autoreg => {
            grid.extend((1..=10).map(|p| Hyperparameters::Autoreg(ArOrder { p })));
        }
        ModelKind::Arima => {
            grid.extend(arima_grid(5, 5).into_iter().map(Hyperparameters::Arima));
        }
        ModelKind::Lstm => {
            for num_units in [16, 32] {
                for window in [7, 14, 28] {
                    for learning_rate in [0.01, 0.001] {
                        grid.push(Hyperparameters::Lstm(LstmConfig {
                            layers: 2,
                            num_units,
                            window,
                            epochs: 200,
                            learning_rate,
                            batch_size: 8,
                            anchored: true,
                        }));
                    }
                }
            }
        }
        ModelKind::Mlp => {
            for anchored in [false, true] {
                for seasonal in [false, true] {
                    for hidden_units in [0, 8, 32] {
                        for window in [7, 14] {
                            grid.push(Hyperparameters::Mlp(MlpConfig {
                                window,
                                hidden_units,
                                epochs: 2000,
                                learning_rate: 0.05,
                                seasonal,
                                anchored,
                            }));
                        }
                    }
                }
            }
        }
        ModelKind::Additive => {
            for n_changepoints in [0, 5, 10, 25] {
                for changepoint_penalty in [0.1, 10.0] {
                    for fourier_order in [0, 3] {
                        grid.push(Hyperparameters::Additive(AdditiveConfig {
                            n_changepoints,
                            changepoint_penalty,
                            fourier_order,
                            period_days: 7.0,
                        }));
                    }
                }
            }
        }
    }
    grid
}

/// Units {16, 32, 64} x window {7, 14, 28} x learning rate {0.01, 0.001} x
/// epochs {200, 500}, for both framings.
pub fn extended_lstm_grid() -> Vec<Hyperparameters> {
    let mut grid = Vec::new();
    for anchored in [false, true] {
        for num_units in [16, 32, 64] {
            for window in [7, 14, 28] {
                for learning_rate in [0.01, 0.001] {
                    for epochs in [200, 500] {
                        grid.push(Hyperparameters::Lstm(LstmConfig {
                            layers: 2,
                            num_units,
                            window,
                            epochs,
                            learning_rate,
                            batch_size: 8,
                            anchored,
                        }));
                    }
                }
            }
        }
    }
    grid
}

/// One model family in a comparison: its candidate grid and the seeds used
/// for the final refits. Candidates are ranked with the first seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub name: String,
    pub candidates: Vec<Hyperparameters>,
    pub seeds: Vec<u64>,
}

impl ModelEntry {
    pub fn new(name: impl Into<String>, candidates: Vec<Hyperparameters>, seeds: Vec<u64>) -> Self {
        ModelEntry {
            name: name.into(),
            candidates,
            seeds,
        }
    }

    pub fn single(name: impl Into<String>, hyperparameters: Hyperparameters, seed: u64) -> Self {
        Self::new(name, alloc::vec![hyperparameters], alloc::vec![seed])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub hyperparameters: Option<Hyperparameters>,
    pub seeds: Vec<u64>,
    pub validation_mse: Option<f64>,
    /// Median over the refit seeds of each metric.
    pub metrics: Option<Metrics>,
    pub mse_test_by_seed: Vec<f64>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl ReportRow {
    fn failed(name: &str, error: String) -> Self {
        ReportRow {
            name: name.to_string(),
            hyperparameters: None,
            seeds: Vec::new(),
            validation_mse: None,
            metrics: None,
            mse_test_by_seed: Vec::new(),
            error: Some(error),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub schema_version: u32,
    pub note: String,
    pub train_len: usize,
    pub test_len: usize,
    pub validation_fraction: f64,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: BacktestReport,
    /// The refit model of each successful row, for the first seed.
    pub models: Vec<Option<FittedModel>>,
    /// Wall time per row in milliseconds, when the observer has a clock.
    pub wall_ms: Vec<Option<f64>>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn median_metrics(all: &[Metrics]) -> Metrics {
    let pick = |f: fn(&Metrics) -> f64| median(&all.iter().map(f).collect::<Vec<_>>());
    let pick_opt = |f: fn(&Metrics) -> Option<f64>| {
        let v: Option<Vec<f64>> = all.iter().map(f).collect();
        v.map(|v| median(&v))
    };
    Metrics {
        mse_train: pick(|m| m.mse_train),
        mse_test: pick(|m| m.mse_test),
        r2_train: pick(|m| m.r2_train),
        r2_test: pick(|m| m.r2_test),
        rmse_test: pick(|m| m.rmse_test),
        mape_test: pick_opt(|m| m.mape_test),
        mase_test: pick_opt(|m| m.mase_test),
    }
}

fn compare_entry(
    entry: &ModelEntry,
    series: &Series,
    n_train: usize,
    validation_fraction: f64,
    observer: &mut dyn Observer,
) -> Result<(ReportRow, FittedModel)> {
    let first_seed = *entry
        .seeds
        .first()
        .ok_or_else(|| contract(format!("model `{}` has no seeds", entry.name)))?;
    let n = series.len();
    let selection = view(series, 0..n_train, Access::Fit, observer)?;
    let grid: Vec<ForecasterSpec> = entry
        .candidates
        .iter()
        .map(|h| ForecasterSpec::new(h.clone(), first_seed))
        .collect();
    let chosen = grid_search_observed(&grid, &selection, validation_fraction, observer)?;
    let hyperparameters = chosen.spec.hyperparameters.clone();

    let train = view(series, 0..n_train, Access::Fit, observer)?;
    let mut results = Vec::new();
    let mut warnings = Vec::new();
    let mut first_model = None;
    let mut first_error = None;
    for &seed in &entry.seeds {
        let spec = ForecasterSpec::new(hyperparameters.clone(), seed);
        let test = view(series, n_train..n, Access::Test, observer)?;
        match score_fit(&spec, &train, &test) {
            Ok(r) => {
                if first_model.is_none() {
                    warnings.extend(r.model.warnings.iter().cloned());
                    first_model = Some(r.model);
                }
                results.push(r.metrics);
            }
            Err(e) => {
                warnings.push(format!("seed {seed}: {e}"));
                first_error.get_or_insert(e);
            }
        }
    }
    let model = match (first_model, first_error) {
        (Some(m), _) => m,
        (None, Some(e)) => return Err(e),
        (None, None) => return Err(contract("no seeds evaluated")),
    };
    let row = ReportRow {
        name: entry.name.clone(),
        hyperparameters: Some(hyperparameters),
        seeds: entry.seeds.clone(),
        validation_mse: Some(chosen.validation_mse),
        mse_test_by_seed: results.iter().map(|m| m.mse_test).collect(),
        metrics: Some(median_metrics(&results)),
        error: None,
        warnings,
    };
    Ok((row, model))
}

/// Tunes and scores every entry on one shared chronological split. A failing
/// entry becomes an error row; the comparison itself only fails when the
/// split is impossible.
pub fn compare_models(
    entries: &[ModelEntry],
    series: &Series,
    test_fraction: f64,
    validation_fraction: f64,
    observer: &mut dyn Observer,
) -> Result<Comparison> {
    let n = series.len();
    let test_len = split_len(n, test_fraction)?;
    let n_train = n - test_len;
    split_len(n_train, validation_fraction)?;

    let mut rows = Vec::with_capacity(entries.len());
    let mut models = Vec::with_capacity(entries.len());
    let mut wall_ms = Vec::with_capacity(entries.len());
    for entry in entries {
        let started = observer.now_ms();
        match compare_entry(entry, series, n_train, validation_fraction, observer) {
            Ok((row, model)) => {
                rows.push(row);
                models.push(Some(model));
            }
            Err(e) => {
                rows.push(ReportRow::failed(&entry.name, e.to_string()));
                models.push(None);
            }
        }
        let finished = observer.now_ms();
        wall_ms.push(started.zip(finished).map(|(a, b)| b - a));
    }
    Ok(Comparison {
        report: BacktestReport {
            schema_version: REPORT_SCHEMA_VERSION,
            note: SELECTION_NOTE.to_string(),
            train_len: n_train,
            test_len,
            validation_fraction,
            rows,
        },
        models,
        wall_ms,
    })
}
