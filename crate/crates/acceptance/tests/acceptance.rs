//! Acceptance criteria 1-11. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero when any criterion fails.

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{Days, NaiveDate};
use epicast::model_file::ModelFile;
use epicast_core::backtest::{compare_models, default_grid, Access, AccessLog, ModelEntry, Observer};
use epicast_core::forecasters::additive::fit_additive;
use epicast_core::forecasters::arima::{
    arima_css_objective, fit_arima, forecast_arima, grid_search_arima, ArimaOrder, ArmaCoefficients,
};
use epicast_core::forecasters::autoreg::{fit_autoreg, forecast_autoreg, sum_of_squares, ArOrder, ArParams};
use epicast_core::forecasters::lstm::{lstm_backward, lstm_forward, LstmConfig, LstmParameters};
use epicast_core::forecasters::mlp::{mlp_gradient, mlp_predict, MlpConfig, MlpParameters};
use epicast_core::forecasters::AdditiveConfig;
use epicast_core::metrics::{fit_score, mape, mase, mse, rmse, ScorePair};
use epicast_core::rng::{seeded, uniform, SeededRng};
use epicast_core::simulate::ArimaProcess;
use epicast_core::transform::{difference_values, integrate_values};
use epicast_core::{fit, ForecasterSpec, Hyperparameters, MinMaxScaler, ScaleState, Series, SeriesKind, Target};
use tempfile::TempDir;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()
}

fn level_series(values: Vec<f64>) -> Series {
    Series::new(values, start(), SeriesKind::Incident, ScaleState::Raw).unwrap()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

fn cli(args: &[&str]) -> u8 {
    let mut argv = vec!["epicast"];
    argv.extend_from_slice(args);
    epicast::cli::run(argv)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Records accesses and keeps a clock.
#[derive(Default)]
struct TimedLog {
    log: AccessLog,
    origin: Option<Instant>,
}

impl Observer for TimedLog {
    fn touched(&mut self, access: Access, indices: Range<usize>) {
        self.log.touched(access, indices);
    }

    fn now_ms(&mut self) -> Option<f64> {
        let origin = *self.origin.get_or_insert_with(Instant::now);
        Some(origin.elapsed().as_secs_f64() * 1e3)
    }
}

// 1. Metric oracles
fn metric_oracles() -> Outcome {
    let t0 = Instant::now();
    let mut rng = seeded(101);
    let mut worst = [0.0f64; 5];
    for _ in 0..1000 {
        let n = 1 + (uniform(&mut rng, 0.0, 40.0) as usize);
        let y: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.5, 100.0)).collect();
        let yhat: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.5, 100.0)).collect();
        let train: Vec<f64> = (0..n + 5).map(|_| uniform(&mut rng, 0.0, 50.0)).collect();
        let sp = ScorePair::new(&y, &yhat).unwrap();

        let mut sq = 0.0;
        let mut abs = 0.0;
        let mut pct = 0.0;
        let mut mean = 0.0;
        for i in 0..n {
            let e = y[i] - yhat[i];
            sq += e * e;
            abs += e.abs();
            pct += (e / y[i]).abs();
            mean += y[i];
        }
        mean /= n as f64;
        let mut sst = 0.0;
        for v in &y {
            sst += (v - mean) * (v - mean);
        }
        let mut naive = 0.0;
        for t in 1..train.len() {
            naive += (train[t] - train[t - 1]).abs();
        }
        naive /= (train.len() - 1) as f64;

        let want_mse = sq / n as f64;
        worst[0] = worst[0].max(rel_err(mse(&sp), want_mse));
        worst[1] = worst[1].max(rel_err(rmse(&sp), want_mse.sqrt()));
        worst[2] = worst[2].max(rel_err(mape(&sp).unwrap(), 100.0 * pct / n as f64));
        worst[3] = worst[3].max(rel_err(mase(&sp, &train).unwrap(), (abs / n as f64) / naive));
        if n > 1 {
            worst[4] = worst[4].max(rel_err(fit_score(&sp).unwrap(), 1.0 - sq / sst));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let max = worst.iter().cloned().fold(0.0, f64::max);
    outcome(
        max <= 1e-12 && secs < 1.0,
        format!(
            "max rel err mse {:.1e} rmse {:.1e} mape {:.1e} mase {:.1e} r2 {:.1e} (limit 1e-12), {secs:.3} s (limit 1 s)",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

// 2. Gradient checks
const FD_EPS: f64 = 1e-5;
const GRAD_TOL: f64 = 1e-4;

/// Relative error with the denominator floored at 1e-6, below which central
/// differences are dominated by rounding.
fn grad_rel(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn randomize(values: impl Iterator<Item = impl std::ops::DerefMut<Target = f64>>, rng: &mut SeededRng, scale: f64) {
    for mut v in values {
        *v = uniform(rng, -scale, scale);
    }
}

fn lstm_probe(seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let config = LstmConfig {
        layers: 2,
        num_units: 2 + (seed % 4) as usize,
        window: 1 + (seed % 6) as usize,
        ..LstmConfig::default()
    };
    let mut params = LstmParameters::initialize(&config, &mut rng);
    randomize(params.iter_mut(), &mut rng, 0.6);
    let window: Vec<f64> = (0..config.window).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    let target = uniform(&mut rng, -1.0, 1.0);
    let loss = |p: &LstmParameters| {
        let (pred, _) = lstm_forward(&window, p).unwrap();
        0.5 * (pred - target) * (pred - target)
    };
    let (pred, cache) = lstm_forward(&window, &params).unwrap();
    let grad: Vec<f64> = lstm_backward(&cache, &params, pred - target).iter().copied().collect();
    let mut worst = 0.0f64;
    for (idx, g) in grad.iter().enumerate() {
        let mut up = params.clone();
        *up.iter_mut().nth(idx).unwrap() += FD_EPS;
        let mut down = params.clone();
        *down.iter_mut().nth(idx).unwrap() -= FD_EPS;
        let fd = (loss(&up) - loss(&down)) / (2.0 * FD_EPS);
        worst = worst.max(grad_rel(*g, fd));
    }
    worst
}

fn mlp_probe(seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let hidden = (seed % 7) as usize;
    let input_dim = 1 + (seed % 9) as usize;
    let mut params = MlpParameters::zeros(input_dim, hidden);
    randomize(params.iter_mut(), &mut rng, 0.8);
    let x: Vec<f64> = (0..input_dim).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    let target = uniform(&mut rng, -1.0, 1.0);
    let loss = |p: &MlpParameters| {
        let pred = mlp_predict(p, &x).unwrap();
        0.5 * (pred - target) * (pred - target)
    };
    let pred = mlp_predict(&params, &x).unwrap();
    let grad: Vec<f64> = mlp_gradient(&params, &x, pred - target).unwrap().iter().copied().collect();
    let mut worst = 0.0f64;
    for (idx, g) in grad.iter().enumerate() {
        let mut up = params.clone();
        *up.iter_mut().nth(idx).unwrap() += FD_EPS;
        let mut down = params.clone();
        *down.iter_mut().nth(idx).unwrap() -= FD_EPS;
        let fd = (loss(&up) - loss(&down)) / (2.0 * FD_EPS);
        worst = worst.max(grad_rel(*g, fd));
    }
    worst
}

fn gradient_checks() -> Outcome {
    let t0 = Instant::now();
    let lstm = (0..50).map(lstm_probe).fold(0.0, f64::max);
    let mlp = (0..50).map(mlp_probe).fold(0.0, f64::max);
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        lstm < GRAD_TOL && mlp < GRAD_TOL && secs < 10.0,
        format!("50 probes each, max rel err LSTM {lstm:.1e}, MLP {mlp:.1e} (limit 1e-4), {secs:.2} s (limit 10 s)"),
    )
}

// 3. Parameter recovery
fn parameter_recovery() -> Outcome {
    let t0 = Instant::now();
    let mut ar2 = 0;
    let mut arima = 0;
    let mut ma1 = 0;
    for seed in 0..20u64 {
        let y = ArimaProcess::ar(&[0.6, -0.3], 0.01).simulate(1000, seed);
        let c = fit_autoreg(&y, ArOrder { p: 2 }).unwrap().params.coefs;
        if (c[0] - 0.6).abs() <= 0.05 && (c[1] + 0.3).abs() <= 0.05 {
            ar2 += 1;
        }
        let y = ArimaProcess::ar(&[0.7], 0.02).integrated(1).simulate(500, seed);
        if let Ok(f) = fit_arima(&y, ArimaOrder::new(1, 1, 0)) {
            if (f.params.coefficients.ar[0] - 0.7).abs() <= 0.07 {
                arima += 1;
            }
        }
        let y = ArimaProcess::ma(&[0.5], 1.0).simulate(1000, seed);
        if let Ok(f) = fit_arima(&y, ArimaOrder::new(0, 0, 1)) {
            if (f.params.coefficients.ma[0] - 0.5).abs() <= 0.08 {
                ma1 += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        ar2 >= 18 && arima >= 18 && ma1 >= 18 && secs < 60.0,
        format!("AR(2) {ar2}/20, ARIMA(1,1,0) {arima}/20, MA(1) {ma1}/20 (need 18 each), {secs:.2} s (limit 60 s)"),
    )
}

// 4. Order selection
fn order_selection() -> Outcome {
    let t0 = Instant::now();
    let mut d_ok = 0;
    let mut p_ok = 0;
    let mut picks = Vec::new();
    for seed in 0..20u64 {
        let y = ArimaProcess::ar(&[0.7], 0.02).integrated(1).simulate(500, seed);
        let series = level_series(y);
        let train = series.slice(0, 400).unwrap();
        let validation = series.slice(400, 500).unwrap();
        let order = grid_search_arima(&train, &validation, 3, 3).unwrap().order;
        d_ok += usize::from(order.d == 1);
        p_ok += usize::from(order.p == 1 || order.p == 2);
        picks.push(format!("({},{},{})", order.p, order.d, order.q));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        d_ok >= 18 && p_ok >= 16 && secs < 120.0,
        format!(
            "d = 1 in {d_ok}/20 (need 18), p in {{1,2}} in {p_ok}/20 (need 16), {secs:.1} s (limit 120 s); picks {}",
            picks.join(" ")
        ),
    )
}

// 5. Model equivalences
fn model_equivalences() -> Outcome {
    let mut worst_arima = 0.0f64;
    for seed in 0..5u64 {
        let y = ArimaProcess::ar(&[0.5, -0.2, 0.1], 0.1).simulate(400, seed);
        for p in 1..=3 {
            let ar = fit_autoreg(&y, ArOrder { p }).unwrap();
            let arima = fit_arima(&y, ArimaOrder::new(p, 0, 0)).unwrap();
            let c = &arima.params.coefficients;
            worst_arima = worst_arima.max((c.intercept - ar.params.intercept).abs());
            for (a, b) in c.ar.iter().zip(&ar.params.coefs) {
                worst_arima = worst_arima.max((a - b).abs());
            }
            let fa = forecast_arima(&arima.params, &arima.diff_state, 20).unwrap();
            let fb = forecast_autoreg(&ar.params, &y, 20);
            for (a, b) in fa.iter().zip(&fb) {
                worst_arima = worst_arima.max((a - b).abs());
            }
        }
    }

    let mut worst_linear = 0.0f64;
    let mut rng = seeded(55);
    for _ in 0..5 {
        let n = 30 + (uniform(&mut rng, 0.0, 100.0) as usize);
        let y: Vec<f64> = (0..n).map(|t| 0.3 + 0.01 * t as f64 + uniform(&mut rng, -0.1, 0.1)).collect();
        let config = AdditiveConfig {
            n_changepoints: 0,
            changepoint_penalty: 1.0,
            fourier_order: 0,
            period_days: 7.0,
        };
        let f = fit_additive(&y, &config).unwrap();
        let tbar = (n as f64 - 1.0) / 2.0;
        let ybar = y.iter().sum::<f64>() / n as f64;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for (t, v) in y.iter().enumerate() {
            sxy += (t as f64 - tbar) * (v - ybar);
            sxx += (t as f64 - tbar) * (t as f64 - tbar);
        }
        let slope = sxy / sxx;
        let intercept = ybar - slope * tbar;
        worst_linear = worst_linear
            .max((f.params.slope() - slope).abs())
            .max((f.params.intercept() - intercept).abs());
        for (t, v) in f.fitted.iter().enumerate() {
            worst_linear = worst_linear.max((v - (intercept + slope * t as f64)).abs());
        }
    }

    let mut css_exact = true;
    let mut rng = seeded(77);
    for seed in 0..20u64 {
        let y = ArimaProcess::ar(&[0.4, 0.2], 0.3).simulate(200, seed);
        let p = 1 + (seed % 4) as usize;
        let coefs: Vec<f64> = (0..p).map(|_| uniform(&mut rng, -0.5, 0.5)).collect();
        let intercept = uniform(&mut rng, -0.2, 0.2);
        let css = arima_css_objective(
            &ArmaCoefficients {
                intercept,
                ar: coefs.clone(),
                ma: Vec::new(),
            },
            &y,
        );
        css_exact &= css == sum_of_squares(&ArParams { intercept, coefs }, &y);
    }

    outcome(
        worst_arima <= 1e-6 && worst_linear <= 1e-10 && css_exact,
        format!(
            "ARIMA(p,0,0) vs AR(p) max diff {worst_arima:.1e} (limit 1e-6); additive vs OLS {worst_linear:.1e} (limit 1e-10); CSS q=0 == AR SSQ: {css_exact}"
        ),
    )
}

// 6. Round trips
fn round_trips() -> Outcome {
    let mut rng = seeded(66);
    let mut scale_err = 0.0f64;
    let mut diff_exact = true;
    let mut cum_exact = true;
    for _ in 0..200 {
        let n = 3 + (uniform(&mut rng, 0.0, 60.0) as usize);
        let x: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1e4, 1e5)).collect();
        let scaler = MinMaxScaler::fit(&x).unwrap();
        for (a, b) in x.iter().zip(scaler.inverse_values(&scaler.scale_values(&x))) {
            scale_err = scale_err.max((a - b).abs() / a.abs().max(1.0));
        }

        let ints: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1000.0, 1000.0).round()).collect();
        for d in 0..=2 {
            let (diffed, state) = difference_values(&ints, d).unwrap();
            diff_exact &= integrate_values(&diffed, &state).unwrap() == ints;
        }

        let mut acc = 0.0;
        let cum: Vec<f64> = (0..n)
            .map(|_| {
                acc += uniform(&mut rng, 0.0, 500.0).round();
                acc
            })
            .collect();
        let series = Series::cumulative(cum.clone(), start()).unwrap();
        let back = series.cumulative_to_incident().unwrap().incident_to_cumulative().unwrap();
        cum_exact &= back.values() == cum.as_slice();
    }

    let series = epicast::bundled_dataset().extract_series(Target::Confirmed);
    let mut model_exact = true;
    for h in [
        Hyperparameters::Autoreg(ArOrder { p: 5 }),
        Hyperparameters::Arima(ArimaOrder::new(2, 1, 1)),
        Hyperparameters::Lstm(LstmConfig {
            num_units: 4,
            epochs: 3,
            anchored: true,
            ..LstmConfig::default()
        }),
        Hyperparameters::Mlp(MlpConfig {
            hidden_units: 4,
            epochs: 20,
            seasonal: true,
            ..MlpConfig::default()
        }),
        Hyperparameters::Additive(AdditiveConfig::default()),
    ] {
        let model = fit(&ForecasterSpec::new(h, 9), &series).unwrap().model;
        let file = ModelFile::new(Target::Confirmed, model);
        let back = ModelFile::from_json(&file.to_json(), Path::new("m.json")).unwrap();
        let a = file.model.forecast_raw(180).unwrap();
        let b = back.model.forecast_raw(180).unwrap();
        model_exact &= a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    }

    outcome(
        scale_err <= 1e-12 && diff_exact && cum_exact && model_exact,
        format!(
            "scale/inverse {scale_err:.1e} (limit 1e-12); difference/integrate exact d<=2: {diff_exact}; \
             save/load bit-identical forecasts (5 kinds): {model_exact}; cumulative/incident exact: {cum_exact}"
        ),
    )
}

// 7. Directional comparison on the bundled data
struct Directional {
    outcome: Outcome,
    log: AccessLog,
    n_train: usize,
}

fn directional_comparison() -> Directional {
    let t0 = Instant::now();
    let series = epicast::bundled_dataset().extract_series(Target::Confirmed);
    let entries = vec![
        ModelEntry::new("lstm", default_grid(epicast_core::ModelKind::Lstm), (0..10).collect()),
        ModelEntry::new("arima", default_grid(epicast_core::ModelKind::Arima), vec![0]),
        ModelEntry::new("autoreg", default_grid(epicast_core::ModelKind::Autoreg), vec![0]),
    ];
    let mut observer = TimedLog::default();
    let comparison = compare_models(&entries, &series, 0.2, 0.2, &mut observer).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let rows = &comparison.report.rows;
    let test_mse = |i: usize| rows[i].metrics.as_ref().map(|m| m.mse_test);
    let detail_of = |i: usize| match (&rows[i].hyperparameters, test_mse(i)) {
        (Some(h), Some(m)) => format!("{} [{h}] {m:.5}", rows[i].name),
        _ => format!("{} failed: {}", rows[i].name, rows[i].error.clone().unwrap_or_default()),
    };
    let pass = match (test_mse(0), test_mse(1), test_mse(2)) {
        (Some(l), Some(a), Some(r)) => l < a && l < r && secs < 900.0,
        _ => false,
    };
    Directional {
        outcome: outcome(
            pass,
            format!(
                "confirmed, test MSE: {} (median of 10 seeds) vs {} vs {}; need LSTM lowest; {:.0} s (limit 900 s)",
                detail_of(0),
                detail_of(1),
                detail_of(2),
                secs
            ),
        ),
        log: observer.log,
        n_train: comparison.report.train_len,
    }
}

// 8. Horizon contract
fn read_rows(path: &Path) -> Vec<(NaiveDate, String, f64)> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].to_string(), f[3].parse().unwrap())
        })
        .collect()
}

fn horizon_contract(dir: &Path) -> Outcome {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../epicast/data/iran_covid19.csv");
    let out = dir.join("horizon");
    let mut models: Vec<PathBuf> = Vec::new();
    for model in ["autoreg", "additive"] {
        if cli(&["fit", "--input", data, "--model", model, "--target", "confirmed,deaths,recovered", "--out", s(&out)]) != 0 {
            return outcome(false, format!("fit --model {model} failed"));
        }
        for t in ["confirmed", "deaths", "recovered"] {
            let label = if model == "additive" { "prophet" } else { model };
            models.push(out.join(format!("{label}-{t}.model.json")));
        }
    }
    let mut args = vec!["forecast", "--horizon", "180", "--out", s(&out)];
    args.extend(models.iter().map(|p| s(p)));
    if cli(&args) != 0 {
        return outcome(false, "forecast failed");
    }
    let first = NaiveDate::from_ymd_opt(2021, 3, 13).unwrap();
    let mut ok = true;
    let mut files = 0;
    for label in ["autoreg", "prophet"] {
        for t in ["confirmed", "deaths", "recovered"] {
            let rows = read_rows(&out.join(format!("forecast-{label}-{t}.csv")));
            files += 1;
            ok &= rows.len() == 180;
            ok &= rows.iter().enumerate().all(|(i, (d, target, v))| {
                *d == first + Days::new(i as u64) && target == t && *v >= 0.0
            });
        }
    }
    outcome(
        ok,
        format!("{files} forecast files (2 models x 3 targets): 180 rows each, dates 2021-03-13..2021-09-08 contiguous, no negatives: {ok}"),
    )
}

// 9. Deaths sanity band
fn deaths_band(dir: &Path) -> Outcome {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../epicast/data/iran_covid19.csv");
    let out = dir.join("band");
    if cli(&["fit", "--input", data, "--model", "arima", "--grid", "default", "--target", "deaths", "--out", s(&out)]) != 0 {
        return outcome(false, "fit failed");
    }
    if cli(&["forecast", s(&out.join("arima-deaths.model.json")), "--horizon", "180", "--out", s(&out)]) != 0 {
        return outcome(false, "forecast failed");
    }
    let rows = read_rows(&out.join("forecast-arima-deaths.csv"));
    let (date, _, last) = rows.last().cloned().unwrap();
    let midpoint = (65_905.0 + 76_403.0) / 2.0;
    let (lo, hi) = (0.5 * midpoint, 2.0 * midpoint);
    outcome(
        rows.len() == 180 && (lo..=hi).contains(&last),
        format!("tuned ARIMA, cumulative deaths on {date}: {last:.0}, band [{lo:.0}, {hi:.0}]"),
    )
}

// 10. Determinism
fn determinism(dir: &Path) -> Outcome {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../epicast/data/iran_covid19.csv");
    let mut files: Vec<Vec<Vec<u8>>> = Vec::new();
    let names = [
        "arima-deaths.model.json",
        "lstm-confirmed.model.json",
        "mlp-recovered.model.json",
        "backtest-confirmed.json",
        "backtest-confirmed.txt",
    ];
    for run in ["run-a", "run-b"] {
        let out = dir.join(run);
        let codes = [
            cli(&["fit", "--input", data, "--model", "arima", "--grid", "default", "--target", "deaths", "--out", s(&out)]),
            cli(&["fit", "--input", data, "--model", "lstm", "--seed", "4", "--out", s(&out)]),
            cli(&["fit", "--input", data, "--model", "mlp", "--target", "recovered", "--seed", "4", "--out", s(&out)]),
            cli(&["backtest", "--input", data, "--model", "autoreg,additive,mlp", "--seeds", "3", "--out", s(&out)]),
        ];
        if codes.iter().any(|c| *c != 0) {
            return outcome(false, format!("{run}: exit codes {codes:?}"));
        }
        files.push(names.iter().map(|n| fs::read(out.join(n)).unwrap()).collect());
    }
    let differing: Vec<&str> = names
        .iter()
        .zip(files[0].iter().zip(&files[1]))
        .filter(|(_, (a, b))| a != b)
        .map(|(n, _)| *n)
        .collect();
    outcome(
        differing.is_empty(),
        format!("{} outputs compared across two runs; differing: {:?}", names.len(), differing),
    )
}

// 11. Leakage audit
fn audit(log: &AccessLog, n_train: usize) -> (bool, usize, usize) {
    let mut ok = true;
    let mut selection = 0;
    let mut tests = 0;
    for (access, range) in &log.entries {
        match access {
            Access::Fit | Access::Validate => {
                selection += 1;
                ok &= range.end <= n_train;
            }
            Access::Test => {
                tests += 1;
                ok &= range.start >= n_train;
            }
        }
    }
    (ok && tests > 0 && log.selection_end() <= n_train, selection, tests)
}

fn leakage_audit(directional: &Directional) -> Outcome {
    let series = epicast::bundled_dataset().extract_series(Target::Deaths);
    let entries = vec![
        ModelEntry::new("additive", default_grid(epicast_core::ModelKind::Additive), vec![0]),
        ModelEntry::new("mlp", default_grid(epicast_core::ModelKind::Mlp), vec![0, 1]),
        ModelEntry::new("autoreg", default_grid(epicast_core::ModelKind::Autoreg), vec![0]),
    ];
    let mut log = AccessLog::default();
    let comparison = compare_models(&entries, &series, 0.2, 0.2, &mut log).unwrap();
    let (a_ok, a_sel, a_test) = audit(&directional.log, directional.n_train);
    let (b_ok, b_sel, b_test) = audit(&log, comparison.report.train_len);
    outcome(
        a_ok && b_ok,
        format!(
            "all five kinds audited: {} fit/validation and {} test accesses; every selection index < {} and every test index >= it",
            a_sel + b_sel,
            a_test + b_test,
            directional.n_train
        ),
    )
}

fn report(name: &'static str, o: Outcome, results: &mut Vec<(&'static str, bool)>) {
    println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    results.push((name, o.pass));
}

fn main() {
    let dir = TempDir::new().unwrap();
    let mut results = Vec::new();
    report("1 metric oracles", metric_oracles(), &mut results);
    report("2 gradient checks", gradient_checks(), &mut results);
    report("3 parameter recovery", parameter_recovery(), &mut results);
    report("4 order selection", order_selection(), &mut results);
    report("5 model equivalences", model_equivalences(), &mut results);
    report("6 round trips", round_trips(), &mut results);
    let directional = directional_comparison();
    let seven = outcome(directional.outcome.pass, directional.outcome.detail.clone());
    report("7 directional comparison", seven, &mut results);
    report("8 horizon contract", horizon_contract(dir.path()), &mut results);
    report("9 deaths sanity band", deaths_band(dir.path()), &mut results);
    report("10 determinism", determinism(dir.path()), &mut results);
    report("11 no-leakage audit", leakage_audit(&directional), &mut results);

    let failed: Vec<&str> = results.iter().filter(|(_, pass)| !pass).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
