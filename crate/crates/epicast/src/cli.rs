//! Argument parsing and the five subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use epicast_core::backtest::{compare_models, default_grid, grid_search, ModelEntry};
use epicast_core::forecasters::{AdditiveConfig, ArOrder, ArimaOrder, LstmConfig, MlpConfig};
use epicast_core::metrics::{fit_score, mse, ScorePair};
use epicast_core::{fit, ForecasterSpec, Hyperparameters, ModelKind, ParseOptions, Target};

use crate::config::{load_grid, parse_models, parse_targets, ConfigFile, GridChoice, RunConfig};
use crate::error::{CliError, CliResult};
use crate::forecast_csv::{self, forecast_file_name, forecast_rows};
use crate::model_file::{load_model, model_file_name, save_model, ModelFile};
use crate::plotdata::{self, common_target, plot_file_name, plot_rows};
use crate::report::{render_table, sidecar_name, Metadata, StructuredReport};
use crate::{load_dataset, write_file, Clock};

pub const DEFAULT_HORIZON: usize = 180;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_SEEDS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "epicast", version, about = "Forecast cumulative epidemic counts and compare forecasters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a dataset and report its span and column monotonicity.
    Validate(ValidateArgs),
    /// Fit one model per target and write model files.
    Fit(RunArgs),
    /// Forecast from model files into CSV.
    Forecast(ForecastArgs),
    /// Tune and score several models on a shared holdout split.
    Backtest(RunArgs),
    /// Merge observed counts and forecasts into one plot-ready CSV.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub allow_corrections: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated list of confirmed, deaths, recovered.
    #[arg(long)]
    pub target: Option<String>,
    /// Model kind; a comma-separated list for backtest.
    #[arg(long)]
    pub model: Option<String>,
    /// Grid file, or `default` for the built-in search space.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Refit seeds for the neural models in a backtest.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub allow_corrections: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Model files written by `fit`.
    #[arg(required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Forecast CSV files written by `forecast`.
    pub forecasts: Vec<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub allow_corrections: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult<u8> {
    match command {
        Command::Validate(a) => cmd_validate(a),
        Command::Fit(a) => cmd_fit(resolve(a)?),
        Command::Forecast(a) => cmd_forecast(a),
        Command::Backtest(a) => cmd_backtest(resolve(a)?),
        Command::Plotdata(a) => cmd_plotdata(a),
    }
}

fn load_config(path: &Option<PathBuf>) -> CliResult<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn require_input(flag: Option<PathBuf>, file: Option<PathBuf>) -> CliResult<PathBuf> {
    flag.or(file)
        .ok_or_else(|| CliError::usage("no input dataset: pass --input or set data.input in the config file"))
}

fn check_fraction(name: &str, f: f64) -> CliResult<f64> {
    if f > 0.0 && f < 1.0 {
        Ok(f)
    } else {
        Err(CliError::usage(format!("{name} must lie in (0, 1), got {f}")))
    }
}

/// Merges flags over the config file over built-in defaults.
pub fn resolve(args: RunArgs) -> CliResult<RunConfig> {
    let file = load_config(&args.config)?;
    let input = require_input(args.input, file.data.input)?;
    let targets = match args.target {
        Some(t) => parse_targets(&[t])?,
        None => match file.data.target {
            Some(t) => parse_targets(&t.into_vec())?,
            None => vec![Target::Confirmed],
        },
    };
    if targets.is_empty() {
        return Err(CliError::usage("no target given"));
    }
    let models = match args.model {
        Some(m) => parse_models(&[m])?,
        None => match file.run.models {
            Some(m) => parse_models(&m.into_vec())?,
            None => ModelKind::ALL.to_vec(),
        },
    };
    if models.is_empty() {
        return Err(CliError::usage("no model given"));
    }
    let horizon = args.horizon.or(file.run.horizon).unwrap_or(DEFAULT_HORIZON);
    if horizon == 0 {
        return Err(CliError::usage("horizon must be at least 1"));
    }
    let seeds = args.seeds.or(file.run.seeds).unwrap_or(DEFAULT_SEEDS);
    if seeds == 0 {
        return Err(CliError::usage("seeds must be at least 1"));
    }
    Ok(RunConfig {
        input,
        targets,
        models,
        grid: args.grid.or(file.run.grid).map(|g| GridChoice::parse(&g)),
        horizon,
        test_fraction: check_fraction(
            "test fraction",
            args.test_fraction.or(file.run.test_fraction).unwrap_or(DEFAULT_TEST_FRACTION),
        )?,
        validation_fraction: check_fraction(
            "validation fraction",
            args.validation_fraction
                .or(file.run.validation_fraction)
                .unwrap_or(epicast_core::backtest::VALIDATION_FRACTION),
        )?,
        seed: args.seed.or(file.run.seed).unwrap_or(0),
        seeds,
        out: args.out.or(file.run.out).unwrap_or_else(|| PathBuf::from(".")),
        allow_corrections: args.allow_corrections || file.data.allow_corrections.unwrap_or(false),
    })
}

/// Hyperparameters used by `fit` when no grid is requested.
pub fn default_hyperparameters(kind: ModelKind) -> Hyperparameters {
    match kind {
        ModelKind::Autoreg => Hyperparameters::Autoreg(ArOrder { p: 7 }),
        ModelKind::Arima => Hyperparameters::Arima(ArimaOrder::new(2, 1, 2)),
        ModelKind::Lstm => Hyperparameters::Lstm(LstmConfig::default()),
        ModelKind::Mlp => Hyperparameters::Mlp(MlpConfig::default()),
        ModelKind::Additive => Hyperparameters::Additive(AdditiveConfig::default()),
    }
}

/// Candidate list for `kind`: grid file entries of that kind, the built-in
/// grid, or the single default.
fn candidates(kind: ModelKind, grid: &Option<GridChoice>, file_grid: &[Hyperparameters]) -> Vec<Hyperparameters> {
    match grid {
        None => vec![default_hyperparameters(kind)],
        Some(GridChoice::Default) => default_grid(kind),
        Some(GridChoice::File(_)) => {
            let own: Vec<_> = file_grid.iter().filter(|h| h.kind() == kind).cloned().collect();
            if own.is_empty() {
                default_grid(kind)
            } else {
                own
            }
        }
    }
}

fn file_grid(grid: &Option<GridChoice>) -> CliResult<Vec<Hyperparameters>> {
    match grid {
        Some(GridChoice::File(p)) => load_grid(p),
        _ => Ok(Vec::new()),
    }
}

fn options(allow_corrections: bool) -> ParseOptions {
    ParseOptions { allow_corrections }
}

fn write_sidecar<C: serde::Serialize>(out: &Path, output: &str, meta: &Metadata<'_, C>) -> CliResult<()> {
    write_file(&out.join(sidecar_name(output)), meta.to_json().as_bytes())
}

fn cmd_validate(args: ValidateArgs) -> CliResult<u8> {
    let file = load_config(&args.config)?;
    let input = require_input(args.input, file.data.input)?;
    let allow = args.allow_corrections || file.data.allow_corrections.unwrap_or(false);
    let ds = load_dataset(&input, options(allow))?;
    println!("{} records, {}..{}", ds.len(), ds.first_date(), ds.last_date());
    for target in Target::ALL {
        let corrections = ds.corrections(target);
        match corrections.first() {
            None => println!("{target}: non-decreasing"),
            Some(first) => println!(
                "{target}: {} correction(s), first on {first} (allowed)",
                corrections.len()
            ),
        }
    }
    Ok(0)
}

fn cmd_fit(config: RunConfig) -> CliResult<u8> {
    let started = Instant::now();
    if config.models.len() != 1 {
        return Err(CliError::usage("fit takes exactly one --model"));
    }
    let kind = config.models[0];
    let ds = load_dataset(&config.input, options(config.allow_corrections))?;
    let from_file = file_grid(&config.grid)?;
    let grid = candidates(kind, &config.grid, &from_file);

    let mut outputs = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for &target in &config.targets {
        let series = ds.extract_series(target);
        let mut hyperparameters = grid[0].clone();
        if config.grid.is_some() {
            let specs: Vec<_> = grid
                .iter()
                .map(|h| ForecasterSpec::new(h.clone(), config.seed))
                .collect();
            let chosen = grid_search(&specs, &series, config.validation_fraction).map_err(CliError::Fit)?;
            hyperparameters = chosen.spec.hyperparameters;
            let _ = writeln!(
                stdout,
                "{target}: selected {kind} {hyperparameters} ({} of {} candidates), validation MSE {:.4e}",
                chosen.index + 1,
                grid.len(),
                chosen.validation_mse
            );
        }
        let spec = ForecasterSpec::new(hyperparameters, config.seed);
        let fitted = fit(&spec, &series).map_err(CliError::Fit)?;
        let scaled = fitted.model.scaler.scale_values(series.values());
        let ins = &fitted.in_sample;
        let pair = ScorePair::new(&scaled[ins.offset..], &ins.fitted).map_err(CliError::Fit)?;
        let r2 = fit_score(&pair).map_or_else(|e| format!("undefined ({e})"), |v| format!("{v:.4}"));
        let _ = writeln!(
            stdout,
            "{target}: {kind} {} train MSE {:.4e}, train R2 {r2}",
            spec.hyperparameters,
            mse(&pair)
        );
        for w in &fitted.model.warnings {
            eprintln!("warning: {target}: {w}");
        }

        let file = ModelFile::new(target, fitted.model);
        let name = model_file_name(&file);
        let path = config.out.join(&name);
        save_model(&path, &file)?;
        let _ = writeln!(stdout, "wrote {}", path.display());
        outputs.push(name);
    }
    let wall = started.elapsed().as_secs_f64() * 1e3;
    for name in &outputs {
        write_sidecar(&config.out, name, &Metadata::new("fit", &config, outputs.clone(), wall))?;
    }
    Ok(0)
}

#[derive(serde::Serialize)]
struct ForecastConfig<'a> {
    models: &'a [PathBuf],
    horizon: usize,
    out: &'a Path,
}

fn cmd_forecast(args: ForecastArgs) -> CliResult<u8> {
    let started = Instant::now();
    let file = load_config(&args.config)?;
    let horizon = args.horizon.or(file.run.horizon).unwrap_or(DEFAULT_HORIZON);
    if horizon == 0 {
        return Err(CliError::usage("horizon must be at least 1"));
    }
    let out = args.out.or(file.run.out).unwrap_or_else(|| PathBuf::from("."));
    let mut outputs = Vec::new();
    for path in &args.models {
        let model = load_model(path)?;
        let (rows, floored) = forecast_rows(&model, horizon)?;
        for f in &floored {
            eprintln!(
                "floored {} {} {} forecast {:.6} to 0",
                f.date,
                model.target,
                model.model.kind().label(),
                f.raw
            );
        }
        let name = forecast_file_name(&model);
        let dest = out.join(&name);
        write_file(&dest, forecast_csv::to_csv(&rows).as_bytes())?;
        println!("wrote {} ({} rows)", dest.display(), rows.len());
        outputs.push(name);
    }
    let config = ForecastConfig {
        models: &args.models,
        horizon,
        out: &out,
    };
    let wall = started.elapsed().as_secs_f64() * 1e3;
    for name in &outputs {
        write_sidecar(&out, name, &Metadata::new("forecast", &config, outputs.clone(), wall))?;
    }
    Ok(0)
}

fn backtest_entries(config: &RunConfig, from_file: &[Hyperparameters]) -> Vec<ModelEntry> {
    let grid = config.grid.clone().or(Some(GridChoice::Default));
    config
        .models
        .iter()
        .map(|&kind| {
            let seeds: Vec<u64> = match kind {
                ModelKind::Lstm | ModelKind::Mlp => (0..config.seeds as u64).map(|i| config.seed + i).collect(),
                _ => vec![config.seed],
            };
            ModelEntry::new(kind.as_str(), candidates(kind, &grid, from_file), seeds)
        })
        .collect()
}

fn cmd_backtest(config: RunConfig) -> CliResult<u8> {
    let started = Instant::now();
    let ds = load_dataset(&config.input, options(config.allow_corrections))?;
    let from_file = file_grid(&config.grid)?;
    let entries = backtest_entries(&config, &from_file);

    let mut outputs = Vec::new();
    let mut model_wall_ms = Vec::new();
    let mut all_targets_ok = true;
    for &target in &config.targets {
        let series = ds.extract_series(target);
        let mut clock = Clock::default();
        let comparison = compare_models(
            &entries,
            &series,
            config.test_fraction,
            config.validation_fraction,
            &mut clock,
        )
        .map_err(CliError::Fit)?;
        let report = &comparison.report;
        let table = render_table(report);
        println!("{target} (train {}, test {})", report.train_len, report.test_len);
        print!("{table}");

        let text_name = format!("backtest-{target}.txt");
        let json_name = format!("backtest-{target}.json");
        write_file(&config.out.join(&text_name), table.as_bytes())?;
        let structured = StructuredReport::new(target, config.test_fraction, report);
        write_file(&config.out.join(&json_name), structured.to_json().as_bytes())?;
        outputs.push(text_name);
        outputs.push(json_name);

        for (row, ms) in report.rows.iter().zip(&comparison.wall_ms) {
            model_wall_ms.push((format!("{target}/{}", row.name), *ms));
            if let Some(e) = &row.error {
                eprintln!("warning: {target}: {} failed: {e}", row.name);
            }
        }
        if report.rows.iter().all(|r| r.error.is_some()) {
            all_targets_ok = false;
        }
    }
    let mut meta = Metadata::new(
        "backtest",
        &config,
        outputs,
        started.elapsed().as_secs_f64() * 1e3,
    );
    meta.model_wall_ms = model_wall_ms;
    write_file(&config.out.join("backtest.meta.json"), meta.to_json().as_bytes())?;
    Ok(if all_targets_ok { 0 } else { 3 })
}

#[derive(serde::Serialize)]
struct PlotConfig<'a> {
    input: &'a Path,
    forecasts: &'a [PathBuf],
    target: Target,
    out: &'a Path,
    allow_corrections: bool,
}

fn cmd_plotdata(args: PlotArgs) -> CliResult<u8> {
    let started = Instant::now();
    let file = load_config(&args.config)?;
    let input = require_input(args.input, file.data.input)?;
    let allow = args.allow_corrections || file.data.allow_corrections.unwrap_or(false);
    let requested = match args.target {
        Some(t) => parse_targets(&[t])?,
        None => match file.data.target {
            Some(t) => parse_targets(&t.into_vec())?,
            None => Vec::new(),
        },
    };
    if requested.len() > 1 {
        return Err(CliError::usage("plotdata takes a single target"));
    }
    let ds = load_dataset(&input, options(allow))?;
    let forecasts = args
        .forecasts
        .iter()
        .map(|p| forecast_csv::read_forecast(p))
        .collect::<CliResult<Vec<_>>>()?;
    let target = common_target(requested.first().copied(), &forecasts)?;
    let rows = plot_rows(&ds, target, &forecasts)?;
    let out = args.out.or(file.run.out).unwrap_or_else(|| PathBuf::from("."));
    let name = plot_file_name(target);
    let dest = out.join(&name);
    write_file(&dest, plotdata::to_csv(&rows).as_bytes())?;
    println!("wrote {} ({} rows)", dest.display(), rows.len());
    let config = PlotConfig {
        input: &input,
        forecasts: &args.forecasts,
        target,
        out: &out,
        allow_corrections: allow,
    };
    let meta = Metadata::new("plotdata", &config, vec![name.clone()], started.elapsed().as_secs_f64() * 1e3);
    write_sidecar(&out, &name, &meta)?;
    Ok(0)
}
