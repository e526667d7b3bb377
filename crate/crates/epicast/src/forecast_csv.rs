//! `date,target,model,point_forecast` files.

use std::fs;
use std::path::Path;

use chrono::{Days, NaiveDate};
use epicast_core::Target;

use crate::error::{CliError, CliResult};
use crate::model_file::ModelFile;

pub const FORECAST_HEADER: [&str; 4] = ["date", "target", "model", "point_forecast"];

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    pub date: NaiveDate,
    pub target: Target,
    pub model: String,
    pub point_forecast: f64,
}

/// A forecast value raised to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Floored {
    pub date: NaiveDate,
    pub raw: f64,
}

/// `horizon` raw-scale forecasts dated daily after the model's last training
/// day, with negative values floored at zero.
pub fn forecast_rows(file: &ModelFile, horizon: usize) -> CliResult<(Vec<ForecastRow>, Vec<Floored>)> {
    if horizon == 0 {
        return Err(CliError::usage("horizon must be at least 1"));
    }
    let values = file.model.forecast_raw(horizon).map_err(CliError::Fit)?;
    let mut rows = Vec::with_capacity(horizon);
    let mut floored = Vec::new();
    for (i, v) in values.into_iter().enumerate() {
        let date = file
            .model
            .last_date
            .checked_add_days(Days::new(i as u64 + 1))
            .ok_or_else(|| CliError::usage("forecast dates overflow the calendar"))?;
        let point_forecast = if v < 0.0 {
            floored.push(Floored { date, raw: v });
            0.0
        } else {
            v
        };
        rows.push(ForecastRow {
            date,
            target: file.target,
            model: file.model.kind().label().to_string(),
            point_forecast,
        });
    }
    Ok((rows, floored))
}

pub fn to_csv(rows: &[ForecastRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FORECAST_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.date.to_string(),
            r.target.to_string(),
            r.model.clone(),
            format!("{:.6}", r.point_forecast),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub fn parse_csv(text: &str, path: &Path) -> CliResult<Vec<ForecastRow>> {
    let bad = |message: String| CliError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(FORECAST_HEADER) {
        return Err(bad(format!("expected header `{}`", FORECAST_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| bad(format!("line {line}: {e}")))?;
        let date = record[0]
            .parse()
            .map_err(|e| bad(format!("line {line}: bad date `{}`: {e}", &record[0])))?;
        let target = record[1].parse().map_err(|e| bad(format!("line {line}: {e}")))?;
        let point_forecast = record[3]
            .parse()
            .map_err(|e| bad(format!("line {line}: bad value `{}`: {e}", &record[3])))?;
        rows.push(ForecastRow {
            date,
            target,
            model: record[2].to_string(),
            point_forecast,
        });
    }
    Ok(rows)
}

pub fn read_forecast(path: &Path) -> CliResult<Vec<ForecastRow>> {
    if !path.exists() {
        return Err(CliError::usage(format!("forecast file {} does not exist", path.display())));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_csv(&text, path)
}

/// `forecast-<label>-<target>.csv`.
pub fn forecast_file_name(file: &ModelFile) -> String {
    format!("forecast-{}-{}.csv", file.model.kind().label(), file.target)
}
