//! Tidy `date,series_name,value` files merging observed history and forecasts.

use chrono::NaiveDate;
use epicast_core::{EpidemicDataset, Target};

use crate::error::{CliError, CliResult};
use crate::forecast_csv::ForecastRow;

pub const PLOT_HEADER: [&str; 3] = ["date", "series_name", "value"];
pub const SERIES_NAMES: [&str; 6] = ["observed", "prophet", "lstm", "autoreg", "arima", "mlp"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub date: NaiveDate,
    pub series_name: String,
    pub value: f64,
}

/// The target shared by every forecast set; `requested` wins when given and
/// must agree with all rows.
pub fn common_target(requested: Option<Target>, forecasts: &[Vec<ForecastRow>]) -> CliResult<Target> {
    let mut target = requested;
    for row in forecasts.iter().flatten() {
        match target {
            None => target = Some(row.target),
            Some(t) if t != row.target => {
                return Err(CliError::usage(format!(
                    "forecast inputs mix targets `{t}` and `{}`",
                    row.target
                )))
            }
            Some(_) => {}
        }
    }
    Ok(target.unwrap_or(Target::Confirmed))
}

/// Observed rows first, then each forecast set in input order.
pub fn plot_rows(dataset: &EpidemicDataset, target: Target, forecasts: &[Vec<ForecastRow>]) -> CliResult<Vec<PlotRow>> {
    let mut rows: Vec<PlotRow> = dataset
        .records()
        .iter()
        .map(|r| PlotRow {
            date: r.date,
            series_name: "observed".to_string(),
            value: r.get(target) as f64,
        })
        .collect();
    for set in forecasts {
        for f in set {
            if !SERIES_NAMES[1..].contains(&f.model.as_str()) {
                return Err(CliError::usage(format!("unknown model `{}` in forecast input", f.model)));
            }
            rows.push(PlotRow {
                date: f.date,
                series_name: f.model.clone(),
                value: f.point_forecast,
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[PlotRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PLOT_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([r.date.to_string(), r.series_name.clone(), format!("{:.6}", r.value)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub fn plot_file_name(target: Target) -> String {
    format!("plot-{target}.csv")
}
