//! Daily cumulative count tables and the univariate series cut from them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// One of the three cumulative columns of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Confirmed,
    Deaths,
    Recovered,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Confirmed, Target::Deaths, Target::Recovered];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Confirmed => "confirmed",
            Target::Deaths => "deaths",
            Target::Recovered => "recovered",
        }
    }

    fn column(self) -> &'static str {
        match self {
            Target::Confirmed => "Confirmed",
            Target::Deaths => "Deaths",
            Target::Recovered => "Recovered",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "confirmed" => Ok(Target::Confirmed),
            "deaths" => Ok(Target::Deaths),
            "recovered" => Ok(Target::Recovered),
            other => Err(contract(format!("unknown target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub date: NaiveDate,
    pub confirmed: u64,
    pub deaths: u64,
    pub recovered: u64,
}

impl Record {
    pub fn get(&self, target: Target) -> u64 {
        match target {
            Target::Confirmed => self.confirmed,
            Target::Deaths => self.deaths,
            Target::Recovered => self.recovered,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept decreasing cumulative counts (reporting corrections).
    pub allow_corrections: bool,
}

/// Validated daily table: contiguous dates, non-negative counts, and (unless
/// corrections are allowed) non-decreasing cumulative columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpidemicDataset {
    records: Vec<Record>,
    allow_corrections: bool,
}

impl EpidemicDataset {
    pub fn from_records(records: Vec<Record>, options: ParseOptions) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Structural("empty dataset".into()));
        }
        for pair in records.windows(2) {
            let expected = pair[0].date.checked_add_days(Days::new(1));
            if Some(pair[1].date) != expected {
                let what = if pair[1].date <= pair[0].date {
                    "duplicate or out-of-order date"
                } else {
                    "date gap"
                };
                return Err(Error::Structural(format!(
                    "{what} at {} (previous row {})",
                    pair[1].date, pair[0].date
                )));
            }
        }
        let dataset = EpidemicDataset {
            records,
            allow_corrections: options.allow_corrections,
        };
        if !options.allow_corrections {
            for target in Target::ALL {
                if let Some(err) = dataset.first_correction(target) {
                    return Err(err);
                }
            }
        }
        Ok(dataset)
    }

    /// Parses `Date,Confirmed,Deaths,Recovered` text. Header names match
    /// case-insensitively in any order; LF and CRLF are both accepted.
    pub fn parse_csv(text: &str, options: ParseOptions) -> Result<Self> {
        let mut lines = text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());

        let (header_line, header) = lines
            .next()
            .ok_or_else(|| Error::Structural("empty dataset".into()))?;
        let columns = HeaderMap::parse(header, header_line)?;

        let mut records = Vec::new();
        for (line, row) in lines {
            records.push(columns.record(row, line)?);
        }
        Self::from_records(records, options)
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.records[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.records[self.records.len() - 1].date
    }

    pub fn allows_corrections(&self) -> bool {
        self.allow_corrections
    }

    /// Dates on which `target` decreases relative to the previous day.
    pub fn corrections(&self, target: Target) -> Vec<NaiveDate> {
        self.records
            .windows(2)
            .filter(|w| w[1].get(target) < w[0].get(target))
            .map(|w| w[1].date)
            .collect()
    }

    fn first_correction(&self, target: Target) -> Option<Error> {
        self.records
            .windows(2)
            .find(|w| w[1].get(target) < w[0].get(target))
            .map(|w| Error::Monotonicity {
                column: target.column(),
                date: w[1].date,
                previous: w[0].get(target),
                current: w[1].get(target),
            })
    }

    /// Projects one column into a raw cumulative series.
    pub fn extract_series(&self, target: Target) -> Series {
        Series {
            values: self.records.iter().map(|r| r.get(target) as f64).collect(),
            start_date: self.first_date(),
            kind: SeriesKind::Cumulative,
            scale: ScaleState::Raw,
            relaxed: self.allow_corrections,
        }
    }
}

struct HeaderMap {
    date: usize,
    confirmed: usize,
    deaths: usize,
    recovered: usize,
    arity: usize,
}

impl HeaderMap {
    fn parse(header: &str, line: usize) -> Result<Self> {
        let names: Vec<String> = header
            .split(',')
            .map(|h| h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase())
            .collect();
        let find = |name: &str| {
            names.iter().position(|n| n == name).ok_or_else(|| Error::Parse {
                line,
                message: format!("header is missing column `{name}`"),
            })
        };
        Ok(HeaderMap {
            date: find("date")?,
            confirmed: find("confirmed")?,
            deaths: find("deaths")?,
            recovered: find("recovered")?,
            arity: names.len(),
        })
    }

    fn record(&self, row: &str, line: usize) -> Result<Record> {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != self.arity {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", self.arity, fields.len()),
            });
        }
        let date = NaiveDate::parse_from_str(fields[self.date], "%Y-%m-%d").map_err(|e| {
            Error::Parse {
                line,
                message: format!("bad date `{}`: {e}", fields[self.date]),
            }
        })?;
        let count = |idx: usize, name: &str| {
            fields[idx].parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad {name} count `{}`", fields[idx]),
            })
        };
        Ok(Record {
            date,
            confirmed: count(self.confirmed, "confirmed")?,
            deaths: count(self.deaths, "deaths")?,
            recovered: count(self.recovered, "recovered")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Cumulative,
    Incident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleState {
    Raw,
    Normalized,
}

/// An evenly daily-spaced univariate sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    start_date: NaiveDate,
    kind: SeriesKind,
    scale: ScaleState,
    relaxed: bool,
}

impl Series {
    /// Builds a series, enforcing non-emptiness and, for raw cumulative
    /// data, monotonicity.
    pub fn new(
        values: Vec<f64>,
        start_date: NaiveDate,
        kind: SeriesKind,
        scale: ScaleState,
    ) -> Result<Self> {
        let series = Series {
            values,
            start_date,
            kind,
            scale,
            relaxed: false,
        };
        series.validate()?;
        Ok(series)
    }

    /// Raw cumulative series; mostly a test convenience.
    pub fn cumulative(values: Vec<f64>, start_date: NaiveDate) -> Result<Self> {
        Self::new(values, start_date, SeriesKind::Cumulative, ScaleState::Raw)
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(contract("series must be non-empty"));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(contract(format!("non-finite value at position {i}")));
        }
        if !self.relaxed && self.kind == SeriesKind::Cumulative && self.scale == ScaleState::Raw {
            if let Some(i) = self.values.windows(2).position(|w| w[1] < w[0]) {
                return Err(contract(format!(
                    "cumulative series decreases at position {}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.values.len() - 1)
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + Days::new(index as u64)
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn scale_state(&self) -> ScaleState {
        self.scale
    }

    /// True when extracted from a dataset that tolerates reporting corrections.
    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// Same metadata, new values and start date.
    pub(crate) fn derive(
        &self,
        values: Vec<f64>,
        start_date: NaiveDate,
        kind: SeriesKind,
        scale: ScaleState,
    ) -> Series {
        Series {
            values,
            start_date,
            kind,
            scale,
            relaxed: self.relaxed,
        }
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Series> {
        if start >= end || end > self.values.len() {
            return Err(contract(format!(
                "invalid slice {start}..{end} of a series of length {}",
                self.values.len()
            )));
        }
        Ok(self.derive(
            self.values[start..end].to_vec(),
            self.date_at(start),
            self.kind,
            self.scale,
        ))
    }

    /// Per-day counts; the first element is kept as-is. Relaxed series clamp
    /// negative increments (corrections) to zero.
    pub fn cumulative_to_incident(&self) -> Result<Series> {
        if self.kind != SeriesKind::Cumulative {
            return Err(contract("cumulative_to_incident needs a cumulative series"));
        }
        let mut out = Vec::with_capacity(self.values.len());
        out.push(self.values[0]);
        for w in self.values.windows(2) {
            let step = w[1] - w[0];
            out.push(if self.relaxed { step.max(0.0) } else { step });
        }
        Ok(self.derive(out, self.start_date, SeriesKind::Incident, self.scale))
    }

    pub fn incident_to_cumulative(&self) -> Result<Series> {
        if self.kind != SeriesKind::Incident {
            return Err(contract("incident_to_cumulative needs an incident series"));
        }
        let mut acc = 0.0;
        let out = self
            .values
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        Ok(self.derive(out, self.start_date, SeriesKind::Cumulative, self.scale))
    }
}

/// Chronological holdout split. The test part holds `round(n * test_fraction)`
/// points (at least one).
pub fn train_test_split(series: &Series, test_fraction: f64) -> Result<(Series, Series)> {
    let n = series.len();
    let test_len = split_len(n, test_fraction)?;
    Ok((series.slice(0, n - test_len)?, series.slice(n - test_len, n)?))
}

pub(crate) fn split_len(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(contract(format!("split fraction {fraction} outside (0, 1)")));
    }
    let tail = (libm::round(n as f64 * fraction) as usize).max(1);
    if tail >= n {
        return Err(contract(format!(
            "series of length {n} is too short to split with fraction {fraction}"
        )));
    }
    Ok(tail)
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} points {}..{}",
            self.values.len(),
            self.start_date,
            self.end_date()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn day(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn parses_any_column_order_and_crlf() {
        let text = "deaths,DATE,Recovered,confirmed\r\n1,2020-03-01,0,10\r\n2,2020-03-02,1,12\r\n";
        let ds = EpidemicDataset::parse_csv(text, ParseOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.records()[1].confirmed, 12);
        assert_eq!(ds.records()[1].deaths, 2);
        assert_eq!(ds.last_date(), day("2020-03-02"));
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let err = EpidemicDataset::parse_csv("Date,Confirmed,Deaths,Recovered\n", ParseOptions::default())
            .unwrap_err();
        assert_eq!(err, Error::Structural("empty dataset".into()));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = "Date,Confirmed,Deaths,Recovered\n2020-03-01,1,0,0\n2020-03-02,x,0,0\n";
        match EpidemicDataset::parse_csv(text, ParseOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "Date,Confirmed,Deaths,Recovered\n2020-03-01,1,0\n";
        assert!(matches!(
            EpidemicDataset::parse_csv(text, ParseOptions::default()),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "Date,Confirmed,Deaths,Recovered\n01/03/2020,1,0,0\n";
        assert!(matches!(
            EpidemicDataset::parse_csv(text, ParseOptions::default()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn gaps_and_duplicates_are_structural() {
        let gap = "Date,Confirmed,Deaths,Recovered\n2020-03-01,1,0,0\n2020-03-03,2,0,0\n";
        assert!(matches!(
            EpidemicDataset::parse_csv(gap, ParseOptions::default()),
            Err(Error::Structural(_))
        ));
        let dup = "Date,Confirmed,Deaths,Recovered\n2020-03-01,1,0,0\n2020-03-01,2,0,0\n";
        assert!(matches!(
            EpidemicDataset::parse_csv(dup, ParseOptions::default()),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn decreasing_counts_name_the_date() {
        let text = "Date,Confirmed,Deaths,Recovered\n2020-03-01,100,0,0\n2020-03-02,95,0,0\n";
        let err = EpidemicDataset::parse_csv(text, ParseOptions::default()).unwrap_err();
        assert_eq!(
            err,
            Error::Monotonicity {
                column: "Confirmed",
                date: day("2020-03-02"),
                previous: 100,
                current: 95
            }
        );
        let relaxed = EpidemicDataset::parse_csv(
            text,
            ParseOptions {
                allow_corrections: true,
            },
        )
        .unwrap();
        assert_eq!(relaxed.corrections(Target::Confirmed), vec![day("2020-03-02")]);
        let inc = relaxed
            .extract_series(Target::Confirmed)
            .cumulative_to_incident()
            .unwrap();
        assert_eq!(inc.values(), &[100.0, 0.0]);
    }

    #[test]
    fn extract_is_a_projection() {
        let text = "Date,Confirmed,Deaths,Recovered\n2020-03-01,5,1,0\n2020-03-02,7,1,0\n2020-03-03,10,2,1\n";
        let ds = EpidemicDataset::parse_csv(text, ParseOptions::default()).unwrap();
        let s = ds.extract_series(Target::Confirmed);
        assert_eq!(s.values(), &[5.0, 7.0, 10.0]);
        assert_eq!(s.kind(), SeriesKind::Cumulative);
        assert_eq!(s.scale_state(), ScaleState::Raw);
        assert_eq!(s.start_date(), day("2020-03-01"));

        let one = EpidemicDataset::parse_csv(
            "Date,Confirmed,Deaths,Recovered\n2020-03-01,5,1,0\n",
            ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(one.extract_series(Target::Deaths).len(), 1);
    }

    #[test]
    fn incident_differences() {
        let s = Series::cumulative(vec![5.0, 7.0, 7.0, 10.0], day("2020-03-01")).unwrap();
        let inc = s.cumulative_to_incident().unwrap();
        assert_eq!(inc.values(), &[5.0, 2.0, 0.0, 3.0]);
        assert_eq!(inc.incident_to_cumulative().unwrap(), s);

        let flat = Series::cumulative(vec![4.0, 4.0, 4.0], day("2020-03-01")).unwrap();
        assert_eq!(flat.cumulative_to_incident().unwrap().values(), &[4.0, 0.0, 0.0]);
        assert!(inc.cumulative_to_incident().is_err());
    }

    #[test]
    fn split_sizes() {
        let s = Series::cumulative((0..381).map(f64::from).collect(), day("2020-02-26")).unwrap();
        let (train, test) = train_test_split(&s, 0.2).unwrap();
        assert_eq!((train.len(), test.len()), (305, 76));
        assert_eq!(test.start_date(), s.date_at(305));

        let two = Series::cumulative(vec![1.0, 2.0], day("2020-03-01")).unwrap();
        let (a, b) = train_test_split(&two, 0.5).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));

        let ten = Series::cumulative((0..10).map(f64::from).collect(), day("2020-03-01")).unwrap();
        assert!(train_test_split(&ten, 1.5).is_err());
        assert!(train_test_split(&ten, 0.0).is_err());
        let one = Series::cumulative(vec![1.0], day("2020-03-01")).unwrap();
        assert!(train_test_split(&one, 0.5).is_err());
    }
}
