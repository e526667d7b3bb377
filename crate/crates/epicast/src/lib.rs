//! File formats and the `epicast` command line on top of `epicast-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod forecast_csv;
pub mod model_file;
pub mod plotdata;
pub mod report;

use std::fs;
use std::ops::Range;
use std::path::Path;
use std::time::Instant;

use epicast_core::backtest::{Access, Observer};
use epicast_core::{EpidemicDataset, ParseOptions};

pub use error::{CliError, CliResult};

/// The bundled daily table for Iran, 381 rows ending 2021-03-12.
pub const BUNDLED_CSV: &str = include_str!("../data/iran_covid19.csv");

pub fn bundled_dataset() -> EpidemicDataset {
    EpidemicDataset::parse_csv(BUNDLED_CSV, ParseOptions::default()).expect("bundled dataset is valid")
}

/// Reads and validates a dataset file. A missing file is a usage error.
pub fn load_dataset(path: &Path, options: ParseOptions) -> CliResult<EpidemicDataset> {
    if !path.exists() {
        return Err(CliError::usage(format!("input file {} does not exist", path.display())));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    EpidemicDataset::parse_csv(&text, options).map_err(CliError::Data)
}

/// Writes `contents` to `path`, creating parent directories.
pub(crate) fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Observer that only supplies a monotonic clock.
pub struct Clock(Instant);

impl Default for Clock {
    fn default() -> Self {
        Clock(Instant::now())
    }
}

impl Observer for Clock {
    fn touched(&mut self, _: Access, _: Range<usize>) {}

    fn now_ms(&mut self) -> Option<f64> {
        Some(self.0.elapsed().as_secs_f64() * 1e3)
    }
}
