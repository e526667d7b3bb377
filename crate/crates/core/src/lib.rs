//! Forecasting core for cumulative epidemic counts: data model, transforms,
//! five forecaster families, accuracy metrics and evaluation protocols.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line live
//! in the `epicast` companion crate.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod backtest;
pub mod data;
pub mod error;
pub mod forecasters;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod simulate;
pub mod transform;

pub use data::{train_test_split, EpidemicDataset, ParseOptions, Record, ScaleState, Series, SeriesKind, Target};
pub use error::{Error, Result};
pub use forecasters::{fit, Fit, FittedModel, ForecasterSpec, Hyperparameters, ModelKind, Parameters};
pub use transform::MinMaxScaler;
