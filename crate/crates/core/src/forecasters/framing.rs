//! Mapping between raw windows and the inputs and outputs of the neural
//! forecasters.
//!
//! The direct framing feeds the window as is and reads the output as the next
//! value. The anchored framing subtracts the window's last value, divides by
//! the mean absolute one-step change seen in training, and reads the output
//! as the scaled change to add back.

use serde::{Deserialize, Serialize};
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Framing {
    pub anchored: bool,
    pub step_scale: f64,
}

impl Default for Framing {
    fn default() -> Self {
        Framing::direct()
    }
}

impl Framing {
    pub fn direct() -> Self {
        Framing {
            anchored: false,
            step_scale: 1.0,
        }
    }

    /// Anchored framing scaled to the typical step of `values`; direct when
    /// `anchored` is false.
    pub fn from_training(values: &[f64], anchored: bool) -> Self {
        if !anchored {
            return Framing::direct();
        }
        let steps = values.len().saturating_sub(1);
        let mean_step = if steps == 0 {
            0.0
        } else {
            values.windows(2).map(|p| libm::fabs(p[1] - p[0])).sum::<f64>() / steps as f64
        };
        Framing {
            anchored: true,
            step_scale: if mean_step > 0.0 && mean_step.is_finite() { mean_step } else { 1.0 },
        }
    }

    /// Writes the network input for `window` and returns its anchor.
    pub fn encode(&self, window: &[f64], out: &mut Vec<f64>) -> f64 {
        let anchor = if self.anchored { window[window.len() - 1] } else { 0.0 };
        out.clear();
        out.extend(window.iter().map(|v| (v - anchor) / self.step_scale));
        anchor
    }

    pub fn encode_target(&self, y: f64, anchor: f64) -> f64 {
        (y - anchor) / self.step_scale
    }

    pub fn decode(&self, output: f64, anchor: f64) -> f64 {
        anchor + self.step_scale * output
    }
}
