//! Seeded generators for synthetic ARIMA data.

use alloc::vec::Vec;

use crate::rng::{normal, seeded};

/// Parameters of a simulated ARIMA process with Gaussian innovations.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaProcess {
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub d: usize,
    pub sigma: f64,
}

impl ArimaProcess {
    pub fn ar(coefs: &[f64], sigma: f64) -> Self {
        ArimaProcess {
            intercept: 0.0,
            ar: coefs.to_vec(),
            ma: Vec::new(),
            d: 0,
            sigma,
        }
    }

    pub fn ma(coefs: &[f64], sigma: f64) -> Self {
        ArimaProcess {
            intercept: 0.0,
            ar: Vec::new(),
            ma: coefs.to_vec(),
            d: 0,
            sigma,
        }
    }

    pub fn integrated(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    /// Draws `n` observations after discarding a 500-step burn-in. Integrated
    /// processes start their levels at zero.
    pub fn simulate(&self, n: usize, seed: u64) -> Vec<f64> {
        const BURN_IN: usize = 500;
        let mut rng = seeded(seed);
        let total = n + BURN_IN;
        let mut y = Vec::with_capacity(total);
        let mut e = Vec::with_capacity(total);
        for t in 0..total {
            let shock = normal(&mut rng, self.sigma);
            let mut v = self.intercept + shock;
            for (i, phi) in self.ar.iter().enumerate() {
                if t > i {
                    v += phi * y[t - 1 - i];
                }
            }
            for (j, theta) in self.ma.iter().enumerate() {
                if t > j {
                    v += theta * e[t - 1 - j];
                }
            }
            y.push(v);
            e.push(shock);
        }
        let mut out: Vec<f64> = y.split_off(BURN_IN);
        for _ in 0..self.d {
            let mut acc = 0.0;
            for v in out.iter_mut() {
                acc += *v;
                *v = acc;
            }
        }
        out
    }
}
