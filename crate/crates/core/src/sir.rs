//! SIR law of a typical UE served by the strongest base station of a
//! homogeneous planar Poisson deployment with path-loss exponent 4.
//!
//! The CCDF is `(2/π)/√γ − (1/π)(1/√γ − 1)²·1{0<γ<1}`. It is exact for
//! `γ ≥ 1/2`, peaks at `3/π` when `γ = 1/4` and is not monotone below that
//! point, so the sampler places the residual mass `1 − 3/π` as an atom at
//! `γ = 1/4`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{uniform_at, StreamRng, STREAM_SIR};

/// Largest value taken by the CCDF, reached at `γ = 1/4`.
pub const CCDF_MAX: f64 = 3.0 / PI;

/// Linear SIR at which the CCDF peaks; the sampler's floor.
pub const DEFAULT_CLAMP_FLOOR: f64 = 0.25;

/// Linear signal-to-interference ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sir(f64);

impl Sir {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("SIR must be positive and finite, got {value}")))
        }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0))
    }

    #[inline]
    pub fn linear(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// The SIR distribution. It has no density or transmit-power parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirDistribution {
    clamp_floor: f64,
}

impl Default for SirDistribution {
    fn default() -> Self {
        Self::new()
    }
}

impl SirDistribution {
    pub fn new() -> Self {
        Self { clamp_floor: DEFAULT_CLAMP_FLOOR }
    }

    pub fn clamp_floor(&self) -> f64 {
        self.clamp_floor
    }

    /// P(SIR > gamma).
    pub fn ccdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Domain(format!("ccdf argument must be positive and finite, got {gamma}")));
        }
        let x = 1.0 / gamma.sqrt();
        let mut p = 2.0 / PI * x;
        if gamma < 1.0 {
            p -= (x - 1.0).powi(2) / PI;
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Inverse of the CCDF on its monotone branch `γ ≥ 1/4`.
    pub fn inverse_ccdf(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= CCDF_MAX) {
            return Err(Error::Domain(format!("probability must lie in (0, 3/π], got {p}")));
        }
        if p <= 2.0 / PI {
            Ok((2.0 / (PI * p)).powi(2))
        } else {
            // (4x − x² − 1)/π = p with x = 1/√γ ∈ [1, 2]
            let x = 2.0 - (3.0 - PI * p).max(0.0).sqrt();
            Ok(1.0 / (x * x))
        }
    }

    /// SIR of UE `index` under `seed`; independent of any other draw.
    pub fn draw(&self, seed: u64, index: u64) -> Sir {
        self.sir_at(uniform_at(seed, STREAM_SIR, index))
    }

    /// `n` seeded draws, UE `i` taking counter position `i` (same values as [`Self::draw`]).
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Sir> {
        let mut rng = StreamRng::new(seed, STREAM_SIR);
        (0..n).map(|_| self.sir_at(rng.uniform())).collect()
    }

    fn sir_at(&self, u: f64) -> Sir {
        if u <= CCDF_MAX {
            Sir(self.inverse_ccdf(u).expect("u lies in (0, 3/π]"))
        } else {
            Sir(self.clamp_floor)
        }
    }

    /// Analytic 25th, 50th and 75th percentiles (linear).
    pub fn analytic_percentiles(&self) -> (f64, f64, f64) {
        let q = |p: f64| self.inverse_ccdf(p).expect("quartile probabilities are in range");
        (q(0.75), q(0.50), q(0.25))
    }
}
