//! Exhaustive ground truth: score every combination of a space, smooth the
//! resulting reward curve and locate its optima.
//!
//! Nothing here is clever. The sweep calls the same scoring path the agents
//! see, so every reward an agent observes is an entry of the curve.

use serde::{Deserialize, Serialize};

use crate::action_space::{Ordering, RegionActionSpace};
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, ScoreRecord};
use crate::region::Region;

/// Width of the rectangular smoothing window.
pub const DEFAULT_WINDOW: usize = 50;

/// Fraction of the smoothed maximum that counts as near-optimal.
pub const NEAR_OPTIMAL_FRACTION: f64 = 0.98;

/// Default plateau tolerance for [`count_local_maxima`].
pub const LOCAL_MAX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardCurve {
    pub region: Region,
    pub ordering: Ordering,
    pub scores: Vec<ScoreRecord>,
    pub values: Vec<f64>,
    pub smoothed: Vec<f64>,
}

impl RewardCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax_value(&self) -> usize {
        argmax(&self.values)
    }

    pub fn max_smoothed(&self) -> f64 {
        self.smoothed.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax_smoothed(&self) -> usize {
        argmax(&self.smoothed)
    }

    /// True when the smoothed reward at `position` is within the near-optimal band.
    pub fn is_near_optimal(&self, position: usize) -> bool {
        self.smoothed[position] >= NEAR_OPTIMAL_FRACTION * self.max_smoothed()
    }

    pub fn local_maxima(&self, tolerance: f64) -> usize {
        count_local_maxima(&self.smoothed, tolerance)
    }
}

/// Scores every position of `space` and smooths the curve with `window`.
pub fn sweep(evaluator: &Evaluator, space: &RegionActionSpace, window: usize) -> Result<RewardCurve> {
    let scores = evaluator.score_all(space)?;
    let values: Vec<f64> = scores.iter().map(|s| s.reward).collect();
    let smoothed = smooth(&values, window)?;
    Ok(RewardCurve { region: space.region(), ordering: space.ordering(), scores, values, smoothed })
}

/// Centred moving average; the window is truncated at the ends so the output
/// keeps the input length. An even window reaches one sample further right.
pub fn smooth(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 1 {
        return Err(Error::Domain("smoothing window must be at least 1".into()));
    }
    let left = (window - 1) / 2;
    let right = window / 2;
    let n = values.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right).min(n - 1);
            let span = &values[lo..=hi];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect())
}

/// Lowest position attaining the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Counts strict interior local maxima. Steps of size at most `tolerance`
/// are treated as flat, so a plateau between a rise and a fall counts once
/// and the two ends of the curve never count.
pub fn count_local_maxima(values: &[f64], tolerance: f64) -> usize {
    let mut count = 0;
    let mut rising = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > tolerance {
            rising = true;
        } else if d < -tolerance {
            if rising {
                count += 1;
            }
            rising = false;
        }
    }
    count
}
