//! Purely resistive high-frequency term `R0` from a fixed 45 degree line fitted
//! to the diffusion tail of a Nyquist plot.
//!
//! With `x = Re Z` and `y = -Im Z` the model is `y = x + b0`, `R0 = -b0`, and the
//! least-squares intercept is simply `mean(y - x)`. Low-frequency points carry
//! the capacitive upturn, so the lowest-frequency point is dropped one at a
//! time until the coefficient of determination reaches the threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{EisPoint, EisSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R0Options {
    pub r2_threshold: f64,
    pub min_points: usize,
    /// Discard points above this frequency (Hz). `None` cuts at the
    /// semicircle/tail junction instead.
    pub hf_cutoff_hz: Option<f64>,
}

impl Default for R0Options {
    fn default() -> Self {
        R0Options { r2_threshold: 0.98, min_points: 4, hf_cutoff_hz: None }
    }
}

/// One regression pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R0Iteration {
    pub points: usize,
    pub r0: f64,
    pub r_squared: f64,
    /// Frequency (Hz) of the point removed after this pass, if any.
    pub dropped_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R0Estimate {
    pub r0: f64,
    pub r_squared: f64,
    pub points_used: usize,
    pub omega_min_used: f64,
    pub trace: Vec<R0Iteration>,
}

/// Fixed-slope fit on `points`: returns `(R0, R^2)`.
pub fn fixed_slope_fit(points: &[EisPoint]) -> (f64, f64) {
    let n = points.len() as f64;
    let b0 = points.iter().map(|p| -p.z.im - p.z.re).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| -p.z.im).sum::<f64>() / n;
    let (ss_res, ss_tot) = points.iter().fold((0.0, 0.0), |(r, t), p| {
        let y = -p.z.im;
        let e = y - (p.z.re + b0);
        (r + e * e, t + (y - y_mean) * (y - y_mean))
    });
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    (-b0, r2)
}

/// Index (ascending-frequency order) of the semicircle/tail junction: the
/// lowest-frequency interior local minimum of `-Im Z`. Points above it belong
/// to the charge-transfer arc.
fn junction_index(points: &[EisPoint]) -> Option<usize> {
    let y: Vec<f64> = points.iter().map(|p| -p.z.im).collect();
    (1..y.len().saturating_sub(1)).find(|&i| y[i] <= y[i - 1] && y[i] < y[i + 1])
}

pub fn estimate_r0(spec: &EisSpectrum, opts: &R0Options) -> Result<R0Estimate> {
    if opts.min_points < 2 {
        return Err(Error::invalid("min_points", "need at least 2 points for a meaningful R^2"));
    }
    let sorted = spec.sorted_ascending();
    let mut points: Vec<EisPoint> = sorted.points().to_vec();
    match opts.hf_cutoff_hz {
        Some(f) => {
            let w = 2.0 * std::f64::consts::PI * f;
            points.retain(|p| p.omega <= w);
        }
        None => {
            if let Some(j) = junction_index(&points) {
                points.truncate(j + 1);
            }
        }
    }

    let mut trace = Vec::new();
    let mut best_r2 = f64::NEG_INFINITY;
    let mut start = 0;
    while points.len() - start >= opts.min_points {
        let subset = &points[start..];
        let (r0, r2) = fixed_slope_fit(subset);
        best_r2 = best_r2.max(r2);
        if r2 >= opts.r2_threshold {
            trace.push(R0Iteration { points: subset.len(), r0, r_squared: r2, dropped_hz: None });
            return Ok(R0Estimate {
                r0,
                r_squared: r2,
                points_used: subset.len(),
                omega_min_used: subset[0].omega,
                trace,
            });
        }
        trace.push(R0Iteration {
            points: subset.len(),
            r0,
            r_squared: r2,
            dropped_hz: Some(subset[0].omega / (2.0 * std::f64::consts::PI)),
        });
        start += 1;
    }
    Err(Error::RegressionFailure {
        reason: format!(
            "fewer than {} points left before R^2 reached {}",
            opts.min_points, opts.r2_threshold
        ),
        best_r2,
    })
}
