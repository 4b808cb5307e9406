//! Open-circuit-voltage curves versus discharge capacity and the local OCV
//! slopes consumed by the linearised model.
//!
//! Curves are interpolated with a shape-preserving piecewise cubic Hermite
//! scheme: three-point parabolic node derivatives passed through Hyman's
//! monotonicity filter. The scheme reproduces quadratics exactly wherever the
//! filter is inactive and never introduces extrema between samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Electrode {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Electrode {
    pub fn name(self) -> &'static str {
        match self {
            Electrode::Plus => "cathode",
            Electrode::Minus => "anode",
        }
    }
}

/// An empirical OCV curve `U(Q)` sampled at strictly increasing discharge
/// capacities (coulombs).
#[derive(Debug, Clone, PartialEq)]
pub struct OcvCurve {
    electrode: Electrode,
    q: Vec<f64>,
    u: Vec<f64>,
    /// Hermite node derivatives, V/C.
    d: Vec<f64>,
    total_capacity: f64,
}

impl OcvCurve {
    pub fn new(electrode: Electrode, samples: &[(f64, f64)], total_capacity: f64) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::invalid("samples", format!("need at least 3 OCV samples, got {}", samples.len())));
        }
        if !(total_capacity.is_finite() && total_capacity > 0.0) {
            return Err(Error::invalid("total_capacity", format!("must be > 0, got {total_capacity}")));
        }
        if samples.iter().any(|(q, u)| !q.is_finite() || !u.is_finite()) {
            return Err(Error::invalid("samples", "non-finite OCV sample"));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "samples",
                format!("capacity must be strictly increasing ({} then {})", w[0].0, w[1].0),
            ));
        }
        let q: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let u: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let d = hyman_slopes(&q, &u);
        Ok(OcvCurve { electrode, q, u, d, total_capacity })
    }

    /// Copy with a centred moving average of odd width `window` applied to the
    /// voltages. The window shrinks symmetrically near the ends.
    pub fn smoothed(&self, window: usize) -> Result<Self> {
        if window == 0 || window.is_multiple_of(2) {
            return Err(Error::invalid("window", format!("smoothing window must be odd, got {window}")));
        }
        let n = self.u.len();
        let half = window / 2;
        let u: Vec<f64> = (0..n)
            .map(|i| {
                let h = half.min(i).min(n - 1 - i);
                let span = &self.u[i - h..=i + h];
                span.iter().sum::<f64>() / span.len() as f64
            })
            .collect();
        let d = hyman_slopes(&self.q, &u);
        Ok(OcvCurve { u, d, ..self.clone() })
    }

    pub fn electrode(&self) -> Electrode {
        self.electrode
    }

    pub fn total_capacity(&self) -> f64 {
        self.total_capacity
    }

    pub fn capacities(&self) -> &[f64] {
        &self.q
    }

    pub fn voltages(&self) -> &[f64] {
        &self.u
    }

    pub fn range(&self) -> (f64, f64) {
        (self.q[0], self.q[self.q.len() - 1])
    }

    fn segment(&self, q: f64) -> usize {
        // index k with q[k] <= q <= q[k+1]
        let k = self.q.partition_point(|&x| x <= q);
        k.clamp(1, self.q.len() - 1) - 1
    }

    fn hermite(&self, q: f64) -> (f64, f64) {
        let k = self.segment(q);
        let h = self.q[k + 1] - self.q[k];
        let t = (q - self.q[k]) / h;
        let (y0, y1, d0, d1) = (self.u[k], self.u[k + 1], self.d[k], self.d[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1;
        let slope = (6.0 * t2 - 6.0 * t) * (y0 - y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (3.0 * t2 - 2.0 * t) * d1;
        (value, slope)
    }
}

/// Three-point parabolic derivatives with Hyman's monotonicity filter.
fn hyman_slopes(q: &[f64], u: &[f64]) -> Vec<f64> {
    let n = q.len();
    let h: Vec<f64> = q.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (u[i + 1] - u[i]) / h[i]).collect();
    let mut d = vec![0.0; n];

    d[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
    let (a, b) = (h[n - 2], h[n - 3]);
    d[n - 1] = ((2.0 * a + b) * delta[n - 2] - a * delta[n - 3]) / (a + b);
    for i in 1..n - 1 {
        d[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
    }

    for (i, di) in d.iter_mut().enumerate() {
        let (left, right) = match i {
            0 => (delta[0], delta[0]),
            _ if i == n - 1 => (delta[n - 2], delta[n - 2]),
            _ => (delta[i - 1], delta[i]),
        };
        if left * right <= 0.0 {
            *di = 0.0;
            continue;
        }
        let sigma = right.signum();
        let bound = 3.0 * left.abs().min(right.abs());
        *di = sigma * (sigma * *di).clamp(0.0, bound);
    }
    d
}

/// Interpolated open-circuit voltage at discharge capacity `q` (coulombs).
pub fn ocv_at(curve: &OcvCurve, q: f64) -> Result<f64> {
    let (lo, hi) = curve.range();
    if !(q >= lo && q <= hi) {
        return Err(Error::Extrapolation { query: q, lo, hi });
    }
    Ok(curve.hermite(q).0)
}

/// `dU/dQ` of the interpolant at an interior capacity, V/C.
pub fn slope_beta(curve: &OcvCurve, q: f64) -> Result<f64> {
    let (lo, hi) = curve.range();
    if !(q > lo && q < hi) {
        return Err(Error::Extrapolation { query: q, lo, hi });
    }
    Ok(curve.hermite(q).1)
}

/// OCV slopes at one depth of discharge, in the sign convention of the
/// transfer function: derivative of each electrode potential with respect to
/// charge passed in the charging direction, i.e. `-dU/dQ_discharge`.
///
/// With this convention the cathode slope is normally positive and the anode
/// slope negative, and equal magnitudes mean `beta_plus == -beta_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcvSlopes {
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub dod: f64,
}

impl OcvSlopes {
    pub fn new(beta_plus: f64, beta_minus: f64, dod: f64) -> Result<Self> {
        if !beta_plus.is_finite() || !beta_minus.is_finite() {
            return Err(Error::invalid("beta", "OCV slopes must be finite"));
        }
        Ok(OcvSlopes { beta_plus, beta_minus, dod })
    }

    /// Per-electrode multiplicative correction of the slopes.
    pub fn scaled(&self, scale_plus: f64, scale_minus: f64) -> Self {
        OcvSlopes {
            beta_plus: self.beta_plus * scale_plus,
            beta_minus: self.beta_minus * scale_minus,
            dod: self.dod,
        }
    }
}

/// Relative tolerance on the two curves' total capacities.
pub const CAPACITY_MATCH_TOL: f64 = 0.01;

pub fn slopes_at_dod(ocv_plus: &OcvCurve, ocv_minus: &OcvCurve, dod: f64) -> Result<OcvSlopes> {
    let (cp, cm) = (ocv_plus.total_capacity(), ocv_minus.total_capacity());
    if (cp - cm).abs() > CAPACITY_MATCH_TOL * cp.max(cm) {
        return Err(Error::DatasetInconsistency(format!(
            "electrode OCV curves disagree on total capacity ({cp} C vs {cm} C)"
        )));
    }
    if !(0.0..=1.0).contains(&dod) {
        return Err(Error::invalid("dod", format!("must lie in [0, 1], got {dod}")));
    }
    let beta_plus = -slope_beta(ocv_plus, dod * cp)?;
    let beta_minus = -slope_beta(ocv_minus, dod * cm)?;
    OcvSlopes::new(beta_plus, beta_minus, dod)
}
