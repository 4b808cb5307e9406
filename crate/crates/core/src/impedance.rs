//! Transfer function of the linearised single-particle model evaluated on the
//! imaginary axis.
//!
//! The spherical-diffusion kernel
//!
//! ```text
//! f(s, tau) = (tau / 3) tanh(sqrt(s tau)) / (tanh(sqrt(s tau)) - sqrt(s tau))
//! ```
//!
//! has a pole at `s = 0` and a removable 0/0 form right next to it, and its
//! `tanh` overflows for large arguments when evaluated naively. It is
//! therefore evaluated in three regimes: a series near the pole, an
//! overflow-free closed form in the middle, and the `tanh = 1` saturation
//! limit at high frequency.
//!
//! Impedance convention: `Z(w) = -H0(i w)`, discharge current positive and `Z`
//! the voltage drop per unit current, so `Re Z > 0` and `-Im Z > 0` along the
//! diffusion tail.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocv::OcvSlopes;
use crate::params::IdentifiableParams;

/// Below this `|s tau|` the series expansion is used.
pub const SERIES_LIMIT: f64 = 1e-4;
/// Above this `Re sqrt(s tau)` `tanh` is replaced by one.
pub const SATURATION_LIMIT: f64 = 20.0;

/// `exp(w) - 1` without cancellation for small `|w|`.
fn exp_m1(w: Complex64) -> Complex64 {
    let (sin_b, cos_b) = w.im.sin_cos();
    let half_sin = (0.5 * w.im).sin();
    let em1 = w.re.exp_m1();
    Complex64::new(em1 * cos_b - 2.0 * half_sin * half_sin, w.re.exp() * sin_b)
}

#[doc(hidden)]
pub fn warburg_f_series(s: Complex64, tau: f64) -> Complex64 {
    let r = s.norm();
    let z = s * tau;
    -(s / r).conj() / r + tau * (-1.0 / 15.0 + z * (1.0 / 525.0 - z * (2.0 / 23625.0)))
}

#[doc(hidden)]
pub fn warburg_f_general(s: Complex64, tau: f64) -> Complex64 {
    let x = s.sqrt() * tau.sqrt();
    let e = exp_m1(-2.0 * x);
    let tanh = -e / (2.0 + e);
    tau / 3.0 * tanh / (tanh - x)
}

#[doc(hidden)]
pub fn warburg_f_saturated(s: Complex64, tau: f64) -> Complex64 {
    let x = s.sqrt() * tau.sqrt();
    tau / 3.0 / (1.0 - x)
}

/// The spherical-diffusion kernel `f(s, tau)`, in seconds.
pub fn warburg_f(s: Complex64, tau: f64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole);
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid("tau", format!("diffusion time constant must be > 0, got {tau}")));
    }
    let value = if s.norm() * tau < SERIES_LIMIT {
        warburg_f_series(s, tau)
    } else if (s.sqrt() * tau.sqrt()).re > SATURATION_LIMIT {
        warburg_f_saturated(s, tau)
    } else {
        warburg_f_general(s, tau)
    };
    Ok(value)
}

/// Transfer function from current to surface stoichiometry of one electrode, 1/A.
pub fn diffusion_tf(s: Complex64, tau_d: f64, q_th: f64) -> Result<Complex64> {
    if q_th == 0.0 || !q_th.is_finite() {
        return Err(Error::Degenerate(format!("theoretical capacity must be finite and non-zero, got {q_th}")));
    }
    Ok(warburg_f(s, tau_d)? / q_th)
}

/// `H0(s) = beta+ f(s, tau+) - beta- f(s, tau-) - R_ct`, in ohms.
pub fn spm_tf(s: Complex64, p: &IdentifiableParams, slopes: &OcvSlopes) -> Result<Complex64> {
    let fp = warburg_f(s, p.tau_d_plus)?;
    let fm = warburg_f(s, p.tau_d_minus)?;
    Ok(fp * slopes.beta_plus - fm * slopes.beta_minus - p.r_ct0)
}

/// Model impedance `Z(w) = -H0(i w)`.
pub fn model_impedance(omega: f64, p: &IdentifiableParams, slopes: &OcvSlopes) -> Result<Complex64> {
    Ok(-spm_tf(Complex64::new(0.0, omega), p, slopes)?)
}

/// Angular frequencies in rad/s, strictly monotone and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::invalid("omegas", "frequency grid is empty"));
        }
        if omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("omegas", "frequencies must be finite and > 0"));
        }
        let increasing = omegas.windows(2).all(|w| w[1] > w[0]);
        let decreasing = omegas.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::invalid("omegas", "frequencies must be strictly monotone"));
        }
        Ok(FrequencyGrid { omegas })
    }

    /// Log-spaced grid from `f_max_hz` down to `f_min_hz` with `per_decade`
    /// points per decade, starting exactly at `f_max_hz`.
    pub fn log_spaced_hz(f_max_hz: f64, f_min_hz: f64, per_decade: usize) -> Result<Self> {
        if !(f_min_hz > 0.0 && f_max_hz > f_min_hz && f_max_hz.is_finite()) {
            return Err(Error::invalid("frequency bounds", format!("need 0 < f_min < f_max, got [{f_min_hz}, {f_max_hz}]")));
        }
        if per_decade == 0 {
            return Err(Error::invalid("per_decade", "must be at least 1"));
        }
        let decades = (f_max_hz / f_min_hz).log10();
        let n = (decades * per_decade as f64 + 1e-9).floor() as usize;
        let omegas = (0..=n)
            .map(|k| 2.0 * std::f64::consts::PI * f_max_hz * 10f64.powf(-(k as f64) / per_decade as f64))
            .collect();
        FrequencyGrid::new(omegas)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EisPoint {
    /// rad/s
    pub omega: f64,
    pub z: Complex64,
}

/// Impedance samples at one depth of discharge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EisSpectrum {
    pub dod: f64,
    points: Vec<EisPoint>,
}

impl EisSpectrum {
    pub fn new(dod: f64, points: Vec<EisPoint>) -> Result<Self> {
        if points.iter().any(|p| !(p.omega.is_finite() && p.omega > 0.0)) {
            return Err(Error::invalid("omega", "impedance frequencies must be finite and > 0"));
        }
        if points.iter().any(|p| !p.z.re.is_finite() || !p.z.im.is_finite()) {
            return Err(Error::invalid("z", "non-finite impedance sample"));
        }
        let mut w: Vec<f64> = points.iter().map(|p| p.omega).collect();
        w.sort_by(f64::total_cmp);
        if w.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::invalid("omega", "duplicate frequency in spectrum"));
        }
        Ok(EisSpectrum { dod, points })
    }

    pub fn points(&self) -> &[EisPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Copy with points in ascending frequency order.
    pub fn sorted_ascending(&self) -> EisSpectrum {
        let mut points = self.points.clone();
        points.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        EisSpectrum { dod: self.dod, points }
    }

    /// Copy with `offset` ohms added to every real part.
    pub fn with_series_resistance(&self, offset: f64) -> EisSpectrum {
        let points = self
            .points
            .iter()
            .map(|p| EisPoint { omega: p.omega, z: p.z + offset })
            .collect();
        EisSpectrum { dod: self.dod, points }
    }
}

/// Synthetic spectrum `Z(w) = -H0(i w) + r_extra` on `grid`.
pub fn simulate_eis(
    p: &IdentifiableParams,
    slopes: &OcvSlopes,
    grid: &FrequencyGrid,
    r_extra: f64,
) -> Result<EisSpectrum> {
    p.validate()?;
    let points = grid
        .omegas()
        .iter()
        .map(|&omega| Ok(EisPoint { omega, z: model_impedance(omega, p, slopes)? + r_extra }))
        .collect::<Result<Vec<_>>>()?;
    EisSpectrum::new(slopes.dod, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn slopes(bp: f64, bm: f64) -> OcvSlopes {
        OcvSlopes { beta_plus: bp, beta_minus: bm, dod: 0.25 }
    }

    #[test]
    fn pole_is_rejected() {
        assert!(matches!(warburg_f(c(0.0, 0.0), 1.0), Err(Error::Pole)));
        assert!(warburg_f(c(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn real_unit_argument() {
        // (1/3) tanh(1) / (tanh(1) - 1), reference value from a 40-digit evaluation
        let f = warburg_f(c(1.0, 0.0), 1.0).unwrap();
        assert!((f.re + 1.064842683155108).abs() < 1e-13);
        assert!(f.im.abs() < 1e-15);
    }

    #[test]
    fn pole_removal_limit() {
        for tau in [1e-2, 1.0, 7.225, 2840.9] {
            let s = c(0.0, 1e-9 / tau);
            let rem = warburg_f(s, tau).unwrap() + 1.0 / s;
            assert!(((rem.re + tau / 15.0) / (tau / 15.0)).abs() < 1e-4);
            for wt in [1e-6, 1e-7, 1e-9] {
                let s = c(0.0, wt / tau);
                let rem = warburg_f(s, tau).unwrap() + 1.0 / s + tau / 15.0;
                assert!(rem.norm() <= 1e-6 * tau);
            }
        }
    }

    #[test]
    fn high_frequency_warburg_ratio() {
        // |Re f| / |Im f| = 1 / (1 + sqrt(2 / (w tau))) asymptotically: within 1 %
        // once w tau >= 2e4 (it is still 1.4 % off at 1e4).
        for wt in [2e4, 1e5, 1e7, 1e10] {
            let f = warburg_f(c(0.0, wt), 1.0).unwrap();
            assert!((f.re.abs() / f.im.abs() - 1.0).abs() < 0.01, "w tau = {wt}");
        }
    }

    #[test]
    fn regime_continuity() {
        for tau in [0.5, 7.225, 2840.9] {
            for phase in [0.0, 0.3, 1.0, std::f64::consts::FRAC_PI_2] {
                let dir = Complex64::from_polar(1.0, phase);
                let s = dir * (SERIES_LIMIT / tau);
                let a = warburg_f_series(s, tau);
                let b = warburg_f_general(s, tau);
                assert!((a - b).norm() / a.norm() < 1e-9, "series/general tau={tau} phase={phase}");

                // Re sqrt(s tau) = SATURATION_LIMIT
                let x = Complex64::from_polar(SATURATION_LIMIT / (0.5 * phase).cos(), 0.5 * phase);
                let s = x * x / tau;
                let a = warburg_f_general(s, tau);
                let b = warburg_f_saturated(s, tau);
                assert!((a - b).norm() / a.norm() < 1e-9, "general/saturated tau={tau} phase={phase}");
            }
        }
    }

    #[test]
    fn no_overflow_at_extreme_frequency() {
        let f = warburg_f(c(0.0, 1e300), 1e5).unwrap();
        assert!(f.re.is_finite() && f.im.is_finite());
        let f = warburg_f(c(0.0, 1e-300), 1e-5).unwrap();
        assert!(f.re.is_finite() && f.im.is_finite());
    }

    #[test]
    fn diffusion_tf_scaling() {
        let s = c(0.0, 0.3);
        let a = diffusion_tf(s, 12.0, 500.0).unwrap();
        let b = diffusion_tf(s, 12.0, 1000.0).unwrap();
        assert!((a / 2.0 - b).norm() < 1e-15 * a.norm());
        assert!(matches!(diffusion_tf(s, 12.0, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn diffusion_tf_lco_cathode() {
        // tau/(3Q) tanh(x)/(tanh(x)-x) at s = i, tau = 7.225 s, Q = -1.026e4 C,
        // evaluated with 40-digit arithmetic
        let h = diffusion_tf(c(0.0, 1.0), 7.225, -1.026e4).unwrap();
        let expected = c(4.417386018899398e-5, -1.061976643435534e-4);
        assert!((h - expected).norm() / expected.norm() < 1e-12, "{h}");
    }

    #[test]
    fn flat_ocv_degeneracy() {
        let p = IdentifiableParams { tau_d_plus: 7.0, tau_d_minus: 3000.0, r_ct0: 0.02 };
        for w in [1e-4, 1.0, 1e4] {
            let h = spm_tf(c(0.0, w), &p, &slopes(0.0, 0.0)).unwrap();
            assert_eq!(h, c(-0.02, 0.0));
        }
    }

    #[test]
    fn low_frequency_law() {
        let p = IdentifiableParams { tau_d_plus: 7.225, tau_d_minus: 2840.9, r_ct0: 0.03 };
        let sl = slopes(6e-5, -3e-6);
        let w = 1e-6 / p.tau_d_minus;
        let h = spm_tf(c(0.0, w), &p, &sl).unwrap();
        let target = sl.beta_plus - sl.beta_minus;
        assert!(((w * h.im - target) / target).abs() < 1e-3);
    }

    #[test]
    fn impedance_quadrants() {
        let p = IdentifiableParams { tau_d_plus: 7.225, tau_d_minus: 2840.9, r_ct0: 0.0 };
        let sl = slopes(6e-5, -3e-6);
        let grid = FrequencyGrid::log_spaced_hz(5e3, 2e-4, 6).unwrap();
        let spec = simulate_eis(&p, &sl, &grid, 0.0).unwrap();
        for pt in spec.points() {
            assert!(pt.z.re > 0.0 && pt.z.im < 0.0);
        }
    }

    #[test]
    fn constant_spectrum_with_flat_ocv() {
        let p = IdentifiableParams { tau_d_plus: 7.0, tau_d_minus: 3000.0, r_ct0: 0.01 };
        let grid = FrequencyGrid::log_spaced_hz(1e3, 1e-3, 6).unwrap();
        let spec = simulate_eis(&p, &slopes(0.0, 0.0), &grid, 0.0).unwrap();
        for pt in spec.points() {
            assert_eq!(pt.z, c(0.01, 0.0));
        }
    }

    #[test]
    fn grid_layout() {
        let g = FrequencyGrid::log_spaced_hz(5e3, 2e-4, 6).unwrap();
        assert_eq!(g.len(), 45);
        assert!((g.omegas()[0] - 2.0 * std::f64::consts::PI * 5e3).abs() < 1e-9);
        assert!(g.omegas()[44] >= 2.0 * std::f64::consts::PI * 2e-4);
        assert!(FrequencyGrid::new(vec![1.0, 2.0, 2.0]).is_err());
        assert!(FrequencyGrid::new(vec![1.0, 3.0, 2.0]).is_err());
        assert!(FrequencyGrid::new(vec![-1.0]).is_err());
        let g = FrequencyGrid::log_spaced_hz(10.0, 0.1, 1).unwrap();
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn spectrum_rejects_duplicates() {
        let pts = vec![
            EisPoint { omega: 1.0, z: c(1.0, 0.0) },
            EisPoint { omega: 1.0, z: c(2.0, 0.0) },
        ];
        assert!(EisSpectrum::new(0.5, pts).is_err());
    }

    #[test]
    fn faster_diffusion_moves_capacitive_transition_up() {
        // transition: highest frequency, sweeping downward, where -Im/Re first exceeds 2
        let transition = |tau_plus: f64| {
            let p = IdentifiableParams { tau_d_plus: tau_plus, tau_d_minus: 2840.9, r_ct0: 0.0 };
            let sl = slopes(6e-5, -3e-6);
            let grid = FrequencyGrid::log_spaced_hz(5e3, 1e-6, 48).unwrap();
            let spec = simulate_eis(&p, &sl, &grid, 0.0).unwrap();
            spec.points().iter().find(|pt| -pt.z.im / pt.z.re > 2.0).unwrap().omega
        };
        assert!(transition(7.225 / 2.0) > transition(7.225));
    }

    proptest! {
        #[test]
        fn diffusion_tf_is_scaled_kernel(logw in -8.0f64..8.0, logtau in -2.0f64..5.0, q in 1.0f64..1e5, neg in any::<bool>()) {
            let s = c(0.0, 10f64.powf(logw));
            let tau = 10f64.powf(logtau);
            let q = if neg { -q } else { q };
            prop_assert_eq!(diffusion_tf(s, tau, q).unwrap(), warburg_f(s, tau).unwrap() / q);
        }

        #[test]
        fn hermitian_symmetry(logw in -8.0f64..8.0, sigma in -1.0f64..1.0, bp in -1e-3f64..1e-3, bm in -1e-3f64..1e-3) {
            let w = 10f64.powf(logw);
            let s = c(sigma * w, w);
            let p = IdentifiableParams { tau_d_plus: 7.225, tau_d_minus: 2840.9, r_ct0: 0.04 };
            let a = spm_tf(s.conj(), &p, &slopes(bp, bm)).unwrap();
            let b = spm_tf(s, &p, &slopes(bp, bm)).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-300));
        }

        #[test]
        fn flat_anode_hides_anode_diffusion(logw in -6.0f64..4.0, t1 in -1.0f64..5.0, t2 in -1.0f64..5.0) {
            let s = c(0.0, 10f64.powf(logw));
            let a = IdentifiableParams { tau_d_plus: 7.225, tau_d_minus: 10f64.powf(t1), r_ct0: 0.03 };
            let b = IdentifiableParams { tau_d_minus: 10f64.powf(t2), ..a };
            let sl = slopes(5e-5, 0.0);
            prop_assert_eq!(spm_tf(s, &a, &sl).unwrap(), spm_tf(s, &b, &sl).unwrap());
        }

        #[test]
        fn equal_slopes_swap_invariance(logw in -6.0f64..4.0, t1 in -1.0f64..5.0, t2 in -1.0f64..5.0, beta in 1e-6f64..1e-3) {
            let s = c(0.0, 10f64.powf(logw));
            let a = IdentifiableParams { tau_d_plus: 10f64.powf(t1), tau_d_minus: 10f64.powf(t2), r_ct0: 0.03 };
            let b = IdentifiableParams { tau_d_plus: a.tau_d_minus, tau_d_minus: a.tau_d_plus, r_ct0: 0.03 };
            let sl = slopes(beta, -beta);
            prop_assert_eq!(spm_tf(s, &a, &sl).unwrap(), spm_tf(s, &b, &sl).unwrap());
        }
    }
}
