//! Synthetic LCO/graphite cell used by the examples, tests and the CLI
//! `simulate-eis` defaults.
//!
//! The open-circuit curves are smooth closed forms in depth of discharge `d`:
//!
//! ```text
//! U+(d) = 4.2 - 0.05 d - 0.27 (1 - exp(-d / 0.3))
//! U-(d) = 0.08 + 0.02 d + 0.127 (exp((d - 1) / 0.1) - exp(-10))
//! ```
//!
//! The cathode slope dominates at low depth of discharge, the slopes are
//! about equal near 75 % and the anode dominates near full discharge.

use crate::error::Result;
use crate::estimate::{FitDataset, FitEntry};
use crate::impedance::{simulate_eis, FrequencyGrid};
use crate::ocv::{slopes_at_dod, Electrode, OcvCurve, OcvSlopes};
use crate::params::{
    charge_transfer_resistance, group_from_physical, theta_from_groups, IdentifiableParams, PhysicalParams,
    StoichiometryWindow,
};

/// Nominal cell capacity, C (2 Ah).
pub const LCO_CAPACITY: f64 = 7200.0;

/// Depths of discharge of the four-point synthetic experiment.
pub const LCO_DODS: [f64; 4] = [0.05, 0.25, 0.75, 0.95];

pub fn lco_u_plus(d: f64) -> f64 {
    4.2 - 0.05 * d - 0.27 * (1.0 - (-d / 0.3).exp())
}

pub fn lco_u_minus(d: f64) -> f64 {
    0.08 + 0.02 * d + 0.127 * (((d - 1.0) / 0.1).exp() - (-10.0f64).exp())
}

/// Exact `-dU/dQ` of the closed forms: `(beta+, beta-)` in V/C.
pub fn lco_exact_slopes(d: f64) -> (f64, f64) {
    let dp = -0.05 - 0.9 * (-d / 0.3).exp();
    let dm = 0.02 + 1.27 * ((d - 1.0) / 0.1).exp();
    (-dp / LCO_CAPACITY, -dm / LCO_CAPACITY)
}

fn sampled(electrode: Electrode, n: usize, u: fn(f64) -> f64) -> Result<OcvCurve> {
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let d = k as f64 / (n - 1) as f64;
            (d * LCO_CAPACITY, u(d))
        })
        .collect();
    OcvCurve::new(electrode, &samples, LCO_CAPACITY)
}

/// Cathode curve sampled at `n` evenly spaced depths of discharge.
pub fn lco_ocv_plus(n: usize) -> Result<OcvCurve> {
    sampled(Electrode::Plus, n, lco_u_plus)
}

pub fn lco_ocv_minus(n: usize) -> Result<OcvCurve> {
    sampled(Electrode::Minus, n, lco_u_minus)
}

pub fn lco_window() -> StoichiometryWindow {
    StoichiometryWindow { x_plus_at_dod0: 0.5, x_plus_at_dod1: 0.95, x_minus_at_dod0: 0.8, x_minus_at_dod1: 0.05 }
}

/// `(tau+, tau-)` of the reference parameter set, s.
pub fn lco_time_constants() -> Result<(f64, f64)> {
    let g = group_from_physical(&PhysicalParams::lco_reference())?;
    Ok((g.tau_d_plus, g.tau_d_minus))
}

/// Linearised charge-transfer resistance of the reference cell at `dod`.
pub fn lco_r_ct(dod: f64) -> Result<f64> {
    let p = PhysicalParams::lco_reference();
    let theta = theta_from_groups(&group_from_physical(&p)?)?;
    let op = lco_window().operating_point(dod)?;
    charge_transfer_resistance(theta.0[2], theta.0[5], &op, p.temperature)
}

/// 5 kHz down to 200 uHz, six points per decade.
pub fn standard_grid() -> FrequencyGrid {
    FrequencyGrid::log_spaced_hz(5e3, 2e-4, 6).expect("constant grid bounds are valid")
}

/// Interpolated slopes of the reference curves at `dod`.
pub fn lco_slopes(dod: f64) -> Result<OcvSlopes> {
    slopes_at_dod(&lco_ocv_plus(201)?, &lco_ocv_minus(201)?, dod)
}

/// Noise-free spectra of the reference cell at `dods`, with the true
/// charge-transfer resistance attached to each entry.
pub fn lco_dataset(dods: &[f64], grid: &FrequencyGrid) -> Result<FitDataset> {
    let (tp, tm) = lco_time_constants()?;
    let entries = dods
        .iter()
        .map(|&dod| {
            let slopes = lco_slopes(dod)?;
            let r = lco_r_ct(dod)?;
            let spectrum = simulate_eis(&IdentifiableParams::new(tp, tm, r)?, &slopes, grid, 0.0)?;
            Ok(FitEntry { spectrum, slopes, r_ct_fixed: Some(r) })
        })
        .collect::<Result<Vec<_>>>()?;
    FitDataset::new(entries)
}
