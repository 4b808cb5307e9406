//! Least-squares estimation of the two diffusion time constants from impedance
//! spectra at one or several depths of discharge, and the log-loss landscape
//! over the `(tau+, tau-)` plane.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{model_impedance, EisSpectrum};
use crate::ocv::OcvSlopes;
use crate::params::IdentifiableParams;
use crate::simplex::{self, SimplexOptions};

/// One depth of discharge: measured spectrum, OCV slopes, and optionally a
/// known charge-transfer resistance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub spectrum: EisSpectrum,
    pub slopes: OcvSlopes,
    pub r_ct_fixed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDataset {
    entries: Vec<FitEntry>,
}

impl FitDataset {
    pub fn new(entries: Vec<FitEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DatasetInconsistency("dataset has no entries".into()));
        }
        for (i, a) in entries.iter().enumerate() {
            if a.spectrum.is_empty() {
                return Err(Error::DatasetInconsistency(format!("spectrum at DoD {} is empty", a.slopes.dod)));
            }
            if entries[..i].iter().any(|b| b.slopes.dod == a.slopes.dod) {
                return Err(Error::DatasetInconsistency(format!("DoD {} appears twice", a.slopes.dod)));
            }
        }
        Ok(FitDataset { entries })
    }

    pub fn entries(&self) -> &[FitEntry] {
        &self.entries
    }

    /// `sum |Z|^2` over all points; normalises curvature diagnostics.
    pub fn energy(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.spectrum.points())
            .map(|p| p.z.norm_sqr())
            .sum()
    }
}

/// Sum of squared complex residuals between a measured spectrum and the model.
pub fn loss_single(p: &IdentifiableParams, spec: &EisSpectrum, slopes: &OcvSlopes) -> Result<f64> {
    spec.points().iter().try_fold(0.0, |acc, pt| {
        let z = model_impedance(pt.omega, p, slopes)?;
        Ok(acc + (pt.z - z).norm_sqr())
    })
}

/// How the per-DoD charge-transfer resistance is obtained during a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RctMode {
    /// Use each entry's `r_ct_fixed`.
    #[default]
    Fixed,
    /// Least-squares optimal resistance per entry for the current time
    /// constants. The resistance only shifts the real part, so the optimum is
    /// the mean real residual of the diffusion-only model.
    CoEstimate,
}

fn diffusion_only(tau_plus: f64, tau_minus: f64) -> Result<IdentifiableParams> {
    IdentifiableParams::new(tau_plus, tau_minus, 0.0)
}

fn entry_rct(entry: &FitEntry, tau_plus: f64, tau_minus: f64, mode: RctMode) -> Result<f64> {
    match mode {
        RctMode::Fixed => entry.r_ct_fixed.ok_or_else(|| {
            Error::Configuration(format!(
                "no charge-transfer resistance supplied for DoD {}",
                entry.slopes.dod
            ))
        }),
        RctMode::CoEstimate => {
            let p = diffusion_only(tau_plus, tau_minus)?;
            let pts = entry.spectrum.points();
            let sum = pts.iter().try_fold(0.0, |acc, pt| {
                Ok::<_, Error>(acc + (pt.z - model_impedance(pt.omega, &p, &entry.slopes)?).re)
            })?;
            Ok(sum / pts.len() as f64)
        }
    }
}

fn loss_with_mode(tau_plus: f64, tau_minus: f64, ds: &FitDataset, mode: RctMode) -> Result<f64> {
    ds.entries.iter().try_fold(0.0, |acc, e| {
        let r_ct0 = entry_rct(e, tau_plus, tau_minus, mode)?;
        let p = IdentifiableParams::new(tau_plus, tau_minus, r_ct0)?;
        Ok(acc + loss_single(&p, &e.spectrum, &e.slopes)?)
    })
}

/// Loss summed over all entries with shared time constants and per-entry
/// fixed charge-transfer resistances.
pub fn loss_combined(tau_plus: f64, tau_minus: f64, ds: &FitDataset) -> Result<f64> {
    loss_with_mode(tau_plus, tau_minus, ds, RctMode::Fixed)
}

/// Log-spaced axis of `n` points from `lo` to `hi` inclusive.
pub fn log_axis(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::invalid("axis", format!("need 0 < lo <= hi and n >= 1, got [{lo}, {hi}] x {n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|k| match k {
            0 => lo,
            _ if k == n - 1 => hi,
            _ => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Multi-start grid: `start_grid x start_grid` log-spaced points over
    /// `[start_lo, start_hi]` seconds in both time constants.
    pub start_grid: usize,
    pub start_lo: f64,
    pub start_hi: f64,
    /// Explicit starts `(tau+, tau-)`; replaces the grid when non-empty.
    pub starts: Vec<(f64, f64)>,
    /// Simplex diameter threshold in natural-log units.
    pub xtol: f64,
    /// Loss spread threshold, ohm^2.
    pub ftol: f64,
    pub max_iter: usize,
    /// Initial simplex edge in natural-log units.
    pub initial_step: f64,
    pub rct_mode: RctMode,
    /// Step (natural-log units) of the curvature probe at the optimum.
    pub curvature_step: f64,
    /// Curvature of `ln L` below which a direction is reported flat.
    pub flat_threshold: f64,
    /// Relative loss gap under which the swapped solution is reported.
    pub swap_rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            start_grid: 5,
            start_lo: 1.0,
            start_hi: 1e5,
            starts: Vec::new(),
            xtol: 1e-8,
            ftol: 1e-14,
            max_iter: 2000,
            initial_step: 0.5,
            rct_mode: RctMode::Fixed,
            curvature_step: 0.1,
            flat_threshold: 1e-3,
            swap_rel_tol: 1e-6,
        }
    }
}

impl FitOptions {
    pub fn start_points(&self) -> Result<Vec<(f64, f64)>> {
        if !self.starts.is_empty() {
            return Ok(self.starts.clone());
        }
        let axis = log_axis(self.start_lo, self.start_hi, self.start_grid)?;
        Ok(axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: (f64, f64),
    pub tau_d_plus: f64,
    pub tau_d_minus: f64,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Normalised second derivative of the loss along each log time constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub plus: f64,
    pub minus: f64,
    pub flat_plus: bool,
    pub flat_minus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapCandidate {
    pub tau_d_plus: f64,
    pub tau_d_minus: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub tau_d_plus: f64,
    pub tau_d_minus: f64,
    pub dods: Vec<f64>,
    pub r_ct_per_dod: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `sqrt(L_j / N_j)` per entry, ohm.
    pub per_dod_rms: Vec<f64>,
    pub curvature: Curvature,
    /// The electrode-swapped solution when it fits equally well.
    pub swapped: Option<SwapCandidate>,
    pub starts: Vec<StartOutcome>,
}

fn log_objective(ds: &FitDataset, mode: RctMode) -> impl Fn(&[f64]) -> f64 + '_ {
    move |u: &[f64]| {
        let (a, b) = (u[0].exp(), u[1].exp());
        loss_with_mode(a, b, ds, mode).unwrap_or(f64::INFINITY)
    }
}

pub fn fit(ds: &FitDataset, opts: &FitOptions) -> Result<FitResult> {
    if opts.rct_mode == RctMode::Fixed {
        if let Some(e) = ds.entries.iter().find(|e| e.r_ct_fixed.is_none()) {
            return Err(Error::Configuration(format!(
                "no charge-transfer resistance supplied for DoD {} (estimate R0 first or co-estimate)",
                e.slopes.dod
            )));
        }
    }
    let starts = opts.start_points()?;
    let simplex_opts = SimplexOptions {
        initial_step: opts.initial_step,
        xtol: opts.xtol,
        ftol: opts.ftol,
        max_iter: opts.max_iter,
    };

    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .map(|&(a, b)| {
            let out = simplex::minimize(log_objective(ds, opts.rct_mode), &[a.ln(), b.ln()], &simplex_opts);
            StartOutcome {
                start: (a, b),
                tau_d_plus: out.x[0].exp(),
                tau_d_minus: out.x[1].exp(),
                loss: out.f,
                iterations: out.iterations,
                converged: out.converged,
            }
        })
        .collect();

    let best = outcomes
        .iter()
        .filter(|o| o.converged && o.loss.is_finite())
        .min_by(|x, y| x.loss.total_cmp(&y.loss))
        .ok_or_else(|| {
            let best_loss = outcomes.iter().map(|o| o.loss).fold(f64::INFINITY, f64::min);
            Error::NonConvergence(format!(
                "none of {} starts converged (xtol {}, ftol {}, max_iter {}); lowest loss reached {best_loss:e}",
                outcomes.len(),
                opts.xtol,
                opts.ftol,
                opts.max_iter
            ))
        })?
        .clone();

    let (tp, tm) = (best.tau_d_plus, best.tau_d_minus);
    let mut r_ct_per_dod = Vec::with_capacity(ds.entries.len());
    let mut per_dod_rms = Vec::with_capacity(ds.entries.len());
    for e in &ds.entries {
        let r = entry_rct(e, tp, tm, opts.rct_mode)?;
        let l = loss_single(&IdentifiableParams::new(tp, tm, r)?, &e.spectrum, &e.slopes)?;
        r_ct_per_dod.push(r);
        per_dod_rms.push((l / e.spectrum.len() as f64).sqrt());
    }

    let curvature = curvature_at(ds, tp, tm, best.loss, opts)?;

    let swapped_loss = loss_with_mode(tm, tp, ds, opts.rct_mode)?;
    let scale = best.loss.max(swapped_loss);
    let swapped = ((swapped_loss - best.loss).abs() <= opts.swap_rel_tol * scale).then_some(SwapCandidate {
        tau_d_plus: tm,
        tau_d_minus: tp,
        loss: swapped_loss,
    });

    Ok(FitResult {
        tau_d_plus: tp,
        tau_d_minus: tm,
        dods: ds.entries.iter().map(|e| e.slopes.dod).collect(),
        r_ct_per_dod,
        loss: best.loss,
        iterations: best.iterations,
        converged: best.converged,
        per_dod_rms,
        curvature,
        swapped,
        starts: outcomes,
    })
}

/// Central second differences of `ln L` in log time-constant space.
/// `L` is floored at `1e-30 * sum |Z|^2`.
fn curvature_at(ds: &FitDataset, tp: f64, tm: f64, l0: f64, opts: &FitOptions) -> Result<Curvature> {
    let h = opts.curvature_step;
    let floor = 1e-30 * ds.energy().max(f64::MIN_POSITIVE);
    let ln = |x: f64| x.max(floor).ln();
    let l = |a: f64, b: f64| loss_with_mode(a, b, ds, opts.rct_mode).map(ln);
    let c = ln(l0);
    let eh = h.exp();
    let plus = (l(tp * eh, tm)? + l(tp / eh, tm)? - 2.0 * c) / (h * h);
    let minus = (l(tp, tm * eh)? + l(tp, tm / eh)? - 2.0 * c) / (h * h);
    Ok(Curvature {
        plus,
        minus,
        flat_plus: plus < opts.flat_threshold,
        flat_minus: minus < opts.flat_threshold,
    })
}

/// `ln L` over a `(tau+, tau-)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub tau_plus_axis: Vec<f64>,
    pub tau_minus_axis: Vec<f64>,
    /// `ln_loss[i][j]` at `(tau_plus_axis[i], tau_minus_axis[j])`.
    pub ln_loss: Vec<Vec<f64>>,
    /// Cells whose loss fell below the floor and were clamped to it.
    pub floored: Vec<(usize, usize)>,
}

impl LandscapeGrid {
    /// Index of the smallest cell (first in row-major order on ties).
    pub fn argmin(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.ln_loss.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v < self.ln_loss[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Cells strictly below all (up to eight) neighbours.
    pub fn local_minima(&self) -> Vec<(usize, usize)> {
        let (n, m) = (self.ln_loss.len(), self.tau_minus_axis.len());
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let v = self.ln_loss[i][j];
                let mut is_min = true;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= m as i64 {
                            continue;
                        }
                        if self.ln_loss[a as usize][b as usize] <= v {
                            is_min = false;
                        }
                    }
                }
                if is_min {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeOptions {
    pub floor: f64,
    pub rct_mode: RctMode,
}

impl Default for LandscapeOptions {
    fn default() -> Self {
        LandscapeOptions { floor: 1e-30, rct_mode: RctMode::Fixed }
    }
}

pub fn landscape(
    ds: &FitDataset,
    tau_plus_axis: &[f64],
    tau_minus_axis: &[f64],
    opts: &LandscapeOptions,
) -> Result<LandscapeGrid> {
    if tau_plus_axis.is_empty() || tau_minus_axis.is_empty() {
        return Err(Error::invalid("axis", "landscape axes must be non-empty"));
    }
    if tau_plus_axis.iter().chain(tau_minus_axis).any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("axis", "landscape axes must be positive"));
    }
    if !(opts.floor > 0.0) {
        return Err(Error::invalid("floor", "loss floor must be > 0"));
    }
    let rows: Vec<Vec<f64>> = tau_plus_axis
        .par_iter()
        .map(|&a| {
            tau_minus_axis
                .iter()
                .map(|&b| loss_with_mode(a, b, ds, opts.rct_mode))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut floored = Vec::new();
    let ln_loss = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, l)| {
                    if l < opts.floor {
                        floored.push((i, j));
                        opts.floor.ln()
                    } else {
                        l.ln()
                    }
                })
                .collect()
        })
        .collect();
    Ok(LandscapeGrid {
        tau_plus_axis: tau_plus_axis.to_vec(),
        tau_minus_axis: tau_minus_axis.to_vec(),
        ln_loss,
        floored,
    })
}

/// Model-minus-data residuals of one entry at the given estimate.
pub fn residuals(entry: &FitEntry, p: &IdentifiableParams) -> Result<Vec<(f64, Complex64, Complex64)>> {
    entry
        .spectrum
        .points()
        .iter()
        .map(|pt| Ok((pt.omega, pt.z, model_impedance(pt.omega, p, &entry.slopes)?)))
        .collect()
}
