//! Time-domain solution of the linearised single-particle model by Chebyshev
//! collocation in the radial coordinate and trapezoidal stepping in time.
//!
//! Each electrode is described by the scaled field `u(r, t) = r * x(r, t)` on
//! `r in [0, 1]`:
//!
//! ```text
//! du/dt = (1/tau) d2u/dr2,   u(0) = 0,   du/dr(1) - u(1) = -(tau/3) I
//! ```
//!
//! The surface value `u(1)` is the scaled surface stoichiometry, and the
//! voltage deviation is `beta+ u+(1) - beta- u-(1) - R0 I`, whose transfer
//! function is exactly the frequency-domain model `H0(s)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocv::OcvSlopes;

pub const MIN_POINTS: usize = 8;
pub const DEFAULT_POINTS: usize = 20;

/// Piecewise-constant current, held from each sample until the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentProfile {
    samples: Vec<(f64, f64)>,
}

impl CurrentProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(t0, _)) = samples.first() else {
            return Err(Error::invalid("profile", "current profile is empty"));
        };
        if t0 != 0.0 {
            return Err(Error::invalid("profile", format!("must start at t = 0, starts at {t0}")));
        }
        if samples.iter().any(|(t, i)| !t.is_finite() || !i.is_finite()) {
            return Err(Error::invalid("profile", "non-finite sample"));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "profile",
                format!("times must be strictly increasing ({} then {})", w[0].0, w[1].0),
            ));
        }
        Ok(CurrentProfile { samples })
    }

    /// Uniformly sampled profile `I(k dt) = f(k dt)` for `k = 0..n`.
    pub fn sampled(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(dt > 0.0) || n == 0 {
            return Err(Error::invalid("dt", "need dt > 0 and at least one sample"));
        }
        Self::new((0..n).map(|k| (k as f64 * dt, f(k as f64 * dt))).collect())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.0)
    }

    pub fn current_at(&self, t: f64) -> f64 {
        let k = self.samples.partition_point(|s| s.0 <= t);
        self.samples[k.saturating_sub(1)].1
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CurrentProfile { samples: self.samples.iter().map(|&(t, i)| (t, factor * i)).collect() }
    }

    /// Exact integral of the held current over `[0, t]`.
    pub fn charge(&self, t: f64) -> f64 {
        let mut q = 0.0;
        for (k, &(tk, ik)) in self.samples.iter().enumerate() {
            if tk >= t {
                break;
            }
            let end = self.samples.get(k + 1).map_or(t, |s| s.0.min(t));
            q += ik * (end - tk);
        }
        q
    }
}

/// Chebyshev-Gauss-Lobatto nodes on `[0, 1]`, `r_0 = 0`, `r_N = 1`.
pub fn cgl_nodes(n_points: usize) -> Vec<f64> {
    let n = (n_points - 1) as f64;
    (0..n_points)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n).cos()))
        .collect()
}

/// First-derivative collocation matrix on [`cgl_nodes`].
pub fn cheb_diff_matrix(n_points: usize) -> DMatrix<f64> {
    let n = n_points - 1;
    let x: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::zeros(n_points, n_points);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = c(i) / c(j) * sign / (x[i] - x[j]);
            }
        }
        // negative-sum trick for the diagonal
        let row: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -row;
    }
    // r = (1 - x) / 2
    d * -2.0
}

/// Clenshaw-Curtis weights on [`cgl_nodes`] for integrals over `[0, 1]`.
pub fn clenshaw_curtis_weights(n_points: usize) -> Vec<f64> {
    let n = n_points - 1;
    let nf = n as f64;
    let theta = |j: usize| std::f64::consts::PI * j as f64 / nf;
    let mut w = vec![0.0; n_points];
    let end = if n.is_multiple_of(2) { 1.0 / (nf * nf - 1.0) } else { 1.0 / (nf * nf) };
    w[0] = end;
    w[n] = end;
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let mut v = 1.0;
        let half = if n.is_multiple_of(2) { n / 2 - 1 } else { (n - 1) / 2 };
        for k in 1..=half {
            let kf = k as f64;
            v -= 2.0 * (2.0 * kf * theta(j)).cos() / (4.0 * kf * kf - 1.0);
        }
        if n.is_multiple_of(2) {
            v -= (nf * theta(j)).cos() / (nf * nf - 1.0);
        }
        *wj = 2.0 * v / nf;
    }
    w.iter().map(|x| 0.5 * x).collect()
}

/// Discretised single electrode: `dz/dt = A z + b I`, surface value
/// `u(1) = g . z + h I`, volume average `<x> = m . z + k I`, with `z` the
/// interior nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeOperator {
    pub tau: f64,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub g: DVector<f64>,
    pub h: f64,
    pub m: DVector<f64>,
    pub k: f64,
}

impl ElectrodeOperator {
    fn build(tau: f64, n_points: usize) -> Self {
        let n = n_points - 1;
        let m_int = n - 1;
        let d = cheb_diff_matrix(n_points);
        let d2 = &d * &d;
        let denom = d[(n, n)] - 1.0;
        let g = DVector::from_fn(m_int, |i, _| -d[(n, i + 1)] / denom);
        let h = -(tau / 3.0) / denom;

        let d2_ii = d2.view((1, 1), (m_int, m_int)).into_owned();
        let d2_in = d2.view((1, n), (m_int, 1)).into_owned();
        let a = (d2_ii + &d2_in * g.transpose()) / tau;
        let b = d2_in.column(0).into_owned() * (h / tau);

        let r = cgl_nodes(n_points);
        let w = clenshaw_curtis_weights(n_points);
        let m = DVector::from_fn(m_int, |i, _| 3.0 * w[i + 1] * r[i + 1]) + &g * (3.0 * w[n]);
        let k = 3.0 * w[n] * h;
        ElectrodeOperator { tau, a, b, g, h, m, k }
    }

    /// `u(1) / I` at complex frequency `s`.
    pub fn surface_response(&self, s: Complex64) -> Result<Complex64> {
        let dim = self.a.nrows();
        let lhs = DMatrix::<Complex64>::from_fn(dim, dim, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DVector::<Complex64>::from_fn(dim, |i, _| Complex64::new(self.b[i], 0.0));
        let x = lhs.lu().solve(&rhs).ok_or(Error::Pole)?;
        let gx: Complex64 = self.g.iter().zip(x.iter()).map(|(g, x)| *x * *g).sum();
        Ok(gx + self.h)
    }
}

/// Collocation discretisation of both electrodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationModel {
    pub n_points: usize,
    pub plus: ElectrodeOperator,
    pub minus: ElectrodeOperator,
}

pub fn build_model(tau_plus: f64, tau_minus: f64, n_points: usize) -> Result<CollocationModel> {
    for (name, t) in [("tau_d_plus", tau_plus), ("tau_d_minus", tau_minus)] {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(name, format!("must be finite and > 0, got {t}")));
        }
    }
    if n_points < MIN_POINTS {
        return Err(Error::Resolution(format!("n_points = {n_points}, need at least {MIN_POINTS}")));
    }
    Ok(CollocationModel {
        n_points,
        plus: ElectrodeOperator::build(tau_plus, n_points),
        minus: ElectrodeOperator::build(tau_minus, n_points),
    })
}

impl CollocationModel {
    /// Semi-discrete transfer function `V / I` at `s = i omega`.
    pub fn frequency_response(&self, omega: f64, slopes: &OcvSlopes, r0: f64) -> Result<Complex64> {
        let s = Complex64::new(0.0, omega);
        Ok(self.plus.surface_response(s)? * slopes.beta_plus - self.minus.surface_response(s)? * slopes.beta_minus
            - r0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateOptions {
    pub dt: f64,
    /// End time; defaults to the last profile sample.
    pub horizon: Option<f64>,
    /// Multiplier on the cathode slope.
    pub slope_scale_plus: f64,
    /// Keep every `record_stride`-th step.
    pub record_stride: usize,
    /// Discard samples before this time, s.
    pub record_after: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions { dt: 1.0, horizon: None, slope_scale_plus: 1.0, record_stride: 1, record_after: 0.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub current: Vec<f64>,
    pub v: Vec<f64>,
    pub x_surf_plus: Vec<f64>,
    pub x_surf_minus: Vec<f64>,
    pub x_avg_plus: Vec<f64>,
    pub x_avg_minus: Vec<f64>,
}

struct Stepper<'a> {
    op: &'a ElectrodeOperator,
    m: DMatrix<f64>,
    v: DVector<f64>,
    z: DVector<f64>,
}

impl<'a> Stepper<'a> {
    fn new(op: &'a ElectrodeOperator, dt: f64) -> Result<Self> {
        let dim = op.a.nrows();
        let eye = DMatrix::<f64>::identity(dim, dim);
        let lhs = &eye - &op.a * (0.5 * dt);
        let inv = lhs
            .try_inverse()
            .ok_or_else(|| Error::Resolution("trapezoidal system matrix is singular".into()))?;
        let m = &inv * (&eye + &op.a * (0.5 * dt));
        let v = &inv * &op.b * dt;
        Ok(Stepper { op, m, v, z: DVector::zeros(dim) })
    }

    fn step(&mut self, current: f64) {
        self.z = &self.m * &self.z + &self.v * current;
    }

    fn surface(&self, current: f64) -> f64 {
        self.op.g.dot(&self.z) + self.op.h * current
    }

    fn average(&self, current: f64) -> f64 {
        self.op.m.dot(&self.z) + self.op.k * current
    }
}

pub fn simulate(
    model: &CollocationModel,
    slopes: &OcvSlopes,
    r0: f64,
    profile: &CurrentProfile,
    opts: &SimulateOptions,
) -> Result<TimeSeries> {
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {}", opts.dt)));
    }
    if opts.record_stride == 0 {
        return Err(Error::invalid("record_stride", "must be >= 1"));
    }
    if !r0.is_finite() || !opts.slope_scale_plus.is_finite() {
        return Err(Error::invalid("r0", "R0 and slope scale must be finite"));
    }
    let horizon = opts.horizon.unwrap_or(profile.duration());
    if !(horizon >= 0.0) || horizon > profile.duration() * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::invalid(
            "horizon",
            format!("{horizon} s exceeds the profile duration {} s", profile.duration()),
        ));
    }
    let steps = (horizon / opts.dt * (1.0 + 1e-12)).floor() as usize;
    let beta_plus = slopes.beta_plus * opts.slope_scale_plus;

    let mut plus = Stepper::new(&model.plus, opts.dt)?;
    let mut minus = Stepper::new(&model.minus, opts.dt)?;
    let mut out = TimeSeries::default();
    for k in 0..=steps {
        let t = k as f64 * opts.dt;
        let i_k = profile.current_at(t);
        if k > 0 {
            let i_prev = profile.current_at((k - 1) as f64 * opts.dt);
            plus.step(i_prev);
            minus.step(i_prev);
        }
        let xs_p = plus.surface(i_k);
        let xs_m = minus.surface(i_k);
        let v = beta_plus * xs_p - slopes.beta_minus * xs_m - r0 * i_k;
        if !v.is_finite() {
            return Err(Error::NonFinite { t });
        }
        if k % opts.record_stride == 0 && t >= opts.record_after {
            out.t.push(t);
            out.current.push(i_k);
            out.v.push(v);
            out.x_surf_plus.push(xs_p);
            out.x_surf_minus.push(xs_m);
            out.x_avg_plus.push(plus.average(i_k));
            out.x_avg_minus.push(minus.average(i_k));
        }
    }
    Ok(out)
}

/// Least-squares `a sin(w t) + b cos(w t) + c` fit to `(t, y)`, returned as
/// the phasor `a + i b`: the gain `G` of a response `Im(G exp(i w t))` to the
/// input `sin(w t)`.
pub fn sinusoid_phasor(t: &[f64], y: &[f64], omega: f64) -> Complex64 {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let row = nalgebra::Vector3::new((omega * ti).sin(), (omega * ti).cos(), 1.0);
        ata += row * row.transpose();
        aty += row * yi;
    }
    let coef = ata.lu().solve(&aty).unwrap_or_default();
    Complex64::new(coef[0], coef[1])
}
