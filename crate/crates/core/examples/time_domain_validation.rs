//! Runs the spectral collocation model under sinusoidal current and
//! compares the extracted voltage phasor with the analytic transfer
//! function, then drives it with a stop-and-go current profile.
//!
//! ```text
//! cargo run --release --example time_domain_validation
//! ```

use num_complex::Complex64;
use spm_eis::fixtures;
use spm_eis::impedance::spm_tf;
use spm_eis::params::IdentifiableParams;
use spm_eis::timedomain::{build_model, simulate, sinusoid_phasor, CurrentProfile, SimulateOptions, DEFAULT_POINTS};

fn main() -> spm_eis::Result<()> {
    let (tp, tm) = fixtures::lco_time_constants()?;
    let dod = 0.75;
    let slopes = fixtures::lco_slopes(dod)?;
    let r0 = fixtures::lco_r_ct(dod)?;
    let p = IdentifiableParams::new(tp, tm, r0)?;
    let model = build_model(tp, tm, DEFAULT_POINTS)?;

    println!("  w tau+    |G| sim      |H| exact    mag err    phase err (deg)");
    for k in -2..=2 {
        let omega = 10f64.powi(k) / tp;
        let period = std::f64::consts::TAU / omega;
        let dt = period / 1000.0;
        let settle = 10.0 * tm / 20.19;
        let n = ((settle + 3.0 * period) / dt).ceil() as usize;
        let profile = CurrentProfile::sampled(dt, n, |t| (omega * t).sin())?;
        let opts = SimulateOptions { dt, record_after: settle, ..SimulateOptions::default() };
        let ts = simulate(&model, &slopes, r0, &profile, &opts)?;
        let g = sinusoid_phasor(&ts.t, &ts.v, omega);
        let h = spm_tf(Complex64::new(0.0, omega), &p, &slopes)?;
        println!(
            "  {:<8.0e}  {:.6e}  {:.6e}  {:.2e}   {:+.4}",
            omega * tp,
            g.norm(),
            h.norm(),
            (g.norm() / h.norm() - 1.0).abs(),
            (g.arg() - h.arg()).to_degrees()
        );
    }

    // 1 A discharge for 10 minutes, then 20 minutes of rest
    let profile = CurrentProfile::new(vec![(0.0, 1.0), (600.0, 0.0), (1800.0, 0.0)])?;
    let ts = simulate(&model, &slopes, r0, &profile, &SimulateOptions { record_stride: 60, ..SimulateOptions::default() })?;
    println!("\npulse and relaxation at DoD {dod}:");
    println!("  t (s)   I (A)   dV (mV)   x_surf+      x_avg+");
    for k in 0..ts.t.len() {
        println!(
            "  {:<6.0}  {:<5.1}  {:>8.3}  {:>10.4e}  {:>10.4e}",
            ts.t[k],
            ts.current[k],
            1e3 * ts.v[k],
            ts.x_surf_plus[k],
            ts.x_avg_plus[k]
        );
    }
    Ok(())
}
