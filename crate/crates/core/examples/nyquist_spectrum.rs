//! Simulates the reference-cell impedance at four depths of discharge and
//! prints the Nyquist coordinates plus each electrode's share of the signal.
//!
//! ```text
//! cargo run --example nyquist_spectrum
//! ```

use num_complex::Complex64;
use spm_eis::fixtures::{self, LCO_DODS};
use spm_eis::impedance::{diffusion_tf, simulate_eis, warburg_f};
use spm_eis::params::IdentifiableParams;

fn main() -> spm_eis::Result<()> {
    let (tp, tm) = fixtures::lco_time_constants()?;
    let grid = fixtures::standard_grid();
    for dod in LCO_DODS {
        let slopes = fixtures::lco_slopes(dod)?;
        let p = IdentifiableParams::new(tp, tm, fixtures::lco_r_ct(dod)?)?;
        let spec = simulate_eis(&p, &slopes, &grid, 0.0)?;
        println!("DoD {dod:.2}: R_ct = {:.5} ohm", p.r_ct0);
        println!("   f (Hz)        Re Z (ohm)   -Im Z (ohm)");
        for pt in spec.points().iter().step_by(6) {
            println!("   {:<12.4e}  {:>11.6}  {:>11.6}", pt.omega / std::f64::consts::TAU, pt.z.re, -pt.z.im);
        }
        let w = 1.0 / tm;
        let s = Complex64::new(0.0, w);
        let cath = (slopes.beta_plus * warburg_f(s, tp)?).norm();
        let anode = (slopes.beta_minus * warburg_f(s, tm)?).norm();
        println!("   at w = 1/tau-: |cathode| {cath:.3e}, |anode| {anode:.3e}\n");
    }
    let q_th = -fixtures::LCO_CAPACITY;
    for w in [1e-6, 1e-3, 1.0] {
        let h = diffusion_tf(Complex64::new(0.0, w), tp, q_th)?;
        println!("cathode diffusion transfer at {w:.0e} rad/s, Q_th = {q_th} C: {h:.4e}");
    }
    Ok(())
}
