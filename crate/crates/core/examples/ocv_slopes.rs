//! Differentiates sampled open-circuit voltage curves and compares the
//! interpolated slopes with the analytic ones.
//!
//! ```text
//! cargo run --example ocv_slopes
//! ```

use spm_eis::fixtures::{self, LCO_CAPACITY};
use spm_eis::ocv::{slope_beta, slopes_at_dod};

fn main() -> spm_eis::Result<()> {
    let plus = fixtures::lco_ocv_plus(201)?;
    let minus = fixtures::lco_ocv_minus(201)?;
    println!("  DoD   beta+ (V/C)   exact         beta- (V/C)   exact");
    for k in 0..=10 {
        let dod = 0.05 + 0.09 * k as f64;
        let s = slopes_at_dod(&plus, &minus, dod)?;
        let (ep, em) = fixtures::lco_exact_slopes(dod);
        println!("  {dod:.2}  {:>12.5e}  {ep:>12.5e}  {:>12.5e}  {em:>12.5e}", s.beta_plus, s.beta_minus);
    }

    let coarse = fixtures::lco_ocv_plus(21)?;
    let q = 0.5 * LCO_CAPACITY;
    let fine = slope_beta(&plus, q)?;
    let rough = slope_beta(&coarse, q)?;
    let smooth = slope_beta(&coarse.smoothed(3)?, q)?;
    println!("\ncathode slope at half capacity: 201 samples {fine:.5e}, 21 samples {rough:.5e}, smoothed {smooth:.5e}");
    Ok(())
}
