//! Recovers the series resistance from the low-frequency Warburg tail by
//! iterative fixed-slope regression, then repeats with measurement noise and
//! an extra ohmic offset.
//!
//! ```text
//! cargo run --example r0_regression
//! ```

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use spm_eis::fixtures::{self, LCO_DODS};
use spm_eis::impedance::{simulate_eis, EisPoint, EisSpectrum};
use spm_eis::params::IdentifiableParams;
use spm_eis::r0::{estimate_r0, R0Options};

fn main() -> spm_eis::Result<()> {
    let (tp, tm) = fixtures::lco_time_constants()?;
    let grid = fixtures::standard_grid();
    let opts = R0Options::default();
    println!("  DoD   truth      clean      err %    noisy+0.01  points");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 2e-6).unwrap();
    for dod in LCO_DODS {
        let truth = fixtures::lco_r_ct(dod)?;
        let p = IdentifiableParams::new(tp, tm, truth)?;
        let spec = simulate_eis(&p, &fixtures::lco_slopes(dod)?, &grid, 0.0)?;
        let clean = estimate_r0(&spec, &opts)?;

        let noisy = EisSpectrum::new(
            dod,
            spec.with_series_resistance(0.01)
                .points()
                .iter()
                .map(|pt| EisPoint { omega: pt.omega, z: pt.z + Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng)) })
                .collect(),
        )?;
        let shifted = match estimate_r0(&noisy, &opts) {
            Ok(e) => format!("{:.6}", e.r0 - 0.01),
            Err(_) => "failed".to_string(),
        };
        let err = 100.0 * (clean.r0 / truth - 1.0);
        println!("  {dod:.2}  {truth:.6}  {:.6}  {err:+.3}   {shifted:<10}  {}", clean.r0, clean.points_used);
    }

    let spec = simulate_eis(&IdentifiableParams::new(tp, tm, 0.04)?, &fixtures::lco_slopes(0.5)?, &grid, 0.0)?;
    println!("\nregression trace at DoD 0.5:");
    for it in estimate_r0(&spec, &opts)?.trace {
        println!("  n={:<3} R0={:.6} R^2={:.5} drop={:?}", it.points, it.r0, it.r_squared, it.dropped_hz);
    }
    Ok(())
}
