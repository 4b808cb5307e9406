//! Fits the two diffusion time constants to spectra at several depths of
//! discharge, once with known charge-transfer resistances and once with
//! them co-estimated.
//!
//! ```text
//! cargo run --release --example multi_dod_fit
//! ```

use spm_eis::estimate::{fit, FitDataset, FitOptions, RctMode};
use spm_eis::fixtures::{self, LCO_DODS};

fn main() -> spm_eis::Result<()> {
    let (tp, tm) = fixtures::lco_time_constants()?;
    let ds = fixtures::lco_dataset(&LCO_DODS, &fixtures::standard_grid())?;
    println!("truth: tau_d+ = {tp:.6} s, tau_d- = {tm:.6} s\n");

    let fixed = fit(&ds, &FitOptions::default())?;
    report("fixed R_ct", &fixed);

    let free = FitDataset::new(ds.entries().iter().cloned().map(|mut e| { e.r_ct_fixed = None; e }).collect())?;
    let co = fit(&free, &FitOptions { rct_mode: RctMode::CoEstimate, ..FitOptions::default() })?;
    report("co-estimated R_ct", &co);
    for (d, r) in co.dods.iter().zip(&co.r_ct_per_dod) {
        println!("  DoD {d:.2}: R_ct {r:.6} (truth {:.6})", fixtures::lco_r_ct(*d)?);
    }

    let single = FitDataset::new(vec![ds.entries()[2].clone()])?;
    report("single DoD 0.75", &fit(&single, &FitOptions::default())?);
    Ok(())
}

fn report(label: &str, r: &spm_eis::estimate::FitResult) {
    let converged = r.starts.iter().filter(|s| s.converged).count();
    println!(
        "{label}: tau_d+ = {:.6}, tau_d- = {:.6}, loss = {:.2e}, {converged}/{} starts converged, swap candidate: {}",
        r.tau_d_plus,
        r.tau_d_minus,
        r.loss,
        r.starts.len(),
        r.swapped.is_some()
    );
    println!("  ln L curvature: tau+ {:.3e} tau- {:.3e}", r.curvature.plus, r.curvature.minus);
}
