//! Maps ln L over a log grid of time constants for one DoD with equal
//! electrode slopes, showing the mirrored pair of minima, and for the full
//! four-DoD dataset, where the mirror image disappears. Rows are tau+,
//! columns tau-, both from 1 s to 1e5 s.
//!
//! ```text
//! cargo run --release --example loss_landscape
//! ```

use spm_eis::estimate::{landscape, log_axis, FitDataset, FitEntry, LandscapeOptions};
use spm_eis::fixtures::{self, LCO_DODS};
use spm_eis::impedance::simulate_eis;
use spm_eis::ocv::OcvSlopes;
use spm_eis::params::IdentifiableParams;

fn main() -> spm_eis::Result<()> {
    let axis = log_axis(1.0, 1e5, 21)?;
    let (tp, tm) = (axis[4], axis[15]);
    let grid = fixtures::standard_grid();
    let slopes = OcvSlopes::new(5e-5, -5e-5, 0.5)?;
    let spectrum = simulate_eis(&IdentifiableParams::new(tp, tm, 0.04)?, &slopes, &grid, 0.0)?;
    let ds = FitDataset::new(vec![FitEntry { spectrum, slopes, r_ct_fixed: Some(0.04) }])?;
    let land = landscape(&ds, &axis, &axis, &LandscapeOptions::default())?;
    println!("equal slopes, truth ({tp:.1}, {tm:.1}):");
    print_grid(&land.ln_loss);
    let mut minima = land.local_minima();
    minima.sort_by(|a, b| land.ln_loss[a.0][a.1].total_cmp(&land.ln_loss[b.0][b.1]));
    for (i, j) in minima.iter().take(2) {
        println!("  minimum at tau+ {:.1}, tau- {:.1}: ln L = {:.2}", axis[*i], axis[*j], land.ln_loss[*i][*j]);
    }

    let full = fixtures::lco_dataset(&LCO_DODS, &grid)?;
    let land = landscape(&full, &axis, &axis, &LandscapeOptions::default())?;
    let (i, j) = land.argmin();
    println!("\nfour DoDs: grid minimum at tau+ {:.2}, tau- {:.1}", axis[i], axis[j]);
    print_grid(&land.ln_loss);
    Ok(())
}

fn print_grid(ln: &[Vec<f64>]) {
    let ramp = b" .:-=+*#%@";
    let lo = ln.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi = ln.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    for row in ln {
        let line: String = row
            .iter()
            .map(|v| ramp[(((v - lo) / (hi - lo)) * 9.0).round() as usize] as char)
            .collect();
        println!("  |{line}|");
    }
}
