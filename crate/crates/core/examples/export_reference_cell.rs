//! Writes the synthetic reference cell as input files for the command-line
//! tool: parameter JSON, two-electrode OCV table and a 1 Hz drive profile.
//!
//! ```text
//! cargo run --example export_reference_cell -- crates/core/data
//! ```

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spm_eis::fixtures;
use spm_eis::io::{self, ParameterFile, ParameterSet};
use spm_eis::params::{PhysicalParams, DEFAULT_TEMPERATURE};
use spm_eis::timedomain::CurrentProfile;

fn main() -> spm_eis::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).map_err(|e| spm_eis::Error::Io { path: dir.clone(), source: e })?;

    let params = ParameterFile {
        params: ParameterSet::Physical(PhysicalParams::lco_reference()),
        window: Some(fixtures::lco_window()),
        temperature: DEFAULT_TEMPERATURE,
    };
    let ocv = io::render_ocv_csv(&fixtures::lco_ocv_plus(201)?, &fixtures::lco_ocv_minus(201)?)?;

    // 10 minutes of stop-and-go driving: bursts of discharge, regenerative
    // pulses and rests, sampled at 1 Hz
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut level: f64 = 0.0;
    let samples: Vec<(f64, f64)> = (0..=600)
        .map(|t| {
            if t % 20 == 0 {
                level = match rng.gen_range(0..4) {
                    0 => 0.0,
                    1 => rng.gen_range(-4.0..-1.0),
                    _ => rng.gen_range(1.0..8.0),
                };
            }
            let i = level + rng.gen_range(-0.2..0.2);
            (t as f64, (i * 1000.0f64).round() / 1000.0)
        })
        .collect();
    let profile = CurrentProfile::new(samples)?;

    for (name, body) in [
        ("lco_params.json", io::render_parameter_json(&params)?),
        ("lco_ocv.csv", ocv),
        ("drive_profile.csv", io::render_profile_csv(&profile)),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| spm_eis::Error::Io { path: path.clone(), source: e })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
