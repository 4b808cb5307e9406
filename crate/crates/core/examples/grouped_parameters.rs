//! Collapses the physical reference cell into parameter groups, the theta
//! vector and the three identifiable quantities at a few depths of discharge.
//!
//! ```text
//! cargo run --example grouped_parameters
//! ```

use spm_eis::fixtures;
use spm_eis::params::{group_from_physical, groups_from_theta, theta_from_groups, PhysicalParams};

fn main() -> spm_eis::Result<()> {
    let phys = PhysicalParams::lco_reference();
    let groups = group_from_physical(&phys)?;
    let theta = theta_from_groups(&groups)?;
    let back = groups_from_theta(&theta)?;

    println!("tau_d+  = {:>12.6} s", groups.tau_d_plus);
    println!("tau_d-  = {:>12.6} s", groups.tau_d_minus);
    println!("tau_k+  = {:>12.6e} s", groups.tau_k_plus);
    println!("tau_k-  = {:>12.6e} s", groups.tau_k_minus);
    println!("Q_th+   = {:>12.3} C", groups.q_th_plus);
    println!("Q_th-   = {:>12.3} C", groups.q_th_minus);
    println!();
    for (k, t) in theta.0.iter().enumerate() {
        println!("theta_{} = {t:.6e}", k + 1);
    }
    let drift = (back.tau_k_plus / groups.tau_k_plus - 1.0).abs();
    println!("\nround trip relative drift in tau_k+: {drift:.1e}");

    println!("\n  DoD    x0+      x0-      R_ct (ohm)");
    let window = fixtures::lco_window();
    for dod in [0.05, 0.25, 0.5, 0.75, 0.95] {
        let op = window.operating_point(dod)?;
        println!("  {dod:.2}  {:.4}  {:.4}  {:.6}", op.x0_plus, op.x0_minus, fixtures::lco_r_ct(dod)?);
    }
    Ok(())
}
