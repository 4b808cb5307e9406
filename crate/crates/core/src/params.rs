//! Parameter representations of the single-particle model and the exact
//! algebraic maps between them.
//!
//! Electrode suffixes: `plus` is the cathode (positive electrode), `minus` the
//! anode. The cathode theoretical capacity is stored negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Faraday constant, C/mol.
pub const FARADAY: f64 = 96485.33212;
/// Molar gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314462618;
/// 20 degC, the default cell temperature.
pub const DEFAULT_TEMPERATURE: f64 = 293.15;

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Raw electrode parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub delta_plus: f64,
    pub delta_minus: f64,
    #[serde(rename = "R_plus")]
    pub radius_plus: f64,
    #[serde(rename = "R_minus")]
    pub radius_minus: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    #[serde(rename = "D_plus")]
    pub diffusivity_plus: f64,
    #[serde(rename = "D_minus")]
    pub diffusivity_minus: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub c_max_plus: f64,
    pub c_max_minus: f64,
    #[serde(rename = "A")]
    pub area: f64,
    pub c_e: f64,
    #[serde(rename = "T", default = "default_temperature")]
    pub temperature: f64,
}

impl PhysicalParams {
    /// LCO reference cell used for the synthetic impedance experiments.
    pub fn lco_reference() -> Self {
        PhysicalParams {
            delta_plus: 70.0e-6,
            delta_minus: 73.5e-6,
            radius_plus: 8.5e-6,
            radius_minus: 12.5e-6,
            eps_plus: 0.3,
            eps_minus: 0.4382,
            diffusivity_plus: 1.0e-11,
            diffusivity_minus: 5.5e-14,
            k_plus: 6.667e-11,
            k_minus: 1.764e-11,
            c_max_plus: 51555.0,
            c_max_minus: 30555.0,
            area: 982.0e-4,
            c_e: 1000.0,
            temperature: DEFAULT_TEMPERATURE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_plus", self.delta_plus),
            ("delta_minus", self.delta_minus),
            ("R_plus", self.radius_plus),
            ("R_minus", self.radius_minus),
            ("eps_plus", self.eps_plus),
            ("eps_minus", self.eps_minus),
            ("D_plus", self.diffusivity_plus),
            ("D_minus", self.diffusivity_minus),
            ("k_plus", self.k_plus),
            ("k_minus", self.k_minus),
            ("c_max_plus", self.c_max_plus),
            ("c_max_minus", self.c_max_minus),
            ("A", self.area),
            ("c_e", self.c_e),
            ("T", self.temperature),
        ];
        for (name, v) in positive {
            require_positive(name, v)?;
        }
        for (name, v) in [("eps_plus", self.eps_plus), ("eps_minus", self.eps_minus)] {
            if v >= 1.0 {
                return Err(Error::invalid(name, format!("volume fraction must be < 1, got {v}")));
            }
        }
        Ok(())
    }
}

/// The six physically meaningful parameter groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupedParams {
    pub tau_d_plus: f64,
    pub tau_d_minus: f64,
    pub tau_k_plus: f64,
    pub tau_k_minus: f64,
    /// Negative by convention.
    pub q_th_plus: f64,
    pub q_th_minus: f64,
}

impl GroupedParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("tau_d_plus", self.tau_d_plus)?;
        require_positive("tau_d_minus", self.tau_d_minus)?;
        require_positive("tau_k_plus", self.tau_k_plus)?;
        require_positive("tau_k_minus", self.tau_k_minus)?;
        require_positive("q_th_minus", self.q_th_minus)?;
        if !(self.q_th_plus.is_finite() && self.q_th_plus < 0.0) {
            return Err(Error::invalid(
                "q_th_plus",
                format!("cathode capacity is negative by convention, got {}", self.q_th_plus),
            ));
        }
        Ok(())
    }
}

/// `[tau_d+, tau_d+/(3Q+), tau_k+/(3Q+), tau_d-, tau_d-/(3Q-), tau_k-/(3Q-)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector(pub [f64; 6]);

impl ThetaVector {
    pub fn validate(&self) -> Result<()> {
        let t = &self.0;
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("theta", "non-finite component"));
        }
        if !(t[0] > 0.0 && t[3] > 0.0) {
            return Err(Error::invalid("theta", "theta_1 and theta_4 must be > 0"));
        }
        if !(t[1] < 0.0 && t[2] < 0.0) {
            return Err(Error::invalid("theta", "theta_2 and theta_3 must be < 0"));
        }
        if !(t[4] > 0.0 && t[5] > 0.0) {
            return Err(Error::invalid("theta", "theta_5 and theta_6 must be > 0"));
        }
        Ok(())
    }
}

/// The identifiable group of the linearised model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifiableParams {
    pub tau_d_plus: f64,
    pub tau_d_minus: f64,
    pub r_ct0: f64,
}

impl IdentifiableParams {
    pub fn new(tau_d_plus: f64, tau_d_minus: f64, r_ct0: f64) -> Result<Self> {
        let p = IdentifiableParams { tau_d_plus, tau_d_minus, r_ct0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("tau_d_plus", self.tau_d_plus)?;
        require_positive("tau_d_minus", self.tau_d_minus)?;
        if !self.r_ct0.is_finite() {
            return Err(Error::invalid("r_ct0", "must be finite"));
        }
        Ok(())
    }
}

/// Linearisation point `(x+0, x-0, I0 = 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub x0_plus: f64,
    pub x0_minus: f64,
    pub dod: f64,
}

impl OperatingPoint {
    /// The linearisation current is always zero.
    pub const I0: f64 = 0.0;

    pub fn new(x0_plus: f64, x0_minus: f64, dod: f64) -> Result<Self> {
        check_stoichiometry("cathode", x0_plus)?;
        check_stoichiometry("anode", x0_minus)?;
        if !(0.0..=1.0).contains(&dod) {
            return Err(Error::invalid("dod", format!("must lie in [0, 1], got {dod}")));
        }
        Ok(OperatingPoint { x0_plus, x0_minus, dod })
    }
}

fn check_stoichiometry(electrode: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::SingularStoichiometry { electrode, value: x })
    }
}

/// Linear map from depth of discharge to electrode stoichiometries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoichiometryWindow {
    pub x_plus_at_dod0: f64,
    pub x_plus_at_dod1: f64,
    pub x_minus_at_dod0: f64,
    pub x_minus_at_dod1: f64,
}

impl StoichiometryWindow {
    pub fn operating_point(&self, dod: f64) -> Result<OperatingPoint> {
        let lerp = |a: f64, b: f64| a + (b - a) * dod;
        OperatingPoint::new(
            lerp(self.x_plus_at_dod0, self.x_plus_at_dod1),
            lerp(self.x_minus_at_dod0, self.x_minus_at_dod1),
            dod,
        )
    }
}

/// Form the six groups from raw electrode parameters.
pub fn group_from_physical(p: &PhysicalParams) -> Result<GroupedParams> {
    p.validate()?;
    let sqrt_ce = p.c_e.sqrt();
    let g = GroupedParams {
        tau_d_plus: p.radius_plus.powi(2) / p.diffusivity_plus,
        tau_d_minus: p.radius_minus.powi(2) / p.diffusivity_minus,
        tau_k_plus: p.radius_plus / (2.0 * p.k_plus * sqrt_ce),
        tau_k_minus: p.radius_minus / (2.0 * p.k_minus * sqrt_ce),
        q_th_plus: -p.eps_plus * p.delta_plus * p.c_max_plus * FARADAY * p.area,
        q_th_minus: p.eps_minus * p.delta_minus * p.c_max_minus * FARADAY * p.area,
    };
    Ok(g)
}

pub fn theta_from_groups(g: &GroupedParams) -> Result<ThetaVector> {
    g.validate()?;
    let three_qp = 3.0 * g.q_th_plus;
    let three_qm = 3.0 * g.q_th_minus;
    Ok(ThetaVector([
        g.tau_d_plus,
        g.tau_d_plus / three_qp,
        g.tau_k_plus / three_qp,
        g.tau_d_minus,
        g.tau_d_minus / three_qm,
        g.tau_k_minus / three_qm,
    ]))
}

pub fn groups_from_theta(t: &ThetaVector) -> Result<GroupedParams> {
    let [t1, t2, t3, t4, t5, t6] = t.0;
    if t2 == 0.0 || t5 == 0.0 {
        return Err(Error::DegenerateMapping(format!(
            "theta_2 = {t2}, theta_5 = {t5}; both must be non-zero"
        )));
    }
    t.validate()?;
    Ok(GroupedParams {
        tau_d_plus: t1,
        tau_k_plus: t1 * t3 / t2,
        q_th_plus: t1 / (3.0 * t2),
        tau_d_minus: t4,
        tau_k_minus: t4 * t6 / t5,
        q_th_minus: t4 / (3.0 * t5),
    })
}

/// `2RT/F` in volts.
pub fn thermal_voltage_2rt_f(temperature: f64) -> f64 {
    2.0 * GAS_CONSTANT * temperature / FARADAY
}

/// Linearised charge-transfer resistance at the operating point, in ohms.
///
/// Only `theta_3 / sqrt(x+(1-x+)) - theta_6 / sqrt(x-(1-x-))` enters, so the two
/// kinetic groups are not separately identifiable.
pub fn charge_transfer_resistance(
    theta3: f64,
    theta6: f64,
    op: &OperatingPoint,
    temperature: f64,
) -> Result<f64> {
    check_stoichiometry("cathode", op.x0_plus)?;
    check_stoichiometry("anode", op.x0_minus)?;
    require_positive("T", temperature)?;
    let cathode = theta3 / ((1.0 - op.x0_plus) * op.x0_plus).sqrt();
    let anode = theta6 / ((1.0 - op.x0_minus) * op.x0_minus).sqrt();
    Ok(-thermal_voltage_2rt_f(temperature) * (cathode - anode))
}
