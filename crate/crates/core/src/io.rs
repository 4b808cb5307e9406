//! File formats: impedance, OCV and current-profile CSVs, parameter JSON, and
//! the CSV renderings of results.
//!
//! Numbers are written with Rust's `Display`, the shortest decimal string
//! that parses back to the same `f64`, so repeated runs are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimate::LandscapeGrid;
use crate::impedance::{EisPoint, EisSpectrum};
use crate::ocv::{Electrode, OcvCurve};
use crate::params::{
    charge_transfer_resistance, group_from_physical, theta_from_groups, GroupedParams, IdentifiableParams,
    PhysicalParams, StoichiometryWindow, DEFAULT_TEMPERATURE,
};
use crate::r0::R0Estimate;
use crate::timedomain::{CurrentProfile, TimeSeries};

pub const EIS_HEADER: [&str; 3] = ["freq_hz", "z_real_ohm", "z_imag_ohm"];
pub const OCV_HEADER: [&str; 3] = ["q_coulomb", "u_plus_volt", "u_minus_volt"];
pub const PROFILE_HEADER: [&str; 2] = ["t_s", "i_a"];
pub const SCHEMA_VERSION: u64 = 1;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// `# key=value` lines anywhere in the file.
fn metadata(text: &str) -> BTreeMap<String, (u64, String)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let body = l.trim().strip_prefix('#')?;
            let (k, v) = body.split_once('=')?;
            Some((k.trim().to_string(), (i as u64 + 1, v.trim().to_string())))
        })
        .collect()
}

/// Header-checked numeric table; comment lines start with `#`.
fn numeric_table(path: &Path, text: &str, header: &[&str]) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let got = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let header_line = text
        .lines()
        .position(|l| !l.trim().starts_with('#') && !l.trim().is_empty())
        .map_or(1, |i| i as u64 + 1);
    if got.iter().collect::<Vec<_>>() != header {
        return Err(parse_err(
            path,
            header_line,
            format!("expected header `{}`, found `{}`", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(path, line, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let vals = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(path, line, format!("`{f}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, vals));
    }
    if rows.is_empty() {
        return Err(parse_err(path, header_line, "no data rows"));
    }
    Ok(rows)
}

/// Reads an impedance CSV. The depth of discharge comes from a `# dod=`
/// line, or from `dod_override` when given.
pub fn read_eis_csv(path: &Path, dod_override: Option<f64>) -> Result<EisSpectrum> {
    let text = read_text(path)?;
    let dod = match (dod_override, metadata(&text).get("dod")) {
        (Some(d), _) => d,
        (None, Some((line, v))) => v
            .parse::<f64>()
            .ok()
            .filter(|d| (0.0..=1.0).contains(d))
            .ok_or_else(|| parse_err(path, *line, format!("dod `{v}` is not a number in [0, 1]")))?,
        (None, None) => return Err(parse_err(path, 1, "missing `# dod=` metadata line")),
    };
    let rows = numeric_table(path, &text, &EIS_HEADER)?;
    let mut points = Vec::with_capacity(rows.len());
    for (line, v) in rows {
        if v[0] <= 0.0 {
            return Err(parse_err(path, line, format!("frequency must be > 0 Hz, got {}", v[0])));
        }
        points.push(EisPoint { omega: TWO_PI * v[0], z: Complex64::new(v[1], v[2]) });
    }
    EisSpectrum::new(dod, points).map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn render_eis_csv(spec: &EisSpectrum) -> String {
    let mut s = format!("# dod={}\n{}\n", spec.dod, EIS_HEADER.join(","));
    for p in spec.points() {
        let _ = writeln!(s, "{},{},{}", p.omega / TWO_PI, p.z.re, p.z.im);
    }
    s
}

/// Reads a two-electrode OCV table. The total capacity comes from a
/// `# total_capacity_coulomb=` line, else the last capacity sample.
pub fn read_ocv_csv(path: &Path) -> Result<(OcvCurve, OcvCurve)> {
    let text = read_text(path)?;
    let rows = numeric_table(path, &text, &OCV_HEADER)?;
    let total = match metadata(&text).get("total_capacity_coulomb") {
        Some((line, v)) => v
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite() && *c > 0.0)
            .ok_or_else(|| parse_err(path, *line, format!("total capacity `{v}` is not a positive number")))?,
        None => rows.last().map_or(0.0, |r| r.1[0]),
    };
    for w in rows.windows(2) {
        if w[1].1[0] <= w[0].1[0] {
            return Err(parse_err(path, w[1].0, "capacity must be strictly increasing"));
        }
    }
    let plus: Vec<(f64, f64)> = rows.iter().map(|(_, v)| (v[0], v[1])).collect();
    let minus: Vec<(f64, f64)> = rows.iter().map(|(_, v)| (v[0], v[2])).collect();
    let wrap = |e: Error| parse_err(path, 0, e.to_string());
    Ok((
        OcvCurve::new(Electrode::Plus, &plus, total).map_err(wrap)?,
        OcvCurve::new(Electrode::Minus, &minus, total).map_err(wrap)?,
    ))
}

pub fn render_ocv_csv(plus: &OcvCurve, minus: &OcvCurve) -> Result<String> {
    if plus.capacities() != minus.capacities() {
        return Err(Error::DatasetInconsistency("OCV curves must share capacity samples".into()));
    }
    let mut s = format!("# total_capacity_coulomb={}\n{}\n", plus.total_capacity(), OCV_HEADER.join(","));
    for ((q, up), um) in plus.capacities().iter().zip(plus.voltages()).zip(minus.voltages()) {
        let _ = writeln!(s, "{q},{up},{um}");
    }
    Ok(s)
}

pub fn read_profile_csv(path: &Path) -> Result<CurrentProfile> {
    let text = read_text(path)?;
    let rows = numeric_table(path, &text, &PROFILE_HEADER)?;
    if rows[0].1[0] != 0.0 {
        return Err(parse_err(path, rows[0].0, "profile must start at t_s = 0"));
    }
    for w in rows.windows(2) {
        if w[1].1[0] <= w[0].1[0] {
            return Err(parse_err(path, w[1].0, "time must be strictly increasing"));
        }
    }
    CurrentProfile::new(rows.into_iter().map(|(_, v)| (v[0], v[1])).collect())
}

pub fn render_profile_csv(p: &CurrentProfile) -> String {
    let mut s = format!("{}\n", PROFILE_HEADER.join(","));
    for (t, i) in p.samples() {
        let _ = writeln!(s, "{t},{i}");
    }
    s
}

pub fn render_time_series_csv(ts: &TimeSeries, states: bool) -> String {
    let mut s = String::from("t_s,v_dev_volt");
    if states {
        s.push_str(",x_surf_plus,x_surf_minus");
    }
    s.push('\n');
    for k in 0..ts.t.len() {
        let _ = write!(s, "{},{}", ts.t[k], ts.v[k]);
        if states {
            let _ = write!(s, ",{},{}", ts.x_surf_plus[k], ts.x_surf_minus[k]);
        }
        s.push('\n');
    }
    s
}

/// First row: `nan` then the `tau-` axis; each further row: `tau+` then
/// `ln L` along `tau-`.
pub fn render_landscape_csv(g: &LandscapeGrid) -> String {
    let mut s = String::from("nan");
    for t in &g.tau_minus_axis {
        let _ = write!(s, ",{t}");
    }
    s.push('\n');
    for (tp, row) in g.tau_plus_axis.iter().zip(&g.ln_loss) {
        let _ = write!(s, "{tp}");
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub fn render_r0_table(rows: &[R0Estimate], dods: &[f64]) -> String {
    let mut s = String::from("dod,r0_ohm,r_squared,points_used\n");
    for (e, d) in rows.iter().zip(dods) {
        let _ = writeln!(s, "{d},{},{},{}", e.r0, e.r_squared, e.points_used);
    }
    s
}

pub fn render_r0_trace(rows: &[R0Estimate], dods: &[f64]) -> String {
    let mut s = String::from("dod,points,r0_ohm,r_squared,dropped_hz\n");
    for (e, d) in rows.iter().zip(dods) {
        for it in &e.trace {
            let dropped = it.dropped_hz.map_or(String::new(), |f| f.to_string());
            let _ = writeln!(s, "{d},{},{},{},{dropped}", it.points, it.r0, it.r_squared);
        }
    }
    s
}

/// One residual table row per frequency: data, model and data minus model.
pub fn render_residual_csv(rows: &[(f64, Complex64, Complex64)]) -> String {
    let mut s =
        String::from("freq_hz,z_real_ohm,z_imag_ohm,model_real_ohm,model_imag_ohm,res_real_ohm,res_imag_ohm\n");
    for (w, z, m) in rows {
        let r = z - m;
        let _ = writeln!(s, "{},{},{},{},{},{},{}", w / TWO_PI, z.re, z.im, m.re, m.im, r.re, r.im);
    }
    s
}

/// Any of the three accepted parameterisations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParameterSet {
    Physical(PhysicalParams),
    Grouped(GroupedParams),
    Identifiable(IdentifiableParams),
}

/// Parameter JSON: `schema_version`, one flat parameter set, an optional
/// stoichiometry `window` and an optional temperature `T` for grouped sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterFile {
    pub params: ParameterSet,
    pub window: Option<StoichiometryWindow>,
    pub temperature: f64,
}

impl ParameterFile {
    pub fn time_constants(&self) -> (f64, f64) {
        match self.params {
            ParameterSet::Physical(p) => (
                p.radius_plus.powi(2) / p.diffusivity_plus,
                p.radius_minus.powi(2) / p.diffusivity_minus,
            ),
            ParameterSet::Grouped(g) => (g.tau_d_plus, g.tau_d_minus),
            ParameterSet::Identifiable(p) => (p.tau_d_plus, p.tau_d_minus),
        }
    }

    /// Identifiable parameters at `dod`; the charge-transfer resistance is
    /// linearised about the stoichiometry window unless given directly.
    pub fn resolve(&self, dod: f64) -> Result<IdentifiableParams> {
        let grouped = match self.params {
            ParameterSet::Identifiable(p) => return Ok(p),
            ParameterSet::Physical(p) => group_from_physical(&p)?,
            ParameterSet::Grouped(g) => g,
        };
        let window = self.window.ok_or_else(|| {
            Error::Configuration("a stoichiometry `window` is required to compute R_ct from physical or grouped parameters".into())
        })?;
        let theta = theta_from_groups(&grouped)?;
        let r = charge_transfer_resistance(theta.0[2], theta.0[5], &window.operating_point(dod)?, self.temperature)?;
        IdentifiableParams::new(grouped.tau_d_plus, grouped.tau_d_minus, r)
    }
}

pub fn parse_parameter_json(path: &Path, text: &str) -> Result<ParameterFile> {
    let bad = |m: String| parse_err(path, 0, m);
    let mut obj = match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return Err(bad("parameter file must be a JSON object".into())),
        Err(e) => return Err(parse_err(path, e.line() as u64, e.to_string())),
    };
    match obj.remove("schema_version").and_then(|v| v.as_u64()) {
        Some(SCHEMA_VERSION) => {}
        other => return Err(bad(format!("unsupported schema_version {other:?}, expected {SCHEMA_VERSION}"))),
    }
    let window = obj
        .remove("window")
        .map(serde_json::from_value::<StoichiometryWindow>)
        .transpose()
        .map_err(|e| bad(format!("window: {e}")))?;
    let has = |k: &str| obj.contains_key(k);
    let (params, temperature) = if has("R_plus") || has("D_plus") {
        let p: PhysicalParams = serde_json::from_value(Value::Object(obj)).map_err(|e| bad(format!("physical parameters: {e}")))?;
        p.validate()?;
        (ParameterSet::Physical(p), p.temperature)
    } else if has("tau_k_plus") || has("q_th_plus") {
        let t = obj.remove("T").map(|v| v.as_f64().ok_or_else(|| bad("`T` must be a number".into()))).transpose()?;
        let g: GroupedParams = serde_json::from_value(Value::Object(obj)).map_err(|e| bad(format!("grouped parameters: {e}")))?;
        g.validate()?;
        (ParameterSet::Grouped(g), t.unwrap_or(DEFAULT_TEMPERATURE))
    } else if has("tau_d_plus") {
        let p: IdentifiableParams =
            serde_json::from_value(Value::Object(obj)).map_err(|e| bad(format!("identifiable parameters: {e}")))?;
        p.validate()?;
        (ParameterSet::Identifiable(p), DEFAULT_TEMPERATURE)
    } else {
        return Err(bad("cannot tell parameter kind: expected physical, grouped or identifiable keys".into()));
    };
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid("T", format!("must be > 0 K, got {temperature}")));
    }
    Ok(ParameterFile { params, window, temperature })
}

pub fn read_parameter_json(path: &Path) -> Result<ParameterFile> {
    parse_parameter_json(path, &read_text(path)?)
}

pub fn render_parameter_json(file: &ParameterFile) -> Result<String> {
    let mut v = serde_json::to_value(file.params).map_err(|e| Error::Configuration(e.to_string()))?;
    let obj = v.as_object_mut().expect("parameter sets serialise as objects");
    obj.insert("schema_version".into(), SCHEMA_VERSION.into());
    if let Some(w) = file.window {
        obj.insert("window".into(), serde_json::to_value(w).map_err(|e| Error::Configuration(e.to_string()))?);
    }
    if matches!(file.params, ParameterSet::Grouped(_)) {
        obj.insert("T".into(), file.temperature.into());
    }
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Configuration(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Files produced by a command, written only after every one of them has
/// been computed and the output directory checked.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct OutputSet {
    files: Vec<(PathBuf, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<PathBuf>, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn files(&self) -> &[(PathBuf, String)] {
        &self.files
    }

    /// Writes every file under `dir`. Without `force`, fails before writing
    /// anything if any target exists.
    pub fn commit(&self, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
        let targets: Vec<PathBuf> = self.files.iter().map(|(n, _)| dir.join(n)).collect();
        if !force {
            if let Some(t) = targets.iter().find(|t| t.exists()) {
                return Err(Error::Overwrite(t.clone()));
            }
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (t, (_, body)) in targets.iter().zip(&self.files) {
            let tmp = t.with_extension("partial");
            fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
            fs::rename(&tmp, t).map_err(|e| Error::io(t, e))?;
        }
        Ok(targets)
    }
}
