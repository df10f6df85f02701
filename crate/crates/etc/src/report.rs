//! Report JSON.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use etc_core::{BoundaryConfig, GridSpec};

use crate::error::{Error, Result};
use crate::pipeline::Homogenized;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridJson {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub axis: String,
    pub p_in: f64,
    pub p_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefParamsJson {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    pub kin: f64,
    pub kout: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: String,
    pub grid: GridJson,
    pub boundary: BoundaryJson,
    pub precond: String,
    pub ref_params: RefParamsJson,
    pub rtol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kappa_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l2_error: Option<f64>,
    pub prep_seconds: f64,
    pub exec_seconds: f64,
    pub precision: String,
}

impl Report {
    /// `grid` and `boundary` describe the input as given, before any axis
    /// permutation.
    pub fn new(config: impl Into<String>, grid: &GridSpec, boundary: &BoundaryConfig, rtol: f64, h: &Homogenized) -> Self {
        let r = &h.report;
        let p = r.ref_params.expect("homogenize always sets reference parameters");
        Report {
            config: config.into(),
            grid: GridJson { nx: grid.nx, ny: grid.ny, nz: grid.nz, lx: grid.lx, ly: grid.ly, lz: grid.lz },
            boundary: BoundaryJson { axis: boundary.axis.to_string(), p_in: boundary.p_in, p_out: boundary.p_out },
            precond: r.preconditioner.clone(),
            ref_params: RefParamsJson {
                kx: p.kx_ref,
                ky: p.ky_ref,
                kz: p.kz_ref,
                kin: p.kin_ref,
                kout: p.kout_ref,
                lambda_lo: p.lambda_lo,
                lambda_hi: p.lambda_hi,
            },
            rtol,
            iterations: r.iterations,
            converged: r.converged,
            kappa_eff: r.kappa_eff,
            l2_error: r.l2_error,
            prep_seconds: r.prep_seconds,
            exec_seconds: r.exec_seconds,
            precision: r.precision.into(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Same JSON with the wall-clock fields removed, for determinism checks.
pub fn without_timings(json: &str) -> Result<Value> {
    let mut v: Value = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
    if let Some(o) = v.as_object_mut() {
        o.remove("prep_seconds");
        o.remove("exec_seconds");
    }
    Ok(v)
}

enum Kind {
    Str,
    Num,
    NumOrNull,
    Uint,
    Bool,
    Obj(&'static [(&'static str, Kind)]),
}

const GRID: &[(&str, Kind)] =
    &[("nx", Kind::Uint), ("ny", Kind::Uint), ("nz", Kind::Uint), ("lx", Kind::Num), ("ly", Kind::Num), ("lz", Kind::Num)];
const BOUNDARY: &[(&str, Kind)] = &[("axis", Kind::Str), ("p_in", Kind::Num), ("p_out", Kind::Num)];
const REF_PARAMS: &[(&str, Kind)] = &[
    ("kx", Kind::Num),
    ("ky", Kind::Num),
    ("kz", Kind::Num),
    ("kin", Kind::Num),
    ("kout", Kind::Num),
    ("lambda_lo", Kind::Num),
    ("lambda_hi", Kind::Num),
];
const REPORT: &[(&str, Kind)] = &[
    ("config", Kind::Str),
    ("grid", Kind::Obj(GRID)),
    ("boundary", Kind::Obj(BOUNDARY)),
    ("precond", Kind::Str),
    ("ref_params", Kind::Obj(REF_PARAMS)),
    ("rtol", Kind::Num),
    ("iterations", Kind::Uint),
    ("converged", Kind::Bool),
    ("kappa_eff", Kind::NumOrNull),
    ("prep_seconds", Kind::Num),
    ("exec_seconds", Kind::Num),
    ("precision", Kind::Str),
];
const OPTIONAL: &[&str] = &["l2_error"];

fn check(v: &Value, fields: &[(&str, Kind)], at: &str, optional: &[&str]) -> std::result::Result<(), String> {
    let o = v.as_object().ok_or_else(|| format!("{at} is not an object"))?;
    for (name, kind) in fields {
        let path = if at.is_empty() { name.to_string() } else { format!("{at}.{name}") };
        let f = o.get(*name).ok_or_else(|| format!("missing field {path}"))?;
        let ok = match kind {
            Kind::Str => f.is_string(),
            Kind::Num => f.is_number(),
            Kind::NumOrNull => f.is_number() || f.is_null(),
            Kind::Uint => f.is_u64(),
            Kind::Bool => f.is_boolean(),
            Kind::Obj(inner) => {
                check(f, inner, &path, &[])?;
                true
            }
        };
        if !ok {
            return Err(format!("field {path} has the wrong type"));
        }
    }
    for key in o.keys() {
        if !fields.iter().any(|(n, _)| n == key) && !optional.contains(&key.as_str()) {
            return Err(format!("unexpected field {at}{}{key}", if at.is_empty() { "" } else { "." }));
        }
    }
    Ok(())
}

/// Checks field names and types against the report layout.
pub fn validate(json: &str) -> Result<()> {
    let v: Value = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
    check(&v, REPORT, "", OPTIONAL).map_err(Error::Schema)?;
    if let Some(e) = v.get("l2_error") {
        if !e.is_number() {
            return Err(Error::Schema("field l2_error has the wrong type".into()));
        }
    }
    let p = v["precision"].as_str().unwrap_or_default();
    if p != "f64" && p != "f32" {
        return Err(Error::Schema(format!("precision {p:?} is neither f64 nor f32")));
    }
    Ok(())
}
