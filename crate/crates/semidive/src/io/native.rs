//! Native JSON instances in semi-continuous form.
//!
//! ```json
//! {
//!   "name": "demo",
//!   "variables": [{"name": "y", "kind": "continuous", "lb": 0, "ub": "inf", "obj": 2}],
//!   "rows": [{"name": "demand", "coeffs": {"y": 1}, "sense": ">=", "rhs": 3}],
//!   "semicontinuous": [{"var": "y", "min_lot": 10, "ub": "inf", "unit_cost": 2, "setup_cost": 5}]
//! }
//! ```
//!
//! Bounds may be the strings `"inf"` / `"-inf"`. `kind` is one of
//! `continuous`, `integer`, `binary`; `sense` one of `<=`, `>=`, `=`.
//! `name` fields of the problem and of rows are optional.

use serde_json::{json, Map, Value};
use thiserror::Error;

use semidive_core::model::{LinearRow, Problem, SemiContinuousSpec, Sense, Stage, VarKind, Variable};

#[derive(Debug, Error, PartialEq)]
pub enum NativeError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

fn schema(path: &str, msg: impl Into<String>) -> NativeError {
    NativeError::Schema {
        path: path.to_string(),
        msg: msg.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, NativeError> {
    obj.get(key).ok_or_else(|| schema(path, format!("missing field '{key}'")))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, NativeError> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, NativeError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str, NativeError> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn real(v: &Value, path: &str) -> Result<f64, NativeError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| schema(path, "number out of range")),
        Value::String(s) if s == "inf" || s == "+inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        _ => Err(schema(path, "expected a number, \"inf\" or \"-inf\"")),
    }
}

fn finite(v: &Value, path: &str) -> Result<f64, NativeError> {
    let x = real(v, path)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(schema(path, "expected a finite number"))
    }
}

pub fn parse_native(text: &str) -> Result<Problem, NativeError> {
    let root: Value = serde_json::from_str(text).map_err(|e| NativeError::Json(e.to_string()))?;
    let top = object(&root, "$")?;
    let mut p = Problem::new(Stage::SemiContinuous);
    if let Some(n) = top.get("name") {
        p.name = string(n, "$.name")?.to_string();
    }

    for (k, v) in array(field(top, "variables", "$")?, "$.variables")?.iter().enumerate() {
        let path = format!("$.variables[{k}]");
        let o = object(v, &path)?;
        let name = string(field(o, "name", &path)?, &format!("{path}.name"))?.to_string();
        if p.var_index(&name).is_some() {
            return Err(schema(&format!("{path}.name"), format!("duplicate variable '{name}'")));
        }
        let kind = match string(field(o, "kind", &path)?, &format!("{path}.kind"))? {
            "continuous" => VarKind::Continuous,
            "integer" => VarKind::Integer,
            "binary" => VarKind::Binary,
            other => return Err(schema(&format!("{path}.kind"), format!("unknown kind '{other}'"))),
        };
        let (dlo, dhi) = if kind == VarKind::Binary { (0.0, 1.0) } else { (0.0, f64::INFINITY) };
        let lb = o.get("lb").map(|v| real(v, &format!("{path}.lb"))).transpose()?.unwrap_or(dlo);
        let ub = o.get("ub").map(|v| real(v, &format!("{path}.ub"))).transpose()?.unwrap_or(dhi);
        let obj = o.get("obj").map(|v| finite(v, &format!("{path}.obj"))).transpose()?.unwrap_or(0.0);
        p.add_var(Variable::new(name, kind, lb, ub, obj));
    }

    let lookup = |p: &Problem, name: &str, path: &str| {
        p.var_index(name)
            .ok_or_else(|| schema(path, format!("unknown variable '{name}'")))
    };

    if let Some(rows) = top.get("rows") {
        for (k, v) in array(rows, "$.rows")?.iter().enumerate() {
            let path = format!("$.rows[{k}]");
            let o = object(v, &path)?;
            let name = match o.get("name") {
                Some(n) => string(n, &format!("{path}.name"))?.to_string(),
                None => format!("r{k}"),
            };
            let cpath = format!("{path}.coeffs");
            let mut coeffs = Vec::new();
            for (vname, c) in object(field(o, "coeffs", &path)?, &cpath)? {
                let j = lookup(&p, vname, &cpath)?;
                coeffs.push((j, finite(c, &format!("{cpath}.{vname}"))?));
            }
            let sense = match string(field(o, "sense", &path)?, &format!("{path}.sense"))? {
                "<=" | "le" => Sense::Le,
                ">=" | "ge" => Sense::Ge,
                "=" | "==" | "eq" => Sense::Eq,
                other => return Err(schema(&format!("{path}.sense"), format!("unknown sense '{other}'"))),
            };
            let rhs = finite(field(o, "rhs", &path)?, &format!("{path}.rhs"))?;
            p.add_row(LinearRow::new(name, coeffs, sense, rhs));
        }
    }

    if let Some(specs) = top.get("semicontinuous") {
        for (k, v) in array(specs, "$.semicontinuous")?.iter().enumerate() {
            let path = format!("$.semicontinuous[{k}]");
            let o = object(v, &path)?;
            let var = lookup(&p, string(field(o, "var", &path)?, &format!("{path}.var"))?, &format!("{path}.var"))?;
            let min_lot = real(field(o, "min_lot", &path)?, &format!("{path}.min_lot"))?;
            if !(min_lot > 0.0) {
                return Err(schema(&format!("{path}.min_lot"), "min_lot must be positive"));
            }
            let upper = match o.get("ub") {
                Some(u) => real(u, &format!("{path}.ub"))?,
                None => p.variables[var].upper,
            };
            let unit_cost = match o.get("unit_cost") {
                Some(c) => finite(c, &format!("{path}.unit_cost"))?,
                None => p.variables[var].obj,
            };
            let setup_cost = finite(field(o, "setup_cost", &path)?, &format!("{path}.setup_cost"))?;
            p.sc_specs.push(SemiContinuousSpec {
                var,
                min_lot,
                upper,
                unit_cost,
                setup_cost,
            });
        }
    }

    p.normalize();
    let report = p.validate();
    if !report.is_valid() {
        return Err(NativeError::Invalid(report.to_string()));
    }
    Ok(p)
}

fn bound(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(x)
    }
}

/// Serializes a semi-continuous-form problem; [`parse_native`] inverts it.
pub fn write_native(p: &Problem) -> String {
    let vars: Vec<Value> = p
        .variables
        .iter()
        .map(|v| {
            let kind = match v.kind {
                VarKind::Continuous => "continuous",
                VarKind::Integer => "integer",
                VarKind::Binary => "binary",
            };
            json!({"name": v.name, "kind": kind, "lb": bound(v.lower), "ub": bound(v.upper), "obj": v.obj})
        })
        .collect();
    let rows: Vec<Value> = p
        .rows
        .iter()
        .map(|r| {
            let mut coeffs = Map::new();
            for &(j, a) in &r.coeffs {
                coeffs.insert(p.variables[j].name.clone(), json!(a));
            }
            json!({"name": r.name, "coeffs": coeffs, "sense": r.sense.symbol(), "rhs": r.rhs})
        })
        .collect();
    let specs: Vec<Value> = p
        .sc_specs
        .iter()
        .map(|s| {
            json!({
                "var": p.variables[s.var].name,
                "min_lot": s.min_lot,
                "ub": bound(s.upper),
                "unit_cost": s.unit_cost,
                "setup_cost": s.setup_cost,
            })
        })
        .collect();
    let doc = json!({"name": p.name, "variables": vars, "rows": rows, "semicontinuous": specs});
    let mut out = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    out.push('\n');
    out
}
