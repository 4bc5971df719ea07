//! Free-format MPS with an INDICATORS section.
//!
//! Accepted grammar, one record per line, fields separated by whitespace:
//!
//! ```text
//! NAME      [name]
//! ROWS      {N|L|G|E} row
//! COLUMNS   col row value [row value]
//!           marker 'MARKER' {'INTORG'|'INTEND'}
//! RHS       [set] row value [row value]
//! RANGES    [set] row value [row value]
//! BOUNDS    {UP|LO|FX|FR|MI|PL|BV|LI|UI} [set] col [value]
//! INDICATORS
//!           IF row binvar {0|1}
//! ENDATA
//! ```
//!
//! Lines starting with `*` are comments. The first `N` row is the
//! objective; further `N` rows are dropped. Columns between INTORG and
//! INTEND markers are integer with default bounds `[0, ∞)`; an integer
//! column bounded to `[0, 1]` becomes binary. A ranged row is split into a
//! `≥` row keeping the name and a `≤` row named `<row>_rng`.
//!
//! An indicator row enforced when the binary is 0 and reading `a·y ≤ 0`
//! (`a > 0`) for a variable with lower bound 0 is a semi-continuity pattern.
//! Its lot size comes from a row `s·z − y ≤ 0` (or `y − s·z ≥ 0`) on the same
//! pair; without such a row the implication is kept generic.

use std::collections::HashMap;

use semidive_core::model::{
    min_lot_of_row, IndicatorLink, LinearRow, Problem, Sense, Stage, VarKind, Variable,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MpsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing ENDATA")]
    MissingEnd,
    #[error("no objective row")]
    NoObjective,
    #[error("invalid problem: {0}")]
    Invalid(String),
}

fn err(line: usize, msg: impl Into<String>) -> MpsError {
    MpsError::Syntax {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Name,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Indicators,
}

struct RowDef {
    name: String,
    sense: Sense,
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
    range: Option<f64>,
}

struct ColDef {
    name: String,
    integer: bool,
    lower: Option<f64>,
    upper: Option<f64>,
    binary: bool,
    obj: f64,
}

struct IndicatorDef {
    line: usize,
    row: usize,
    col: usize,
    value: bool,
}

fn number(tok: &str, line: usize) -> Result<f64, MpsError> {
    let v = match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "1e30" | "1e+30" => f64::INFINITY,
        "-inf" | "-infinity" | "-1e30" | "-1e+30" => f64::NEG_INFINITY,
        _ => tok
            .parse::<f64>()
            .map_err(|_| err(line, format!("bad number '{tok}'")))?,
    };
    if v.is_nan() {
        return Err(err(line, "NaN value"));
    }
    Ok(v)
}

pub fn parse_mps(text: &str) -> Result<Problem, MpsError> {
    let mut name = String::new();
    let mut section: Option<Section> = None;
    let mut objective: Option<String> = None;
    let mut free_rows: Vec<String> = Vec::new();
    let mut rows: Vec<RowDef> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<ColDef> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut integer_block = false;
    let mut indicators: Vec<IndicatorDef> = Vec::new();
    let mut ended = false;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim_end();
        if trimmed.trim().is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let header = !raw.starts_with(char::is_whitespace);
        if header {
            section = Some(match toks[0] {
                "NAME" => {
                    name = toks.get(1).map(|s| s.to_string()).unwrap_or_default();
                    Section::Name
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "INDICATORS" => Section::Indicators,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                other => return Err(err(line, format!("unknown section '{other}'"))),
            });
            continue;
        }
        let Some(sec) = section else {
            return Err(err(line, "data before the first section"));
        };
        match sec {
            Section::Name => return Err(err(line, "unexpected data in NAME section")),
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(err(line, "expected '<type> <row>'"));
                }
                let rname = toks[1].to_string();
                if row_index.contains_key(&rname) || objective.as_deref() == Some(&rname) || free_rows.contains(&rname) {
                    return Err(err(line, format!("duplicate row '{rname}'")));
                }
                let sense = match toks[0] {
                    "N" => {
                        if objective.is_none() {
                            objective = Some(rname);
                        } else {
                            free_rows.push(rname);
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(err(line, format!("unknown row type '{t}'"))),
                };
                row_index.insert(rname.clone(), rows.len());
                rows.push(RowDef {
                    name: rname,
                    sense,
                    coeffs: Vec::new(),
                    rhs: 0.0,
                    range: None,
                });
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => integer_block = true,
                        "'INTEND'" => integer_block = false,
                        m => return Err(err(line, format!("unknown marker {m}"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(err(line, "expected '<col> <row> <value> [<row> <value>]'"));
                }
                let cname = toks[0];
                let j = match col_index.get(cname) {
                    Some(&j) => j,
                    None => {
                        col_index.insert(cname.to_string(), cols.len());
                        cols.push(ColDef {
                            name: cname.to_string(),
                            integer: integer_block,
                            lower: None,
                            upper: None,
                            binary: false,
                            obj: 0.0,
                        });
                        cols.len() - 1
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = number(pair[1], line)?;
                    if objective.as_deref() == Some(pair[0]) {
                        cols[j].obj = v;
                    } else if free_rows.iter().any(|r| r == pair[0]) {
                        continue;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(line, format!("unknown row '{}'", pair[0])))?;
                        if rows[r].coeffs.iter().any(|c| c.0 == j) {
                            return Err(err(line, format!("duplicate entry for '{cname}' in '{}'", pair[0])));
                        }
                        if v != 0.0 {
                            rows[r].coeffs.push((j, v));
                        }
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = match toks.len() {
                    2 | 4 => &toks[..],
                    3 | 5 => &toks[1..],
                    _ => return Err(err(line, "expected '[set] <row> <value> [<row> <value>]'")),
                };
                for pair in pairs.chunks(2) {
                    let v = number(pair[1], line)?;
                    if objective.as_deref() == Some(pair[0]) {
                        if sec == Section::Rhs && v != 0.0 {
                            return Err(err(line, "objective constants are not supported"));
                        }
                        continue;
                    }
                    if free_rows.iter().any(|r| r == pair[0]) {
                        continue;
                    }
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(line, format!("unknown row '{}'", pair[0])))?;
                    if sec == Section::Rhs {
                        rows[r].rhs = v;
                    } else {
                        rows[r].range = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0];
                let needs_value = !matches!(kind, "FR" | "MI" | "PL" | "BV");
                let (cname, value) = match (toks.len(), needs_value) {
                    (3, false) => (toks[2], None),
                    (2, false) => (toks[1], None),
                    (4, true) => (toks[2], Some(number(toks[3], line)?)),
                    (3, true) => (toks[1], Some(number(toks[2], line)?)),
                    _ => return Err(err(line, format!("malformed {kind} bound"))),
                };
                let j = *col_index
                    .get(cname)
                    .ok_or_else(|| err(line, format!("unknown column '{cname}'")))?;
                let c = &mut cols[j];
                match (kind, value) {
                    ("UP", Some(v)) => c.upper = Some(v),
                    ("LO", Some(v)) => c.lower = Some(v),
                    ("FX", Some(v)) => {
                        c.lower = Some(v);
                        c.upper = Some(v);
                    }
                    ("FR", None) => {
                        c.lower = Some(f64::NEG_INFINITY);
                        c.upper = Some(f64::INFINITY);
                    }
                    ("MI", None) => c.lower = Some(f64::NEG_INFINITY),
                    ("PL", None) => c.upper = Some(f64::INFINITY),
                    ("BV", None) => {
                        c.integer = true;
                        c.binary = true;
                        c.lower = Some(0.0);
                        c.upper = Some(1.0);
                    }
                    ("LI", Some(v)) => {
                        c.integer = true;
                        c.lower = Some(v);
                    }
                    ("UI", Some(v)) => {
                        c.integer = true;
                        c.upper = Some(v);
                    }
                    _ => return Err(err(line, format!("unknown bound type '{kind}'"))),
                }
            }
            Section::Indicators => {
                if toks.len() != 4 || toks[0] != "IF" {
                    return Err(err(line, "expected 'IF <row> <binvar> <0|1>'"));
                }
                let r = *row_index
                    .get(toks[1])
                    .ok_or_else(|| err(line, format!("unknown row '{}'", toks[1])))?;
                let j = *col_index
                    .get(toks[2])
                    .ok_or_else(|| err(line, format!("unknown column '{}'", toks[2])))?;
                let value = match toks[3] {
                    "0" => false,
                    "1" => true,
                    v => return Err(err(line, format!("indicator value must be 0 or 1, got '{v}'"))),
                };
                if indicators.iter().any(|d| d.row == r) {
                    return Err(err(line, format!("row '{}' has two indicators", toks[1])));
                }
                indicators.push(IndicatorDef { line, row: r, col: j, value });
            }
        }
    }
    if !ended {
        return Err(MpsError::MissingEnd);
    }
    if objective.is_none() {
        return Err(MpsError::NoObjective);
    }

    let mut problem = Problem::new(Stage::Indicator);
    problem.name = name;
    for c in &cols {
        let lower = c.lower.unwrap_or(0.0);
        let upper = c.upper.unwrap_or(f64::INFINITY);
        let kind = if c.binary || (c.integer && lower == 0.0 && upper == 1.0) {
            VarKind::Binary
        } else if c.integer {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        problem.add_var(Variable::new(c.name.clone(), kind, lower, upper, c.obj));
    }
    for d in &indicators {
        if problem.variables[d.col].kind != VarKind::Binary {
            return Err(err(
                d.line,
                format!("indicator variable '{}' is not binary", cols[d.col].name),
            ));
        }
    }

    let is_indicator_row = |r: usize| indicators.iter().any(|d| d.row == r);
    for (r, def) in rows.iter().enumerate() {
        if is_indicator_row(r) {
            continue;
        }
        for row in expand_range(def) {
            problem.add_row(row);
        }
    }
    for d in &indicators {
        let def = &rows[d.row];
        if def.range.is_some() {
            return Err(err(d.line, "ranged indicator rows are not supported"));
        }
        let row = LinearRow::new(def.name.clone(), def.coeffs.clone(), def.sense, def.rhs);
        let link = match semi_continuous_var(&problem, &row, d) {
            Some(y) => {
                let lot = problem.rows.iter().find_map(|r| min_lot_of_row(r, d.col, y));
                match lot {
                    Some(s) => IndicatorLink::semi_continuous(d.col, y, s),
                    None => IndicatorLink::generic(d.col, d.value, row),
                }
            }
            None => IndicatorLink::generic(d.col, d.value, row),
        };
        problem.links.push(link);
    }

    problem.normalize();
    let report = problem.validate();
    if !report.is_valid() {
        return Err(MpsError::Invalid(report.to_string()));
    }
    Ok(problem)
}

fn expand_range(def: &RowDef) -> Vec<LinearRow> {
    let Some(r) = def.range else {
        return vec![LinearRow::new(def.name.clone(), def.coeffs.clone(), def.sense, def.rhs)];
    };
    let (lo, hi) = match def.sense {
        Sense::Le => (def.rhs - r.abs(), def.rhs),
        Sense::Ge => (def.rhs, def.rhs + r.abs()),
        Sense::Eq if r >= 0.0 => (def.rhs, def.rhs + r),
        Sense::Eq => (def.rhs + r, def.rhs),
    };
    vec![
        LinearRow::new(def.name.clone(), def.coeffs.clone(), Sense::Ge, lo),
        LinearRow::new(format!("{}_rng", def.name), def.coeffs.clone(), Sense::Le, hi),
    ]
}

/// The variable `y` if `row` reads `y ≤ 0`, is enforced at zero, and `y ≥ 0`.
fn semi_continuous_var(problem: &Problem, row: &LinearRow, d: &IndicatorDef) -> Option<usize> {
    if d.value || row.coeffs.len() != 1 || row.rhs != 0.0 {
        return None;
    }
    let (y, a) = row.coeffs[0];
    let upper_form = match row.sense {
        Sense::Le => a > 0.0,
        Sense::Ge => a < 0.0,
        Sense::Eq => false,
    };
    (upper_form && y != d.col && problem.variables[y].lower == 0.0).then_some(y)
}
