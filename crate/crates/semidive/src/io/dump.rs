//! Canonical text form of a problem, used for golden-file comparisons.

use std::fmt::Write;

use semidive_core::model::{Implication, LinearRow, Problem, Stage, VarKind};

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn row_text(p: &Problem, r: &LinearRow) -> String {
    let terms: Vec<String> = r
        .coeffs
        .iter()
        .map(|&(j, a)| format!("{} {}", num(a), p.variables[j].name))
        .collect();
    format!("{}: {} {} {}", r.name, terms.join(" + "), r.sense.symbol(), num(r.rhs))
}

pub fn canonical_dump(p: &Problem) -> String {
    let mut o = String::new();
    let stage = match p.stage {
        Stage::SemiContinuous => "semicontinuous",
        Stage::Indicator => "indicator",
    };
    let _ = writeln!(o, "name {}", p.name);
    let _ = writeln!(o, "stage {stage}");
    for v in &p.variables {
        let kind = match v.kind {
            VarKind::Continuous => "C",
            VarKind::Integer => "I",
            VarKind::Binary => "B",
        };
        let _ = writeln!(o, "var {} {kind} [{}, {}] obj {}", v.name, num(v.lower), num(v.upper), num(v.obj));
    }
    for r in &p.rows {
        let _ = writeln!(o, "row {}", row_text(p, r));
    }
    for l in &p.links {
        let z = &p.variables[l.binary].name;
        match &l.implication {
            Implication::SemiContinuous { var, min_lot } => {
                let _ = writeln!(o, "link {z} = 0 -> {} <= 0, lot {}", p.variables[*var].name, num(*min_lot));
            }
            Implication::Generic { active, row } => {
                let _ = writeln!(o, "link {z} = {} -> {}", u8::from(*active), row_text(p, row));
            }
        }
    }
    for s in &p.sc_specs {
        let _ = writeln!(
            o,
            "semicontinuous {} lot {} ub {} unit {} setup {}",
            p.variables[s.var].name,
            num(s.min_lot),
            num(s.upper),
            num(s.unit_cost),
            num(s.setup_cost)
        );
    }
    o
}
