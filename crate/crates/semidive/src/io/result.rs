//! Solve records as JSON with a fixed key order and 17 significant digits.

use std::fmt::Write;

use semidive_core::bnb::SolveResult;
use semidive_core::diving::FoundBy;
use semidive_core::model::{Point, Problem};

/// Facts about a run that the solver itself does not track.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunInfo {
    pub walltime_s: f64,
}

/// JSON number with 17 significant digits; infinities become the strings
/// `"inf"`/`"-inf"`.
pub fn number(x: f64) -> String {
    if x.is_nan() {
        "null".into()
    } else if x.is_infinite() {
        format!("\"{}\"", digits17(x))
    } else {
        digits17(x)
    }
}

/// `%.17g`-style rendering, with `inf`, `-inf` and `nan` spelled out.
pub fn digits17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let digits = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.digits$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn found_by_str(f: FoundBy) -> &'static str {
    match f {
        FoundBy::Diving => "diving",
        FoundBy::Rounding => "rounding",
        FoundBy::NodeIntegral => "node",
    }
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

pub fn write_result(problem: &Problem, result: &SolveResult, info: RunInfo) -> String {
    let mut o = String::new();
    o.push_str("{\n");
    let _ = writeln!(o, "  \"status\": {},", quoted(result.status.as_str()));
    let obj = result.objective().map_or("null".to_string(), number);
    let _ = writeln!(o, "  \"objective\": {obj},");
    let _ = writeln!(o, "  \"bound\": {},", number(result.bound));
    let _ = writeln!(o, "  \"walltime_s\": {},", number(info.walltime_s));
    let _ = writeln!(o, "  \"nodes\": {},", result.stats.nodes);
    let h = &result.stats.diving;
    let _ = writeln!(
        o,
        "  \"heur\": {{\"called\": {}, \"found\": {}, \"time_s\": {}}},",
        h.calls,
        h.found,
        number(h.time)
    );
    o.push_str("  \"timeline\": [");
    for (k, e) in result.timeline.iter().enumerate() {
        let sep = if k == 0 { "\n" } else { ",\n" };
        let _ = write!(
            o,
            "{sep}    {{\"t\": {}, \"obj\": {}, \"found_by\": {}}}",
            number(e.time),
            number(e.objective),
            quoted(found_by_str(e.found_by))
        );
    }
    o.push_str(if result.timeline.is_empty() { "]" } else { "\n  ]" });
    if let Some(inc) = &result.incumbent {
        o.push_str(",\n  \"solution\": {");
        for (j, v) in problem.variables.iter().enumerate() {
            let sep = if j == 0 { "\n" } else { ",\n" };
            let _ = write!(o, "{sep}    {}: {}", quoted(&v.name), number(inc.point[j]));
        }
        o.push_str(if problem.variables.is_empty() { "}" } else { "\n  }" });
    }
    o.push_str("\n}\n");
    o
}

/// Reads the `solution` object of a result record back into a point.
pub fn read_solution(text: &str, problem: &Problem) -> Result<Option<Point>, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Some(sol) = v.get("solution") else {
        return Ok(None);
    };
    let sol = sol.as_object().ok_or("solution is not an object")?;
    let mut point = Point::zeros(problem.num_vars());
    for (name, value) in sol {
        let j = problem.var_index(name).ok_or_else(|| format!("unknown variable '{name}'"))?;
        point[j] = value.as_f64().ok_or_else(|| format!("'{name}' is not a number"))?;
    }
    Ok(Some(point))
}
