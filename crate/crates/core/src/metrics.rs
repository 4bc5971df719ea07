//! Primal gap, primal integral and shifted geometric mean.

use alloc::vec::Vec;
use core::fmt;

use crate::num;

/// Primal gap in `[0, 1]` of `incumbent` against `reference`.
///
/// No incumbent gives 1. An unknown reference with a known incumbent gives
/// 0: the incumbent is then the best known value.
pub fn primal_gap(reference: Option<f64>, incumbent: Option<f64>) -> f64 {
    let Some(inc) = incumbent else { return 1.0 };
    let Some(opt) = reference else { return 0.0 };
    if opt.abs() == 0.0 && inc.abs() == 0.0 {
        0.0
    } else if opt * inc < 0.0 {
        1.0
    } else {
        (opt - inc).abs() / opt.abs().max(inc.abs())
    }
}

/// Incumbent improvements over one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    /// Total running time.
    pub r_max: f64,
    /// `(time, objective)` of each new incumbent, in time order.
    pub events: Vec<(f64, f64)>,
    /// Best-known objective.
    pub reference: Option<f64>,
}

impl Timeline {
    pub fn new(r_max: f64, reference: Option<f64>) -> Self {
        Self {
            r_max,
            events: Vec::new(),
            reference,
        }
    }

    pub fn push(&mut self, t: f64, objective: f64) {
        self.events.push((t, objective));
    }

    /// Gap of the incumbent held at time `t`.
    pub fn gap_at(&self, t: f64) -> f64 {
        let inc = self
            .events
            .iter()
            .take_while(|&&(time, _)| time <= t)
            .last()
            .map(|&(_, obj)| obj);
        primal_gap(self.reference, inc)
    }
}

/// Sum of `PG(R_{t-1})·(R_t − R_{t-1})` over the event times, with `R_0 = 0`
/// and a closing segment up to `r_max`.
pub fn primal_integral(timeline: &Timeline) -> f64 {
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut gap = 1.0;
    for &(t, obj) in &timeline.events {
        let t = t.clamp(0.0, timeline.r_max);
        total += gap * (t - prev_t).max(0.0);
        prev_t = t.max(prev_t);
        gap = primal_gap(timeline.reference, Some(obj));
    }
    total + gap * (timeline.r_max - prev_t).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricsError {
    Empty,
    Negative(f64),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::Empty => f.write_str("shifted geometric mean of an empty sequence"),
            MetricsError::Negative(v) => write!(f, "negative value {v} in shifted geometric mean"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// `(Π (w_i + s))^(1/N) − s`, evaluated in log space.
pub fn sgm(values: &[f64], shift: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(MetricsError::Negative(v));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(values[0]);
    }
    // Sorted summation makes the result independent of input order.
    let mut logs: Vec<f64> = values.iter().map(|&w| num::ln(w + shift)).collect();
    logs.sort_by(f64::total_cmp);
    let mean_log = logs.iter().sum::<f64>() / values.len() as f64;
    Ok(num::exp(mean_log) - shift)
}

pub const DEFAULT_SHIFT: f64 = 1.0;

/// [`sgm`] with the default shift of 1.
pub fn sgm1(values: &[f64]) -> Result<f64, MetricsError> {
    sgm(values, DEFAULT_SHIFT)
}
