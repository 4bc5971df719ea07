//! Instance dimension statistics: counts per instance plus total, min, max
//! and shifted geometric mean over a set.

use semidive_core::metrics::sgm1;
use semidive_core::model::{Problem, Stage};
use semidive_core::propagate::{self, Domains, PropagationConfig};

/// Upper bounds strictly above this (and finite) count as big.
pub const BIG_BOUND: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimStage {
    /// As supplied.
    Original,
    /// After the indicator reformulation and root propagation.
    Received,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dimensions {
    pub vars: usize,
    pub rows: usize,
    pub indicators: usize,
    pub unbounded: usize,
    pub big: usize,
}

fn classify(d: &mut Dimensions, upper: f64) {
    if upper == f64::INFINITY {
        d.unbounded += 1;
    } else if upper > BIG_BOUND {
        d.big += 1;
    }
}

/// Counts for one instance, or `None` if it cannot be brought to the stage
/// (reformulation fails or propagation proves it infeasible).
pub fn dimensions(p: &Problem, stage: DimStage) -> Option<Dimensions> {
    let received;
    let p = match (stage, p.stage) {
        (DimStage::Received, Stage::SemiContinuous) => {
            received = p.reformulate_indicator().ok()?;
            &received
        }
        _ => p,
    };
    let mut d = Dimensions {
        vars: p.num_vars(),
        rows: p.rows.len(),
        ..Default::default()
    };
    let mut domains = Domains::of(p);
    if stage == DimStage::Received {
        let cfg = PropagationConfig::default();
        propagate::propagate(p, &mut domains, 5, cfg).ok()?;
    }
    for spec in &p.sc_specs {
        d.indicators += 1;
        classify(&mut d, spec.upper);
    }
    for link in &p.links {
        d.indicators += 1;
        if let Some((y, _)) = link.semi_continuous_parts() {
            classify(&mut d, domains.upper[y]);
        }
    }
    Some(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub total: usize,
    pub min: usize,
    pub max: usize,
    pub sgm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    /// Instances that contributed.
    pub instances: usize,
    /// Per field of [`Dimensions`], in declaration order.
    pub columns: Vec<(&'static str, Column)>,
}

pub fn dimension_stats(instances: &[&Problem], stage: DimStage) -> StatsTable {
    let dims: Vec<Dimensions> = instances.iter().filter_map(|p| dimensions(p, stage)).collect();
    let fields: [(&'static str, fn(&Dimensions) -> usize); 5] = [
        ("vars", |d| d.vars),
        ("rows", |d| d.rows),
        ("indicators", |d| d.indicators),
        ("unbounded", |d| d.unbounded),
        ("big", |d| d.big),
    ];
    let columns = fields
        .iter()
        .map(|&(name, get)| {
            let values: Vec<usize> = dims.iter().map(get).collect();
            let reals: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let column = Column {
                total: values.iter().sum(),
                min: values.iter().copied().min().unwrap_or(0),
                max: values.iter().copied().max().unwrap_or(0),
                sgm: sgm1(&reals).unwrap_or(0.0),
            };
            (name, column)
        })
        .collect();
    StatsTable {
        instances: dims.len(),
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use semidive_core::model::{LinearRow, SemiContinuousSpec, Sense, Variable};

    fn with_uppers(uppers: &[f64]) -> Problem {
        let mut p = Problem::new(Stage::SemiContinuous);
        for (k, &u) in uppers.iter().enumerate() {
            let j = p.add_var(Variable::continuous(format!("y{k}"), 0.0, u, 1.0));
            p.sc_specs.push(SemiContinuousSpec {
                var: j,
                min_lot: 1.0,
                upper: u,
                unit_cost: 1.0,
                setup_cost: 1.0,
            });
        }
        let coeffs = (0..uppers.len()).map(|j| (j, 1.0)).collect();
        p.add_row(LinearRow::new("demand", coeffs, Sense::Ge, 1.0));
        p
    }

    fn column<'a>(t: &'a StatsTable, name: &str) -> &'a Column {
        &t.columns.iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn three_unbounded_links() {
        let p = with_uppers(&[f64::INFINITY; 3]);
        for stage in [DimStage::Original, DimStage::Received] {
            let t = dimension_stats(&[&p], stage);
            assert_eq!(column(&t, "unbounded").total, 3);
            assert_eq!(column(&t, "big").total, 0);
        }
    }

    #[test]
    fn threshold_is_strict() {
        let p = with_uppers(&[1e4, 1e4 + 1.0]);
        let t = dimension_stats(&[&p], DimStage::Original);
        assert_eq!(column(&t, "big").total, 1);
        assert_eq!(column(&t, "unbounded").total, 0);
    }

    #[test]
    fn single_instance_sgm_is_its_value() {
        let p = with_uppers(&[5.0, 7.0]);
        let t = dimension_stats(&[&p], DimStage::Received);
        assert_eq!(column(&t, "vars").sgm, 4.0);
        assert_eq!(column(&t, "indicators").total, 2);
    }
}
