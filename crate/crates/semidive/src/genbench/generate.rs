//! Seeded multi-product lot-sizing instances.
//!
//! For every product `p` and period `t` there is a production lot
//! `y_p_t ∈ {0} ∪ [s, u]` with a setup cost and a unit cost, and an inventory
//! `i_p_t ≥ 0` with a holding cost. Inventory balance
//! `i_p_{t−1} + y_p_t − i_p_t = d_p_t` (with `i_p_0 = 0`) meets demand, and a
//! capacity row `Σ_p y_p_t ≤ capacity` couples the products of one period.
//!
//! Draws use SplitMix64 in a fixed order: for each product, for each period:
//! demand, lot size, lot upper bound (bounded lots only), setup cost, unit
//! cost, holding cost.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use semidive_core::model::{LinearRow, Problem, SemiContinuousSpec, Sense, Stage, Variable};
use semidive_core::rng::SplitMix64;

/// Bounded lots draw `u` uniformly from `[m, LOT_UPPER_SPAN·m]` with
/// `m = max(s, demand_hi)`.
const LOT_UPPER_SPAN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub periods: usize,
    pub products: usize,
    /// Per-period shared capacity. `None` uses the smallest value that
    /// guarantees feasibility, `products · max(demand_hi, minlot_hi)`.
    #[serde(default)]
    pub capacity: Option<f64>,
    pub demand_range: (f64, f64),
    pub minlot_range: (f64, f64),
    pub setup_cost_range: (f64, f64),
    pub unit_cost_range: (f64, f64),
    pub holding_cost_range: (f64, f64),
    #[serde(default)]
    pub unbounded_lots: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            periods: 6,
            products: 3,
            capacity: None,
            demand_range: (0.0, 100.0),
            minlot_range: (20.0, 80.0),
            setup_cost_range: (50.0, 500.0),
            unit_cost_range: (1.0, 5.0),
            holding_cost_range: (0.5, 2.0),
            unbounded_lots: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("periods and products must be positive")]
    EmptyDimension,
    #[error("{0}: lower end above upper end")]
    BadRange(&'static str),
    #[error("minlot_range must be positive")]
    NonPositiveLot,
    #[error("capacity {capacity} is below {needed}, feasibility is not guaranteed")]
    CapacityTooSmall { capacity: f64, needed: f64 },
}

impl GenParams {
    pub fn required_capacity(&self) -> f64 {
        self.products as f64 * self.demand_range.1.max(self.minlot_range.1)
    }

    pub fn check(&self) -> Result<(), GenError> {
        if self.periods == 0 || self.products == 0 {
            return Err(GenError::EmptyDimension);
        }
        let ranges = [
            ("demand_range", self.demand_range),
            ("minlot_range", self.minlot_range),
            ("setup_cost_range", self.setup_cost_range),
            ("unit_cost_range", self.unit_cost_range),
            ("holding_cost_range", self.holding_cost_range),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo <= hi) {
                return Err(GenError::BadRange(name));
            }
        }
        if !(self.minlot_range.0 > 0.0) {
            return Err(GenError::NonPositiveLot);
        }
        let needed = self.required_capacity();
        if let Some(capacity) = self.capacity {
            if !(capacity >= needed) {
                return Err(GenError::CapacityTooSmall { capacity, needed });
            }
        }
        Ok(())
    }
}

/// Builds the instance in semi-continuous form.
pub fn generate(params: &GenParams) -> Result<Problem, GenError> {
    params.check()?;
    let (np, nt) = (params.products, params.periods);
    let capacity = params.capacity.unwrap_or_else(|| params.required_capacity());
    let mut rng = SplitMix64::new(params.seed);
    let mut p = Problem::new(Stage::SemiContinuous);
    p.name = format!("lot_p{np}_t{nt}_s{}", params.seed);

    struct Cell {
        demand: f64,
        lot: f64,
        upper: f64,
        setup: f64,
        unit: f64,
        holding: f64,
    }
    let mut cells = Vec::with_capacity(np * nt);
    for _ in 0..np {
        for _ in 0..nt {
            let demand = rng.uniform(params.demand_range.0, params.demand_range.1);
            let lot = rng.uniform(params.minlot_range.0, params.minlot_range.1);
            let upper = if params.unbounded_lots {
                f64::INFINITY
            } else {
                let m = lot.max(params.demand_range.1);
                rng.uniform(m, LOT_UPPER_SPAN * m)
            };
            let setup = rng.uniform(params.setup_cost_range.0, params.setup_cost_range.1);
            let unit = rng.uniform(params.unit_cost_range.0, params.unit_cost_range.1);
            let holding = rng.uniform(params.holding_cost_range.0, params.holding_cost_range.1);
            cells.push(Cell {
                demand,
                lot,
                upper,
                setup,
                unit,
                holding,
            });
        }
    }

    let mut y = vec![0usize; np * nt];
    let mut inv = vec![0usize; np * nt];
    for pr in 0..np {
        for t in 0..nt {
            let c = &cells[pr * nt + t];
            let j = p.add_var(Variable::continuous(format!("y_p{pr}_t{t}"), 0.0, c.upper, c.unit));
            p.sc_specs.push(SemiContinuousSpec {
                var: j,
                min_lot: c.lot,
                upper: c.upper,
                unit_cost: c.unit,
                setup_cost: c.setup,
            });
            y[pr * nt + t] = j;
            inv[pr * nt + t] = p.add_var(Variable::continuous(format!("i_p{pr}_t{t}"), 0.0, f64::INFINITY, c.holding));
        }
    }
    for pr in 0..np {
        for t in 0..nt {
            let k = pr * nt + t;
            let mut coeffs = Vec::with_capacity(3);
            if t > 0 {
                coeffs.push((inv[k - 1], 1.0));
            }
            coeffs.push((y[k], 1.0));
            coeffs.push((inv[k], -1.0));
            p.add_row(LinearRow::new(format!("bal_p{pr}_t{t}"), coeffs, Sense::Eq, cells[k].demand));
        }
    }
    for t in 0..nt {
        let coeffs = (0..np).map(|pr| (y[pr * nt + t], 1.0)).collect();
        p.add_row(LinearRow::new(format!("cap_t{t}"), coeffs, Sense::Le, capacity));
    }
    Ok(p)
}

/// The feasible plan used to argue that every generated instance is
/// feasible: produce `max(d, s)` whenever the demand left after inventory is
/// positive and carry the surplus.
pub fn witness(p: &Problem, params: &GenParams) -> Vec<f64> {
    let (np, nt) = (params.products, params.periods);
    let mut x = vec![0.0; p.num_vars()];
    for pr in 0..np {
        let mut stock = 0.0;
        for t in 0..nt {
            let k = pr * nt + t;
            let spec = &p.sc_specs[k];
            let demand = p.rows[k].rhs;
            let need = (demand - stock).max(0.0);
            let make = if need > 0.0 { need.max(spec.min_lot) } else { 0.0 };
            x[spec.var] = make;
            stock += make - demand;
            x[spec.var + 1] = stock.max(0.0);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use semidive_core::model::Tolerances;

    #[test]
    fn counts_for_two_periods_one_product() {
        let params = GenParams {
            periods: 2,
            products: 1,
            ..Default::default()
        };
        let p = generate(&params).unwrap();
        assert_eq!(p.sc_specs.len(), 2);
        assert_eq!(p.num_vars(), 4);
        assert_eq!(p.rows.iter().filter(|r| r.name.starts_with("bal")).count(), 2);
        assert_eq!(p.rows.iter().filter(|r| r.name.starts_with("cap")).count(), 2);
    }

    #[test]
    fn unbounded_lots_have_infinite_upper() {
        let params = GenParams {
            unbounded_lots: true,
            ..Default::default()
        };
        let p = generate(&params).unwrap();
        assert!(p.sc_specs.iter().all(|s| s.upper == f64::INFINITY));
    }

    #[test]
    fn small_capacity_is_rejected() {
        let params = GenParams {
            capacity: Some(10.0),
            ..Default::default()
        };
        assert!(matches!(generate(&params), Err(GenError::CapacityTooSmall { .. })));
    }

    #[test]
    fn witness_is_feasible() {
        for seed in 0..20 {
            for unbounded_lots in [false, true] {
                let params = GenParams {
                    seed,
                    unbounded_lots,
                    periods: 3 + seed as usize % 5,
                    products: 1 + seed as usize % 4,
                    ..Default::default()
                };
                let p = generate(&params).unwrap();
                let x = witness(&p, &params);
                assert!(p.check_feasible(&x, Tolerances::default()).is_feasible(), "seed {seed}");
            }
        }
    }
}
