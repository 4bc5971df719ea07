//! Solver core for mixed-integer programs whose semi-continuous variables are
//! modelled through indicator constraints.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//!
//! * [`model`]: problem representation, the indicator and big-M
//!   reformulations, objective evaluation and feasibility checks;
//! * [`simplex`]: a bounded-variable revised simplex (primal for cold starts,
//!   dual for warm restarts after bound tightening);
//! * [`propagate`]: indicator and activity-based bound propagation;
//! * [`diving`]: the indicator diving heuristic;
//! * [`bnb`]: an LP-based branch-and-bound driver hosting the heuristic;
//! * [`metrics`]: primal gap, primal integral and shifted geometric mean.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bnb;
pub mod clock;
pub mod diving;
pub mod metrics;
pub mod model;
pub mod propagate;
pub mod rng;
pub mod simplex;

mod num;

pub use bnb::{solve, SolveResult, SolveStatus, SolverConfig};
pub use model::{Problem, Sense, Tolerances, VarKind};
