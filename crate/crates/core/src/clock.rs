//! Time source abstraction so the solver stays free of `std`.

use core::cell::Cell;

/// Seconds elapsed since some fixed origin. Must be non-decreasing.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that never advances. Time limits never trigger.
#[derive(Debug, Default, Clone, Copy)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Advances by a fixed step on every reading. Useful for deterministic tests
/// of time-based logic.
#[derive(Debug)]
pub struct TickClock {
    step: f64,
    t: Cell<f64>,
}

impl TickClock {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            t: Cell::new(0.0),
        }
    }
}

impl Clock for TickClock {
    fn now(&self) -> f64 {
        let t = self.t.get();
        self.t.set(t + self.step);
        t
    }
}
