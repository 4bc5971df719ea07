//! File formats, the lot-sizing instance generator, the benchmark harness
//! and a wall clock for [`semidive_core`].

pub mod genbench;
pub mod io;

use std::time::Instant;

use semidive_core::clock::Clock;

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
