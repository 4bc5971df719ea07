//! SplitMix64, the only random source in the workspace.
//!
//! Constants follow Steele, Lea and Flood's reference implementation:
//! the state advances by `0x9E3779B97F4A7C15` and the output is mixed with
//! multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB` (shifts 30, 27,
//! 31). Floats take the top 53 bits. Any port that follows this description
//! reproduces every draw bit-for-bit.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`; returns `lo` when the range is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_f64();
        if hi <= lo {
            lo
        } else {
            lo + u * (hi - lo)
        }
    }

    /// Uniform integer in `[lo, hi]` (inclusive).
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        let x = self.next_u64();
        if hi <= lo {
            return lo;
        }
        let span = hi - lo + 1;
        lo + x % span
    }
}

/// The SplitMix64 output function, usable as a stateless 64-bit hash.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic uniform `[0, 1)` value keyed by `(seed, key)`.
pub fn keyed_unit(seed: u64, key: u64) -> f64 {
    let h = mix(seed.wrapping_mul(GAMMA) ^ mix(key.wrapping_add(GAMMA)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
