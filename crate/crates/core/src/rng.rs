//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, row, column, lane)`, hashed with
//! the SplitMix64 finalizer. No generator state is carried between draws, so
//! results do not depend on evaluation order or on how work is split across
//! threads.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// 64 random bits for the given counter.
    #[inline]
    pub fn bits(&self, row: u64, column: u64, lane: u64) -> u64 {
        let mut h = mix64(self.seed.wrapping_add(GOLDEN));
        h = mix64(h ^ mix64(row.wrapping_add(GOLDEN.wrapping_mul(2))));
        h = mix64(h ^ mix64(column.wrapping_add(GOLDEN.wrapping_mul(3))));
        mix64(h ^ mix64(lane.wrapping_add(GOLDEN.wrapping_mul(4))))
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&self, row: u64, column: u64, lane: u64) -> f64 {
        ((self.bits(row, column, lane) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller on two independent lanes.
    #[inline]
    pub fn standard_normal(&self, row: u64, column: u64) -> f64 {
        let u1 = self.uniform(row, column, 0);
        let u2 = self.uniform(row, column, 1);
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    pub fn normal(&self, row: u64, column: u64, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.standard_normal(row, column)
    }
}
