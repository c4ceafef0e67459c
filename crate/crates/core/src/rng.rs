//! Deterministic random sources for the sampling suites.
//!
//! ChaCha8 is used everywhere so that a `(seed, stream)` pair pins the byte
//! stream across platforms and releases. Suites shard their sample budget
//! over a fixed number of streams; the shard layout never depends on the
//! thread count, so reports are byte-identical however they are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of shards every sampling suite is split into, independent of how
/// many worker threads execute them.
pub const SUITE_SHARDS: usize = 64;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fixed seed splitting: shard `idx` of a suite keyed by `base`.
pub fn derived_seed(base: u64, idx: u64) -> u64 {
    splitmix64(base ^ idx.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal via Box-Muller; two uniforms per draw, no caching, so the
/// stream position is a pure function of the draw count.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..1024 {
            assert!(seen.insert(derived_seed(42, i)));
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = seeded(7);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = standard_normal(&mut rng);
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
