//! Counter-based uniforms keyed by (seed, purpose, temperature index, sweep, slot).
//!
//! Each key selects a ChaCha8 stream; the slot (usually a site index) is the word
//! position inside it. A draw is a pure function of its key, so updates can run in
//! any order or on any number of threads and still see the same numbers.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// What a draw is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Random initial lattice.
    Init = 1,
    /// Measurement or acceptance uniform, one per site per sweep.
    Update = 2,
    /// Rotation-error perturbations, one per probability qubit per site per sweep.
    GateError = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

/// 53-bit uniform in [0, 1).
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, purpose: Purpose, t_index: usize, sweep: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let id = ((purpose as u64) << 56) | ((t_index as u64 & 0xff_ffff) << 32) | (sweep as u64 & 0xffff_ffff);
        rng.set_stream(id);
        rng
    }

    /// Draw for a single slot.
    pub fn uniform(&self, purpose: Purpose, t_index: usize, sweep: usize, slot: usize) -> f64 {
        let mut rng = self.stream(purpose, t_index, sweep);
        rng.set_word_pos(2 * slot as u128);
        unit_f64(rng.next_u64())
    }

    /// Fill `out[k]` with the draw for slot `k`. Same values as [`Self::uniform`].
    pub fn fill(&self, purpose: Purpose, t_index: usize, sweep: usize, out: &mut [f64]) {
        let mut rng = self.stream(purpose, t_index, sweep);
        for v in out.iter_mut() {
            *v = unit_f64(rng.next_u64());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_matches_random_access() {
        let rng = CounterRng::new(42);
        let mut buf = vec![0.0; 37];
        rng.fill(Purpose::Update, 3, 11, &mut buf);
        for (k, &v) in buf.iter().enumerate() {
            assert_eq!(v, rng.uniform(Purpose::Update, 3, 11, k));
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn keys_separate_streams() {
        let rng = CounterRng::new(7);
        let a = rng.uniform(Purpose::Update, 0, 0, 0);
        assert_ne!(a, rng.uniform(Purpose::Update, 0, 1, 0));
        assert_ne!(a, rng.uniform(Purpose::Update, 1, 0, 0));
        assert_ne!(a, rng.uniform(Purpose::Init, 0, 0, 0));
        assert_ne!(a, rng.uniform(Purpose::Update, 0, 0, 1));
        assert_ne!(a, CounterRng::new(8).uniform(Purpose::Update, 0, 0, 0));
        assert_eq!(a, CounterRng::new(7).uniform(Purpose::Update, 0, 0, 0));
    }

    #[test]
    fn roughly_uniform() {
        let rng = CounterRng::new(1);
        let mut buf = vec![0.0; 100_000];
        rng.fill(Purpose::Update, 0, 0, &mut buf);
        let mean = buf.iter().sum::<f64>() / buf.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        let below = buf.iter().filter(|&&u| u < 0.1).count() as f64 / buf.len() as f64;
        assert!((below - 0.1).abs() < 0.005);
    }

    #[test]
    fn unit_f64_range() {
        assert_eq!(unit_f64(0), 0.0);
        assert!(unit_f64(u64::MAX) < 1.0);
    }
}
