//! Seeded random streams. One stream per trial; everything random in a trial
//! (daemon choices, rule coins, Byzantine behaviour) draws from it in a fixed
//! order, so a seed pins the whole execution.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
    /// Forced outcomes for rule coins, consumed before any random draw.
    script: Option<VecDeque<bool>>,
    position: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            script: None,
            position: 0,
        }
    }

    /// A stream whose rule coins come from `draws` in order. Running past the
    /// end of the script is an error.
    pub fn scripted(draws: impl IntoIterator<Item = bool>) -> Self {
        RngStream {
            script: Some(draws.into_iter().collect()),
            ..RngStream::new(0)
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// `Rand(p)`: true with probability `p`.
    pub fn coin(&mut self, p: f64) -> Result<bool> {
        self.position += 1;
        match self.script.as_mut() {
            Some(script) => script
                .pop_front()
                .ok_or_else(|| Error::Script("coin script exhausted".into())),
            None => Ok(self.rng.gen::<f64>() < p),
        }
    }

    /// Uniform draw in `0..=hi`.
    pub fn below_inclusive(&mut self, hi: u64) -> u64 {
        self.position += 1;
        self.rng.gen_range(0..=hi)
    }

    /// Uniform index in `0..len`; `len` must be positive.
    pub fn index(&mut self, len: usize) -> usize {
        self.position += 1;
        self.rng.gen_range(0..len)
    }

    pub fn bool(&mut self, p: f64) -> bool {
        self.position += 1;
        self.rng.gen::<f64>() < p
    }

    pub fn remaining_script(&self) -> Option<usize> {
        self.script.as_ref().map(VecDeque::len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(17);
        let mut b = RngStream::new(17);
        for _ in 0..100 {
            assert_eq!(a.coin(0.3).unwrap(), b.coin(0.3).unwrap());
            assert_eq!(a.index(10), b.index(10));
        }
        assert_eq!(a.position(), 200);
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::BTreeSet<_> = (0..1000).map(|i| trial_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn script_is_consumed_then_errors() {
        let mut r = RngStream::scripted([true, false]);
        assert!(r.coin(0.0).unwrap());
        assert!(!r.coin(1.0).unwrap());
        assert!(matches!(r.coin(0.5), Err(Error::Script(_))));
    }

    #[test]
    fn extreme_probabilities() {
        let mut r = RngStream::new(1);
        assert!((0..1000).all(|_| r.coin(1.0).unwrap()));
        assert!((0..1000).all(|_| !r.coin(0.0).unwrap()));
    }
}
