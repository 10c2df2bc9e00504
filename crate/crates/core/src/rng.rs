//! Seeded, platform-independent randomness for the augmentation pipeline.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of bounded integer draws. Operators only ever ask for `below(n)`,
/// which lets tests script the exact draw sequence.
pub trait Draw {
    /// Uniform integer in `0..n`. `n` must be positive.
    fn below(&mut self, n: usize) -> usize;

    /// Uniform float in `[0, 1)`.
    fn unit(&mut self) -> f64 {
        self.below(1 << 30) as f64 / (1u64 << 30) as f64
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of stream `index` under `seed`. Injective in `index` for a fixed seed.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(index))
}

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn child(seed: u64, index: u64) -> Self {
        Self::new(child_seed(seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Standard normal draw (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1: f64 = 1.0 - self.inner.gen::<f64>();
        let u2: f64 = self.inner.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

impl Draw for Rng {
    fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.inner.gen_range(0..n as u64) as usize
    }

    fn unit(&mut self) -> f64 {
        self.inner.gen()
    }
}

/// Replays a fixed list of draws; each value is reduced modulo the requested bound.
#[derive(Debug, Clone)]
pub struct Scripted {
    draws: Vec<usize>,
    pos: usize,
}

impl Scripted {
    pub fn new(draws: impl Into<Vec<usize>>) -> Self {
        Self {
            draws: draws.into(),
            pos: 0,
        }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl Draw for Scripted {
    fn below(&mut self, n: usize) -> usize {
        let v = *self
            .draws
            .get(self.pos)
            .unwrap_or_else(|| panic!("scripted draws exhausted after {}", self.pos));
        self.pos += 1;
        v % n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = Rng::new(7);
        let mut b = Rng::new(7);
        let xs: Vec<usize> = (0..50).map(|_| a.below(1000)).collect();
        let ys: Vec<usize> = (0..50).map(|_| b.below(1000)).collect();
        assert_eq!(xs, ys);
        assert_eq!(a.counter(), b.counter());
    }

    #[test]
    fn pinned_sequence() {
        // Guards against silent changes to the draw algorithm across upgrades.
        let mut r = Rng::new(42);
        let xs: Vec<usize> = (0..8).map(|_| r.below(9)).collect();
        assert_eq!(xs, vec![6, 8, 1, 7, 2, 4, 8, 5]);
        assert_eq!(
            [child_seed(42, 0), child_seed(42, 1)],
            [14769503741126384973u64, 15753111256889434642]
        );
    }

    #[test]
    fn child_seeds_do_not_collide() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..100_000u64 {
            assert!(seen.insert(child_seed(1234, i)));
        }
    }

    #[test]
    fn children_differ_from_each_other() {
        let mut a = Rng::child(5, 0);
        let mut b = Rng::child(5, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn scripted_reduces_modulo() {
        let mut s = Scripted::new([5, 2]);
        assert_eq!(s.below(3), 2);
        assert_eq!(s.below(10), 2);
        assert_eq!(s.consumed(), 2);
    }

    #[test]
    fn unit_in_range() {
        let mut r = Rng::new(3);
        for _ in 0..1000 {
            let u = r.unit();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
