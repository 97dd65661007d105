use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded, splittable random stream. Forks are independent of how much the
/// parent has been consumed, so per-trial streams do not depend on scheduling.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fork(&self, index: u64) -> Rng {
        Rng::new(splitmix(self.seed ^ splitmix(index.wrapping_add(0x5151))))
    }

    pub fn fork_key(&self, key: &str) -> Rng {
        // FNV-1a, stable across platforms and releases
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in key.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.fork(h)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    pub fn bool(&mut self) -> bool {
        self.inner.random()
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        self.inner.random_range(0..n)
    }

    /// Uniform in `lo..=hi`.
    pub fn between(&mut self, lo: i64, hi: i64) -> i64 {
        self.inner.random_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.inner.random_bool(p.clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = { let mut r = Rng::new(42); (0..10).map(|_| r.next_u64()).collect() };
        let b: Vec<u64> = { let mut r = Rng::new(42); (0..10).map(|_| r.next_u64()).collect() };
        assert_eq!(a, b);
        assert_ne!(a, { let mut r = Rng::new(43); (0..10).map(|_| r.next_u64()).collect::<Vec<_>>() });
    }

    #[test]
    fn forks_ignore_parent_consumption() {
        let mut a = Rng::new(7);
        let b = Rng::new(7);
        a.next_u64();
        assert_eq!(a.fork(3).next_u64(), b.fork(3).next_u64());
        assert_ne!(b.fork(3).next_u64(), b.fork(4).next_u64());
        assert_eq!(b.fork_key("x").next_u64(), b.fork_key("x").next_u64());
    }
}
