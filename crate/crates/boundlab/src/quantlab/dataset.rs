use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One labelled pair; `label` is 1 iff the strings are equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledPair {
    pub y: Vec<u8>,
    pub z: Vec<u8>,
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub m: usize,
    pub seed: u64,
    /// Number of positions flipped in every unequal pair.
    pub flips: usize,
    pub pairs: Vec<LabeledPair>,
}

impl Dataset {
    pub fn equal_fraction(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        self.pairs.iter().filter(|p| p.label == 1).count() as f64 / self.pairs.len() as f64
    }
}

/// Draws y uniformly; with probability 1/2 sets z = y, otherwise flips a uniformly chosen
/// set of `⌊0.75 m⌋` positions of y. Streams come from ChaCha8 seeded with `seed`.
pub fn gen_dataset(m: usize, count: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flips = 3 * m / 4;
    let pairs = (0..count)
        .map(|_| {
            let y: Vec<u8> = (0..m).map(|_| rng.gen_range(0..2u8)).collect();
            let mut z = y.clone();
            if !rng.gen_bool(0.5) && flips > 0 {
                for i in sample(&mut rng, m, flips) {
                    z[i] ^= 1;
                }
            }
            let label = u8::from(y == z);
            LabeledPair { y, z, label }
        })
        .collect();
    Dataset { m, seed, flips, pairs }
}
