use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator behind every sampler; portable and bit-reproducible.
pub type PdRng = ChaCha8Rng;

/// 64-bit seed from which all random streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    pub fn rng(self) -> PdRng {
        PdRng::seed_from_u64(self.0)
    }

    /// Seed for task `index` of an ensemble: `splitmix64(seed ^ splitmix64(index))`.
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(index)))
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

/// Runs `count` independent tasks, task `i` seeded by `seed.derive(i)`.
/// Results come back in task order whatever the scheduling.
pub fn par_ensemble<T, F>(seed: RngSeed, count: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut PdRng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.derive(i as u64).rng();
            task(i, &mut rng)
        })
        .collect()
}
