//! Seed derivation for independent, reproducible random streams.
//!
//! Every stochastic step draws from a generator keyed on the run seed plus a
//! path of integers (iteration, site, forager, ...). The result does not depend
//! on evaluation order, so parallel and serial schedules agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x2545_F491_4F6C_DD1D))))
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, path))
}

// Domain tags keep streams of different subsystems apart.
pub(crate) mod tag {
    pub const SYNTH: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const KFOLD: u64 = 3;
    pub const BEES: u64 = 4;
    pub const PSO: u64 = 5;
    pub const SVM: u64 = 6;
    pub const NN: u64 = 7;
    pub const ENSEMBLE: u64 = 8;
    pub const RANDOM_MASK: u64 = 9;
}
