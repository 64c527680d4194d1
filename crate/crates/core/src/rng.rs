//! Seeded generators. Every random choice in the crate goes through a
//! PCG-64 generator so runs are reproducible from one integer seed.

use rand::SeedableRng;
use rand_pcg::Pcg64;

pub type SeededRng = Pcg64;

pub fn seeded(seed: u64) -> SeededRng {
    Pcg64::seed_from_u64(seed)
}

/// Generator on an independent stream for the same seed.
pub fn seeded_stream(seed: u64, stream: u64) -> SeededRng {
    Pcg64::new(
        (seed as u128) << 64 | 0x853c_49e6_748f_ea9b,
        (stream as u128) << 1 | 1,
    )
}
