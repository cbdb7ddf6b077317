//! Seeded inputs shared by the benchmarks.

use framelab::sequences::random;
use framelab::TruncatedSequence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gaussian `d x n` sequence from a fixed seed.
pub fn gaussian(d: usize, n: usize, seed: u64) -> TruncatedSequence {
    random::gaussian_sequence(d, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Truncation sizes used across the benchmark groups.
pub const SIZES: [usize; 3] = [32, 64, 128];
