//! Std companion to `kbin-core`: file formats, the electricity scheduling
//! pipeline, the benchmark harness and the `kbin` command line.

pub mod bench;
pub mod cli;
pub mod electricity;
pub mod error;
pub mod formats;

pub use error::{KbinError, Result};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent seed for sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}
