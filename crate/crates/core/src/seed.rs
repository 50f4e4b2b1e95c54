//! Seed derivation.
//!
//! Every random stream in the crate comes from a root seed plus a path of
//! integer labels (cell index, repeat index, query index, ...). A label path
//! is folded into a child seed with SplitMix64, so a task's stream depends
//! only on its path and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `path` into `root`: `s = splitmix64(s ^ splitmix64(label))` per label.
pub fn derive(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |s, &label| splitmix64(s ^ splitmix64(label.wrapping_add(GOLDEN))))
}

pub fn rng(root: u64, path: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(root, path))
}

// Stream labels, so different subsystems never share a stream by accident.
pub(crate) const STREAM_TREE: u64 = 1;
pub(crate) const STREAM_SPLIT: u64 = 2;
pub(crate) const STREAM_QUERIES: u64 = 3;
pub(crate) const STREAM_TIES: u64 = 4;
pub(crate) const STREAM_ORACLE: u64 = 5;
pub(crate) const STREAM_SIM: u64 = 6;
pub(crate) const STREAM_PAIR: u64 = 7;
