//! Fixtures shared by the benchmarks.

use hyperband_core::synthgen::{generate, SynthData, SynthSpec};
use hyperband_core::{stratified_split, DiscreteSeries, SplitPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scene with the Indian Pines footprint: 145 x 145 pixels, 220 bands,
/// 16 classes.
pub fn scene_sized(seed: u64) -> SynthData {
    generate(&SynthSpec::mixed(145, 145, 16, 220, seed)).expect("valid preset")
}

/// Smaller scene for per-iteration timings.
pub fn scene_small(n_bands: usize, seed: u64) -> SynthData {
    generate(&SynthSpec::mixed(60, 60, 8, n_bands, seed)).expect("valid preset")
}

pub fn random_series(len: usize, n_bins: usize, seed: u64) -> DiscreteSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bins = (0..len).map(|_| rng.random_range(0..n_bins as u32)).collect();
    DiscreteSeries::new(bins, n_bins).expect("in range")
}

pub fn split(data: &SynthData, seed: u64) -> SplitPlan {
    stratified_split(&data.gt, seed).expect("labeled pixels")
}
