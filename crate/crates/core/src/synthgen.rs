//! Synthetic cubes with planted relevance, redundancy, complementarity and
//! noise, for checking selectors against a known answer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube_io::{GroundTruth, HyperCube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XorBit {
    A,
    B,
}

/// How one band is generated. Jitter is uniform on `[0, jitter]` and added
/// with saturation at `u16::MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandPlan {
    /// `offset + (label - 1) * scale + jitter`.
    Informative { scale: u16, offset: u16, jitter: u16 },
    /// Copy of an earlier band plus jitter (0 for an exact copy).
    Duplicate { of: usize, jitter: u16 },
    /// `offset + bit * scale + jitter`, where the labels are `1 + (a XOR b)`.
    XorPair { bit: XorBit, scale: u16, offset: u16, jitter: u16 },
    /// Uniform on `[lo, hi]`, independent of the labels.
    Noise { lo: u16, hi: u16 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelPlan {
    /// Classes `1..=n_classes` in equal shares (up to remainder), shuffled.
    Uniform { n_classes: u16 },
    /// Hidden fair bits `a`, `b` in equal shares of the four combinations;
    /// label is `1 + (a XOR b)`.
    Xor,
}

impl LabelPlan {
    pub fn n_classes(&self) -> usize {
        match *self {
            LabelPlan::Uniform { n_classes } => n_classes as usize,
            LabelPlan::Xor => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub labels: LabelPlan,
    pub bands: Vec<BandPlan>,
    pub seed: u64,
}

/// Band roles known by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    /// Bands carrying label information that no other band duplicates.
    pub minimal: Vec<usize>,
    /// Copies of earlier bands.
    pub redundant: Vec<usize>,
    pub noise: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub cube: HyperCube,
    pub gt: GroundTruth,
    pub expected: Expected,
}

const NOISE_FULL: BandPlan = BandPlan::Noise { lo: 0, hi: u16::MAX };
const NOISE_COARSE: BandPlan = BandPlan::Noise { lo: 0, hi: 3 };

impl SynthSpec {
    /// One exact label band (labels x 100), an exact duplicate of it and a
    /// uniform noise band, 100x100 pixels, 4 classes.
    pub fn duplicate(seed: u64) -> Self {
        SynthSpec {
            n_rows: 100,
            n_cols: 100,
            labels: LabelPlan::Uniform { n_classes: 4 },
            bands: vec![
                BandPlan::Informative { scale: 100, offset: 0, jitter: 0 },
                BandPlan::Duplicate { of: 0, jitter: 0 },
                NOISE_FULL,
            ],
            seed,
        }
    }

    /// Three independently jittered views of the labels (the first one the
    /// sharpest), an exact copy of the first and two four-level noise bands.
    /// Each view alone leaves classes confused, so a fresh view adds
    /// information that the copy cannot.
    pub fn redundancy(seed: u64) -> Self {
        let sharp = BandPlan::Informative { scale: 4000, offset: 1000, jitter: 6000 };
        let view = BandPlan::Informative { scale: 4000, offset: 1000, jitter: 8000 };
        SynthSpec {
            n_rows: 100,
            n_cols: 100,
            labels: LabelPlan::Uniform { n_classes: 4 },
            bands: vec![sharp, BandPlan::Duplicate { of: 0, jitter: 0 }, view, view, NOISE_COARSE, NOISE_COARSE],
            seed,
        }
    }

    /// XOR pair `a` (band 0), `b` (band 1) with labels `1 + (a XOR b)`, an
    /// exact copy of `a`, a weakly informative band and a noise band.
    pub fn xor(seed: u64) -> Self {
        SynthSpec {
            n_rows: 100,
            n_cols: 100,
            labels: LabelPlan::Xor,
            bands: vec![
                BandPlan::XorPair { bit: XorBit::A, scale: 20000, offset: 1000, jitter: 0 },
                BandPlan::XorPair { bit: XorBit::B, scale: 20000, offset: 1000, jitter: 0 },
                BandPlan::Duplicate { of: 0, jitter: 0 },
                BandPlan::Informative { scale: 8000, offset: 0, jitter: 30000 },
                NOISE_FULL,
            ],
            seed,
        }
    }

    /// A larger mixed cube: every third band a jittered label view, every
    /// fifth a near-copy of its predecessor, the rest noise.
    pub fn mixed(n_rows: usize, n_cols: usize, n_classes: u16, n_bands: usize, seed: u64) -> Self {
        let bands = (0..n_bands)
            .map(|b| {
                if b % 5 == 4 {
                    BandPlan::Duplicate { of: b - 1, jitter: 50 }
                } else if b % 3 == 0 {
                    BandPlan::Informative {
                        scale: 2000,
                        offset: 500 + 37 * b as u16,
                        jitter: 3000 + 400 * (b as u16 % 11),
                    }
                } else {
                    BandPlan::Noise { lo: 0, hi: 20000 }
                }
            })
            .collect();
        SynthSpec { n_rows, n_cols, labels: LabelPlan::Uniform { n_classes }, bands, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::InvalidSpec("image must have at least one pixel".into()));
        }
        if self.bands.is_empty() {
            return Err(Error::InvalidSpec("band plan is empty".into()));
        }
        if let LabelPlan::Uniform { n_classes: 0 } = self.labels {
            return Err(Error::InvalidSpec("need at least one class".into()));
        }
        for (i, plan) in self.bands.iter().enumerate() {
            match *plan {
                BandPlan::Duplicate { of, .. } if of >= i => {
                    return Err(Error::InvalidSpec(format!(
                        "band {i} duplicates band {of}, which is not defined before it"
                    )));
                }
                BandPlan::XorPair { .. } if self.labels != LabelPlan::Xor => {
                    return Err(Error::InvalidSpec(format!("band {i} is an XOR bit but labels are not XOR-generated")));
                }
                BandPlan::Noise { lo, hi } if lo > hi => {
                    return Err(Error::InvalidSpec(format!("band {i}: noise range {lo}..{hi} is empty")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn jitter(rng: &mut ChaCha8Rng, max: u16) -> u16 {
    if max == 0 {
        0
    } else {
        rng.random_range(0..=max)
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let n = spec.n_rows * spec.n_cols;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // (label, a, b) per pixel
    let mut latent: Vec<(u16, u16, u16)> = match spec.labels {
        LabelPlan::Uniform { n_classes } => (0..n).map(|i| ((i % n_classes as usize) as u16 + 1, 0, 0)).collect(),
        LabelPlan::Xor => (0..n)
            .map(|i| {
                let (a, b) = (((i % 4) >> 1) as u16, (i % 2) as u16);
                (1 + (a ^ b), a, b)
            })
            .collect(),
    };
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        latent.swap(i, j);
    }

    let mut values: Vec<u16> = Vec::with_capacity(n * spec.bands.len());
    let mut expected = Expected::default();
    for (band, plan) in spec.bands.iter().enumerate() {
        let start = values.len();
        match *plan {
            BandPlan::Informative { scale, offset, jitter: j } => {
                expected.minimal.push(band);
                for &(label, _, _) in &latent {
                    let base = offset.saturating_add((label - 1).saturating_mul(scale));
                    values.push(base.saturating_add(jitter(&mut rng, j)));
                }
            }
            BandPlan::XorPair { bit, scale, offset, jitter: j } => {
                expected.minimal.push(band);
                for &(_, a, b) in &latent {
                    let bit = if bit == XorBit::A { a } else { b };
                    values.push(offset.saturating_add(bit * scale).saturating_add(jitter(&mut rng, j)));
                }
            }
            BandPlan::Duplicate { of, jitter: j } => {
                expected.redundant.push(band);
                for p in 0..n {
                    let v = values[of * n + p];
                    values.push(v.saturating_add(jitter(&mut rng, j)));
                }
            }
            BandPlan::Noise { lo, hi } => {
                expected.noise.push(band);
                for _ in 0..n {
                    values.push(rng.random_range(lo..=hi));
                }
            }
        }
        debug_assert_eq!(values.len() - start, n);
    }

    let labels = latent.iter().map(|&(l, _, _)| l).collect();
    Ok(SynthData {
        cube: HyperCube::new(spec.bands.len(), spec.n_rows, spec.n_cols, values)?,
        gt: GroundTruth::new(spec.n_rows, spec.n_cols, labels)?,
        expected,
    })
}
