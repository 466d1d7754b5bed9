//! Per-class half/half train/test partition.
//!
//! The shuffle uses xorshift64* so that any implementation can reproduce a
//! split from its seed:
//!
//! ```text
//! state  = seed XOR 0x9E3779B97F4A7C15      (replaced by 0x9E3779B97F4A7C15 if zero)
//! next() : state ^= state >> 12
//!          state ^= state << 25
//!          state ^= state >> 27
//!          return state * 0x2545F4914F6CDD1D (wrapping)
//! ```
//!
//! Classes are visited in ascending label order, all drawing from one
//! generator. Each class's labeled positions (ascending) are shuffled with
//! Fisher-Yates, `for i in (1..n).rev() { j = next() % (i + 1); swap(i, j) }`,
//! and the first `ceil(n / 2)` shuffled positions go to training.

use serde::{Deserialize, Serialize};

use crate::cube_io::GroundTruth;
use crate::error::{Error, Result};

const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;
const OUTPUT_MUL: u64 = 0x2545_F491_4F6C_DD1D;

#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let state = seed ^ SEED_MIX;
        XorShift64Star { state: if state == 0 { SEED_MIX } else { state } }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(OUTPUT_MUL)
    }

    /// `next() % bound`; the modulo bias is accepted for reproducibility.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSplit {
    pub class: u16,
    pub total: usize,
    pub train: usize,
    pub test: usize,
}

/// A stratified partition of the labeled pixels.
///
/// `train_idx` and `test_idx` index into the labeled-pixel order of the
/// ground truth (the order of [`GroundTruth::labeled_pixels`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub classes: Vec<ClassSplit>,
    /// Classes with a single labeled pixel; it went to training.
    pub singleton_classes: Vec<u16>,
    pub n_classes: usize,
    pixels: Vec<usize>,
    labels: Vec<u16>,
}

impl SplitPlan {
    /// Flat pixel index of each labeled position.
    pub fn pixels(&self) -> &[usize] {
        &self.pixels
    }

    /// Label of each labeled position.
    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn train_labels(&self) -> Vec<u16> {
        self.train_idx.iter().map(|&i| self.labels[i]).collect()
    }

    pub fn test_labels(&self) -> Vec<u16> {
        self.test_idx.iter().map(|&i| self.labels[i]).collect()
    }

    pub fn train_pixels(&self) -> Vec<usize> {
        self.train_idx.iter().map(|&i| self.pixels[i]).collect()
    }

    pub fn test_pixels(&self) -> Vec<usize> {
        self.test_idx.iter().map(|&i| self.pixels[i]).collect()
    }
}

pub fn stratified_split(gt: &GroundTruth, seed: u64) -> Result<SplitPlan> {
    let pixels = gt.labeled_pixels().to_vec();
    if pixels.is_empty() {
        return Err(Error::NoLabeledPixels);
    }
    let labels = gt.labeled_labels();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); gt.n_classes()];
    for (pos, &l) in labels.iter().enumerate() {
        members[l as usize - 1].push(pos);
    }

    let mut rng = XorShift64Star::new(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    let mut classes = Vec::new();
    let mut singleton_classes = Vec::new();
    for (c, mut positions) in members.into_iter().enumerate() {
        let class = (c + 1) as u16;
        let total = positions.len();
        if total == 0 {
            continue;
        }
        if total == 1 {
            singleton_classes.push(class);
        }
        rng.shuffle(&mut positions);
        let n_train = total.div_ceil(2);
        train_idx.extend_from_slice(&positions[..n_train]);
        test_idx.extend_from_slice(&positions[n_train..]);
        classes.push(ClassSplit { class, total, train: n_train, test: total - n_train });
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(SplitPlan { seed, train_idx, test_idx, classes, singleton_classes, n_classes: gt.n_classes(), pixels, labels })
}
