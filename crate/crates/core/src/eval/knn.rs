//! k-nearest-neighbor fallback classifier (Euclidean, majority vote).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::Samples;
use crate::error::{Error, Result};

pub const DEFAULT_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    samples: Samples,
    labels: Vec<u16>,
}

impl Knn {
    pub fn fit(samples: Samples, labels: Vec<u16>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("kNN needs k >= 1".into()));
        }
        if samples.len() != labels.len() {
            return Err(Error::LengthMismatch(samples.len(), labels.len()));
        }
        let mut classes = labels.clone();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        Ok(Knn { k, samples, labels })
    }

    /// Ties in distance keep the earlier training sample; ties in votes go to
    /// the lowest class id.
    pub fn predict(&self, x: &[f64]) -> u16 {
        let mut dists: Vec<(f64, usize)> = (0..self.samples.len())
            .map(|i| {
                let d: f64 = self.samples.row(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let k = self.k.min(dists.len());
        dists.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut neighbors: Vec<u16> = dists[..k].iter().map(|&(_, i)| self.labels[i]).collect();
        neighbors.sort_unstable();
        let mut best = (0usize, neighbors[0]);
        let mut run = (0usize, neighbors[0]);
        for &l in &neighbors {
            if l == run.1 {
                run.0 += 1;
            } else {
                run = (1, l);
            }
            if run.0 > best.0 {
                best = run;
            }
        }
        best.1
    }

    pub fn predict_all(&self, samples: &Samples) -> Vec<u16> {
        (0..samples.len()).into_par_iter().map(|i| self.predict(samples.row(i))).collect()
    }
}
