//! Brute-force reference implementations used as oracles.
//!
//! Everything here loops over every histogram cell and evaluates the textbook
//! sums directly, without touching the library's estimators.

#![allow(dead_code)]

use std::collections::HashMap;

use hyperband_core::{DiscreteSeries, GroundTruth, HyperCube};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn series(bins: Vec<u32>, n_bins: usize) -> DiscreteSeries {
    DiscreteSeries::new(bins, n_bins).unwrap()
}

/// A random series over a random alphabet of 1..=`max_bins` values.
pub fn random_series_upto(rng: &mut ChaCha8Rng, len: usize, max_bins: usize) -> DiscreteSeries {
    let n_bins = rng.random_range(1..=max_bins);
    random_series(rng, len, n_bins)
}

/// A random series of the given length over `n_bins` values.
pub fn random_series(rng: &mut ChaCha8Rng, len: usize, n_bins: usize) -> DiscreteSeries {
    let bins = (0..len).map(|_| rng.random_range(0..n_bins as u32)).collect();
    series(bins, n_bins)
}

fn plogp_ratio(p: f64, ratio: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * ratio.log2()
    }
}

fn prob(count: usize, n: usize) -> f64 {
    count as f64 / n as f64
}

pub fn oracle_entropy(x: &DiscreteSeries) -> f64 {
    let n = x.len();
    let mut h = 0.0;
    for v in 0..x.n_bins() as u32 {
        let p = prob(x.bins().iter().filter(|&&b| b == v).count(), n);
        h -= plogp_ratio(p, p);
    }
    h
}

pub fn oracle_joint_entropy(x: &DiscreteSeries, y: &DiscreteSeries) -> f64 {
    let n = x.len();
    let mut h = 0.0;
    for a in 0..x.n_bins() as u32 {
        for b in 0..y.n_bins() as u32 {
            let c = (0..n).filter(|&i| x.bins()[i] == a && y.bins()[i] == b).count();
            let p = prob(c, n);
            h -= plogp_ratio(p, p);
        }
    }
    h
}

/// `sum p(x,y) log p(x,y) / (p(x) p(y))`.
pub fn oracle_mi(x: &DiscreteSeries, y: &DiscreteSeries) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for a in 0..x.n_bins() as u32 {
        let pa = prob(x.bins().iter().filter(|&&v| v == a).count(), n);
        for b in 0..y.n_bins() as u32 {
            let pb = prob(y.bins().iter().filter(|&&v| v == b).count(), n);
            let pab = prob((0..n).filter(|&i| x.bins()[i] == a && y.bins()[i] == b).count(), n);
            if pab > 0.0 {
                total += plogp_ratio(pab, pab / (pa * pb));
            }
        }
    }
    total
}

struct Triple<'a> {
    a: &'a DiscreteSeries,
    b: &'a DiscreteSeries,
    c: &'a DiscreteSeries,
}

impl Triple<'_> {
    fn n(&self) -> usize {
        self.a.len()
    }

    /// Probability that each given coordinate matches; `None` means free.
    fn p(&self, a: Option<u32>, b: Option<u32>, c: Option<u32>) -> f64 {
        let hit = |s: &DiscreteSeries, want: Option<u32>, i: usize| want.map_or(true, |w| s.bins()[i] == w);
        let count = (0..self.n()).filter(|&i| hit(self.a, a, i) && hit(self.b, b, i) && hit(self.c, c, i)).count();
        prob(count, self.n())
    }

    fn cells(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        let (na, nb, nc) = (self.a.n_bins() as u32, self.b.n_bins() as u32, self.c.n_bins() as u32);
        (0..na).flat_map(move |x| (0..nb).flat_map(move |y| (0..nc).map(move |z| (x, y, z))))
    }
}

/// `I(A;C|B) = sum p(a,b,c) log p(b) p(a,b,c) / (p(a,b) p(b,c))`.
pub fn oracle_cmi(a: &DiscreteSeries, c: &DiscreteSeries, given_b: &DiscreteSeries) -> f64 {
    let t = Triple { a, b: given_b, c };
    let mut total = 0.0;
    for (x, y, z) in t.cells() {
        let pabc = t.p(Some(x), Some(y), Some(z));
        if pabc > 0.0 {
            let pb = t.p(None, Some(y), None);
            let pab = t.p(Some(x), Some(y), None);
            let pbc = t.p(None, Some(y), Some(z));
            total += plogp_ratio(pabc, pb * pabc / (pab * pbc));
        }
    }
    total
}

/// `I(A,B;C) = sum p(a,b,c) log p(a,b,c) / (p(a,b) p(c))`.
pub fn oracle_jmi(a: &DiscreteSeries, b: &DiscreteSeries, c: &DiscreteSeries) -> f64 {
    let t = Triple { a, b, c };
    let mut total = 0.0;
    for (x, y, z) in t.cells() {
        let pabc = t.p(Some(x), Some(y), Some(z));
        if pabc > 0.0 {
            let pab = t.p(Some(x), Some(y), None);
            let pc = t.p(None, None, Some(z));
            total += plogp_ratio(pabc, pabc / (pab * pc));
        }
    }
    total
}

/// Plug-in JMI through a hash map of observed triples, for series too large
/// for the cell-looping oracle.
pub fn oracle_jmi_sparse(a: &[u32], b: &[u32], c: &[u32]) -> f64 {
    let n = a.len() as f64;
    let mut abc: HashMap<(u32, u32, u32), f64> = HashMap::new();
    let mut ab: HashMap<(u32, u32), f64> = HashMap::new();
    let mut cc: HashMap<u32, f64> = HashMap::new();
    for i in 0..a.len() {
        *abc.entry((a[i], b[i], c[i])).or_default() += 1.0;
        *ab.entry((a[i], b[i])).or_default() += 1.0;
        *cc.entry(c[i]).or_default() += 1.0;
    }
    abc.iter().map(|(&(x, y, z), &k)| (k / n) * ((k * n) / (ab[&(x, y)] * cc[&z])).log2()).sum()
}

pub fn oracle_mi_sparse(x: &[u32], y: &[u32]) -> f64 {
    let zeros = vec![0u32; x.len()];
    oracle_jmi_sparse(&zeros, x, y)
}

/// `floor((v - lo) * n / (hi - lo + 1))` clamped, constant input to bin 0.
pub fn oracle_quantize(values: &[f64], n_bins: usize) -> Vec<u32> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| {
            if hi <= lo {
                return 0;
            }
            let bin = ((v - lo) * (n_bins as f64 / (hi - lo + 1.0))).floor();
            bin.max(0.0).min((n_bins - 1) as f64) as u32
        })
        .collect()
}

/// Greedy JMI recomputed from scratch at every step: argmax MI to start, then
/// `argmax_b I(q(GTest), b; GT)` with `GTest <- (GTest + b) / 2`, lowest index
/// on ties.
pub fn oracle_greedy_jmi(cube: &HyperCube, gt: &GroundTruth, n_bins: usize, k: usize) -> Vec<usize> {
    let pixels = gt.labeled_pixels();
    let labels: Vec<u32> = pixels.iter().map(|&p| u32::from(gt.labels()[p]) - 1).collect();
    let raw: Vec<Vec<f64>> =
        (0..cube.n_bands()).map(|b| pixels.iter().map(|&p| f64::from(cube.band(b).unwrap()[p])).collect()).collect();
    let quantized: Vec<Vec<u32>> = raw.iter().map(|v| oracle_quantize(v, n_bins)).collect();

    let argmax = |scores: &[(usize, f64)]| {
        let mut best = scores[0];
        for &(b, s) in &scores[1..] {
            if s > best.1 + 1e-12 {
                best = (b, s);
            }
        }
        best.0
    };

    let mi: Vec<(usize, f64)> = (0..cube.n_bands()).map(|b| (b, oracle_mi_sparse(&quantized[b], &labels))).collect();
    let first = argmax(&mi);
    let mut picked = vec![first];
    let mut gtest = raw[first].clone();
    while picked.len() < k {
        let q = oracle_quantize(&gtest, n_bins);
        let scores: Vec<(usize, f64)> = (0..cube.n_bands())
            .filter(|b| !picked.contains(b))
            .map(|b| (b, oracle_jmi_sparse(&q, &quantized[b], &labels)))
            .collect();
        let next = argmax(&scores);
        picked.push(next);
        for (g, v) in gtest.iter_mut().zip(&raw[next]) {
            *g = (*g + v) / 2.0;
        }
    }
    picked
}
