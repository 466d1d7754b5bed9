//! Plug-in (maximum-likelihood) histogram estimators, in bits.
//!
//! Every estimator works on [`DiscreteSeries`] realized over the same pixels.
//! Empty cells contribute nothing (`0 log 0 = 0`). No bias correction is
//! applied.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use crate::cube_io::DiscreteSeries;
use crate::error::{Error, Result};

/// Histograms with at most this many cells are stored densely.
pub const DENSE_CELL_LIMIT: usize = 1 << 22;

/// Rounding residue below zero, down to this magnitude, is clamped to 0 for
/// quantities that are non-negative in exact arithmetic.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Cells {
    Dense(Vec<u64>),
    Sparse(BTreeMap<u64, u64>),
}

/// Joint counts of 1 to 3 discrete series.
///
/// Cells are addressed row-major, so the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram {
    dims: Vec<usize>,
    cells: Cells,
    total: u64,
}

impl JointHistogram {
    pub fn from_series(series: &[&DiscreteSeries]) -> Result<Self> {
        let len = check_series(series)?;
        let dims: Vec<usize> = series.iter().map(|s| s.n_bins()).collect();
        let n_cells = dims
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
            .ok_or_else(|| Error::InvalidConfig("joint histogram too large to address".into()))?;

        let code = |i: usize| series.iter().fold(0u64, |acc, s| acc * s.n_bins() as u64 + u64::from(s.bins()[i]));
        let cells = if n_cells <= DENSE_CELL_LIMIT as u64 {
            let mut counts = vec![0u64; n_cells as usize];
            for i in 0..len {
                counts[code(i) as usize] += 1;
            }
            Cells::Dense(counts)
        } else {
            let mut counts = BTreeMap::new();
            for i in 0..len {
                *counts.entry(code(i)).or_insert(0) += 1;
            }
            Cells::Sparse(counts)
        };
        Ok(JointHistogram { dims, cells, total: len as u64 })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn flat(&self, cell: &[usize]) -> Option<u64> {
        if cell.len() != self.dims.len() || cell.iter().zip(&self.dims).any(|(&c, &d)| c >= d) {
            return None;
        }
        Some(cell.iter().zip(&self.dims).fold(0u64, |acc, (&c, &d)| acc * d as u64 + c as u64))
    }

    fn unflatten(&self, mut flat: u64) -> Vec<usize> {
        let mut cell = vec![0; self.dims.len()];
        for (slot, &d) in cell.iter_mut().zip(&self.dims).rev() {
            *slot = (flat % d as u64) as usize;
            flat /= d as u64;
        }
        cell
    }

    /// Count in `cell`; out-of-range cells hold 0.
    pub fn count(&self, cell: &[usize]) -> u64 {
        match self.flat(cell) {
            None => 0,
            Some(f) => match &self.cells {
                Cells::Dense(v) => v[f as usize],
                Cells::Sparse(m) => m.get(&f).copied().unwrap_or(0),
            },
        }
    }

    /// Non-empty cells in row-major order.
    pub fn nonzero(&self) -> Vec<(Vec<usize>, u64)> {
        self.nonzero_flat().into_iter().map(|(f, c)| (self.unflatten(f), c)).collect()
    }

    fn nonzero_flat(&self) -> Vec<(u64, u64)> {
        match &self.cells {
            Cells::Dense(v) => v.iter().enumerate().filter(|(_, &c)| c > 0).map(|(f, &c)| (f as u64, c)).collect(),
            Cells::Sparse(m) => m.iter().map(|(&f, &c)| (f, c)).collect(),
        }
    }

    /// Sums out `axis`, returning the histogram of the remaining series.
    pub fn marginalize(&self, axis: usize) -> Result<JointHistogram> {
        if axis >= self.dims.len() {
            return Err(Error::InvalidConfig(format!(
                "axis {axis} out of range for a {}-d histogram",
                self.dims.len()
            )));
        }
        if self.dims.len() == 1 {
            return Err(Error::InvalidConfig("cannot marginalize a 1-d histogram".into()));
        }
        let dims: Vec<usize> = self.dims.iter().enumerate().filter(|&(i, _)| i != axis).map(|(_, &d)| d).collect();
        let n_cells: u64 = dims.iter().map(|&d| d as u64).product();
        let remap = |cell: &[usize]| {
            cell.iter()
                .enumerate()
                .filter(|&(i, _)| i != axis)
                .zip(&dims)
                .fold(0u64, |acc, ((_, &c), &d)| acc * d as u64 + c as u64)
        };
        let cells = if n_cells <= DENSE_CELL_LIMIT as u64 {
            let mut counts = vec![0u64; n_cells as usize];
            for (cell, c) in self.nonzero() {
                counts[remap(&cell) as usize] += c;
            }
            Cells::Dense(counts)
        } else {
            let mut counts = BTreeMap::new();
            for (cell, c) in self.nonzero() {
                *counts.entry(remap(&cell)).or_insert(0) += c;
            }
            Cells::Sparse(counts)
        };
        Ok(JointHistogram { dims, cells, total: self.total })
    }

    pub fn entropy(&self) -> f64 {
        entropy_from_counts(self.nonzero_flat().into_iter().map(|(_, c)| c), self.total)
    }
}

fn check_series(series: &[&DiscreteSeries]) -> Result<usize> {
    let first = series.first().ok_or(Error::EmptyInput("no series given"))?;
    if series.len() > 3 {
        return Err(Error::InvalidConfig(format!("joint estimates take 1 to 3 series, got {}", series.len())));
    }
    let len = first.len();
    if let Some(s) = series.iter().find(|s| s.len() != len) {
        return Err(Error::LengthMismatch(len, s.len()));
    }
    if len == 0 {
        return Err(Error::EmptyInput("series has no samples"));
    }
    Ok(len)
}

/// `H = log2 N - (1/N) sum c log2 c` over non-empty cells.
///
/// Counts are summed in sorted order so that relabeling the cells of a
/// histogram yields a bit-identical result.
fn entropy_from_counts(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let mut counts: Vec<u64> = counts.filter(|&c| c > 1).collect();
    counts.sort_unstable();
    let n = total as f64;
    let weighted: f64 = counts
        .into_iter()
        .map(|c| {
            let c = c as f64;
            c * c.log2()
        })
        .sum();
    (n.log2() - weighted / n).max(0.0)
}

#[derive(Default)]
struct Scratch {
    dense: Vec<u32>,
    touched: Vec<u32>,
    sparse: HashMap<u128, u32>,
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
}

/// Entropy of the product-space variable, counted without building a
/// [`JointHistogram`]. Lengths must already be checked.
fn joint_entropy_unchecked(series: &[&DiscreteSeries]) -> f64 {
    let len = series[0].len();
    let n_cells: u128 = series.iter().map(|s| s.n_bins() as u128).product();
    let code = |i: usize| series.iter().fold(0u128, |acc, s| acc * s.n_bins() as u128 + u128::from(s.bins()[i]));

    SCRATCH.with(|scratch| {
        let mut scratch = scratch.borrow_mut();
        let Scratch { dense, touched, sparse } = &mut *scratch;
        if n_cells <= DENSE_CELL_LIMIT as u128 {
            if dense.len() < n_cells as usize {
                dense.resize(n_cells as usize, 0);
            }
            touched.clear();
            for i in 0..len {
                let c = code(i) as usize;
                if dense[c] == 0 {
                    touched.push(c as u32);
                }
                dense[c] += 1;
            }
            let h = entropy_from_counts(touched.iter().map(|&c| u64::from(dense[c as usize])), len as u64);
            for &c in touched.iter() {
                dense[c as usize] = 0;
            }
            h
        } else {
            sparse.clear();
            for i in 0..len {
                *sparse.entry(code(i)).or_insert(0) += 1;
            }
            entropy_from_counts(sparse.values().map(|&c| u64::from(c)), len as u64)
        }
    })
}

/// Shannon entropy `H(X)` in bits.
pub fn entropy(x: &DiscreteSeries) -> Result<f64> {
    check_series(&[x])?;
    Ok(joint_entropy_unchecked(&[x]))
}

/// Entropy of the joint variable formed by 1 to 3 series.
pub fn joint_entropy(xs: &[&DiscreteSeries]) -> Result<f64> {
    check_series(xs)?;
    Ok(joint_entropy_unchecked(xs))
}

/// `I(X;Y)` summed cell by cell over the joint histogram.
pub fn mutual_information(x: &DiscreteSeries, y: &DiscreteSeries) -> Result<f64> {
    let joint = JointHistogram::from_series(&[x, y])?;
    let nx = x.n_bins();
    let ny = y.n_bins();
    let mut px = vec![0u64; nx];
    let mut py = vec![0u64; ny];
    let cells = joint.nonzero_flat();
    for &(f, c) in &cells {
        px[(f / ny as u64) as usize] += c;
        py[(f % ny as u64) as usize] += c;
    }
    let n = joint.total() as f64;
    let mut terms: Vec<f64> = cells
        .iter()
        .map(|&(f, c)| {
            let cx = px[(f / ny as u64) as usize] as f64;
            let cy = py[(f % ny as u64) as usize] as f64;
            let c = c as f64;
            (c / n) * (c * n / (cx * cy)).log2()
        })
        .collect();
    // order-independent sum: bands inducing the same partition score identically
    terms.sort_unstable_by(f64::total_cmp);
    Ok(clamp_residue(terms.into_iter().sum()))
}

/// `I(A;C|B) = H(C|B) - H(C|A,B)`.
pub fn conditional_mi(a: &DiscreteSeries, c: &DiscreteSeries, given_b: &DiscreteSeries) -> Result<f64> {
    check_series(&[a, c, given_b])?;
    let h_bc = joint_entropy_unchecked(&[given_b, c]);
    let h_b = joint_entropy_unchecked(&[given_b]);
    let h_abc = joint_entropy_unchecked(&[a, given_b, c]);
    let h_ab = joint_entropy_unchecked(&[a, given_b]);
    Ok(clamp_residue((h_bc - h_b) - (h_abc - h_ab)))
}

/// Joint mutual information `I(A,B;C) = H(C) - H(C|A,B)`.
pub fn joint_mi(a: &DiscreteSeries, b: &DiscreteSeries, c: &DiscreteSeries) -> Result<f64> {
    check_series(&[a, b, c])?;
    let h_c = joint_entropy_unchecked(&[c]);
    let h_abc = joint_entropy_unchecked(&[a, b, c]);
    let h_ab = joint_entropy_unchecked(&[a, b]);
    Ok(clamp_residue(h_c - (h_abc - h_ab)))
}

fn clamp_residue(v: f64) -> f64 {
    if (-NEGATIVE_CLAMP..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}
