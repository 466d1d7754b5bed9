//! Band selection filters.
//!
//! All three selectors start from the band with the highest mutual
//! information with the ground truth:
//!
//! * [`select_ig`] ranks bands by that mutual information alone.
//! * [`select_mi_threshold`] walks the ranking once and keeps a band only if
//!   averaging it into the running ground-truth estimate raises
//!   `I(estimate; GT)` by more than a threshold.
//! * [`select_jmi`] greedily adds the band maximizing
//!   `I(estimate, band; GT)`, then folds it into the estimate.
//!
//! The running estimate is updated as `new = (old + band) / 2` in real
//! arithmetic and only quantized when handed to an estimator.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube_io::{labels_series, DiscreteSeries, GroundTruth, HyperCube, QuantizationConfig, Quantizer};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::infotheory::{entropy, joint_mi, mutual_information};

/// Two criterion values closer than this are a tie, resolved by band index.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Running ground-truth estimate over the labeled pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct GtEstimate {
    values: Vec<f64>,
    source_bands: Vec<usize>,
    pixels: Vec<usize>,
}

impl GtEstimate {
    /// Starts an estimate from one band's values at `pixels`.
    pub fn from_band(cube: &HyperCube, pixels: &[usize], band: usize) -> Result<Self> {
        Ok(GtEstimate { values: cube.band_values_at(band, pixels)?, source_bands: vec![band], pixels: pixels.to_vec() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_bands(&self) -> &[usize] {
        &self.source_bands
    }

    /// Averages `band` into the estimate in place.
    pub fn fold_in(&mut self, cube: &HyperCube, band: usize) -> Result<()> {
        let data = cube.band(band)?;
        for (v, &p) in self.values.iter_mut().zip(&self.pixels) {
            *v = (*v + f64::from(data[p])) / 2.0;
        }
        self.source_bands.push(band);
        Ok(())
    }
}

/// Returns `(est + band) / 2` over the estimate's pixels, with `band` appended
/// to its history.
pub fn update_gtest(est: &GtEstimate, cube: &HyperCube, band: usize) -> Result<GtEstimate> {
    let mut next = est.clone();
    next.fold_in(cube, band)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ReachedK,
    Exhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::ReachedK => "reached_k",
            StopReason::Exhausted => "exhausted",
        }
    }
}

/// A candidate the threshold filter examined and turned down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub band: usize,
    /// `I(estimate'; GT)` the band would have produced.
    pub criterion_value: f64,
    /// How many bands were already selected when it was examined.
    pub after_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub selector: SelectorKind,
    pub selected: Vec<usize>,
    pub criterion_values: Vec<f64>,
    pub rejected: Vec<Rejection>,
    pub stop_reason: StopReason,
}

impl SelectionTrace {
    fn new(selector: SelectorKind) -> Self {
        SelectionTrace {
            selector,
            selected: Vec::new(),
            criterion_values: Vec::new(),
            rejected: Vec::new(),
            stop_reason: StopReason::ReachedK,
        }
    }

    fn push(&mut self, band: usize, value: f64) {
        self.selected.push(band);
        self.criterion_values.push(value);
    }

    /// The first `k` picks of a prefix-consistent trace.
    pub fn prefix(&self, k: usize) -> SelectionTrace {
        let k = k.min(self.selected.len());
        SelectionTrace {
            selector: self.selector,
            selected: self.selected[..k].to_vec(),
            criterion_values: self.criterion_values[..k].to_vec(),
            rejected: self.rejected.iter().filter(|r| r.after_step <= k).copied().collect(),
            stop_reason: self.stop_reason,
        }
    }

    /// CSV with columns `step,band_index,criterion_value,status`, rows in the
    /// order candidates were examined. Rejected rows only occur for the
    /// threshold filter.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "# stop_reason={}", self.stop_reason.as_str());
        out.push_str("step,band_index,criterion_value,status\n");
        let mut step = 0;
        let mut row = |out: &mut String, band: usize, value: f64, status: &str| {
            step += 1;
            let _ = writeln!(out, "{step},{band},{},{status}", sig6(value));
        };
        for rej in self.rejected.iter().filter(|r| r.after_step == 0) {
            row(&mut out, rej.band, rej.criterion_value, "rejected");
        }
        for (i, (&band, &value)) in self.selected.iter().zip(&self.criterion_values).enumerate() {
            row(&mut out, band, value, "accepted");
            for rej in self.rejected.iter().filter(|r| r.after_step == i + 1) {
                row(&mut out, rej.band, rej.criterion_value, "rejected");
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv(comments)).map_err(|e| Error::io(path, e))
    }
}

/// Reads the accepted bands back from a trace CSV.
pub fn read_trace_bands(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut bands = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("step,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!("{}: malformed trace row {line:?}", path.display())));
        }
        if fields[3] == "accepted" {
            let band = fields[1]
                .parse()
                .map_err(|_| Error::Format(format!("{}: bad band index {:?}", path.display(), fields[1])))?;
            bands.push(band);
        }
    }
    Ok(bands)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Ig,
    MiTh,
    Jmi,
}

impl SelectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::Ig => "ig",
            SelectorKind::MiTh => "mi_th",
            SelectorKind::Jmi => "jmi",
        }
    }

    /// Whether the first `k` picks for a larger `k` equal the picks for `k`.
    pub fn prefix_consistent(self) -> bool {
        !matches!(self, SelectorKind::MiTh)
    }
}

impl std::str::FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ig" => Ok(SelectorKind::Ig),
            "mi_th" => Ok(SelectorKind::MiTh),
            "jmi" => Ok(SelectorKind::Jmi),
            other => Err(Error::InvalidConfig(format!("unknown selector {other:?} (expected ig, mi_th or jmi)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorConfig {
    pub kind: SelectorKind,
    pub k: usize,
    /// Only read by the threshold filter.
    pub threshold: Option<f64>,
    pub quantization: QuantizationConfig,
    /// Carried for provenance; selection itself is deterministic.
    pub seed: u64,
}

impl SelectorConfig {
    pub fn validate(&self, n_bands: usize) -> Result<()> {
        check_k(self.k, n_bands)?;
        self.quantization.validate()?;
        match (self.kind, self.threshold) {
            (SelectorKind::MiTh, None) => Err(Error::InvalidConfig("the mi_th selector needs a threshold".into())),
            (SelectorKind::MiTh, Some(th)) if th.is_nan() => Err(Error::InvalidConfig("threshold is NaN".into())),
            (SelectorKind::Ig | SelectorKind::Jmi, Some(_)) => {
                Err(Error::InvalidConfig(format!("a threshold only applies to mi_th, not {}", self.kind.as_str())))
            }
            _ => Ok(()),
        }
    }
}

fn check_k(k: usize, n_bands: usize) -> Result<()> {
    if k == 0 || k > n_bands {
        return Err(Error::KOutOfRange { k, n_bands });
    }
    Ok(())
}

/// Quantized bands and labels shared by all selectors for one dataset.
#[derive(Debug, Clone)]
pub struct SelectionContext<'a> {
    cube: &'a HyperCube,
    quantizer: Quantizer,
    bands: Vec<DiscreteSeries>,
    labels: DiscreteSeries,
    profile: Vec<f64>,
}

impl<'a> SelectionContext<'a> {
    pub fn new(cube: &'a HyperCube, gt: &GroundTruth, cfg: QuantizationConfig) -> Result<Self> {
        let quantizer = Quantizer::new(cube, gt, cfg)?;
        let labels = labels_series(gt);
        let bands = (0..cube.n_bands()).into_par_iter().map(|b| quantizer.band(cube, b)).collect::<Result<Vec<_>>>()?;
        let profile = bands.par_iter().map(|s| mutual_information(s, &labels)).collect::<Result<Vec<_>>>()?;
        Ok(SelectionContext { cube, quantizer, bands, labels, profile })
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn band_series(&self, band: usize) -> &DiscreteSeries {
        &self.bands[band]
    }

    pub fn labels(&self) -> &DiscreteSeries {
        &self.labels
    }

    /// `I(band; GT)` for every band.
    pub fn mi_profile(&self) -> &[f64] {
        &self.profile
    }

    pub fn quantize_estimate(&self, est: &GtEstimate) -> DiscreteSeries {
        self.quantizer.values(est.values())
    }

    /// Bands ordered by decreasing MI with the ground truth. Each position is
    /// filled by [`argmax_lowest`] over the bands left, so values within
    /// [`TIE_TOLERANCE`] rank by index exactly as in the greedy steps.
    pub fn mi_ranking(&self) -> Vec<usize> {
        let mut remaining: Vec<usize> = (0..self.n_bands()).collect();
        let mut order = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let scores: Vec<f64> = remaining.iter().map(|&b| self.profile[b]).collect();
            let pos = argmax_lowest(&scores).expect("non-empty");
            order.push(remaining.remove(pos));
        }
        order
    }

    pub fn run(&self, cfg: &SelectorConfig) -> Result<SelectionTrace> {
        cfg.validate(self.n_bands())?;
        match cfg.kind {
            SelectorKind::Ig => self.select_ig(cfg.k),
            SelectorKind::MiTh => self.select_mi_threshold(cfg.k, cfg.threshold.unwrap_or(0.0)),
            SelectorKind::Jmi => self.select_jmi(cfg.k),
        }
    }

    pub fn select_ig(&self, k: usize) -> Result<SelectionTrace> {
        check_k(k, self.n_bands())?;
        let mut trace = SelectionTrace::new(SelectorKind::Ig);
        for band in self.mi_ranking().into_iter().take(k) {
            trace.push(band, self.profile[band]);
        }
        Ok(trace)
    }

    pub fn select_mi_threshold(&self, k: usize, threshold: f64) -> Result<SelectionTrace> {
        check_k(k, self.n_bands())?;
        let ranking = self.mi_ranking();
        let mut trace = SelectionTrace::new(SelectorKind::MiTh);

        let first = ranking[0];
        let mut estimate = GtEstimate::from_band(self.cube, self.quantizer.pixels(), first)?;
        let mut best = mutual_information(&self.quantize_estimate(&estimate), &self.labels)?;
        trace.push(first, best);

        for &band in &ranking[1..] {
            if trace.selected.len() == k {
                break;
            }
            let candidate = update_gtest(&estimate, self.cube, band)?;
            let mi = mutual_information(&self.quantize_estimate(&candidate), &self.labels)?;
            if mi - best > threshold {
                trace.push(band, mi);
                estimate = candidate;
                best = mi;
            } else {
                trace.rejected.push(Rejection { band, criterion_value: mi, after_step: trace.selected.len() });
            }
        }
        trace.stop_reason = if trace.selected.len() == k { StopReason::ReachedK } else { StopReason::Exhausted };
        Ok(trace)
    }

    pub fn select_jmi(&self, k: usize) -> Result<SelectionTrace> {
        check_k(k, self.n_bands())?;
        let mut trace = SelectionTrace::new(SelectorKind::Jmi);
        let first = self.mi_ranking()[0];
        let mut estimate = GtEstimate::from_band(self.cube, self.quantizer.pixels(), first)?;
        trace.push(first, self.profile[first]);

        let mut remaining: Vec<usize> = (0..self.n_bands()).filter(|&b| b != first).collect();
        while trace.selected.len() < k {
            let gtest = self.quantize_estimate(&estimate);
            let scores = remaining
                .par_iter()
                .map(|&b| joint_mi(&gtest, &self.bands[b], &self.labels))
                .collect::<Result<Vec<_>>>()?;
            let pos = argmax_lowest(&scores).ok_or_else(|| Error::Internal("no candidate bands left".into()))?;
            let band = remaining.remove(pos);
            trace.push(band, scores[pos]);
            estimate.fold_in(self.cube, band)?;
        }
        Ok(trace)
    }
}

/// Index of the maximum; values within [`TIE_TOLERANCE`] of the running best
/// keep the earlier index.
pub(crate) fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b + TIE_TOLERANCE => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// `I(band; GT)` for every band of `cube`.
pub fn mi_profile(cube: &HyperCube, gt: &GroundTruth, cfg: &QuantizationConfig) -> Result<Vec<f64>> {
    Ok(SelectionContext::new(cube, gt, *cfg)?.profile)
}

pub fn select_ig(cube: &HyperCube, gt: &GroundTruth, cfg: &QuantizationConfig, k: usize) -> Result<SelectionTrace> {
    check_k(k, cube.n_bands())?;
    SelectionContext::new(cube, gt, *cfg)?.select_ig(k)
}

pub fn select_mi_threshold(
    cube: &HyperCube,
    gt: &GroundTruth,
    cfg: &QuantizationConfig,
    k: usize,
    threshold: f64,
) -> Result<SelectionTrace> {
    check_k(k, cube.n_bands())?;
    SelectionContext::new(cube, gt, *cfg)?.select_mi_threshold(k, threshold)
}

pub fn select_jmi(cube: &HyperCube, gt: &GroundTruth, cfg: &QuantizationConfig, k: usize) -> Result<SelectionTrace> {
    check_k(k, cube.n_bands())?;
    SelectionContext::new(cube, gt, *cfg)?.select_jmi(k)
}

/// Upper bound for any JMI step value: `H(GT)`.
pub fn label_entropy(gt: &GroundTruth) -> Result<f64> {
    entropy(&labels_series(gt))
}
