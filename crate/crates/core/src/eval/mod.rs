//! Classification of selected band subsets and accuracy reporting.
//!
//! Labeled pixels are split half/half per class ([`stratified_split`]).
//! Features are the subset's raw values scaled to `[0, 1]` with per-band
//! min/max taken from the training pixels only.

pub mod knn;
pub mod split;
pub mod svm;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cube_io::{GroundTruth, HyperCube, QuantizationConfig};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::selectors::{SelectionContext, SelectionTrace, SelectorConfig, SelectorKind};

pub use knn::{Knn, DEFAULT_NEIGHBORS};
pub use split::{stratified_split, ClassSplit, SplitPlan, XorShift64Star};
pub use svm::{BinaryMachine, Kernel, OneVsOne, Samples, SvmParams};

/// Per-band affine map onto `[0, 1]` fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(samples: &Samples) -> Self {
        let d = samples.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for i in 0..samples.len() {
            for (j, &v) in samples.row(i).iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        MinMaxScaler { lo, hi }
    }

    /// Constant training bands map to 0.
    pub fn transform(&self, samples: &Samples) -> Samples {
        let d = samples.dim();
        let mut data = Vec::with_capacity(samples.len() * d);
        for i in 0..samples.len() {
            for (j, &v) in samples.row(i).iter().enumerate() {
                let span = self.hi[j] - self.lo[j];
                data.push(if span > 0.0 { (v - self.lo[j]) / span } else { 0.0 });
            }
        }
        Samples::new(data, d).expect("same width as input")
    }
}

/// Raw values of `subset` at the given flat pixel indices, one row per pixel.
pub fn gather_features(cube: &HyperCube, subset: &[usize], pixels: &[usize]) -> Result<Samples> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let bands = subset.iter().map(|&b| cube.band(b)).collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(pixels.len() * subset.len());
    for &p in pixels {
        data.extend(bands.iter().map(|band| f64::from(band[p])));
    }
    Samples::new(data, subset.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Svm,
    Knn,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(ClassifierKind::Svm),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::InvalidConfig(format!("unknown classifier {other:?} (expected svm or knn)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub kind: ClassifierKind,
    pub svm: SvmParams,
    pub neighbors: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams { kind: ClassifierKind::Svm, svm: SvmParams::default(), neighbors: DEFAULT_NEIGHBORS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    Svm(OneVsOne),
    Knn(Knn),
}

/// A trained classifier bound to the band subset and scaling it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub subset: Vec<usize>,
    pub scaler: MinMaxScaler,
    pub classifier: Classifier,
    /// Training samples per class, indexed by `label - 1`.
    pub train_counts: Vec<usize>,
}

/// The SVM flavor of [`TrainedModel`].
pub type SvmModel = TrainedModel;

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.classifier {
            Classifier::Svm(_) => ClassifierKind::Svm,
            Classifier::Knn(_) => ClassifierKind::Knn,
        }
    }

    pub fn svm(&self) -> Option<&OneVsOne> {
        match &self.classifier {
            Classifier::Svm(m) => Some(m),
            Classifier::Knn(_) => None,
        }
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset != self.subset.as_slice() {
            return Err(Error::SubsetMismatch { expected: self.subset.clone(), actual: subset.to_vec() });
        }
        Ok(())
    }

    /// Predicts labels for raw (unscaled) features.
    pub fn predict(&self, raw: &Samples) -> Vec<u16> {
        let x = self.scaler.transform(raw);
        match &self.classifier {
            Classifier::Svm(m) => m.predict_all(&x),
            Classifier::Knn(m) => m.predict_all(&x),
        }
    }
}

fn training_data(cube: &HyperCube, subset: &[usize], split: &SplitPlan) -> Result<(MinMaxScaler, Samples, Vec<u16>)> {
    let raw = gather_features(cube, subset, &split.train_pixels())?;
    let scaler = MinMaxScaler::fit(&raw);
    let x = scaler.transform(&raw);
    Ok((scaler, x, split.train_labels()))
}

fn train_counts(labels: &[u16], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &l in labels {
        counts[l as usize - 1] += 1;
    }
    counts
}

pub fn train_svm(cube: &HyperCube, subset: &[usize], split: &SplitPlan, params: &SvmParams) -> Result<TrainedModel> {
    params.validate()?;
    let (scaler, x, y) = training_data(cube, subset, split)?;
    let model = OneVsOne::train(&x, &y, params)?;
    Ok(TrainedModel {
        subset: subset.to_vec(),
        scaler,
        classifier: Classifier::Svm(model),
        train_counts: train_counts(&y, split.n_classes),
    })
}

pub fn train_knn(cube: &HyperCube, subset: &[usize], split: &SplitPlan, neighbors: usize) -> Result<TrainedModel> {
    let (scaler, x, y) = training_data(cube, subset, split)?;
    let counts = train_counts(&y, split.n_classes);
    let model = Knn::fit(x, y, neighbors)?;
    Ok(TrainedModel { subset: subset.to_vec(), scaler, classifier: Classifier::Knn(model), train_counts: counts })
}

pub fn train_classifier(
    cube: &HyperCube,
    subset: &[usize],
    split: &SplitPlan,
    params: &ClassifierParams,
) -> Result<TrainedModel> {
    match params.kind {
        ClassifierKind::Svm => train_svm(cube, subset, split, &params.svm),
        ClassifierKind::Knn => train_knn(cube, subset, split, params.neighbors),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: u16,
    pub total_pixels: usize,
    pub train_pixels: usize,
    pub test_pixels: usize,
    pub correct: usize,
    /// Percent; `None` when the class has no test pixels.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub band_subset: Vec<usize>,
    pub seed: u64,
    /// Percent of test pixels classified correctly.
    pub overall_accuracy: f64,
    pub per_class: Vec<ClassReport>,
    /// `confusion[true - 1][predicted - 1]`.
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    fn from_predictions(model: &TrainedModel, split: &SplitPlan, truth: &[u16], predicted: &[u16]) -> Result<Self> {
        let c = split.n_classes;
        let mut confusion = vec![vec![0u64; c]; c];
        for (&t, &p) in truth.iter().zip(predicted) {
            if p == 0 || p as usize > c {
                return Err(Error::Internal(format!("predicted label {p} outside 1..={c}")));
            }
            confusion[t as usize - 1][p as usize - 1] += 1;
        }
        let per_class = (0..c)
            .map(|i| {
                let test: u64 = confusion[i].iter().sum();
                let correct = confusion[i][i];
                let total = split.classes.iter().find(|s| s.class as usize == i + 1).map_or(0, |s| s.total);
                ClassReport {
                    class: (i + 1) as u16,
                    total_pixels: total,
                    train_pixels: model.train_counts.get(i).copied().unwrap_or(0),
                    test_pixels: test as usize,
                    correct: correct as usize,
                    accuracy: (test > 0).then(|| 100.0 * correct as f64 / test as f64),
                }
            })
            .collect();
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..c).map(|i| confusion[i][i]).sum();
        if total == 0 {
            return Err(Error::EmptyInput("split has no test pixels"));
        }
        Ok(EvalReport {
            classifier: model.kind(),
            band_subset: model.subset.clone(),
            seed: split.seed,
            overall_accuracy: 100.0 * trace as f64 / total as f64,
            per_class,
            confusion,
        })
    }

    /// `scope,class,total_pixels,train_pixels,test_pixels,correct,accuracy`,
    /// one overall row followed by one row per class.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str("scope,class,total_pixels,train_pixels,test_pixels,correct,accuracy\n");
        let sum = |f: fn(&ClassReport) -> usize| self.per_class.iter().map(f).sum::<usize>();
        let _ = writeln!(
            out,
            "overall,,{},{},{},{},{}",
            sum(|c| c.total_pixels),
            sum(|c| c.train_pixels),
            sum(|c| c.test_pixels),
            sum(|c| c.correct),
            sig6(self.overall_accuracy)
        );
        for c in &self.per_class {
            let _ = writeln!(
                out,
                "class,{},{},{},{},{},{}",
                c.class,
                c.total_pixels,
                c.train_pixels,
                c.test_pixels,
                c.correct,
                c.accuracy.map_or_else(String::new, sig6)
            );
        }
        out
    }

    /// JSON shaped like the accuracy tables: band count, overall accuracy,
    /// one entry per class, plus the confusion matrix.
    pub fn to_json(&self, provenance: Option<serde_json::Value>) -> serde_json::Value {
        let mut doc = serde_json::json!({
            "bands": self.band_subset.len(),
            "band_subset": self.band_subset,
            "classifier": self.classifier,
            "seed": self.seed,
            "overall_accuracy": self.overall_accuracy,
            "classes": self.per_class,
            "confusion": self.confusion,
        });
        if let Some(p) = provenance {
            doc["provenance"] = p;
        }
        doc
    }

    pub fn write(
        &self,
        dir: impl AsRef<Path>,
        stem: &str,
        comments: &[String],
        provenance: Option<serde_json::Value>,
    ) -> Result<()> {
        let dir = dir.as_ref();
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv, self.to_csv(comments)).map_err(|e| Error::io(&csv, e))?;
        let json = dir.join(format!("{stem}.json"));
        let mut text = serde_json::to_string_pretty(&self.to_json(provenance))
            .map_err(|e| Error::Internal(format!("report serialization: {e}")))?;
        text.push('\n');
        std::fs::write(&json, text).map_err(|e| Error::io(&json, e))
    }
}

/// Classifies the test pixels of `split` and tabulates the result.
pub fn evaluate(model: &TrainedModel, cube: &HyperCube, subset: &[usize], split: &SplitPlan) -> Result<EvalReport> {
    model.check_subset(subset)?;
    let raw = gather_features(cube, subset, &split.test_pixels())?;
    let predicted = model.predict(&raw);
    EvalReport::from_predictions(model, split, &split.test_labels(), &predicted)
}

/// Predicted label for every labeled pixel of `gt`, 0 elsewhere, row-major.
pub fn classification_map(
    model: &TrainedModel,
    cube: &HyperCube,
    subset: &[usize],
    gt: &GroundTruth,
) -> Result<Vec<u16>> {
    model.check_subset(subset)?;
    cube.check_aligned(gt)?;
    let raw = gather_features(cube, subset, gt.labeled_pixels())?;
    let predicted = model.predict(&raw);
    let mut map = vec![0u16; cube.n_pixels()];
    for (&p, &l) in gt.labeled_pixels().iter().zip(&predicted) {
        map[p] = l;
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub k: usize,
    pub trace: SelectionTrace,
    pub report: EvalReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub selector: SelectorKind,
    pub threshold: Option<f64>,
    pub quantization: QuantizationConfig,
    pub classifier: ClassifierParams,
    pub seed: u64,
}

/// Accuracy for each `k` in `ks` (ascending).
///
/// IG and JMI are run once at the largest `k` and truncated; the threshold
/// filter is rerun per `k`. A threshold trace that stops early is evaluated on
/// whatever it retained.
pub fn accuracy_sweep(cube: &HyperCube, gt: &GroundTruth, ks: &[usize], cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    if ks.is_empty() {
        return Err(Error::EmptyInput("no band counts to sweep"));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!("band counts must be strictly ascending, got {ks:?}")));
    }
    let ctx = SelectionContext::new(cube, gt, cfg.quantization)?;
    let split = stratified_split(gt, cfg.seed)?;
    let selector_cfg = |k| SelectorConfig {
        kind: cfg.selector,
        k,
        threshold: cfg.threshold,
        quantization: cfg.quantization,
        seed: cfg.seed,
    };
    let k_max = *ks.last().expect("non-empty");
    let full = if cfg.selector.prefix_consistent() { Some(ctx.run(&selector_cfg(k_max))?) } else { None };

    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let trace = match &full {
            Some(t) => t.prefix(k),
            None => ctx.run(&selector_cfg(k))?,
        };
        let model = train_classifier(cube, &trace.selected, &split, &cfg.classifier)?;
        let report = evaluate(&model, cube, &trace.selected, &split)?;
        points.push(SweepPoint { k, trace, report });
    }
    Ok(points)
}

/// Curve CSV: `selector,k,seed,overall_accuracy`.
pub fn sweep_csv(points: &[SweepPoint], selector: SelectorKind, seed: u64, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("selector,k,seed,overall_accuracy\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", selector.as_str(), p.k, seed, sig6(p.report.overall_accuracy));
    }
    out
}
