//! Hyperspectral cube and ground-truth ingestion.
//!
//! Cubes are stored as a JSON sidecar header next to a raw payload of
//! little-endian `u16` values in band-sequential order:
//!
//! ```json
//! {"bands": 220, "rows": 145, "cols": 145, "dtype": "u16le", "data": "cube.raw"}
//! ```
//!
//! Ground truth is a CSV grid of integer labels, one line per image row and no
//! header line. Label `0` marks an unlabeled pixel. Lines starting with `#`
//! are treated as comments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The only payload encoding understood by [`load_cube`].
pub const DTYPE_U16LE: &str = "u16le";

/// A hyperspectral cube indexed `(band, row, col)`, stored band-sequential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperCube {
    n_bands: usize,
    n_rows: usize,
    n_cols: usize,
    values: Vec<u16>,
}

impl HyperCube {
    pub fn new(n_bands: usize, n_rows: usize, n_cols: usize, values: Vec<u16>) -> Result<Self> {
        if n_bands == 0 || n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidDimensions { bands: n_bands, rows: n_rows, cols: n_cols });
        }
        let expected = n_bands * n_rows * n_cols;
        if values.len() != expected {
            return Err(Error::SizeMismatch { expected, actual: values.len() });
        }
        Ok(HyperCube { n_bands, n_rows, n_cols, values })
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_pixels(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// All values of one band in row-major pixel order.
    pub fn band(&self, band: usize) -> Result<&[u16]> {
        self.check_band(band)?;
        let n = self.n_pixels();
        Ok(&self.values[band * n..(band + 1) * n])
    }

    pub fn value(&self, band: usize, row: usize, col: usize) -> u16 {
        self.values[band * self.n_pixels() + row * self.n_cols + col]
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub(crate) fn check_band(&self, band: usize) -> Result<()> {
        if band >= self.n_bands {
            return Err(Error::BandOutOfRange { band, n_bands: self.n_bands });
        }
        Ok(())
    }

    /// Values of `band` at the given flat pixel indices.
    pub fn band_values_at(&self, band: usize, pixels: &[usize]) -> Result<Vec<f64>> {
        let data = self.band(band)?;
        Ok(pixels.iter().map(|&p| f64::from(data[p])).collect())
    }

    pub(crate) fn check_aligned(&self, gt: &GroundTruth) -> Result<()> {
        if gt.n_rows() != self.n_rows || gt.n_cols() != self.n_cols {
            return Err(Error::DimensionMismatch {
                rows: self.n_rows,
                cols: self.n_cols,
                actual_rows: gt.n_rows(),
                actual_cols: gt.n_cols(),
            });
        }
        Ok(())
    }
}

/// JSON sidecar describing a raw cube payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeHeader {
    pub bands: i64,
    pub rows: i64,
    pub cols: i64,
    pub dtype: String,
    /// Payload path, relative to the header's directory.
    pub data: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

pub fn load_cube(header_path: impl AsRef<Path>) -> Result<HyperCube> {
    let header_path = header_path.as_ref();
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: CubeHeader =
        serde_json::from_str(&text).map_err(|source| Error::Header { path: header_path.to_path_buf(), source })?;
    if header.dtype != DTYPE_U16LE {
        return Err(Error::Format(format!(
            "{}: unsupported dtype {:?}, expected {:?}",
            header_path.display(),
            header.dtype,
            DTYPE_U16LE
        )));
    }
    if header.bands <= 0 || header.rows <= 0 || header.cols <= 0 {
        return Err(Error::InvalidDimensions {
            bands: header.bands.max(0) as usize,
            rows: header.rows.max(0) as usize,
            cols: header.cols.max(0) as usize,
        });
    }
    let (bands, rows, cols) = (header.bands as usize, header.rows as usize, header.cols as usize);

    let data_path = payload_path(header_path, &header.data);
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    if bytes.len() % 2 != 0 {
        return Err(Error::Format(format!(
            "{}: payload has an odd number of bytes ({})",
            data_path.display(),
            bytes.len()
        )));
    }
    let values: Vec<u16> = bytes.chunks_exact(2).map(|b| u16::from_le_bytes([b[0], b[1]])).collect();
    HyperCube::new(bands, rows, cols, values)
}

fn payload_path(header_path: &Path, data: &str) -> PathBuf {
    let data = Path::new(data);
    if data.is_absolute() {
        return data.to_path_buf();
    }
    header_path.parent().map(|dir| dir.join(data)).unwrap_or_else(|| data.to_path_buf())
}

/// Writes `cube` as a header at `header_path` plus a `.raw` payload beside it.
pub fn write_cube(
    header_path: impl AsRef<Path>,
    cube: &HyperCube,
    provenance: Option<serde_json::Value>,
) -> Result<()> {
    let header_path = header_path.as_ref();
    let data_name = format!("{}.raw", header_path.file_stem().and_then(|s| s.to_str()).unwrap_or("cube"));
    let header = CubeHeader {
        bands: cube.n_bands as i64,
        rows: cube.n_rows as i64,
        cols: cube.n_cols as i64,
        dtype: DTYPE_U16LE.to_string(),
        data: data_name.clone(),
        provenance,
    };

    let mut payload = Vec::with_capacity(cube.values.len() * 2);
    for v in &cube.values {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    let data_path = payload_path(header_path, &data_name);
    fs::write(&data_path, payload).map_err(|e| Error::io(&data_path, e))?;

    let mut json =
        serde_json::to_string_pretty(&header).map_err(|e| Error::Internal(format!("header serialization: {e}")))?;
    json.push('\n');
    fs::write(header_path, json).map_err(|e| Error::io(header_path, e))
}

/// Per-pixel class labels aligned with a cube. Label 0 is "unlabeled".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    n_rows: usize,
    n_cols: usize,
    labels: Vec<u16>,
    n_classes: usize,
    labeled: Vec<usize>,
}

impl GroundTruth {
    pub fn new(n_rows: usize, n_cols: usize, labels: Vec<u16>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidDimensions { bands: 1, rows: n_rows, cols: n_cols });
        }
        if labels.len() != n_rows * n_cols {
            return Err(Error::SizeMismatch { expected: n_rows * n_cols, actual: labels.len() });
        }
        let labeled: Vec<usize> = labels.iter().enumerate().filter(|(_, &l)| l > 0).map(|(i, _)| i).collect();
        if labeled.is_empty() {
            return Err(Error::NoLabeledPixels);
        }
        let n_classes = labels.iter().copied().max().unwrap_or(0) as usize;
        Ok(GroundTruth { n_rows, n_cols, labels, n_classes, labeled })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Largest label present; classes are `1..=n_classes`.
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn label(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.n_cols + col]
    }

    /// Flat row-major indices of pixels with a non-zero label.
    pub fn labeled_pixels(&self) -> &[usize] {
        &self.labeled
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled.len()
    }

    /// Labels of the labeled pixels, in [`labeled_pixels`](Self::labeled_pixels) order.
    pub fn labeled_labels(&self) -> Vec<u16> {
        self.labeled.iter().map(|&p| self.labels[p]).collect()
    }

    /// Number of labeled pixels per class, indexed by `label - 1`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &p in &self.labeled {
            counts[self.labels[p] as usize - 1] += 1;
        }
        counts
    }

    /// Same map with labels replaced; unlabeled pixels must stay unlabeled.
    pub fn with_labeled_labels(&self, labels: &[u16]) -> Result<Self> {
        if labels.len() != self.labeled.len() {
            return Err(Error::LengthMismatch(self.labeled.len(), labels.len()));
        }
        if labels.contains(&0) {
            return Err(Error::InvalidConfig("relabeling cannot assign label 0 to a labeled pixel".into()));
        }
        let mut out = self.labels.clone();
        for (&p, &l) in self.labeled.iter().zip(labels) {
            out[p] = l;
        }
        GroundTruth::new(self.n_rows, self.n_cols, out)
    }
}

pub fn load_ground_truth(path: impl AsRef<Path>, n_rows: usize, n_cols: usize) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let grid = parse_label_grid(&text, path)?;
    let actual_rows = grid.len();
    let actual_cols = grid.first().map_or(0, Vec::len);
    if actual_rows != n_rows || grid.iter().any(|r| r.len() != n_cols) {
        return Err(Error::DimensionMismatch { rows: n_rows, cols: n_cols, actual_rows, actual_cols });
    }
    let mut labels = Vec::with_capacity(n_rows * n_cols);
    for (row, line) in grid.iter().enumerate() {
        for (col, &v) in line.iter().enumerate() {
            if v < 0 {
                return Err(Error::NegativeLabel { label: v, row, col });
            }
            let label = u16::try_from(v)
                .map_err(|_| Error::Format(format!("{}: label {v} at ({row},{col}) exceeds 65535", path.display())))?;
            labels.push(label);
        }
    }
    GroundTruth::new(n_rows, n_cols, labels)
}

fn parse_label_grid(text: &str, path: &Path) -> Result<Vec<Vec<i64>>> {
    let mut grid = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<i64>().map_err(|_| {
                    Error::Format(format!("{}:{}: {:?} is not an integer", path.display(), lineno + 1, f.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        grid.push(row);
    }
    Ok(grid)
}

/// Writes a label grid as CSV. Each `comments` entry becomes a leading `# ` line.
pub fn write_label_grid(
    path: impl AsRef<Path>,
    n_rows: usize,
    n_cols: usize,
    labels: &[u16],
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    if labels.len() != n_rows * n_cols {
        return Err(Error::SizeMismatch { expected: n_rows * n_cols, actual: labels.len() });
    }
    let mut out = String::with_capacity(labels.len() * 3);
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    for row in labels.chunks(n_cols) {
        let line: Vec<String> = row.iter().map(u16::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_ground_truth(path: impl AsRef<Path>, gt: &GroundTruth, comments: &[String]) -> Result<()> {
    write_label_grid(path, gt.n_rows, gt.n_cols, &gt.labels, comments)
}

/// A discrete random variable realized over the labeled pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteSeries {
    bins: Vec<u32>,
    n_bins: usize,
}

impl DiscreteSeries {
    pub fn new(bins: Vec<u32>, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::InvalidConfig("series needs at least one bin".into()));
        }
        if let Some(&b) = bins.iter().find(|&&b| b as usize >= n_bins) {
            return Err(Error::InvalidConfig(format!("bin index {b} out of range for {n_bins} bins")));
        }
        Ok(DiscreteSeries { bins, n_bins })
    }

    pub fn bins(&self) -> &[u32] {
        &self.bins
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantStrategy {
    /// One `[lo, hi]` range shared by every band, taken over all labeled pixels.
    GlobalMinMax,
    /// Each band (and each ground-truth estimate) uses its own `[lo, hi]`.
    PerBandMinMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizationConfig {
    pub n_bins: usize,
    pub strategy: QuantStrategy,
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        QuantizationConfig { n_bins: 256, strategy: QuantStrategy::PerBandMinMax }
    }
}

impl QuantizationConfig {
    pub fn with_bins(n_bins: usize) -> Self {
        QuantizationConfig { n_bins, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::InvalidConfig(format!("n_bins must be at least 2, got {}", self.n_bins)));
        }
        if self.n_bins > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!("n_bins {} too large", self.n_bins)));
        }
        Ok(())
    }
}

/// Bins `values` with `floor((v - lo) * n_bins / (hi - lo + 1))`.
///
/// A constant input (`lo == hi`) lands entirely in bin 0.
pub fn quantize_values(values: &[f64], lo: f64, hi: f64, n_bins: usize) -> Vec<u32> {
    if hi <= lo {
        return vec![0; values.len()];
    }
    let scale = n_bins as f64 / (hi - lo + 1.0);
    let top = (n_bins - 1) as f64;
    values.iter().map(|&v| ((v - lo) * scale).floor().clamp(0.0, top) as u32).collect()
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Turns bands and ground-truth estimates into [`DiscreteSeries`] over the
/// labeled pixels of a ground-truth map.
///
/// Ranges are computed from labeled pixels only. Under
/// [`QuantStrategy::GlobalMinMax`] the shared range is computed once here.
#[derive(Debug, Clone)]
pub struct Quantizer {
    cfg: QuantizationConfig,
    pixels: Vec<usize>,
    global: Option<(f64, f64)>,
}

impl Quantizer {
    pub fn new(cube: &HyperCube, gt: &GroundTruth, cfg: QuantizationConfig) -> Result<Self> {
        cfg.validate()?;
        cube.check_aligned(gt)?;
        let pixels = gt.labeled_pixels().to_vec();
        let global = match cfg.strategy {
            QuantStrategy::PerBandMinMax => None,
            QuantStrategy::GlobalMinMax => {
                let n = cube.n_pixels();
                Some(min_max(cube.values().chunks(n).flat_map(|band| pixels.iter().map(move |&p| f64::from(band[p])))))
            }
        };
        Ok(Quantizer { cfg, pixels, global })
    }

    pub fn config(&self) -> &QuantizationConfig {
        &self.cfg
    }

    pub fn pixels(&self) -> &[usize] {
        &self.pixels
    }

    pub fn band(&self, cube: &HyperCube, band: usize) -> Result<DiscreteSeries> {
        let values = cube.band_values_at(band, &self.pixels)?;
        Ok(self.values(&values))
    }

    /// Quantizes real values already restricted to the labeled pixels.
    pub fn values(&self, values: &[f64]) -> DiscreteSeries {
        let (lo, hi) = min_max(values.iter().copied());
        let bins = if hi <= lo {
            vec![0; values.len()]
        } else {
            let (lo, hi) = self.global.unwrap_or((lo, hi));
            quantize_values(values, lo, hi, self.cfg.n_bins)
        };
        DiscreteSeries { bins, n_bins: self.cfg.n_bins }
    }
}

/// Quantizes one band over the labeled pixels of `mask`.
pub fn quantize_band(
    cube: &HyperCube,
    band: usize,
    mask: &GroundTruth,
    cfg: &QuantizationConfig,
) -> Result<DiscreteSeries> {
    cube.check_band(band)?;
    Quantizer::new(cube, mask, *cfg)?.band(cube, band)
}

/// Class labels of the labeled pixels, remapped from `1..=C` to `0..C`.
pub fn labels_series(gt: &GroundTruth) -> DiscreteSeries {
    DiscreteSeries {
        bins: gt.labeled_pixels().iter().map(|&p| u32::from(gt.labels[p]) - 1).collect(),
        n_bins: gt.n_classes,
    }
}
