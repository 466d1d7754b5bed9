use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use hyperband_core::cube_io::{write_cube, write_ground_truth, write_label_grid};
use hyperband_core::eval::sweep_csv;
use hyperband_core::format::sig6;
use hyperband_core::selectors::{label_entropy, read_trace_bands};
use hyperband_core::synthgen::generate;
use hyperband_core::{
    accuracy_sweep, classification_map, evaluate, load_cube, load_ground_truth, stratified_split, train_classifier,
    Error, GroundTruth, HyperCube, Result, SelectionContext, SelectorConfig, SweepConfig,
};

use crate::config::{BandSource, CommandConfig, DataPaths, RunConfig};

fn load(data: &DataPaths) -> Result<(HyperCube, GroundTruth)> {
    let cube = load_cube(&data.cube)?;
    let gt = load_ground_truth(&data.gt, cube.n_rows(), cube.n_cols())?;
    Ok((cube, gt))
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    Ok(path)
}

fn check_bands(bands: &[usize], n_bands: usize) -> Result<()> {
    if bands.is_empty() {
        return Err(Error::EmptySubset);
    }
    match bands.iter().find(|&&b| b >= n_bands) {
        Some(&band) => Err(Error::BandOutOfRange { band, n_bands }),
        None => Ok(()),
    }
}

/// Executes a validated configuration and returns the artifacts written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = cfg.out.as_path();
    fs::create_dir_all(out).map_err(|e| Error::Io { path: out.to_path_buf(), source: e })?;
    let comments = cfg.comments();

    match &cfg.command {
        CommandConfig::Profile { data, quantization } => {
            let (cube, gt) = load(data)?;
            let ctx = SelectionContext::new(&cube, &gt, *quantization)?;
            let mut csv = String::new();
            for c in &comments {
                let _ = writeln!(csv, "# {c}");
            }
            let _ = writeln!(csv, "# label_entropy={}", sig6(label_entropy(&gt)?));
            csv.push_str("band_index,mutual_information\n");
            for (b, mi) in ctx.mi_profile().iter().enumerate() {
                let _ = writeln!(csv, "{b},{}", sig6(*mi));
            }
            Ok(vec![write(out.join("mi_profile.csv"), &csv)?])
        }

        CommandConfig::Select { data, quantization, selector, k, threshold } => {
            let (cube, gt) = load(data)?;
            let selector_cfg = SelectorConfig {
                kind: *selector,
                k: *k,
                threshold: *threshold,
                quantization: *quantization,
                seed: cfg.seed,
            };
            selector_cfg.validate(cube.n_bands())?;
            let trace = SelectionContext::new(&cube, &gt, *quantization)?.run(&selector_cfg)?;
            let path = out.join(format!("selection_{}.csv", selector.as_str()));
            trace.write_csv(&path, &comments)?;
            Ok(vec![path])
        }

        CommandConfig::Evaluate { data, bands, classifier } => {
            let (cube, gt) = load(data)?;
            let subset = match bands {
                BandSource::List(list) => list.clone(),
                BandSource::Trace(path) => read_trace_bands(path)?,
            };
            check_bands(&subset, cube.n_bands())?;
            let split = stratified_split(&gt, cfg.seed)?;
            let model = train_classifier(&cube, &subset, &split, classifier)?;
            let report = evaluate(&model, &cube, &subset, &split)?;
            report.write(out, "eval_report", &comments, Some(cfg.provenance()))?;
            Ok(vec![out.join("eval_report.csv"), out.join("eval_report.json")])
        }

        CommandConfig::Sweep { data, quantization, selector, ks, threshold, map_k, classifier } => {
            let (cube, gt) = load(data)?;
            let k_max = *ks.last().expect("validated non-empty");
            SelectorConfig {
                kind: *selector,
                k: k_max,
                threshold: *threshold,
                quantization: *quantization,
                seed: cfg.seed,
            }
            .validate(cube.n_bands())?;
            let sweep_cfg = SweepConfig {
                selector: *selector,
                threshold: *threshold,
                quantization: *quantization,
                classifier: *classifier,
                seed: cfg.seed,
            };
            let points = accuracy_sweep(&cube, &gt, ks, &sweep_cfg)?;
            let curve = write(
                out.join(format!("sweep_{}.csv", selector.as_str())),
                &sweep_csv(&points, *selector, cfg.seed, &comments),
            )?;

            let point = points
                .iter()
                .find(|p| p.k == *map_k)
                .ok_or_else(|| Error::Internal(format!("no sweep point for k={map_k}")))?;
            let subset = &point.trace.selected;
            let split = stratified_split(&gt, cfg.seed)?;
            let model = train_classifier(&cube, subset, &split, classifier)?;
            let map = classification_map(&model, &cube, subset, &gt)?;
            let mut map_comments = comments.clone();
            map_comments.push(format!("k={map_k}"));
            map_comments.push(format!("bands={}", join(subset)));
            map_comments.push(format!("overall_accuracy={}", sig6(point.report.overall_accuracy)));
            let map_path = out.join(format!("classification_map_k{map_k}.csv"));
            write_label_grid(&map_path, cube.n_rows(), cube.n_cols(), &map, &map_comments)?;
            Ok(vec![curve, map_path])
        }

        CommandConfig::Synth { spec } => {
            let data = generate(spec)?;
            let cube_path = out.join("cube.json");
            write_cube(&cube_path, &data.cube, Some(cfg.provenance()))?;
            let gt_path = out.join("gt.csv");
            write_ground_truth(&gt_path, &data.gt, &comments)?;
            let expected = serde_json::json!({
                "expected": data.expected,
                "spec": spec,
                "provenance": cfg.provenance(),
            });
            let mut text = serde_json::to_string_pretty(&expected)
                .map_err(|e| Error::Internal(format!("expected-roles serialization: {e}")))?;
            text.push('\n');
            let expected_path = write(out.join("expected.json"), &text)?;
            Ok(vec![cube_path, out.join("cube.raw"), gt_path, expected_path])
        }
    }
}

fn join(bands: &[usize]) -> String {
    bands.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}
