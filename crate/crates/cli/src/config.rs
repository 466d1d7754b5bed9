//! Validated run configuration. Everything here is pure except reading a
//! synthetic spec file, so flag combinations can be checked without data.

use std::path::PathBuf;

use hyperband_core::synthgen::SynthSpec;
use hyperband_core::{
    ClassifierKind, ClassifierParams, Error, QuantStrategy, QuantizationConfig, Result, SelectorKind, SvmParams,
};
use serde::Serialize;

use crate::args::{ClassifierArg, ClassifierArgs, Cli, Command, KernelArg, PresetArg, QuantArg, QuantArgs, SynthArgs};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataPaths {
    pub cube: PathBuf,
    pub gt: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandSource {
    List(Vec<usize>),
    Trace(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandConfig {
    Profile {
        data: DataPaths,
        quantization: QuantizationConfig,
    },
    Select {
        data: DataPaths,
        quantization: QuantizationConfig,
        selector: SelectorKind,
        k: usize,
        threshold: Option<f64>,
    },
    Evaluate {
        data: DataPaths,
        bands: BandSource,
        classifier: ClassifierParams,
    },
    Sweep {
        data: DataPaths,
        quantization: QuantizationConfig,
        selector: SelectorKind,
        ks: Vec<usize>,
        threshold: Option<f64>,
        map_k: usize,
        classifier: ClassifierParams,
    },
    Synth {
        spec: SynthSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: CommandConfig,
    pub seed: u64,
    /// Where artifacts go; not part of provenance.
    #[serde(skip)]
    pub out: PathBuf,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn quantization(q: &QuantArgs) -> Result<QuantizationConfig> {
    let cfg = QuantizationConfig {
        n_bins: q.bins,
        strategy: match q.quant {
            QuantArg::PerBand => QuantStrategy::PerBandMinMax,
            QuantArg::Global => QuantStrategy::GlobalMinMax,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn selector(name: &str, th: Option<f64>) -> Result<(SelectorKind, Option<f64>)> {
    let kind: SelectorKind = name.parse()?;
    match (kind, th) {
        (SelectorKind::MiTh, None) => Err(invalid("--selector mi_th requires --th")),
        (SelectorKind::MiTh, Some(t)) if t.is_nan() => Err(invalid("--th must be a number")),
        (SelectorKind::Ig | SelectorKind::Jmi, Some(_)) => {
            Err(invalid(format!("--th only applies to --selector mi_th, not {}", kind.as_str())))
        }
        _ => Ok((kind, th)),
    }
}

fn classifier(c: &ClassifierArgs) -> Result<ClassifierParams> {
    let mut params = ClassifierParams::default();
    match c.classifier {
        ClassifierArg::Svm => {
            if c.neighbors.is_some() {
                return Err(invalid("--neighbors only applies to --classifier knn"));
            }
            let defaults = SvmParams::default();
            params.svm = SvmParams {
                c: c.svm_c.unwrap_or(defaults.c),
                gamma: c.svm_gamma,
                linear: c.svm_kernel == Some(KernelArg::Linear),
                tol: defaults.tol,
            };
            if params.svm.linear && params.svm.gamma.is_some() {
                return Err(invalid("--svm-gamma does not apply to the linear kernel"));
            }
            params.svm.validate()?;
        }
        ClassifierArg::Knn => {
            if c.svm_c.is_some() || c.svm_gamma.is_some() || c.svm_kernel.is_some() {
                return Err(invalid("--svm-* flags only apply to --classifier svm"));
            }
            params.kind = ClassifierKind::Knn;
            params.neighbors = c.neighbors.unwrap_or(params.neighbors);
            if params.neighbors == 0 {
                return Err(invalid("--neighbors must be at least 1"));
            }
        }
    }
    Ok(params)
}

fn synth_spec(s: &SynthArgs, seed: u64) -> Result<SynthSpec> {
    let sizes = [s.rows.is_some(), s.cols.is_some(), s.classes.is_some(), s.n_bands.is_some()];
    let mixed = s.preset == Some(PresetArg::Mixed);
    if !mixed && sizes.iter().any(|&given| given) {
        return Err(invalid("--rows/--cols/--classes/--n-bands only apply to --preset mixed"));
    }
    let spec = match (s.preset, &s.spec) {
        (Some(_), Some(_)) => return Err(invalid("give either --preset or --spec, not both")),
        (None, None) => return Err(invalid("synth needs --preset or --spec")),
        (Some(PresetArg::Duplicate), None) => SynthSpec::duplicate(seed),
        (Some(PresetArg::Redundancy), None) => SynthSpec::redundancy(seed),
        (Some(PresetArg::Xor), None) => SynthSpec::xor(seed),
        (Some(PresetArg::Mixed), None) => SynthSpec::mixed(
            s.rows.unwrap_or(100),
            s.cols.unwrap_or(100),
            s.classes.unwrap_or(4),
            s.n_bands.unwrap_or(30),
            seed,
        ),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            let spec: SynthSpec =
                serde_json::from_str(&text).map_err(|e| Error::Header { path: path.clone(), source: e })?;
            SynthSpec { seed, ..spec }
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn check_k(k: usize, flag: &str) -> Result<()> {
    if k == 0 {
        return Err(invalid(format!("{flag} must be at least 1")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (command, common) = match cli.command {
            Command::Profile(a) => (
                CommandConfig::Profile {
                    data: DataPaths { cube: a.data.cube, gt: a.data.gt },
                    quantization: quantization(&a.quant)?,
                },
                a.common,
            ),
            Command::Select(a) => {
                let (selector, threshold) = selector(&a.selector, a.th)?;
                check_k(a.k, "--k")?;
                (
                    CommandConfig::Select {
                        data: DataPaths { cube: a.data.cube, gt: a.data.gt },
                        quantization: quantization(&a.quant)?,
                        selector,
                        k: a.k,
                        threshold,
                    },
                    a.common,
                )
            }
            Command::Evaluate(a) => {
                let bands = match (a.bands, a.trace) {
                    (Some(_), Some(_)) => return Err(invalid("give either --bands or --trace, not both")),
                    (None, None) => return Err(invalid("evaluate needs --bands or --trace")),
                    (Some(list), None) => {
                        let mut sorted = list.clone();
                        sorted.sort_unstable();
                        sorted.dedup();
                        if sorted.len() != list.len() {
                            return Err(invalid("--bands lists a band twice"));
                        }
                        BandSource::List(list)
                    }
                    (None, Some(path)) => BandSource::Trace(path),
                };
                (
                    CommandConfig::Evaluate {
                        data: DataPaths { cube: a.data.cube, gt: a.data.gt },
                        bands,
                        classifier: classifier(&a.classifier)?,
                    },
                    a.common,
                )
            }
            Command::Sweep(a) => {
                let (selector, threshold) = selector(&a.selector, a.th)?;
                if a.ks.is_empty() {
                    return Err(invalid("--ks is empty"));
                }
                for &k in &a.ks {
                    check_k(k, "every --ks entry")?;
                }
                if a.ks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("--ks must be strictly ascending"));
                }
                let map_k = a.map_k.unwrap_or(*a.ks.last().expect("non-empty"));
                if !a.ks.contains(&map_k) {
                    return Err(invalid(format!("--map-k {map_k} is not one of --ks")));
                }
                (
                    CommandConfig::Sweep {
                        data: DataPaths { cube: a.data.cube, gt: a.data.gt },
                        quantization: quantization(&a.quant)?,
                        selector,
                        ks: a.ks,
                        threshold,
                        map_k,
                        classifier: classifier(&a.classifier)?,
                    },
                    a.common,
                )
            }
            Command::Synth(a) => (CommandConfig::Synth { spec: synth_spec(&a, a.common.seed)? }, a.common),
        };
        Ok(RunConfig { command, seed: common.seed, out: common.out })
    }

    pub fn command_name(&self) -> &'static str {
        match self.command {
            CommandConfig::Profile { .. } => "profile",
            CommandConfig::Select { .. } => "select",
            CommandConfig::Evaluate { .. } => "evaluate",
            CommandConfig::Sweep { .. } => "sweep",
            CommandConfig::Synth { .. } => "synth",
        }
    }

    /// Provenance block embedded in JSON artifacts.
    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "hyperband",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self,
        })
    }

    /// Provenance as comment lines for CSV artifacts.
    pub fn comments(&self) -> Vec<String> {
        vec![
            format!("hyperband {} {}", env!("CARGO_PKG_VERSION"), self.command_name()),
            format!("seed={}", self.seed),
            format!("config={}", serde_json::to_string(self).expect("config serializes")),
        ]
    }
}
