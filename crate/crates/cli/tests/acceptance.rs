//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Criteria 5 and 6 need the Indian Pines scene converted to the cube format
//! (see `scripts/convert_indian_pines.py`). Point `HYPERBAND_INDIAN_PINES` at
//! the directory holding `indian_pines.json` and `indian_pines_gt.csv`; the
//! default is `data/indian_pines` under the workspace root.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use hyperband_core::synthgen::{generate, BandPlan, SynthSpec};
use hyperband_core::{
    accuracy_sweep, conditional_mi, entropy, joint_entropy, joint_mi, load_cube, load_ground_truth, mutual_information,
    ClassifierParams, GroundTruth, HyperCube, QuantizationConfig, SelectionContext, SelectorKind, StopReason,
    SweepConfig,
};
use rand::Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, log: &mut String, line: impl AsRef<str>) -> bool {
    let _ = writeln!(log, "    [{}] {}", if ok { "ok" } else { "FAILED" }, line.as_ref());
    ok
}

fn finish(all_ok: bool, log: String) -> Outcome {
    if all_ok {
        Ok(log)
    } else {
        Err(log)
    }
}

fn c1_oracle() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let len = r.random_range(1..=100);
        let a = random_series_upto(&mut r, len, 4);
        let b = random_series_upto(&mut r, len, 4);
        let c = random_series_upto(&mut r, len, 4);
        let diffs = [
            entropy(&a).unwrap() - oracle_entropy(&a),
            mutual_information(&a, &c).unwrap() - oracle_mi(&a, &c),
            conditional_mi(&a, &c, &b).unwrap() - oracle_cmi(&a, &c, &b),
            joint_mi(&a, &b, &c).unwrap() - oracle_jmi(&a, &b, &c),
        ];
        worst = diffs.iter().fold(worst, |w, d| w.max(d.abs()));
    }
    let mut log = String::new();
    let ok = ensure(worst <= 1e-12, &mut log, format!("max |estimator - oracle| = {worst:.3e} (limit 1e-12)"));
    finish(ok, log)
}

fn c2_identities() -> Outcome {
    let mut r = rng(2);
    let mut worst = BTreeMap::<&str, f64>::new();
    let mut note = |name, v: f64| {
        let w = worst.entry(name).or_insert(0.0);
        *w = w.max(v);
    };
    for _ in 0..1000 {
        let len = r.random_range(1..=500);
        let a = random_series_upto(&mut r, len, 16);
        let b = random_series_upto(&mut r, len, 16);
        let c = random_series_upto(&mut r, len, 8);
        let (ha, hb, hc) = (entropy(&a).unwrap(), entropy(&b).unwrap(), entropy(&c).unwrap());
        let hab = joint_entropy(&[&a, &b]).unwrap();
        let mi = mutual_information(&a, &b).unwrap();
        let mi_bc = mutual_information(&b, &c).unwrap();
        let jmi = joint_mi(&a, &b, &c).unwrap();
        let cmi = conditional_mi(&a, &c, &b).unwrap();
        note("I = H(x)+H(y)-H(x,y)", (mi - (ha + hb - hab)).abs());
        note("I = H(x)-H(x|y)", (mi - (ha - (hab - hb))).abs());
        note("chain rule", (jmi - (mi_bc + cmi)).abs());
        note("symmetry", (mi - mutual_information(&b, &a).unwrap()).abs());
        note("JMI >= I(b;c) shortfall", (mi_bc - jmi).max(0.0));
        note("I <= min H excess", (mi - ha.min(hb)).max(0.0));
        note("JMI <= H(c) excess", (jmi - hc).max(0.0));
        note("negativity", (-mi).max(-jmi).max(-cmi).max(0.0));
    }
    let mut log = String::new();
    let mut ok = true;
    for (name, w) in worst {
        ok &= ensure(w <= 1e-10, &mut log, format!("{name}: worst {w:.3e}"));
    }
    finish(ok, log)
}

const XOR_SEED: u64 = 1;

fn c3_xor() -> Outcome {
    let spec = SynthSpec::xor(XOR_SEED);
    let data = generate(&spec).unwrap();
    let ctx = SelectionContext::new(&data.cube, &data.gt, QuantizationConfig::default()).unwrap();
    let (a, b, gt) = (ctx.band_series(0), ctx.band_series(1), ctx.labels());
    let h = entropy(gt).unwrap();
    let mi_a = mutual_information(a, gt).unwrap();
    let mi_b = mutual_information(b, gt).unwrap();
    let pair = joint_mi(a, b, gt).unwrap();
    let jmi = ctx.select_jmi(2).unwrap();
    let ig = ctx.select_ig(ctx.n_bands()).unwrap();
    let rank = |band: usize| ig.selected.iter().position(|&x| x == band).unwrap();
    let weak: Vec<usize> = spec
        .bands
        .iter()
        .enumerate()
        .filter(|(_, p)| matches!(p, BandPlan::Informative { .. }))
        .map(|(i, _)| i)
        .collect();

    let mut log = String::new();
    let _ = writeln!(log, "    MI profile {:?}", ctx.mi_profile().iter().map(|v| round4(*v)).collect::<Vec<_>>());
    let mut ok =
        ensure(mi_a < 0.05 && mi_b < 0.05, &mut log, format!("I(a;GT) = {mi_a:.3e}, I(b;GT) = {mi_b:.3e} (< 0.05)"));
    ok &= ensure(pair > 0.9 * h, &mut log, format!("JMI(a,b;GT) = {pair:.6} > 0.9 H(GT) = {:.6}", 0.9 * h));
    ok &= ensure(
        jmi.selected.contains(&0) && jmi.selected.contains(&1),
        &mut log,
        format!("select_jmi first 2 picks {:?} contain a=0 and b=1", jmi.selected),
    );
    ok &= ensure(
        !weak.is_empty() && weak.iter().all(|&w| rank(w) < rank(0) && rank(w) < rank(1)),
        &mut log,
        format!("select_ig order {:?} ranks weak band(s) {weak:?} above a and b", ig.selected),
    );
    let again = SelectionContext::new(&data.cube, &data.gt, QuantizationConfig::default()).unwrap();
    ok &= ensure(
        again.select_jmi(2).unwrap() == jmi && again.select_ig(ctx.n_bands()).unwrap() == ig,
        &mut log,
        "repeat run identical",
    );
    finish(ok, log)
}

fn c4_redundancy() -> Outcome {
    let data = generate(&SynthSpec::redundancy(0)).unwrap();
    let dup = data.expected.redundant[0];
    let ctx = SelectionContext::new(&data.cube, &data.gt, QuantizationConfig::default()).unwrap();
    let jmi = ctx.select_jmi(3).unwrap();
    let ig = ctx.select_ig(2).unwrap();
    let mut log = String::new();
    let mut ok = ensure(
        !jmi.selected.contains(&dup),
        &mut log,
        format!("select_jmi first 3 picks {:?} exclude duplicate band {dup}", jmi.selected),
    );
    ok &= ensure(ig.selected[1] == dup, &mut log, format!("select_ig picks {:?}, duplicate second", ig.selected));
    let again = SelectionContext::new(&data.cube, &data.gt, QuantizationConfig::default()).unwrap();
    ok &= ensure(
        again.select_jmi(3).unwrap() == jmi && again.select_ig(2).unwrap() == ig,
        &mut log,
        "repeat run identical",
    );
    finish(ok, log)
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn indian_pines() -> Result<(HyperCube, GroundTruth), String> {
    let dir = std::env::var_os("HYPERBAND_INDIAN_PINES")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/indian_pines"));
    let header = dir.join("indian_pines.json");
    if !header.exists() {
        return Err(format!(
            "    [FAILED] Indian Pines not found at {} (set HYPERBAND_INDIAN_PINES; see scripts/convert_indian_pines.py)\n",
            dir.display()
        ));
    }
    let cube = load_cube(&header).map_err(|e| format!("    [FAILED] {e}\n"))?;
    let gt = load_ground_truth(dir.join("indian_pines_gt.csv"), cube.n_rows(), cube.n_cols())
        .map_err(|e| format!("    [FAILED] {e}\n"))?;
    Ok((cube, gt))
}

fn c5_threshold() -> Outcome {
    let (cube, gt) = indian_pines()?;
    let ctx = SelectionContext::new(&cube, &gt, QuantizationConfig::default()).unwrap();
    let trace = ctx.select_mi_threshold(cube.n_bands(), 0.0).unwrap();
    let mut log = String::new();
    let ok = ensure(
        trace.selected.len() <= 5 && trace.stop_reason == StopReason::Exhausted,
        &mut log,
        format!(
            "Th = 0 retains {} bands {:?} (limit 5), stop_reason = {}",
            trace.selected.len(),
            trace.selected,
            trace.stop_reason.as_str()
        ),
    );
    finish(ok, log)
}

const KS: [usize; 8] = [10, 20, 30, 40, 50, 60, 70, 80];
const SEEDS: [u64; 3] = [0, 1, 2];

fn mean_curve(cube: &HyperCube, gt: &GroundTruth, selector: SelectorKind) -> Vec<f64> {
    let mut sum = vec![0.0; KS.len()];
    for seed in SEEDS {
        let cfg = SweepConfig {
            selector,
            threshold: None,
            quantization: QuantizationConfig::default(),
            classifier: ClassifierParams::default(),
            seed,
        };
        for (i, p) in accuracy_sweep(cube, gt, &KS, &cfg).unwrap().iter().enumerate() {
            sum[i] += p.report.overall_accuracy;
        }
    }
    sum.iter().map(|s| s / SEEDS.len() as f64).collect()
}

fn c6_reproduction() -> Outcome {
    let (cube, gt) = indian_pines()?;
    let jmi = mean_curve(&cube, &gt, SelectorKind::Jmi);
    let ig = mean_curve(&cube, &gt, SelectorKind::Ig);
    let at = |curve: &[f64], k: usize| curve[KS.iter().position(|&x| x == k).unwrap()];

    let mut log = String::new();
    let _ = writeln!(log, "    k    JMI      IG     (mean of seeds {SEEDS:?})");
    for (i, k) in KS.iter().enumerate() {
        let _ = writeln!(log, "    {k:<4} {:>6.2}  {:>6.2}", jmi[i], ig[i]);
    }
    let mut ok = ensure(
        (at(&jmi, 20) - 86.48).abs() <= 4.0,
        &mut log,
        format!("JMI k=20 {:.2} within 4 of 86.48", at(&jmi, 20)),
    );
    ok &= ensure((at(&ig, 20) - 63.08).abs() <= 5.0, &mut log, format!("IG k=20 {:.2} within 5 of 63.08", at(&ig, 20)));
    ok &= ensure(
        (at(&jmi, 80) - 91.80).abs() <= 4.0,
        &mut log,
        format!("JMI k=80 {:.2} within 4 of 91.80", at(&jmi, 80)),
    );
    ok &= ensure(
        at(&jmi, 80) - at(&ig, 80) >= 2.0,
        &mut log,
        format!("JMI k=80 exceeds IG k=80 ({:.2}) by >= 2 points", at(&ig, 80)),
    );
    ok &= ensure(jmi.iter().zip(&ig).all(|(j, i)| j >= i), &mut log, "JMI >= IG at every k");
    finish(ok, log)
}

fn c7_greedy_oracle() -> Outcome {
    let mut r = rng(7);
    let mut cubes = 0;
    let mut log = String::new();
    for seed in 0..150u64 {
        let n_bands = r.random_range(1..=6);
        let (cube, gt) = if seed % 2 == 0 {
            let spec =
                SynthSpec::mixed(r.random_range(5..=40), r.random_range(5..=40), r.random_range(1..=6), n_bands, seed);
            let d = generate(&spec).unwrap();
            (d.cube, d.gt)
        } else {
            // few distinct values, so ties are frequent
            let (rows, cols) = (r.random_range(3..=20), r.random_range(3..=20));
            let levels = r.random_range(2..=5u16);
            let values = (0..n_bands * rows * cols).map(|_| r.random_range(0..levels)).collect();
            let mut labels: Vec<u16> = (0..rows * cols).map(|_| r.random_range(0..=4)).collect();
            labels[0] = 1;
            (HyperCube::new(n_bands, rows, cols, values).unwrap(), GroundTruth::new(rows, cols, labels).unwrap())
        };
        for bins in [4, 32, 256] {
            let ctx = SelectionContext::new(&cube, &gt, QuantizationConfig::with_bins(bins)).unwrap();
            for k in 1..=n_bands.min(3) {
                let got = ctx.select_jmi(k).unwrap().selected;
                let want = oracle_greedy_jmi(&cube, &gt, bins, k);
                if got != want {
                    let _ = writeln!(log, "    [FAILED] cube {seed}, {bins} bins, k={k}: {got:?} vs oracle {want:?}");
                    return Err(log);
                }
                cubes += 1;
            }
        }
    }
    let _ = writeln!(log, "    [ok] {cubes} (cube, bins, k) cases match the brute-force greedy oracle");
    Ok(log)
}

fn run_cli(args: &[&str], threads: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hyperband"))
        .args(args)
        .env("HYPERBAND_THREADS", threads)
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn c8_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let data = root.join("data");
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let cube = s(&data.join("cube.json"));
    let gt = s(&data.join("gt.csv"));

    run_cli(&["synth", "--preset", "redundancy", "--seed", "5", "--out", &s(&data)], "0")?;
    let trace = s(&root.join("select_jmi/selection_jmi.csv"));
    run_cli(
        &[
            "select",
            "--cube",
            &cube,
            "--gt",
            &gt,
            "--selector",
            "jmi",
            "--k",
            "3",
            "--out",
            &s(&root.join("select_jmi")),
        ],
        "0",
    )?;

    let runs: Vec<(&str, Vec<String>)> = vec![
        ("synth duplicate", vec!["synth".into(), "--preset".into(), "duplicate".into(), "--seed".into(), "9".into()]),
        ("synth xor", vec!["synth".into(), "--preset".into(), "xor".into()]),
        (
            "synth mixed",
            vec![
                "synth".into(),
                "--preset".into(),
                "mixed".into(),
                "--rows".into(),
                "30".into(),
                "--n-bands".into(),
                "12".into(),
            ],
        ),
        ("profile", vec!["profile".into(), "--cube".into(), cube.clone(), "--gt".into(), gt.clone()]),
        (
            "select ig",
            vec![
                "select".into(),
                "--cube".into(),
                cube.clone(),
                "--gt".into(),
                gt.clone(),
                "--selector".into(),
                "ig".into(),
                "--k".into(),
                "4".into(),
            ],
        ),
        (
            "select mi_th",
            vec![
                "select".into(),
                "--cube".into(),
                cube.clone(),
                "--gt".into(),
                gt.clone(),
                "--selector".into(),
                "mi_th".into(),
                "--th".into(),
                "0".into(),
                "--k".into(),
                "6".into(),
            ],
        ),
        (
            "select jmi",
            vec![
                "select".into(),
                "--cube".into(),
                cube.clone(),
                "--gt".into(),
                gt.clone(),
                "--selector".into(),
                "jmi".into(),
                "--k".into(),
                "5".into(),
                "--bins".into(),
                "64".into(),
            ],
        ),
        (
            "evaluate svm",
            vec![
                "evaluate".into(),
                "--cube".into(),
                cube.clone(),
                "--gt".into(),
                gt.clone(),
                "--trace".into(),
                trace.clone(),
                "--seed".into(),
                "3".into(),
            ],
        ),
        (
            "evaluate knn",
            vec![
                "evaluate".into(),
                "--cube".into(),
                cube.clone(),
                "--gt".into(),
                gt.clone(),
                "--bands".into(),
                "2,0".into(),
                "--classifier".into(),
                "knn".into(),
            ],
        ),
        (
            "sweep jmi",
            vec![
                "sweep".into(),
                "--cube".into(),
                cube.clone(),
                "--gt".into(),
                gt.clone(),
                "--selector".into(),
                "jmi".into(),
                "--ks".into(),
                "1,3".into(),
                "--seed".into(),
                "4".into(),
            ],
        ),
        (
            "sweep mi_th",
            vec![
                "sweep".into(),
                "--cube".into(),
                cube.clone(),
                "--gt".into(),
                gt.clone(),
                "--selector".into(),
                "mi_th".into(),
                "--th".into(),
                "0.001".into(),
                "--ks".into(),
                "1,2,4".into(),
                "--map-k".into(),
                "2".into(),
                "--classifier".into(),
                "knn".into(),
            ],
        ),
    ];

    let mut log = String::new();
    let mut ok = true;
    for (i, (name, args)) in runs.iter().enumerate() {
        let out = root.join(format!("run{i}"));
        let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
        let out_s = s(&out);
        full.extend(["--out", &out_s]);
        run_cli(&full, "1")?;
        let first = snapshot(&out);
        std::fs::remove_dir_all(&out).unwrap();
        // same flags, different worker count
        run_cli(&full, "0")?;
        let second = snapshot(&out);
        ok &= ensure(
            !first.is_empty() && first == second,
            &mut log,
            format!("{name}: {} artifact(s) byte-identical", first.len()),
        );
    }
    finish(ok, log)
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "estimator oracle equivalence", limit: Duration::from_secs(10), run: c1_oracle },
        Criterion { id: 2, name: "identity suite", limit: Duration::from_secs(10), run: c2_identities },
        Criterion { id: 3, name: "XOR complementarity", limit: Duration::from_secs(5), run: c3_xor },
        Criterion { id: 4, name: "planted-redundancy contrast", limit: Duration::from_secs(5), run: c4_redundancy },
        Criterion {
            id: 5,
            name: "threshold pathology (Indian Pines)",
            limit: Duration::from_secs(60),
            run: c5_threshold,
        },
        Criterion {
            id: 6,
            name: "Indian Pines reproduction",
            limit: Duration::from_secs(15 * 60),
            run: c6_reproduction,
        },
        Criterion { id: 7, name: "greedy oracle", limit: Duration::from_secs(5), run: c7_greedy_oracle },
        Criterion { id: 8, name: "CLI determinism", limit: Duration::from_secs(120), run: c8_determinism },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();

    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        ran += 1;
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("    [FAILED] panicked: {msg}\n"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = outcome.is_ok() && in_time;
        let detail = match outcome {
            Ok(d) | Err(d) => d,
        };
        println!(
            "criterion {} {}: {} ({:.2} s, limit {} s)",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        print!("{detail}");
        if !in_time {
            println!("    [FAILED] runtime over limit");
        }
        if !pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed", ran - failed, ran);
    if failed > 0 {
        std::process::exit(1);
    }
}
