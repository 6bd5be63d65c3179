//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Lines go straight to stderr so they show up even when the test passes.
//! The test fails at the end if any criterion failed.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mmflaw::arch::baseline::multimodal_param_count;
use mmflaw::arch::model::Body;
use mmflaw::arch::{
    bidnn_loss, build_baseline_matched, build_model, corrnet_loss, embed, jae_loss, ArchConfig, ArchKind, Lambda,
    MultimodalModel,
};
use mmflaw::data::{
    apply_normalization, augment_single_modality, fit_normalization, gen_synthetic, make_folds, BimodalDataset,
    SynthConfig,
};
use mmflaw::exec::Execution;
use mmflaw::experiments::sweep::SIZES;
use mmflaw::experiments::{run_cv, train_fold, CvReport, TrainOptions};
use mmflaw::graph::{count_transitions, statistical_counts, Edge, FeatureMap, GraphKind, Node, ProgramGraph};
use mmflaw::nn::gradcheck::{max_rel_err_all, numeric_gradient};
use mmflaw::nn::init::initialize;
use mmflaw::nn::{correlation_loss, AdamState, InitScheme, Matrix, Mlp};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn say(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn criterion(id: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match &result {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    say(&format!("criterion {id:>2} {tag} {name} [{secs:.1} s]: {detail}"));
    result.is_ok()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 1 ------------------------------------------------------------------------

const GRAD_INSTANCES: usize = 24;
const GRAD_TOL: f64 = 1e-4;
/// CorrNet instances with a nearly dead correlation column are skipped:
/// there f64 round-off in the loss swamps any ε = 1e-5 finite difference.
const MIN_CORR_STD: f64 = 1e-4;

fn grad_instance(kind: ArchKind, seed: u64) -> (MultimodalModel, Matrix, Matrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dx = rng.random_range(1..=8);
    let dy = rng.random_range(1..=8);
    let width = rng.random_range(2..=8);
    let depth = rng.random_range(1..=2);
    let batch = rng.random_range(3..=16);
    let cfg = ArchConfig::new(kind, dx, dy).with_size(width, depth);
    let mut m = build_model(&cfg).unwrap();
    m.initialize(InitScheme::Xavier, seed, None).unwrap();
    let x = Matrix::random_normal(batch, dx, &mut rng);
    let y = Matrix::random_normal(batch, dy, &mut rng);
    (m, x, y)
}

fn min_column_std(m: &Matrix) -> f64 {
    let n = m.rows() as f64;
    (0..m.cols())
        .map(|j| {
            let mean = (0..m.rows()).map(|r| m.get(r, j)).sum::<f64>() / n;
            ((0..m.rows()).map(|r| (m.get(r, j) - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn corr_inputs_live(m: &MultimodalModel, x: &Matrix, y: &Matrix) -> bool {
    let zx = Matrix::zeros(x.rows(), x.cols());
    let zy = Matrix::zeros(y.rows(), y.cols());
    let hx = embed(m, Some(x), Some(&zy)).unwrap();
    let hy = embed(m, Some(&zx), Some(y)).unwrap();
    min_column_std(hx.matrix()).min(min_column_std(hy.matrix())) >= MIN_CORR_STD
}

type LossFn = fn(&MultimodalModel, &Matrix, &Matrix, bool) -> (f64, Vec<Vec<f64>>);

fn grads_of(g: Option<mmflaw::arch::ModelGrads>) -> Vec<Vec<f64>> {
    g.map(|g| g.flat().into_iter().map(<[f64]>::to_vec).collect()).unwrap_or_default()
}

fn corrnet_at(lambda: f64) -> impl Fn(&MultimodalModel, &Matrix, &Matrix, bool) -> (f64, Vec<Vec<f64>>) {
    move |m, x, y, g| {
        let (e, _) = corrnet_loss(m, x, y, lambda, g).unwrap();
        (e.loss, grads_of(e.grads))
    }
}

/// Worst relative error and number of skipped draws.
fn worst_grad_error(kind: ArchKind, loss: &dyn Fn(&MultimodalModel, &Matrix, &Matrix, bool) -> (f64, Vec<Vec<f64>>)) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let (mut done, mut skipped, mut seed) = (0, 0, 1000);
    while done < GRAD_INSTANCES {
        let (m, x, y) = grad_instance(kind, seed);
        seed += 1;
        if kind == ArchKind::CorrNet && !corr_inputs_live(&m, &x, &y) {
            skipped += 1;
            continue;
        }
        let (_, analytic) = loss(&m, &x, &y, true);
        let numeric = numeric_gradient(&m, |m| m.params_mut(), |m| loss(m, &x, &y, false).0);
        let refs: Vec<&[f64]> = analytic.iter().map(Vec::as_slice).collect();
        worst = worst.max(max_rel_err_all(&refs, &numeric));
        done += 1;
    }
    (worst, skipped)
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let jae: LossFn = |m, x, y, g| {
        let e = jae_loss(m, x, y, g).unwrap();
        (e.loss, grads_of(e.grads))
    };
    let bidnn: LossFn = |m, x, y, g| {
        let e = bidnn_loss(m, x, y, g).unwrap();
        (e.loss, grads_of(e.grads))
    };
    let mut parts = Vec::new();
    let mut ok = true;
    for lambda in [0.0, 0.1, 10.0] {
        let (w, s) = worst_grad_error(ArchKind::CorrNet, &corrnet_at(lambda));
        ok &= w < GRAD_TOL;
        parts.push(format!("corrnet λ={lambda} {w:.1e} ({s} skipped)"));
    }
    for (name, kind, f) in [("jae", ArchKind::Jae, jae), ("bidnn", ArchKind::Bidnn, bidnn)] {
        let (w, _) = worst_grad_error(kind, &f);
        ok &= w < GRAD_TOL;
        parts.push(format!("{name} {w:.1e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    check(
        ok,
        format!("{GRAD_INSTANCES} instances each, max rel err < {GRAD_TOL:e}: {}; {secs:.1} s < 60 s", parts.join(", ")),
    )
}

// 2 ------------------------------------------------------------------------

fn correlation_term() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_self: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=64);
        let d = rng.random_range(1..=10);
        let h = Matrix::random_normal(n, d, &mut rng);
        let neg = h.map(|v| -v);
        let same = correlation_loss(&h, &h).unwrap().value;
        let opposite = correlation_loss(&h, &neg).unwrap().value;
        worst_self = worst_self.max((same - d as f64).abs()).max((opposite + d as f64).abs());
        let other = Matrix::random_normal(n, d, &mut rng);
        max_ratio = max_ratio.max(correlation_loss(&h, &other).unwrap().value.abs() / d as f64);
    }
    check(
        worst_self <= 1e-9 && max_ratio <= 1.0,
        format!("max |corr(H,±H) ∓ d| = {worst_self:.1e} (≤ 1e-9), max |corr|/d = {max_ratio:.3} (≤ 1) over 10³ pairs"),
    )
}

// 3 ------------------------------------------------------------------------

fn bidnn_tie() -> Outcome {
    let cfg = ArchConfig::new(ArchKind::Bidnn, 7, 5).with_size(6, 3);
    let mut m = build_model(&cfg).unwrap();
    m.initialize(InitScheme::Kaiming, 3, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Matrix::random_normal(32, 7, &mut rng);
    let y = Matrix::random_normal(32, 5, &mut rng);
    let before = match &m.body {
        Body::Bidnn(b) => b.central.clone(),
        _ => unreachable!(),
    };
    let mut adam = AdamState::with_lr(1e-2).unwrap();
    for _ in 0..100 {
        let e = bidnn_loss(&m, &x, &y, true).unwrap();
        let g = e.grads.unwrap();
        adam.step(&mut m.params_mut(), &g.flat()).unwrap();
    }
    let Body::Bidnn(b) = &m.body else { unreachable!() };
    let yx = b.central_yx();
    let d = b.central.layers.len();
    let diff = (0..d)
        .map(|i| yx.layers[d - 1 - i].weight.transpose().max_abs_diff(&b.central.layers[i].weight))
        .fold(0.0, f64::max);
    let moved = b.central.layers[0].weight.max_abs_diff(&before.layers[0].weight);
    check(
        diff == 0.0 && moved > 0.0,
        format!("after 100 Adam steps max |W_xy − W_yxᵀ| = {diff} (weights moved by {moved:.2e})"),
    )
}

// 4 ------------------------------------------------------------------------

fn benchmark() -> BimodalDataset {
    gen_synthetic(&SynthConfig::benchmark()).unwrap()
}

fn normalization() -> Outcome {
    let mut ds = benchmark();
    for r in 0..ds.len() {
        ds.x.set(r, 5, 3.5);
        ds.y.set(r, 0, -1.0);
    }
    let plan = make_folds(ds.len(), 4).unwrap();
    let (mut worst_mean, mut worst_std): (f64, f64) = (0.0, 0.0);
    let mut masked_ok = true;
    for f in &plan.folds {
        let stats = fit_normalization(&ds, &f.train).unwrap();
        let norm = apply_normalization(&ds, &stats).unwrap();
        masked_ok &= stats.x.masked[5] && stats.y.masked[0];
        for (m, masked) in [(&norm.x, &stats.x.masked), (&norm.y, &stats.y.masked)] {
            for j in 0..m.cols() {
                if masked[j] {
                    masked_ok &= (0..m.rows()).all(|r| m.get(r, j) == 0.0);
                    continue;
                }
                let n = f.train.len() as f64;
                let mean = f.train.iter().map(|&r| m.get(r, j)).sum::<f64>() / n;
                let var = f.train.iter().map(|&r| (m.get(r, j) - mean).powi(2)).sum::<f64>() / (n - 1.0);
                worst_mean = worst_mean.max(mean.abs());
                worst_std = worst_std.max((var.sqrt() - 1.0).abs());
            }
        }
    }
    check(
        worst_mean < 1e-9 && worst_std < 1e-9 && masked_ok,
        format!(
            "train-block max |mean| {worst_mean:.1e}, max |std − 1| {worst_std:.1e} (both < 1e-9); constant features all 0: {masked_ok}"
        ),
    )
}

// 5 ------------------------------------------------------------------------

fn fold_plan() -> Outcome {
    let mut problems = Vec::new();
    for n in [10, 101, 5000] {
        let plan = make_folds(n, 5).unwrap();
        if plan.folds.len() != 5 {
            problems.push(format!("n={n}: {} folds", plan.folds.len()));
        }
        let mut in_test = vec![false; n];
        for (i, f) in plan.folds.iter().enumerate() {
            let mut seen = vec![0; n];
            for &r in f.train.iter().chain(&f.val).chain(&f.test) {
                seen[r] += 1;
            }
            if seen.iter().any(|&c| c != 1) {
                problems.push(format!("n={n} fold {i}: not a partition"));
            }
            for &r in &f.test {
                if in_test[r] {
                    problems.push(format!("n={n}: test row {r} in two folds"));
                }
                in_test[r] = true;
            }
            let tenth = n as f64 / 10.0;
            for (what, len, want) in [("test", f.test.len(), tenth), ("val", f.val.len(), tenth), ("train", f.train.len(), 8.0 * tenth)] {
                if (len as f64 - want).abs() > 1.0 {
                    problems.push(format!("n={n} fold {i}: {what} has {len} rows"));
                }
            }
        }
    }
    if problems.is_empty() {
        Ok("n ∈ {10, 101, 5000}: 5 folds, exact partitions, disjoint test deciles, sizes within ±1".into())
    } else {
        Err(problems.join("; "))
    }
}

// 6 ------------------------------------------------------------------------

fn augmentation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [1, 7, 250] {
        let x = Matrix::random_normal(n, 4, &mut rng);
        let y = Matrix::random_normal(n, 3, &mut rng);
        let labels = (0..n).map(|i| (i % 2) as u8).collect();
        let ds = BimodalDataset::new((0..n).map(|i| format!("f{i}")).collect(), x, y, labels).unwrap();
        let a = augment_single_modality(&ds);
        let blocks_ok = (0..n).all(|r| {
            a.x.row(r) == ds.x.row(r)
                && a.y.row(r) == ds.y.row(r)
                && a.x.row(n + r) == ds.x.row(r)
                && a.y.row(n + r).iter().all(|&v| v == 0.0)
                && a.x.row(2 * n + r).iter().all(|&v| v == 0.0)
                && a.y.row(2 * n + r) == ds.y.row(r)
                && a.labels[n + r] == ds.labels[r]
                && a.labels[2 * n + r] == ds.labels[r]
        });
        if a.len() != 3 * n || !blocks_ok {
            return Err(format!("n={n}: {} rows, zero blocks ok: {blocks_ok}", a.len()));
        }
    }
    Ok("n ∈ {1, 7, 250}: exactly 3n rows; y zeroed in copy 2, x zeroed in copy 3, labels copied".into())
}

// 7 ------------------------------------------------------------------------

fn baseline_parity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (w, d) in SIZES {
        let cfg = ArchConfig::new(ArchKind::CorrNet, 722, 77).with_size(w, d);
        let target = multimodal_param_count(&cfg).unwrap();
        let m = build_baseline_matched(&cfg, target).unwrap();
        let gap = m.total_param_count().abs_diff(target) as f64 / target as f64;
        ok &= gap <= 0.02;
        parts.push(format!("{w}×{d} {:.2}%", 100.0 * gap));
    }
    check(ok, format!("gap to CorrNet (head included) at (722, 77), ≤ 2%: {}", parts.join(", ")))
}

// 8 ------------------------------------------------------------------------

fn lsuv() -> Outcome {
    let ds = benchmark();
    let rows: Vec<usize> = (0..1024).collect();
    let calib = ds.subset(&rows).x;
    let mut m = Mlp::with_dims(&[calib.cols(), 100, 100, 100, 100], false);
    initialize(&mut m, InitScheme::Lsuv, 8, Some(&calib)).unwrap();
    let (_, trace) = m.forward_traced(&calib).unwrap();
    let stds: Vec<f64> = trace.pre_activations().iter().map(Matrix::std_all).collect();
    let ok = stds.len() == 4 && stds.iter().all(|s| (0.9..=1.1).contains(s));
    let shown: Vec<String> = stds.iter().map(|s| format!("{s:.3}")).collect();
    check(ok, format!("4 × 100 layer output stds on the calibration batch: [{}] ⊂ [0.9, 1.1]", shown.join(", ")))
}

// 9 ------------------------------------------------------------------------

const BENCH_BUDGET: Duration = Duration::from_secs(300);

fn cv_bench(ds: &BimodalDataset, kind: ArchKind) -> (CvReport, Duration) {
    let cfg = ArchConfig::new(kind, ds.dim_x(), ds.dim_y());
    let start = Instant::now();
    let r = run_cv(&cfg, ds, TrainOptions::default(), Execution::Sequential).unwrap();
    (r, start.elapsed())
}

fn synthetic_benchmark() -> Outcome {
    let ds = benchmark();
    let (base, base_t) = cv_bench(&ds, ArchKind::Baseline);
    let mut ok = base_t < BENCH_BUDGET;
    let mut parts = vec![format!(
        "Baseline {:.3} (y zeroed {:.3}, {:.0} s)",
        base.mean,
        base.mean_y_zeroed,
        base_t.as_secs_f64()
    )];
    for kind in ArchKind::MULTIMODAL {
        let (r, t) = cv_bench(&ds, kind);
        let full = r.mean >= 0.80 && r.mean >= base.mean - 0.02;
        let single = r.mean_y_zeroed >= 0.60;
        let shrinks = base.mean_y_zeroed - r.mean_y_zeroed < base.mean - r.mean;
        ok &= full && single && shrinks && t < BENCH_BUDGET;
        parts.push(format!(
            "{} {:.3} [≥ 0.80 and ≥ baseline − 0.02: {full}] y zeroed {:.3} [≥ 0.60: {single}; baseline lead shrinks: {shrinks}] {:.0} s",
            kind.label(),
            r.mean,
            r.mean_y_zeroed,
            t.as_secs_f64()
        ));
    }
    check(ok, parts.join("; "))
}

// 10 -----------------------------------------------------------------------

fn lambda_monotonicity() -> Outcome {
    let ds = benchmark();
    let mut rising = 0;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let corrs: Vec<f64> = [0.0, 0.1, 10.0]
            .iter()
            .map(|&l| {
                let mut cfg = ArchConfig::new(ArchKind::CorrNet, ds.dim_x(), ds.dim_y());
                cfg.lambda = Lambda::Value(l);
                cfg.seed = seed;
                train_fold(&cfg, &ds, TrainOptions::default(), 0)
                    .unwrap()
                    .report
                    .test_embedding_correlation
                    .unwrap()
            })
            .collect();
        let up = corrs.windows(2).all(|w| w[0] <= w[1]);
        rising += up as usize;
        parts.push(format!("seed {seed}: {:.3} → {:.3} → {:.3}", corrs[0], corrs[1], corrs[2]));
    }
    check(
        rising >= 2,
        format!("held-out mean per-dim corr(h_x, h_y) at λ = 0, 0.1, 10 (fold 0); non-decreasing for {rising}/3 seeds: {}", parts.join(", ")),
    )
}

// 11 -----------------------------------------------------------------------

const TYPES: [&str; 5] = ["CallExpression", "BinaryOperator", "IfStatement", "ElseStatement", "Decl"];
const LABELS: [&str; 3] = ["argument", "child", "next"];

fn random_graph(rng: &mut ChaCha8Rng, kind: GraphKind) -> ProgramGraph {
    let n: usize = rng.random_range(0..=50);
    let mut ids: Vec<i64> = (0..n as i64).map(|i| 3 * i + 1).collect();
    ids.shuffle(rng);
    let nodes = ids
        .iter()
        .map(|&id| Node {
            id,
            node_type: TYPES[rng.random_range(0..TYPES.len())].into(),
        })
        .collect();
    let m = if n == 0 { 0 } else { rng.random_range(0..=200) };
    let edges = (0..m)
        .map(|_| Edge {
            src: ids[rng.random_range(0..n)],
            dst: ids[rng.random_range(0..n)],
            label: LABELS[rng.random_range(0..LABELS.len())].into(),
        })
        .collect();
    ProgramGraph {
        function_id: "f".into(),
        kind,
        nodes,
        edges,
    }
}

fn node_type(g: &ProgramGraph, id: i64) -> &str {
    &g.nodes.iter().find(|n| n.id == id).unwrap().node_type
}

/// Recount every feature by scanning nodes and edges once per key.
fn brute_force(g: &ProgramGraph) -> (FeatureMap, FeatureMap) {
    let k = g.kind.as_str();
    let mut trans = FeatureMap::new();
    let mut stats = FeatureMap::new();
    let put = |m: &mut FeatureMap, key: String, c: usize| {
        if c > 0 {
            m.insert(key, c as u64);
        }
    };
    for s in TYPES {
        for l in LABELS {
            for d in TYPES {
                let c = g
                    .edges
                    .iter()
                    .filter(|e| e.label == l && node_type(g, e.src) == s && node_type(g, e.dst) == d)
                    .count();
                put(&mut trans, format!("{k}:{s}---{l}---{d}"), c);
            }
        }
    }
    for l in LABELS {
        put(&mut stats, format!("{k}:edgecount:{l}"), g.edges.iter().filter(|e| e.label == l).count());
    }
    for t in TYPES {
        let of_type: Vec<&Node> = g.nodes.iter().filter(|n| n.node_type == t).collect();
        put(&mut stats, format!("{k}:nodecount:{t}"), of_type.len());
        for (b, name) in ["0", "1", "2", "3+"].into_iter().enumerate() {
            let c = of_type
                .iter()
                .filter(|n| g.edges.iter().filter(|e| e.src == n.id).count().min(3) == b)
                .count();
            put(&mut stats, format!("{k}:outdeg:{t}:{name}"), c);
        }
    }
    (trans, stats)
}

fn featurizer_oracle() -> Outcome {
    let kinds = [GraphKind::Ast, GraphKind::Cfg, GraphKind::Icfg, GraphKind::Scope, GraphKind::Udg, GraphKind::Type];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut edges = 0;
    for i in 0..100 {
        let g = random_graph(&mut rng, kinds[i % kinds.len()]);
        let trans = count_transitions(&g);
        let stats = statistical_counts(std::slice::from_ref(&g)).unwrap();
        let (bt, bs) = brute_force(&g);
        if trans != bt || stats != bs {
            return Err(format!("graph {i}: counts differ from brute force"));
        }
        let total: u64 = trans.values().sum();
        if total != g.edges.len() as u64 {
            return Err(format!("graph {i}: {total} transitions for {} edges", g.edges.len()));
        }
        edges += g.edges.len();
    }
    Ok(format!("100 random graphs (≤ 50 nodes, ≤ 200 edges, {edges} edges total): exact match, transition totals = edge counts"))
}

// 12 -----------------------------------------------------------------------

fn mmflaw(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mmflaw"))
        .args(args)
        .current_dir(dir)
        .env("NO_COLOR", "1")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`mmflaw {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let synth = ["synth", "--n", "400", "--latent-dim", "4", "--dim-x", "10", "--dim-y", "8", "--seed", "1"];
    let with_out = |out: &str| -> Vec<String> { synth.iter().map(|s| s.to_string()).chain(["-o".into(), out.into()]).collect() };
    let a: Vec<String> = with_out("a.csv");
    let b: Vec<String> = with_out("b.csv");
    mmflaw(&a.iter().map(String::as_str).collect::<Vec<_>>(), dir)?;
    mmflaw(&b.iter().map(String::as_str).collect::<Vec<_>>(), dir)?;
    let synth_same = std::fs::read(dir.join("a.csv")).unwrap() == std::fs::read(dir.join("b.csv")).unwrap();

    let run = ["--data", "a.csv", "--epochs", "4", "--batch-size", "64", "--width", "12", "--seed", "9"];
    let mut same = Vec::new();
    for (cmd, extra) in [("train", vec!["--arch", "bidnn", "--fold", "2"]), ("cv", vec!["--arch", "corrnet", "--lambda", "auto"])] {
        let mut args = vec![cmd, "-o", cmd];
        args.extend(run);
        args.extend(extra);
        mmflaw(&args, dir)?;
        let first = snapshot(&dir.join(cmd));
        mmflaw(&args, dir)?;
        let second = snapshot(&dir.join(cmd));
        same.push((cmd, first.len(), !first.is_empty() && first == second));
    }
    let ok = synth_same && same.iter().all(|s| s.2);
    let parts: Vec<String> = same.iter().map(|(c, n, s)| format!("{c} ({n} files) {s}")).collect();
    check(ok, format!("bit-identical reruns: synth {synth_same}, {}", parts.join(", ")))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "gradient suite", gradient_suite),
        (2, "correlation term", correlation_term),
        (3, "BiDNN tie", bidnn_tie),
        (4, "normalization", normalization),
        (5, "fold plan", fold_plan),
        (6, "augmentation", augmentation),
        (7, "baseline parity", baseline_parity),
        (8, "LSUV", lsuv),
        (9, "synthetic benchmark", synthetic_benchmark),
        (10, "λ monotonicity", lambda_monotonicity),
        (11, "featurizer oracle", featurizer_oracle),
        (12, "reproducibility", reproducibility),
    ];
    let failed: Vec<u32> = criteria
        .into_iter()
        .filter_map(|(id, name, f)| (!criterion(id, name, f)).then_some(id))
        .collect();
    say(&format!("acceptance: {} of 12 criteria passed", 12 - failed.len()));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
