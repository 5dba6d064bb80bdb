//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Benchmark criteria read dataset containers from `$AOPF_DATA_DIR`
//! (default: `data/` at the workspace root) as `cora.json`, `texas.json` and
//! `pubmed.json`. A criterion whose dataset is absent prints
//! `FAIL [blocked]` with the reason. It does not fail the process, because
//! nothing was measured. Every criterion that was evaluated and failed makes
//! the process exit non-zero.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use aopf::autodiff::Tape;
use aopf::basis::{jacobi_scalar, propagate_basis_values, BasisMode, BasisParams, BasisVars};
use aopf::data::synthetic::{per_class_split, random_label_graph, two_cliques, PlantedPartition};
use aopf::data::{load_dataset, make_folds, Dataset};
use aopf::gradcheck;
use aopf::model::{filter_layer_forward, FilterLayer};
use aopf::trainer::{cross_validate, train_run, CvResult, RunResult, TrainConfig};
use aopf::autodiff::ParamStore;
use common::*;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass(String),
    Fail(String),
    Blocked(String),
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, status: Status) {
        match status {
            Status::Pass(d) => println!("PASS  {name}: {d}"),
            Status::Fail(d) => {
                self.failures += 1;
                println!("FAIL  {name}: {d}");
            }
            Status::Blocked(d) => println!("FAIL  {name}: [blocked] {d}"),
        }
    }
}

fn verdict(ok: bool, detail: String) -> Status {
    if ok {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("AOPF_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn dataset(name: &str) -> Result<Dataset, String> {
    let path = data_dir().join(format!("{name}.json"));
    if !path.exists() {
        return Err(format!("{} not found", path.display()));
    }
    load_dataset(&path).map_err(|e| format!("{}: {e}", path.display()))
}

const MODES: [BasisMode; 3] = [BasisMode::Static, BasisMode::Gegenbauer, BasisMode::FullJacobi];

fn gradient_oracle() -> Status {
    let start = Instant::now();
    match gradcheck::run(7) {
        Ok(rep) => {
            let secs = start.elapsed().as_secs_f64();
            verdict(
                rep.passed() && secs < 10.0,
                format!("max relative error {:.3e} over {} blocks (tolerance 1e-4), {secs:.2}s (limit 10s)", rep.max_rel_error, rep.checks.len()),
            )
        }
        Err(e) => Status::Fail(e.to_string()),
    }
}

fn chebyshev_reduction() -> Status {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..=32);
        let (_, lhat) = random_operator(n, &mut rng);
        let x = random_matrix(n, 3, &mut rng);
        let zs = propagate_basis_values(&lhat, &x, 10, &BasisParams::Static, false).unwrap();
        let ts = chebyshev_blocks(&lhat.to_dense(), &x, 10);
        for k in 0..=10 {
            worst = worst.max(max_abs_diff(&(&zs[k] / binom(k as f64 - 0.5, k)), &ts[k]));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-10 && secs < 5.0, format!("max deviation {worst:.2e} (tolerance 1e-10) on 20 graphs, K<=10, {secs:.2}s (limit 5s)"))
}

fn dense_oracle() -> Status {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(2..=16);
        let (_, lhat) = random_operator(n, &mut rng);
        let x = random_matrix(n, 3, &mut rng);
        // (-0.95, 2]
        let a = 2.0 - rng.gen_range(0.0..2.95);
        let b = 2.0 - rng.gen_range(0.0..2.95);
        let k = rng.gen_range(0..=6);
        let mut store = ParamStore::new();
        let layer = FilterLayer::new(&mut store, "l", k, 3, 4, &mut rng);
        let mut tape = Tape::new();
        let xv = tape.constant(x.clone());
        let basis = BasisVars::from_params(&mut tape, &BasisParams::FullJacobi { alpha_raw: a, beta_raw: b });
        let out = filter_layer_forward(&mut tape, &store, &layer, &lhat, xv, basis, false).unwrap();
        let dense = lhat.to_dense();
        let mut want = Array2::<f64>::zeros((n, 4));
        for (order, &w) in layer.weights().iter().enumerate() {
            want = want + jacobi_matrix(order, a, b, &dense).dot(&x).dot(store.value(w));
        }
        want = want + store.value(layer.bias());
        worst = worst.max(max_abs_diff(tape.value(out), &want));
    }
    verdict(worst <= 1e-9, format!("max deviation {worst:.2e} (tolerance 1e-9) on 50 instances, n<=16"))
}

fn property_suite() -> Status {
    let mut failed = Vec::new();

    // symmetry identity
    for alpha in [-0.9, -0.5, 0.0, 1.7] {
        for k in 0..=10 {
            for i in 0..=40 {
                let x = -1.0 + i as f64 * 0.05;
                let l = jacobi_scalar(k, alpha, alpha, -x).unwrap();
                let r = if k % 2 == 0 { 1.0 } else { -1.0 } * jacobi_scalar(k, alpha, alpha, x).unwrap();
                if (l - r).abs() > 1e-12 {
                    failed.push("symmetry identity");
                }
            }
        }
    }

    // eigensolver-based matrix/scalar consistency
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let n = rng.gen_range(2..=32);
        let (_, lhat) = random_operator(n, &mut rng);
        let x = random_matrix(n, 2, &mut rng);
        let (a, b) = (rng.gen_range(-0.95..2.0), rng.gen_range(-0.95..2.0));
        let zs = propagate_basis_values(&lhat, &x, 5, &BasisParams::FullJacobi { alpha_raw: a, beta_raw: b }, false).unwrap();
        for (k, z) in zs.iter().enumerate() {
            let want = spectral_apply(&lhat.to_dense(), &x, |lam| jacobi_explicit(k, a, b, lam));
            if max_abs_diff(z, &want) > 1e-9 {
                failed.push("matrix/scalar consistency");
            }
        }
        // Gegenbauer as constrained Jacobi
        let v = rng.gen_range(-0.4..2.0);
        let g = propagate_basis_values(&lhat, &x, 5, &BasisParams::Gegenbauer { lambda_raw: v }, true).unwrap();
        let j = propagate_basis_values(&lhat, &x, 5, &BasisParams::FullJacobi { alpha_raw: v - 0.5, beta_raw: v - 0.5 }, true).unwrap();
        if g != j {
            failed.push("gegenbauer constraint");
        }
    }

    // spectrum of L̂
    for n in [5, 20, 64] {
        let (_, lhat) = random_operator(n, &mut rng);
        if eigenvalues(&lhat.to_dense()).iter().any(|l| l.abs() > 1.0 + 1e-9) {
            failed.push("spectrum in [-1, 1]");
        }
    }

    // layer-norm statistics
    let x = random_matrix(20, 16, &mut rng) * 7.0;
    let mut t = Tape::new();
    let v = t.constant(x);
    let y = t.layer_norm(v);
    for row in t.value(y).rows() {
        let m = row.mean().unwrap();
        let var = row.iter().map(|v| (v - m).powi(2)).sum::<f64>() / row.len() as f64;
        if m.abs() > 1e-12 || (var - 1.0).abs() > 1e-4 {
            failed.push("layer-norm statistics");
        }
    }

    // fold partition
    for (n, seed) in [(10, 0), (183, 3), (1000, 9)] {
        let ds = random_label_graph(n, 0.0, 2, 1, 0);
        let plan = make_folds(&ds, seed).unwrap();
        let mut tests: Vec<usize> = plan.folds.iter().flat_map(|f| f.test.iter().copied()).collect();
        tests.sort_unstable();
        let disjoint = plan.folds.iter().all(|f| {
            let mut all: Vec<usize> = f.train.iter().chain(&f.val).chain(&f.test).copied().collect();
            all.sort_unstable();
            all == (0..n).collect::<Vec<_>>()
        });
        if tests != (0..n).collect::<Vec<_>>() || !disjoint || make_folds(&ds, seed).unwrap() != plan {
            failed.push("fold partition");
        }
    }

    // determinism and epoch-0 mode equivalence
    let ds = PlantedPartition { n: 120, seed: 2, ..PlantedPartition::default() }.generate();
    let split = per_class_split(&ds, 10, 20, 50, 0);
    let mut first = Vec::new();
    for mode in MODES {
        let cfg = TrainConfig { mode, max_epochs: 50, patience: 50, ..TrainConfig::default() };
        let a = train_run(&cfg, &ds, &split).unwrap();
        let b = train_run(&cfg, &ds, &split).unwrap();
        if a != b {
            failed.push("replay determinism");
        }
        if mode == BasisMode::Gegenbauer && a.param_report.effective_alpha != a.param_report.effective_beta {
            failed.push("gegenbauer alpha == beta");
        }
        first.push([a.curve[0].train_loss.to_bits(), a.curve[0].val_loss.to_bits(), a.curve[0].val_acc.to_bits()]);
    }
    if first.windows(2).any(|w| w[0] != w[1]) {
        failed.push("epoch-0 mode equivalence");
    }

    // round trip
    let rt = Dataset::from_json(&ds.to_json().unwrap()).unwrap();
    if rt != ds {
        failed.push("container round trip");
    }

    failed.dedup();
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            "symmetry, spectrum, eigen consistency, gegenbauer constraint, layer norm, folds, determinism, epoch-0 equivalence, round trip".into()
        } else {
            format!("violated: {}", failed.join(", "))
        },
    )
}

fn toy_separability() -> Status {
    let ds = two_cliques(5);
    let split = ds.fixed_splits.clone().unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for mode in MODES {
        let cfg = TrainConfig { mode, k: 2, max_epochs: 100, patience: 100, ..TrainConfig::default() };
        let r = train_run(&cfg, &ds, &split).unwrap();
        ok &= r.test_acc_at_best == 1.0;
        parts.push(format!("{mode}={:.2}", r.test_acc_at_best));
    }
    verdict(ok, format!("{} (need 1.00 each, K=2, 100 epochs)", parts.join(" ")))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn main() {
    let mut rep = Report { failures: 0 };
    println!("data directory: {}", data_dir().display());

    rep.line("gradient oracle", gradient_oracle());
    rep.line("chebyshev reduction", chebyshev_reduction());
    rep.line("dense-oracle equivalence", dense_oracle());

    // fixed-split homophilic runs, shared by the accuracy and shape checks
    let cora: Result<Vec<(RunResult, Duration)>, String> = dataset("cora").and_then(|ds| {
        let split = ds.fixed_splits.clone().ok_or("cora container carries no fixed split")?;
        MODES
            .iter()
            .map(|&m| {
                let (r, d) = timed(|| train_run(&TrainConfig::default().with_mode(m), &ds, &split));
                r.map(|r| (r, d)).map_err(|e| e.to_string())
            })
            .collect()
    });
    rep.line(
        "homophilic fixed-split accuracy",
        match &cora {
            Err(e) => Status::Blocked(e.clone()),
            Ok(runs) => {
                let targets = [0.7990, 0.7880, 0.8070];
                let ok = runs.iter().zip(targets).all(|((r, d), t)| (r.test_acc_at_best - t).abs() <= 0.05 && d.as_secs() < 300);
                let detail = runs
                    .iter()
                    .zip(targets)
                    .map(|((r, d), t)| format!("{}={:.4} (target {t:.4}±0.05, {:.0}s)", r.config.mode, r.test_acc_at_best, d.as_secs_f64()))
                    .collect::<Vec<_>>()
                    .join(", ");
                verdict(ok, detail)
            }
        },
    );

    let texas = dataset("texas");
    let texas_cv = |k: usize| -> Result<Vec<(CvResult, Duration)>, String> {
        let ds = texas.as_ref().map_err(Clone::clone)?;
        let plan = make_folds(ds, 0).map_err(|e| e.to_string())?;
        MODES
            .iter()
            .map(|&m| {
                let (r, d) = timed(|| cross_validate(&TrainConfig::default().with_mode(m).with_k(k), ds, &plan));
                r.map(|r| (r, d)).map_err(|e| e.to_string())
            })
            .collect()
    };
    rep.line(
        "heterophilic cross-validation accuracy",
        match texas_cv(3) {
            Err(e) => Status::Blocked(e),
            Ok(runs) => {
                let targets = [0.8297, 0.8081, 0.8135];
                let ok = runs.iter().zip(targets).all(|((r, d), t)| (r.mean_test_acc - t).abs() <= 0.07 && d.as_secs() < 600);
                let detail = runs
                    .iter()
                    .zip(&MODES)
                    .zip(targets)
                    .map(|(((r, d), m), t)| format!("{m}={:.4} (target {t:.4}±0.07, {:.0}s)", r.mean_test_acc, d.as_secs_f64()))
                    .collect::<Vec<_>>()
                    .join(", ");
                verdict(ok, detail)
            }
        },
    );

    rep.line(
        "learned shape direction",
        match &cora {
            Err(e) => Status::Blocked(e.clone()),
            Ok(runs) => {
                let g = runs[1].0.param_report;
                let j = runs[2].0.param_report;
                let ok = g.effective_alpha > -0.5 && g.effective_alpha < 0.0 && (j.effective_alpha - j.effective_beta).abs() > 0.01;
                verdict(
                    ok,
                    format!(
                        "gegenbauer alpha={:.4} (need in (-0.5, 0)), full-jacobi alpha={:.4} beta={:.4} (need |alpha-beta| > 0.01)",
                        g.effective_alpha, j.effective_alpha, j.effective_beta
                    ),
                )
            }
        },
    );

    rep.line(
        "degree sweep on a large homophilic graph",
        match dataset("pubmed").and_then(|ds| {
            let split = ds.fixed_splits.clone().ok_or("pubmed container carries no fixed split")?;
            let run = |m: BasisMode, k: usize| {
                train_run(&TrainConfig::default().with_mode(m).with_k(k), &ds, &split)
                    .map(|r| r.test_acc_at_best)
                    .map_err(|e| e.to_string())
            };
            Ok((run(BasisMode::Static, 2)?, run(BasisMode::Static, 10)?, run(BasisMode::FullJacobi, 10)?))
        }) {
            Err(e) => Status::Blocked(e),
            Ok((s2, s10, j10)) => verdict(
                s2 - s10 >= 0.05 && j10 > s10,
                format!("static K=2 {s2:.4}, static K=10 {s10:.4} (need drop >= 0.05), full-jacobi K=10 {j10:.4} (need > static K=10)"),
            ),
        },
    );

    rep.line(
        "low-degree heterophilic ranking",
        match texas_cv(2) {
            Err(e) => Status::Blocked(e),
            Ok(runs) => {
                let accs: Vec<f64> = runs.iter().map(|(r, _)| r.mean_test_acc).collect();
                verdict(
                    accs[1] > accs[0] && accs[1] > accs[2],
                    format!("K=2 static {:.4}, gegenbauer {:.4}, full-jacobi {:.4} (need gegenbauer first)", accs[0], accs[1], accs[2]),
                )
            }
        },
    );

    rep.line("property suite", property_suite());
    rep.line("toy separability", toy_separability());

    if rep.failures > 0 {
        std::process::exit(1);
    }
}
