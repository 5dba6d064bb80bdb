//! Shows how the learnable basis shape moves during training, and saves the
//! dataset in the container format for use with the `aopf` binary.
//!
//! Run with `cargo run --release --example learned_params -- [out.json]`.

use aopf::data::save_dataset;
use aopf::data::synthetic::{per_class_split, PlantedPartition};
use aopf::{train_run, BasisMode, TrainConfig};

fn main() -> aopf::Result<()> {
    let ds = PlantedPartition { n: 300, seed: 8, ..PlantedPartition::default() }.generate();
    let split = per_class_split(&ds, 20, 60, 120, 0);
    for mode in [BasisMode::Gegenbauer, BasisMode::FullJacobi] {
        for lr in [0.01, 0.05] {
            let cfg = TrainConfig { mode, lr, ..TrainConfig::default() };
            let r = train_run(&cfg, &ds, &split)?;
            let p = r.param_report;
            println!(
                "{mode} lr={lr}: alpha={:.4} beta={:.4} clamped={} (best epoch {}, test {:.3})",
                p.effective_alpha, p.effective_beta, p.clamped, r.best_epoch, r.test_acc_at_best
            );
        }
    }
    if let Some(path) = std::env::args().nth(1) {
        save_dataset(&aopf::Dataset { fixed_splits: Some(split), ..ds }, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
