//! Ten-fold cross-validation on a heterophilic planted partition.
//!
//! Run with `cargo run --release --example cross_validation`.

use aopf::data::make_folds;
use aopf::data::synthetic::PlantedPartition;
use aopf::trainer::cross_validate_jobs;
use aopf::{BasisMode, TrainConfig};

fn main() -> aopf::Result<()> {
    // edges mostly join different classes
    let ds = PlantedPartition { n: 200, p_in: 0.01, p_out: 0.04, seed: 1, ..PlantedPartition::default() }.generate();
    let plan = make_folds(&ds, 0)?;
    for mode in BasisMode::ALL {
        let cv = cross_validate_jobs(&TrainConfig::default().with_mode(mode), &ds, &plan, 4)?;
        let accs: Vec<String> = cv.folds.iter().map(|r| format!("{:.2}", r.test_acc_at_best)).collect();
        println!(
            "{mode}: {:.4} ± {:.4}  (alpha {:.4}, beta {:.4})\n  folds: {}",
            cv.mean_test_acc,
            cv.std_test_acc,
            cv.mean_alpha,
            cv.mean_beta,
            accs.join(" ")
        );
    }
    Ok(())
}
