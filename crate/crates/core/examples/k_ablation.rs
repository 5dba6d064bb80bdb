//! Sweeps the polynomial degree for every mode on a fixed split.
//!
//! Run with `cargo run --release --example k_ablation`.

use aopf::data::synthetic::{per_class_split, PlantedPartition};
use aopf::report::ablation_grid;
use aopf::trainer::Protocol;
use aopf::{k_ablation, BasisMode, Dataset, TrainConfig};

fn main() -> aopf::Result<()> {
    let ds = PlantedPartition { n: 400, seed: 3, ..PlantedPartition::default() }.generate();
    let split = per_class_split(&ds, 20, 100, 200, 0);
    let ds = Dataset { fixed_splits: Some(split), ..ds };
    let table = k_ablation(&TrainConfig::default(), &ds, &BasisMode::ALL, &[2, 3, 5, 7, 10], &Protocol::FixedSplit, 4)?;
    print!("{}", ablation_grid(&table));
    Ok(())
}
