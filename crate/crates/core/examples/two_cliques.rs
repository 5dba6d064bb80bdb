//! Trains every basis mode on two bridged cliques and prints the curves.
//!
//! Run with `cargo run --example two_cliques`.

use aopf::data::synthetic::two_cliques;
use aopf::{train_run, BasisMode, TrainConfig};

fn main() -> aopf::Result<()> {
    let ds = two_cliques(5);
    let split = ds.fixed_splits.clone().expect("toy graph carries a split");
    for mode in BasisMode::ALL {
        let cfg = TrainConfig { mode, k: 2, max_epochs: 100, patience: 100, ..TrainConfig::default() };
        let r = train_run(&cfg, &ds, &split)?;
        println!("{mode}: best epoch {}, test accuracy {:.2}", r.best_epoch, r.test_acc_at_best);
        for e in r.curve.iter().step_by(20) {
            println!("  epoch {:>3}  train loss {:.4}  val loss {:.4}  val acc {:.2}", e.epoch, e.train_loss, e.val_loss, e.val_acc);
        }
    }
    Ok(())
}
