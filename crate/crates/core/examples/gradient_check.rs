//! Compares tape gradients against central differences for every mode.
//!
//! Run with `cargo run --example gradient_check -- 7` (the seed is optional).

use aopf::gradcheck;

fn main() -> aopf::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let rep = gradcheck::run(seed)?;
    for c in &rep.checks {
        println!(
            "{:<12} stabilize={:<5} {:<16} rel_err={:.3e} skipped={}",
            c.mode.as_str(),
            c.stabilize,
            c.param,
            c.rel_error,
            c.skipped
        );
    }
    println!(
        "seed {seed}: max relative error {:.3e} ({})",
        rep.max_rel_error,
        if rep.passed() { "pass" } else { "fail" }
    );
    Ok(())
}
