//! Builds the shifted Laplacian of a small graph and prints its entries.
//!
//! Run with `cargo run --example shifted_laplacian`.

use aopf::{shifted_laplacian, SparseGraph};

fn main() -> aopf::Result<()> {
    // a path 0-1-2-3 plus an isolated node 4
    let g = SparseGraph::from_edge_list(&[(0, 1), (1, 2), (2, 3)], 5, true)?;
    for self_loops in [true, false] {
        let lhat = shifted_laplacian(&g, self_loops)?;
        println!("self-loops: {self_loops}, stored entries: {}", lhat.matrix().nnz());
        for row in lhat.to_dense().rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:7.4}")).collect();
            println!("  [{}]", cells.join(" "));
        }
    }
    Ok(())
}
