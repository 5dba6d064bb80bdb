//! Tabulates Jacobi polynomials and a filter response on `[-1, 1]`.
//!
//! Run with `cargo run --example frequency_response`.

use aopf::basis::{frequency_response, jacobi_scalar, recurrence_coeffs, resolve_params};
use aopf::BasisParams;

fn main() -> aopf::Result<()> {
    for p in [
        BasisParams::Static,
        BasisParams::Gegenbauer { lambda_raw: 0.1387 },
        BasisParams::FullJacobi { alpha_raw: 0.3, beta_raw: -0.2 },
    ] {
        let r = resolve_params(&p);
        println!("{:?}: alpha={:.4} beta={:.4}", p.mode(), r.alpha, r.beta);
        for k in 2..=4 {
            let c = recurrence_coeffs(k, r.alpha, r.beta)?;
            println!("  k={k}: a={:.5} b={:.5} c={:.5}", c.a, c.b, c.c);
        }
        let points: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
        let p3: Vec<String> = points
            .iter()
            .map(|&t| jacobi_scalar(3, r.alpha, r.beta, t).map(|v| format!("{v:7.3}")))
            .collect::<aopf::Result<_>>()?;
        println!("  P_3 on {points:?}:\n    {}", p3.join(" "));
        // a low-pass-looking combination of the first four polynomials
        let resp = frequency_response(&[1.0, -0.6, 0.2, -0.05], r.alpha, r.beta, &points)?;
        let resp: Vec<String> = resp.iter().map(|v| format!("{v:7.3}")).collect();
        println!("  response:\n    {}", resp.join(" "));
    }
    Ok(())
}
