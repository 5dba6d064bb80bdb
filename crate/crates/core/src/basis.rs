//! Jacobi and Gegenbauer bases on `[-1, 1]`.
//!
//! Three parameterizations share one recurrence:
//!
//! * [`BasisMode::Static`] fixes `(α, β) = (-0.5, -0.5)`, the Chebyshev
//!   point, and has nothing to learn.
//! * [`BasisMode::Gegenbauer`] learns a single `λ` with `α = β = λ - 0.5`.
//! * [`BasisMode::FullJacobi`] learns `α` and `β` independently.
//!
//! Effective parameters are floored at `-1 + DOMAIN_EPS` so every
//! recurrence denominator stays strictly positive.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::error::{AopfError, Result};
use crate::graph::{CsrMatrix, ShiftedLaplacian};

pub const DOMAIN_EPS: f64 = 0.01;

/// Smallest effective α or β handed to the recurrence.
pub const DOMAIN_FLOOR: f64 = -1.0 + DOMAIN_EPS;

/// The Chebyshev point shared by every mode at initialization.
pub const CHEBYSHEV_POINT: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisMode {
    Static,
    Gegenbauer,
    FullJacobi,
}

impl BasisMode {
    pub const ALL: [BasisMode; 3] = [BasisMode::Static, BasisMode::Gegenbauer, BasisMode::FullJacobi];

    pub fn num_learnables(self) -> usize {
        match self {
            BasisMode::Static => 0,
            BasisMode::Gegenbauer => 1,
            BasisMode::FullJacobi => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BasisMode::Static => "static",
            BasisMode::Gegenbauer => "gegenbauer",
            BasisMode::FullJacobi => "full-jacobi",
        }
    }
}

impl fmt::Display for BasisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasisMode {
    type Err = AopfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" | "s-jacobi" | "sjacobi" | "chebyshev" => Ok(BasisMode::Static),
            "gegenbauer" => Ok(BasisMode::Gegenbauer),
            "jacobi" | "full-jacobi" | "fulljacobi" | "l-jacobi" | "ljacobi" => {
                Ok(BasisMode::FullJacobi)
            }
            other => Err(AopfError::ConfigError(format!("unknown basis mode '{other}'"))),
        }
    }
}

/// A basis mode together with its raw (pre-clamp) learnable values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BasisParams {
    Static,
    Gegenbauer { lambda_raw: f64 },
    FullJacobi { alpha_raw: f64, beta_raw: f64 },
}

impl BasisParams {
    /// Raw values that put `mode` exactly on the Chebyshev point.
    pub fn chebyshev_init(mode: BasisMode) -> Self {
        match mode {
            BasisMode::Static => BasisParams::Static,
            BasisMode::Gegenbauer => BasisParams::Gegenbauer { lambda_raw: 0.0 },
            BasisMode::FullJacobi => BasisParams::FullJacobi {
                alpha_raw: CHEBYSHEV_POINT,
                beta_raw: CHEBYSHEV_POINT,
            },
        }
    }

    pub fn mode(&self) -> BasisMode {
        match self {
            BasisParams::Static => BasisMode::Static,
            BasisParams::Gegenbauer { .. } => BasisMode::Gegenbauer,
            BasisParams::FullJacobi { .. } => BasisMode::FullJacobi,
        }
    }
}

/// Effective `(α, β)` after the domain floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub alpha: f64,
    pub beta: f64,
    pub clamped: bool,
}

fn floor(v: f64, clamped: &mut bool) -> f64 {
    if v < DOMAIN_FLOOR {
        *clamped = true;
        DOMAIN_FLOOR
    } else {
        v
    }
}

pub fn resolve_params(p: &BasisParams) -> ResolvedParams {
    let (alpha, beta) = match *p {
        BasisParams::Static => (CHEBYSHEV_POINT, CHEBYSHEV_POINT),
        BasisParams::Gegenbauer { lambda_raw } => {
            let a = lambda_raw + CHEBYSHEV_POINT;
            (a, a)
        }
        BasisParams::FullJacobi { alpha_raw, beta_raw } => (alpha_raw, beta_raw),
    };
    let mut clamped = false;
    let alpha = floor(alpha, &mut clamped);
    let beta = floor(beta, &mut clamped);
    ResolvedParams {
        alpha,
        beta,
        clamped,
    }
}

fn check_domain(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(AopfError::DomainError(format!(
            "need α, β > -1, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

/// `P_k = (a·x + b)·P_{k-1} + c·P_{k-2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn recurrence_coeffs(k: usize, alpha: f64, beta: f64) -> Result<RecurrenceCoeffs> {
    if k < 2 {
        return Err(AopfError::DomainError(format!(
            "three-term recurrence starts at k = 2, got {k}"
        )));
    }
    check_domain(alpha, beta)?;
    // Operation order mirrors `coeff_vars` so both paths round identically.
    let kf = k as f64;
    let ab = alpha + beta;
    let s = ab + 2.0 * kf;
    let denom = (ab + kf) * (2.0 * kf) * (s - 2.0);
    Ok(RecurrenceCoeffs {
        a: (s - 1.0) * s * (s - 2.0) / denom,
        b: (s - 1.0) * (alpha * alpha - beta * beta) / denom,
        c: (alpha + (kf - 1.0)) * (beta + (kf - 1.0)) * -2.0 * s / denom,
    })
}

/// `P_k^{(α,β)}(x)` by the three-term recurrence.
pub fn jacobi_scalar(k: usize, alpha: f64, beta: f64, x: f64) -> Result<f64> {
    check_domain(alpha, beta)?;
    let p0 = 1.0;
    if k == 0 {
        return Ok(p0);
    }
    let p1 = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0;
    let (mut prev2, mut prev) = (p0, p1);
    for j in 2..=k {
        let RecurrenceCoeffs { a, b, c } = recurrence_coeffs(j, alpha, beta)?;
        let next = (a * x + b) * prev + c * prev2;
        prev2 = prev;
        prev = next;
    }
    Ok(prev)
}

/// Raw basis inputs on a tape: constants for [`BasisMode::Static`], leaves
/// or parameters otherwise.
#[derive(Debug, Clone, Copy)]
pub enum RawBasis {
    Static,
    Gegenbauer(Var),
    FullJacobi(Var, Var),
}

/// Effective `(α, β)` as tape scalars. For Gegenbauer both fields are the
/// same variable.
#[derive(Debug, Clone, Copy)]
pub struct BasisVars {
    pub alpha: Var,
    pub beta: Var,
}

impl BasisVars {
    pub fn resolve(tape: &mut Tape, raw: RawBasis) -> Self {
        match raw {
            RawBasis::Static => {
                let alpha = tape.scalar(CHEBYSHEV_POINT);
                let beta = tape.scalar(CHEBYSHEV_POINT);
                Self { alpha, beta }
            }
            RawBasis::Gegenbauer(lambda) => {
                let shifted = tape.add_const(lambda, CHEBYSHEV_POINT);
                let a = tape.clamp_min(shifted, DOMAIN_FLOOR);
                Self { alpha: a, beta: a }
            }
            RawBasis::FullJacobi(a, b) => Self {
                alpha: tape.clamp_min(a, DOMAIN_FLOOR),
                beta: tape.clamp_min(b, DOMAIN_FLOOR),
            },
        }
    }

    /// Records `params` as differentiable leaves and resolves them.
    pub fn from_params(tape: &mut Tape, params: &BasisParams) -> Self {
        let raw = match *params {
            BasisParams::Static => RawBasis::Static,
            BasisParams::Gegenbauer { lambda_raw } => {
                RawBasis::Gegenbauer(tape.leaf(Array2::from_elem((1, 1), lambda_raw)))
            }
            BasisParams::FullJacobi { alpha_raw, beta_raw } => RawBasis::FullJacobi(
                tape.leaf(Array2::from_elem((1, 1), alpha_raw)),
                tape.leaf(Array2::from_elem((1, 1), beta_raw)),
            ),
        };
        Self::resolve(tape, raw)
    }
}

/// Tape form of [`recurrence_coeffs`], same arithmetic order.
fn coeff_vars(tape: &mut Tape, k: usize, v: BasisVars) -> Result<(Var, Var, Var)> {
    let kf = k as f64;
    let ab = tape.add(v.alpha, v.beta)?;
    let s = tape.add_const(ab, 2.0 * kf);
    let k_ab = tape.add_const(ab, kf);
    let s_m1 = tape.add_const(s, -1.0);
    let s_m2 = tape.add_const(s, -2.0);

    let d0 = tape.mul_const(k_ab, 2.0 * kf);
    let denom = tape.mul(d0, s_m2)?;

    let a0 = tape.mul(s_m1, s)?;
    let a1 = tape.mul(a0, s_m2)?;
    let a = tape.div(a1, denom)?;

    let aa = tape.mul(v.alpha, v.alpha)?;
    let bb = tape.mul(v.beta, v.beta)?;
    let diff = tape.sub(aa, bb)?;
    let b0 = tape.mul(s_m1, diff)?;
    let b = tape.div(b0, denom)?;

    let ka = tape.add_const(v.alpha, kf - 1.0);
    let kb = tape.add_const(v.beta, kf - 1.0);
    let c0 = tape.mul(ka, kb)?;
    let c1 = tape.mul_const(c0, -2.0);
    let c2 = tape.mul(c1, s)?;
    let c = tape.div(c2, denom)?;
    Ok((a, b, c))
}

/// Propagates `x` through `P_0..P_K` of the basis applied to `lhat`.
///
/// Returns `Z_0..Z_K`. With `stabilize`, every `Z_k` (including `Z_0`) is
/// layer-normalized per node before the next step reads it; without it,
/// `Z_k = P_k^{(α,β)}(L̂) · x` exactly.
pub fn propagate_basis(
    tape: &mut Tape,
    lhat: &Arc<CsrMatrix>,
    x: Var,
    k_max: usize,
    basis: BasisVars,
    stabilize: bool,
) -> Result<Vec<Var>> {
    if tape.value(x).nrows() != lhat.dim() {
        return Err(AopfError::shape(
            "propagate_basis",
            format!(
                "operator is {}x{}, features have {} rows",
                lhat.dim(),
                lhat.dim(),
                tape.value(x).nrows()
            ),
        ));
    }
    let norm = |tape: &mut Tape, v: Var| if stabilize { tape.layer_norm(v) } else { v };

    let z0 = norm(tape, x);
    let mut out = vec![z0];
    if k_max == 0 {
        return Ok(out);
    }

    // P_1(t) = (α+1) + q·(t-1) with q = (α+β+2)/2, i.e. q·t + (α+1-q).
    let ab = tape.add(basis.alpha, basis.beta)?;
    let ab2 = tape.add_const(ab, 2.0);
    let q = tape.mul_const(ab2, 0.5);
    let a1 = tape.add_const(basis.alpha, 1.0);
    let r = tape.sub(a1, q)?;
    let z1 = tape.recurrence_step(lhat, z0, None, q, r)?;
    out.push(norm(tape, z1));

    for k in 2..=k_max {
        let (a, b, c) = coeff_vars(tape, k, basis)?;
        let zk = tape.recurrence_step(lhat, out[k - 1], Some((out[k - 2], c)), a, b)?;
        out.push(norm(tape, zk));
    }
    Ok(out)
}

/// Non-differentiable convenience wrapper around [`propagate_basis`].
pub fn propagate_basis_values(
    lhat: &ShiftedLaplacian,
    x: &Array2<f64>,
    k_max: usize,
    params: &BasisParams,
    stabilize: bool,
) -> Result<Vec<Array2<f64>>> {
    let mut tape = Tape::new();
    let xv = tape.constant(x.clone());
    let basis = BasisVars::from_params(&mut tape, params);
    let zs = propagate_basis(&mut tape, lhat.shared(), xv, k_max, basis, stabilize)?;
    Ok(zs.into_iter().map(|z| tape.value(z).clone()).collect())
}

/// Shape of the filter `Σ_k θ_k P_k(t)` sampled at `points`; handy for
/// inspecting what a basis can express on the spectrum.
pub fn frequency_response(
    theta: &[f64],
    alpha: f64,
    beta: f64,
    points: &[f64],
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&t| {
            theta.iter().enumerate().try_fold(0.0, |acc, (k, &w)| {
                Ok(acc + w * jacobi_scalar(k, alpha, beta, t)?)
            })
        })
        .collect()
}
