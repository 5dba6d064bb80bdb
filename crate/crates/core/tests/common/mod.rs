//! Independent test oracles. Nothing here calls the library's recurrence
//! code: polynomials come from the explicit hypergeometric-style sum and the
//! operator comes straight from its dense definition.

#![allow(dead_code)]

use aopf::graph::{shifted_laplacian, ShiftedLaplacian, SparseGraph};
use ndarray::Array2;
use rand::Rng;

/// Generalized binomial coefficient `C(z, m)` for real `z`.
pub fn binom(z: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (z - i as f64) / (m - i) as f64)
}

/// `P_n^{(α,β)}(x) = Σ_s C(n+α, n-s) C(n+β, s) ((x-1)/2)^s ((x+1)/2)^(n-s)`.
pub fn jacobi_explicit(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    let nf = n as f64;
    (0..=n)
        .map(|s| {
            binom(nf + alpha, n - s)
                * binom(nf + beta, s)
                * ((x - 1.0) / 2.0).powi(s as i32)
                * ((x + 1.0) / 2.0).powi((n - s) as i32)
        })
        .sum()
}

/// The same sum with the scalar replaced by a dense symmetric matrix. The
/// two half-shifted factors commute, so the sum is well defined.
pub fn jacobi_matrix(n: usize, alpha: f64, beta: f64, m: &Array2<f64>) -> Array2<f64> {
    let dim = m.nrows();
    let eye = Array2::<f64>::eye(dim);
    let lo = (m - &eye) * 0.5;
    let hi = (m + &eye) * 0.5;
    let powers = |base: &Array2<f64>| {
        let mut out = vec![eye.clone()];
        for i in 1..=n {
            let next = out[i - 1].dot(base);
            out.push(next);
        }
        out
    };
    let lo_p = powers(&lo);
    let hi_p = powers(&hi);
    let nf = n as f64;
    let mut acc = Array2::zeros((dim, dim));
    for s in 0..=n {
        let coef = binom(nf + alpha, n - s) * binom(nf + beta, s);
        acc = acc + lo_p[s].dot(&hi_p[n - s]) * coef;
    }
    acc
}

/// Chebyshev polynomials of the first kind applied to `x` through an
/// operator: `T_0 x = x`, `T_1 x = M x`, `T_k x = 2 M T_{k-1} x - T_{k-2} x`.
pub fn chebyshev_blocks(m: &Array2<f64>, x: &Array2<f64>, k_max: usize) -> Vec<Array2<f64>> {
    let mut out = vec![x.clone()];
    if k_max >= 1 {
        out.push(m.dot(x));
    }
    for k in 2..=k_max {
        let next = m.dot(&out[k - 1]) * 2.0 - &out[k - 2];
        out.push(next);
    }
    out
}

/// `-D^{-1/2} (A + I) D^{-1/2}` built entry by entry from an edge list.
pub fn dense_shifted_laplacian(n: usize, edges: &[(usize, usize)], self_loops: bool) -> Array2<f64> {
    let mut a = Array2::<f64>::zeros((n, n));
    for &(s, d) in edges {
        a[[s, d]] = 1.0;
        a[[d, s]] = 1.0;
    }
    if self_loops {
        for i in 0..n {
            a[[i, i]] = 1.0;
        }
    }
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| {
        if deg[i] == 0.0 || deg[j] == 0.0 {
            0.0
        } else {
            -a[[i, j]] / (deg[i] * deg[j]).sqrt()
        }
    })
}

/// Cyclic Jacobi eigensolver for a dense symmetric matrix. Returns
/// eigenvalues and the matrix whose columns are the eigenvectors. Sweeps
/// until the off-diagonal mass is below `1e-26` of the total.
pub fn eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = Array2::<f64>::eye(n);
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off <= 1e-26 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[[i, i]]).collect(), v)
}

pub fn eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    eigen(m).0
}

/// `V f(Λ) Vᵀ x` for a symmetric `m`.
pub fn spectral_apply(m: &Array2<f64>, x: &Array2<f64>, f: impl Fn(f64) -> f64) -> Array2<f64> {
    let (values, v) = eigen(m);
    let n = m.nrows();
    let mut op = Array2::<f64>::zeros((n, n));
    for (k, &lam) in values.iter().enumerate() {
        let fl = f(lam);
        for i in 0..n {
            for j in 0..n {
                op[[i, j]] += v[[i, k]] * fl * v[[j, k]];
            }
        }
    }
    op.dot(x)
}

/// Undirected Erdős–Rényi edge list, `src < dst`.
pub fn random_edges<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
}

/// Random graph and its library operator.
pub fn random_operator<R: Rng>(n: usize, rng: &mut R) -> (Vec<(usize, usize)>, ShiftedLaplacian) {
    let p = rng.gen_range(0.1..0.5);
    let edges = random_edges(n, p, rng);
    let g = SparseGraph::from_edge_list(&edges, n, true).expect("valid edges");
    let lhat = shifted_laplacian(&g, true).expect("symmetric");
    (edges, lhat)
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
