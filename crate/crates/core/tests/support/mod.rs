//! Independent reference computations for the integration tests. The oracles
//! never call into the library's polynomial, sampling or regression code;
//! `models` holds analytic stand-ins for the cell model.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss rule for the probability measure of a family, from the eigen-
/// decomposition of the Jacobi matrix of the monic recurrence.
pub fn gauss_rule(hermite: bool, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = if hermite {
            kf.sqrt()
        } else {
            kf / (4.0 * kf * kf - 1.0).sqrt()
        };
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let nodes = eig.eigenvalues.as_slice().to_vec();
    let weights = (0..n).map(|i| eig.eigenvectors[(0, i)].powi(2)).collect();
    (nodes, weights)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn binomial_f(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `He_k(x) / sqrt(k!)` from the explicit sum.
pub fn hermite_explicit(k: usize, x: f64) -> f64 {
    let mut s = 0.0;
    for m in 0..=k / 2 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * x.powi((k - 2 * m) as i32) / (factorial(m) * factorial(k - 2 * m) * 2f64.powi(m as i32));
    }
    s * factorial(k) / factorial(k).sqrt()
}

/// `P_k(u) * sqrt(2k + 1)` from the explicit sum.
pub fn legendre_explicit(k: usize, u: f64) -> f64 {
    let mut s = 0.0;
    for m in 0..=k / 2 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial_f(k, m) * binomial_f(2 * k - 2 * m, k) * u.powi((k - 2 * m) as i32);
    }
    s / 2f64.powi(k as i32) * ((2 * k + 1) as f64).sqrt()
}

/// `Σ_k c_k Π_d ψ_{α_kd}(x_d)` from the explicit sums; `hermite[d]` picks
/// the family of coordinate `d`.
pub fn explicit_expansion(hermite: &[bool], indices: &[&[u32]], coefs: &[f64], x: &[f64]) -> f64 {
    indices
        .iter()
        .zip(coefs)
        .map(|(alpha, c)| {
            let mut v = *c;
            for ((&h, &d), &xi) in hermite.iter().zip(alpha.iter()).zip(x) {
                v *= if h {
                    hermite_explicit(d as usize, xi)
                } else {
                    legendre_explicit(d as usize, xi)
                };
            }
            v
        })
        .sum()
}

/// Pascal's triangle, row by row.
pub fn binomial_table(max: usize) -> Vec<Vec<u128>> {
    let mut t = vec![vec![1u128]];
    for n in 1..=max {
        let prev = &t[n - 1];
        let mut row = vec![1u128; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] + prev[k];
        }
        t.push(row);
    }
    t
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0 / base as f64;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f /= base as f64;
    }
    r
}

/// Halton point `index` (starting at 1) in `[0, 1)^dim`.
pub fn halton(index: u64, dim: usize, out: &mut [f64]) {
    for d in 0..dim {
        out[d] = radical_inverse(index, PRIMES[d]);
    }
}

pub fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin()
}

pub struct QmcReference {
    pub mean: f64,
    pub std: f64,
    pub total: Vec<f64>,
}

/// Mean and standard deviation from `n` Halton points plus Jansen
/// pick-freeze total indices from a second, independent block of
/// coordinates. `map` takes `[0, 1)^dim` to physical inputs.
pub fn qmc_reference(f: impl Fn(&[f64]) -> f64, map: impl Fn(&[f64], &mut [f64]), dim: usize, n: u64) -> QmcReference {
    let mut u = vec![0.0; 2 * dim];
    let (mut a, mut b, mut ab) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut jansen = vec![0.0; dim];
    for i in 1..=n {
        halton(i, 2 * dim, &mut u);
        map(&u[..dim], &mut a);
        map(&u[dim..], &mut b);
        let fa = f(&a);
        sum += fa;
        sum2 += fa * fa;
        for k in 0..dim {
            ab.copy_from_slice(&a);
            ab[k] = b[k];
            jansen[k] += (fa - f(&ab)).powi(2);
        }
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = sum2 / nf - mean * mean;
    QmcReference {
        mean,
        std: var.sqrt(),
        total: jansen.iter().map(|s| s / (2.0 * nf) / var).collect(),
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

pub mod models;
