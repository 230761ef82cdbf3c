//! Orthonormal univariate families, total-degree multi-index sets and
//! tensor-product basis evaluation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inputs::{CoordinateFrame, SampleMatrix};

/// Highest polynomial degree accepted when building a basis.
pub const MAX_DEGREE: usize = 10;
/// Default cap on the number of basis terms.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;
/// Identifies the coefficient layout produced by [`total_degree_indices`].
pub const ORDERING: &str = "graded-lex-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolynomialFamily {
    /// Probabilists' Hermite, orthonormal under N(0, 1).
    HermiteProbabilists,
    /// Legendre, orthonormal under the density 1/2 on [-1, 1].
    Legendre,
}

impl PolynomialFamily {
    /// Orthonormal polynomial of degree `k` at `x`. No support check.
    pub fn eval(self, k: usize, x: f64) -> f64 {
        match self {
            PolynomialFamily::HermiteProbabilists => hermite(k, x),
            PolynomialFamily::Legendre => legendre(k, x),
        }
    }

    /// Fills `out[k]` with the degree-`k` orthonormal value for `k < out.len()`.
    pub fn eval_all(self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() == 1 {
            return;
        }
        match self {
            PolynomialFamily::HermiteProbabilists => {
                // normalised form of He_{k+1} = x He_k - k He_{k-1}
                out[1] = x;
                for k in 1..out.len() - 1 {
                    let kf = k as f64;
                    out[k + 1] = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
                }
            }
            PolynomialFamily::Legendre => {
                let mut p_prev = 1.0;
                let mut p = x;
                out[1] = 3f64.sqrt() * x;
                for k in 1..out.len() - 1 {
                    let kf = k as f64;
                    let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
                    p_prev = p;
                    p = next;
                    out[k + 1] = p * (2.0 * kf + 3.0).sqrt();
                }
            }
        }
    }

    pub fn in_support(self, x: f64) -> bool {
        match self {
            PolynomialFamily::HermiteProbabilists => x.is_finite(),
            PolynomialFamily::Legendre => (-1.0..=1.0).contains(&x),
        }
    }
}

fn hermite(k: usize, x: f64) -> f64 {
    let (mut h_prev, mut h) = (1.0, x);
    if k == 0 {
        return 1.0;
    }
    let mut log_fact = 0.0;
    for j in 1..k {
        let next = x * h - j as f64 * h_prev;
        h_prev = h;
        h = next;
        log_fact += ((j + 1) as f64).ln();
    }
    h / (0.5 * log_fact).exp()
}

fn legendre(k: usize, u: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut p_prev, mut p) = (1.0, u);
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * u * p - jf * p_prev) / (jf + 1.0);
        p_prev = p;
        p = next;
    }
    p * ((2 * k + 1) as f64).sqrt()
}

/// `He_k(x) / sqrt(k!)` with `He` the probabilists' Hermite polynomial.
pub fn eval_hermite_orthonormal(k: usize, x: f64) -> f64 {
    hermite(k, x)
}

/// `P_k(u) * sqrt(2k + 1)` with `P` the Legendre polynomial.
pub fn eval_legendre_orthonormal(k: usize, u: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::OutOfSupport { index: 0, value: u });
    }
    Ok(legendre(k, u))
}

/// Per-dimension degree vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }
}

/// `binomial(n + p, p)` without overflow for the sizes we accept.
pub fn total_degree_count(n: usize, p: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=p as u128 {
        c = c * (n as u128 + i) / i;
        if c > u64::MAX as u128 {
            return c;
        }
    }
    c
}

/// All multi-indices of `n` dimensions with total degree at most `p`.
///
/// Ordered by total degree, then lexicographically with larger leading
/// degrees first, so `(1,0)` precedes `(0,1)` and `(2,0)` precedes `(1,1)`.
pub fn total_degree_indices(n: usize, p: usize) -> Result<Vec<MultiIndex>> {
    total_degree_indices_capped(n, p, DEFAULT_TERM_CAP)
}

pub fn total_degree_indices_capped(n: usize, p: usize, cap: usize) -> Result<Vec<MultiIndex>> {
    let count = total_degree_count(n, p);
    if count > cap as u128 {
        return Err(Error::BasisTooLarge { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; n];
    for degree in 0..=p as u32 {
        compositions(&mut current, 0, degree, &mut out);
    }
    Ok(out)
}

// every way to spread `remaining` over current[pos..], largest first
fn compositions(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 >= current.len() {
        if let Some(last) = current.last_mut() {
            *last = remaining;
            out.push(MultiIndex(current.to_vec()));
        } else if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for d in (0..=remaining).rev() {
        current[pos] = d;
        compositions(current, pos + 1, remaining - d, out);
    }
    current[pos] = 0;
}

/// Families per dimension plus the ordered multi-index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    families: Vec<PolynomialFamily>,
    #[serde(rename = "p")]
    max_degree: usize,
    indices: Vec<MultiIndex>,
    #[serde(default = "default_ordering")]
    ordering: String,
}

fn default_ordering() -> String {
    ORDERING.to_string()
}

impl BasisSet {
    /// Total-degree basis. A zero-dimensional basis holds only the constant.
    pub fn total_degree(families: Vec<PolynomialFamily>, p: usize) -> Result<Self> {
        Self::total_degree_capped(families, p, DEFAULT_TERM_CAP)
    }

    pub fn total_degree_capped(families: Vec<PolynomialFamily>, p: usize, cap: usize) -> Result<Self> {
        if p > MAX_DEGREE {
            return Err(Error::DegreeTooLarge {
                degree: p,
                cap: MAX_DEGREE,
            });
        }
        let indices = total_degree_indices_capped(families.len(), p, cap)?;
        Ok(BasisSet {
            families,
            max_degree: p,
            indices,
            ordering: default_ordering(),
        })
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn families(&self) -> &[PolynomialFamily] {
        &self.families
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn ordering(&self) -> &str {
        &self.ordering
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        for (i, (f, &x)) in self.families.iter().zip(point).enumerate() {
            if !f.in_support(x) {
                return Err(Error::OutOfSupport { index: i, value: x });
            }
        }
        Ok(())
    }

    /// Evaluates every basis function at `point` into `out` (length P).
    /// `scratch` must hold `dim * (p + 1)` values. No support check.
    pub fn eval_row_into(&self, point: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let w = self.max_degree + 1;
        for (d, (f, &x)) in self.families.iter().zip(point).enumerate() {
            f.eval_all(x, &mut scratch[d * w..(d + 1) * w]);
        }
        for (slot, alpha) in out.iter_mut().zip(&self.indices) {
            let mut v = 1.0;
            for (d, &deg) in alpha.0.iter().enumerate() {
                if deg > 0 {
                    v *= scratch[d * w + deg as usize];
                }
            }
            *slot = v;
        }
    }

    pub fn eval_row(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        let mut scratch = vec![0.0; self.dim() * (self.max_degree + 1)];
        let mut out = vec![0.0; self.cardinality()];
        self.eval_row_into(point, &mut scratch, &mut out);
        Ok(out)
    }
}

/// Value of the tensor-product basis function `alpha` at `point`.
pub fn eval_multivariate(basis: &BasisSet, alpha: &MultiIndex, point: &[f64]) -> Result<f64> {
    basis.check_point(point)?;
    if alpha.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: alpha.dim(),
        });
    }
    Ok(basis
        .families
        .iter()
        .zip(&alpha.0)
        .zip(point)
        .map(|((f, &k), &x)| f.eval(k as usize, x))
        .product())
}

/// Regression matrix with entry `(j, k) = Ψ_k(sample_j)`.
pub fn design_matrix(basis: &BasisSet, samples: &SampleMatrix) -> Result<DMatrix<f64>> {
    samples.require_frame(CoordinateFrame::Standard)?;
    if samples.n_cols() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: samples.n_cols(),
        });
    }
    for r in samples.rows() {
        basis.check_point(r)?;
    }
    let rows: Vec<&[f64]> = samples.rows().collect();
    Ok(design_from_rows(basis, &rows))
}

pub(crate) fn design_from_rows(basis: &BasisSet, rows: &[&[f64]]) -> DMatrix<f64> {
    let p = basis.cardinality();
    let mut m = DMatrix::zeros(rows.len(), p);
    let mut scratch = vec![0.0; basis.dim() * (basis.max_degree + 1)];
    let mut buf = vec![0.0; p];
    for (j, r) in rows.iter().enumerate() {
        basis.eval_row_into(r, &mut scratch, &mut buf);
        for k in 0..p {
            m[(j, k)] = buf[k];
        }
    }
    m
}
