//! Non-intrusive least-squares polynomial chaos: fitting, evaluation,
//! moments, validation R², total Sobol indices and surrogate quantiles.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inputs::{sample_standard, CoordinateFrame, Design, ParameterSpace, SampleMatrix};
use crate::orthopoly::{design_from_rows, BasisSet};

/// Condition estimate above which a fit carries a warning.
pub const CONDITION_WARNING: f64 = 1e10;
/// Oversampling ratio below which a fit carries a warning.
pub const OVERSAMPLING_WARNING: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub n_train: usize,
    pub n_val: usize,
    pub seed: u64,
}

/// Fitted expansion `Σ a_k Ψ_k` over a [`BasisSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PceModel {
    pub basis: BasisSet,
    pub coefficients: Vec<f64>,
    pub r_squared: Option<f64>,
    pub training_meta: TrainingMeta,
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub space_ref: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PceModel {
    /// Builds a model from known coefficients.
    pub fn from_coefficients(basis: BasisSet, coefficients: Vec<f64>, parameters: Vec<String>) -> Result<Self> {
        if coefficients.len() != basis.cardinality() {
            return Err(Error::DimensionMismatch {
                expected: basis.cardinality(),
                got: coefficients.len(),
            });
        }
        if !parameters.is_empty() && parameters.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: parameters.len(),
            });
        }
        Ok(PceModel {
            basis,
            coefficients,
            r_squared: None,
            training_meta: TrainingMeta {
                n_train: 0,
                n_val: 0,
                seed: 0,
            },
            parameters,
            space_ref: String::new(),
            warnings: Vec::new(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn variance(&self) -> f64 {
        self.coefficients[1..].iter().map(|a| a * a).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
}

/// Total Sobol index per parameter, in basis dimension order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolTotal {
    pub names: Vec<String>,
    pub indices: Vec<f64>,
}

impl SobolTotal {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.indices[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.indices.iter().copied())
    }
}

/// Quantile-based confidence bound at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiBound {
    pub level: f64,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
    /// `mean ± z·std` bounds reported alongside the quantile bounds.
    pub normal_lower: f64,
    pub normal_upper: f64,
    pub n_eval_samples: usize,
    pub seed: u64,
}

/// Seeded train/validation split of `0..n`.
pub fn split_indices(n: usize, validation_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&validation_fraction) {
        return Err(Error::InvalidArgument(format!(
            "validation fraction {validation_fraction} must lie in [0, 1)"
        )));
    }
    let n_val = (validation_fraction * n as f64).round() as usize;
    if validation_fraction > 0.0 && n_val < 2 {
        return Err(Error::TooFewValidation(n_val));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    // separate stream from the one that drew the samples
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(SPLIT_STREAM));
    idx.shuffle(&mut rng);
    let val = idx.split_off(n - n_val);
    Ok((idx, val))
}

const SPLIT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Orthogonal-factorization least squares on a fixed design, reusable for
/// many output vectors that share the same samples.
#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    basis: BasisSet,
    train: Vec<usize>,
    val: Vec<usize>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    val_design: DMatrix<f64>,
    condition: f64,
    warnings: Vec<String>,
    meta: TrainingMeta,
    parameters: Vec<String>,
    space_ref: String,
}

impl LeastSquaresFit {
    /// Splits `samples`, builds the training design and factors it.
    pub fn new(samples: &SampleMatrix, basis: &BasisSet, validation_fraction: f64) -> Result<Self> {
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
        let (train, val) = split_indices(samples.n_rows(), validation_fraction, samples.seed)?;
        let terms = basis.cardinality();
        if train.len() < terms {
            return Err(Error::Underdetermined {
                rows: train.len(),
                terms,
            });
        }
        let mut warnings = Vec::new();
        if (train.len() as f64) < OVERSAMPLING_WARNING * terms as f64 {
            warnings.push(format!(
                "only {} training rows for {terms} terms (below {OVERSAMPLING_WARNING}x)",
                train.len()
            ));
        }
        let rows: Vec<&[f64]> = train.iter().map(|&i| samples.row(i)).collect();
        let design = design_from_rows(basis, &rows);
        let qr = design.qr();
        let q = qr.q();
        let r = qr.r();
        let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 || !min.is_finite() {
            return Err(Error::InvalidArgument("design matrix is rank deficient".into()));
        }
        let condition = max / min;
        if condition > CONDITION_WARNING {
            warnings.push(format!("ill-conditioned design (estimate {condition:.3e})"));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        let val_rows: Vec<&[f64]> = val.iter().map(|&i| samples.row(i)).collect();
        let val_design = design_from_rows(basis, &val_rows);
        Ok(LeastSquaresFit {
            basis: basis.clone(),
            meta: TrainingMeta {
                n_train: train.len(),
                n_val: val.len(),
                seed: samples.seed,
            },
            train,
            val,
            q,
            r,
            val_design,
            condition,
            warnings,
            parameters: samples.names().to_vec(),
            space_ref: samples.space_id.clone(),
        })
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train
    }

    pub fn validation_indices(&self) -> &[usize] {
        &self.val
    }

    /// Coefficients and validation R² for `outputs` (one per sample row).
    pub fn solve(&self, outputs: &[f64]) -> Result<(Vec<f64>, Option<f64>)> {
        let n = self.train.len() + self.val.len();
        if outputs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: outputs.len(),
            });
        }
        let y = DVector::from_iterator(self.train.len(), self.train.iter().map(|&i| outputs[i]));
        let qty = self.q.tr_mul(&y);
        let a = self
            .r
            .solve_upper_triangular(&qty)
            .ok_or_else(|| Error::InvalidArgument("singular triangular factor".into()))?;
        let r2 = if self.val.is_empty() {
            None
        } else {
            let pred = &self.val_design * &a;
            let obs: Vec<f64> = self.val.iter().map(|&i| outputs[i]).collect();
            r_squared_values(pred.as_slice(), &obs)?
        };
        Ok((a.as_slice().to_vec(), r2))
    }

    pub fn fit(&self, outputs: &[f64]) -> Result<PceModel> {
        let (coefficients, r_squared) = self.solve(outputs)?;
        Ok(PceModel {
            basis: self.basis.clone(),
            coefficients,
            r_squared,
            training_meta: self.meta,
            parameters: self.parameters.clone(),
            space_ref: self.space_ref.clone(),
            warnings: self.warnings.clone(),
        })
    }
}

/// Least-squares PCE fit with a seeded hold-out split for R².
pub fn fit_least_squares(
    samples: &SampleMatrix,
    outputs: &[f64],
    basis: &BasisSet,
    validation_fraction: f64,
) -> Result<PceModel> {
    LeastSquaresFit::new(samples, basis, validation_fraction)?.fit(outputs)
}

pub fn evaluate(model: &PceModel, point: &[f64]) -> Result<f64> {
    let row = model.basis.eval_row(point)?;
    Ok(row.iter().zip(&model.coefficients).map(|(p, a)| p * a).sum())
}

pub fn moments(model: &PceModel) -> Moments {
    let variance = model.variance();
    Moments {
        mean: model.mean(),
        variance,
        std: variance.sqrt(),
    }
}

// relative size below which a sum of squares counts as zero
const ZERO_SS: f64 = 1e-26;

/// `1 - SS_res / SS_tot`. Returns `Ok(None)` when the observations have no
/// variance but the predictions miss them; a perfect fit of constant data is 1.
pub fn r_squared_values(predicted: &[f64], observed: &[f64]) -> Result<Option<f64>> {
    if predicted.len() != observed.len() {
        return Err(Error::DimensionMismatch {
            expected: observed.len(),
            got: predicted.len(),
        });
    }
    let n = observed.len();
    if n < 2 {
        return Err(Error::TooFewValidation(n));
    }
    let mean = observed.iter().sum::<f64>() / n as f64;
    let scale: f64 = observed.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let ss_tot: f64 = observed.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, y)| (y - p).powi(2))
        .sum();
    if ss_tot <= ZERO_SS * scale {
        return Ok((ss_res <= ZERO_SS * scale).then_some(1.0));
    }
    Ok(Some(1.0 - ss_res / ss_tot))
}

/// Validation R² of `model` on held-out data.
pub fn r_squared(model: &PceModel, val_samples: &SampleMatrix, val_outputs: &[f64]) -> Result<Option<f64>> {
    val_samples.require_frame(CoordinateFrame::Standard)?;
    if val_samples.n_rows() != val_outputs.len() {
        return Err(Error::DimensionMismatch {
            expected: val_samples.n_rows(),
            got: val_outputs.len(),
        });
    }
    let pred = val_samples
        .rows()
        .map(|r| evaluate(model, r))
        .collect::<Result<Vec<_>>>()?;
    r_squared_values(&pred, val_outputs)
}

/// Total Sobol indices from the coefficients: the share of variance carried
/// by every term in which a parameter appears.
pub fn sobol_total(model: &PceModel) -> Result<SobolTotal> {
    let indices = sobol_total_raw(&model.basis, &model.coefficients)?;
    let names = if model.parameters.len() == indices.len() {
        model.parameters.clone()
    } else {
        (0..indices.len()).map(|i| format!("x{i}")).collect()
    };
    Ok(SobolTotal { names, indices })
}

pub(crate) fn sobol_total_raw(basis: &BasisSet, coefficients: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = coefficients.iter().map(|a| a * a).sum();
    let variance: f64 = coefficients[1..].iter().map(|a| a * a).sum();
    if variance <= 0.0 || variance <= ZERO_SS * total {
        return Err(Error::ZeroVariance);
    }
    let mut s = vec![0.0; basis.dim()];
    for (alpha, a) in basis.indices().iter().zip(coefficients).skip(1) {
        let share = a * a / variance;
        for (i, &d) in alpha.degrees().iter().enumerate() {
            if d > 0 {
                s[i] += share;
            }
        }
    }
    Ok(s)
}

/// Type-7 (linear interpolation) empirical quantiles. Reorders `values`.
pub fn empirical_quantiles(values: &mut [f64], probs: &[f64]) -> Vec<f64> {
    let n = values.len();
    assert!(n > 0, "quantiles of an empty sample");
    probs
        .iter()
        .map(|&q| {
            let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let (_, lo_val, rest) = values.select_nth_unstable_by(lo, f64::total_cmp);
            let lo_val = *lo_val;
            let frac = h - lo as f64;
            if frac == 0.0 || rest.is_empty() {
                return lo_val;
            }
            let hi_val = rest.iter().copied().fold(f64::INFINITY, f64::min);
            lo_val + frac * (hi_val - lo_val)
        })
        .collect()
}

/// Basis evaluated on a fixed set of seeded standard-space draws, shared by
/// every model built on the same basis.
#[derive(Debug, Clone)]
pub struct SurrogateDraws {
    design: DMatrix<f64>,
    seed: u64,
}

impl SurrogateDraws {
    pub fn new(space: &ParameterSpace, basis: &BasisSet, n_samples: usize, seed: u64) -> Result<Self> {
        if space.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: space.dim(),
            });
        }
        let draws = sample_standard(space, n_samples, seed, Design::Random)?;
        let rows: Vec<&[f64]> = draws.rows().collect();
        let design = if space.dim() == 0 {
            DMatrix::from_element(n_samples, 1, 1.0)
        } else {
            design_from_rows(basis, &rows)
        };
        Ok(SurrogateDraws { design, seed })
    }

    pub fn len(&self) -> usize {
        self.design.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.design.nrows() == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Surrogate values at every draw.
    pub fn evaluate(&self, coefficients: &[f64]) -> Vec<f64> {
        let a = DVector::from_column_slice(coefficients);
        (&self.design * a).as_slice().to_vec()
    }

    pub fn ci(&self, coefficients: &[f64], level: f64) -> CiBound {
        let mut values = self.evaluate(coefficients);
        ci_from_values(&mut values, coefficients, level, self.seed)
    }

    /// Surrogate values for several coefficient vectors; column `j` belongs
    /// to `coefficients[j]`.
    pub fn evaluate_batch(&self, coefficients: &[&[f64]]) -> DMatrix<f64> {
        let p = self.design.ncols();
        let mut a = DMatrix::zeros(p, coefficients.len());
        for (j, c) in coefficients.iter().enumerate() {
            assert_eq!(c.len(), p, "coefficient vector length");
            a.column_mut(j).copy_from_slice(c);
        }
        &self.design * a
    }

    /// [`SurrogateDraws::ci`] for each vector, up to rounding.
    pub fn ci_batch(&self, coefficients: &[&[f64]], level: f64) -> Vec<CiBound> {
        let mut values = self.evaluate_batch(coefficients);
        coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let mut col = values.column_mut(j);
                ci_from_values(col.as_mut_slice(), c, level, self.seed)
            })
            .collect()
    }
}

fn ci_from_values(values: &mut [f64], coefficients: &[f64], level: f64, seed: u64) -> CiBound {
    let tail = (1.0 - level) / 2.0;
    let q = empirical_quantiles(values, &[tail, 0.5, 1.0 - tail]);
    let mean = coefficients[0];
    let std = coefficients[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
    let z = normal_quantile(1.0 - tail);
    CiBound {
        level,
        lower: q[0],
        median: q[1],
        upper: q[2],
        normal_lower: mean - z * std,
        normal_upper: mean + z * std,
        n_eval_samples: values.len(),
        seed,
    }
}

pub(crate) fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(p)
}

/// Central `level` interval of the surrogate over `n_samples` random draws.
pub fn surrogate_quantiles(
    model: &PceModel,
    space: &ParameterSpace,
    level: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CiBound> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level {level} must lie in (0, 1)")));
    }
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "at least 100 surrogate samples are required, got {n_samples}"
        )));
    }
    let draws = SurrogateDraws::new(space, &model.basis, n_samples, seed)?;
    Ok(draws.ci(&model.coefficients, level))
}
