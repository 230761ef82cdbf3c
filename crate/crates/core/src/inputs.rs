//! Uncertain parameter space, isoprobabilistic transforms and sampling designs.
//!
//! Every parameter is independent. In standard coordinates a Gaussian
//! parameter is N(0, 1) and a uniform parameter is U(-1, 1); the order of
//! the parameters in a [`ParameterSpace`] is the coordinate order used by
//! samples, multi-indices and exported tables.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::orthopoly::PolynomialFamily;

/// Marginal distribution of one uncertain parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub enum Distribution {
    Gaussian { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    #[serde(rename = "type")]
    kind: String,
    a: f64,
    b: f64,
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        match r.kind.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Distribution::gaussian(r.a, r.b),
            "uniform" => Distribution::uniform(r.a, r.b),
            other => Err(Error::InvalidDistribution(format!("unknown type `{other}`"))),
        }
    }
}

impl From<Distribution> for DistributionRepr {
    fn from(d: Distribution) -> Self {
        match d {
            Distribution::Gaussian { mean, std } => DistributionRepr {
                kind: "gaussian".into(),
                a: mean,
                b: std,
            },
            Distribution::Uniform { lo, hi } => DistributionRepr {
                kind: "uniform".into(),
                a: lo,
                b: hi,
            },
        }
    }
}

impl Distribution {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        if !(mean.is_finite() && std.is_finite() && std > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "gaussian needs finite mean and std > 0, got ({mean}, {std})"
            )));
        }
        Ok(Distribution::Gaussian { mean, std })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDistribution(format!(
                "uniform needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Distribution::Uniform { lo, hi })
    }

    /// Orthonormal family of the standard-space image of this distribution.
    pub fn family(&self) -> PolynomialFamily {
        match self {
            Distribution::Gaussian { .. } => PolynomialFamily::HermiteProbabilists,
            Distribution::Uniform { .. } => PolynomialFamily::Legendre,
        }
    }

    /// Maps a standard coordinate to the physical value. Unchecked.
    #[inline]
    pub fn to_physical(&self, s: f64) -> f64 {
        match *self {
            Distribution::Gaussian { mean, std } => mean + std * s,
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * (s + 1.0) * 0.5,
        }
    }

    /// Inverse of [`Distribution::to_physical`].
    #[inline]
    pub fn to_standard(&self, x: f64) -> f64 {
        match *self {
            Distribution::Gaussian { mean, std } => (x - mean) / std,
            Distribution::Uniform { lo, hi } => 2.0 * (x - lo) / (hi - lo) - 1.0,
        }
    }

    /// Standard coordinate at cumulative probability `u` in (0, 1).
    fn standard_quantile(&self, u: f64) -> f64 {
        match self {
            Distribution::Gaussian { .. } => standard_normal().inverse_cdf(u),
            Distribution::Uniform { .. } => 2.0 * u - 1.0,
        }
    }

    fn draw_standard<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Gaussian { .. } => rng.sample(StandardNormal),
            Distribution::Uniform { .. } => rng.random_range(-1.0..=1.0),
        }
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertainParameter {
    pub name: String,
    pub unit: String,
    pub nominal: f64,
    pub dist: Distribution,
}

impl UncertainParameter {
    pub fn new(name: &str, unit: &str, nominal: f64, dist: Distribution) -> Result<Self> {
        let p = UncertainParameter {
            name: name.to_string(),
            unit: unit.to_string(),
            nominal,
            dist,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidParameter {
            name: self.name.clone(),
            reason,
        };
        if self.name.trim().is_empty() {
            return Err(bad("empty name".into()));
        }
        if !self.nominal.is_finite() {
            return Err(bad("nominal value is not finite".into()));
        }
        match self.dist {
            Distribution::Gaussian { mean, std } => {
                if (self.nominal - mean).abs() > 6.0 * std {
                    return Err(bad(format!("nominal {} is beyond 6σ of the mean", self.nominal)));
                }
            }
            Distribution::Uniform { lo, hi } => {
                if self.nominal < lo || self.nominal > hi {
                    return Err(bad(format!("nominal {} is outside [{lo}, {hi}]", self.nominal)));
                }
            }
        }
        Ok(())
    }

    /// Parameters with a positive nominal value are physically positive and
    /// must never be sampled at or below zero.
    pub fn must_be_positive(&self) -> bool {
        self.nominal > 0.0
    }
}

/// Ordered set of independent uncertain parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<UncertainParameter>", into = "Vec<UncertainParameter>")]
pub struct ParameterSpace {
    params: Vec<UncertainParameter>,
}

impl TryFrom<Vec<UncertainParameter>> for ParameterSpace {
    type Error = Error;

    fn try_from(params: Vec<UncertainParameter>) -> Result<Self> {
        ParameterSpace::new(params)
    }
}

impl From<ParameterSpace> for Vec<UncertainParameter> {
    fn from(s: ParameterSpace) -> Self {
        s.params
    }
}

impl ParameterSpace {
    pub fn new(params: Vec<UncertainParameter>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &params {
            p.validate()?;
            if !seen.insert(p.name.as_str()) {
                return Err(Error::DuplicateParameter(p.name.clone()));
            }
        }
        Ok(ParameterSpace { params })
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[UncertainParameter] {
        &self.params
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&UncertainParameter> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn nominal(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.nominal).collect()
    }

    pub fn families(&self) -> Vec<PolynomialFamily> {
        self.params.iter().map(|p| p.dist.family()).collect()
    }

    /// Stable identifier derived from names and distributions (FNV-1a).
    pub fn id(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for p in &self.params {
            feed(p.name.as_bytes());
            let (a, b) = match p.dist {
                Distribution::Gaussian { mean, std } => (mean, std),
                Distribution::Uniform { lo, hi } => (lo, hi),
            };
            feed(&a.to_le_bytes());
            feed(&b.to_le_bytes());
        }
        format!("{h:016x}")
    }

    /// Maps a standard-space point to physical values.
    pub fn to_physical(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(point.len())?;
        self.check_support(point)?;
        Ok(self
            .params
            .iter()
            .zip(point)
            .map(|(p, &s)| p.dist.to_physical(s))
            .collect())
    }

    /// Maps physical values back to standard coordinates.
    pub fn to_standard(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(point.len())?;
        let s: Vec<f64> = self
            .params
            .iter()
            .zip(point)
            .map(|(p, &x)| p.dist.to_standard(x))
            .collect();
        self.check_support(&s)?;
        Ok(s)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    fn check_support(&self, point: &[f64]) -> Result<()> {
        for (i, (p, &s)) in self.params.iter().zip(point).enumerate() {
            if matches!(p.dist, Distribution::Uniform { .. }) && !(-1.0..=1.0).contains(&s) {
                return Err(Error::OutOfSupport { index: i, value: s });
            }
        }
        Ok(())
    }

    /// Subspace holding `names`, in this space's order.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Result<ParameterSpace> {
        let wanted: HashSet<&str> = names.iter().map(|n| n.as_ref()).collect();
        for n in &wanted {
            if self.index_of(n).is_none() {
                return Err(Error::UnknownParameter(n.to_string()));
            }
        }
        Ok(ParameterSpace {
            params: self
                .params
                .iter()
                .filter(|p| wanted.contains(p.name.as_str()))
                .cloned()
                .collect(),
        })
    }
}

fn gaussian(mean: f64, std: f64) -> Distribution {
    Distribution::gaussian(mean, std).expect("reference distribution")
}

fn uniform(lo: f64, hi: f64) -> Distribution {
    Distribution::uniform(lo, hi).expect("reference distribution")
}

/// The 24 uncertain inputs of the reference LiC6/LiCoO2 cell: ambient
/// temperature plus 23 electrochemical and geometric parameters.
pub fn build_reference_space() -> ParameterSpace {
    let rows: [(&str, &str, f64, Distribution); 24] = [
        ("T_amb", "K", 298.15, gaussian(298.15, 1.0)),
        ("Ds_p", "m^2/s", 1.0e-14, uniform(0.9e-14, 1.1e-14)),
        ("Ds_n", "m^2/s", 3.9e-14, uniform(3.51e-14, 4.29e-14)),
        ("k_p", "m^2.5/(mol^0.5 s)", 2.334e-11, uniform(2.1e-11, 2.56e-11)),
        ("k_n", "m^2.5/(mol^0.5 s)", 5.031e-11, uniform(4.52e-11, 5.53e-11)),
        ("De_p", "m^2/s", 7.5e-10, uniform(6.75e-10, 8.25e-10)),
        ("De_s", "m^2/s", 7.5e-10, uniform(6.75e-10, 8.25e-10)),
        ("De_n", "m^2/s", 7.5e-10, uniform(6.75e-10, 8.25e-10)),
        ("L_a", "m", 1.0e-5, uniform(0.8e-5, 1.2e-5)),
        ("L_p", "m", 8.0e-5, uniform(7.7e-5, 8.3e-5)),
        ("L_s", "m", 2.5e-5, uniform(2.2e-5, 2.8e-5)),
        ("L_n", "m", 8.8e-5, uniform(8.5e-5, 9.1e-5)),
        ("L_z", "m", 1.0e-5, uniform(0.8e-5, 1.2e-5)),
        ("eps_p", "-", 0.385, uniform(0.36, 0.41)),
        ("eps_s", "-", 0.724, uniform(0.63, 0.81)),
        ("eps_n", "-", 0.485, uniform(0.46, 0.51)),
        ("Rp_p", "m", 2.0e-6, gaussian(2.0e-6, 0.3896e-6)),
        ("Rp_n", "m", 2.0e-6, gaussian(2.0e-6, 0.1354e-6)),
        ("brugg_p", "-", 4.0, uniform(3.8, 4.2)),
        ("brugg_s", "-", 4.0, uniform(3.8, 4.2)),
        ("brugg_n", "-", 4.0, uniform(3.8, 4.2)),
        ("t_plus", "-", 0.364, uniform(0.345, 0.381)),
        ("sigma_p", "S/m", 100.0, uniform(90.0, 110.0)),
        ("sigma_n", "S/m", 100.0, uniform(90.0, 110.0)),
    ];
    let params = rows
        .into_iter()
        .map(|(name, unit, nominal, dist)| {
            UncertainParameter::new(name, unit, nominal, dist).expect("reference parameter")
        })
        .collect();
    ParameterSpace::new(params).expect("reference space")
}

/// The eleven high-sensitivity parameters of the reference 2.2C study.
pub const SCREENED_REFERENCE_NAMES: [&str; 11] = [
    "T_amb", "k_n", "L_p", "L_n", "eps_p", "eps_s", "eps_n", "Rp_p", "Rp_n", "brugg_p", "brugg_n",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordinateFrame {
    Standard,
    Physical,
}

impl CoordinateFrame {
    fn label(self) -> &'static str {
        match self {
            CoordinateFrame::Standard => "standard",
            CoordinateFrame::Physical => "physical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    Random,
    #[default]
    LatinHypercube,
}

/// Row-major sample matrix tied to the space that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    names: Vec<String>,
    data: Vec<f64>,
    n_rows: usize,
    pub space_id: String,
    pub frame: CoordinateFrame,
    pub seed: u64,
    pub design: Design,
    /// Rows redrawn because a physically positive parameter came out non-positive.
    pub redraws: usize,
}

impl SampleMatrix {
    /// Wraps caller-provided rows; all rows must have `names.len()` entries.
    pub fn from_rows(
        space: &ParameterSpace,
        rows: &[Vec<f64>],
        frame: CoordinateFrame,
        seed: u64,
    ) -> Result<Self> {
        let n = space.dim();
        let mut data = Vec::with_capacity(rows.len() * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            if frame == CoordinateFrame::Standard {
                space.check_support(r)?;
            }
            data.extend_from_slice(r);
        }
        Ok(SampleMatrix {
            names: space.names(),
            data,
            n_rows: rows.len(),
            space_id: space.id(),
            frame,
            seed,
            design: Design::Random,
            redraws: 0,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_cols();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Keeps the rows listed in `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> SampleMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols());
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        SampleMatrix {
            data,
            n_rows: idx.len(),
            names: self.names.clone(),
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> SampleMatrix {
        SampleMatrix {
            names: Vec::new(),
            data: Vec::new(),
            n_rows: 0,
            space_id: self.space_id.clone(),
            frame: self.frame,
            seed: self.seed,
            design: self.design,
            redraws: self.redraws,
        }
    }

    pub fn require_frame(&self, frame: CoordinateFrame) -> Result<()> {
        if self.frame != frame {
            return Err(Error::FrameMismatch {
                expected: frame.label(),
                got: self.frame.label(),
            });
        }
        Ok(())
    }

    /// Maps a standard-frame matrix to physical values, row order preserved.
    pub fn to_physical(&self, space: &ParameterSpace) -> Result<SampleMatrix> {
        self.require_frame(CoordinateFrame::Standard)?;
        self.check_space(space)?;
        let mut data = Vec::with_capacity(self.data.len());
        for r in self.rows() {
            data.extend(space.to_physical(r)?);
        }
        Ok(SampleMatrix {
            data,
            n_rows: self.n_rows,
            names: self.names.clone(),
            frame: CoordinateFrame::Physical,
            ..self.clone_meta()
        })
    }

    fn check_space(&self, space: &ParameterSpace) -> Result<()> {
        if space.id() != self.space_id {
            return Err(Error::InvalidArgument(
                "sample matrix was generated from a different parameter space".into(),
            ));
        }
        Ok(())
    }

    /// Writes the matrix as CSV with the parameter names as header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.names)?;
        for r in self.rows() {
            out.write_record(r.iter().map(|v| format!("{v:e}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

const MAX_REDRAWS: usize = 64;

/// Draws `n_samples` standard-space points. Reproducible for a fixed
/// `(space, n_samples, seed, design)`.
///
/// Latin-hypercube designs place exactly one point in each of `n_samples`
/// equiprobable strata per coordinate. A coordinate whose physical value
/// would be non-positive for a positive parameter is redrawn (within its
/// stratum for latin-hypercube designs).
pub fn sample_standard(
    space: &ParameterSpace,
    n_samples: usize,
    seed: u64,
    design: Design,
) -> Result<SampleMatrix> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let n = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; n_samples * n];
    let mut redraws = 0;

    for (j, p) in space.params().iter().enumerate() {
        let strata: Option<Vec<usize>> = match design {
            Design::Random => None,
            Design::LatinHypercube => {
                let mut perm: Vec<usize> = (0..n_samples).collect();
                perm.shuffle(&mut rng);
                Some(perm)
            }
        };
        for i in 0..n_samples {
            let mut attempts = 0;
            loop {
                let s = match &strata {
                    None => p.dist.draw_standard(&mut rng),
                    Some(perm) => {
                        // open interval keeps the Gaussian quantile finite
                        let jitter: f64 = rng.random_range(f64::EPSILON..1.0);
                        p.dist
                            .standard_quantile((perm[i] as f64 + jitter) / n_samples as f64)
                    }
                };
                if !p.must_be_positive() || p.dist.to_physical(s) > 0.0 {
                    data[i * n + j] = s;
                    break;
                }
                attempts += 1;
                redraws += 1;
                if attempts >= MAX_REDRAWS {
                    return Err(Error::SamplingExhausted {
                        name: p.name.clone(),
                        attempts,
                    });
                }
            }
        }
    }
    if redraws > 0 {
        log::info!("sampler redrew {redraws} non-positive coordinate(s)");
    }
    Ok(SampleMatrix {
        names: space.names(),
        data,
        n_rows: n_samples,
        space_id: space.id(),
        frame: CoordinateFrame::Standard,
        seed,
        design,
        redraws,
    })
}
