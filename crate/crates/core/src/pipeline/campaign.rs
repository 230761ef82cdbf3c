use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{ModelRun, QoiModel};
use crate::battery::{Protocol, Qoi, Termination, GRID_STEP};
use crate::error::{Error, Result};
use crate::inputs::{sample_standard, Design, ParameterSpace, SampleMatrix};
use crate::orthopoly::BasisSet;
use crate::pce::{sobol_total_raw, CiBound, LeastSquaresFit, Moments, PceModel, SurrogateDraws, TrainingMeta};

/// Sobol threshold used for screening.
pub const DEFAULT_SCREEN_THRESHOLD: f64 = 0.1;
/// Largest tolerated share of failed simulations.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

const SURROGATE_STREAM: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub space: ParameterSpace,
    pub protocol: Protocol,
    pub n_train: usize,
    pub validation_fraction: f64,
    pub degree: usize,
    pub n_surrogate_samples: usize,
    pub ci_level: f64,
    pub seed: u64,
    pub qois: Vec<Qoi>,
    pub r2_gate: f64,
    #[serde(default)]
    pub design: Design,
    /// Worker threads; 0 lets the pool decide.
    #[serde(default)]
    pub jobs: usize,
}

impl CampaignConfig {
    pub fn new(space: ParameterSpace, protocol: Protocol) -> Self {
        CampaignConfig {
            space,
            protocol,
            n_train: 300,
            validation_fraction: 0.2,
            degree: 2,
            n_surrogate_samples: 10_000,
            ci_level: 0.95,
            seed: 42,
            qois: Qoi::ALL.to_vec(),
            r2_gate: 0.8,
            design: Design::LatinHypercube,
            jobs: 0,
        }
    }

    pub fn basis(&self) -> Result<BasisSet> {
        BasisSet::total_degree(self.space.families(), self.degree)
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config(format!("ci_level {} must lie in (0, 1)", self.ci_level)));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::Config(format!(
                "validation_fraction {} must lie in [0, 1)",
                self.validation_fraction
            )));
        }
        if self.qois.is_empty() {
            return Err(Error::Config("no QoI requested".into()));
        }
        if self.n_surrogate_samples < 100 {
            return Err(Error::Config("n_surrogate_samples must be at least 100".into()));
        }
        let terms = self.basis()?.cardinality();
        let n_train = (self.n_train as f64 * (1.0 - self.validation_fraction)).floor() as usize;
        if n_train < terms {
            return Err(Error::Underdetermined { rows: n_train, terms });
        }
        Ok(())
    }
}

/// Surrogate at one grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub time: f64,
    pub coefficients: Vec<f64>,
    pub r_squared: Option<f64>,
    /// Failed the R² gate; no moments, CI or Sobol values are kept.
    pub excluded: bool,
    pub moments: Option<Moments>,
    pub ci: Option<CiBound>,
    /// Total indices in parameter order; `None` where the output has no variance.
    pub sobol: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoiResult {
    pub qoi: Qoi,
    pub nominal: Vec<f64>,
    pub points: Vec<TimePoint>,
}

impl QoiResult {
    pub fn included(&self) -> impl Iterator<Item = &TimePoint> {
        self.points.iter().filter(|p| !p.excluded)
    }

    pub fn excluded_count(&self) -> usize {
        self.points.iter().filter(|p| p.excluded).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NominalRun {
    pub end_time: f64,
    pub switch_time: Option<f64>,
    pub termination: Termination,
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub simulation: f64,
    pub fitting: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    pub parameters: Vec<String>,
    pub basis: BasisSet,
    pub training_meta: TrainingMeta,
    pub surrogate_seed: u64,
    pub times: Vec<f64>,
    pub qois: Vec<QoiResult>,
    pub nominal: NominalRun,
    /// Completed runs per termination reason.
    pub terminations: BTreeMap<Termination, usize>,
    /// Sample rows whose simulation failed and were left out of the fit.
    pub failed_runs: Vec<usize>,
    /// Parameters with a total index above [`DEFAULT_SCREEN_THRESHOLD`].
    pub screened: Vec<String>,
    pub condition_estimate: f64,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

impl CampaignResult {
    pub fn qoi(&self, qoi: Qoi) -> Option<&QoiResult> {
        self.qois.iter().find(|q| q.qoi == qoi)
    }

    /// Surrogate model at grid index `k`, if not gated out.
    pub fn model(&self, qoi: Qoi, k: usize) -> Option<PceModel> {
        let p = self.qoi(qoi)?.points.get(k)?;
        if p.excluded {
            return None;
        }
        Some(PceModel {
            basis: self.basis.clone(),
            coefficients: p.coefficients.clone(),
            r_squared: p.r_squared,
            training_meta: self.training_meta,
            parameters: self.parameters.clone(),
            space_ref: self.config.space.id(),
            warnings: Vec::new(),
        })
    }

    /// The surrogate draws behind the CIs, regenerated from their seed.
    pub fn surrogate_draws(&self) -> Result<SurrogateDraws> {
        SurrogateDraws::new(
            &self.config.space,
            &self.basis,
            self.config.n_surrogate_samples,
            self.surrogate_seed,
        )
    }

    pub fn simulations(&self) -> usize {
        self.config.n_train
    }
}

pub(crate) fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub(crate) struct Runs {
    pub good: Vec<usize>,
    pub runs: Vec<ModelRun>,
    pub failed: Vec<usize>,
    pub terminations: BTreeMap<Termination, usize>,
}

/// Runs the model on every row of a physical sample matrix, in parallel,
/// keeping results in row order.
pub(crate) fn run_all<M: QoiModel + ?Sized>(
    model: &M,
    protocol: &Protocol,
    physical: &SampleMatrix,
    jobs: usize,
) -> Result<Runs> {
    let names = physical.names().to_vec();
    let outcomes: Vec<Result<ModelRun>> = with_pool(jobs, || {
        (0..physical.n_rows())
            .into_par_iter()
            .map(|i| model.run(protocol, &names, physical.row(i)))
            .collect()
    })?;
    let mut out = Runs {
        good: Vec::new(),
        runs: Vec::new(),
        failed: Vec::new(),
        terminations: BTreeMap::new(),
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(run) => {
                *out.terminations.entry(run.termination).or_default() += 1;
                out.good.push(i);
                out.runs.push(run);
            }
            Err(Error::SimulationFailed(msg)) | Err(Error::InvalidCell(msg)) => {
                log::debug!("sample {i} failed: {msg}");
                out.failed.push(i);
            }
            Err(e) => return Err(e),
        }
    }
    let total = physical.n_rows();
    if !out.failed.is_empty() {
        log::warn!("{} of {total} simulations failed: rows {:?}", out.failed.len(), out.failed);
    }
    if out.failed.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::ExcessiveFailures {
            failed: out.failed.len(),
            total,
        });
    }
    Ok(out)
}

/// Longest channel among the runs for `qois`.
pub(crate) fn horizon(runs: &[&ModelRun], qois: &[Qoi]) -> Result<usize> {
    let mut n = 0;
    for r in runs {
        for &q in qois {
            n = n.max(r.channel(q)?.len());
        }
    }
    Ok(n)
}

/// `series` extended to `n` entries by repeating its last value.
pub(crate) fn hold_last(series: &[f64], n: usize) -> Vec<f64> {
    let mut v = series.to_vec();
    let last = *series.last().expect("non-empty series");
    v.resize(n.max(series.len()), last);
    v
}

/// Samples, simulates, fits one surrogate per QoI and grid time, gates by
/// validation R², and derives moments, confidence bounds and total Sobol
/// indices for the retained points.
pub fn run_campaign<M: QoiModel + ?Sized>(cfg: &CampaignConfig, model: &M) -> Result<CampaignResult> {
    let start = Instant::now();
    cfg.validate()?;
    let basis = cfg.basis()?;
    let space = &cfg.space;
    let samples = sample_standard(space, cfg.n_train, cfg.seed, cfg.design)?;
    let physical = samples.to_physical(space)?;

    let sim_start = Instant::now();
    let runs = run_all(model, &cfg.protocol, &physical, cfg.jobs)?;
    let nominal = model.run(&cfg.protocol, &space.names(), &space.nominal())?;
    let simulation = sim_start.elapsed().as_secs_f64();

    let fit_start = Instant::now();
    if runs.good.is_empty() {
        return Err(Error::ExcessiveFailures {
            failed: runs.failed.len(),
            total: cfg.n_train,
        });
    }
    let mut all: Vec<&ModelRun> = runs.runs.iter().collect();
    all.push(&nominal);
    let n_times = horizon(&all, &cfg.qois)?;
    let times: Vec<f64> = (0..n_times).map(|k| k as f64 * GRID_STEP).collect();

    let good_samples = samples.select_rows(&runs.good);
    let fit = LeastSquaresFit::new(&good_samples, &basis, cfg.validation_fraction)?;
    let draws = SurrogateDraws::new(space, &basis, cfg.n_surrogate_samples, cfg.seed.wrapping_add(SURROGATE_STREAM))?;
    if cfg.validation_fraction == 0.0 {
        log::warn!("no validation split: every time point fails the R² gate");
    }

    let mut qois = Vec::with_capacity(cfg.qois.len());
    for &q in &cfg.qois {
        let padded: Vec<Vec<f64>> = runs
            .runs
            .iter()
            .map(|r| Ok(hold_last(r.channel(q)?, n_times)))
            .collect::<Result<_>>()?;
        let solved: Vec<Result<(Vec<f64>, Option<f64>)>> = with_pool(cfg.jobs, || {
            (0..n_times)
                .into_par_iter()
                .map(|k| {
                    let y: Vec<f64> = padded.iter().map(|s| s[k]).collect();
                    fit.solve(&y)
                })
                .collect()
        })?;
        let mut points = Vec::with_capacity(n_times);
        for (k, s) in solved.into_iter().enumerate() {
            let (coefficients, r_squared) = s?;
            let excluded = !r_squared.is_some_and(|r| r >= cfg.r2_gate);
            points.push(TimePoint {
                time: times[k],
                coefficients,
                r_squared,
                excluded,
                moments: None,
                ci: None,
                sobol: None,
            });
        }
        let kept: Vec<usize> = (0..n_times).filter(|&k| !points[k].excluded).collect();
        let coefs: Vec<&[f64]> = kept.iter().map(|&k| points[k].coefficients.as_slice()).collect();
        let cis = draws.ci_batch(&coefs, cfg.ci_level);
        for (&k, ci) in kept.iter().zip(cis) {
            let p = &mut points[k];
            let variance: f64 = p.coefficients[1..].iter().map(|a| a * a).sum();
            p.moments = Some(Moments {
                mean: p.coefficients[0],
                variance,
                std: variance.sqrt(),
            });
            p.ci = Some(ci);
            p.sobol = sobol_total_raw(&basis, &p.coefficients).ok();
        }
        qois.push(QoiResult {
            qoi: q,
            nominal: hold_last(nominal.channel(q)?, n_times),
            points,
        });
    }
    let fitting = fit_start.elapsed().as_secs_f64();

    let mut result = CampaignResult {
        config: cfg.clone(),
        parameters: space.names(),
        training_meta: TrainingMeta {
            n_train: fit.train_indices().len(),
            n_val: fit.validation_indices().len(),
            seed: cfg.seed,
        },
        basis,
        surrogate_seed: draws.seed(),
        times,
        qois,
        nominal: NominalRun {
            end_time: nominal.end_time,
            switch_time: nominal.switch_time,
            termination: nominal.termination,
        },
        terminations: runs.terminations,
        failed_runs: runs.failed,
        screened: Vec::new(),
        condition_estimate: fit.condition_estimate(),
        warnings: Vec::new(),
        timing: Timing::default(),
    };
    match screen_parameters(&result, DEFAULT_SCREEN_THRESHOLD) {
        Ok(s) => result.screened = s,
        Err(e) => result.warnings.push(format!("screening skipped: {e}")),
    }
    for q in &result.qois {
        let n = q.excluded_count();
        if n > 0 {
            result
                .warnings
                .push(format!("{}: {n} of {n_times} time points below the R² gate", q.qoi.name()));
        }
    }
    result.timing = Timing {
        simulation,
        fitting,
        total: start.elapsed().as_secs_f64(),
    };
    Ok(result)
}

/// Union over QoIs of the parameters whose total Sobol index exceeds
/// `threshold` at some retained time point, in parameter order.
pub fn screen_parameters(result: &CampaignResult, threshold: f64) -> Result<Vec<String>> {
    let mut hit = BTreeSet::new();
    for q in &result.qois {
        if q.included().next().is_none() {
            return Err(Error::AllExcluded(q.qoi.name().to_string()));
        }
        for p in q.included() {
            if let Some(s) = &p.sobol {
                hit.extend(s.iter().enumerate().filter(|(_, &v)| v > threshold).map(|(i, _)| i));
            }
        }
    }
    Ok(hit.into_iter().map(|i| result.parameters[i].clone()).collect())
}

/// Pilot campaign on the full space at `pilot_degree`, screening, then the
/// main campaign on the screened subspace at `cfg.degree`. Parameters left
/// out of the subspace stay at their nominal values.
pub fn run_two_stage<M: QoiModel + ?Sized>(
    cfg: &CampaignConfig,
    model: &M,
    pilot_degree: usize,
    threshold: f64,
) -> Result<(CampaignResult, CampaignResult)> {
    let pilot_cfg = CampaignConfig {
        degree: pilot_degree,
        ..cfg.clone()
    };
    let pilot = run_campaign(&pilot_cfg, model)?;
    let names = screen_parameters(&pilot, threshold)?;
    let main_cfg = CampaignConfig {
        space: cfg.space.restrict(&names)?,
        ..cfg.clone()
    };
    let main = run_campaign(&main_cfg, model)?;
    Ok((pilot, main))
}
