use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::campaign::{hold_last, horizon, run_all, CampaignConfig, CampaignResult};
use super::model::{ModelRun, QoiModel};
use crate::battery::{Qoi, Termination, GRID_STEP};
use crate::error::{Error, Result};
use crate::inputs::{sample_standard, Design};
use crate::pce::empirical_quantiles;

pub const DEFAULT_MC_RUNS: usize = 3000;
pub const HISTOGRAM_BINS: usize = 20;

const MC_STREAM: u64 = 0xd1b5_4a32_d192_ed03;

/// Equal-width histogram over `[lo, hi]`; a point mass has `lo == hi` and
/// every count in the first bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; bins.max(1)];
        let width = (hi - lo) / counts.len() as f64;
        for &v in values {
            let b = if width > 0.0 {
                (((v - lo) / width) as usize).min(counts.len() - 1)
            } else {
                0
            };
            counts[b] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn is_point_mass(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McQoi {
    pub qoi: Qoi,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub histograms: Vec<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McBaseline {
    pub n_runs: usize,
    pub parameters: Vec<String>,
    pub seed: u64,
    pub level: f64,
    pub times: Vec<f64>,
    pub qois: Vec<McQoi>,
    pub terminations: BTreeMap<Termination, usize>,
    pub failed_runs: Vec<usize>,
    /// Wall-clock seconds for sampling, simulation and statistics.
    pub seconds: f64,
}

impl McBaseline {
    pub fn qoi(&self, qoi: Qoi) -> Option<&McQoi> {
        self.qois.iter().find(|q| q.qoi == qoi)
    }
}

/// Plain random sampling of `cfg.space` with full model runs and empirical
/// per-time statistics at `cfg.ci_level`.
pub fn run_mc_baseline<M: QoiModel + ?Sized>(cfg: &CampaignConfig, n_runs: usize, model: &M) -> Result<McBaseline> {
    if n_runs < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 runs, got {n_runs}")));
    }
    if !(cfg.ci_level > 0.0 && cfg.ci_level < 1.0) {
        return Err(Error::Config(format!("ci_level {} must lie in (0, 1)", cfg.ci_level)));
    }
    cfg.protocol.validate()?;
    let start = Instant::now();
    let seed = cfg.seed.wrapping_add(MC_STREAM);
    let samples = sample_standard(&cfg.space, n_runs, seed, Design::Random)?;
    let physical = samples.to_physical(&cfg.space)?;
    let runs = run_all(model, &cfg.protocol, &physical, cfg.jobs)?;
    let refs: Vec<&ModelRun> = runs.runs.iter().collect();
    let n_times = horizon(&refs, &cfg.qois)?;
    let tail = (1.0 - cfg.ci_level) / 2.0;

    let mut qois = Vec::with_capacity(cfg.qois.len());
    for &q in &cfg.qois {
        let padded: Vec<Vec<f64>> = runs
            .runs
            .iter()
            .map(|r| Ok(hold_last(r.channel(q)?, n_times)))
            .collect::<Result<_>>()?;
        let mut out = McQoi {
            qoi: q,
            lower: Vec::with_capacity(n_times),
            median: Vec::with_capacity(n_times),
            upper: Vec::with_capacity(n_times),
            mean: Vec::with_capacity(n_times),
            std: Vec::with_capacity(n_times),
            histograms: Vec::with_capacity(n_times),
        };
        let mut col = vec![0.0; padded.len()];
        for k in 0..n_times {
            for (c, s) in col.iter_mut().zip(&padded) {
                *c = s[k];
            }
            out.histograms.push(Histogram::new(&col, HISTOGRAM_BINS));
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            out.mean.push(mean);
            out.std.push(var.sqrt());
            let qs = empirical_quantiles(&mut col, &[tail, 0.5, 1.0 - tail]);
            out.lower.push(qs[0]);
            out.median.push(qs[1]);
            out.upper.push(qs[2]);
        }
        qois.push(out);
    }
    Ok(McBaseline {
        n_runs,
        parameters: cfg.space.names(),
        seed,
        level: cfg.ci_level,
        times: (0..n_times).map(|k| k as f64 * GRID_STEP).collect(),
        qois,
        terminations: runs.terminations,
        failed_runs: runs.failed,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub pce_seconds: f64,
    pub mc_seconds: f64,
    /// `pce_seconds / mc_seconds`.
    pub ratio: f64,
    pub pce_simulations: usize,
    pub pce_surrogate_evaluations: usize,
    pub pce_dimension: usize,
    pub pce_terms: usize,
    pub mc_simulations: usize,
    pub mc_dimension: usize,
}

/// Wall-clock comparison of a surrogate campaign against a plain Monte Carlo
/// baseline. Both should come from the same machine session.
pub fn compare_budget(pce: &CampaignResult, mc: &McBaseline) -> BudgetReport {
    BudgetReport {
        pce_seconds: pce.timing.total,
        mc_seconds: mc.seconds,
        ratio: pce.timing.total / mc.seconds,
        pce_simulations: pce.simulations(),
        pce_surrogate_evaluations: pce.config.n_surrogate_samples,
        pce_dimension: pce.parameters.len(),
        pce_terms: pce.basis.cardinality(),
        mc_simulations: mc.n_runs,
        mc_dimension: mc.parameters.len(),
    }
}
