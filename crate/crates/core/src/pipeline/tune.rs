use serde::{Deserialize, Serialize};

use super::campaign::{run_campaign, CampaignConfig};
use super::model::QoiModel;
use super::violation::{violation_probability, Constraint};
use crate::battery::{Protocol, Termination};
use crate::error::{Error, Result};

/// Candidate `(c_rate, v_max)` pairs: either an explicit list or the product
/// of the two axes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    #[serde(default)]
    pub c_rates: Vec<f64>,
    #[serde(default)]
    pub v_maxes: Vec<f64>,
    #[serde(default)]
    pub pairs: Vec<(f64, f64)>,
}

impl TuneGrid {
    pub fn product(c_rates: &[f64], v_maxes: &[f64]) -> Self {
        TuneGrid {
            c_rates: c_rates.to_vec(),
            v_maxes: v_maxes.to_vec(),
            pairs: Vec::new(),
        }
    }

    pub fn pairs(pairs: &[(f64, f64)]) -> Self {
        TuneGrid {
            pairs: pairs.to_vec(),
            ..TuneGrid::default()
        }
    }

    /// Candidates from most to least aggressive: higher C-rate first, then
    /// higher voltage limit.
    pub fn candidates(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = if self.pairs.is_empty() {
            self.c_rates
                .iter()
                .flat_map(|&c| self.v_maxes.iter().map(move |&u| (c, u)))
                .collect()
        } else {
            self.pairs.clone()
        };
        v.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub c_rate: f64,
    pub v_max: f64,
    /// `None` when the search stopped before reaching this candidate.
    pub max_probability: Option<f64>,
    pub worst: Option<Constraint>,
    pub admissible: Option<bool>,
    pub nominal_end_time: Option<f64>,
    pub nominal_switch_time: Option<f64>,
    pub nominal_termination: Option<Termination>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub epsilon: f64,
    pub candidates: Vec<CandidateResult>,
    /// Index into `candidates`; `None` when nothing is admissible.
    pub selected: Option<usize>,
    pub selected_protocol: Option<Protocol>,
    pub nominal_total_time: Option<f64>,
}

impl TuneReport {
    pub fn found(&self) -> bool {
        self.selected.is_some()
    }
}

/// Picks the most aggressive candidate whose largest violation probability
/// is below `epsilon` (`epsilon >= 1` admits everything).
///
/// Each candidate gets its own campaign with `cfg` and the candidate's
/// C-rate and voltage limit on top of `base`. The search stops at the first
/// admissible candidate unless `exhaustive` is set.
pub fn tune_protocol<M: QoiModel + ?Sized>(
    base: &Protocol,
    epsilon: f64,
    grid: &TuneGrid,
    cfg: &CampaignConfig,
    model: &M,
    exhaustive: bool,
) -> Result<TuneReport> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    let order = grid.candidates();
    if order.is_empty() {
        return Err(Error::InvalidArgument("empty tuning grid".into()));
    }
    let mut candidates: Vec<CandidateResult> = order
        .iter()
        .map(|&(c_rate, v_max)| CandidateResult {
            c_rate,
            v_max,
            max_probability: None,
            worst: None,
            admissible: None,
            nominal_end_time: None,
            nominal_switch_time: None,
            nominal_termination: None,
        })
        .collect();
    let mut selected = None;
    for (i, &(c_rate, v_max)) in order.iter().enumerate() {
        let protocol = Protocol {
            c_rate,
            v_max,
            ..base.clone()
        };
        let run_cfg = CampaignConfig {
            protocol: protocol.clone(),
            ..cfg.clone()
        };
        let result = run_campaign(&run_cfg, model)?;
        let vp = violation_probability(&result, &protocol)?;
        let admissible = epsilon >= 1.0 || vp.max < epsilon;
        log::info!(
            "candidate {c_rate}C / {v_max} V: max violation probability {:.4} ({})",
            vp.max,
            if admissible { "admissible" } else { "rejected" }
        );
        let c = &mut candidates[i];
        c.max_probability = Some(vp.max);
        c.worst = vp.worst;
        c.admissible = Some(admissible);
        c.nominal_end_time = Some(result.nominal.end_time);
        c.nominal_switch_time = result.nominal.switch_time;
        c.nominal_termination = Some(result.nominal.termination);
        if admissible && selected.is_none() {
            selected = Some(i);
            if !exhaustive {
                break;
            }
        }
    }
    let selected_protocol = selected.map(|i| Protocol {
        c_rate: candidates[i].c_rate,
        v_max: candidates[i].v_max,
        ..base.clone()
    });
    Ok(TuneReport {
        epsilon,
        nominal_total_time: selected.and_then(|i| candidates[i].nominal_end_time),
        candidates,
        selected,
        selected_protocol,
    })
}
