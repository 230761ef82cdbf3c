use serde::{Deserialize, Serialize};

use super::campaign::CampaignResult;
use crate::battery::protocol::VOLTAGE_TOL;
use crate::battery::{Protocol, Qoi};
use crate::error::{Error, Result};
use crate::pce::SurrogateDraws;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Voltage,
    Temperature,
    Plating,
}

impl Constraint {
    pub const ALL: [Constraint; 3] = [Constraint::Voltage, Constraint::Temperature, Constraint::Plating];

    pub fn qoi(self) -> Qoi {
        match self {
            Constraint::Voltage => Qoi::Voltage,
            Constraint::Temperature => Qoi::Temperature,
            Constraint::Plating => Qoi::EtaPl,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constraint::Voltage => "voltage",
            Constraint::Temperature => "temperature",
            Constraint::Plating => "plating",
        }
    }

    /// `V > v_limit`, `T ≥ t_max` or `η_pl ≤ η_min`.
    pub fn violated(self, value: f64, protocol: &Protocol) -> bool {
        match self {
            Constraint::Voltage => value > protocol.voltage_limit() + VOLTAGE_TOL,
            Constraint::Temperature => value >= protocol.t_max,
            Constraint::Plating => value <= protocol.eta_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSeries {
    pub constraint: Constraint,
    pub probability: Vec<f64>,
    /// Value filled in from neighbouring retained points.
    pub interpolated: Vec<bool>,
    pub max: f64,
    pub max_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationProbability {
    pub times: Vec<f64>,
    pub constraints: Vec<ConstraintSeries>,
    /// Largest probability over time and constraints.
    pub max: f64,
    pub worst: Option<Constraint>,
}

impl ViolationProbability {
    pub fn get(&self, c: Constraint) -> Option<&ConstraintSeries> {
        self.constraints.iter().find(|s| s.constraint == c)
    }
}

/// Per-time fraction of surrogate draws that break each constraint whose
/// QoI the campaign covers.
pub fn violation_probability(result: &CampaignResult, protocol: &Protocol) -> Result<ViolationProbability> {
    let draws = result.surrogate_draws()?;
    violation_probability_with(result, protocol, &draws)
}

/// [`violation_probability`] on caller-provided draws.
pub fn violation_probability_with(
    result: &CampaignResult,
    protocol: &Protocol,
    draws: &SurrogateDraws,
) -> Result<ViolationProbability> {
    let mut constraints = Vec::new();
    for c in Constraint::ALL {
        let Some(q) = result.qoi(c.qoi()) else { continue };
        let kept: Vec<usize> = (0..q.points.len()).filter(|&k| !q.points[k].excluded).collect();
        if kept.is_empty() {
            return Err(Error::AllExcluded(q.qoi.name().to_string()));
        }
        let coefs: Vec<&[f64]> = kept.iter().map(|&k| q.points[k].coefficients.as_slice()).collect();
        let values = draws.evaluate_batch(&coefs);
        let mut known = vec![None; q.points.len()];
        for (j, &k) in kept.iter().enumerate() {
            let col = values.column(j);
            let hits = col.iter().filter(|&&v| c.violated(v, protocol)).count();
            known[k] = Some(hits as f64 / col.len() as f64);
        }
        let (probability, interpolated) = fill_gaps(&known, &result.times);
        let (kmax, &max) = probability
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty series");
        constraints.push(ConstraintSeries {
            constraint: c,
            max,
            max_time: result.times[kmax],
            probability,
            interpolated,
        });
    }
    if constraints.is_empty() {
        return Err(Error::InvalidArgument("campaign covers no constrained QoI".into()));
    }
    let worst = constraints
        .iter()
        .fold(None::<&ConstraintSeries>, |best, s| match best {
            Some(b) if b.max >= s.max => Some(b),
            _ => Some(s),
        })
        .expect("at least one constraint");
    Ok(ViolationProbability {
        times: result.times.clone(),
        max: worst.max,
        worst: Some(worst.constraint),
        constraints,
    })
}

/// Linear interpolation in time between known neighbours; ends copy the
/// nearest known value.
fn fill_gaps(known: &[Option<f64>], times: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let idx: Vec<usize> = (0..known.len()).filter(|&k| known[k].is_some()).collect();
    let mut out = vec![0.0; known.len()];
    let mut flag = vec![false; known.len()];
    for k in 0..known.len() {
        if let Some(v) = known[k] {
            out[k] = v;
            continue;
        }
        flag[k] = true;
        let right = idx.partition_point(|&i| i < k);
        out[k] = match (right.checked_sub(1).map(|j| idx[j]), idx.get(right)) {
            (Some(a), Some(&b)) => {
                let (va, vb) = (known[a].unwrap(), known[b].unwrap());
                let w = (times[k] - times[a]) / (times[b] - times[a]);
                va + w * (vb - va)
            }
            (Some(a), None) => known[a].unwrap(),
            (None, Some(&b)) => known[b].unwrap(),
            (None, None) => unreachable!("at least one known point"),
        };
    }
    (out, flag)
}
