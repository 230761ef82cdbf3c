//! CSV and JSON files for external plotting.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::campaign::{CampaignResult, NominalRun, Timing};
use super::mc::McBaseline;
use super::violation::ViolationProbability;
use crate::battery::Termination;
use crate::error::Result;

fn writer(dir: &Path, name: &str) -> Result<(PathBuf, csv::Writer<BufWriter<File>>)> {
    let path = dir.join(name);
    let w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    Ok((path, w))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// `<qoi>.csv` with `time,nominal,ci_lo,ci_hi,r2,excluded`; the bounds are
/// empty at gated points.
pub fn write_qoi_csvs(result: &CampaignResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for q in &result.qois {
        let (path, mut w) = writer(dir, &format!("{}.csv", q.qoi.name()))?;
        w.write_record(["time", "nominal", "ci_lo", "ci_hi", "r2", "excluded"])?;
        for (p, nominal) in q.points.iter().zip(&q.nominal) {
            w.write_record([
                format!("{}", p.time),
                format!("{nominal}"),
                opt(p.ci.map(|c| c.lower)),
                opt(p.ci.map(|c| c.upper)),
                opt(p.r_squared),
                (p.excluded as u8).to_string(),
            ])?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// `sobol.csv`: one row per QoI and time, one column per parameter. Gated
/// and zero-variance points have empty cells.
pub fn write_sobol_csv(result: &CampaignResult, dir: &Path) -> Result<PathBuf> {
    let (path, mut w) = writer(dir, "sobol.csv")?;
    let mut header = vec!["qoi".to_string(), "time".to_string()];
    header.extend(result.parameters.iter().cloned());
    w.write_record(&header)?;
    for q in &result.qois {
        for p in &q.points {
            let mut row = vec![q.qoi.name().to_string(), format!("{}", p.time)];
            match &p.sobol {
                Some(s) if !p.excluded => row.extend(s.iter().map(|v| format!("{v}"))),
                _ => row.extend(std::iter::repeat_n(String::new(), result.parameters.len())),
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// `moments.csv` with `qoi,time,mean,std,normal_lo,normal_hi` for retained points.
pub fn write_moments_csv(result: &CampaignResult, dir: &Path) -> Result<PathBuf> {
    let (path, mut w) = writer(dir, "moments.csv")?;
    w.write_record(["qoi", "time", "mean", "std", "normal_lo", "normal_hi"])?;
    for q in &result.qois {
        for p in q.included() {
            let (Some(m), Some(ci)) = (p.moments, p.ci) else { continue };
            w.write_record([
                q.qoi.name().to_string(),
                format!("{}", p.time),
                format!("{}", m.mean),
                format!("{}", m.std),
                format!("{}", ci.normal_lower),
                format!("{}", ci.normal_upper),
            ])?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// `violation.csv`: probability per constraint and time, with an
/// `<name>_interpolated` flag column for each.
pub fn write_violation_csv(vp: &ViolationProbability, dir: &Path) -> Result<PathBuf> {
    let (path, mut w) = writer(dir, "violation.csv")?;
    let mut header = vec!["time".to_string()];
    for c in &vp.constraints {
        header.push(c.constraint.name().to_string());
        header.push(format!("{}_interpolated", c.constraint.name()));
    }
    w.write_record(&header)?;
    for (k, t) in vp.times.iter().enumerate() {
        let mut row = vec![format!("{t}")];
        for c in &vp.constraints {
            row.push(format!("{}", c.probability[k]));
            row.push((c.interpolated[k] as u8).to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path)
}

/// `mc_<qoi>.csv` with `time,lower,median,upper,mean,std`.
pub fn write_mc_csvs(mc: &McBaseline, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for q in &mc.qois {
        let (path, mut w) = writer(dir, &format!("mc_{}.csv", q.qoi.name()))?;
        w.write_record(["time", "lower", "median", "upper", "mean", "std"])?;
        for (k, t) in mc.times.iter().enumerate() {
            w.write_record([t, &q.lower[k], &q.median[k], &q.upper[k], &q.mean[k], &q.std[k]].map(|v| format!("{v}")))?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub parameters: Vec<String>,
    pub nominal: NominalRun,
    pub terminations: BTreeMap<Termination, usize>,
    pub failed_runs: Vec<usize>,
    pub excluded_points: BTreeMap<String, usize>,
    pub screened: Vec<String>,
    /// Largest violation probability per constraint.
    pub violation_max: BTreeMap<String, f64>,
    pub timing: Timing,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(result: &CampaignResult, vp: Option<&ViolationProbability>) -> Self {
        Summary {
            parameters: result.parameters.clone(),
            nominal: result.nominal,
            terminations: result.terminations.clone(),
            failed_runs: result.failed_runs.clone(),
            excluded_points: result
                .qois
                .iter()
                .map(|q| (q.qoi.name().to_string(), q.excluded_count()))
                .collect(),
            screened: result.screened.clone(),
            violation_max: vp
                .map(|v| {
                    v.constraints
                        .iter()
                        .map(|c| (c.constraint.name().to_string(), c.max))
                        .collect()
                })
                .unwrap_or_default(),
            timing: result.timing,
            warnings: result.warnings.clone(),
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = std::io::BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(f)?)
}

/// Everything a campaign produces: per-QoI CSVs, `sobol.csv`,
/// `moments.csv`, `violation.csv`, `summary.json` and the full
/// `campaign.json`.
pub fn write_bundle(result: &CampaignResult, vp: Option<&ViolationProbability>, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = write_qoi_csvs(result, dir)?;
    paths.push(write_sobol_csv(result, dir)?);
    paths.push(write_moments_csv(result, dir)?);
    if let Some(v) = vp {
        paths.push(write_violation_csv(v, dir)?);
    }
    let summary = dir.join("summary.json");
    write_json(&Summary::new(result, vp), &summary)?;
    paths.push(summary);
    let full = dir.join("campaign.json");
    write_json(result, &full)?;
    paths.push(full);
    Ok(paths)
}
