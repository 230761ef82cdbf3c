use std::collections::BTreeMap;

use crate::battery::{qoi_extract, simulate_cccv, CellParameters, Protocol, Qoi, SolverOptions, Termination};
use crate::error::{Error, Result};

/// Output of one model evaluation: QoI channels on the 10 s grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub series: BTreeMap<Qoi, Vec<f64>>,
    pub end_time: f64,
    pub switch_time: Option<f64>,
    pub termination: Termination,
}

impl ModelRun {
    pub fn channel(&self, qoi: Qoi) -> Result<&[f64]> {
        self.series
            .get(&qoi)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidArgument(format!("model did not produce `{}`", qoi.name())))
    }
}

/// Deterministic map from a physical parameter vector to QoI series.
///
/// `names` gives the meaning of each entry of `physical`; anything not named
/// stays at its nominal value.
pub trait QoiModel: Sync {
    fn run(&self, protocol: &Protocol, names: &[String], physical: &[f64]) -> Result<ModelRun>;
}

/// The reduced cell model driven by CC-CV charging.
#[derive(Debug, Clone, Default)]
pub struct BatteryModel {
    pub solver: SolverOptions,
}

impl BatteryModel {
    pub fn new(solver: SolverOptions) -> Self {
        BatteryModel { solver }
    }
}

impl QoiModel for BatteryModel {
    fn run(&self, protocol: &Protocol, names: &[String], physical: &[f64]) -> Result<ModelRun> {
        let cell = CellParameters::with_overrides(names, physical)?;
        let result = simulate_cccv(&cell, protocol, &self.solver)?;
        let mut series = BTreeMap::new();
        for q in Qoi::ALL {
            series.insert(q, qoi_extract(&result, q)?);
        }
        Ok(ModelRun {
            series,
            end_time: result.end_time,
            switch_time: result.switch_time,
            termination: result.termination,
        })
    }
}

/// Wraps a closure as a [`QoiModel`], for analytic stand-ins.
pub struct FnModel<F>(pub F);

impl<F> QoiModel for FnModel<F>
where
    F: Fn(&Protocol, &[String], &[f64]) -> Result<ModelRun> + Sync,
{
    fn run(&self, protocol: &Protocol, names: &[String], physical: &[f64]) -> Result<ModelRun> {
        (self.0)(protocol, names, physical)
    }
}

impl<M: QoiModel + ?Sized> QoiModel for &M {
    fn run(&self, protocol: &Protocol, names: &[String], physical: &[f64]) -> Result<ModelRun> {
        (**self).run(protocol, names, physical)
    }
}
