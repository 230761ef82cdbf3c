//! Electrochemical-thermal cell model and CC-CV charging simulator.

pub mod model;
pub mod ocv;
pub mod params;
pub mod protocol;
mod solver;

pub use model::{electrolyte_conductivity, Outputs, Spme};
pub use params::{nominal_cell, CellConstants, CellParameters, PARAMETER_NAMES};
pub use protocol::{
    qoi_extract, simulate_cccv, violation_check, ConstraintStatus, Phase, Protocol, Qoi, Sample, SimResult,
    SolverOptions, Termination, ViolationReport, GRID_STEP,
};
