//! Thermodynamic bookkeeping for the engine. Work is negative when
//! extracted; power and efficiency flip that sign once, in
//! [`CycleLedger`].

mod cycle;
mod energetics;

pub use cycle::{
    joint_work_strong_coupling, run_cycles, simulate_cycle, CycleConfig, CycleEngine, CycleLedger,
    CycleRun, StrokeReport,
};
pub use energetics::{
    coherence_l1, decoupling_cost, drive_cost, drive_cost_quadrature, friction_work, ideal_otto,
    log_negativity, measurement_energy_cost, net_power, stroke_measurement_cost, stroke_work,
    switch_off_work, thermalization_time, FrictionParts, IdealOtto, MeasurementCost,
    NormConvention,
};

use engine_model::ModelError;
use matrix_core::MatrixError;
use propagation::PropagationError;
use thiserror::Error;
use zeno_monte_carlo::ZenoError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Zeno(#[from] ZenoError),
    #[error("reference Hamiltonian is degenerate (gap {0:e})")]
    DegenerateReference(f64),
    #[error("inconsistent sampling grid: {0}")]
    BadGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, LedgerError>;
