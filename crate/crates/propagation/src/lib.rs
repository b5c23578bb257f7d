//! Time evolution for the engine: midpoint-exponential products for the
//! work strokes, fixed-step RK4 for the thermalization strokes, and an
//! evaluator of the strong-coupling adiabatic error bound.

mod bound;
mod lindblad;
mod unitary;

pub use bound::{theorem1_bound, BoundReport};
pub use lindblad::{
    lindblad_generator, lindblad_samples, liouvillian_gap, propagate_lindblad, Bath,
};
pub use unitary::{
    evolve_sampled, propagate_effective, propagate_stroke, propagate_unitary,
    propagate_unitary_path, stroke_generator, substep_count, Generator,
};

use engine_model::ModelError;
use matrix_core::MatrixError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("invalid interval: t_f = {t_f} precedes t_i = {t_i}")]
    InvalidInterval { t_i: f64, t_f: f64 },
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("supremum of {quantity} changed by {relative_change:e} under grid doubling")]
    GridTooCoarse {
        quantity: &'static str,
        relative_change: f64,
    },
    #[error("numerical invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, PropagationError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSettings {
    pub substeps_per_unit_time: u32,
    pub lindblad_step: f64,
    pub grid_points_for_suprema: u32,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self {
            substeps_per_unit_time: 200,
            lindblad_step: 1e-3,
            grid_points_for_suprema: 2000,
        }
    }
}

impl PropagationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.substeps_per_unit_time == 0 {
            return Err(PropagationError::InvalidSettings(
                "substeps_per_unit_time must be >= 1".into(),
            ));
        }
        if !(self.lindblad_step.is_finite() && self.lindblad_step > 0.0) {
            return Err(PropagationError::InvalidSettings(
                "lindblad_step must be > 0".into(),
            ));
        }
        if self.grid_points_for_suprema < 2 {
            return Err(PropagationError::InvalidSettings(
                "grid_points_for_suprema must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Unitarity tolerance asserted after every work stroke.
pub const UNITARITY_TOL: f64 = 1e-9;
