//! Strong-coupling adiabatic error bound evaluated on the qubit model.
//!
//! `H_Γ(s) = Γ H₀(s) + G(s)` with `H₀ = R ⊗ X` (two spectral projectors,
//! eigenvalues ±1, so `η = 2` and `η' = 0`) and `G = H_S ⊗ 1 + 1 ⊗ H_L`.
//! The bound reads
//!
//! `√m/(Γη) (1 + τ‖A‖ + 2‖G‖) [ (2 + η'τ/η)(‖A‖ + ‖G‖) + τ(‖Ȧ‖ + ‖Ġ‖ + 2‖A‖‖G‖) ]`
//!
//! with every `‖·‖` the supremum of the operator norm over the stroke.

use engine_model::{
    angle_rates, counter_diabatic, h_lubricant, h_stage, h_stage_rate, EngineParams, Stage,
};
use matrix_core::{hermitian_exponential, norms, tensor_product, OperatorMatrix};
use serde::{Deserialize, Serialize};

use crate::{stroke_generator, substep_count, PropagationError, PropagationSettings, Result};
use engine_model::DriveMode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub tau: f64,
    /// `max_s ‖U_total(s) − U_eff(s)‖_op` over the substep boundaries.
    pub actual_error: f64,
    pub bound_value: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub m: usize,
    pub sup_a: f64,
    pub sup_a_dot: f64,
    pub sup_g: f64,
    pub sup_g_dot: f64,
}

#[derive(Clone, Copy, Debug)]
struct Suprema {
    a: f64,
    a_dot: f64,
    g: f64,
    g_dot: f64,
}

fn suprema(p: &EngineParams, stage: Stage, points: usize) -> Result<Suprema> {
    let tau = stage.duration(p);
    let i2 = OperatorMatrix::identity(2);
    let hl = tensor_product(&i2, &h_lubricant(p));
    let y = OperatorMatrix::pauli_y();
    let mut sup = Suprema {
        a: 0.0,
        a_dot: 0.0,
        g: 0.0,
        g_dot: 0.0,
    };
    for k in 0..points {
        let s = tau * k as f64 / (points - 1) as f64;
        let a = counter_diabatic(p, stage, s)?;
        let (_, accel) = angle_rates(p, stage, s)?;
        let a_dot = y.scale_real(0.5 * accel);
        let g = &tensor_product(&h_stage(p, stage, s), &i2) + &hl;
        let g_dot = tensor_product(&h_stage_rate(p, stage, s), &i2);
        sup.a = sup.a.max(norms(&a).operator);
        sup.a_dot = sup.a_dot.max(norms(&a_dot).operator);
        sup.g = sup.g.max(norms(&g).operator);
        sup.g_dot = sup.g_dot.max(norms(&g_dot).operator);
    }
    Ok(sup)
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn theorem1_bound(
    p: &EngineParams,
    stage: Stage,
    gamma: f64,
    settings: &PropagationSettings,
) -> Result<BoundReport> {
    settings.validate()?;
    if !(gamma > 0.0) {
        return Err(PropagationError::InvalidSettings(format!(
            "coupling must be > 0, got {gamma}"
        )));
    }
    let mut q = p.clone();
    match stage {
        Stage::Compression => q.gamma_comp = gamma,
        Stage::Expansion => q.gamma_exp = gamma,
        other => return Err(engine_model::ModelError::NotWorkStroke(other).into()),
    }
    let tau = stage.duration(&q);

    let n = settings.grid_points_for_suprema as usize;
    let coarse = suprema(&q, stage, n)?;
    let fine = suprema(&q, stage, 2 * n - 1)?;
    for (quantity, a, b) in [
        ("A", coarse.a, fine.a),
        ("dA/dt", coarse.a_dot, fine.a_dot),
        ("G", coarse.g, fine.g),
        ("dG/dt", coarse.g_dot, fine.g_dot),
    ] {
        let change = relative_change(a, b);
        if change > 0.01 {
            return Err(PropagationError::GridTooCoarse {
                quantity,
                relative_change: change,
            });
        }
    }
    let sup = fine;

    let m = 2usize;
    let eta = 2.0;
    let eta_prime = 0.0;
    let bound_value = (m as f64).sqrt() / (gamma * eta)
        * (1.0 + tau * sup.a + 2.0 * sup.g)
        * ((2.0 + eta_prime * tau / eta) * (sup.a + sup.g)
            + tau * (sup.a_dot + sup.g_dot + 2.0 * sup.a * sup.g));

    let total = stroke_generator(&q, stage, DriveMode::StrongCoupling)?;
    let effective = stroke_generator(&q, stage, DriveMode::CounterDiabatic)?;
    let steps = substep_count(settings, tau);
    let delta = tau / steps as f64;
    let mut u_tot = OperatorMatrix::identity(4);
    let mut u_eff = OperatorMatrix::identity(4);
    let mut actual_error = 0.0f64;
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * delta;
        u_tot = hermitian_exponential(&total(mid)?, delta)?.matmul(&u_tot);
        u_eff = hermitian_exponential(&effective(mid)?, delta)?.matmul(&u_eff);
        actual_error = actual_error.max(norms(&(&u_tot - &u_eff)).operator);
    }

    Ok(BoundReport {
        gamma,
        tau,
        actual_error,
        bound_value,
        eta,
        eta_prime,
        m,
        sup_a: sup.a,
        sup_a_dot: sup.a_dot,
        sup_g: sup.g,
        sup_g_dot: sup.g_dot,
    })
}
