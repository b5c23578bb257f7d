use engine_model::{h_effective, h_stage, h_total, DriveMode, EngineParams, ModelError, Stage};
use matrix_core::{hermitian_exponential, DensityOperator, OperatorMatrix};

use crate::{PropagationError, PropagationSettings, Result, UNITARITY_TOL};

/// Time-dependent Hamiltonian in stroke-local time.
pub type Generator =
    Box<dyn Fn(f64) -> std::result::Result<OperatorMatrix, ModelError> + Send + Sync>;

/// Number of midpoint substeps covering `duration`.
pub fn substep_count(settings: &PropagationSettings, duration: f64) -> usize {
    if duration <= 0.0 {
        return 0;
    }
    let raw = duration * settings.substeps_per_unit_time as f64;
    ((raw - 1e-9).ceil() as usize).max(1)
}

fn check_interval(t_i: f64, t_f: f64) -> Result<()> {
    if t_f < t_i || !t_i.is_finite() || !t_f.is_finite() {
        return Err(PropagationError::InvalidInterval { t_i, t_f });
    }
    Ok(())
}

fn check_unitary(u: &OperatorMatrix) -> Result<()> {
    let defect = u.unitarity_defect();
    if defect > UNITARITY_TOL {
        return Err(PropagationError::Invariant(format!(
            "unitarity defect {defect:e}"
        )));
    }
    Ok(())
}

/// Cumulative propagators `U(t_k, t_i)` at every substep boundary, starting
/// with the identity at `t_i`.
pub fn propagate_unitary_path(
    h: &dyn Fn(f64) -> std::result::Result<OperatorMatrix, ModelError>,
    t_i: f64,
    t_f: f64,
    settings: &PropagationSettings,
) -> Result<Vec<(f64, OperatorMatrix)>> {
    check_interval(t_i, t_f)?;
    let dim = h(t_i)?.dim();
    let n = substep_count(settings, t_f - t_i);
    let mut u = OperatorMatrix::identity(dim);
    let mut path = Vec::with_capacity(n + 1);
    path.push((t_i, u.clone()));
    if n == 0 {
        return Ok(path);
    }
    let delta = (t_f - t_i) / n as f64;
    for k in 0..n {
        let step = hermitian_exponential(&h(t_i + (k as f64 + 0.5) * delta)?, delta)?;
        u = step.matmul(&u);
        let t = if k + 1 == n {
            t_f
        } else {
            t_i + (k + 1) as f64 * delta
        };
        path.push((t, u.clone()));
    }
    check_unitary(&u)?;
    Ok(path)
}

/// `𝒯 exp(−i∫H)` as a product of midpoint substep exponentials.
pub fn propagate_unitary(
    h: &dyn Fn(f64) -> std::result::Result<OperatorMatrix, ModelError>,
    t_i: f64,
    t_f: f64,
    settings: &PropagationSettings,
) -> Result<OperatorMatrix> {
    check_interval(t_i, t_f)?;
    let dim = h(t_i)?.dim();
    let n = substep_count(settings, t_f - t_i);
    let mut u = OperatorMatrix::identity(dim);
    if n == 0 {
        return Ok(u);
    }
    let delta = (t_f - t_i) / n as f64;
    for k in 0..n {
        let step = hermitian_exponential(&h(t_i + (k as f64 + 0.5) * delta)?, delta)?;
        u = step.matmul(&u);
    }
    check_unitary(&u)?;
    Ok(u)
}

/// States `U ρ U†` at every substep boundary.
pub fn evolve_sampled(
    h: &dyn Fn(f64) -> std::result::Result<OperatorMatrix, ModelError>,
    rho: &OperatorMatrix,
    t_i: f64,
    t_f: f64,
    settings: &PropagationSettings,
) -> Result<Vec<(f64, OperatorMatrix)>> {
    Ok(propagate_unitary_path(h, t_i, t_f, settings)?
        .into_iter()
        .map(|(t, u)| (t, rho.conjugate_by(&u).hermitian_part()))
        .collect())
}

/// Stroke generator for a drive mode. Bare strokes act on the working
/// medium alone; every other mode acts on medium ⊗ lubricant.
pub fn stroke_generator(p: &EngineParams, stage: Stage, mode: DriveMode) -> Result<Generator> {
    if !stage.is_work() {
        return Err(ModelError::NotWorkStroke(stage).into());
    }
    let p = p.clone();
    Ok(match mode {
        DriveMode::Bare => Box::new(move |s| Ok(h_stage(&p, stage, s))),
        DriveMode::StrongCoupling | DriveMode::ZenoMonitored => {
            Box::new(move |s| h_total(&p, stage, s))
        }
        DriveMode::CounterDiabatic => Box::new(move |s| h_effective(&p, stage, s)),
    })
}

/// Full-stroke propagator over `[0, τ_stage]`.
pub fn propagate_stroke(
    p: &EngineParams,
    stage: Stage,
    mode: DriveMode,
    settings: &PropagationSettings,
) -> Result<OperatorMatrix> {
    let h = stroke_generator(p, stage, mode)?;
    propagate_unitary(&*h, 0.0, stage.duration(p), settings)
}

/// Joint state conjugated by the propagator of `h_effective`.
pub fn propagate_effective(
    p: &EngineParams,
    stage: Stage,
    rho_sl: &DensityOperator,
    settings: &PropagationSettings,
) -> Result<DensityOperator> {
    rho_sl.matrix().check_dim(4)?;
    let u = propagate_stroke(p, stage, DriveMode::CounterDiabatic, settings)?;
    Ok(DensityOperator::new(
        rho_sl.matrix().conjugate_by(&u).hermitian_part(),
    )?)
}
