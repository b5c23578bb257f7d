use engine_model::{
    angle_rates, gap_rate, h_interaction, instantaneous_basis, EngineParams, InstantaneousBasis,
    Stage,
};
use matrix_core::{
    hermitian_eigendecomposition, norms, partial_transpose, DensityOperator, OperatorMatrix,
    Subsystem,
};
use propagation::{liouvillian_gap, Bath};
use serde::{Deserialize, Serialize};
use zeno_monte_carlo::{nonselective_channel, MeasurementBasis, ZenoStroke};

use crate::{LedgerError, Result};

/// `⟨h_f⟩_{ρ_f} − ⟨h_i⟩_{ρ_i}`
pub fn stroke_work(
    h_i: &OperatorMatrix,
    h_f: &OperatorMatrix,
    rho_i: &DensityOperator,
    rho_f: &DensityOperator,
) -> Result<f64> {
    h_i.check_dim(rho_i.dim())?;
    h_f.check_dim(rho_f.dim())?;
    Ok(rho_f.expectation(h_f) - rho_i.expectation(h_i))
}

/// Quasistatic Otto cycle with perfect thermalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealOtto {
    pub w_comp: f64,
    pub w_exp: f64,
    pub w_tot: f64,
    pub q_hot: f64,
    pub q_cold: f64,
    pub eta_otto: f64,
    pub eta_carnot: f64,
    /// Curzon–Ahlborn value `1 − √(T_c/T_h)`, reference only.
    pub eta_ca: f64,
    /// `ω/Ω > T_c/T_h`
    pub extraction_ok: bool,
}

pub fn ideal_otto(p: &EngineParams) -> IdealOtto {
    let (w, big) = (p.omega, p.big_omega());
    let tc = (w / (2.0 * p.t_c)).tanh();
    let th = (big / (2.0 * p.t_h)).tanh();
    let w_comp = -0.5 * (big - w) * tc;
    let w_exp = 0.5 * (big - w) * th;
    let q_hot = 0.5 * big * (tc - th);
    IdealOtto {
        w_comp,
        w_exp,
        w_tot: w_comp + w_exp,
        q_hot,
        q_cold: -(w / big) * q_hot,
        eta_otto: 1.0 - w / big,
        eta_carnot: 1.0 - p.t_c / p.t_h,
        eta_ca: 1.0 - (p.t_c / p.t_h).sqrt(),
        extraction_ok: w / big > p.t_c / p.t_h,
    }
}

/// Split of the stroke work integral `∫Tr[Ḣρ]` into the gap-change part
/// `∫ ε̇/2 (ρ₀₀ − ρ₁₁)` and the coherence part `−∫ ε θ̇ Re ρ₀₁`, with
/// matrix elements in the instantaneous basis. Trapezoid rule on the
/// supplied samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrictionParts {
    pub coherent_part: f64,
    pub population_part: f64,
}

impl FrictionParts {
    pub fn total(&self) -> f64 {
        self.coherent_part + self.population_part
    }
}

pub fn friction_work(
    p: &EngineParams,
    stage: Stage,
    path: &[(f64, DensityOperator)],
) -> Result<FrictionParts> {
    if path.len() < 2 {
        return Err(LedgerError::BadGrid("need at least two samples".into()));
    }
    let tau = stage.duration(p);
    let mut coherent = Vec::with_capacity(path.len());
    let mut population = Vec::with_capacity(path.len());
    for (k, (s, rho)) in path.iter().enumerate() {
        if !(0.0..=tau * (1.0 + 1e-12)).contains(s) {
            return Err(LedgerError::BadGrid(format!("time {s} outside [0, {tau}]")));
        }
        if k > 0 && *s <= path[k - 1].0 {
            return Err(LedgerError::BadGrid("times must increase".into()));
        }
        rho.matrix().check_dim(2)?;
        let s = s.min(tau);
        let b = instantaneous_basis(p, stage, s)?;
        let (theta_dot, _) = angle_rates(p, stage, s)?;
        let eps_dot = gap_rate(p, stage, s)?;
        let m = rho.matrix();
        let r00 = InstantaneousBasis::element(m, &b.ket0, &b.ket0).re;
        let r11 = InstantaneousBasis::element(m, &b.ket1, &b.ket1).re;
        let r01 = InstantaneousBasis::element(m, &b.ket0, &b.ket1).re;
        population.push(0.5 * eps_dot * (r00 - r11));
        coherent.push(-b.gap * theta_dot * r01);
    }
    let trapezoid = |f: &[f64]| {
        (1..path.len())
            .map(|k| 0.5 * (path[k].0 - path[k - 1].0) * (f[k] + f[k - 1]))
            .sum::<f64>()
    };
    Ok(FrictionParts {
        coherent_part: trapezoid(&coherent),
        population_part: trapezoid(&population),
    })
}

/// `Tr[H_SL(t_f) ρ_f] − Tr[H_SL(t_i) ρ_i]` with `H_SL = Γ R ⊗ X` the
/// interaction alone.
pub fn decoupling_cost(
    p: &EngineParams,
    stage: Stage,
    rho_sl_initial: &DensityOperator,
    rho_sl_final: &DensityOperator,
) -> Result<f64> {
    let tau = stage.duration(p);
    let h_i = h_interaction(p, stage, 0.0)?;
    let h_f = h_interaction(p, stage, tau)?;
    h_i.check_dim(rho_sl_initial.dim())?;
    h_f.check_dim(rho_sl_final.dim())?;
    Ok(rho_sl_final.expectation(&h_f) - rho_sl_initial.expectation(&h_i))
}

/// Work needed to remove the interaction at the end of a stroke,
/// `−Tr[H_SL(t_f) ρ_f]`, with the switching-on step neglected.
pub fn switch_off_work(
    p: &EngineParams,
    stage: Stage,
    rho_sl_final: &DensityOperator,
) -> Result<f64> {
    let h_f = h_interaction(p, stage, stage.duration(p))?;
    h_f.check_dim(rho_sl_final.dim())?;
    Ok(-rho_sl_final.expectation(&h_f))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCost {
    /// `Tr[h(ρ' − ρ)]` with `ρ'` the nonselective post-measurement state.
    pub heat_part: f64,
    /// Shannon entropy (nats) of the outcome distribution over `beta_reset`.
    pub reset_part: f64,
}

impl MeasurementCost {
    pub fn total(&self) -> f64 {
        self.heat_part + self.reset_part
    }
}

impl std::ops::AddAssign for MeasurementCost {
    fn add_assign(&mut self, rhs: Self) {
        self.heat_part += rhs.heat_part;
        self.reset_part += rhs.reset_part;
    }
}

fn shannon(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|q| **q > 0.0)
        .map(|q| -q * q.ln())
        .sum()
}

pub fn measurement_energy_cost(
    rho_before: &DensityOperator,
    h: &OperatorMatrix,
    basis: MeasurementBasis,
    beta_reset: f64,
) -> Result<MeasurementCost> {
    h.check_dim(rho_before.dim())?;
    let after = nonselective_channel(rho_before, basis)?;
    let probs: Vec<f64> = [engine_model::Outcome::Plus, engine_model::Outcome::Minus]
        .iter()
        .map(|o| {
            basis
                .projector(*o)
                .expectation(rho_before.matrix())
                .clamp(0.0, 1.0)
        })
        .collect();
    Ok(MeasurementCost {
        heat_part: after.expectation(h) - rho_before.expectation(h),
        reset_part: shannon(&probs) / beta_reset,
    })
}

/// Measurement cost summed over a monitored stroke along the
/// outcome-averaged (nonselective) evolution.
pub fn stroke_measurement_cost(
    stroke: &ZenoStroke,
    rho_in: &DensityOperator,
    basis: MeasurementBasis,
    beta_reset: f64,
) -> Result<MeasurementCost> {
    let mut rho = rho_in.clone();
    let mut total = MeasurementCost::default();
    for k in 0..stroke.n_meas() {
        let evolved =
            DensityOperator::new(rho.matrix().conjugate_by(stroke.pulse(k)).hermitian_part())?;
        total += measurement_energy_cost(&evolved, stroke.energy(k + 1), basis, beta_reset)?;
        rho = nonselective_channel(&evolved, basis)?;
    }
    Ok(total)
}

/// Norm used in the drive-cost functional. For `H_SL = Γ R ⊗ X` the trace
/// norm is `4Γ` and the Frobenius norm `2Γ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    #[default]
    Trace,
    Frobenius,
}

impl NormConvention {
    fn of(self, m: &OperatorMatrix) -> f64 {
        let n = norms(m);
        match self {
            NormConvention::Trace => n.trace,
            NormConvention::Frobenius => n.frobenius,
        }
    }

    fn interaction_factor(self) -> f64 {
        match self {
            NormConvention::Trace => 4.0,
            NormConvention::Frobenius => 2.0,
        }
    }
}

/// `ν ∫ ‖H_SL‖ dt` over a work stroke in closed form.
pub fn drive_cost(p: &EngineParams, stage: Stage, convention: NormConvention) -> Result<f64> {
    let gamma = engine_model::coupling(p, stage)?;
    Ok(p.nu * convention.interaction_factor() * gamma * stage.duration(p))
}

/// Same functional by trapezoid quadrature on `points` samples.
pub fn drive_cost_quadrature(
    p: &EngineParams,
    stage: Stage,
    convention: NormConvention,
    points: usize,
) -> Result<f64> {
    if points < 2 {
        return Err(LedgerError::BadGrid("need at least two samples".into()));
    }
    let tau = stage.duration(p);
    let h = tau / (points - 1) as f64;
    let mut sum = 0.0;
    for k in 0..points {
        let weight = if k == 0 || k + 1 == points { 0.5 } else { 1.0 };
        sum += weight * convention.of(&h_interaction(p, stage, k as f64 * h)?);
    }
    Ok(p.nu * sum * h)
}

/// `P − C_drive / τ_cycle`
pub fn net_power(power: f64, drive_cost_per_cycle: f64, cycle_time: f64) -> f64 {
    power - drive_cost_per_cycle / cycle_time
}

/// Liouvillian gap and the relaxation-time estimate `1/λ`.
pub fn thermalization_time(p: &EngineParams, bath: Bath) -> (f64, f64) {
    let lambda = liouvillian_gap(p, bath);
    (lambda, 1.0 / lambda)
}

/// `2|⟨e₀|ρ|e₁⟩|` in the eigenbasis of `h_ref`.
pub fn coherence_l1(rho: &DensityOperator, h_ref: &OperatorMatrix) -> Result<f64> {
    rho.matrix().check_dim(2)?;
    h_ref.check_dim(2)?;
    let e = hermitian_eigendecomposition(h_ref)?;
    let gap = e.values[1] - e.values[0];
    if gap <= 1e-12 * h_ref.max_abs().max(1.0) {
        return Err(LedgerError::DegenerateReference(gap));
    }
    let (a, b) = (e.vector(0), e.vector(1));
    let rb = rho.matrix().apply(&b);
    let off: matrix_core::C64 = a.iter().zip(&rb).map(|(x, y)| x.conj() * y).sum();
    Ok(2.0 * off.norm())
}

/// `log₂ ‖ρ^{T_L}‖₁`, clamped at zero against roundoff.
pub fn log_negativity(rho_sl: &DensityOperator) -> Result<f64> {
    rho_sl.matrix().check_dim(4)?;
    let pt = partial_transpose(rho_sl.matrix(), Subsystem::Second)?;
    Ok(norms(&pt).trace.log2().max(0.0))
}
