//! Hamiltonians, instantaneous eigenbases, Zeno projectors and thermal
//! states of a qubit Otto engine whose work strokes may be lubricated by a
//! second qubit.
//!
//! All stroke-level functions take stroke-local time `s`, measured from the
//! start of the stroke. [`locate`] is the only place cycle time is split
//! into a stage and a local time.

mod params;

pub use params::EngineParams;

use matrix_core::{
    hermitian_eigendecomposition, tensor_product, DensityOperator, MatrixError, OperatorMatrix, C64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("time {t} outside [0, {period})")]
    TimeOutOfRange { t: f64, period: f64 },
    #[error("{0:?} is not a work stroke")]
    NotWorkStroke(Stage),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    Compression,
    HotIsochore,
    Expansion,
    ColdIsochore,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Compression,
        Stage::HotIsochore,
        Stage::Expansion,
        Stage::ColdIsochore,
    ];

    pub fn is_work(self) -> bool {
        matches!(self, Stage::Compression | Stage::Expansion)
    }

    pub fn duration(self, p: &EngineParams) -> f64 {
        match self {
            Stage::Compression => p.tau_comp,
            Stage::HotIsochore => p.tau_hot,
            Stage::Expansion => p.tau_exp,
            Stage::ColdIsochore => p.tau_cold,
        }
    }

    fn require_work(self) -> Result<()> {
        if self.is_work() {
            Ok(())
        } else {
            Err(ModelError::NotWorkStroke(self))
        }
    }
}

/// How a work stroke is driven.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMode {
    /// Working medium alone under `H_S(t)`.
    Bare,
    /// Joint unitary under `h_total`.
    StrongCoupling,
    /// Pulses under `h_total` interleaved with lubricant measurements.
    ZenoMonitored,
    /// Joint unitary under `h_effective` (the strong-coupling limit).
    CounterDiabatic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrokePhase {
    pub stage: Stage,
    /// `None` on the isochores.
    pub drive_mode: Option<DriveMode>,
}

impl StrokePhase {
    pub fn new(stage: Stage, drive_mode: DriveMode) -> Self {
        Self {
            stage,
            drive_mode: stage.is_work().then_some(drive_mode),
        }
    }
}

/// Lubricant measurement outcome in the X basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    /// `|±⟩ = (|0⟩ ± |1⟩)/√2`
    pub fn x_ket(self) -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [C64::new(s, 0.0), C64::new(self.sign() * s, 0.0)]
    }

    pub fn x_projector(self) -> OperatorMatrix {
        let k = self.x_ket();
        OperatorMatrix::outer(&k, &k)
    }
}

/// Splits cycle time `t ∈ [0, τ)` into a stage and a stroke-local time.
pub fn locate(p: &EngineParams, t: f64) -> Result<(Stage, f64)> {
    let period = p.cycle_time();
    if !(t >= 0.0 && t < period) {
        return Err(ModelError::TimeOutOfRange { t, period });
    }
    let mut start = 0.0;
    for stage in Stage::ALL {
        let end = start + stage.duration(p);
        if t < end || stage == Stage::ColdIsochore {
            return Ok((stage, t - start));
        }
        start = end;
    }
    unreachable!("cold isochore closes the cycle")
}

/// Cycle time at which `stage` begins.
pub fn stage_start(p: &EngineParams, stage: Stage) -> f64 {
    Stage::ALL
        .iter()
        .take_while(|&&s| s != stage)
        .map(|s| s.duration(p))
        .sum()
}

pub fn h_cold(p: &EngineParams) -> OperatorMatrix {
    OperatorMatrix::pauli_z().scale_real(0.5 * p.omega)
}

pub fn h_hot(p: &EngineParams) -> OperatorMatrix {
    &OperatorMatrix::pauli_z().scale_real(0.5 * p.omega)
        + &OperatorMatrix::pauli_x().scale_real(0.5 * p.omega0)
}

/// Drive ramp `x(s) = Ω₀(s)/ω` and its constant slope `dx/ds`.
fn ramp(p: &EngineParams, stage: Stage, s: f64) -> (f64, f64) {
    match stage {
        Stage::Compression => {
            let a = p.omega0 / (p.omega * p.tau_comp);
            (a * s, a)
        }
        Stage::Expansion => {
            let a = p.omega0 / (p.omega * p.tau_exp);
            (a * (p.tau_exp - s), -a)
        }
        Stage::HotIsochore => (p.omega0 / p.omega, 0.0),
        Stage::ColdIsochore => (0.0, 0.0),
    }
}

/// `H_S` at stroke-local time `s`; constant `H_hot`/`H_cold` on the isochores.
pub fn h_stage(p: &EngineParams, stage: Stage, s: f64) -> OperatorMatrix {
    let (x, _) = ramp(p, stage, s);
    &OperatorMatrix::pauli_z().scale_real(0.5 * p.omega)
        + &OperatorMatrix::pauli_x().scale_real(0.5 * p.omega * x)
}

/// `dH_S/ds`
pub fn h_stage_rate(p: &EngineParams, stage: Stage, s: f64) -> OperatorMatrix {
    let (_, slope) = ramp(p, stage, s);
    OperatorMatrix::pauli_x().scale_real(0.5 * p.omega * slope)
}

/// Full-cycle system Hamiltonian at cycle time `t`.
pub fn h_system(p: &EngineParams, t: f64) -> Result<OperatorMatrix> {
    let (stage, s) = locate(p, t)?;
    Ok(h_stage(p, stage, s))
}

/// Instantaneous eigenbasis of a work-stroke Hamiltonian. `ket0` is the
/// upper level (`+gap/2`), `ket1` the lower one.
#[derive(Clone, Debug, PartialEq)]
pub struct InstantaneousBasis {
    pub angle: f64,
    pub gap: f64,
    pub ket0: [C64; 2],
    pub ket1: [C64; 2],
}

impl InstantaneousBasis {
    fn from_angle(angle: f64, gap: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self {
            angle,
            gap,
            ket0: [C64::new(c, 0.0), C64::new(s, 0.0)],
            ket1: [C64::new(s, 0.0), C64::new(-c, 0.0)],
        }
    }

    pub fn projector0(&self) -> OperatorMatrix {
        OperatorMatrix::outer(&self.ket0, &self.ket0)
    }

    pub fn projector1(&self) -> OperatorMatrix {
        OperatorMatrix::outer(&self.ket1, &self.ket1)
    }

    /// `⟨a|m|b⟩`
    pub fn element(m: &OperatorMatrix, a: &[C64; 2], b: &[C64; 2]) -> C64 {
        let mb = m.apply(b);
        a[0].conj() * mb[0] + a[1].conj() * mb[1]
    }
}

pub fn instantaneous_basis(p: &EngineParams, stage: Stage, s: f64) -> Result<InstantaneousBasis> {
    stage.require_work()?;
    let (x, _) = ramp(p, stage, s);
    Ok(InstantaneousBasis::from_angle(
        x.atan(),
        p.omega * x.hypot(1.0),
    ))
}

/// Basis-angle derivatives `(θ̇, θ̈)` in closed form.
pub fn angle_rates(p: &EngineParams, stage: Stage, s: f64) -> Result<(f64, f64)> {
    stage.require_work()?;
    let (x, slope) = ramp(p, stage, s);
    let d = 1.0 + x * x;
    Ok((slope / d, -2.0 * slope * slope * x / (d * d)))
}

/// `dε/ds`
pub fn gap_rate(p: &EngineParams, stage: Stage, s: f64) -> Result<f64> {
    stage.require_work()?;
    let (x, slope) = ramp(p, stage, s);
    Ok(p.omega * x * slope / x.hypot(1.0))
}

/// `R(s) = cos θ Z + sin θ X` (written `K` on the expansion stroke).
pub fn rotation_operator(p: &EngineParams, stage: Stage, s: f64) -> Result<OperatorMatrix> {
    let b = instantaneous_basis(p, stage, s)?;
    let (sn, cs) = b.angle.sin_cos();
    Ok(&OperatorMatrix::pauli_z().scale_real(cs) + &OperatorMatrix::pauli_x().scale_real(sn))
}

/// Counter-diabatic term `i(θ̇/2)(|0_s⟩⟨1_s| − |1_s⟩⟨0_s|)`.
pub fn counter_diabatic(p: &EngineParams, stage: Stage, s: f64) -> Result<OperatorMatrix> {
    let b = instantaneous_basis(p, stage, s)?;
    let (rate, _) = angle_rates(p, stage, s)?;
    let flip = &OperatorMatrix::outer(&b.ket0, &b.ket1) - &OperatorMatrix::outer(&b.ket1, &b.ket0);
    Ok(flip.scale(C64::new(0.0, 0.5 * rate)))
}

pub fn coupling(p: &EngineParams, stage: Stage) -> Result<f64> {
    match stage {
        Stage::Compression => Ok(p.gamma_comp),
        Stage::Expansion => Ok(p.gamma_exp),
        other => Err(ModelError::NotWorkStroke(other)),
    }
}

pub fn h_lubricant(p: &EngineParams) -> OperatorMatrix {
    OperatorMatrix::pauli_z().scale_real(0.5 * p.omega_l)
}

/// `H_SL = Γ R ⊗ X`
pub fn h_interaction(p: &EngineParams, stage: Stage, s: f64) -> Result<OperatorMatrix> {
    let g = coupling(p, stage)?;
    Ok(tensor_product(&rotation_operator(p, stage, s)?, &OperatorMatrix::pauli_x()).scale_real(g))
}

/// `H_S ⊗ 1 + 1 ⊗ H_L + Γ R ⊗ X`
pub fn h_total(p: &EngineParams, stage: Stage, s: f64) -> Result<OperatorMatrix> {
    let i2 = OperatorMatrix::identity(2);
    let hs = tensor_product(&h_stage(p, stage, s), &i2);
    let hl = tensor_product(&i2, &h_lubricant(p));
    Ok(&(&hs + &hl) + &h_interaction(p, stage, s)?)
}

/// `Γ R ⊗ X + (A + H_S) ⊗ 1`
pub fn h_effective(p: &EngineParams, stage: Stage, s: f64) -> Result<OperatorMatrix> {
    let i2 = OperatorMatrix::identity(2);
    let sys = &h_stage(p, stage, s) + &counter_diabatic(p, stage, s)?;
    Ok(&h_interaction(p, stage, s)? + &tensor_product(&sys, &i2))
}

/// `ℓΓ R ⊗ |ℓ⟩⟨ℓ| + (A + H_S) ⊗ |ℓ⟩⟨ℓ|`
pub fn zeno_hamiltonian(
    p: &EngineParams,
    stage: Stage,
    s: f64,
    outcome: Outcome,
) -> Result<OperatorMatrix> {
    let g = coupling(p, stage)?;
    let sys = &(&h_stage(p, stage, s) + &counter_diabatic(p, stage, s)?)
        + &rotation_operator(p, stage, s)?.scale_real(outcome.sign() * g);
    Ok(tensor_product(&sys, &outcome.x_projector()))
}

/// `P_± = P₀(s) ⊗ |±⟩⟨±| + P₁(s) ⊗ |∓⟩⟨∓|`, the spectral projectors of `R ⊗ X`.
pub fn zeno_projectors(
    p: &EngineParams,
    stage: Stage,
    s: f64,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let b = instantaneous_basis(p, stage, s)?;
    let (p0, p1) = (b.projector0(), b.projector1());
    let (lp, lm) = (Outcome::Plus.x_projector(), Outcome::Minus.x_projector());
    let plus = &tensor_product(&p0, &lp) + &tensor_product(&p1, &lm);
    let minus = &tensor_product(&p0, &lm) + &tensor_product(&p1, &lp);
    Ok((plus, minus))
}

/// Gibbs state `e^{-h/T} / Tr e^{-h/T}`.
pub fn thermal_state(h: &OperatorMatrix, temperature: f64) -> Result<DensityOperator> {
    if !(temperature > 0.0) {
        return Err(ModelError::NonPositiveTemperature(temperature));
    }
    let e = hermitian_eigendecomposition(h)?;
    let e_min = e.values[0];
    let z: f64 = e
        .values
        .iter()
        .map(|&l| (-(l - e_min) / temperature).exp())
        .sum();
    let m = e.reconstruct_with(|l| C64::new((-(l - e_min) / temperature).exp() / z, 0.0));
    Ok(DensityOperator::new(m)?)
}

/// Freshly prepared lubricant `(1 + r X)/2`.
pub fn lubricant_state(p: &EngineParams) -> Result<DensityOperator> {
    let r = p.lubricant_polarization;
    let m = &OperatorMatrix::identity(2).scale_real(0.5)
        + &OperatorMatrix::pauli_x().scale_real(0.5 * r);
    Ok(DensityOperator::new(m)?)
}

/// `ρ_S ⊗ ρ_L` at the start of a lubricated work stroke.
pub fn initial_joint_state(p: &EngineParams, rho_s: &DensityOperator) -> Result<DensityOperator> {
    let rho_l = lubricant_state(p)?;
    Ok(DensityOperator::new(tensor_product(
        rho_s.matrix(),
        rho_l.matrix(),
    ))?)
}

/// Mean Bose occupation at frequency `gap` and temperature `temperature`.
pub fn bose_occupation(gap: f64, temperature: f64) -> f64 {
    1.0 / (gap / temperature).exp_m1()
}
