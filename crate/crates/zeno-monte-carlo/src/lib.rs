//! Monitored Zeno drive: unitary pulses under the full Hamiltonian
//! alternating with selective projective measurements of the lubricant.

mod stream;

pub use stream::StreamKey;

use engine_model::{h_total, EngineParams, ModelError, Outcome, Stage};
use matrix_core::{tensor_product, DensityOperator, MatrixError, OperatorMatrix, C64};
use propagation::{propagate_unitary, PropagationError, PropagationSettings};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZenoError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error("both outcome probabilities vanish (p+ = {p_plus:e}, p- = {p_minus:e})")]
    DegenerateMeasurement { p_plus: f64, p_minus: f64 },
    #[error("entropy production undefined: final outcome has probability {0}")]
    ZeroProbability(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ZenoError>;

/// Outcome probabilities below this are treated as impossible.
pub const OUTCOME_FLOOR: f64 = 1e-15;

/// Basis of the lubricant measurement. In the computational basis
/// [`Outcome::Plus`] labels `|0⟩` and [`Outcome::Minus`] labels `|1⟩`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementBasis {
    #[default]
    XBasis,
    ComputationalBasis,
}

impl MeasurementBasis {
    pub fn ket(self, outcome: Outcome) -> [C64; 2] {
        match self {
            MeasurementBasis::XBasis => outcome.x_ket(),
            MeasurementBasis::ComputationalBasis => {
                let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
                match outcome {
                    Outcome::Plus => [one, zero],
                    Outcome::Minus => [zero, one],
                }
            }
        }
    }

    /// `𝟙 ⊗ |ℓ⟩⟨ℓ|` on medium ⊗ lubricant.
    pub fn projector(self, outcome: Outcome) -> OperatorMatrix {
        let k = self.ket(outcome);
        tensor_product(&OperatorMatrix::identity(2), &OperatorMatrix::outer(&k, &k))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub outcome: Outcome,
    pub post_state: DensityOperator,
    pub prob: f64,
}

fn outcome_probabilities(rho: &OperatorMatrix, basis: MeasurementBasis) -> (f64, f64) {
    let p_plus = basis
        .projector(Outcome::Plus)
        .expectation(rho)
        .clamp(0.0, 1.0);
    let p_minus = basis
        .projector(Outcome::Minus)
        .expectation(rho)
        .clamp(0.0, 1.0);
    (p_plus, p_minus)
}

/// Born-rule measurement driven by a uniform draw `u ∈ [0, 1)`: the outcome
/// is `+` when `u < p₊`.
pub fn measure_lubricant(
    rho_sl: &DensityOperator,
    basis: MeasurementBasis,
    u: f64,
) -> Result<Measurement> {
    rho_sl.matrix().check_dim(4)?;
    let (p_plus, p_minus) = outcome_probabilities(rho_sl.matrix(), basis);
    if p_plus < OUTCOME_FLOOR && p_minus < OUTCOME_FLOOR {
        return Err(ZenoError::DegenerateMeasurement { p_plus, p_minus });
    }
    let mut outcome = if u < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let prob_of = |o: Outcome| if o == Outcome::Plus { p_plus } else { p_minus };
    if prob_of(outcome) < OUTCOME_FLOOR {
        outcome = outcome.flipped();
    }
    let prob = prob_of(outcome);
    let proj = basis.projector(outcome);
    let post = proj
        .matmul(rho_sl.matrix())
        .matmul(&proj)
        .scale_real(1.0 / prob);
    Ok(Measurement {
        outcome,
        post_state: DensityOperator::new(post.hermitian_part())?,
        prob,
    })
}

/// `Σ_ℓ P_ℓ ρ P_ℓ`
pub fn nonselective_channel(
    rho_sl: &DensityOperator,
    basis: MeasurementBasis,
) -> Result<DensityOperator> {
    Ok(DensityOperator::new(dephase(rho_sl.matrix(), basis)?)?)
}

fn dephase(rho: &OperatorMatrix, basis: MeasurementBasis) -> Result<OperatorMatrix> {
    rho.check_dim(4)?;
    let mut out = OperatorMatrix::zeros(4);
    for outcome in [Outcome::Plus, Outcome::Minus] {
        let proj = basis.projector(outcome);
        out = &out + &proj.matmul(rho).matmul(&proj);
    }
    Ok(out.hermitian_part())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub outcomes: Vec<Outcome>,
    /// `⟨H_tot(t_{k+1})⟩` after the pulse minus `⟨H_tot(t_k)⟩` before it.
    pub step_work: Vec<f64>,
    /// Energy after the measurement update minus energy before it.
    pub step_meas_heat: Vec<f64>,
    pub log_prob: f64,
    pub final_state: DensityOperator,
    /// Number of `k` with `ℓ_{k+1} ≠ ℓ_k`.
    pub jump_count: usize,
}

impl TrajectoryRecord {
    pub fn total_work(&self) -> f64 {
        self.step_work.iter().sum()
    }

    pub fn total_meas_heat(&self) -> f64 {
        self.step_meas_heat.iter().sum()
    }

    pub fn final_outcome(&self) -> Outcome {
        *self
            .outcomes
            .last()
            .expect("a stroke has at least one measurement")
    }
}

/// Pulse propagators and measurement-time Hamiltonians of one work
/// stroke. They do not depend on the outcomes, so an ensemble shares them.
#[derive(Clone, Debug)]
pub struct ZenoStroke {
    pub stage: Stage,
    pub delta_t: f64,
    pulses: Vec<OperatorMatrix>,
    energies: Vec<OperatorMatrix>,
}

impl ZenoStroke {
    pub fn new(p: &EngineParams, stage: Stage, settings: &PropagationSettings) -> Result<Self> {
        if !stage.is_work() {
            return Err(ModelError::NotWorkStroke(stage).into());
        }
        let n = p.n_meas as usize;
        if n == 0 {
            return Err(ZenoError::InvalidArgument("n_meas must be >= 1".into()));
        }
        let tau = stage.duration(p);
        let delta_t = tau / n as f64;
        let h = |s: f64| h_total(p, stage, s);
        let time = |k: usize| if k == n { tau } else { k as f64 * delta_t };
        let mut pulses = Vec::with_capacity(n);
        let mut energies = Vec::with_capacity(n + 1);
        for k in 0..n {
            pulses.push(propagate_unitary(&h, time(k), time(k + 1), settings)?);
        }
        for k in 0..=n {
            energies.push(h(time(k))?);
        }
        Ok(Self {
            stage,
            delta_t,
            pulses,
            energies,
        })
    }

    pub fn n_meas(&self) -> usize {
        self.pulses.len()
    }

    pub fn pulse(&self, k: usize) -> &OperatorMatrix {
        &self.pulses[k]
    }

    /// `H_tot` at the `k`-th measurement time, `k = 0..=n`.
    pub fn energy(&self, k: usize) -> &OperatorMatrix {
        &self.energies[k]
    }

    pub fn run(
        &self,
        rho_in: &DensityOperator,
        basis: MeasurementBasis,
        key: StreamKey,
    ) -> Result<TrajectoryRecord> {
        rho_in.matrix().check_dim(4)?;
        let n = self.n_meas();
        let mut rho = rho_in.clone();
        let mut record = TrajectoryRecord {
            outcomes: Vec::with_capacity(n),
            step_work: Vec::with_capacity(n),
            step_meas_heat: Vec::with_capacity(n),
            log_prob: 0.0,
            final_state: rho_in.clone(),
            jump_count: 0,
        };
        for k in 0..n {
            let before = rho.expectation(&self.energies[k]);
            let evolved =
                DensityOperator::new(rho.matrix().conjugate_by(&self.pulses[k]).hermitian_part())?;
            let after_pulse = evolved.expectation(&self.energies[k + 1]);
            let m = measure_lubricant(&evolved, basis, key.uniform(k as u32))?;
            let after_meas = m.post_state.expectation(&self.energies[k + 1]);
            if record
                .outcomes
                .last()
                .is_some_and(|last| *last != m.outcome)
            {
                record.jump_count += 1;
            }
            record.outcomes.push(m.outcome);
            record.step_work.push(after_pulse - before);
            record.step_meas_heat.push(after_meas - after_pulse);
            record.log_prob += m.prob.ln();
            rho = m.post_state;
        }
        record.final_state = rho;
        Ok(record)
    }

    /// Exact outcome marginals from iterating the nonselective channel.
    pub fn marginals(
        &self,
        rho_in: &DensityOperator,
        basis: MeasurementBasis,
    ) -> Result<OutcomeMarginals> {
        rho_in.matrix().check_dim(4)?;
        let prepared = outcome_probabilities(rho_in.matrix(), basis);
        let mut rho = rho_in.matrix().clone();
        let mut last = (0.0, 0.0);
        for pulse in &self.pulses {
            let evolved = rho.conjugate_by(pulse);
            last = outcome_probabilities(&evolved, basis);
            rho = dephase(&evolved, basis)?;
        }
        Ok(OutcomeMarginals {
            prepared: [prepared.0, prepared.1],
            last: [last.0, last.1],
        })
    }
}

/// Distribution of the lubricant label at preparation and at the last
/// measurement, indexed `[+, −]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMarginals {
    pub prepared: [f64; 2],
    pub last: [f64; 2],
}

fn index(outcome: Outcome) -> usize {
    match outcome {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
    }
}

impl OutcomeMarginals {
    pub fn prepared_prob(&self, outcome: Outcome) -> f64 {
        self.prepared[index(outcome)]
    }

    pub fn last_prob(&self, outcome: Outcome) -> f64 {
        self.last[index(outcome)]
    }

    /// `σ(ℓ_n) = ln(p(ℓ₁)/p(ℓ_n))` with `ℓ₁` the prepared label.
    pub fn entropy_production(&self, first: Outcome, last: Outcome) -> Result<f64> {
        entropy_production(self.prepared_prob(first), self.last_prob(last))
    }
}

/// `ln(p_first / p_last)`
pub fn entropy_production(p_first: f64, p_last: f64) -> Result<f64> {
    if !(p_last > 0.0) {
        return Err(ZenoError::ZeroProbability(p_last));
    }
    if !(p_first > 0.0 && p_first <= 1.0 && p_last <= 1.0) {
        return Err(ZenoError::InvalidArgument(format!(
            "probabilities out of range: {p_first}, {p_last}"
        )));
    }
    Ok((p_first / p_last).ln())
}

/// Run a single trajectory, building the pulses on the fly.
pub fn run_zeno_stroke(
    p: &EngineParams,
    stage: Stage,
    rho_sl_in: &DensityOperator,
    basis: MeasurementBasis,
    key: StreamKey,
    settings: &PropagationSettings,
) -> Result<TrajectoryRecord> {
    ZenoStroke::new(p, stage, settings)?.run(rho_sl_in, basis, key.at(key.cycle, stage))
}

/// Exact marginals for the stroke in `p`.
pub fn exact_marginals(
    p: &EngineParams,
    stage: Stage,
    rho_sl_in: &DensityOperator,
    basis: MeasurementBasis,
    settings: &PropagationSettings,
) -> Result<OutcomeMarginals> {
    ZenoStroke::new(p, stage, settings)?.marginals(rho_sl_in, basis)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEnsemble {
    pub records: Vec<TrajectoryRecord>,
    pub mean_work: f64,
    pub mean_meas_heat: f64,
    /// Sample standard deviation of the per-trajectory work, 0 for one record.
    pub std_work: f64,
}

impl TrajectoryEnsemble {
    pub fn from_records(records: Vec<TrajectoryRecord>) -> Self {
        let n = records.len() as f64;
        let works: Vec<f64> = records.iter().map(TrajectoryRecord::total_work).collect();
        let mean_work = works.iter().sum::<f64>() / n;
        let mean_meas_heat = records
            .iter()
            .map(TrajectoryRecord::total_meas_heat)
            .sum::<f64>()
            / n;
        let std_work = if records.len() > 1 {
            (works.iter().map(|w| (w - mean_work).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            records,
            mean_work,
            mean_meas_heat,
            std_work,
        }
    }

    /// Fraction of records with at least one jump.
    pub fn jump_fraction(&self) -> f64 {
        self.records.iter().filter(|r| r.jump_count > 0).count() as f64 / self.records.len() as f64
    }

    /// Frequency estimate of the last-outcome distribution, indexed `[+, −]`.
    pub fn sampled_last_marginal(&self) -> [f64; 2] {
        let plus = self
            .records
            .iter()
            .filter(|r| r.final_outcome() == Outcome::Plus)
            .count() as f64;
        let n = self.records.len() as f64;
        [plus / n, 1.0 - plus / n]
    }
}

/// `n_traj` trajectories of one stroke; trajectory `i` draws from
/// `StreamKey::new(master_seed, i)`. Runs on the current rayon pool and
/// the result does not depend on its size.
pub fn run_ensemble(
    p: &EngineParams,
    stage: Stage,
    rho_sl_in: &DensityOperator,
    basis: MeasurementBasis,
    n_traj: usize,
    master_seed: u64,
    settings: &PropagationSettings,
) -> Result<TrajectoryEnsemble> {
    if n_traj == 0 {
        return Err(ZenoError::InvalidArgument("n_traj must be >= 1".into()));
    }
    let stroke = ZenoStroke::new(p, stage, settings)?;
    let records = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            stroke.run(
                rho_sl_in,
                basis,
                StreamKey::new(master_seed, i as u64).at(0, stage),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryEnsemble::from_records(records))
}
