//! Full Otto cycles: compression, hot isochore, expansion, cold isochore.
//! The lubricant is prepared afresh at the start of every work stroke and
//! discarded at its end; the baths act on the medium alone.

use engine_model::{
    h_cold, h_hot, h_stage, h_total, initial_joint_state, thermal_state, DriveMode, EngineParams,
    Outcome, Stage,
};
use matrix_core::{partial_trace, DensityOperator, OperatorMatrix, Subsystem};
use propagation::{
    propagate_lindblad, propagate_unitary_path, stroke_generator, Bath, PropagationSettings,
};
use serde::{Deserialize, Serialize};
use zeno_monte_carlo::{MeasurementBasis, StreamKey, ZenoStroke};

use crate::energetics::{
    coherence_l1, decoupling_cost, drive_cost, friction_work, ideal_otto, log_negativity,
    net_power, stroke_measurement_cost, switch_off_work, thermalization_time, FrictionParts,
    NormConvention,
};
use crate::{LedgerError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleConfig {
    pub mode: DriveMode,
    pub basis: MeasurementBasis,
    pub settings: PropagationSettings,
    pub norm: NormConvention,
    /// Stream index of the monitored trajectory.
    pub trajectory: u64,
    /// Charge `S(ρ_L)/β_reset` for discarding the lubricant after each
    /// lubricated stroke.
    pub lubricant_reset_cost: bool,
    /// Trace distance between consecutive cycle-start states that counts
    /// as a limit cycle.
    pub closure_tol: f64,
    pub min_cycles: u32,
    pub max_cycles: u32,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            mode: DriveMode::Bare,
            basis: MeasurementBasis::XBasis,
            settings: PropagationSettings::default(),
            norm: NormConvention::Trace,
            trajectory: 0,
            lubricant_reset_cost: false,
            closure_tol: 1e-6,
            min_cycles: 5,
            max_cycles: 60,
        }
    }
}

impl CycleConfig {
    pub fn with_mode(mode: DriveMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        if !(self.closure_tol > 0.0) {
            return Err(LedgerError::InvalidConfig("closure_tol must be > 0".into()));
        }
        if self.min_cycles == 0 || self.max_cycles < self.min_cycles {
            return Err(LedgerError::InvalidConfig(
                "need 1 <= min_cycles <= max_cycles".into(),
            ));
        }
        Ok(())
    }
}

/// One cycle's energetics. Work fields are reduced-system energy changes
/// across the work strokes; mode-specific entries are `None` when they do
/// not apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleLedger {
    pub cycle: u32,
    pub mode: DriveMode,
    pub w_comp: f64,
    pub w_exp: f64,
    pub w_tot: f64,
    pub q_hot: f64,
    pub q_cold: f64,
    pub q_tot: f64,
    /// `⟨H_cold⟩` at the end of the cycle minus at its start.
    pub delta_u: f64,
    pub power: f64,
    pub efficiency: f64,
    pub eta_otto: f64,
    pub eta_carnot: f64,
    /// Coherence part of the compression work integral.
    pub friction_comp: Option<f64>,
    pub friction_exp: Option<f64>,
    /// Largest `|parts − stroke work|` over both strokes.
    pub friction_residual: Option<f64>,
    /// Largest per-stroke `|ΔE − ΣδW − ΣδQ|` of the monitored trajectory.
    pub trajectory_first_law: Option<f64>,
    pub w_joint_sc: Option<f64>,
    pub zeno_work: Option<f64>,
    pub meas_heat: Option<f64>,
    pub jumps: Option<u64>,
    pub decoupling_cost: Option<f64>,
    /// `−Tr[H_SL ρ]` at the end of both strokes, switching on neglected.
    pub switch_off_work: Option<f64>,
    pub meas_energy_cost: Option<f64>,
    pub entropy_production: Option<f64>,
    pub log_negativity_comp: Option<f64>,
    pub coherence_comp: f64,
    pub coherence_exp: f64,
    pub drive_cost_per_cycle: f64,
    pub net_power: f64,
    pub tau_therm_hot: f64,
    pub tau_therm_cold: f64,
    /// Trace distance between the states at the end and start of the cycle.
    pub cycle_closure: f64,
}

/// Energetics of a single work stroke.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StrokeReport {
    /// Reduced-system work `⟨H_S(t_f)⟩ − ⟨H_S(t_i)⟩`.
    pub work: f64,
    pub friction: Option<FrictionParts>,
    /// `|parts − work|`
    pub friction_residual: Option<f64>,
    pub joint_work: Option<f64>,
    pub zeno_work: Option<f64>,
    pub meas_heat: Option<f64>,
    pub jumps: Option<u64>,
    /// `|ΔE − ΣδW − ΣδQ|` along the monitored trajectory.
    pub first_law_residual: Option<f64>,
    pub decoupling: Option<f64>,
    pub switch_off: Option<f64>,
    pub meas_cost: Option<f64>,
    pub sigma: Option<f64>,
    pub log_neg: Option<f64>,
}

fn add(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        (x, None) => x,
        (None, y) => y,
    }
}

fn lubricant_entropy(rho_sl: &DensityOperator) -> Result<f64> {
    let rho_l = partial_trace(rho_sl.matrix(), Subsystem::Second)?;
    let e = matrix_core::hermitian_eigendecomposition(&rho_l)?;
    Ok(e.values
        .iter()
        .filter(|x| **x > 1e-300)
        .map(|x| -x * x.ln())
        .sum())
}

/// Cycle simulator with the monitored-stroke pulses built once.
#[derive(Clone, Debug)]
pub struct CycleEngine {
    pub params: EngineParams,
    pub config: CycleConfig,
    zeno: Option<(ZenoStroke, ZenoStroke)>,
}

impl CycleEngine {
    pub fn new(p: &EngineParams, config: &CycleConfig) -> Result<Self> {
        p.validate()?;
        config.validate()?;
        let zeno = if config.mode == DriveMode::ZenoMonitored {
            Some((
                ZenoStroke::new(p, Stage::Compression, &config.settings)?,
                ZenoStroke::new(p, Stage::Expansion, &config.settings)?,
            ))
        } else {
            None
        };
        Ok(Self {
            params: p.clone(),
            config: config.clone(),
            zeno,
        })
    }

    fn unitary_stroke(
        &self,
        stage: Stage,
        rho_s: &DensityOperator,
    ) -> Result<(StrokeReport, DensityOperator)> {
        let p = &self.params;
        let mode = self.config.mode;
        let tau = stage.duration(p);
        let gen = stroke_generator(p, stage, mode)?;
        let path = propagate_unitary_path(&*gen, 0.0, tau, &self.config.settings)?;
        let joint_in = if mode == DriveMode::Bare {
            rho_s.clone()
        } else {
            initial_joint_state(p, rho_s)?
        };
        let mut reduced = Vec::with_capacity(path.len());
        let mut joint_out = joint_in.clone();
        for (s, u) in &path {
            let full = DensityOperator::new(joint_in.matrix().conjugate_by(u).hermitian_part())?;
            let r = if mode == DriveMode::Bare {
                full.clone()
            } else {
                DensityOperator::new(partial_trace(full.matrix(), Subsystem::First)?)?
            };
            reduced.push((*s, r));
            joint_out = full;
        }
        let rho_out = reduced
            .last()
            .expect("path has the initial sample")
            .1
            .clone();
        let work = rho_out.expectation(&h_stage(p, stage, tau))
            - rho_s.expectation(&h_stage(p, stage, 0.0));
        let parts = friction_work(p, stage, &reduced)?;
        let mut result = StrokeReport {
            work,
            friction: Some(parts),
            friction_residual: Some((parts.total() - work).abs()),
            ..StrokeReport::default()
        };
        if mode != DriveMode::Bare {
            if mode == DriveMode::StrongCoupling {
                result.joint_work = Some(
                    joint_out.expectation(&h_total(p, stage, tau)?)
                        - joint_in.expectation(&h_total(p, stage, 0.0)?),
                );
            }
            result.decoupling = Some(decoupling_cost(p, stage, &joint_in, &joint_out)?);
            result.switch_off = Some(switch_off_work(p, stage, &joint_out)?);
            result.log_neg = Some(log_negativity(&joint_out)?);
            if self.config.lubricant_reset_cost {
                result.meas_cost = Some(lubricant_entropy(&joint_out)? / p.beta_reset);
            }
        }
        Ok((result, rho_out))
    }

    fn monitored_stroke(
        &self,
        stage: Stage,
        rho_s: &DensityOperator,
        cycle: u32,
    ) -> Result<(StrokeReport, DensityOperator)> {
        let p = &self.params;
        let (comp, exp) = self.zeno.as_ref().expect("monitored engine");
        let stroke = if stage == Stage::Compression {
            comp
        } else {
            exp
        };
        let tau = stage.duration(p);
        let basis = self.config.basis;
        let joint_in = initial_joint_state(p, rho_s)?;
        let key = StreamKey::new(p.master_seed, self.config.trajectory).at(cycle, stage);
        let record = stroke.run(&joint_in, basis, key)?;
        let rho_out = DensityOperator::new(partial_trace(
            record.final_state.matrix(),
            Subsystem::First,
        )?)?;
        let work = rho_out.expectation(&h_stage(p, stage, tau))
            - rho_s.expectation(&h_stage(p, stage, 0.0));
        let marginals = stroke.marginals(&joint_in, basis)?;
        let mut meas_cost =
            stroke_measurement_cost(stroke, &joint_in, basis, p.beta_reset)?.total();
        if self.config.lubricant_reset_cost {
            meas_cost += lubricant_entropy(&record.final_state)? / p.beta_reset;
        }
        let n = stroke.n_meas();
        let delta_e = record.final_state.expectation(stroke.energy(n))
            - joint_in.expectation(stroke.energy(0));
        let result = StrokeReport {
            work,
            zeno_work: Some(record.total_work()),
            meas_heat: Some(record.total_meas_heat()),
            jumps: Some(record.jump_count as u64),
            first_law_residual: Some(
                (delta_e - record.total_work() - record.total_meas_heat()).abs(),
            ),
            decoupling: Some(decoupling_cost(p, stage, &joint_in, &record.final_state)?),
            switch_off: Some(switch_off_work(p, stage, &record.final_state)?),
            meas_cost: Some(meas_cost),
            sigma: Some(marginals.entropy_production(Outcome::Plus, record.final_outcome())?),
            log_neg: Some(log_negativity(&record.final_state)?),
            ..StrokeReport::default()
        };
        Ok((result, rho_out))
    }

    /// One work stroke from the medium state `rho_s`; the monitored mode
    /// draws from the stream of `(config.trajectory, cycle, stage)`.
    pub fn work_stroke(
        &self,
        stage: Stage,
        rho_s: &DensityOperator,
        cycle: u32,
    ) -> Result<(StrokeReport, DensityOperator)> {
        if !stage.is_work() {
            return Err(engine_model::ModelError::NotWorkStroke(stage).into());
        }
        if self.config.mode == DriveMode::ZenoMonitored {
            self.monitored_stroke(stage, rho_s, cycle)
        } else {
            self.unitary_stroke(stage, rho_s)
        }
    }

    /// One cycle from `rho_start`, a medium state at the start of
    /// compression. Returns the ledger and the state at the end.
    pub fn simulate(
        &self,
        rho_start: &DensityOperator,
        cycle: u32,
    ) -> Result<(CycleLedger, DensityOperator)> {
        let p = &self.params;
        rho_start.matrix().check_dim(2)?;
        let s = &self.config.settings;
        let (hot, cold) = (h_hot(p), h_cold(p));

        let (comp, rho1) = self.work_stroke(Stage::Compression, rho_start, cycle)?;
        let rho2 = propagate_lindblad(Bath::Hot, p, &rho1, p.tau_hot, s)?;
        let (exp, rho3) = self.work_stroke(Stage::Expansion, &rho2, cycle)?;
        let rho4 = propagate_lindblad(Bath::Cold, p, &rho3, p.tau_cold, s)?;

        let q_hot = rho2.expectation(&hot) - rho1.expectation(&hot);
        let q_cold = rho4.expectation(&cold) - rho3.expectation(&cold);
        let w_tot = comp.work + exp.work;
        let tau = p.cycle_time();
        let power = -w_tot / tau;
        let ideal = ideal_otto(p);
        let drive = if self.config.mode == DriveMode::Bare {
            0.0
        } else {
            drive_cost(p, Stage::Compression, self.config.norm)?
                + drive_cost(p, Stage::Expansion, self.config.norm)?
        };
        let max = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(x, y)| x.max(y));
        let ledger = CycleLedger {
            cycle,
            mode: self.config.mode,
            w_comp: comp.work,
            w_exp: exp.work,
            w_tot,
            q_hot,
            q_cold,
            q_tot: q_hot + q_cold,
            delta_u: rho4.expectation(&cold) - rho_start.expectation(&cold),
            power,
            efficiency: -w_tot / q_hot,
            eta_otto: ideal.eta_otto,
            eta_carnot: ideal.eta_carnot,
            friction_comp: comp.friction.map(|f| f.coherent_part),
            friction_exp: exp.friction.map(|f| f.coherent_part),
            friction_residual: max(comp.friction_residual, exp.friction_residual),
            trajectory_first_law: max(comp.first_law_residual, exp.first_law_residual),
            w_joint_sc: add(comp.joint_work, exp.joint_work),
            zeno_work: add(comp.zeno_work, exp.zeno_work),
            meas_heat: add(comp.meas_heat, exp.meas_heat),
            jumps: comp.jumps.zip(exp.jumps).map(|(a, b)| a + b),
            decoupling_cost: add(comp.decoupling, exp.decoupling),
            switch_off_work: add(comp.switch_off, exp.switch_off),
            meas_energy_cost: add(comp.meas_cost, exp.meas_cost),
            entropy_production: add(comp.sigma, exp.sigma),
            log_negativity_comp: comp.log_neg,
            coherence_comp: coherence_l1(&rho1, &hot)?,
            coherence_exp: coherence_l1(&rho3, &cold)?,
            drive_cost_per_cycle: drive,
            net_power: net_power(power, drive, tau),
            tau_therm_hot: thermalization_time(p, Bath::Hot).1,
            tau_therm_cold: thermalization_time(p, Bath::Cold).1,
            cycle_closure: rho4.trace_distance(rho_start),
        };
        Ok((ledger, rho4))
    }

    /// Cycles from the cold Gibbs state until consecutive cycle-start
    /// states agree within `closure_tol` (after at least `min_cycles`), or
    /// `max_cycles` is reached.
    pub fn run(&self) -> Result<CycleRun> {
        let p = &self.params;
        let mut rho = thermal_state(&h_cold(p), p.t_c)?;
        let mut ledgers = Vec::new();
        let mut converged = false;
        for c in 0..self.config.max_cycles {
            let (ledger, next) = self.simulate(&rho, c)?;
            let closure = ledger.cycle_closure;
            ledgers.push(ledger);
            rho = next;
            if c + 1 >= self.config.min_cycles && closure <= self.config.closure_tol {
                converged = true;
                break;
            }
        }
        Ok(CycleRun {
            ledgers,
            converged,
            final_state: rho,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleRun {
    pub ledgers: Vec<CycleLedger>,
    pub converged: bool,
    pub final_state: DensityOperator,
}

impl CycleRun {
    pub fn last(&self) -> &CycleLedger {
        self.ledgers.last().expect("at least one cycle")
    }
}

pub fn simulate_cycle(
    p: &EngineParams,
    config: &CycleConfig,
    rho_start: &DensityOperator,
    cycle: u32,
) -> Result<(CycleLedger, DensityOperator)> {
    CycleEngine::new(p, config)?.simulate(rho_start, cycle)
}

pub fn run_cycles(p: &EngineParams, config: &CycleConfig) -> Result<CycleRun> {
    CycleEngine::new(p, config)?.run()
}

/// Joint work `Σ ⟨H_tot(t_f)⟩ − ⟨H_tot(t_i)⟩` over both strokes under
/// strong coupling alone, each stroke starting from the Gibbs state of its
/// initial Hamiltonian with the lubricant freshly prepared.
pub fn joint_work_strong_coupling(p: &EngineParams, settings: &PropagationSettings) -> Result<f64> {
    let mut total = 0.0;
    for (stage, temperature) in [(Stage::Compression, p.t_c), (Stage::Expansion, p.t_h)] {
        let tau = stage.duration(p);
        let rho_s = thermal_state(&h_stage(p, stage, 0.0), temperature)?;
        let joint = initial_joint_state(p, &rho_s)?;
        let gen = stroke_generator(p, stage, DriveMode::StrongCoupling)?;
        let u: OperatorMatrix = propagation::propagate_unitary(&*gen, 0.0, tau, settings)?;
        let out = joint.matrix().conjugate_by(&u);
        total +=
            h_total(p, stage, tau)?.expectation(&out) - joint.expectation(&h_total(p, stage, 0.0)?);
    }
    Ok(total)
}
