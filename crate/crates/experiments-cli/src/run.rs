use engine_model::{
    h_stage, h_total, initial_joint_state, thermal_state, DriveMode, EngineParams, Stage,
};
use matrix_core::DensityOperator;
use propagation::theorem1_bound;
use rayon::prelude::*;
use serde_json::Value;
use thermo_ledger::{coherence_l1, ideal_otto, joint_work_strong_coupling, CycleEngine};
use zeno_monte_carlo::{run_ensemble, MeasurementBasis, TrajectoryEnsemble};

use crate::config::{ExperimentConfig, PanelKind, ResolvedPanel, SweepPoint};
use crate::table::{Cell, Manifest, OutputFile, ResultSet, ResultTable, SCHEMA_VERSION};
use crate::CliError;

/// Per-trajectory `|ΔE − ΣδW − ΣδQ|`.
pub const TRAJECTORY_FIRST_LAW_TOL: f64 = 1e-8;
/// `|W + Q − ΔU|` per cycle.
pub const CYCLE_FIRST_LAW_TOL: f64 = 1e-8;
pub const FRICTION_RESIDUAL_TOL: f64 = 1e-5;

type Row = Vec<(String, Cell)>;

fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Compression => "compression",
        Stage::HotIsochore => "hot_isochore",
        Stage::Expansion => "expansion",
        Stage::ColdIsochore => "cold_isochore",
    }
}

fn mode_name(mode: DriveMode) -> String {
    serde_json::to_value(mode)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn basis_name(basis: MeasurementBasis) -> String {
    serde_json::to_value(basis)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn json_cell(v: &Value) -> Cell {
    match v {
        Value::Null => Cell::Empty,
        Value::Bool(b) => Cell::from(*b),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) if n.is_i64() || n.is_u64() => Cell::Int(i),
            (_, Some(x)) => Cell::Num(x),
            _ => Cell::Text(n.to_string()),
        },
        Value::String(s) => Cell::Text(s.clone()),
        other => Cell::Text(other.to_string()),
    }
}

/// Gibbs state of the stroke's initial Hamiltonian at the temperature of
/// the bath that precedes it.
fn stroke_start(p: &EngineParams, stage: Stage) -> Result<DensityOperator, CliError> {
    let temperature = if stage == Stage::Compression {
        p.t_c
    } else {
        p.t_h
    };
    thermal_state(&h_stage(p, stage, 0.0), temperature).map_err(numerical)
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Invariant(what()))
    }
}

fn cycle_rows(
    config: &ExperimentConfig,
    panel: &ResolvedPanel,
    idx: usize,
    p: &EngineParams,
) -> Result<Vec<Row>, CliError> {
    let mode = panel.mode.expect("validated");
    let engine = CycleEngine::new(p, &config.cycle_config(mode, panel.basis, idx as u64))
        .map_err(numerical)?;
    let run = engine.run().map_err(numerical)?;
    for l in &run.ledgers {
        let residual = (l.w_tot + l.q_tot - l.delta_u).abs();
        check(residual <= CYCLE_FIRST_LAW_TOL, || {
            format!(
                "{}[{idx}] cycle {}: |W+Q-dU| = {residual:e}",
                panel.id, l.cycle
            )
        })?;
        if let Some(r) = l.friction_residual {
            check(r <= FRICTION_RESIDUAL_TOL, || {
                format!(
                    "{}[{idx}] cycle {}: friction residual {r:e}",
                    panel.id, l.cycle
                )
            })?;
        }
        if let Some(r) = l.trajectory_first_law {
            check(r <= TRAJECTORY_FIRST_LAW_TOL, || {
                format!(
                    "{}[{idx}] cycle {}: trajectory first law {r:e}",
                    panel.id, l.cycle
                )
            })?;
        }
    }
    let last = run.last();
    let mut row: Row = vec![
        ("mode".into(), Cell::Text(mode_name(mode))),
        ("basis".into(), Cell::Text(basis_name(panel.basis))),
        ("seed".into(), Cell::Int(p.master_seed as i64)),
        ("trajectory".into(), Cell::Int(idx as i64)),
        ("cycles".into(), Cell::Int(run.ledgers.len() as i64)),
        ("converged".into(), Cell::from(run.converged)),
    ];
    let fields = serde_json::to_value(last).map_err(numerical)?;
    for (k, v) in fields.as_object().expect("ledger is a struct") {
        if k != "cycle" && k != "mode" {
            row.push((k.clone(), json_cell(v)));
        }
    }
    Ok(vec![row])
}

fn stroke_rows(
    config: &ExperimentConfig,
    panel: &ResolvedPanel,
    idx: usize,
    p: &EngineParams,
) -> Result<Vec<Row>, CliError> {
    let mode = panel.mode.expect("validated");
    let stage = panel.stage;
    let engine = CycleEngine::new(p, &config.cycle_config(mode, panel.basis, idx as u64))
        .map_err(numerical)?;
    let rho = stroke_start(p, stage)?;
    let (r, out) = engine.work_stroke(stage, &rho, 0).map_err(numerical)?;
    if let Some(x) = r.friction_residual {
        check(x <= FRICTION_RESIDUAL_TOL, || {
            format!("{}[{idx}]: friction residual {x:e}", panel.id)
        })?;
    }
    if let Some(x) = r.first_law_residual {
        check(x <= TRAJECTORY_FIRST_LAW_TOL, || {
            format!("{}[{idx}]: trajectory first law {x:e}", panel.id)
        })?;
    }
    let h_f = h_stage(p, stage, stage.duration(p));
    Ok(vec![vec![
        ("mode".into(), Cell::Text(mode_name(mode))),
        ("basis".into(), Cell::Text(basis_name(panel.basis))),
        ("stage".into(), stage_name(stage).into()),
        ("seed".into(), Cell::Int(p.master_seed as i64)),
        ("trajectory".into(), Cell::Int(idx as i64)),
        ("work".into(), r.work.into()),
        (
            "coherence_l1".into(),
            coherence_l1(&out, &h_f).map_err(numerical)?.into(),
        ),
        (
            "friction_coherent".into(),
            r.friction.map(|f| f.coherent_part).into(),
        ),
        (
            "friction_population".into(),
            r.friction.map(|f| f.population_part).into(),
        ),
        ("friction_residual".into(), r.friction_residual.into()),
        ("log_negativity".into(), r.log_neg.into()),
        ("decoupling_cost".into(), r.decoupling.into()),
        ("switch_off_work".into(), r.switch_off.into()),
        ("zeno_work".into(), r.zeno_work.into()),
        ("meas_heat".into(), r.meas_heat.into()),
        (
            "jumps".into(),
            r.jumps.map_or(Cell::Empty, |j| Cell::Int(j as i64)),
        ),
        ("entropy_production".into(), r.sigma.into()),
        ("meas_energy_cost".into(), r.meas_cost.into()),
    ]])
}

fn joint_work_rows(config: &ExperimentConfig, p: &EngineParams) -> Result<Vec<Row>, CliError> {
    let w = joint_work_strong_coupling(p, &config.settings).map_err(numerical)?;
    let ideal = ideal_otto(p).w_tot;
    Ok(vec![vec![
        ("joint_work_sc".into(), w.into()),
        ("ideal_w_tot".into(), ideal.into()),
        ("abs_gap".into(), (w - ideal).abs().into()),
    ]])
}

fn ensemble(
    config: &ExperimentConfig,
    panel: &ResolvedPanel,
    p: &EngineParams,
    stage: Stage,
) -> Result<TrajectoryEnsemble, CliError> {
    let joint = initial_joint_state(p, &stroke_start(p, stage)?).map_err(numerical)?;
    let ens = run_ensemble(
        p,
        stage,
        &joint,
        panel.basis,
        p.n_traj as usize,
        p.master_seed,
        &config.settings,
    )
    .map_err(numerical)?;
    let tau = stage.duration(p);
    let (h_i, h_f) = (
        h_total(p, stage, 0.0).map_err(numerical)?,
        h_total(p, stage, tau).map_err(numerical)?,
    );
    let e_i = joint.expectation(&h_i);
    for (i, r) in ens.records.iter().enumerate() {
        let residual =
            (r.final_state.expectation(&h_f) - e_i - r.total_work() - r.total_meas_heat()).abs();
        check(residual <= TRAJECTORY_FIRST_LAW_TOL, || {
            format!(
                "{} {} trajectory {i}: first law {residual:e}",
                panel.id,
                stage_name(stage)
            )
        })?;
    }
    Ok(ens)
}

fn trajectory_rows(
    config: &ExperimentConfig,
    panel: &ResolvedPanel,
    p: &EngineParams,
) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for stage in [Stage::Compression, Stage::Expansion] {
        let ens = ensemble(config, panel, p, stage)?;
        for (i, r) in ens.records.iter().enumerate() {
            for k in 0..r.step_work.len() {
                rows.push(vec![
                    ("stage".into(), stage_name(stage).into()),
                    ("seed".into(), Cell::Int(p.master_seed as i64)),
                    ("trajectory".into(), Cell::Int(i as i64)),
                    ("step".into(), Cell::Int(k as i64 + 1)),
                    ("outcome".into(), Cell::Int(r.outcomes[k].sign() as i64)),
                    ("delta_work".into(), r.step_work[k].into()),
                    ("delta_meas_heat".into(), r.step_meas_heat[k].into()),
                ]);
            }
        }
    }
    Ok(rows)
}

fn zeno_average_rows(
    config: &ExperimentConfig,
    panel: &ResolvedPanel,
    p: &EngineParams,
) -> Result<Vec<Row>, CliError> {
    let ideal = ideal_otto(p);
    let mut row: Row = vec![
        ("basis".into(), Cell::Text(basis_name(panel.basis))),
        ("seed".into(), Cell::Int(p.master_seed as i64)),
        ("n_traj".into(), Cell::Int(p.n_traj as i64)),
    ];
    let (mut work, mut heat) = (0.0, 0.0);
    let mut jumped = vec![false; p.n_traj as usize];
    for (stage, prefix, ideal_w) in [
        (Stage::Compression, "comp", ideal.w_comp),
        (Stage::Expansion, "exp", ideal.w_exp),
    ] {
        let ens = ensemble(config, panel, p, stage)?;
        for (j, r) in jumped.iter_mut().zip(&ens.records) {
            *j |= r.jump_count > 0;
        }
        row.push((format!("{prefix}_mean_work"), ens.mean_work.into()));
        row.push((format!("{prefix}_std_work"), ens.std_work.into()));
        row.push((
            format!("{prefix}_mean_meas_heat"),
            ens.mean_meas_heat.into(),
        ));
        row.push((
            format!("{prefix}_jump_fraction"),
            ens.jump_fraction().into(),
        ));
        row.push((format!("{prefix}_ideal_work"), ideal_w.into()));
        work += ens.mean_work;
        heat += ens.mean_meas_heat;
    }
    row.push(("total_mean_work".into(), work.into()));
    row.push(("total_ideal_work".into(), ideal.w_tot.into()));
    row.push(("total_mean_meas_heat".into(), heat.into()));
    let any = jumped.iter().filter(|j| **j).count() as f64 / jumped.len().max(1) as f64;
    row.push(("any_jump_fraction".into(), any.into()));
    Ok(vec![row])
}

fn bound_rows(
    config: &ExperimentConfig,
    panel: &ResolvedPanel,
    p: &EngineParams,
) -> Result<Vec<Row>, CliError> {
    let stage = panel.stage;
    let gamma = engine_model::coupling(p, stage).map_err(numerical)?;
    let b = theorem1_bound(p, stage, gamma, &config.settings).map_err(numerical)?;
    Ok(vec![vec![
        ("stage".into(), stage_name(stage).into()),
        ("gamma".into(), b.gamma.into()),
        ("tau".into(), b.tau.into()),
        ("actual_error".into(), b.actual_error.into()),
        ("bound_value".into(), b.bound_value.into()),
        ("sup_a".into(), b.sup_a.into()),
        ("sup_a_dot".into(), b.sup_a_dot.into()),
        ("sup_g".into(), b.sup_g.into()),
        ("sup_g_dot".into(), b.sup_g_dot.into()),
    ]])
}

fn point_rows(
    config: &ExperimentConfig,
    panel: &ResolvedPanel,
    idx: usize,
    point: &SweepPoint,
) -> Result<Vec<Row>, CliError> {
    let p = &point.params;
    let rows = match panel.kind {
        PanelKind::Cycle => cycle_rows(config, panel, idx, p)?,
        PanelKind::Stroke => stroke_rows(config, panel, idx, p)?,
        PanelKind::JointWork => joint_work_rows(config, p)?,
        PanelKind::Trajectories => trajectory_rows(config, panel, p)?,
        PanelKind::ZenoAverage => zeno_average_rows(config, panel, p)?,
        PanelKind::Bound => bound_rows(config, panel, p)?,
    };
    let coords: Row = panel
        .columns
        .iter()
        .cloned()
        .zip(point.coords.iter().map(|x| Cell::Num(*x)))
        .collect();
    // A quantity that is also a sweep coordinate is reported once, as the coordinate.
    Ok(rows
        .into_iter()
        .map(|r| {
            let own = r.into_iter().filter(|(k, _)| !panel.columns.contains(k));
            coords.iter().cloned().chain(own).collect()
        })
        .collect())
}

fn assemble(panel: &ResolvedPanel, per_point: Vec<Vec<Row>>) -> Result<ResultTable, CliError> {
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for row in per_point.into_iter().flatten() {
        let names: Vec<String> = row.iter().map(|(k, _)| k.clone()).collect();
        match &columns {
            None => columns = Some(names),
            Some(c) if *c != names => {
                return Err(CliError::Numerical(format!(
                    "{}: inconsistent columns",
                    panel.id
                )))
            }
            _ => {}
        }
        rows.push(row.into_iter().map(|(_, v)| v).collect());
    }
    Ok(ResultTable {
        panel: panel.id.clone(),
        columns: columns.unwrap_or_else(|| panel.columns.clone()),
        rows,
    })
}

/// Runs every panel; sweep points are spread over `workers` threads and
/// reassembled in sweep order, so the output does not depend on `workers`.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ResultSet, CliError> {
    let panels = config.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let tables = pool.install(|| {
        panels
            .iter()
            .map(|panel| {
                let per_point = panel
                    .points
                    .par_iter()
                    .enumerate()
                    .map(|(i, point)| point_rows(config, panel, i, point))
                    .collect::<Result<Vec<_>, CliError>>()?;
                assemble(panel, per_point)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let outputs = tables
        .iter()
        .map(|t| OutputFile {
            panel: t.panel.clone(),
            file: format!("{}.csv", t.panel),
            rows: t.rows.len(),
            columns: t.columns.clone(),
        })
        .collect();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        name: config.name.clone(),
        preset: config.preset.clone(),
        master_seed: config.params.master_seed,
        config: config.clone(),
        outputs,
    };
    Ok(ResultSet { manifest, tables })
}
