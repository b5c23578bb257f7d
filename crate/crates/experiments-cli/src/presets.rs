//! Built-in experiments, one per figure dataset. The `desk` profile uses
//! coarser grids so every preset finishes in seconds; `full` samples
//! sweeps at the resolution quoted for the original figures.

use std::collections::BTreeMap;

use engine_model::{DriveMode, EngineParams};
use propagation::PropagationSettings;
use zeno_monte_carlo::MeasurementBasis;

use crate::config::{
    CycleOptions, Derived, ExperimentConfig, Panel, PanelKind, Profile, SweepAxis, WorkStage,
};
use crate::CliError;

pub struct PresetInfo {
    pub id: &'static str,
    pub summary: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        id: "fig3",
        summary: "end-of-compression coherence vs tau_comp, strong coupling and monitored",
    },
    PresetInfo {
        id: "fig4",
        summary: "cycle work, power, efficiency vs tau_comp: bare, strong coupling, monitored",
    },
    PresetInfo {
        id: "fig5",
        summary: "joint strong-coupling work vs tau_comp for several couplings",
    },
    PresetInfo {
        id: "fig6",
        summary: "per-measurement work and heat increments of 50 trajectories",
    },
    PresetInfo {
        id: "fig7",
        summary: "ensemble-averaged monitored work and heat vs number of measurements",
    },
    PresetInfo {
        id: "fig8",
        summary: "log negativity after compression vs coupling",
    },
    PresetInfo {
        id: "fig9",
        summary: "decoupling cost after compression vs coupling",
    },
    PresetInfo {
        id: "fig10",
        summary: "power vs cycle time with slow baths, bare vs lubricated",
    },
    PresetInfo {
        id: "fig11",
        summary: "coherence under computational-basis vs X-basis monitoring",
    },
    PresetInfo {
        id: "bound",
        summary: "strong-coupling error bound vs propagated error",
    },
];

fn panel(id: &str, kind: PanelKind, mode: Option<DriveMode>) -> Panel {
    Panel {
        id: id.into(),
        kind,
        mode,
        basis: MeasurementBasis::XBasis,
        stage: WorkStage::Compression,
        params: BTreeMap::new(),
        sweep: Vec::new(),
        derived: Vec::new(),
    }
}

fn with_params(mut p: Panel, overrides: &[(&str, f64)]) -> Panel {
    p.params
        .extend(overrides.iter().map(|(k, v)| (k.to_string(), *v)));
    p
}

fn half_expansion() -> Derived {
    Derived {
        target: "tau_exp".into(),
        source: "tau_comp".into(),
        factor: 0.5,
    }
}

fn experiment(
    id: &str,
    profile: Profile,
    params: EngineParams,
    panels: Vec<Panel>,
) -> ExperimentConfig {
    ExperimentConfig {
        name: id.into(),
        preset: Some(id.into()),
        profile: Some(profile),
        params,
        settings: PropagationSettings::default(),
        cycle: CycleOptions::default(),
        output_dir: None,
        workers: None,
        panels,
    }
}

fn grid(
    profile: Profile,
    parameter: &str,
    start: f64,
    stop: f64,
    desk: f64,
    full: f64,
) -> SweepAxis {
    SweepAxis::range(
        parameter,
        start,
        stop,
        if profile == Profile::Full { full } else { desk },
    )
}

/// `ω = ω_L = 1, Ω₀ = 5, T_c = 0.5`
fn omega0_five() -> EngineParams {
    EngineParams {
        omega0: 5.0,
        ..EngineParams::default()
    }
}

/// Fig.-4 cycle: `γ_h = γ_c = 0.5`, `τ_hot = 5`, `τ_cold = 12`.
fn fig4_params() -> EngineParams {
    EngineParams {
        tau_hot: 5.0,
        tau_cold: 12.0,
        ..EngineParams::default()
    }
}

pub fn preset(id: &str, profile: Profile) -> Result<ExperimentConfig, CliError> {
    let full = profile == Profile::Full;
    let config = match id {
        "fig3" => {
            let tau = grid(profile, "tau_comp", 0.5, 20.0, 0.5, 0.05);
            let mut sc = panel(
                "strong_coupling",
                PanelKind::Stroke,
                Some(DriveMode::StrongCoupling),
            );
            sc.sweep = vec![
                SweepAxis::list("gamma", &[0.0, 10.0, 20.0, 50.0]),
                tau.clone(),
            ];
            let mut zeno = with_params(
                panel("zeno", PanelKind::Stroke, Some(DriveMode::ZenoMonitored)),
                &[("gamma", 50.0)],
            );
            zeno.sweep = vec![tau];
            let p = EngineParams {
                n_meas: 100,
                ..omega0_five()
            };
            experiment(id, profile, p, vec![sc, zeno])
        }
        "fig4" => {
            let tau = grid(profile, "tau_comp", 5.0, 50.0, 5.0, 0.05);
            let mut bare = panel("bare", PanelKind::Cycle, Some(DriveMode::Bare));
            bare.sweep = vec![tau.clone()];
            let mut sc = panel(
                "strong_coupling",
                PanelKind::Cycle,
                Some(DriveMode::StrongCoupling),
            );
            sc.sweep = vec![SweepAxis::list("gamma", &[10.0, 30.0, 60.0]), tau.clone()];
            let mut zeno = panel("zeno", PanelKind::Cycle, Some(DriveMode::ZenoMonitored));
            zeno.sweep = vec![
                SweepAxis::zip(
                    &["gamma", "n_meas"],
                    &[&[20.0, 200.0], &[50.0, 400.0], &[100.0, 800.0]],
                ),
                tau,
            ];
            let mut panels = vec![bare, sc, zeno];
            for p in &mut panels {
                p.derived.push(half_expansion());
            }
            let mut c = experiment(id, profile, fig4_params(), panels);
            c.cycle.max_cycles = 30;
            c
        }
        "fig5" => {
            let mut jw = panel("joint_work", PanelKind::JointWork, None);
            jw.sweep = vec![
                SweepAxis::list("gamma", &[10.0, 30.0, 60.0]),
                grid(profile, "tau_comp", 5.0, 50.0, 2.5, 0.05),
            ];
            jw.derived.push(half_expansion());
            experiment(id, profile, fig4_params(), vec![jw])
        }
        "fig6" => {
            let p = EngineParams {
                tau_comp: 9.0,
                tau_exp: 4.5,
                n_meas: 200,
                gamma_comp: 20.0,
                gamma_exp: 20.0,
                n_traj: 50,
                ..EngineParams::default()
            };
            experiment(
                id,
                profile,
                p,
                vec![panel("increments", PanelKind::Trajectories, None)],
            )
        }
        "fig7" => {
            let mut avg = panel("averages", PanelKind::ZenoAverage, None);
            let tau = if full {
                SweepAxis::range("tau_comp", 5.0, 10.0, 0.5)
            } else {
                SweepAxis::list("tau_comp", &[5.0, 9.0])
            };
            avg.sweep = vec![
                SweepAxis::list("n_meas", &[50.0, 100.0, 200.0, 400.0, 800.0]),
                tau,
            ];
            avg.derived.push(half_expansion());
            let p = EngineParams {
                gamma_comp: 20.0,
                gamma_exp: 20.0,
                n_traj: 50,
                ..EngineParams::default()
            };
            experiment(id, profile, p, vec![avg])
        }
        "fig8" | "fig9" => {
            let mut sc = panel(
                "compression",
                PanelKind::Stroke,
                Some(DriveMode::StrongCoupling),
            );
            sc.sweep = vec![
                SweepAxis::list("tau_comp", &[1.0, 2.0, 5.0, 10.0]),
                grid(profile, "gamma", 1.0, 50.0, 0.5, 0.01),
            ];
            experiment(id, profile, omega0_five(), vec![sc])
        }
        "fig10" => {
            let tau = grid(profile, "tau_hot", 300.0, 800.0, 50.0, 5.0);
            let cold = Derived {
                target: "tau_cold".into(),
                source: "tau_hot".into(),
                factor: 2.0,
            };
            let mut panels = vec![
                panel("bare", PanelKind::Cycle, Some(DriveMode::Bare)),
                panel(
                    "strong_coupling",
                    PanelKind::Cycle,
                    Some(DriveMode::StrongCoupling),
                ),
                panel("zeno", PanelKind::Cycle, Some(DriveMode::ZenoMonitored)),
            ];
            for p in &mut panels {
                p.sweep = vec![tau.clone()];
                p.derived.push(cold.clone());
            }
            let p = EngineParams {
                gamma_h: 0.005,
                gamma_c: 0.005,
                tau_comp: 5.0,
                tau_exp: 2.5,
                gamma_comp: 60.0,
                gamma_exp: 60.0,
                n_meas: 400,
                ..EngineParams::default()
            };
            experiment(id, profile, p, panels)
        }
        "fig11" => {
            let tau = grid(profile, "tau_comp", 0.5, 20.0, 0.5, 0.05);
            let mut comp = panel(
                "computational_basis",
                PanelKind::Stroke,
                Some(DriveMode::ZenoMonitored),
            );
            comp.basis = MeasurementBasis::ComputationalBasis;
            comp.sweep = vec![tau.clone()];
            let mut x = panel("x_basis", PanelKind::Stroke, Some(DriveMode::ZenoMonitored));
            x.sweep = vec![tau];
            let p = EngineParams {
                gamma_comp: 50.0,
                n_meas: 100,
                ..omega0_five()
            };
            experiment(id, profile, p, vec![comp, x])
        }
        "bound" => {
            let gammas = SweepAxis::list("gamma", &[10.0, 20.0, 50.0, 100.0, 200.0]);
            let mut comp = panel("compression", PanelKind::Bound, None);
            comp.sweep = vec![gammas.clone()];
            let mut exp = panel("expansion", PanelKind::Bound, None);
            exp.stage = WorkStage::Expansion;
            exp.sweep = vec![gammas];
            let p = EngineParams {
                tau_comp: 5.0,
                tau_exp: 5.0,
                ..omega0_five()
            };
            experiment(id, profile, p, vec![comp, exp])
        }
        other => return Err(CliError::UnknownPreset(other.into())),
    };
    config.validate()?;
    Ok(config)
}
