//! Experiment files: a base parameter set plus one or more panels, each a
//! sweep of one kind of computation. See `docs/config.md` for the schema.

use std::collections::BTreeMap;
use std::path::PathBuf;

use engine_model::{DriveMode, EngineParams, Stage};
use propagation::PropagationSettings;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thermo_ledger::{CycleConfig, NormConvention};
use zeno_monte_carlo::MeasurementBasis;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Desk,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub profile: Option<Profile>,
    #[serde(default)]
    pub params: EngineParams,
    #[serde(default)]
    pub settings: PropagationSettings,
    #[serde(default)]
    pub cycle: CycleOptions,
    /// Default for `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Default for `--workers` when neither the flag nor the environment sets it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(rename = "panel")]
    pub panels: Vec<Panel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleOptions {
    pub closure_tol: f64,
    pub min_cycles: u32,
    pub max_cycles: u32,
    pub norm: NormConvention,
    pub lubricant_reset_cost: bool,
}

impl Default for CycleOptions {
    fn default() -> Self {
        let c = CycleConfig::default();
        Self {
            closure_tol: c.closure_tol,
            min_cycles: c.min_cycles,
            max_cycles: c.max_cycles,
            norm: c.norm,
            lubricant_reset_cost: c.lubricant_reset_cost,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelKind {
    /// Limit-cycle ledger per sweep point.
    Cycle,
    /// One work stroke from the Gibbs state of its initial Hamiltonian.
    Stroke,
    /// Joint strong-coupling work of both strokes.
    JointWork,
    /// Per-measurement increments of an ensemble, both strokes.
    Trajectories,
    /// Ensemble averages of both monitored strokes.
    ZenoAverage,
    /// Strong-coupling error bound against the propagated error.
    Bound,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkStage {
    #[default]
    Compression,
    Expansion,
}

impl From<WorkStage> for Stage {
    fn from(s: WorkStage) -> Self {
        match s {
            WorkStage::Compression => Stage::Compression,
            WorkStage::Expansion => Stage::Expansion,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Panel {
    pub id: String,
    pub kind: PanelKind,
    #[serde(default)]
    pub mode: Option<DriveMode>,
    #[serde(default)]
    pub basis: MeasurementBasis,
    #[serde(default)]
    pub stage: WorkStage,
    /// Overrides applied on top of the experiment's `params`.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub derived: Vec<Derived>,
}

/// One sweep axis: either a single `parameter` with `values` or
/// `start`/`stop`/`step`, or several `parameters` varied together through
/// `points`. Axes combine as a Cartesian product, first axis outermost.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

impl SweepAxis {
    pub fn list(parameter: &str, values: &[f64]) -> Self {
        Self {
            parameter: Some(parameter.into()),
            values: Some(values.to_vec()),
            ..Self::default()
        }
    }

    pub fn range(parameter: &str, start: f64, stop: f64, step: f64) -> Self {
        Self {
            parameter: Some(parameter.into()),
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
            ..Self::default()
        }
    }

    pub fn zip(parameters: &[&str], points: &[&[f64]]) -> Self {
        Self {
            parameters: Some(parameters.iter().map(|s| s.to_string()).collect()),
            points: Some(points.iter().map(|p| p.to_vec()).collect()),
            ..Self::default()
        }
    }

    /// Names and the list of coordinate tuples.
    fn expand(&self, where_: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
        let err = |m: String| CliError::Config(format!("{where_}: {m}"));
        match (&self.parameter, &self.parameters) {
            (Some(name), None) => {
                if self.points.is_some() {
                    return Err(err("`points` goes with `parameters`".into()));
                }
                let values = match (&self.values, self.start, self.stop, self.step) {
                    (Some(v), None, None, None) => v.clone(),
                    (None, Some(a), Some(b), Some(h)) => range_values(a, b, h).map_err(err)?,
                    _ => {
                        return Err(err(
                            "give either `values` or all of `start`, `stop`, `step`".into(),
                        ))
                    }
                };
                if values.is_empty() {
                    return Err(err("empty sweep".into()));
                }
                Ok((
                    vec![name.clone()],
                    values.into_iter().map(|v| vec![v]).collect(),
                ))
            }
            (None, Some(names)) => {
                if self.values.is_some()
                    || self.start.is_some()
                    || self.stop.is_some()
                    || self.step.is_some()
                {
                    return Err(err("`parameters` takes `points` only".into()));
                }
                let points = self
                    .points
                    .clone()
                    .ok_or_else(|| err("missing `points`".into()))?;
                if names.is_empty() || points.is_empty() {
                    return Err(err("empty sweep".into()));
                }
                if let Some(bad) = points.iter().find(|p| p.len() != names.len()) {
                    return Err(err(format!(
                        "point {bad:?} does not have {} entries",
                        names.len()
                    )));
                }
                Ok((names.clone(), points))
            }
            _ => Err(err("give exactly one of `parameter` or `parameters`".into())),
        }
    }
}

/// `target = factor · source`, applied after the sweep coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Derived {
    pub target: String,
    pub source: String,
    #[serde(default = "one")]
    pub factor: f64,
}

fn one() -> f64 {
    1.0
}

/// Inclusive grid, each value rounded to 12 significant digits so that
/// `5 + 3·0.05` prints as `5.15`.
pub fn range_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(format!("bad range {start}..{stop} step {step}"));
    }
    let n = ((stop - start) / step).round();
    if (start + n * step - stop).abs() > 1e-9 * step.max(stop.abs()) {
        return Err(format!("step {step} does not divide {start}..{stop}"));
    }
    Ok((0..=n as usize)
        .map(|i| {
            format!("{:.11e}", start + i as f64 * step)
                .parse()
                .expect("formatted float")
        })
        .collect())
}

/// Sets a parameter by its file name. `gamma` sets both work-stroke
/// couplings and `bath_rate` both dissipative rates.
pub fn set_param(p: &mut EngineParams, name: &str, value: f64) -> Result<(), CliError> {
    match name {
        "gamma" => {
            p.gamma_comp = value;
            p.gamma_exp = value;
            return Ok(());
        }
        "bath_rate" => {
            p.gamma_h = value;
            p.gamma_c = value;
            return Ok(());
        }
        _ => {}
    }
    let mut tree = serde_json::to_value(&*p).expect("params serialize");
    let map = tree.as_object_mut().expect("params are a table");
    let slot = map
        .get_mut(name)
        .ok_or_else(|| CliError::Config(format!("unknown parameter `{name}`")))?;
    *slot = if slot.is_u64() {
        if value < 0.0 || value.fract() != 0.0 || value > u64::MAX as f64 {
            return Err(CliError::Config(format!(
                "parameter `{name}` needs a non-negative integer, got {value}"
            )));
        }
        Value::from(value as u64)
    } else {
        Value::from(value)
    };
    *p = serde_json::from_value(tree)
        .map_err(|e| CliError::Config(format!("parameter `{name}`: {e}")))?;
    Ok(())
}

pub fn get_param(p: &EngineParams, name: &str) -> Result<f64, CliError> {
    match name {
        "gamma" => return Ok(p.gamma_comp),
        "bath_rate" => return Ok(p.gamma_h),
        _ => {}
    }
    serde_json::to_value(p)
        .expect("params serialize")
        .get(name)
        .and_then(Value::as_f64)
        .ok_or_else(|| CliError::Config(format!("unknown parameter `{name}`")))
}

/// A panel with its sweep expanded.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedPanel {
    pub id: String,
    pub kind: PanelKind,
    pub mode: Option<DriveMode>,
    pub basis: MeasurementBasis,
    pub stage: Stage,
    pub columns: Vec<String>,
    pub points: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    /// Swept values followed by derived values, in `ResolvedPanel::columns` order.
    pub coords: Vec<f64>,
    pub params: EngineParams,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn cycle_config(
        &self,
        mode: DriveMode,
        basis: MeasurementBasis,
        trajectory: u64,
    ) -> CycleConfig {
        CycleConfig {
            mode,
            basis,
            settings: self.settings.clone(),
            norm: self.cycle.norm,
            trajectory,
            lubricant_reset_cost: self.cycle.lubricant_reset_cost,
            closure_tol: self.cycle.closure_tol,
            min_cycles: self.cycle.min_cycles,
            max_cycles: self.cycle.max_cycles,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.resolve().map(|_| ())
    }

    pub fn resolve(&self) -> Result<Vec<ResolvedPanel>, CliError> {
        let cfg = |m: String| CliError::Config(m);
        if self.name.trim().is_empty() {
            return Err(cfg("`name` must not be empty".into()));
        }
        if self.workers == Some(0) {
            return Err(cfg("`workers` must be at least 1".into()));
        }
        self.params
            .validate()
            .map_err(|e| cfg(format!("params: {e}")))?;
        self.settings
            .validate()
            .map_err(|e| cfg(format!("settings: {e}")))?;
        self.cycle_config(DriveMode::Bare, MeasurementBasis::XBasis, 0)
            .validate()
            .map_err(|e| cfg(format!("cycle: {e}")))?;
        if self.panels.is_empty() {
            return Err(cfg("at least one [[panel]] is required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        self.panels
            .iter()
            .map(|panel| {
                let at = format!("panel `{}`", panel.id);
                let valid_id = !panel.id.is_empty()
                    && panel
                        .id
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
                if !valid_id {
                    return Err(cfg(format!(
                        "{at}: id must be non-empty ASCII letters, digits, `_` or `-`"
                    )));
                }
                if !seen.insert(panel.id.clone()) {
                    return Err(cfg(format!("{at}: duplicate id")));
                }
                let mode = match (panel.kind, panel.mode) {
                    (PanelKind::Cycle | PanelKind::Stroke, None) => {
                        return Err(cfg(format!(
                            "{at}: `mode` is required for kind {:?}",
                            panel.kind
                        )))
                    }
                    (PanelKind::Cycle | PanelKind::Stroke, m) => m,
                    (_, Some(m)) => {
                        return Err(cfg(format!(
                            "{at}: `mode` ({m:?}) does not apply to kind {:?}",
                            panel.kind
                        )))
                    }
                    (_, None) => None,
                };
                let mut base = self.params.clone();
                for (name, value) in &panel.params {
                    set_param(&mut base, name, *value)
                        .map_err(|e| cfg(format!("{at}: params: {}", e.detail())))?;
                }
                let mut columns = Vec::new();
                let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
                for (i, axis) in panel.sweep.iter().enumerate() {
                    let (names, tuples) = axis.expand(&format!("{at}: sweep[{i}]"))?;
                    for n in &names {
                        get_param(&base, n)
                            .map_err(|e| cfg(format!("{at}: sweep[{i}]: {}", e.detail())))?;
                        if columns.contains(n) {
                            return Err(cfg(format!("{at}: parameter `{n}` swept twice")));
                        }
                    }
                    columns.extend(names);
                    grid = grid
                        .into_iter()
                        .flat_map(|prefix| {
                            tuples.iter().map(move |t| {
                                prefix.iter().chain(t.iter()).copied().collect::<Vec<_>>()
                            })
                        })
                        .collect();
                }
                for d in &panel.derived {
                    get_param(&base, &d.source)
                        .map_err(|e| cfg(format!("{at}: derived: {}", e.detail())))?;
                    get_param(&base, &d.target)
                        .map_err(|e| cfg(format!("{at}: derived: {}", e.detail())))?;
                    if columns.contains(&d.target) {
                        return Err(cfg(format!(
                            "{at}: derived target `{}` is also swept",
                            d.target
                        )));
                    }
                }
                let swept = columns.len();
                for d in &panel.derived {
                    if columns.contains(&d.target) {
                        return Err(cfg(format!(
                            "{at}: derived target `{}` given twice",
                            d.target
                        )));
                    }
                    columns.push(d.target.clone());
                }
                let points = grid
                    .into_iter()
                    .map(|mut coords| {
                        let mut p = base.clone();
                        for (name, v) in columns[..swept].iter().zip(&coords) {
                            set_param(&mut p, name, *v)?;
                        }
                        for d in &panel.derived {
                            let v = d.factor * get_param(&p, &d.source)?;
                            set_param(&mut p, &d.target, v)?;
                            coords.push(v);
                        }
                        p.validate()
                            .map_err(|e| cfg(format!("{at}: point {coords:?}: {e}")))?;
                        Ok(SweepPoint { coords, params: p })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(ResolvedPanel {
                    id: panel.id.clone(),
                    kind: panel.kind,
                    mode,
                    basis: panel.basis,
                    stage: panel.stage.into(),
                    columns,
                    points,
                })
            })
            .collect()
    }
}
