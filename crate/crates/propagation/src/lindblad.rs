//! Thermalization strokes. The generator is
//! `L ρ = −i[H, ρ] + γ n̄ (σ⁺ρσ⁻ − ½{σ⁻σ⁺, ρ}) + γ(n̄+1)(σ⁻ρσ⁺ − ½{σ⁺σ⁻, ρ})`
//! with `σ⁺ = |0_h⟩⟨1_h|` built from the upper (`|0_h⟩`) and lower (`|1_h⟩`)
//! eigenvectors of the stroke Hamiltonian, and `n̄` the Bose factor at the
//! stroke gap.
//!
//! Integration is classical RK4 with a fixed step. The generator is linear
//! and time independent, so one RK4 step is the fixed superoperator
//! `M = Σ_{k≤4} (hL)^k/k!` and `N` steps are `M^N`, applied by repeated
//! squaring.

use engine_model::{bose_occupation, h_cold, h_hot, EngineParams};
use matrix_core::{hermitian_eigendecomposition, DensityOperator, OperatorMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::{PropagationError, PropagationSettings, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bath {
    Hot,
    Cold,
}

impl Bath {
    pub fn hamiltonian(self, p: &EngineParams) -> OperatorMatrix {
        match self {
            Bath::Hot => h_hot(p),
            Bath::Cold => h_cold(p),
        }
    }

    pub fn rate(self, p: &EngineParams) -> f64 {
        match self {
            Bath::Hot => p.gamma_h,
            Bath::Cold => p.gamma_c,
        }
    }

    pub fn temperature(self, p: &EngineParams) -> f64 {
        match self {
            Bath::Hot => p.t_h,
            Bath::Cold => p.t_c,
        }
    }

    pub fn gap(self, p: &EngineParams) -> f64 {
        match self {
            Bath::Hot => p.big_omega(),
            Bath::Cold => p.omega,
        }
    }

    pub fn occupation(self, p: &EngineParams) -> f64 {
        bose_occupation(self.gap(p), self.temperature(p))
    }
}

/// `γ(2n̄+1)/2`
pub fn liouvillian_gap(p: &EngineParams, bath: Bath) -> f64 {
    0.5 * bath.rate(p) * (2.0 * bath.occupation(p) + 1.0)
}

fn unvec(v: &[C64]) -> OperatorMatrix {
    OperatorMatrix::from_row_major(2, v.to_vec()).expect("finite 2x2")
}

/// The generator as a 4x4 superoperator on row-major `vec(ρ)`.
pub fn lindblad_generator(p: &EngineParams, bath: Bath) -> Result<OperatorMatrix> {
    let h = bath.hamiltonian(p);
    let e = hermitian_eigendecomposition(&h)?;
    let upper = e.vector(1);
    let lower = e.vector(0);
    let sigma_plus = OperatorMatrix::outer(&upper, &lower);
    let sigma_minus = sigma_plus.dagger();
    let n = bath.occupation(p);
    let g = bath.rate(p);
    let lower_proj = sigma_minus.matmul(&sigma_plus);
    let upper_proj = sigma_plus.matmul(&sigma_minus);
    let mi = C64::new(0.0, -1.0);

    let apply = |rho: &OperatorMatrix| -> OperatorMatrix {
        let coherent = h.commutator(rho).scale(mi);
        let up = &sigma_plus.matmul(rho).matmul(&sigma_minus)
            - &lower_proj.anticommutator(rho).scale_real(0.5);
        let down = &sigma_minus.matmul(rho).matmul(&sigma_plus)
            - &upper_proj.anticommutator(rho).scale_real(0.5);
        &(&coherent + &up.scale_real(g * n)) + &down.scale_real(g * (n + 1.0))
    };

    let mut sup = OperatorMatrix::zeros(4);
    for k in 0..4 {
        let mut basis = [C64::new(0.0, 0.0); 4];
        basis[k] = C64::new(1.0, 0.0);
        let image = apply(&unvec(&basis));
        for (row, z) in image.as_slice().iter().enumerate() {
            sup.set(row, k, *z);
        }
    }
    Ok(sup)
}

fn rk4_step_map(generator: &OperatorMatrix, h: f64) -> OperatorMatrix {
    let hl = generator.scale_real(h);
    let mut term = OperatorMatrix::identity(4);
    let mut total = term.clone();
    for k in 1..=4 {
        term = hl.matmul(&term).scale_real(1.0 / k as f64);
        total = &total + &term;
    }
    total
}

/// Re-imposes `Tr[M(ρ)] = Tr ρ` on a row-major superoperator. The RK4 map
/// is trace preserving exactly, but rounding drift over ~1e6 steps is not.
fn restore_trace(mut m: OperatorMatrix) -> OperatorMatrix {
    for col in 0..4 {
        let target = if col == 0 || col == 3 { 1.0 } else { 0.0 };
        let defect = C64::new(target, 0.0) - m.get(0, col) - m.get(3, col);
        m.set(0, col, m.get(0, col) + defect * 0.5);
        m.set(3, col, m.get(3, col) + defect * 0.5);
    }
    m
}

fn power(m: &OperatorMatrix, mut n: usize) -> OperatorMatrix {
    let mut result = OperatorMatrix::identity(m.dim());
    let mut base = restore_trace(m.clone());
    while n > 0 {
        if n & 1 == 1 {
            result = restore_trace(result.matmul(&base));
        }
        n >>= 1;
        if n > 0 {
            base = restore_trace(base.matmul(&base));
        }
    }
    result
}

fn apply_super(m: &OperatorMatrix, rho: &OperatorMatrix) -> OperatorMatrix {
    unvec(&m.apply(rho.as_slice()))
}

fn validated(m: OperatorMatrix) -> Result<DensityOperator> {
    DensityOperator::new(m)
        .map_err(|e| PropagationError::Invariant(format!("Lindblad output: {e}")))
}

fn step_plan(settings: &PropagationSettings, duration: f64) -> (usize, f64) {
    if duration <= 0.0 {
        return (0, 0.0);
    }
    let n = ((duration / settings.lindblad_step - 1e-9).ceil() as usize).max(1);
    (n, duration / n as f64)
}

/// Integrates a thermalization stroke for `duration`.
pub fn propagate_lindblad(
    bath: Bath,
    p: &EngineParams,
    rho: &DensityOperator,
    duration: f64,
    settings: &PropagationSettings,
) -> Result<DensityOperator> {
    settings.validate()?;
    rho.matrix().check_dim(2)?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(PropagationError::InvalidInterval {
            t_i: 0.0,
            t_f: duration,
        });
    }
    let (n, h) = step_plan(settings, duration);
    if n == 0 {
        return Ok(rho.clone());
    }
    let generator = lindblad_generator(p, bath)?;
    let m = power(&rk4_step_map(&generator, h), n);
    validated(apply_super(&m, rho.matrix()).hermitian_part())
}

/// States at `k · duration / samples` for `k = 0..=samples`, each produced
/// by the same RK4 step as [`propagate_lindblad`].
pub fn lindblad_samples(
    bath: Bath,
    p: &EngineParams,
    rho: &DensityOperator,
    duration: f64,
    samples: usize,
    settings: &PropagationSettings,
) -> Result<Vec<(f64, DensityOperator)>> {
    settings.validate()?;
    let samples = samples.max(1);
    let chunk = duration / samples as f64;
    let (n, h) = step_plan(settings, chunk);
    let generator = lindblad_generator(p, bath)?;
    let m = power(&rk4_step_map(&generator, h), n);
    let mut out = Vec::with_capacity(samples + 1);
    let mut state = rho.clone();
    out.push((0.0, state.clone()));
    for k in 1..=samples {
        state = validated(apply_super(&m, state.matrix()).hermitian_part())?;
        out.push((k as f64 * chunk, state.clone()));
    }
    Ok(out)
}
