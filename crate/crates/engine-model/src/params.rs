use serde::{Deserialize, Serialize};

use crate::ModelError;

/// Every scalar of the engine model. Units are natural (ħ = k_B = 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineParams {
    /// Working-medium gap at the cold end of the cycle.
    pub omega: f64,
    /// Transverse drive amplitude reached at the hot end.
    pub omega0: f64,
    /// Lubricant frequency.
    pub omega_l: f64,
    pub gamma_comp: f64,
    pub gamma_exp: f64,
    /// Dissipative rate of the hot bath.
    pub gamma_h: f64,
    /// Dissipative rate of the cold bath.
    pub gamma_c: f64,
    #[serde(rename = "T_h")]
    pub t_h: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
    pub tau_comp: f64,
    pub tau_hot: f64,
    pub tau_exp: f64,
    pub tau_cold: f64,
    /// Measurements per work stroke.
    pub n_meas: u32,
    pub n_traj: u32,
    /// Drive-cost constant.
    pub nu: f64,
    /// Inverse temperature of the bath that resets the measurement record.
    pub beta_reset: f64,
    pub master_seed: u64,
    /// Bloch X component of the freshly prepared lubricant; 1 is `|+⟩⟨+|`.
    pub lubricant_polarization: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            omega0: 3.01105,
            omega_l: 1.0,
            gamma_comp: 20.0,
            gamma_exp: 20.0,
            gamma_h: 0.5,
            gamma_c: 0.5,
            t_h: 3.0,
            t_c: 0.5,
            tau_comp: 9.0,
            tau_hot: 5.0,
            tau_exp: 4.5,
            tau_cold: 12.0,
            n_meas: 200,
            n_traj: 50,
            nu: 0.0,
            beta_reset: 2.0,
            master_seed: 20_240_601,
            lubricant_polarization: 1.0,
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParam {
            field,
            reason: format!("must be finite and > 0, got {v}"),
        })
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParam {
            field,
            reason: format!("must be finite and >= 0, got {v}"),
        })
    }
}

impl EngineParams {
    /// Couplings, bath rates, `omega_l` and `nu` may be zero (decoupled and
    /// closed-system limits); everything else must be strictly positive.
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("omega", self.omega)?;
        positive("omega0", self.omega0)?;
        non_negative("omega_l", self.omega_l)?;
        non_negative("gamma_comp", self.gamma_comp)?;
        non_negative("gamma_exp", self.gamma_exp)?;
        non_negative("gamma_h", self.gamma_h)?;
        non_negative("gamma_c", self.gamma_c)?;
        positive("T_h", self.t_h)?;
        positive("T_c", self.t_c)?;
        positive("tau_comp", self.tau_comp)?;
        positive("tau_hot", self.tau_hot)?;
        positive("tau_exp", self.tau_exp)?;
        positive("tau_cold", self.tau_cold)?;
        non_negative("nu", self.nu)?;
        positive("beta_reset", self.beta_reset)?;
        if self.n_meas == 0 {
            return Err(ModelError::InvalidParam {
                field: "n_meas",
                reason: "must be >= 1".into(),
            });
        }
        if self.n_traj == 0 {
            return Err(ModelError::InvalidParam {
                field: "n_traj",
                reason: "must be >= 1".into(),
            });
        }
        let r = self.lubricant_polarization;
        if !(r.is_finite() && (-1.0..=1.0).contains(&r)) {
            return Err(ModelError::InvalidParam {
                field: "lubricant_polarization",
                reason: format!("must lie in [-1, 1], got {r}"),
            });
        }
        Ok(())
    }

    /// Hot-end gap `Ω = √(ω² + Ω₀²)`.
    pub fn big_omega(&self) -> f64 {
        self.omega.hypot(self.omega0)
    }

    pub fn beta_h(&self) -> f64 {
        1.0 / self.t_h
    }

    pub fn beta_c(&self) -> f64 {
        1.0 / self.t_c
    }

    pub fn cycle_time(&self) -> f64 {
        self.tau_comp + self.tau_hot + self.tau_exp + self.tau_cold
    }

    /// Work extraction is possible iff `ω/Ω > T_c/T_h`.
    pub fn extraction_regime(&self) -> bool {
        self.omega / self.big_omega() > self.t_c / self.t_h
    }
}
