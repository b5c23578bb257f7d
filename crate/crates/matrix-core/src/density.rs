use crate::{hermitian_eigendecomposition, scaled_tol, MatrixError, OperatorMatrix, Result, C64};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to this value are accepted as numerical noise; anything
/// lower is an error, never clipped.
pub const POSITIVITY_SLACK: f64 = -1e-9;

/// A validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: OperatorMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity. The stored matrix is
    /// the Hermitian part of `matrix`.
    pub fn new(matrix: OperatorMatrix) -> Result<Self> {
        let deviation = matrix.hermiticity_defect();
        if deviation > scaled_tol(&matrix, HERMITICITY_TOL) {
            return Err(MatrixError::NotHermitian { deviation });
        }
        let matrix = matrix.hermitian_part();
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(MatrixError::BadTrace { trace });
        }
        let min_eigenvalue = hermitian_eigendecomposition(&matrix)?.values[0];
        if min_eigenvalue < POSITIVITY_SLACK {
            return Err(MatrixError::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// `M / Tr M`, then validated.
    pub fn normalized(matrix: OperatorMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(MatrixError::BadTrace { trace: tr });
        }
        Self::new(matrix.scale_real(1.0 / tr))
    }

    pub fn pure(ket: &[C64]) -> Result<Self> {
        Self::normalized(OperatorMatrix::outer(ket, ket))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: OperatorMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> OperatorMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `⟨h⟩ = Tr[h ρ]`
    pub fn expectation(&self, h: &OperatorMatrix) -> f64 {
        h.expectation(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigendecomposition(&self.matrix)
            .expect("validated state")
            .values[0]
    }

    /// `‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &Self) -> f64 {
        crate::norms(&(&self.matrix - &other.matrix)).trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_states() {
        let rho = OperatorMatrix::from_real(2, &[0.25, 0.1, 0.1, 0.75]).unwrap();
        assert!(DensityOperator::new(rho).is_ok());
        let plus = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let p = DensityOperator::pure(&plus).unwrap();
        assert!((p.matrix().get(0, 1).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_states() {
        let bad_trace = OperatorMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.6]).unwrap();
        assert!(matches!(
            DensityOperator::new(bad_trace),
            Err(MatrixError::BadTrace { .. })
        ));
        let negative = OperatorMatrix::from_real(2, &[1.1, 0.0, 0.0, -0.1]).unwrap();
        assert!(matches!(
            DensityOperator::new(negative),
            Err(MatrixError::NotPositive { .. })
        ));
        let skew = OperatorMatrix::from_real(2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(matches!(
            DensityOperator::new(skew),
            Err(MatrixError::NotHermitian { .. })
        ));
    }

    #[test]
    fn slack_admits_roundoff_negativity() {
        let m = OperatorMatrix::from_real(2, &[1.0 + 5e-10, 0.0, 0.0, -5e-10]).unwrap();
        assert!(DensityOperator::new(m).is_ok());
    }
}
