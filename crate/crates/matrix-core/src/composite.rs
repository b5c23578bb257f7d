//! Kronecker products and the two-qubit partial operations.

use crate::{OperatorMatrix, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

pub fn tensor_product(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let (da, db) = (a.dim(), b.dim());
    let mut out = OperatorMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.set(i * db + k, j * db + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Trace over the other qubit, keeping `keep`.
pub fn partial_trace(m: &OperatorMatrix, keep: Subsystem) -> Result<OperatorMatrix> {
    m.check_dim(4)?;
    let mut out = OperatorMatrix::zeros(2);
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = m.get(0, 0) * 0.0;
            for k in 0..2 {
                acc += match keep {
                    Subsystem::First => m.get(2 * a + k, 2 * b + k),
                    Subsystem::Second => m.get(2 * k + a, 2 * k + b),
                };
            }
            out.set(a, b, acc);
        }
    }
    Ok(out)
}

/// Transpose of the indices belonging to `side`.
pub fn partial_transpose(m: &OperatorMatrix, side: Subsystem) -> Result<OperatorMatrix> {
    m.check_dim(4)?;
    let mut out = OperatorMatrix::zeros(4);
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    let (r, c) = match side {
                        Subsystem::First => (2 * j + k, 2 * i + l),
                        Subsystem::Second => (2 * i + l, 2 * j + k),
                    };
                    out.set(2 * i + k, 2 * j + l, m.get(r, c));
                }
            }
        }
    }
    Ok(out)
}
