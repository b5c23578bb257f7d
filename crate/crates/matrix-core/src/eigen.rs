//! Hermitian eigensolver, unitary exponential, and matrix norms.
//!
//! 2x2 inputs use the closed Bloch-vector form. Larger inputs use cyclic
//! complex Jacobi rotations, stopping once the off-diagonal Frobenius mass
//! drops below `1e-13 * max(1, ‖m‖_F)`.

use std::cmp::Ordering;

use crate::{scaled_tol, MatrixError, OperatorMatrix, Result, C64};

const HERMITIAN_INPUT_TOL: f64 = 1e-10;
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigenvalues ascending; `vectors` holds the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: OperatorMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors.get(i, k)).collect()
    }

    /// `V · diag(f(λ)) · V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> OperatorMatrix {
        let n = self.values.len();
        let mut out = OperatorMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..n {
                let vi = self.vectors.get(i, k) * w;
                for j in 0..n {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + vi * self.vectors.get(j, k).conj());
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub trace: f64,
    pub operator: f64,
    pub frobenius: f64,
}

fn require_hermitian(m: &OperatorMatrix) -> Result<()> {
    let deviation = m.hermiticity_defect();
    if deviation > scaled_tol(m, HERMITIAN_INPUT_TOL) {
        return Err(MatrixError::NotHermitian { deviation });
    }
    Ok(())
}

pub fn hermitian_eigendecomposition(m: &OperatorMatrix) -> Result<Eigen> {
    require_hermitian(m)?;
    Ok(match m.dim() {
        1 => Eigen {
            values: vec![m.get(0, 0).re],
            vectors: OperatorMatrix::identity(1),
        },
        2 => eigen_2x2(m),
        _ => jacobi(m),
    })
}

/// `h = a·I + r·(n·σ)` with polar angle `θ` of `n` and `e^{iφ} = conj(h01)/|h01|`.
fn eigen_2x2(m: &OperatorMatrix) -> Eigen {
    let h00 = m.get(0, 0).re;
    let h11 = m.get(1, 1).re;
    let h01 = (m.get(0, 1) + m.get(1, 0).conj()) * 0.5;
    let a = 0.5 * (h00 + h11);
    let bz = 0.5 * (h00 - h11);
    let off = h01.norm();
    let r = bz.hypot(off);
    let phase = if off > 0.0 {
        h01.conj() / off
    } else {
        C64::new(1.0, 0.0)
    };
    let theta = off.atan2(bz);
    let (s, c) = (0.5 * theta).sin_cos();
    // columns: lower (a - r), upper (a + r)
    let lower = [-phase.conj() * s, C64::new(c, 0.0)];
    let upper = [C64::new(c, 0.0), phase * s];
    let vectors =
        OperatorMatrix::from_row_major(2, vec![lower[0], upper[0], lower[1], upper[1]]).unwrap();
    Eigen {
        values: vec![a - r, a + r],
        vectors,
    }
}

fn off_diagonal_mass(a: &OperatorMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(m: &OperatorMatrix) -> Eigen {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = OperatorMatrix::identity(n);
    let frob = a
        .as_slice()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let threshold = JACOBI_TOL * frob.max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_mass(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // a_pq = |a_pq| e^{iφ}; J = diag(1, e^{-iφ}) · real rotation
                let eiphi = apq / mag;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let cot2 = (aqq - app) / (2.0 * mag);
                let t = if cot2.is_finite() {
                    cot2.signum() / (cot2.abs() + (cot2 * cot2 + 1.0).sqrt())
                } else {
                    0.0
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -eiphi.conj() * s;
                let jqq = eiphi.conj() * c;

                // A <- A J
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * jpp + akq * jqp);
                    a.set(k, q, akp * jpq + akq * jqq);
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, jpp.conj() * apk + jqp.conj() * aqk);
                    a.set(q, k, jpq.conj() * apk + jqq.conj() * aqk);
                }
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                let dp = a.get(p, p).re;
                let dq = a.get(q, q).re;
                a.set(p, p, C64::new(dp, 0.0));
                a.set(q, q, C64::new(dq, 0.0));
                // V <- V J
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * jpp + vkq * jqp);
                    v.set(k, q, vkp * jpq + vkq * jqq);
                }
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    sort_eigenpairs(values, v)
}

/// Ascending eigenvalues; within a cluster of near-equal values (relative
/// 1e-10) vectors are ordered by their entries rounded to 1e-9, compared
/// lexicographically.
fn sort_eigenpairs(values: Vec<f64>, v: OperatorMatrix) -> Eigen {
    let n = values.len();
    let scale = values.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let key = |k: usize| -> Vec<(i64, i64)> {
        (0..n)
            .map(|i| {
                let z = v.get(i, k);
                ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64)
            })
            .collect()
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[order[end]] - values[order[end - 1]]).abs() <= 1e-10 * scale {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| key(k));
        start = end;
    }
    let mut vectors = OperatorMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, col, v.get(i, k));
        }
    }
    Eigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors,
    }
}

/// `exp(-i · scale · h)` for Hermitian `h`.
pub fn hermitian_exponential(h: &OperatorMatrix, scale: f64) -> Result<OperatorMatrix> {
    require_hermitian(h)?;
    if h.dim() == 2 {
        // exp(-i s (a + r n·σ)) = e^{-isa} (cos(sr) I - i sin(sr) n·σ)
        let h00 = h.get(0, 0).re;
        let h11 = h.get(1, 1).re;
        let h01 = (h.get(0, 1) + h.get(1, 0).conj()) * 0.5;
        let a = 0.5 * (h00 + h11);
        let bz = 0.5 * (h00 - h11);
        let r = (bz * bz + h01.norm_sqr()).sqrt();
        let global = C64::from_polar(1.0, -scale * a);
        let (sn, cs) = (scale * r).sin_cos();
        let mi = C64::new(0.0, -1.0);
        let (nz, n01) = if r > 0.0 {
            (bz / r, h01 / r)
        } else {
            (0.0, C64::new(0.0, 0.0))
        };
        let u = vec![
            global * (cs + mi * sn * nz),
            global * mi * sn * n01,
            global * mi * sn * n01.conj(),
            global * (cs - mi * sn * nz),
        ];
        return OperatorMatrix::from_row_major(2, u);
    }
    let e = hermitian_eigendecomposition(h)?;
    Ok(e.reconstruct_with(|lam| C64::from_polar(1.0, -scale * lam)))
}

/// Trace norm (sum of singular values), operator norm (largest singular
/// value) and Frobenius norm. Hermitian inputs use `|eigenvalues|`; others
/// use square roots of the eigenvalues of `m† m`.
pub fn norms(m: &OperatorMatrix) -> Norms {
    let frobenius = m
        .as_slice()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if frobenius == 0.0 {
        return Norms {
            trace: 0.0,
            operator: 0.0,
            frobenius: 0.0,
        };
    }
    let singular: Vec<f64> = if m.hermiticity_defect() <= 1e-12 * m.max_abs().max(1.0) {
        let e = hermitian_eigendecomposition(&m.hermitian_part()).expect("Hermitian part");
        e.values.iter().map(|x| x.abs()).collect()
    } else {
        let g = m.dagger().matmul(m).hermitian_part();
        let e = hermitian_eigendecomposition(&g).expect("Gram matrix is Hermitian");
        e.values.iter().map(|x| x.max(0.0).sqrt()).collect()
    };
    Norms {
        trace: singular.iter().sum(),
        operator: singular.iter().fold(0.0f64, |a, &b| a.max(b)),
        frobenius,
    }
}
