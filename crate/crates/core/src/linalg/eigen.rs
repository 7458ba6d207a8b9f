//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::tol;

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// the matching eigenvectors as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub sweeps: usize,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let defect = m.hermitian_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    Ok(jacobi(m, true))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    Ok(jacobi(m, false).values)
}

/// Eigenvalues without the Hermiticity check. The caller guarantees the input
/// is Hermitian by construction.
pub(crate) fn hermitian_eigenvalues_unchecked(m: &CMatrix) -> Vec<f64> {
    jacobi(m, false).values
}

fn jacobi(m: &CMatrix, want_vectors: bool) -> HermitianEigen {
    let n = m.dim();
    let mut a = m.clone();
    // symmetrize away rounding noise so the diagonal is exactly real
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let h = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = h;
            a[(j, i)] = h.conj();
        }
    }
    let mut v = if want_vectors {
        CMatrix::identity(n)
    } else {
        CMatrix::zeros(0)
    };

    let threshold = tol::JACOBI_OFF * a.frobenius_norm().max(1.0);
    let mut sweeps = 0;
    while sweeps < tol::JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() < threshold {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[(p, q)];
                let mag = g.norm();
                if mag < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = g / mag;
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // W = diag(1, conj(phase)) · [[c, s], [-s, c]] acting on (p, q)
                let w_pp = C64::new(c, 0.0);
                let w_pq = C64::new(s, 0.0);
                let w_qp = -phase.conj() * s;
                let w_qq = phase.conj() * c;

                // A <- A W
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * w_pp + akq * w_qp;
                    a[(k, q)] = akp * w_pq + akq * w_qq;
                }
                // A <- W^H A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = w_pp.conj() * apk + w_qp.conj() * aqk;
                    a[(q, k)] = w_pq.conj() * apk + w_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                if want_vectors {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * w_pp + vkq * w_qp;
                        v[(k, q)] = vkp * w_pq + vkq * w_qq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors {
        let mut sorted = CMatrix::zeros(n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                sorted[(k, new_col)] = v[(k, old_col)];
            }
        }
        sorted
    } else {
        v
    };
    HermitianEigen {
        values,
        vectors,
        sweeps,
    }
}
