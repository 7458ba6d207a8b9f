use super::eigen::{hermitian_eigenvalues, hermitian_eigenvalues_unchecked};
use super::matrix::{CMatrix, C64, ZERO};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::tol;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and the smallest eigenvalue.
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > tol::HERMITIAN {
            return Err(Error::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let lowest = hermitian_eigenvalues(&m)?[0];
        if lowest < -tol::NEG_EIGEN {
            return Err(Error::NegativeEigenvalue(lowest));
        }
        Ok(Self { m })
    }

    /// Skips validation; for matrices that are density matrices by construction.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues_unchecked(&self.m)
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty matrix")
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.m[idx]
    }
}

/// `|ψ⟩⟨ψ|` for a normalized state.
pub fn pure_density(psi: &StateVector) -> Result<DensityMatrix> {
    psi.ensure_normalized()?;
    Ok(DensityMatrix::new_unchecked(CMatrix::outer(
        psi.amplitudes(),
        psi.amplitudes(),
    )))
}

/// Splits every full index into a (kept, traced) pair of flat indices.
struct FactorSplit {
    kept_dim: usize,
    traced_dim: usize,
    kept_of: Vec<usize>,
    traced_of: Vec<usize>,
}

fn split_factors(layout: &[usize], keep: &[usize]) -> Result<FactorSplit> {
    if keep.is_empty() {
        return Err(Error::InvalidFactors("keep set is empty".into()));
    }
    let mut kept = vec![false; layout.len()];
    for &k in keep {
        if k >= layout.len() {
            return Err(Error::InvalidFactors(format!(
                "factor {k} out of range for layout {layout:?}"
            )));
        }
        if kept[k] {
            return Err(Error::InvalidFactors(format!("factor {k} listed twice")));
        }
        kept[k] = true;
    }
    let total: usize = layout.iter().product();
    let kept_dim: usize = layout
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();
    let traced_dim = total / kept_dim;

    let mut kept_of = Vec::with_capacity(total);
    let mut traced_of = Vec::with_capacity(total);
    let mut digits = vec![0usize; layout.len()];
    for _ in 0..total {
        let (mut ki, mut ti) = (0, 0);
        for (f, &d) in layout.iter().enumerate() {
            if kept[f] {
                ki = ki * d + digits[f];
            } else {
                ti = ti * d + digits[f];
            }
        }
        kept_of.push(ki);
        traced_of.push(ti);
        // odometer, last factor fastest
        for f in (0..layout.len()).rev() {
            digits[f] += 1;
            if digits[f] < layout[f] {
                break;
            }
            digits[f] = 0;
        }
    }
    Ok(FactorSplit {
        kept_dim,
        traced_dim,
        kept_of,
        traced_of,
    })
}

/// Traces out every factor not in `keep`. Kept factors stay in layout order.
pub fn partial_trace(rho: &DensityMatrix, layout: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = layout.iter().product();
    if total != rho.dim() {
        return Err(Error::LayoutMismatch {
            layout: layout.to_vec(),
            expected: total,
            actual: rho.dim(),
        });
    }
    let split = split_factors(layout, keep)?;
    let mut out = CMatrix::zeros(split.kept_dim);
    for i in 0..total {
        for j in 0..total {
            if split.traced_of[i] == split.traced_of[j] {
                out[(split.kept_of[i], split.kept_of[j])] += rho[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::new_unchecked(out))
}

/// Marginal of a pure state on the factors in `keep`, without forming `|ψ⟩⟨ψ|`.
pub fn reduced_density(psi: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    psi.ensure_normalized()?;
    Ok(DensityMatrix::new_unchecked(reduced_matrix(psi, keep)?))
}

/// Unnormalized marginal `Tr_rest |ψ⟩⟨ψ|`.
pub(crate) fn reduced_matrix(psi: &StateVector, keep: &[usize]) -> Result<CMatrix> {
    let split = split_factors(psi.layout(), keep)?;
    let mut grid = vec![ZERO; split.kept_dim * split.traced_dim];
    for (i, a) in psi.amplitudes().iter().enumerate() {
        grid[split.kept_of[i] * split.traced_dim + split.traced_of[i]] = *a;
    }
    let mut out = CMatrix::zeros(split.kept_dim);
    for r in 0..split.kept_dim {
        let row_r = &grid[r * split.traced_dim..(r + 1) * split.traced_dim];
        for c in r..split.kept_dim {
            let row_c = &grid[c * split.traced_dim..(c + 1) * split.traced_dim];
            let v: C64 = row_r.iter().zip(row_c).map(|(x, y)| x * y.conj()).sum();
            out[(r, c)] = v;
            out[(c, r)] = v.conj();
        }
    }
    Ok(out)
}

/// `-Σ λ log₂ λ`, in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_spectrum(&rho.eigenvalues())
}

pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -tol::NEG_EIGEN {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    // -0.0 for pure states reads badly in reports
    Ok(s.max(0.0))
}

/// Binary entropy `H(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// `½ Σ |eig(ρ - σ)|`
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(half_trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// `½ Σ |eig(m)|` for a Hermitian `m`.
pub(crate) fn half_trace_norm(m: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues_unchecked(m)
        .iter()
        .map(|l| l.abs())
        .sum::<f64>()
}

pub fn frobenius_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok((rho.matrix() - sigma.matrix()).frobenius_norm())
}
