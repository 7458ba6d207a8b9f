use super::matrix::{inner, norm_sqr, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::tol;

/// Complex amplitudes over a tensor-product layout.
///
/// Amplitudes are stored first-factor-slowest: for layout `[d0, d1, d2]`
/// the multi-index `(i0, i1, i2)` sits at `(i0 * d1 + i1) * d2 + i2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    layout: Vec<usize>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, layout: Vec<usize>) -> Result<Self> {
        let expected: usize = layout.iter().product();
        if layout.is_empty() || layout.contains(&0) || expected != amps.len() {
            return Err(Error::LayoutMismatch {
                layout,
                expected,
                actual: amps.len(),
            });
        }
        Ok(Self { amps, layout })
    }

    /// Single-factor state of dimension `amps.len()`.
    pub fn single(amps: Vec<C64>) -> Self {
        let n = amps.len();
        assert!(n > 0, "state must have at least one amplitude");
        Self {
            amps,
            layout: vec![n],
        }
    }

    pub fn qubit(alpha: C64, beta: C64) -> Self {
        Self::single(vec![alpha, beta])
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Self::single(amps)
    }

    pub fn zeros(layout: Vec<usize>) -> Self {
        let n = layout.iter().product();
        Self {
            amps: vec![ZERO; n],
            layout,
        }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol::NORM
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * s).collect(),
            layout: self.layout.clone(),
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// Component-wise sum. Layouts must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::InvalidFactors(format!(
                "cannot add layouts {:?} and {:?}",
                self.layout, other.layout
            )));
        }
        Ok(Self {
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
            layout: self.layout.clone(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.amps.len(), other.amps.len());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// `u ⊗ v`, first factor slowest.
pub fn tensor(u: &StateVector, v: &StateVector) -> StateVector {
    let mut amps = Vec::with_capacity(u.dim() * v.dim());
    for a in &u.amps {
        for b in &v.amps {
            amps.push(a * b);
        }
    }
    let mut layout = u.layout.clone();
    layout.extend_from_slice(&v.layout);
    StateVector { amps, layout }
}

/// Tensor product of a list of factors, in order.
pub fn tensor_all(factors: &[&StateVector]) -> StateVector {
    let mut it = factors.iter();
    let first = (*it.next().expect("at least one factor")).clone();
    it.fold(first, |acc, f| tensor(&acc, f))
}
