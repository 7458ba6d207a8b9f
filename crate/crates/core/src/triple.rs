//! The canonical three-state family `|0⟩, a|0⟩+b|1⟩, c|0⟩+d·e^{iθ}|1⟩`
//! and the ideal flipped kets orthogonal to each member.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64, ONE, ZERO};
use crate::tol;

/// Which of the three defined input states a slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Zero,
    Psi,
    Phi,
}

impl Which {
    pub const ALL: [Which; 3] = [Which::Zero, Which::Psi, Which::Phi];

    /// Row/column of this input in machine Gram matrices.
    pub fn index(self) -> usize {
        match self {
            Which::Zero => 0,
            Which::Psi => 1,
            Which::Phi => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta: f64,
}

impl FlipTriple {
    pub fn new(a: f64, b: f64, c: f64, d: f64, theta: f64) -> Result<Self> {
        let t = Self { a, b, c, d, theta };
        t.validate()?;
        Ok(t)
    }

    /// Derives `b = √(1-a²)` and `d = √(1-c²)`.
    pub fn from_ac(a: f64, c: f64, theta: f64) -> Result<Self> {
        let root = |x: f64| (1.0 - x * x).max(0.0).sqrt();
        Self::new(a, root(a), c, root(c), theta)
    }

    /// `a = cos α`, `b = sin α`, `c = cos γ`, `d = sin γ` with `α, γ ∈ [0, π/2)`.
    pub fn from_angles(alpha: f64, gamma: f64, theta: f64) -> Result<Self> {
        Self::new(alpha.cos(), alpha.sin(), gamma.cos(), gamma.sin(), theta)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.a, self.b, self.c, self.d, self.theta];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTriple("non-finite parameter".into()));
        }
        if (self.a * self.a + self.b * self.b - 1.0).abs() > tol::TRIPLE_NORM {
            return Err(Error::InvalidTriple(format!(
                "a² + b² = {} is not 1",
                self.a * self.a + self.b * self.b
            )));
        }
        if (self.c * self.c + self.d * self.d - 1.0).abs() > tol::TRIPLE_NORM {
            return Err(Error::InvalidTriple(format!(
                "c² + d² = {} is not 1",
                self.c * self.c + self.d * self.d
            )));
        }
        if self.a <= 0.0 || self.c <= 0.0 {
            return Err(Error::InvalidTriple("a and c must be positive".into()));
        }
        if self.b < 0.0 || self.d < 0.0 {
            return Err(Error::InvalidTriple("b and d must be non-negative".into()));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::InvalidTriple(format!("theta {} outside [0, π]", self.theta)));
        }
        Ok(())
    }

    /// The reference triple with `a = b = c = d = 1/√2`, `θ = π/2`.
    pub fn reference() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            a: s,
            b: s,
            c: s,
            d: s,
            theta: std::f64::consts::FRAC_PI_2,
        }
    }

    fn phase(&self) -> C64 {
        C64::from_polar(1.0, self.theta)
    }

    pub fn member_amps(&self, which: Which) -> [C64; 2] {
        match which {
            Which::Zero => [ONE, ZERO],
            Which::Psi => [C64::new(self.a, 0.0), C64::new(self.b, 0.0)],
            Which::Phi => [C64::new(self.c, 0.0), self.phase() * self.d],
        }
    }

    /// `|0⟩ → |1⟩`, `|ψ⟩ → b|0⟩ - a|1⟩`, `|φ⟩ → d·e^{-iθ}|0⟩ - c|1⟩`.
    pub fn flip_amps(&self, which: Which) -> [C64; 2] {
        match which {
            Which::Zero => [ZERO, ONE],
            Which::Psi => [C64::new(self.b, 0.0), C64::new(-self.a, 0.0)],
            Which::Phi => [self.phase().conj() * self.d, C64::new(-self.c, 0.0)],
        }
    }

    pub fn member_ket(&self, which: Which) -> StateVector {
        StateVector::single(self.member_amps(which).to_vec())
    }

    pub fn flip_ket(&self, which: Which) -> StateVector {
        StateVector::single(self.flip_amps(which).to_vec())
    }

    /// `⟨ψ|φ⟩ = ac + bd·e^{iθ}`
    pub fn psi_phi(&self) -> C64 {
        C64::new(self.a * self.c, 0.0) + self.phase() * (self.b * self.d)
    }

    /// `4abcd·sin θ`, the Bloch determinant of the canonical triple.
    pub fn bloch_determinant(&self) -> f64 {
        4.0 * self.a * self.b * self.c * self.d * self.theta.sin()
    }

    pub fn is_great_circle(&self, tol: f64) -> bool {
        self.bloch_determinant().abs() <= tol
    }
}
