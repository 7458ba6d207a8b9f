//! Bloch-sphere geometry of qubit pure states.
//!
//! Three pure states lie on one great circle exactly when their Bloch vectors
//! are coplanar with the origin, i.e. when the determinant of the stacked
//! vectors vanishes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, StateVector, C64};
use crate::triple::{FlipTriple, Which};
use crate::tol;

/// Two states closer than this (in `√(1-|⟨s|t⟩|²)`) are treated as equal up to phase.
const PAIR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: Self = Self { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Self = Self { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Self = Self { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Pauli expectation values `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a normalized qubit state.
    pub fn from_state(psi: &StateVector) -> Result<Self> {
        if psi.dim() != 2 {
            return Err(Error::InvalidFactors(format!(
                "Bloch vector needs a qubit, got dimension {}",
                psi.dim()
            )));
        }
        psi.ensure_normalized()?;
        let [alpha, beta] = [psi.amplitudes()[0], psi.amplitudes()[1]];
        let cross = alpha.conj() * beta;
        Ok(Self {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: alpha.norm_sqr() - beta.norm_sqr(),
        })
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    /// Pure state with this Bloch vector, `cos(ϑ/2)|0⟩ + e^{iφ} sin(ϑ/2)|1⟩`.
    pub fn to_state(&self) -> StateVector {
        let polar = self.z.clamp(-1.0, 1.0).acos();
        let azimuth = self.y.atan2(self.x);
        StateVector::qubit(
            C64::new((polar / 2.0).cos(), 0.0),
            C64::from_polar((polar / 2.0).sin(), azimuth),
        )
    }
}

/// Three normalized qubit states, not necessarily distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitTriple {
    states: [StateVector; 3],
}

impl QubitTriple {
    pub fn new(s0: StateVector, s1: StateVector, s2: StateVector) -> Result<Self> {
        for s in [&s0, &s1, &s2] {
            if s.dim() != 2 {
                return Err(Error::InvalidFactors(format!(
                    "triple members must be qubits, got dimension {}",
                    s.dim()
                )));
            }
            s.ensure_normalized()?;
        }
        Ok(Self { states: [s0, s1, s2] })
    }

    pub fn from_amplitudes(amps: [[C64; 2]; 3]) -> Result<Self> {
        let [a, b, c] = amps.map(|s| StateVector::qubit(s[0], s[1]));
        Self::new(a, b, c)
    }

    pub fn states(&self) -> &[StateVector; 3] {
        &self.states
    }

    /// Pairs `(i, j)` whose states coincide up to a global phase.
    pub fn degenerate_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let f = self.states[i].fidelity(&self.states[j]);
                if (1.0 - f).max(0.0).sqrt() <= PAIR_TOL {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Applies the same 2×2 matrix to all three states.
    pub fn rotated(&self, u: &CMatrix) -> Self {
        let states = self
            .states
            .clone()
            .map(|s| StateVector::single(u.mul_vec(s.amplitudes())));
        Self { states }
    }
}

/// Determinant of the three stacked Bloch vectors.
pub fn coplanarity_det(t: &QubitTriple) -> f64 {
    let v: Vec<BlochVector> = t
        .states
        .iter()
        .map(|s| BlochVector::from_state(s).expect("triple members are normalized qubits"))
        .collect();
    v[0].dot(&v[1].cross(&v[2]))
}

pub fn is_great_circle(t: &QubitTriple, tol: f64) -> bool {
    coplanarity_det(t).abs() <= tol
}

/// Result of bringing an arbitrary triple into canonical form.
#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub triple: FlipTriple,
    /// Maps each input state to its canonical counterpart, up to phase
    /// (and complex conjugation when `reflected` is set).
    pub unitary: CMatrix,
    /// The raw phase landed in `(π, 2π)` and was mirrored through the
    /// x–z plane of the Bloch sphere (`y ↦ -y`), which conjugates amplitudes.
    pub reflected: bool,
}

impl Canonicalization {
    /// The input state corresponding to canonical member `which`, up to phase.
    pub fn resynthesize(&self, which: Which) -> StateVector {
        let mut amps = self.triple.member_amps(which);
        if self.reflected {
            amps = amps.map(|z| z.conj());
        }
        StateVector::single(self.unitary.adjoint().mul_vec(&amps))
    }
}

fn unit_phase(z: C64) -> C64 {
    let n = z.norm();
    if n == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / n
    }
}

/// Rotates `s0` to `|0⟩` and fixes phases so that the other two states read
/// `a|0⟩ + b|1⟩` and `c|0⟩ + d·e^{iθ}|1⟩` with `a, c > 0`, `b, d ≥ 0`, `θ ∈ [0, π]`.
pub fn canonicalize_triple(t: &QubitTriple) -> Result<Canonicalization> {
    let [s0, s1, s2] = t.states.clone().map(|s| s.normalized());
    let p = s0.amplitudes();
    let rot = CMatrix::from_rows(&[vec![p[0].conj(), p[1].conj()], vec![-p[1], p[0]]]);

    let psi = rot.mul_vec(s1.amplitudes());
    let b = psi[1].norm();
    let a = psi[0].norm();
    if b <= PAIR_TOL {
        return Err(Error::Degenerate("states 0 and 1"));
    }
    if a <= PAIR_TOL {
        return Err(Error::OrthogonalPair("states 0 and 1"));
    }
    // relative phase between the two components of the rotated second state
    let rel = unit_phase(psi[1]) * unit_phase(psi[0]).conj();
    let mut unitary = CMatrix::from_diagonal(&[1.0, 1.0]);
    unitary[(1, 1)] = rel.conj();
    let unitary = &unitary * &rot;

    let phi = unitary.mul_vec(s2.amplitudes());
    let c = phi[0].norm();
    let w = phi[1] * unit_phase(phi[0]).conj();
    let d = w.norm();
    if d <= PAIR_TOL {
        return Err(Error::Degenerate("states 0 and 2"));
    }
    if c <= PAIR_TOL {
        return Err(Error::OrthogonalPair("states 0 and 2"));
    }
    let mut theta = w.arg().rem_euclid(2.0 * PI);
    let reflected = theta > PI;
    if reflected {
        theta = 2.0 * PI - theta;
    }
    let (na, nc) = ((a * a + b * b).sqrt(), (c * c + d * d).sqrt());
    let triple = FlipTriple::new(a / na, b / na, c / nc, d / nc, theta)?;
    Ok(Canonicalization {
        triple,
        unitary,
        reflected,
    })
}

/// `n·σ`, which sends every state on the great circle orthogonal to `n` to
/// its antipode.
pub fn great_circle_flipper(n: &BlochVector) -> Result<CMatrix> {
    let norm = n.norm();
    if (norm - 1.0).abs() > tol::DEFAULT {
        return Err(Error::NotUnitVector(norm));
    }
    Ok(CMatrix::from_rows(&[
        vec![C64::new(n.z, 0.0), C64::new(n.x, -n.y)],
        vec![C64::new(n.x, n.y), C64::new(-n.z, 0.0)],
    ]))
}

/// A state on the great circle orthogonal to `n`, at angle `t` along it.
pub fn great_circle_state(n: &BlochVector, t: f64) -> StateVector {
    // orthonormal basis (e1, e2) of the plane ⟂ n
    let helper = if n.x.abs() < 0.9 { BlochVector::X } else { BlochVector::Y };
    let e1 = {
        let c = n.cross(&helper);
        let k = c.norm();
        BlochVector::new(c.x / k, c.y / k, c.z / k)
    };
    let e2 = n.cross(&e1);
    let (ct, st) = (t.cos(), t.sin());
    BlochVector::new(
        ct * e1.x + st * e2.x,
        ct * e1.y + st * e2.y,
        ct * e1.z + st * e2.z,
    )
    .to_state()
}
