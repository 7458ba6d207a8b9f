//! Five-qubit construction in which Bob's flip on his last qubit would raise
//! the entanglement across the Alice:Bob cut.
//!
//! Layout `[A, B1, B2, B3, B4]`, all qubits; the flipper acts on `B4` and
//! appends a machine factor.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{
    binary_entropy, reduced_density, tensor, von_neumann_entropy, CMatrix, DensityMatrix,
    StateVector, C64,
};
use crate::machine::{apply_flip_channel, FlipScenario, TaggedState};
use crate::triple::{FlipTriple, Which};

const ALICE: usize = 0;
const B4: usize = 4;

/// `(branch label on A B1 B2, sign, input carried by B4)`; `B3` holds the flip
/// of the B4 input (`|1⟩` for `|0⟩`).
const BRANCHES: [(usize, f64, Which); 8] = [
    (0b000, 1.0, Which::Zero),
    (0b111, 1.0, Which::Zero),
    (0b010, -1.0, Which::Psi),
    (0b100, -1.0, Which::Psi),
    (0b101, -1.0, Which::Psi),
    (0b011, -1.0, Which::Phi),
    (0b110, -1.0, Which::Phi),
    (0b001, -1.0, Which::Phi),
];

pub fn entanglement_tagged(triple: &FlipTriple) -> TaggedState {
    let mut st = TaggedState::new(vec![2; 5], B4).expect("qubit target");
    let w = 1.0 / 8f64.sqrt();
    for (label, sign, which) in BRANCHES {
        let abb = StateVector::new(StateVector::basis(8, label).amplitudes().to_vec(), vec![2, 2, 2])
            .expect("three qubits");
        let rest = tensor(&abb, &triple.flip_ket(which));
        st.push(C64::new(sign * w, 0.0), rest, which).expect("layout [2; 4]");
    }
    st
}

/// The five-qubit state before any flip.
pub fn build_entanglement_state(triple: &FlipTriple) -> StateVector {
    entanglement_tagged(triple).materialize(triple)
}

/// Post-flip state over layout `[2, 2, 2, 2, 2, 3]`.
pub fn entanglement_final_state(scenario: &FlipScenario) -> StateVector {
    apply_flip_channel(&entanglement_tagged(&scenario.triple), scenario)
}

/// `X = e^{iμ}⟨M₀|M_ψ⟩`
pub fn x_value(s: &FlipScenario) -> C64 {
    s.machine.phase(Which::Psi) * s.machine.overlap(Which::Zero, Which::Psi)
}

/// `Y = e^{iν}⟨M₀|M_φ⟩`
pub fn y_value(s: &FlipScenario) -> C64 {
    s.machine.phase(Which::Phi) * s.machine.overlap(Which::Zero, Which::Phi)
}

/// `Z = Re[e^{i(μ-ν)}⟨ψ|φ⟩²⟨M_φ|M_ψ⟩]`
pub fn z_value(s: &FlipScenario) -> f64 {
    let rel = s.machine.phase(Which::Psi) * s.machine.phase(Which::Phi).conj();
    let pp = s.triple.psi_phi();
    (rel * pp * pp * s.machine.overlap(Which::Phi, Which::Psi)).re
}

/// Off-diagonal `⟨0|ρ_A|1⟩` before the flip, times 8.
fn initial_coherence(t: &FlipTriple) -> f64 {
    t.a * t.a + t.c * t.c + 2.0 * t.psi_phi().norm_sqr()
}

/// Off-diagonal `⟨0|ρ_A|1⟩` after the flip, times 8.
fn final_coherence(s: &FlipScenario) -> C64 {
    let t = &s.triple;
    C64::new(2.0 * z_value(s), 0.0) - x_value(s).conj() * (t.a * t.a) - y_value(s) * (t.c * t.c)
}

/// Alice's qubit marginal before the flip, from its closed form.
pub fn alice_marginal_initial(triple: &FlipTriple) -> DensityMatrix {
    let off = C64::new(initial_coherence(triple) / 8.0, 0.0);
    let mut m = CMatrix::from_diagonal(&[0.5, 0.5]);
    m[(0, 1)] = off;
    m[(1, 0)] = off;
    DensityMatrix::new_unchecked(m)
}

/// Alice's qubit marginal after the flip, from its closed form.
pub fn alice_marginal_final(scenario: &FlipScenario) -> DensityMatrix {
    let off = final_coherence(scenario) / 8.0;
    let mut m = CMatrix::from_diagonal(&[0.5, 0.5]);
    m[(0, 1)] = off;
    m[(1, 0)] = off.conj();
    DensityMatrix::new_unchecked(m)
}

/// Alice's marginals by explicit construction and partial trace.
pub fn alice_marginals_explicit(scenario: &FlipScenario) -> Result<(DensityMatrix, DensityMatrix)> {
    let before = reduced_density(&build_entanglement_state(&scenario.triple), &[ALICE])?;
    let after = reduced_density(&entanglement_final_state(scenario), &[ALICE])?;
    Ok((before, after))
}

/// Largest eigenvalues of Alice's marginal before and after, from the closed forms
/// `λⁱ = ½ + (2|⟨ψ|φ⟩|² + a² + c²)/8` and `λᶠ = ½ + |2Z - a²X̄ - c²Y|/8`.
pub fn lambda_pair(scenario: &FlipScenario) -> (f64, f64) {
    let li = 0.5 + initial_coherence(&scenario.triple) / 8.0;
    let lf = 0.5 + final_coherence(scenario).norm() / 8.0;
    (li, lf)
}

/// The six non-negative terms whose sum is `(8λⁱ - 4)² - (8λᶠ - 4)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: f64,
    pub terms: [f64; 6],
    pub lhs_total: f64,
}

pub fn appendix_terms(scenario: &FlipScenario) -> AppendixReport {
    let t = &scenario.triple;
    let x = x_value(scenario);
    let y = y_value(scenario);
    let z = z_value(scenario);
    let p = t.psi_phi().norm_sqr();
    let (a2, c2) = (t.a * t.a, t.c * t.c);
    let terms = [
        a2 * a2 * (1.0 - x.norm_sqr()),
        c2 * c2 * (1.0 - y.norm_sqr()),
        2.0 * a2 * c2 * (1.0 - (x * y).re),
        4.0 * a2 * (p + z * x.re),
        4.0 * c2 * (p + z * y.re),
        4.0 * (p * p - z * z),
    ];
    AppendixReport {
        x: [x.re, x.im],
        y: [y.re, y.im],
        z,
        terms,
        lhs_total: terms.iter().sum(),
    }
}

/// `(2|⟨ψ|φ⟩|² + a² + c²)² - |2Z - a²X̄ - c²Y|²`, computed directly.
pub fn squared_difference(scenario: &FlipScenario) -> f64 {
    initial_coherence(&scenario.triple).powi(2) - final_coherence(scenario).norm_sqr()
}

/// Entanglement entropies (bits) across A:B before and after the flip,
/// from the explicitly constructed states.
pub fn entropies_explicit(scenario: &FlipScenario) -> Result<(f64, f64)> {
    let (before, after) = alice_marginals_explicit(scenario)?;
    Ok((von_neumann_entropy(&before)?, von_neumann_entropy(&after)?))
}

/// Entropies implied by the closed-form λ pair.
pub fn entropies_closed_form(scenario: &FlipScenario) -> (f64, f64) {
    let (li, lf) = lambda_pair(scenario);
    (binary_entropy(li), binary_entropy(lf))
}

/// Change in A:B entanglement caused by Bob's local flip, in bits.
pub fn entanglement_gain(scenario: &FlipScenario) -> Result<f64> {
    let (before, after) = entropies_explicit(scenario)?;
    Ok(after - before)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::MachineModel;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn flat() -> FlipTriple {
        FlipTriple::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, PI).unwrap()
    }

    #[test]
    fn state_is_normalized() {
        let t = FlipTriple::from_angles(0.2, 1.3, 0.7).unwrap();
        let psi = build_entanglement_state(&t);
        assert_eq!(psi.layout(), &[2, 2, 2, 2, 2]);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reference_initial_marginal() {
        let t = FlipTriple::reference();
        let rho = reduced_density(&build_entanglement_state(&t), &[0]).unwrap();
        assert!((rho[(0, 1)] - C64::new(0.25, 0.0)).norm() < 1e-14);
        assert!((rho.largest_eigenvalue() - 0.75).abs() < 1e-14);
        let (li, _) = lambda_pair(&FlipScenario::new(t, MachineModel::trivial()).unwrap());
        assert!((li - 0.75).abs() < 1e-15);
    }

    #[test]
    fn flat_triple_lambda() {
        let s = FlipScenario::new(flat(), MachineModel::great_circle_witness()).unwrap();
        let (li, lf) = lambda_pair(&s);
        assert!((li - 0.625).abs() < 1e-15);
        assert!((li - lf).abs() < 1e-15);
    }

    #[test]
    fn reference_lambda_pair_trivial_machine() {
        let s = FlipScenario::new(FlipTriple::reference(), MachineModel::trivial()).unwrap();
        let (li, lf) = lambda_pair(&s);
        assert!((li - 0.75).abs() < 1e-15);
        assert!((lf - 0.625).abs() < 1e-15);
        let (_, after) = alice_marginals_explicit(&s).unwrap();
        assert!((after.largest_eigenvalue() - 0.625).abs() < 1e-12);
    }

    #[test]
    fn appendix_examples() {
        let s = FlipScenario::new(flat(), MachineModel::trivial()).unwrap();
        let r = appendix_terms(&s);
        assert!(r.terms.iter().all(|t| t.abs() < 1e-15), "{:?}", r.terms);

        // a² = c² = |⟨ψ|φ⟩|² = ½, X = Y = 1, Z = 0
        let s = FlipScenario::new(FlipTriple::reference(), MachineModel::trivial()).unwrap();
        let r = appendix_terms(&s);
        let want = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        for (got, w) in r.terms.iter().zip(want) {
            assert!((got - w).abs() < 1e-14, "{:?}", r.terms);
        }
        assert!((r.lhs_total - 3.0).abs() < 1e-14);
        assert!((squared_difference(&s) - 3.0).abs() < 1e-14);

        let t = FlipTriple::from_angles(0.5, 0.9, 1.2).unwrap();
        let s = FlipScenario::new(t, MachineModel::identity_gram()).unwrap();
        let r = appendix_terms(&s);
        let (a2, c2, p) = (t.a * t.a, t.c * t.c, t.psi_phi().norm_sqr());
        let want = [a2 * a2, c2 * c2, 2.0 * a2 * c2, 4.0 * a2 * p, 4.0 * c2 * p, 4.0 * p * p];
        for (got, w) in r.terms.iter().zip(want) {
            assert!((got - w).abs() < 1e-14);
        }
    }

    #[test]
    fn reference_gain() {
        let s = FlipScenario::new(FlipTriple::reference(), MachineModel::trivial()).unwrap();
        let gain = entanglement_gain(&s).unwrap();
        let oracle = binary_entropy(0.625) - binary_entropy(0.75);
        assert!((gain - oracle).abs() < 1e-12);
        assert!((gain - 0.14312).abs() < 1e-4);
    }

    #[test]
    fn witness_gain_vanishes_on_great_circle() {
        let s = FlipScenario::new(flat(), MachineModel::great_circle_witness()).unwrap();
        assert!(entanglement_gain(&s).unwrap().abs() < 1e-12);
    }
}
