//! Three-qubit construction: a state that is a product across A:B becomes
//! entangled once Bob flips his last qubit.
//!
//! Layout `[A, B1, B2]`; the flipper acts on `B2`.

use crate::error::{Error, Result};
use crate::linalg::{reduced_density, tensor, von_neumann_entropy, StateVector, C64, ONE, ZERO};
use crate::machine::{apply_flip_channel, FlipScenario, TaggedState};
use crate::triple::{FlipTriple, Which};

const B2: usize = 2;

fn weight_sqr(t: &FlipTriple) -> Result<f64> {
    let w = t.b * t.b + t.d * t.d;
    if w <= 1e-12 {
        return Err(Error::SingularNormalization);
    }
    Ok(w)
}

/// `|0⟩_A(|0⟩|ψ⟩ - |ψ⟩|0⟩)/√2 + |1⟩_A(|0⟩|φ⟩ - |φ⟩|0⟩)/√2`, over `√(b² + d²)`,
/// tagged on `B2`.
pub fn product_tagged(triple: &FlipTriple) -> Result<TaggedState> {
    let w = 1.0 / (2.0 * weight_sqr(triple)?).sqrt();
    let zero = StateVector::basis(2, 0);
    let mut st = TaggedState::new(vec![2, 2, 2], B2)?;
    for (alice, partner) in [(0, Which::Psi), (1, Which::Phi)] {
        let a = StateVector::basis(2, alice);
        st.push(C64::new(w, 0.0), tensor(&a, &zero), partner)?;
        st.push(C64::new(-w, 0.0), tensor(&a, &triple.member_ket(partner)), Which::Zero)?;
    }
    Ok(st)
}

pub fn build_product_state(triple: &FlipTriple) -> Result<StateVector> {
    Ok(product_tagged(triple)?.materialize(triple))
}

/// The same state written as `(b|0⟩ + d·e^{iθ}|1⟩)/√(b²+d²) ⊗ (|01⟩ - |10⟩)/√2`.
pub fn build_product_state_factored(triple: &FlipTriple) -> Result<StateVector> {
    let n = weight_sqr(triple)?.sqrt();
    let alice = StateVector::qubit(
        C64::new(triple.b / n, 0.0),
        C64::from_polar(triple.d / n, triple.theta),
    );
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = StateVector::new(vec![ZERO, ONE * h, -ONE * h, ZERO], vec![2, 2])?;
    Ok(tensor(&alice, &singlet))
}

/// `N = 2 + a²·Re{e^{-iμ}⟨M_ψ|M₀⟩} + c²·Re{e^{-iν}⟨M_φ|M₀⟩}`
pub fn normalization_n(s: &FlipScenario) -> f64 {
    let t = &s.triple;
    let m = &s.machine;
    let psi = (m.phase(Which::Psi).conj() * m.overlap(Which::Psi, Which::Zero)).re;
    let phi = (m.phase(Which::Phi).conj() * m.overlap(Which::Phi, Which::Zero)).re;
    2.0 + t.a * t.a * psi + t.c * t.c * phi
}

#[derive(Debug, Clone)]
pub struct ProductOutcome {
    /// Normalized post-flip state over `[2, 2, 2, 3]`.
    pub state: StateVector,
    /// Squared norm of the post-flip bracket scaled by `1/√2`, measured.
    pub bracket_norm: f64,
    /// The same quantity from the closed form `N`.
    pub n_formula: f64,
    /// Entanglement entropy across A:B of the normalized post-flip state, bits.
    pub entanglement: f64,
}

pub fn product_final(scenario: &FlipScenario) -> Result<ProductOutcome> {
    let t = &scenario.triple;
    let w = weight_sqr(t)?;
    let raw = apply_flip_channel(&product_tagged(t)?, scenario);
    // the tagged sum carries 1/√(2(b²+d²)); strip the 1/√(b²+d²) part
    let bracket_norm = raw.norm_sqr() * w;
    let state = raw.normalized();
    let entanglement = von_neumann_entropy(&reduced_density(&state, &[0])?)?;
    Ok(ProductOutcome {
        state,
        bracket_norm,
        n_formula: normalization_n(scenario),
        entanglement,
    })
}
