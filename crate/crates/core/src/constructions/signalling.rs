//! Qutrit–qubit construction: Alice holds a qutrit, Bob a qubit that carries
//! `|0⟩, |ψ⟩, |φ⟩` on the three branches. Bob flips his qubit; no-signalling
//! demands Alice's marginal stay put.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{half_trace_norm, reduced_density, CMatrix, DensityMatrix, StateVector, C64};
use crate::machine::{apply_flip_channel, FlipScenario, MachineModel, TaggedState};
use crate::triple::{FlipTriple, Which};

/// The machine-free signalling state as a tagged sum over Bob's qubit.
pub fn signalling_tagged() -> TaggedState {
    let mut st = TaggedState::new(vec![3, 2], 1).expect("qubit target");
    let w = C64::new(1.0 / 3f64.sqrt(), 0.0);
    for (k, which) in Which::ALL.into_iter().enumerate() {
        st.push(w, StateVector::basis(3, k), which).expect("layout [3]");
    }
    st
}

/// `(|0⟩|0⟩ + |1⟩|ψ⟩ + |2⟩|φ⟩)/√3` over layout `[3, 2]`.
pub fn build_signalling_state(triple: &FlipTriple) -> StateVector {
    signalling_tagged().materialize(triple)
}

/// Post-flip state over layout `[3, 2, 3]`.
pub fn signalling_final_state(scenario: &FlipScenario) -> StateVector {
    apply_flip_channel(&signalling_tagged(), scenario)
}

pub(crate) fn initial_matrix(t: &FlipTriple) -> CMatrix {
    let third = 1.0 / 3.0;
    let pp = t.psi_phi();
    let mut m = CMatrix::from_diagonal(&[third; 3]);
    m[(0, 1)] = C64::new(t.a * third, 0.0);
    m[(1, 0)] = m[(0, 1)];
    m[(0, 2)] = C64::new(t.c * third, 0.0);
    m[(2, 0)] = m[(0, 2)];
    m[(1, 2)] = pp.conj() * third;
    m[(2, 1)] = pp * third;
    m
}

pub(crate) fn final_matrix(s: &FlipScenario) -> CMatrix {
    let (t, mach) = (&s.triple, &s.machine);
    let third = 1.0 / 3.0;
    let e_mu = mach.phase(Which::Psi);
    let e_nu = mach.phase(Which::Phi);
    let pp = t.psi_phi();
    let mut m = CMatrix::from_diagonal(&[third; 3]);
    m[(0, 1)] = -e_mu.conj() * mach.overlap(Which::Psi, Which::Zero) * (t.a * third);
    m[(1, 0)] = -e_mu * mach.overlap(Which::Zero, Which::Psi) * (t.a * third);
    m[(0, 2)] = -e_nu.conj() * mach.overlap(Which::Phi, Which::Zero) * (t.c * third);
    m[(2, 0)] = -e_nu * mach.overlap(Which::Zero, Which::Phi) * (t.c * third);
    m[(1, 2)] = pp * e_mu * e_nu.conj() * mach.overlap(Which::Phi, Which::Psi) * third;
    m[(2, 1)] = pp.conj() * e_nu * e_mu.conj() * mach.overlap(Which::Psi, Which::Phi) * third;
    m
}

/// Alice's qutrit marginal before the flip, from its closed form.
pub fn alice_marginal_initial(triple: &FlipTriple) -> DensityMatrix {
    DensityMatrix::new_unchecked(initial_matrix(triple))
}

/// Alice's qutrit marginal after Bob's flip, from its closed form.
pub fn alice_marginal_final(scenario: &FlipScenario) -> DensityMatrix {
    DensityMatrix::new_unchecked(final_matrix(scenario))
}

/// Both marginals by explicit construction and partial trace.
pub fn alice_marginals_explicit(scenario: &FlipScenario) -> Result<(DensityMatrix, DensityMatrix)> {
    let before = reduced_density(&build_signalling_state(&scenario.triple), &[0])?;
    let after = reduced_density(&signalling_final_state(scenario), &[0])?;
    Ok((before, after))
}

/// Trace distance between Alice's marginals before and after the flip.
pub fn signalling_deviation(scenario: &FlipScenario) -> f64 {
    half_trace_norm(&(&initial_matrix(&scenario.triple) - &final_matrix(scenario)))
}

/// Frobenius distance between the same two marginals.
pub fn signalling_deviation_frobenius(scenario: &FlipScenario) -> f64 {
    (&initial_matrix(&scenario.triple) - &final_matrix(scenario)).frobenius_norm()
}

/// The four entrywise no-signalling conditions on Alice's off-diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `a = -a·X = -a·X̄`
    ZeroPsi,
    /// `c = -c·Y = -c·Ȳ`
    ZeroPhi,
    /// `⟨φ|ψ⟩ = e^{i(μ-ν)}⟨ψ|φ⟩⟨M_φ|M_ψ⟩`
    PsiPhi,
    /// `⟨ψ|φ⟩ = e^{i(ν-μ)}⟨φ|ψ⟩⟨M_ψ|M_φ⟩`
    PhiPsi,
}

impl Constraint {
    pub const ALL: [Constraint; 4] = [
        Constraint::ZeroPsi,
        Constraint::ZeroPhi,
        Constraint::PsiPhi,
        Constraint::PhiPsi,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Constraint::ZeroPsi => "zero_psi",
            Constraint::ZeroPhi => "zero_phi",
            Constraint::PsiPhi => "psi_phi",
            Constraint::PhiPsi => "phi_psi",
        }
    }
}

/// Absolute residual of each no-signalling condition, in [`Constraint::ALL`] order.
pub fn constraint_residuals(scenario: &FlipScenario) -> [f64; 4] {
    let (t, m) = (&scenario.triple, &scenario.machine);
    let x = m.phase(Which::Psi) * m.overlap(Which::Zero, Which::Psi);
    let y = m.phase(Which::Phi) * m.overlap(Which::Zero, Which::Phi);
    let pp = t.psi_phi();
    let rel = m.phase(Which::Psi) * m.phase(Which::Phi).conj();
    let a = C64::new(t.a, 0.0);
    let c = C64::new(t.c, 0.0);
    let r8 = (a + a * x).norm().max((a + a * x.conj()).norm());
    let r9 = (c + c * y).norm().max((c + c * y.conj()).norm());
    let r10 = (pp.conj() - rel * pp * m.overlap(Which::Phi, Which::Psi)).norm();
    let r11 = (pp - rel.conj() * pp.conj() * m.overlap(Which::Psi, Which::Phi)).norm();
    [r8, r9, r10, r11]
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub witness: Option<MachineModel>,
    pub violated: Vec<Constraint>,
    /// Residuals of the witness, when one exists.
    pub residuals: Option<[f64; 4]>,
}

/// Decides whether some machine satisfies all four no-signalling conditions.
///
/// The first two force `|M_ψ⟩ = -e^{-iμ}|M₀⟩` and `|M_φ⟩ = -e^{-iν}|M₀⟩`;
/// the remaining two then reduce to `⟨ψ|φ⟩` being real, i.e.
/// `bd·sin θ = 0`.
pub fn nosignalling_feasibility(triple: &FlipTriple, tol: f64) -> FeasibilityVerdict {
    let feasible = triple.b <= tol || triple.d <= tol || triple.theta.sin().abs() <= tol;
    if !feasible {
        return FeasibilityVerdict {
            feasible,
            witness: None,
            violated: vec![Constraint::PsiPhi, Constraint::PhiPsi],
            residuals: None,
        };
    }
    let witness = MachineModel::great_circle_witness();
    let scenario = FlipScenario {
        triple: *triple,
        machine: witness.clone(),
    };
    let residuals = constraint_residuals(&scenario);
    let violated = Constraint::ALL
        .into_iter()
        .zip(residuals)
        .filter(|(_, r)| *r > crate::tol::DEFAULT)
        .map(|(c, _)| c)
        .collect();
    FeasibilityVerdict {
        feasible,
        witness: Some(witness),
        violated,
        residuals: Some(residuals),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_distance;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn flat() -> FlipTriple {
        FlipTriple::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, PI).unwrap()
    }

    #[test]
    fn state_is_normalized_with_expected_amplitudes() {
        let t = FlipTriple::reference();
        let psi = build_signalling_state(&t);
        assert_eq!(psi.layout(), &[3, 2]);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
        let s = 1.0 / 3f64.sqrt();
        let h = FRAC_1_SQRT_2;
        let want = [
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s * h, 0.0),
            C64::new(s * h, 0.0),
            C64::new(s * h, 0.0),
            C64::new(0.0, s * h),
        ];
        for (x, y) in psi.amplitudes().iter().zip(want) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn degenerate_psi_marginal() {
        let t = FlipTriple::new(1.0, 0.0, 0.6, 0.8, 1.0).unwrap();
        let psi = build_signalling_state(&t);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
        let rho = reduced_density(&psi, &[0]).unwrap();
        assert!((rho[(0, 1)] - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((alice_marginal_initial(&t)[(0, 1)] - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bob_marginal_is_equal_mixture() {
        let t = FlipTriple::from_angles(0.4, 1.1, 2.0).unwrap();
        let bob = reduced_density(&build_signalling_state(&t), &[1]).unwrap();
        let mut mix = CMatrix::zeros(2);
        for w in Which::ALL {
            let k = t.member_amps(w);
            mix = &mix + &CMatrix::outer(&k, &k).scale(C64::new(1.0 / 3.0, 0.0));
        }
        assert!(bob.matrix().max_abs_diff(&mix) < 1e-15);
    }

    #[test]
    fn reference_initial_entries() {
        let rho = alice_marginal_initial(&FlipTriple::reference());
        assert!((rho[(0, 1)] - C64::new(1.0 / (3.0 * 2f64.sqrt()), 0.0)).norm() < 1e-15);
        assert!((rho[(1, 2)] - C64::new(1.0 / 6.0, -1.0 / 6.0)).norm() < 1e-15);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn reference_final_entries() {
        let t = FlipTriple::reference();
        let trivial = FlipScenario::new(t, MachineModel::trivial()).unwrap();
        let rho = alice_marginal_final(&trivial);
        assert!((rho[(0, 1)] + C64::new(1.0 / (3.0 * 2f64.sqrt()), 0.0)).norm() < 1e-15);

        let orth = FlipScenario::new(t, MachineModel::identity_gram()).unwrap();
        let rho = alice_marginal_final(&orth);
        assert!(rho[(0, 1)].norm() < 1e-15 && rho[(0, 2)].norm() < 1e-15);
    }

    #[test]
    fn closed_forms_match_partial_trace() {
        let t = FlipTriple::from_angles(0.3, 0.9, 2.2).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let s = FlipScenario::new(t, MachineModel::random(&mut rng)).unwrap();
        let (before, after) = alice_marginals_explicit(&s).unwrap();
        assert!(before.matrix().max_abs_diff(alice_marginal_initial(&t).matrix()) < 1e-14);
        assert!(after.matrix().max_abs_diff(alice_marginal_final(&s).matrix()) < 1e-14);
    }

    #[test]
    fn reference_deviation_with_trivial_machine() {
        // oracle: trace distance of the two explicit 3×3 matrices
        let s = FlipScenario::new(FlipTriple::reference(), MachineModel::trivial()).unwrap();
        let (before, after) = alice_marginals_explicit(&s).unwrap();
        let oracle = trace_distance(&before, &after).unwrap();
        let dev = signalling_deviation(&s);
        assert!(dev > 0.1);
        assert!((dev - oracle).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        let v = nosignalling_feasibility(&flat(), 1e-9);
        assert!(v.feasible);
        assert!(v.violated.is_empty());
        assert!(v.residuals.unwrap().iter().all(|r| *r <= 1e-9));
        let w = v.witness.unwrap();
        let s = FlipScenario::new(flat(), w).unwrap();
        assert!(signalling_deviation(&s) <= 1e-9);

        let v = nosignalling_feasibility(&FlipTriple::reference(), 1e-9);
        assert!(!v.feasible && v.witness.is_none());
        assert!(v.violated.contains(&Constraint::PsiPhi));

        for theta in [0.3, 1.7, 2.9] {
            let t = FlipTriple::new(1.0, 0.0, 0.6, 0.8, theta).unwrap();
            assert!(nosignalling_feasibility(&t, 1e-9).feasible);
        }
    }

    #[test]
    fn zero_deviation_only_with_vanishing_residuals() {
        let t = FlipTriple::reference();
        for s in [
            FlipScenario::new(t, MachineModel::trivial()).unwrap(),
            FlipScenario::new(t, MachineModel::great_circle_witness()).unwrap(),
        ] {
            let r = constraint_residuals(&s);
            assert!(signalling_deviation(&s) > 1e-6);
            assert!(r.iter().any(|x| *x > 1e-6));
        }
    }

    #[test]
    fn constraint_ids_serialize() {
        let s = serde_json::to_string(&Constraint::ALL).unwrap();
        assert_eq!(s, r#"["zero_psi","zero_phi","psi_phi","phi_psi"]"#);
    }
}
