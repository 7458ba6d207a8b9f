//! Random triples and machines for sweeps and property checks.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::bloch::{canonicalize_triple, great_circle_state, BlochVector, QubitTriple};
use crate::machine::{FlipScenario, MachineModel};
use crate::triple::FlipTriple;

/// `a = cos α`, `c = cos γ` with `α, γ` uniform on `[0, π/2)`; `θ` uniform on `[0, π]`.
pub fn random_triple<R: Rng + ?Sized>(rng: &mut R) -> FlipTriple {
    let alpha = rng.random_range(0.0..FRAC_PI_2);
    let gamma = rng.random_range(0.0..FRAC_PI_2);
    let theta = rng.random_range(0.0..=PI);
    FlipTriple::from_angles(alpha, gamma, theta).expect("angles in range")
}

pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R) -> FlipScenario {
    let triple = random_triple(rng);
    FlipScenario {
        triple,
        machine: MachineModel::random(rng),
    }
}

pub fn random_bloch_vector<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    BlochVector::new(r * phi.cos(), r * phi.sin(), z)
}

/// Three random states on a random great circle, brought to canonical form.
pub fn random_great_circle_triple<R: Rng + ?Sized>(rng: &mut R) -> FlipTriple {
    loop {
        let n = random_bloch_vector(rng);
        let states = [(); 3].map(|_| great_circle_state(&n, rng.random_range(0.0..2.0 * PI)));
        let [s0, s1, s2] = states;
        let raw = QubitTriple::new(s0, s1, s2).expect("normalized qubits");
        if let Ok(c) = canonicalize_triple(&raw) {
            return c.triple;
        }
    }
}

/// A triple whose Bloch determinant is at least `floor` in magnitude.
pub fn random_triple_off_circle<R: Rng + ?Sized>(rng: &mut R, floor: f64) -> FlipTriple {
    loop {
        let t = random_triple(rng);
        if t.bloch_determinant().abs() >= floor {
            return t;
        }
    }
}
