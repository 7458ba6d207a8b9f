//! Numerical checks that exact flipping of three qubit states off a great
//! circle of the Bloch sphere would allow signalling and raise entanglement
//! under local operations, while states on a great circle admit a machine
//! that does neither.

pub mod bloch;
pub mod constructions;
pub mod error;
pub mod linalg;
pub mod machine;
pub mod report;
pub mod sampling;
pub mod sweep;
pub mod tol;
pub mod triple;

pub use bloch::{
    canonicalize_triple, coplanarity_det, great_circle_flipper, is_great_circle, BlochVector,
    Canonicalization, QubitTriple,
};
pub use error::{Error, Result};
pub use machine::{apply_flip_channel, machine_from_gram, FlipScenario, MachineModel, TaggedState};
pub use report::{evaluate, Evaluation, Tolerances, VerificationReport};
pub use triple::{FlipTriple, Which};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
