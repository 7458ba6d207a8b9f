//! The three flipping constructions and the quantities derived from them.

pub mod entanglement;
pub mod product;
pub mod search;
pub mod signalling;

pub use entanglement::{appendix_terms, entanglement_gain, lambda_pair, AppendixReport};
pub use product::{build_product_state, product_final, ProductOutcome};
pub use search::{minimize_deviation, SearchConfig, SearchOutcome};
pub use signalling::{
    build_signalling_state, nosignalling_feasibility, signalling_deviation, Constraint,
    FeasibilityVerdict,
};
