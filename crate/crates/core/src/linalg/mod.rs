//! Dense complex linear algebra for small composite Hilbert spaces.

mod density;
mod eigen;
mod matrix;
mod state;

pub use density::{
    binary_entropy, entropy_of_spectrum, frobenius_distance, partial_trace, pure_density,
    reduced_density, trace_distance, von_neumann_entropy, DensityMatrix,
};
pub(crate) use density::half_trace_norm;
pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use matrix::{inner, norm_sqr, CMatrix, C64, ONE, ZERO};
pub use state::{tensor, tensor_all, StateVector};
