use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout {layout:?} describes {expected} amplitudes but {actual} were given")]
    LayoutMismatch {
        layout: Vec<usize>,
        expected: usize,
        actual: usize,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid factor selection: {0}")]
    InvalidFactors(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("negative eigenvalue {0:e} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("Bloch vector is not unit norm (norm {0})")]
    NotUnitVector(f64),

    #[error("degenerate triple: {0} coincide up to a phase")]
    Degenerate(&'static str),

    #[error("triple outside canonical form: {0} are orthogonal")]
    OrthogonalPair(&'static str),

    #[error("invalid triple: {0}")]
    InvalidTriple(String),

    #[error("Gram matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    GramNotPsd(f64),

    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),

    #[error("flip machine is undefined on the state in the target slot")]
    UndefinedInput,

    #[error("target slot matches more than one defined input; tag the term explicitly")]
    AmbiguousInput,

    #[error("target factor {0} is not a qubit")]
    TargetNotQubit(usize),

    #[error("product-state normalization is singular (b = d = 0)")]
    SingularNormalization,

    #[error("no witness machine exists for a triple off every great circle")]
    NoWitness,

    #[error("invalid search configuration: {0}")]
    InvalidSearch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
