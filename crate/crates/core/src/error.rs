use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("all columns are numerically null")]
    ZeroRank,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("odd dimension {0} where an even one is required")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric (residual {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("eigenvalue -1 on the branch cut (distance {0:.3e})")]
    BranchCutHit(f64),
    #[error("no Lagrangian planes: signature ({n_plus}, {n_minus})")]
    NoLagrangianPlanes { n_plus: usize, n_minus: usize },
    #[error("subspace is not Lagrangian: {0}")]
    NotLagrangian(String),
    #[error("projection onto K+ is rank deficient (smallest singular value {0:.3e})")]
    ProjectionSingular(f64),
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("unitaries belong to different canonical splits")]
    SplitMismatch,
    #[error("inconsistent symmetries: {0}")]
    InconsistentSymmetries(String),
    #[error("class {class} requires an even dimension, got {n}")]
    BadParity { class: String, n: usize },
    #[error("not a member of class {class}: {reason}")]
    NotInClass { class: String, reason: String },
    #[error("eigenvalue of U at distance {0:.3e} from 1 lies in the ambiguity band")]
    AmbiguousKernel(f64),
    #[error("index kinds do not match the class: {0}")]
    KindMismatch(String),
    #[error("spectral gap closed: {0}")]
    GapClosed(String),
    #[error("energy {energy} is not below the spectrum (bottom {bottom})")]
    NotInGap { energy: f64, bottom: f64 },
    #[error("matrix is not invertible: {0}")]
    NotInvertible(String),
    #[error("incompatible boundary forms: {0}")]
    IncompatibleBoundary(String),
    #[error("bad discretization: {0}")]
    BadSpec(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("iteration did not converge: {0}")]
    NotConverged(String),
    #[error("internal consistency check failed: {0}")]
    CrossCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
