use thiserror::Error;

/// Errors reported by graph construction, matrix algebra and walk builders.
#[derive(Debug, Error)]
pub enum SqwError {
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("self loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} out of range (vertex count {1})")]
    VertexOutOfRange(usize, usize),
    #[error("invalid neighbor order at vertex {0}")]
    InvalidNeighborOrder(usize),
    #[error("successor of vertex {vertex} is {successor}, which is not adjacent")]
    InvalidSuccessor { vertex: usize, successor: usize },

    #[error("matrix is not normal (commutator max norm {0:.3e})")]
    NotNormal(f64),
    #[error("eigensolver failed to converge after {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("matrix is singular at pivot {0}")]
    SingularMatrix(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix of size {got} where {expected} was required")]
    BadSize { expected: usize, got: usize },
    #[error("matrix at vertex {vertex} is not unitary (residual {residual:.3e})")]
    NotUnitary { vertex: usize, residual: f64 },
    #[error("no scattering matrix supplied for degree {0}")]
    MissingDegree(usize),
    #[error("scattering family does not match graph: {0}")]
    FamilyMismatch(String),
    #[error("omega vector at vertex {vertex} has norm {norm}, expected 1")]
    NonUnitOmega { vertex: usize, norm: f64 },

    #[error("permuted flip requires a regular graph")]
    NotRegular,
    #[error("not a torus: {0}")]
    NotTorus(String),
    #[error("Chalker-Coddington torus sides must be even and at least 4, got {0}x{1}")]
    OddSize(usize, usize),
    #[error("graph is complete; complement has no edges")]
    ComplementEmpty,
    #[error("graphs differ between the two families")]
    GraphMismatch,

    #[error("alpha = 0 has no spectral map")]
    AlphaZero,
    #[error("value {0} outside the range of the inverse spectral map")]
    OutOfRange(f64),
    #[error("superoperator dimension {0} exceeds the dense limit {1}")]
    TooLarge(usize, usize),
    #[error("invalid quantum state: {0}")]
    BadState(String),
    #[error("half-line window must be at least 6, got {0}")]
    WindowTooSmall(usize),

    #[error("invalid stochastic matrix: {0}")]
    BadStochastic(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numeric verification failed: {0}")]
    NumericFailure(String),
}

impl SqwError {
    /// True for failures of numeric checks and solvers, as opposed to
    /// invalid inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            SqwError::NotNormal(_)
                | SqwError::ConvergenceFailure(_)
                | SqwError::SingularMatrix(_)
                | SqwError::NumericFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SqwError>;
