use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("power overflow: A^{0} has non-finite entries")]
    PowerOverflow(u64),

    #[error("polynomial evaluation overflow")]
    PolynomialOverflow,

    #[error("resolvent at spectrum: zI - A is numerically singular at z = {0}")]
    ResolventAtSpectrum(num_complex::Complex64),

    #[error("svd failure: no convergence after {0} sweeps")]
    SvdFailure(usize),

    #[error("eigensolver failure: no convergence after {0} iterations")]
    EigensolverFailure(usize),

    #[error("no separation: every spectrum point coincides with {0}")]
    NoSeparation(num_complex::Complex64),

    #[error("no separating circle below modulus {0}")]
    NoSeparatingCircle(f64),

    #[error("ambiguous orbit matching near {0}")]
    AmbiguousOrbitMatching(num_complex::Complex64),

    #[error("inconsistent orbit data: {0}")]
    InconsistentOrbitData(String),

    #[error("contour touches spectrum: circle |z - {center}| = {radius} passes within {distance:e} of an eigenvalue")]
    ContourTouchesSpectrum {
        center: num_complex::Complex64,
        radius: f64,
        distance: f64,
    },

    #[error("projection not converged with {0} quadrature nodes")]
    ProjectionNotConverged(usize),

    #[error("calculus split residual {residual:e} exceeds {bound:e}")]
    SplitResidual { residual: f64, bound: f64 },

    #[error("trace decomposition mismatch: {residual:e} exceeds {bound:e}")]
    DecompositionMismatch { residual: f64, bound: f64 },

    #[error("orbit collision: alpha^d equals lambda^d for excluded alpha = {0}")]
    OrbitCollision(num_complex::Complex64),

    #[error("HS bound violation: s2(FJ) = {s2} exceeds a* = {a_star}")]
    HsBoundViolation { s2: f64, a_star: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
