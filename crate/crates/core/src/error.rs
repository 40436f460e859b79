use thiserror::Error;

pub type Result<T> = std::result::Result<T, CatError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatError {
    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: i64 },
    #[error("matrix is not hyperbolic (|trace| = {trace} <= 2)")]
    NotHyperbolic { trace: i64 },
    #[error("matrix is not congruent to the identity mod 2")]
    BadParity,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not odd")]
    NotOdd(u64),
    #[error("{n} divides the discriminant {disc}")]
    DividesDiscriminant { n: u64, disc: i64 },
    #[error("no generator of order {order} found in the centralizer")]
    NoGenerator { order: u64 },
    #[error("group element is the identity mod N")]
    IdentityElement,
    #[error("A^{t} is the identity mod N")]
    IdentityPower { t: i64 },
    #[error("closed-form and matrix evaluations disagree ({closed} vs {matrix})")]
    RouteMismatch { closed: u64, matrix: u64 },
    #[error("eigenvalue of A is +-1 mod N")]
    DegenerateLambda,
    #[error("context is {actual}, operation needs a {expected} prime")]
    WrongKind {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("observable has a nonzero mean coefficient")]
    NonzeroMean,
    #[error("coefficients at {k:?} and its negative are not complex conjugates")]
    ConflictingCoefficient { k: [i64; 2] },
    #[error("support violates max|Q(k)| < N/2 (max |Q| = {max_q}, N = {n})")]
    SupportTooLarge { max_q: i64, n: u64 },
    #[error("observable file: {0}")]
    ObservableFormat(String),

    #[error("unknown window kind `{0}`")]
    UnknownKind(String),
    #[error("window length L = {l} must satisfy 1 <= L < 2r = {}", 2 * .r)]
    WindowTooWide { l: f64, r: u64 },
    #[error("tail tolerance must be positive, got {0}")]
    BadTolerance(f64),

    #[error("projector defect {residual:e} exceeds tolerance")]
    ProjectorDefect { residual: f64 },
    #[error("Hecke ranks sum to {total}, expected {n}")]
    RankMismatch { total: usize, n: usize },
}

impl CatError {
    /// Errors caused by invalid inputs, as opposed to failed numerical checks.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            CatError::RouteMismatch { .. }
                | CatError::ProjectorDefect { .. }
                | CatError::RankMismatch { .. }
                | CatError::NoGenerator { .. }
        )
    }
}
