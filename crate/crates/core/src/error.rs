use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("minimal polynomial is not monic")]
    NonMonic,
    #[error("minimal polynomial is reducible over Q: {0}")]
    ReduciblePolynomial(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unsupported degree: {0}")]
    UnsupportedDegree(String),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("element is not a unit of O_w")]
    NotAUnit,
    #[error("element is not in O_w")]
    NotInOw,
    #[error("projection to the unit lattice is not integral (power {0})")]
    NonIntegralProjection(u64),
    #[error("lattice basis is singular")]
    SingularBasis,
    #[error("lattice classes belong to different primes")]
    PrimeMismatch,
    #[error("Busemann iteration hit its cap at n = {0}")]
    BusemannCap(i64),
    #[error("w is not a unit modulo {0}")]
    WNotUnitModQ(String),
    #[error("group of order {order} exceeds cap {cap}")]
    GroupTooLarge { order: u64, cap: u64 },
    #[error("subgroup is not hyper-elementary")]
    NotHyperElementary,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("no conjugator found")]
    NoConjugatorFound,
    #[error("point shapes do not match")]
    ShapeMismatch,
    #[error("element does not act on the model space: {0}")]
    NotInActingGroup(String),
    #[error("product set exceeds cap {0}")]
    BallTooLarge(usize),
    #[error("breadth-first search exceeded cap {0}")]
    CapExceeded(usize),
    #[error("w is a root of unity")]
    RootOfUnity,
    #[error("counterexample found: {0}")]
    CounterexampleFound(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("integer too large to factor: {0}")]
    FactorLimit(String),
    #[error("internal anomaly: {0}")]
    Anomaly(String),
}

pub type Result<T> = std::result::Result<T, Error>;
