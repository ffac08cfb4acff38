use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("series has a nonzero constant term where zero is required")]
    NonzeroConstantTerm,
    #[error("series has a zero constant term where a unit is required")]
    ZeroConstantTerm,
    #[error("linear coefficient is zero")]
    ZeroLinearCoefficient,
    #[error("computation needs the bigfloat backend: {0}")]
    RequiresBigfloat(String),
    #[error("germ is not tangent to the identity at order {0}")]
    NotTangent(usize),
    #[error("series did not converge after {0} terms")]
    NotConverged(usize),
    #[error("truncation order too small: need {needed}, have {available}")]
    InsufficientOrder { needed: i64, available: i64 },
    #[error("singular system at order {order}: {detail}")]
    Singular { order: usize, detail: String },
    #[error("local system is not flat on triangle {0:?}")]
    NonFlat([usize; 3]),
    #[error("edge weight on {0:?} is not of unit modulus")]
    NotUnit((usize, usize)),
    #[error("germs on edge {edge:?} are not mutually inverse (first mismatch at order {order})")]
    InversePair { edge: (usize, usize), order: usize },
    #[error("cochain is not a cocycle: nonzero coboundary on simplex {0:?}")]
    NotCocycle(Vec<usize>),
    #[error("shape violation: {0}")]
    ShapeViolation(String),
    #[error("coefficient systems are not dual")]
    NotDual,
    #[error("empty generator list")]
    EmptyGenerators,
    #[error("unsupported genus {0}")]
    UnsupportedGenus(u32),
    #[error("invalid surface complex: {0}")]
    InvalidComplex(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
