use thiserror::Error;

/// Every failure the library can report. Each variant carries a stable
/// machine-readable code (see [`Error::code`]) that the CLI prints.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leading coefficient {modulus:e} is below the zero threshold")]
    ZeroLeadingCoefficient { modulus: f64 },

    #[error("substitution is not a contraction: {0}")]
    NoContraction(String),

    #[error("truncation unstable: {0}")]
    TruncationUnstable(String),

    #[error("not a Weierstrass polynomial: {0}")]
    NotWeierstrass(String),

    #[error("degenerate germ: {0}")]
    DegenerateGerm(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("singular pairing matrix (condition number {condition:e})")]
    SingularPairing { condition: f64 },

    #[error("out of validated domain: {0}")]
    OutOfDomain(String),

    #[error("contour too close to a branch point: min root separation {separation:e}")]
    ContourTooClose { separation: f64 },

    #[error("aliasing detected: scaled tail coefficient {tail:e} vs max {max:e}")]
    AliasingDetected { tail: f64, max: f64 },

    #[error("root count mismatch: expected {expected}, winding number {found}")]
    RootCountMismatch { expected: usize, found: f64 },

    #[error("not symmetric: {0}")]
    NotSymmetric(String),

    #[error("incompatible real structure: {0}")]
    IncompatibleRealStructure(String),

    #[error("sheet collision: interpolation nodes {separation:e} apart")]
    SheetCollision { separation: f64 },

    #[error("singular sheet: |dF/dy| = {modulus:e} at a sheet point")]
    SingularSheet { modulus: f64 },

    #[error("tolerance exceeded: {what} = {value:e} > {tolerance:e}")]
    ToleranceExceeded {
        what: String,
        value: f64,
        tolerance: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroLeadingCoefficient { .. } => "ZeroLeadingCoefficient",
            Error::NoContraction(_) => "NoContraction",
            Error::TruncationUnstable(_) => "TruncationUnstable",
            Error::NotWeierstrass(_) => "NotWeierstrass",
            Error::DegenerateGerm(_) => "DegenerateGerm",
            Error::RankDeficient(_) => "RankDeficient",
            Error::SingularPairing { .. } => "SingularPairing",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::ContourTooClose { .. } => "ContourTooClose",
            Error::AliasingDetected { .. } => "AliasingDetected",
            Error::RootCountMismatch { .. } => "RootCountMismatch",
            Error::NotSymmetric(_) => "NotSymmetric",
            Error::IncompatibleRealStructure(_) => "IncompatibleRealStructure",
            Error::SheetCollision { .. } => "SheetCollision",
            Error::SingularSheet { .. } => "SingularSheet",
            Error::ToleranceExceeded { .. } => "ToleranceExceeded",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
