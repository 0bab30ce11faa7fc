use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph is not connected")]
    NotConnected,
    #[error("vertex {0} does not have exactly three branches")]
    NotTrivalent(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown catalog graph {0:?}")]
    UnknownCatalogName(String),
    #[error("genus {0} is too large to enumerate exhaustively")]
    GenusTooLarge(u32),
    #[error("genus {0} is not supported (need g >= 2)")]
    UnsupportedGenus(u32),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmissibilityError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("p^N does not fit in 128 bits for p = {p}, N = {level}")]
    LevelOverflow { p: u64, level: u32 },
    #[error("p^N = {size} exceeds the enumeration guard {guard}")]
    GuardExceeded { size: u128, guard: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Admissibility(#[from] AdmissibilityError),
    #[error("numbering is missing edge {0}")]
    MissingEdge(String),
    #[error("numbering has unknown edge {0}")]
    ExtraEdge(String),
    #[error("search space {size} exceeds the brute-force guard {guard}")]
    GuardExceeded { size: u128, guard: u128 },
    #[error("frontier table needs about {needed} bytes, cap is {cap} (frontier: {frontier:?})")]
    MemoryCapExceeded {
        needed: u128,
        cap: u64,
        frontier: Vec<String>,
    },
    #[error("invalid elimination order: {0}")]
    InvalidOrder(String),
    #[error("alphabet of {0} labels is too large for frontier counting")]
    AlphabetTooLarge(u128),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("not enough samples for residue {residue}: have {have}, need {need}")]
    InsufficientSamples { residue: u32, have: usize, need: usize },
    #[error("singular system for residue {0} (duplicate or degenerate arguments)")]
    SingularSystem(u32),
    #[error("samples for residue {0} are not reproduced by any quasi-polynomial of this shape")]
    InconsistentSamples(u32),
    #[error("no period in {{1, 2, 4}} reproduces the held-out samples")]
    NoPeriodValidates,
    #[error("period {0} is not one of 1, 2, 4")]
    UnsupportedPeriod(u32),
    #[error("constituent for residue {0} is undefined")]
    UndefinedConstituent(u32),
    #[error("Bernoulli index {index} exceeds bound {bound}")]
    BoundExceeded { index: u32, bound: u32 },
    #[error("malformed coefficient {0:?}")]
    MalformedCoefficient(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("sine sum {value} is not within 1e-6 of an integer")]
    NotNearInteger { value: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("denominator count is zero")]
    ZeroDenominator,
    #[error("{numerator} is not divisible by {denominator}")]
    NonIntegerRatio {
        numerator: String,
        denominator: String,
    },
    #[error("no closed form for genus {0}")]
    UnsupportedGenus(u32),
}
