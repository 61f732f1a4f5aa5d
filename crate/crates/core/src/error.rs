use thiserror::Error;

use crate::sft::Word;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("adjacency matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("adjacency entry ({row}, {col}) is {value}, expected 0 or 1")]
    NonBinary { row: usize, col: usize, value: i64 },
    #[error("symbol {symbol} has no {direction} edge")]
    DeadSymbol { symbol: usize, direction: &'static str },
    #[error("adjacency matrix is not primitive: entry ({row}, {col}) of T^{power} is zero")]
    NotPrimitive { row: usize, col: usize, power: usize },
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("alphabet of {0} symbols exceeds the supported maximum of 256")]
    AlphabetTooLarge(usize),
    #[error("length must be at least 1")]
    ZeroLength,
    #[error("{count} words of length {n} exceed the enumeration cap {cap}")]
    EnumerationCap { n: usize, count: f64, cap: usize },
    #[error("symbol {symbol} out of range for alphabet of size {q}")]
    BadSymbol { symbol: usize, q: usize },
    #[error("word {0} is not admissible")]
    Inadmissible(Word),
    #[error("no connecting word between {a} and {b} of length at most {max_len}")]
    NoBridge { a: u8, b: u8, max_len: usize },
    #[error("invalid word string {0:?}")]
    ParseWord(String),

    #[error("matrix dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("dimension {0} exceeds the supported maximum of 32")]
    DimensionTooLarge(usize),
    #[error("eigenvalue computation did not converge")]
    EigenFailure,

    #[error("cocycle window radius {k} requires words of length at least {min}, got {len}")]
    WordTooShort { k: usize, min: usize, len: usize },
    #[error("cocycle table has no entry for window {0}")]
    MissingWindow(Word),
    #[error("cocycle window {0} is not an admissible word of length k + 1")]
    BadWindow(Word),
    #[error("exterior power degree {t} out of range 1..={d}")]
    ExteriorDegree { t: usize, d: usize },
    #[error("Hölder exponent {0} outside (0, 1]")]
    BadAlpha(f64),
    #[error("singular value exponent {0} must be finite and nonnegative")]
    BadExponent(f64),

    #[error("potential has no value for word {0}")]
    MissingPotentialValue(Word),
    #[error("potential value {value} for word {word} is not positive")]
    NonPositivePotential { word: Word, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weights sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("weight {value} for word {word} is negative or non-finite")]
    BadWeight { word: Word, value: f64 },
    #[error("weights are given at level {have}, need at least {need}")]
    LevelTooSmall { have: usize, need: usize },
    #[error("word {word} has length {len}, expected {expected}")]
    WordLength { word: Word, len: usize, expected: usize },
    #[error("zero marginal weight for word {0} in an admissible concatenation")]
    ZeroMarginal(Word),
    #[error("no admissible connector of length at most {k_max} for pair ({left}, {right})")]
    NoConnector { left: Word, right: Word, k_max: usize },

    #[error("cocycle is not fiber-bunched (worst {worst} >= threshold {threshold})")]
    NotBunched { worst: f64, threshold: f64 },
    #[error("points are not related along the {0} set")]
    NotRelated(&'static str),
    #[error("holonomy approximants diverge (fitted ratio {0})")]
    Divergent(f64),
    #[error("invalid point specification: {0}")]
    BadPoint(String),

    #[error("distribution masses sum to {0}, expected 1")]
    MarginalNotNormalized(f64),
    #[error("distribution support {size} exceeds the limit {limit}")]
    SupportOverflow { size: usize, limit: usize },
    #[error("sequence length {got} differs from the declared length {expected}")]
    SequenceLength { expected: usize, got: usize },
    #[error("transportation solver did not terminate within {0} pivots")]
    SolverStalled(usize),
    #[error("window of {need} coordinates exceeds the model level {have}")]
    WindowOverflow { need: usize, have: usize },
    #[error("partition does not label admissible window word {0}")]
    UnlabeledWord(Word),
    #[error("inconsistent masses: {0}")]
    InconsistentMasses(String),
}
