use thiserror::Error;

/// Errors from the finite-alphabet probability kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("alphabet `{name}` is empty")]
    EmptyAlphabet { name: String },
    #[error("alphabet `{name}` repeats label `{label}`")]
    DuplicateLabel { name: String, label: String },
    #[error("tensor has {got} entries but the axes require {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("entry {index} is negative or not finite ({value})")]
    InvalidMass { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, outside 1 +/- 1e-12")]
    NotNormalized { sum: f64 },
    #[error("row {row} of the kernel sums to {sum}, outside 1 +/- 1e-12")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("axis index {axis} is out of range for a rank-{rank} pmf")]
    InvalidAxis { axis: usize, rank: usize },
    #[error("axis sets must be nonempty")]
    EmptyAxisSet,
    #[error("axis {axis} appears in more than one argument set")]
    OverlappingAxes { axis: usize },
    #[error("sequences have unequal lengths ({first} vs {other})")]
    LengthMismatch { first: usize, other: usize },
    #[error("symbol {symbol} is outside an alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },
    #[error("expected {expected} sequences (one per axis), got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("typicality slack must be positive, got {mu}")]
    NonPositiveSlack { mu: f64 },
    #[error("blocklength must be at least 1")]
    ZeroBlocklength,
    #[error("sequence space of {size} tuples exceeds the enumeration cap of {cap}")]
    EnumerationCap { size: f64, cap: u64 },
}

/// Errors raised by the information-optimization solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error("rate must be a nonnegative finite number, got {rate}")]
    NegativeRate { rate: f64 },
    #[error("auxiliary cardinality must be at least 1")]
    ZeroAuxCardinality,
    #[error("expected a pmf over two axes, got rank {rank}")]
    NotAPair { rank: usize },
    #[error("oracle limited to |Y| <= 3 and aux cardinality <= 4 (got {alphabet}, {aux})")]
    OracleTooLarge { alphabet: usize, aux: usize },
    #[error("oracle grid needs {evaluations:e} evaluations, above the limit of {limit:e}")]
    OracleGridTooLarge { evaluations: f64, limit: f64 },
    #[error("grid_steps must be at least 1")]
    ZeroGridSteps,
    #[error("lambda list is empty")]
    EmptyLambdas,
    #[error("lambdas must be nonnegative and sorted in descending order")]
    UnsortedLambdas,
    #[error("rate {rate} lies outside the curve range [0, {max}]")]
    RateOutOfRange { rate: f64, max: f64 },
    #[error("expected {expected} curves, got {got}")]
    CurveCountMismatch { expected: usize, got: usize },
    #[error("curve at position {position} is for hop {hop}")]
    CurveHopMismatch { position: usize, hop: usize },
    #[error("distortion table has {got} entries, expected {expected}")]
    DistortionShape { expected: usize, got: usize },
    #[error("distortion entries and D must be nonnegative and finite")]
    InvalidDistortion,
    #[error("no test channel and reconstruction map reach distortion {target}; the minimum is {best}")]
    InfeasibleDistortion { target: f64, best: f64 },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Errors from the concrete K-hop encoders and deciders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("hop count K must be at least 1")]
    NoHops,
    #[error("joint source pmf has {got} axes, expected K+1 = {expected}")]
    SourceRank { expected: usize, got: usize },
    #[error("expected {expected} entries for `{field}`, got {got}")]
    FieldLength { field: &'static str, expected: usize, got: usize },
    #[error("rate R_{hop} = {rate} is negative or not finite")]
    InvalidRate { hop: usize, rate: f64 },
    #[error("epsilon_{hop} = {epsilon} lies outside [0, 1)")]
    InvalidEpsilon { hop: usize, epsilon: f64 },
    #[error("channel for hop {hop} maps from {got} symbols but Y_{prev} has {expected}")]
    ChannelAlphabet { hop: usize, prev: usize, expected: usize, got: usize },
    #[error("hop {hop}: I(U;Y) = {info:.6} leaves no rate margin below R = {rate}")]
    NoRateMargin { hop: usize, info: f64, rate: f64 },
    #[error("sequence for hop {hop} has length {got}, expected blocklength {expected}")]
    BlocklengthMismatch { hop: usize, expected: usize, got: usize },
    #[error("symbol {symbol} does not belong to an alphabet of size {size}")]
    AlphabetMismatch { symbol: usize, size: usize },
    #[error("codebook for hop {hop} has 2^{bits} entries, too many to materialize")]
    CodebookTooLarge { hop: usize, bits: u32 },
    #[error("message index {index} is outside the codebook of hop {hop}")]
    MessageOutOfRange { hop: usize, index: u64 },
    #[error("typicality slack must be positive, got {mu}")]
    NonPositiveSlack { mu: f64 },
    #[error("blocklength must be at least 1")]
    ZeroBlocklength,
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Errors from the Monte Carlo harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("trial budget must be at least 1")]
    NoTrials,
    #[error("blocklengths must be nonempty and strictly increasing")]
    BadBlocklengths,
    #[error("exponent fit for k = {k} needs at least 3 usable blocklengths, found {usable}")]
    TooFewPoints { k: usize, usable: usize },
    #[error("every beta estimate for k = {k} is zero; the exponent is unresolvable at this trial budget")]
    Unresolvable { k: usize },
    #[error("epsilon sweep is empty")]
    EmptySweep,
    #[error("target epsilon {epsilon} unattainable for k = {k} at n = {n}: closest alpha is {closest}")]
    UnattainableEpsilon { k: usize, n: usize, epsilon: f64, closest: f64 },
    #[error("decision center {k} does not exist in a {hops}-hop network")]
    NoSuchCenter { k: usize, hops: usize },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Errors from the exact enumeration diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("enumeration of {size:e} tuples exceeds the cap of {cap} tuples")]
    CapExceeded { size: f64, cap: u64 },
    #[error("Delta_{k} = 0: the scheme rejects all typical mass")]
    ZeroDelta { k: usize },
    #[error("decision center {k} does not exist in a {hops}-hop code")]
    NoSuchCenter { k: usize, hops: usize },
    #[error("entropy convergence needs at least 3 blocklengths, got {got}")]
    TooFewBlocklengths { got: usize },
    #[error("invariant violated: {0}")]
    Violated(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Top-level error: wraps every module error with its module of origin.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probcore: {0}")]
    Prob(#[from] ProbError),
    #[error("exponents: {0}")]
    Exponents(#[from] ExponentError),
    #[error("schemes: {0}")]
    Schemes(#[from] SchemeError),
    #[error("simulator: {0}")]
    Simulator(#[from] SimulationError),
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] DiagnosticsError),
    #[error("config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
