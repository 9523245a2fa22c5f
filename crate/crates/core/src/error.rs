use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ribbon width N must be at least 1")]
    ZeroWidth,

    #[error("potential has {found} entries, expected p = 2N+1 = {expected}")]
    PotentialLength { expected: usize, found: usize },

    #[error("potential entry v{index} is not finite")]
    NonFinitePotential { index: usize },

    #[error("section of {cells} cells is too short for {boundary} boundary (need at least {min})")]
    TooFewCells {
        cells: usize,
        min: usize,
        boundary: &'static str,
    },

    #[error("section has {rows} rows, above the dense size cap of {cap}")]
    SizeCap { rows: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("flat-band support [{lo}, {hi}] leaves the open section of {cells} cells")]
    SupportTouchesBoundary { lo: i64, hi: i64, cells: usize },

    #[error("state is not in the flat-band eigenspace (relative residual {residual:e})")]
    NotInEigenspace { residual: f64 },

    #[error("flat-band criterion violated: v{index} = {value} differs from v1 = {first}")]
    FlatCriterion { index: usize, value: f64, first: f64 },

    #[error("hopping a = {0} outside [0, 2]")]
    HoppingOutOfRange(f64),

    #[error("transfer matrices are undefined at a = 0")]
    DegenerateHopping,

    #[error("transfer step {step} outside 1..={max}")]
    StepOutOfRange { step: usize, max: usize },

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("bisection did not reach the requested tolerance after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("matrix is not symmetric (deviation {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("Jacobi rotations did not converge within {sweeps} sweeps")]
    SweepCap { sweeps: usize },

    #[error("band index {k} outside -{n}..={n}")]
    BandIndex { k: i64, n: usize },

    #[error("band index {k} has no linear inner-edge formula for N = {n} (needs 0 < |k| < (N+1)/2)")]
    EdgeRegime { k: i64, n: usize },

    #[error("potential must be strictly increasing; v{index} does not exceed its predecessor")]
    NotStrictlyIncreasing { index: usize },

    #[error("coupling t = {t} below the strong-field threshold {min}")]
    CouplingBelowThreshold { t: f64, min: f64 },

    #[error("order check needs at least 3 halvings, got {0}")]
    TooFewHalvings(usize),

    #[error("order check saw a zero error at some but not all scales")]
    DegenerateOrder,

    #[error("grid must contain at least 2 strictly increasing points in [0, 2]")]
    InvalidGrid,
}
