use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no root of T - lambda along the ray within t <= {0}")]
    NoRoot(f64),
    #[error("critical point: |grad T| = {0:e} at the Fermi point")]
    CriticalPoint(f64),
    #[error("operation not supported for symbol kind {0}")]
    UnsupportedKind(String),
    #[error("Taylor support is empty")]
    EmptySupport,
    #[error("symbol is not even: coefficient of {0:?} has odd order")]
    NotEven(Vec<u32>),
    #[error("non-finite sample at flat index {0}")]
    NonFinite(usize),
    #[error("symbol is not finite at frequency {0:?}")]
    SymbolSingular(Vec<f64>),
    #[error("mask excludes {0:.1}% of the region")]
    AllMasked(f64),
    #[error("box too small: tail ratio {ratio:e} on axis {axis} exceeds {limit:e}")]
    BoxTooSmall { axis: usize, ratio: f64, limit: f64 },
    #[error("requested k = {requested} but curvature data gives k = {found}")]
    CurvatureMismatch { requested: usize, found: usize },
    #[error("real-potential condition fails for m = {0}")]
    ConditionFailed(u32),
    #[error("cutoff half-width c = {0} is too large")]
    CutoffOverlap(f64),
    #[error("zero gap {gap} is smaller than 4c = {four_c}")]
    ZeroGapTooSmall { gap: f64, four_c: f64 },
    #[error("Fermi set is not a sphere")]
    NonCompact,
    #[error("lower bound fails: min phi * weight^(N/2) = {0:e}")]
    LowerBoundFailed(f64),
    #[error("Clifford relation violated by {0:e}")]
    CliffordViolation(f64),
    #[error("partition of unity deviates from 1 by {0:e}")]
    CoverGap(f64),
    #[error("q = {q} is at or below the threshold {threshold}")]
    ThresholdViolated { q: f64, threshold: f64 },
    #[error("field at the lattice box boundary is {0:e} of its maximum")]
    TailTooFat(f64),
    #[error("spectral energy fraction {0:e} in the top third of the band")]
    GridTooCoarse(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid(_)
            | Error::ThresholdViolated { .. }
            | Error::UnsupportedKind(_)
            | Error::CurvatureMismatch { .. }
            | Error::ConditionFailed(_)
            | Error::CutoffOverlap(_)
            | Error::NotEven(_)
            | Error::NonCompact
            | Error::Io(_)
            | Error::Json(_)
            | Error::Format(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
