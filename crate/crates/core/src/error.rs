use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid partition: a = {a}, b = {b}, n = {n}")]
    InvalidPartition { a: f64, b: f64, n: usize },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {0} outside the partition")]
    OutOfDomain(f64),
    #[error("delta-h formulation requires the Laplacian of the lifting function")]
    MissingLaplacian,
    #[error("diffusion coefficient k = {value} is not positive at ({x}, {y})")]
    NonPositiveDiffusion { x: f64, y: f64, value: f64 },
    #[error("singular matrix (zero pivot in column {column})")]
    Singular { column: usize },
    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("no interface detected: data is constant in y at x = {x}")]
    NoInterface { x: f64 },
    #[error("lifting profile does not cover [{lo}, {hi}]")]
    ProfileRange { lo: f64, hi: f64 },
    #[error("quadrature points {first} and {second} lie in the same element")]
    SameElement { first: f64, second: f64 },
    #[error("snapshot set is empty or identically zero")]
    EmptySnapshots,
    #[error("reference solution has zero norm")]
    ZeroReferenceNorm,
    #[error("strip half-width {radius} is below one element width {spacing}")]
    DegenerateStrip { radius: f64, spacing: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("solver failed at mu = {mu:?}: {cause}")]
    SnapshotFailure { mu: alloc::vec::Vec<f64>, cause: String },
    #[error("indicator evaluation failed in cell {cell}: {cause}")]
    IndicatorFailure { cell: usize, cause: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
