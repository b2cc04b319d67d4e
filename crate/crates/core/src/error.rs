use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty interval list")]
    Empty,
    #[error("degenerate interval [{0}, {1}]: left endpoint must be below right endpoint")]
    Degenerate(f64, f64),
    #[error("intervals [{0}, {1}] and [{2}, {3}] overlap")]
    Overlap(f64, f64, f64, f64),
    #[error("spectrum is a single interval and has no gaps")]
    NoGap,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no admissible N <= {0} found")]
    NotFound(usize),
    #[error("spectra differ")]
    SpectrumMismatch,
    #[error("target is not a union of whole parts of the spectrum")]
    NotSubUnion,
    #[error("point {point} is not a zero (|f| = {value:e}, tolerance {tol:e})")]
    NotAZero { point: String, value: f64, tol: f64 },
    #[error("polynomial degree {0} exceeds the supported maximum")]
    DegreeOverflow(usize),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("block adjustment infeasible: {0}")]
    Infeasible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("matrix size {0} exceeds the limit {1}")]
    Size(usize, usize),
    #[error("ill-conditioned Gram section: eigenvalue ratio {ratio:e}")]
    IllConditioned { ratio: f64 },
    #[error("anchor {0} is not in the frequency set")]
    AnchorNotInSet(String),
    #[error("no independent anchor tuple: best score {0:e}")]
    DegenerateTuple(f64),
    #[error("biorthogonal numerator vanishes identically")]
    NullElement,
    #[error("duplicate frequency {0}")]
    Duplicate(String),
    #[error("parse error: {0}")]
    Parse(String),
}
