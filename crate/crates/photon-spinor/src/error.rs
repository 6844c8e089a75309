use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Variant names are what the CLI prints.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ZeroWaveVector: |k| = 0 has no polarization basis")]
    ZeroWaveVector,
    #[error("GridMismatch: {0}")]
    GridMismatch(String),
    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),
    #[error("BoundaryUnsupported: {0}")]
    BoundaryUnsupported(String),
    #[error("IncommensurateMode: k = {k:?} is not a lattice vector of the periodic box")]
    IncommensurateMode { k: [f64; 3] },
    #[error("AsymmetricGrid: {0}")]
    AsymmetricGrid(String),
    #[error("NonTransverseInput: max|div E| = {div_e:e}, max|div H| = {div_h:e}")]
    NonTransverseInput { div_e: f64, div_h: f64 },
    #[error("NonPositiveMedium: {what} = {value} at {at:?}")]
    NonPositiveMedium { what: &'static str, value: f64, at: [f64; 4] },
    #[error("DegenerateMass: effective mass |chi| = {0:e} vanishes")]
    DegenerateMass(f64),
    #[error("SVEAViolated: envelope ratio {ratio:e} exceeds threshold {threshold}")]
    SVEAViolated { ratio: f64, threshold: f64 },
    #[error("DomainViolation: {0}")]
    DomainViolation(String),
    #[error("InvalidAngularMomentum: angular momentum below threshold (need m^2 >= 4, got {0})")]
    InvalidAngularMomentum(f64),
    #[error("RootNotBracketed: {0}")]
    RootNotBracketed(String),
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("NonFinite: {0}")]
    NonFinite(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}
