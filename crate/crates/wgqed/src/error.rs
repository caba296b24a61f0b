use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("drive is undefined at zeta = {0}")]
    DriveUndefined(f64),
    #[error("zeta = {0} is not a grid node")]
    OffGrid(f64),
    #[error("non-finite amplitude in {op} at zeta = {zeta}")]
    NonFinite { op: &'static str, zeta: f64 },
    #[error("steady state not reached: relative drift of c_e is {drift:.3e} (tolerance {tol:.1e})")]
    NotConverged { drift: f64, tol: f64 },
    #[error("no photons emitted (mean photon number is zero)")]
    NoPhotons,
    #[error("invalid frequency grid: {0}")]
    FrequencyGrid(String),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("density matrix invariant violated at zeta = {zeta}: {what}")]
    Density { zeta: f64, what: String },
    #[error("amplitudes for {0} were not materialized")]
    NotMaterialized(String),
}

pub type Result<T> = std::result::Result<T, Error>;
