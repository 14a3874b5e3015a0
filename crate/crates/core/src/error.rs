use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sample at x = {x} is within the pole margin: m3 = {m3} < {floor}")]
    PoleProximity {
        x: f64,
        t: Option<f64>,
        m3: f64,
        floor: f64,
    },

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("blow-up at t = {time} (last valid time {last_valid_time})")]
    BlowUp { time: f64, last_valid_time: f64 },

    #[error("bracket [{lo}, {hi}] does not straddle the target: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    #[error("trajectory does not cover the requested time: {0}")]
    Coverage(String),

    #[error("Picard iteration failed to contract after {iterations} iterates (measured factor {factor})")]
    ContractionFailure {
        iterations: usize,
        factor: f64,
        differences: Vec<f64>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
