use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (max |H - H^dagger| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not unitary (max |U^dagger U - I| = {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("degenerate spectrum: {what}{}", at_time(*.time))]
    Degenerate { what: String, time: Option<f64> },

    #[error("{what} did not converge (last residual {residual:.3e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("structural instability: {0}")]
    Instability(String),

    #[error("resonance: {0}")]
    Resonance(String),
}

fn at_time(t: Option<f64>) -> String {
    match t {
        Some(t) => format!(" at t = {t:.6} ms"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.to_string(), reason: reason.into() }
    }

    pub(crate) fn degenerate(what: impl Into<String>, time: Option<f64>) -> Self {
        Error::Degenerate { what: what.into(), time }
    }
}
