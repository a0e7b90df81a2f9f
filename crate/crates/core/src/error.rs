use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("resonance: drive frequency {omega} rad/s equals ck with no regulator (eps = 0)")]
    Resonance { omega: f64 },

    #[error("non-finite integrand at node {index} (k = {k}, cos_theta = {cos_theta}, phi = {phi})")]
    NonFinite {
        index: usize,
        k: f64,
        cos_theta: f64,
        phi: f64,
    },

    #[error("evaluation point is {distance:e} m from the wire (minimum {minimum:e} m)")]
    Proximity { distance: f64, minimum: f64 },

    #[error("configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("adaptive quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Resolution(_) => "resolution",
            Error::Resonance { .. } => "resonance",
            Error::NonFinite { .. } => "non_finite",
            Error::Proximity { .. } => "proximity",
            Error::Config(_) => "config",
            Error::NoConvergence(_) => "no_convergence",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
