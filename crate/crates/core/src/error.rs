use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the domain of the model.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The attractor sits on a bifurcation point; the linearized theory does not apply.
    #[error("attractor at u = {u} is marginal (ν̃² = {nu_sq:e}); linearized fluctuations are undefined")]
    MarginalAttractor { u: f64, nu_sq: f64 },

    /// The attractor is the saddle (unstable) solution.
    #[error("attractor at u = {u} is unstable (ν̃² = {nu_sq})")]
    UnstableAttractor { u: f64, nu_sq: f64 },

    /// The Lyapunov equation has no positive-definite solution.
    #[error("stationary covariance is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A perturbative denominator is too close to zero.
    #[error("channel at ω = {omega:e} rad/s is within the oscillator linewidth of ω₀ = {omega0:e} rad/s; use the resonant expressions")]
    NearResonance { omega: f64, omega0: f64 },

    /// Tabulated bath spectrum is malformed.
    #[error("bath table: {0}")]
    BathTable(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors that come from the physics (a regime breakdown) rather than bad input.
    pub fn is_validity_fatal(&self) -> bool {
        matches!(
            self,
            Error::MarginalAttractor { .. }
                | Error::UnstableAttractor { .. }
                | Error::NotPositiveDefinite(_)
                | Error::NearResonance { .. }
        )
    }
}
