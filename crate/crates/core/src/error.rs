use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies outside the open unit ball (|x| = {0})")]
    OutsideBall(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("integration failed: step size collapsed at rho = {last_rho}")]
    IntegrationFailure { last_rho: f64 },
    #[error("bracket endpoints classify identically: {0}")]
    Bracket(String),
    #[error("non-finite integrand at node {node} (rho = {rho})")]
    NonFiniteIntegrand { node: usize, rho: f64 },
    #[error("I(tu) has no sign change for t in [1e-8, 1e8]")]
    NehariBracket,
    #[error("energy increased for {0} successive re-projections")]
    Divergence(usize),
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {err:e})")]
    Quadrature { a: f64, b: f64, err: f64 },
    #[error("quadrature mismatch: {0}")]
    QuadratureMismatch(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("root finder: {0}")]
    Root(String),
}

pub type Result<T> = std::result::Result<T, Error>;
