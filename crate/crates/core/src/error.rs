use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("non-finite volatility at index {index} (explosive parameters?)")]
    Divergence { index: usize },

    #[error("input too short: need {needed} values, got {got}")]
    InputLength { needed: usize, got: usize },

    #[error("sample too small: need at least {needed}, got {got}")]
    SampleSize { needed: usize, got: usize },

    #[error("state space of {size} outcomes exceeds the enumeration budget of {budget}")]
    Capacity { size: u128, budget: u128 },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("surrogate law infeasible: |k3| = {k3} exceeds the maximal representable {max_abs_k3} for s2 = {s2}")]
    Infeasible { s2: f64, k3: f64, max_abs_k3: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("integration range does not cover the laws: {0}")]
    Coverage(String),

    #[error("moment budget exceeded: {0}")]
    MomentBudget(String),

    #[error("burn-in {got} below the required minimum {min}")]
    BurnIn { got: usize, min: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::ParameterDomain(msg.into())
    }
}
