use thiserror::Error;

/// Errors raised by efficiency evaluation and model validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("argument {z} outside the domain of {family} (valid range [0, {upper}))")]
    Domain { family: &'static str, z: f64, upper: f64 },

    #[error("derivative value {v} is not attained by {family}")]
    Range { family: &'static str, v: f64 },

    #[error("invalid game specification: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),
}

/// Errors raised by the equilibrium solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("no support pair produced a consistent equilibrium")]
    NoEquilibriumFound,

    #[error("budget point (X_A={budget_attacker}, Y_D={budget_defender}) is not covered by any closed-form case")]
    UnhandledBudgetPoint { budget_attacker: f64, budget_defender: f64 },

    #[error("operation requires the {expected} model")]
    WrongModel { expected: &'static str },

    #[error("brute-force search found no discrete equilibrium (best regret {best_regret:.3e} > bound {bound:.3e})")]
    NotFound { best_regret: f64, bound: f64 },
}

pub type Result<T, E = SolveError> = std::result::Result<T, E>;
