//! Nash equilibria of two-player attacker-defender resource allocation games.
//!
//! An attacker and a defender split budgets `X_A` and `Y_D` over `N`
//! targets of descending value `w_1 > ... > w_N`. Target `i` is breached
//! with probability `p_i(x_i, y_i)`; the attacker earns `Σ w_i p_i - c Σ x_i`
//! and the defender loses `Σ w_i p_i + ĉ Σ y_i`.
//!
//! Three breaching models are covered:
//!
//! * [`product`]: `p = f(x) g̃(y)` with concave attack efficiency and convex
//!   defence inefficiency, solved by shadow-price bisection.
//! * [`linear`]: the matrix-form special case `p = x (1 - (1 - γ) y)`,
//!   solved in closed form including its families of equilibria.
//! * [`proportion`]: `p = f(x) / (f(x) + g(y))`.
//!
//! [`oracle`] holds solver-independent verification: best responses,
//! ε-Nash certification, brute-force search and best-response dynamics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corpus;
pub mod dual;
pub mod error;
pub mod kkt;
pub mod linear;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod product;
pub mod proportion;
pub mod regions;
pub mod solve;
pub mod sweep;

pub use error::{ModelError, SolveError};
pub use model::{
    eval_eff, eval_eff_prime, inv_eff_prime, rid_class, utilities, validate_spec, Allocation, BreachingModel,
    BudgetDomain, EfficiencyFunction, Equilibrium, GameSpec, Multiplicity, Player, RidClass, Violation,
};
