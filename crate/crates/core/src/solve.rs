//! Model dispatch.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linear::{enumerate_boundary_nes, solve_linear, LinearKind};
use crate::model::{BreachingModel, BudgetDomain, Equilibrium, GameSpec};
use crate::product::solve_product;
use crate::proportion::solve_proportion;

/// Closed-form case behind a linear-model equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCase {
    pub case: u8,
    pub kind: LinearKind,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub model: BreachingModel,
    pub domain: BudgetDomain,
    pub equilibrium: Equilibrium,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_case: Option<LinearCase>,
    /// Sampled members of a boundary family, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub family_members: Vec<Equilibrium>,
}

/// Equilibrium for any model; linear boundary families are represented by
/// the midpoint of their free interval.
pub fn solve(spec: &GameSpec) -> Result<Equilibrium> {
    Ok(solve_detailed(spec, 0)?.equilibrium)
}

/// Equilibrium plus model-specific detail, with `samples` members of a
/// boundary family enumerated when there is one.
pub fn solve_detailed(spec: &GameSpec, samples: usize) -> Result<Solution> {
    let (equilibrium, linear_case, family_members) = match spec.model {
        BreachingModel::ProductForm => (solve_product(spec)?, None, Vec::new()),
        BreachingModel::ProportionForm => (solve_proportion(spec)?, None, Vec::new()),
        BreachingModel::LinearMatrix => {
            let family = solve_linear(spec)?;
            let members = if family.free_interval.is_some() && samples > 0 {
                enumerate_boundary_nes(spec, &family, samples)?
            } else {
                Vec::new()
            };
            let case = LinearCase {
                case: family.case,
                kind: family.kind,
                k: family.k,
                free_interval: family.free_interval,
            };
            (family.representative, Some(case), members)
        }
    };
    Ok(Solution {
        model: spec.model,
        domain: equilibrium.budget_domain,
        equilibrium,
        linear_case,
        family_members,
    })
}
