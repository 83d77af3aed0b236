//! Shadow-price search shared by the product and proportion solvers.
//!
//! A [`DemandModel`] maps shadow prices `(λ, ρ)` to the per-target
//! equilibrium of the decoupled target games. Total attacker demand falls
//! with λ and total defender demand falls with ρ; the searches below only
//! rely on that and on the composite attacker demand crossing the budget once.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Allocation, BudgetDomain};
use crate::numeric::{bisect, grow_bracket};

/// Sufficiency totals behind the budget-domain classification.
///
/// `x_suf`, `y_suf` are the totals at zero shadow prices; `y_hat_suf` is the
/// defender's total once the attacker's budget binds alone (present when
/// `X_A < x_suf`), and `x_hat_suf` is the symmetric quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetDomainReport {
    pub domain: BudgetDomain,
    pub x_suf: f64,
    pub y_suf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_hat_suf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_hat_suf: Option<f64>,
}

pub trait DemandModel {
    fn allocation(&self, lambda: f64, rho: f64) -> Result<Allocation>;

    fn totals(&self, lambda: f64, rho: f64) -> Result<(f64, f64)> {
        let a = self.allocation(lambda, rho)?;
        Ok((a.x.iter().sum(), a.y.iter().sum()))
    }

    /// Starting upper bracket for λ; exact when the attacker provably
    /// demands nothing beyond it.
    fn lambda_hint(&self) -> f64;

    /// Starting upper bracket for ρ at the given λ.
    fn rho_hint(&self, lambda: f64) -> f64;
}

/// Smallest λ ≥ 0 whose attacker demand fits `budget`, with ρ fixed.
pub fn lambda_for_attacker_budget<M: DemandModel>(m: &M, rho: f64, budget: f64) -> Result<f64> {
    let fits = |l: f64| -> Result<bool> { Ok(m.totals(l, rho)?.0 <= budget) };
    if fits(0.0)? {
        return Ok(0.0);
    }
    let hi = grow_bracket(m.lambda_hint(), "attacker price bracket", fits)?;
    Ok(bisect(0.0, hi, fits)?.1)
}

/// Smallest ρ ≥ 0 whose defender demand fits `budget`, with λ fixed.
pub fn rho_for_defender_budget<M: DemandModel>(m: &M, lambda: f64, budget: f64) -> Result<f64> {
    let fits = |r: f64| -> Result<bool> { Ok(m.totals(lambda, r)?.1 <= budget) };
    if fits(0.0)? {
        return Ok(0.0);
    }
    let hi = grow_bracket(m.rho_hint(lambda), "defender price bracket", fits)?;
    Ok(bisect(0.0, hi, fits)?.1)
}

/// Shadow prices at which both budgets hold with complementary slackness.
///
/// The defender price is solved as a function of λ, and λ is then bisected
/// on the attacker's budget along that curve.
pub fn joint_prices<M: DemandModel>(m: &M, budget_attacker: f64, budget_defender: f64) -> Result<(f64, f64)> {
    let fits = |l: f64| -> Result<bool> {
        let r = rho_for_defender_budget(m, l, budget_defender)?;
        Ok(m.totals(l, r)?.0 <= budget_attacker)
    };
    if fits(0.0)? {
        return Ok((0.0, rho_for_defender_budget(m, 0.0, budget_defender)?));
    }
    let hi = grow_bracket(m.lambda_hint(), "joint price bracket", fits)?;
    let lambda = bisect(0.0, hi, fits)?.1;
    Ok((lambda, rho_for_defender_budget(m, lambda, budget_defender)?))
}

/// Budget domain of `(X_A, Y_D)`; points on a sufficiency boundary count
/// as sufficient.
pub fn classify_domain<M: DemandModel>(m: &M, xa: f64, yd: f64) -> Result<BudgetDomainReport> {
    let (x_suf, y_suf) = m.totals(0.0, 0.0)?;
    let y_hat_suf = if xa < x_suf {
        let l = lambda_for_attacker_budget(m, 0.0, xa)?;
        Some(m.totals(l, 0.0)?.1)
    } else {
        None
    };
    let x_hat_suf = if yd < y_suf {
        let r = rho_for_defender_budget(m, 0.0, yd)?;
        Some(m.totals(0.0, r)?.0)
    } else {
        None
    };
    let domain = if xa >= x_suf && yd >= y_suf {
        BudgetDomain::D1
    } else if y_hat_suf.is_some_and(|y| yd >= y) {
        BudgetDomain::D2
    } else if x_hat_suf.is_some_and(|x| xa >= x) {
        BudgetDomain::D3
    } else {
        BudgetDomain::D4
    };
    Ok(BudgetDomainReport {
        domain,
        x_suf,
        y_suf,
        x_hat_suf,
        y_hat_suf,
    })
}

/// Shadow prices for a classified domain.
pub fn prices_in_domain<M: DemandModel>(m: &M, domain: BudgetDomain, xa: f64, yd: f64) -> Result<(f64, f64)> {
    match domain {
        BudgetDomain::D1 => Ok((0.0, 0.0)),
        BudgetDomain::D2 => Ok((lambda_for_attacker_budget(m, 0.0, xa)?, 0.0)),
        BudgetDomain::D3 => Ok((0.0, rho_for_defender_budget(m, 0.0, yd)?)),
        BudgetDomain::D4 => joint_prices(m, xa, yd),
    }
}
