//! Equilibrium of the product-form game `p_i = f(x_i) g̃(y_i)`.

use serde::{Deserialize, Serialize};

pub use crate::dual::BudgetDomainReport;
use crate::dual::{classify_domain, prices_in_domain, rho_for_defender_budget, DemandModel};
use crate::error::{Result, SolveError};
use crate::kkt::kkt_residual;
use crate::model::{ensure_valid, Allocation, BreachingModel, Equilibrium, GameSpec, Multiplicity};
use crate::numeric::increasing_root;

/// Equilibrium assertions are made at this tolerance.
pub const KKT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DualPair {
    pub lambda: f64,
    pub rho: f64,
}

impl DualPair {
    pub fn new(lambda: f64, rho: f64) -> Self {
        DualPair { lambda, rho }
    }
}

fn require_product(spec: &GameSpec) -> Result<()> {
    if spec.model != BreachingModel::ProductForm {
        return Err(SolveError::WrongModel {
            expected: "ProductForm",
        });
    }
    Ok(())
}

/// Attacker allocation on an undefended target.
fn undefended_attack(spec: &GameSpec, i: usize, lambda: f64) -> Result<f64> {
    let w = spec.weights[i];
    let gt0 = spec.defence_eff.value(0.0)?;
    Ok(spec
        .attack_eff
        .inverse_derivative((spec.cost_attacker + lambda) / (w * gt0))?)
}

/// Defender allocation answering attack level `x` on target `i`.
fn defence_answer(spec: &GameSpec, i: usize, rho: f64, x: f64) -> Result<f64> {
    let f = spec.attack_eff.value(x)?;
    if f <= 0.0 {
        return Ok(0.0);
    }
    let v = -(spec.cost_defender + rho) / (spec.weights[i] * f);
    Ok(spec.defence_eff.inverse_derivative(v)?)
}

/// Joint solution of both first-order conditions on one target at fixed
/// shadow prices. Undefended targets keep `y = 0`.
pub fn per_target_point(spec: &GameSpec, i: usize, duals: DualPair, defended: bool) -> Result<(f64, f64)> {
    require_product(spec)?;
    let x_cap = undefended_attack(spec, i, duals.lambda)?;
    if !defended || x_cap == 0.0 {
        return Ok((x_cap, 0.0));
    }
    let w = spec.weights[i];
    let price = spec.cost_attacker + duals.lambda;
    // x minus the attacker's answer to the defence that answers x; increasing in x
    let gap = |x: f64| -> Result<f64> {
        let y = defence_answer(spec, i, duals.rho, x)?;
        let gt = spec.defence_eff.value(y)?;
        Ok(x - spec.attack_eff.inverse_derivative(price / (w * gt))?)
    };
    let x = increasing_root(0.0, x_cap, gap)?;
    Ok((x, defence_answer(spec, i, duals.rho, x)?))
}

/// Per-target demand with attack restricted to the first `k_a` targets and
/// defence to the first `k_d`.
pub struct ProductDemand<'a> {
    pub spec: &'a GameSpec,
    pub k_a: usize,
    pub k_d: usize,
}

impl<'a> ProductDemand<'a> {
    pub fn full(spec: &'a GameSpec) -> Self {
        ProductDemand {
            spec,
            k_a: spec.n,
            k_d: spec.n,
        }
    }
}

impl DemandModel for ProductDemand<'_> {
    fn allocation(&self, lambda: f64, rho: f64) -> Result<Allocation> {
        let mut a = Allocation::zeros(self.spec.n);
        for i in 0..self.k_a {
            let (x, y) = per_target_point(self.spec, i, DualPair::new(lambda, rho), i < self.k_d)?;
            a.x[i] = x;
            a.y[i] = y;
        }
        Ok(a)
    }

    fn lambda_hint(&self) -> f64 {
        let s = self.spec;
        let top = s.weights[0] * s.attack_eff.derivative(0.0).unwrap_or(1.0) * s.defence_eff.value(0.0).unwrap_or(1.0);
        (top - s.cost_attacker).max(1e-12)
    }

    fn rho_hint(&self, lambda: f64) -> f64 {
        let s = self.spec;
        let slope0 = -s.defence_eff.derivative(0.0).unwrap_or(-1.0);
        let mut top: f64 = 0.0;
        for i in 0..self.k_a.min(self.k_d) {
            let x = undefended_attack(s, i, lambda).unwrap_or(0.0);
            let f = s.attack_eff.value(x).unwrap_or(1.0);
            top = top.max(s.weights[i] * f * slope0);
        }
        (top - s.cost_defender).max(1e-12)
    }
}

/// `(Σ x_i, Σ y_i)` over the prefix supports `k_a`, `k_d` at fixed duals.
pub fn total_demand(spec: &GameSpec, duals: DualPair, k_a: usize, k_d: usize) -> Result<(f64, f64)> {
    require_product(spec)?;
    ProductDemand { spec, k_a, k_d }.totals(duals.lambda, duals.rho)
}

pub fn classify_budget_domain(spec: &GameSpec) -> Result<BudgetDomainReport> {
    require_product(spec)?;
    classify_domain(&ProductDemand::full(spec), spec.budget_attacker, spec.budget_defender)
}

pub fn solve_product(spec: &GameSpec) -> Result<Equilibrium> {
    require_product(spec)?;
    ensure_valid(spec)?;
    let domain = classify_budget_domain(spec)?.domain;
    for k_a in (0..=spec.n).rev() {
        for k_d in (0..=k_a).rev() {
            let m = ProductDemand { spec, k_a, k_d };
            let Ok((lambda, rho)) = prices_in_domain(&m, domain, spec.budget_attacker, spec.budget_defender) else {
                continue;
            };
            let alloc = m.allocation(lambda, rho)?;
            let eq = Equilibrium::assemble(spec, alloc, lambda, rho, domain, Multiplicity::Unique)?;
            if kkt_residual(spec, &eq) <= KKT_TOL {
                return Ok(eq);
            }
        }
    }
    Err(SolveError::NoEquilibriumFound)
}

/// Defender price `ρ1(λ)` at which the attacker's budget binds, when the
/// attacker's demand can reach the budget at that λ.
pub fn rho_attacker_binding(spec: &GameSpec, lambda: f64) -> Result<Option<f64>> {
    require_product(spec)?;
    let m = ProductDemand::full(spec);
    let xa = spec.budget_attacker;
    let below = |r: f64| -> Result<bool> { Ok(m.totals(lambda, r)?.0 < xa) };
    if !below(0.0)? {
        return Ok(None);
    }
    // beyond this ρ nobody is defended, so the attacker's demand stops growing
    let r_top = crate::numeric::grow_bracket(m.rho_hint(lambda), "defender price bracket", |r| {
        Ok(m.totals(lambda, r)?.1 == 0.0)
    })?;
    if below(r_top)? {
        return Ok(None);
    }
    let (lo, _) = crate::numeric::bisect(0.0, r_top, |r| Ok(!below(r)?))?;
    Ok(Some(lo))
}

/// Defender price `ρ2(λ)` at which the defender's budget binds.
pub fn rho_defender_binding(spec: &GameSpec, lambda: f64) -> Result<Option<f64>> {
    require_product(spec)?;
    let m = ProductDemand::full(spec);
    if m.totals(lambda, 0.0)?.1 <= spec.budget_defender {
        return Ok(None);
    }
    Ok(Some(rho_for_defender_budget(&m, lambda, spec.budget_defender)?))
}

pub use crate::kkt::kkt_residual as product_kkt_residual;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BudgetDomain, EfficiencyFunction};

    fn single(c: f64, budgets: (f64, f64)) -> GameSpec {
        GameSpec::product(
            vec![1.0],
            (c, 0.2),
            budgets,
            EfficiencyFunction::exp_attack(),
            EfficiencyFunction::ExpG { theta: 1.0 },
        )
    }

    /// Grid argmax over `[0, 4)` at step 1e-4.
    fn grid_argmax(u: impl Fn(f64) -> f64) -> f64 {
        (0..40_000)
            .map(|k| k as f64 * 1e-4)
            .fold(0.0, |b, t| if u(t) > u(b) { t } else { b })
    }

    #[test]
    fn defended_point_matches_grid_oracle() {
        let spec = single(0.3, (10.0, 10.0));
        let (x, y) = per_target_point(&spec, 0, DualPair::default(), true).unwrap();
        // each coordinate is a grid best response to the other
        let gx = grid_argmax(|t| (1.0 - (-t).exp()) * (-y).exp() - 0.3 * t);
        let gy = grid_argmax(|t| -(1.0 - (-x).exp()) * (-t).exp() - 0.2 * t);
        assert!((x - gx).abs() < 2e-4 && (y - gy).abs() < 2e-4, "{x} {y} vs {gx} {gy}");
        assert!((x - (5.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((y - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn priced_out_attacker() {
        let spec = single(1.2, (10.0, 10.0));
        assert_eq!(
            per_target_point(&spec, 0, DualPair::default(), true).unwrap(),
            (0.0, 0.0)
        );
        let eq = solve_product(&spec).unwrap();
        assert_eq!((eq.k_attacker, eq.k_defender), (0, 0));
        assert_eq!(kkt_residual(&spec, &eq), 0.0);
    }

    #[test]
    fn undefended_point() {
        let spec = single(0.3, (10.0, 10.0));
        let (x, y) = per_target_point(&spec, 0, DualPair::default(), false).unwrap();
        // argmax of 1 - e^-x - 0.3x on a fine grid
        let grid = (0..300_000).map(|k| k as f64 * 1e-5);
        let best = grid.fold(0.0, |b: f64, t| {
            if -(-t).exp() - 0.3 * t > -(-b).exp() - 0.3 * b {
                t
            } else {
                b
            }
        });
        assert!((x - best).abs() < 2e-5);
        assert!((x + 0.3f64.ln()).abs() < 1e-12);
        assert_eq!(y, 0.0);
    }

    #[test]
    fn totals_scale_with_copies() {
        let spec = single(0.3, (10.0, 10.0));
        assert_eq!(total_demand(&spec, DualPair::default(), 0, 0).unwrap(), (0.0, 0.0));
        let (x1, y1) = total_demand(&spec, DualPair::default(), 1, 1).unwrap();
        let mut twin = spec.clone();
        twin.weights = vec![1.0, 1.0 - 1e-3];
        twin.n = 2;
        let (x2, y2) = total_demand(&twin, DualPair::default(), 2, 2).unwrap();
        assert!((x2 - 2.0 * x1).abs() < 5e-3 && (y2 - 2.0 * y1).abs() < 5e-3);
    }

    #[test]
    fn budget_domains_of_single_target() {
        let big = classify_budget_domain(&single(0.3, (10.0, 10.0))).unwrap();
        assert_eq!(big.domain, BudgetDomain::D1);
        let d2 = classify_budget_domain(&single(0.3, (0.3, 1.0))).unwrap();
        assert_eq!(d2.domain, BudgetDomain::D2);
        assert!(d2.y_hat_suf.unwrap() < 2f64.ln());
        let d4 = classify_budget_domain(&single(0.3, (0.4, 0.1))).unwrap();
        assert_eq!(d4.domain, BudgetDomain::D4);
        assert!(0.4 < d4.x_hat_suf.unwrap() && 0.1 < d4.y_hat_suf.unwrap());
    }

    #[test]
    fn solve_single_target_d1() {
        let spec = single(0.3, (10.0, 10.0));
        let eq = solve_product(&spec).unwrap();
        assert_eq!(eq.budget_domain, BudgetDomain::D1);
        assert_eq!((eq.lambda, eq.rho), (0.0, 0.0));
        assert!((eq.alloc.x[0] - (5.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!(kkt_residual(&spec, &eq) <= 1e-9);
    }

    #[test]
    fn perturbation_raises_residual() {
        let spec = single(0.3, (10.0, 10.0));
        let mut eq = solve_product(&spec).unwrap();
        eq.alloc.x[0] += 0.1;
        // w e^{-x} e^{-y} - c changes by about 0.3 (1 - e^{-0.1})
        assert!(kkt_residual(&spec, &eq) >= 0.01);
    }

    #[test]
    fn constant_rid_spreads_attack_evenly() {
        let spec = GameSpec::product(
            vec![1.0, 0.8],
            (0.3, 0.2),
            (10.0, 10.0),
            EfficiencyFunction::exp_attack(),
            EfficiencyFunction::ExpG { theta: 1.0 },
        );
        let eq = solve_product(&spec).unwrap();
        assert_eq!(eq.k_defender, 2);
        assert!((eq.alloc.x[0] - eq.alloc.x[1]).abs() < 1e-9);
        assert!(eq.alloc.y[0] > eq.alloc.y[1]);
    }

    #[test]
    fn small_symmetric_budgets_leave_defender_idle() {
        // at x = 0.1 the defender's marginal (1 - e^{-0.1}) - ĉ is negative
        let spec = single(0.3, (0.1, 0.1));
        let report = classify_budget_domain(&spec).unwrap();
        assert_eq!(report.domain, BudgetDomain::D2);
        assert_eq!(report.y_hat_suf, Some(0.0));
        let eq = solve_product(&spec).unwrap();
        assert!((eq.alloc.x[0] - 0.1).abs() < 1e-12);
        assert_eq!(eq.alloc.y[0], 0.0);
        assert!((eq.lambda - ((-0.1f64).exp() - 0.3)).abs() < 1e-9);
    }

    #[test]
    fn d4_binds_both_budgets() {
        let spec = single(0.3, (0.4, 0.1));
        let eq = solve_product(&spec).unwrap();
        assert_eq!(eq.budget_domain, BudgetDomain::D4);
        assert!((eq.alloc.x[0] - 0.4).abs() < 1e-12);
        assert!((eq.alloc.y[0] - 0.1).abs() < 1e-12);
        // e^{-x} e^{-y} - c = λ ; (1 - e^{-x}) e^{-y} - ĉ = ρ
        assert!((eq.lambda - ((-0.5f64).exp() - 0.3)).abs() < 1e-9);
        assert!((eq.rho - ((1.0 - (-0.4f64).exp()) * (-0.1f64).exp() - 0.2)).abs() < 1e-9);
    }
}
