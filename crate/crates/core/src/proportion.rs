//! Equilibrium of the proportion-form game `p_i = f(x_i) / (f(x_i) + g(y_i))`.
//!
//! Both players are active on every target, so the shadow prices alone
//! determine the equilibrium: per target, at prices `t = c + λ` and
//! `s = ĉ + ρ`,
//!
//! ```text
//! w f'(x) g(y) / (f + g)^2 = t,    w f(x) g'(y) / (f + g)^2 = s.
//! ```

use serde::{Deserialize, Serialize};

use crate::dual::{classify_domain, prices_in_domain, BudgetDomainReport, DemandModel};
use crate::error::{ModelError, Result, SolveError};
use crate::kkt::kkt_residual;
use crate::model::{
    ensure_valid, Allocation, BreachingModel, BudgetDomain, EfficiencyFunction, Equilibrium, GameSpec, Multiplicity,
};
use crate::numeric::{bisect, grow_bracket};
use crate::product::{DualPair, KKT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProportionOptions {
    /// Use the power-family closed forms where they apply.
    pub closed_forms: bool,
}

impl Default for ProportionOptions {
    fn default() -> Self {
        ProportionOptions { closed_forms: true }
    }
}

/// An increasing efficiency, either a family used directly or the
/// complement `1 - g̃` of a decreasing one.
#[derive(Debug, Clone, Copy)]
enum Gain {
    Direct(EfficiencyFunction),
    Complement(EfficiencyFunction),
}

impl Gain {
    fn attack(spec: &GameSpec) -> Self {
        Gain::Direct(spec.attack_eff)
    }

    fn defence(spec: &GameSpec) -> Self {
        if spec.defence_eff.is_decreasing() {
            Gain::Complement(spec.defence_eff)
        } else {
            Gain::Direct(spec.defence_eff)
        }
    }

    fn upper(&self) -> f64 {
        match self {
            Gain::Direct(e) | Gain::Complement(e) => e.domain_upper().unwrap_or(f64::INFINITY),
        }
    }

    /// `(value, first, second)` derivatives.
    fn eval(&self, z: f64) -> std::result::Result<(f64, f64, f64), ModelError> {
        match self {
            Gain::Direct(e) => Ok((e.value(z)?, e.derivative(z)?, e.second_derivative(z)?)),
            Gain::Complement(e) => Ok((1.0 - e.value(z)?, -e.derivative(z)?, -e.second_derivative(z)?)),
        }
    }

    /// `z` with `value'(z) / value(z) = v`, for `v > 0`.
    fn inverse_log_derivative(&self, v: f64) -> Result<f64> {
        Ok(match *self {
            Gain::Direct(EfficiencyFunction::Power { a }) => a / v,
            Gain::Direct(EfficiencyFunction::ExpAttack { a: None }) => (1.0 / v).ln_1p(),
            Gain::Complement(EfficiencyFunction::InvG { theta }) => 2.0 / (v * ((1.0 + 4.0 * theta / v).sqrt() + 1.0)),
            Gain::Complement(EfficiencyFunction::ExpG { theta }) => (theta / v).ln_1p() / theta,
            Gain::Complement(EfficiencyFunction::QuadG { theta }) => {
                2.0 / ((v + theta) + (v * v + theta * theta).sqrt())
            }
            _ => self.numeric_inverse_log_derivative(v)?,
        })
    }

    fn numeric_inverse_log_derivative(&self, v: f64) -> Result<f64> {
        let upper = self.upper();
        let below = |z: f64| -> Result<bool> {
            if z >= upper {
                return Ok(true);
            }
            let (g, g1, _) = self.eval(z)?;
            Ok(g1 <= v * g)
        };
        let hi = grow_bracket(1.0f64.min(0.5 * upper), "inverse log-derivative bracket", below)?;
        Ok(bisect(0.0, hi.min(upper), below)?.1.min(upper * (1.0 - 1e-15)))
    }
}

fn require_proportion(spec: &GameSpec) -> Result<()> {
    if spec.model != BreachingModel::ProportionForm {
        return Err(SolveError::WrongModel {
            expected: "ProportionForm",
        });
    }
    Ok(())
}

/// Shared power exponent when both efficiencies are `z^a` with the same `a`.
fn matched_power(spec: &GameSpec) -> Option<f64> {
    match (spec.attack_eff, spec.defence_eff) {
        (EfficiencyFunction::Power { a }, EfficiencyFunction::Power { a: b }) if a == b => Some(a),
        _ => None,
    }
}

/// Log-residuals of both first-order conditions and their Jacobian with
/// respect to `(ln x, ln y)`.
fn log_system(fa: &Gain, gd: &Gain, w: f64, t: f64, s: f64, x: f64, y: f64) -> Option<([f64; 2], [[f64; 2]; 2])> {
    let (f, f1, f2) = fa.eval(x).ok()?;
    let (g, g1, g2) = gd.eval(y).ok()?;
    if !(f > 0.0 && g > 0.0 && f1 > 0.0 && g1 > 0.0) {
        return None;
    }
    let sum = f + g;
    let r = [
        w.ln() + f1.ln() + g.ln() - 2.0 * sum.ln() - t.ln(),
        w.ln() + f.ln() + g1.ln() - 2.0 * sum.ln() - s.ln(),
    ];
    let jac = [
        [x * (f2 / f1 - 2.0 * f1 / sum), y * (g1 / g - 2.0 * g1 / sum)],
        [x * (f1 / f - 2.0 * f1 / sum), y * (g2 / g1 - 2.0 * g1 / sum)],
    ];
    Some((r, jac))
}

fn norm(r: &[f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Damped Newton on the log-residuals, started from the `a = 1` power
/// solution at the same prices.
fn newton_target(fa: &Gain, gd: &Gain, w: f64, t: f64, s: f64) -> Option<(f64, f64)> {
    let ratio = t / s;
    let mut x = w * ratio / ((1.0 + ratio).powi(2) * t);
    let mut y = (ratio * x).min(0.5 * gd.upper());
    x = x.min(0.5 * fa.upper());
    let (mut r, mut jac) = log_system(fa, gd, w, t, s, x, y)?;
    for _ in 0..100 {
        if norm(&r) <= 1e-14 {
            return Some((x, y));
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let du = (r[0] * jac[1][1] - r[1] * jac[0][1]) / det;
        let dv = (r[1] * jac[0][0] - r[0] * jac[1][0]) / det;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (nx, ny) = (x * (-alpha * du).exp(), y * (-alpha * dv).exp());
            if let Some((nr, nj)) = log_system(fa, gd, w, t, s, nx, ny) {
                if norm(&nr) < norm(&r) {
                    (x, y, r, jac) = (nx, ny, nr, nj);
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return (norm(&r) <= 1e-12).then_some((x, y));
        }
    }
    (norm(&r) <= 1e-12).then_some((x, y))
}

/// Bisection on the breaching probability `p`: both first-order conditions
/// fix `f'/f` and `g'/g` as functions of `p`.
fn bisect_target(fa: &Gain, gd: &Gain, w: f64, t: f64, s: f64) -> Result<(f64, f64)> {
    let at = |p: f64| -> Result<(f64, f64)> {
        let q = w * p * (1.0 - p);
        Ok((fa.inverse_log_derivative(t / q)?, gd.inverse_log_derivative(s / q)?))
    };
    let excess = |p: f64| -> Result<bool> {
        let (x, y) = at(p)?;
        let f = fa.eval(x)?.0;
        let g = gd.eval(y)?.0;
        Ok(f / (f + g) <= p)
    };
    let (lo, hi) = bisect(0.0, 1.0, excess)?;
    at(0.5 * (lo + hi))
}

fn solve_target(spec: &GameSpec, i: usize, duals: DualPair, opts: ProportionOptions) -> Result<(f64, f64)> {
    let w = spec.weights[i];
    let t = spec.cost_attacker + duals.lambda;
    let s = spec.cost_defender + duals.rho;
    if opts.closed_forms {
        if let Some(a) = matched_power(spec) {
            let ra = (t / s).powf(a);
            let x = w * a * ra / ((1.0 + ra).powi(2) * t);
            return Ok((x, x * t / s));
        }
    }
    let (fa, gd) = (Gain::attack(spec), Gain::defence(spec));
    match newton_target(&fa, &gd, w, t, s) {
        Some(p) => Ok(p),
        None => bisect_target(&fa, &gd, w, t, s),
    }
}

/// Interior solution of both first-order conditions on target `i`.
pub fn per_target_solve_proportion(i: usize, duals: DualPair, spec: &GameSpec) -> Result<(f64, f64)> {
    require_proportion(spec)?;
    solve_target(spec, i, duals, ProportionOptions::default())
}

/// As [`per_target_solve_proportion`] but always through the numeric path.
pub fn per_target_solve_general(i: usize, duals: DualPair, spec: &GameSpec) -> Result<(f64, f64)> {
    require_proportion(spec)?;
    solve_target(spec, i, duals, ProportionOptions { closed_forms: false })
}

pub struct ProportionDemand<'a> {
    pub spec: &'a GameSpec,
    pub opts: ProportionOptions,
}

impl DemandModel for ProportionDemand<'_> {
    fn allocation(&self, lambda: f64, rho: f64) -> Result<Allocation> {
        let mut a = Allocation::zeros(self.spec.n);
        for i in 0..self.spec.n {
            let (x, y) = solve_target(self.spec, i, DualPair::new(lambda, rho), self.opts)?;
            a.x[i] = x;
            a.y[i] = y;
        }
        Ok(a)
    }

    fn lambda_hint(&self) -> f64 {
        self.spec.cost_attacker.max(1e-3)
    }

    fn rho_hint(&self, _lambda: f64) -> f64 {
        self.spec.cost_defender.max(1e-3)
    }
}

pub fn classify_budget_domain_proportion(spec: &GameSpec) -> Result<BudgetDomainReport> {
    require_proportion(spec)?;
    let m = ProportionDemand {
        spec,
        opts: ProportionOptions::default(),
    };
    classify_domain(&m, spec.budget_attacker, spec.budget_defender)
}

pub fn solve_proportion(spec: &GameSpec) -> Result<Equilibrium> {
    solve_proportion_with(spec, ProportionOptions::default())
}

pub fn solve_proportion_with(spec: &GameSpec, opts: ProportionOptions) -> Result<Equilibrium> {
    require_proportion(spec)?;
    ensure_valid(spec)?;
    let (xa, yd) = (spec.budget_attacker, spec.budget_defender);
    let m = ProportionDemand { spec, opts };
    let domain = classify_domain(&m, xa, yd)?.domain;
    let eq = match (domain, matched_power(spec)) {
        (BudgetDomain::D4, Some(a)) if opts.closed_forms => power_d4(spec, a)?,
        _ => {
            let (lambda, rho) = prices_in_domain(&m, domain, xa, yd)?;
            let alloc = m.allocation(lambda, rho)?;
            Equilibrium::assemble(spec, alloc, lambda, rho, domain, Multiplicity::Unique)?
        }
    };
    if kkt_residual(spec, &eq) > KKT_TOL {
        return Err(SolveError::Convergence {
            what: "proportion-form first-order system",
            iterations: crate::numeric::MAX_BISECTIONS,
        });
    }
    Ok(eq)
}

/// Both budgets bind and allocations are proportional to the weights.
fn power_d4(spec: &GameSpec, a: f64) -> Result<Equilibrium> {
    let (xa, yd) = (spec.budget_attacker, spec.budget_defender);
    let total: f64 = spec.weights.iter().sum();
    let alloc = Allocation {
        x: spec.weights.iter().map(|w| w * xa / total).collect(),
        y: spec.weights.iter().map(|w| w * yd / total).collect(),
    };
    let r = yd / xa;
    let ra = r.powf(a);
    let t = total * a * ra / ((1.0 + ra).powi(2) * xa);
    Ok(Equilibrium::assemble(
        spec,
        alloc,
        t - spec.cost_attacker,
        t / r - spec.cost_defender,
        BudgetDomain::D4,
        Multiplicity::Unique,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub budget_attacker: f64,
    pub domain: BudgetDomain,
    pub lambda: f64,
    pub utility_attacker: f64,
    pub utility_defender: f64,
    /// `dU_A/dλ` in closed form, for `f(x) = x`, `g(y) = y` with ρ = 0.
    pub du_attacker_dlambda: Option<f64>,
}

/// Solves the game along a sweep of attacker budgets.
pub fn proportion_utility_sensitivity(spec: &GameSpec, budgets: &[f64]) -> Result<Vec<SensitivityRow>> {
    require_proportion(spec)?;
    let linear = matched_power(spec) == Some(1.0);
    budgets
        .iter()
        .map(|&xa| {
            let eq = solve_proportion(&spec.with_budgets(xa, spec.budget_defender))?;
            let (c, ch, l) = (spec.cost_attacker, spec.cost_defender, eq.lambda);
            let total: f64 = spec.weights.iter().sum();
            let du = (linear && eq.rho == 0.0).then(|| total * ch * (c - l - ch) / (c + l + ch).powi(3));
            Ok(SensitivityRow {
                budget_attacker: xa,
                domain: eq.budget_domain,
                lambda: l,
                utility_attacker: eq.utility_attacker,
                utility_defender: eq.utility_defender,
                du_attacker_dlambda: du,
            })
        })
        .collect()
}
