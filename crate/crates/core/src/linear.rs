//! Closed-form equilibria of the matrix-form intrusion detection game.
//!
//! Target `i` is breached with probability `x_i (1 - γ̄ y_i)`, `γ̄ = 1 - γ`.
//! The attacker's marginal on target `i` is `w_i (1 - γ̄ y_i) - c` and the
//! defender's is `w_i γ̄ x_i - ĉ`. Equilibria are read off the threshold
//! tables `P_A`, `P_D`; on the threshold lines they come in one-parameter
//! families.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolveError};
use crate::model::{ensure_valid, Allocation, BreachingModel, BudgetDomain, Equilibrium, GameSpec, Multiplicity};

/// Budgets within this distance of a threshold take the boundary branch.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Budget thresholds at which the equilibrium support changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    /// `P_A(0..=N)`
    pub p_attacker: Vec<f64>,
    /// `P_D(1..=N+1)`, stored from index 0.
    pub p_defender: Vec<f64>,
}

impl ThresholdTable {
    pub fn pa(&self, k: usize) -> f64 {
        self.p_attacker[k]
    }

    /// `P_D(k)` for `k` in `1..=N+1`.
    pub fn pd(&self, k: usize) -> f64 {
        self.p_defender[k - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinearKind {
    Interior,
    AttackerBoundary,
    DefenderBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearNEFamily {
    pub kind: LinearKind,
    /// Which of the five budget cases produced the family (1..=5).
    pub case: u8,
    pub k: usize,
    pub representative: Equilibrium,
    pub free_interval: Option<(f64, f64)>,
}

fn require_linear(spec: &GameSpec) -> Result<()> {
    if spec.model != BreachingModel::LinearMatrix {
        return Err(SolveError::WrongModel {
            expected: "LinearMatrix",
        });
    }
    Ok(())
}

/// Weight of target `k` (1-based), with `w_{N+1} = c`.
fn weight(spec: &GameSpec, k: usize) -> f64 {
    if k <= spec.n {
        spec.weights[k - 1]
    } else {
        spec.cost_attacker
    }
}

/// `Σ_{j<=k} 1/w_j`
fn inverse_weight_sum(spec: &GameSpec, k: usize) -> f64 {
    spec.weights[..k].iter().map(|w| 1.0 / w).sum()
}

pub fn thresholds(spec: &GameSpec) -> ThresholdTable {
    let gb = spec.gamma_bar();
    let n = spec.n;
    let mut p_attacker = vec![0.0; n + 1];
    for k in 1..=n {
        p_attacker[k] = p_attacker[k - 1] + spec.cost_defender / (spec.weights[k - 1] * gb);
    }
    let p_defender = (1..=n + 1)
        .map(|k| {
            let wk = weight(spec, k);
            spec.weights[..k - 1].iter().map(|wi| (1.0 - wk / wi) / gb).sum()
        })
        .collect();
    ThresholdTable { p_attacker, p_defender }
}

fn domain_of(lambda: f64, rho: f64) -> BudgetDomain {
    match (lambda > 0.0, rho > 0.0) {
        (false, false) => BudgetDomain::D1,
        (true, false) => BudgetDomain::D2,
        (false, true) => BudgetDomain::D3,
        (true, true) => BudgetDomain::D4,
    }
}

fn finish(
    spec: &GameSpec,
    alloc: Allocation,
    lambda: f64,
    rho: f64,
    multiplicity: Multiplicity,
) -> Result<Equilibrium> {
    let over_cap = alloc.x.iter().chain(&alloc.y).any(|&z| z > 1.0 + BOUNDARY_TOL);
    if over_cap {
        return Err(SolveError::UnhandledBudgetPoint {
            budget_attacker: spec.budget_attacker,
            budget_defender: spec.budget_defender,
        });
    }
    Ok(Equilibrium::assemble(
        spec,
        alloc,
        lambda,
        rho,
        domain_of(lambda, rho),
        multiplicity,
    )?)
}

/// Case 1: `k + 1` targets attacked, first `k` defended, defender slack.
fn case_one(spec: &GameSpec, t: &ThresholdTable, k: usize) -> Result<Equilibrium> {
    let gb = spec.gamma_bar();
    let (ch, w_next) = (spec.cost_defender, weight(spec, k + 1));
    let mut a = Allocation::zeros(spec.n);
    for i in 0..k {
        a.x[i] = ch / (spec.weights[i] * gb);
        a.y[i] = (1.0 - w_next / spec.weights[i]) / gb;
    }
    a.x[k] = spec.budget_attacker - t.pa(k);
    finish(spec, a, w_next - spec.cost_attacker, 0.0, Multiplicity::Unique)
}

/// Case 2: `k` targets attacked and defended, both budgets bind.
fn case_two(spec: &GameSpec, k: usize) -> Result<Equilibrium> {
    let gb = spec.gamma_bar();
    let s = inverse_weight_sum(spec, k);
    let (xa, yd) = (spec.budget_attacker, spec.budget_defender);
    let mut a = Allocation::zeros(spec.n);
    for i in 0..k {
        let wi = spec.weights[i];
        a.x[i] = xa / (wi * s);
        a.y[i] = (yd - k as f64 / gb) / (wi * s) + 1.0 / gb;
    }
    let lambda = (k as f64 - gb * yd) / s - spec.cost_attacker;
    let rho = gb * xa / s - spec.cost_defender;
    finish(spec, a, lambda, rho, Multiplicity::Unique)
}

/// Case 3: every target attacked and defended, both budgets slack.
fn case_three(spec: &GameSpec) -> Result<Equilibrium> {
    let gb = spec.gamma_bar();
    let a = Allocation {
        x: spec.weights.iter().map(|w| spec.cost_defender / (w * gb)).collect(),
        y: spec
            .weights
            .iter()
            .map(|w| (1.0 - spec.cost_attacker / w) / gb)
            .collect(),
    };
    finish(spec, a, 0.0, 0.0, Multiplicity::Unique)
}

/// Case 4 member: attacker exhausts `X_A = P_A(k)`; the defender spends
/// `ỹ ∈ [P_D(k), min(Y_D, P_D(k+1))]` keeping the attacker indifferent.
fn attacker_boundary_point(spec: &GameSpec, k: usize, y_tilde: f64, interval: (f64, f64)) -> Result<Equilibrium> {
    let gb = spec.gamma_bar();
    let s = inverse_weight_sum(spec, k);
    let mut a = Allocation::zeros(spec.n);
    for i in 0..k {
        let wi = spec.weights[i];
        a.x[i] = spec.cost_defender / (wi * gb);
        a.y[i] = (1.0 / gb + (y_tilde - k as f64 / gb) / (wi * s)).max(0.0);
    }
    let lambda = (k as f64 - gb * y_tilde) / s - spec.cost_attacker;
    finish(
        spec,
        a,
        lambda.max(0.0),
        0.0,
        Multiplicity::BoundaryFamily {
            free_interval: interval,
        },
    )
}

/// Case 5 member: defender exhausts `Y_D = P_D(k)` leaving targets `1..k`
/// equally attractive; the attacker puts `x̃` on the defended targets and
/// the rest on target `k`.
fn defender_boundary_point(spec: &GameSpec, k: usize, x_tilde: f64, interval: (f64, f64)) -> Result<Equilibrium> {
    let gb = spec.gamma_bar();
    let wk = weight(spec, k);
    let s = inverse_weight_sum(spec, k - 1);
    let mut a = Allocation::zeros(spec.n);
    for i in 0..k - 1 {
        let wi = spec.weights[i];
        a.x[i] = x_tilde / (wi * s);
        a.y[i] = (1.0 - wk / wi) / gb;
    }
    if k <= spec.n {
        a.x[k - 1] = (spec.budget_attacker - x_tilde).max(0.0);
    }
    let rho = gb * x_tilde / s - spec.cost_defender;
    finish(
        spec,
        a,
        wk - spec.cost_attacker,
        rho.max(0.0),
        Multiplicity::BoundaryFamily {
            free_interval: interval,
        },
    )
}

fn attacker_interval(spec: &GameSpec, t: &ThresholdTable, k: usize) -> (f64, f64) {
    (t.pd(k), spec.budget_defender.min(t.pd(k + 1)))
}

fn defender_interval(spec: &GameSpec, t: &ThresholdTable, k: usize) -> (f64, f64) {
    let xa = spec.budget_attacker;
    if k > spec.n {
        return (t.pa(k - 1), xa);
    }
    let ratio = inverse_weight_sum(spec, k - 1) / inverse_weight_sum(spec, k);
    (t.pa(k - 1).max(xa * ratio).min(xa), xa)
}

fn midpoint((lo, hi): (f64, f64)) -> f64 {
    0.5 * (lo + hi)
}

pub fn solve_linear(spec: &GameSpec) -> Result<LinearNEFamily> {
    require_linear(spec)?;
    ensure_valid(spec)?;
    let t = thresholds(spec);
    let n = spec.n;
    let (xa, yd) = (spec.budget_attacker, spec.budget_defender);
    let family = |kind, case, k, representative, free_interval| LinearNEFamily {
        kind,
        case,
        k,
        representative,
        free_interval,
    };

    if let Some(k) = (1..=n).find(|&k| (xa - t.pa(k)).abs() <= BOUNDARY_TOL && yd >= t.pd(k) - BOUNDARY_TOL) {
        let iv = attacker_interval(spec, &t, k);
        let eq = attacker_boundary_point(spec, k, midpoint(iv), iv)?;
        return Ok(family(LinearKind::AttackerBoundary, 4, k, eq, Some(iv)));
    }
    if let Some(k) = (2..=n + 1).find(|&k| (yd - t.pd(k)).abs() <= BOUNDARY_TOL && xa >= t.pa(k - 1) - BOUNDARY_TOL) {
        let iv = defender_interval(spec, &t, k);
        let eq = defender_boundary_point(spec, k, midpoint(iv), iv)?;
        return Ok(family(LinearKind::DefenderBoundary, 5, k, eq, Some(iv)));
    }
    // largest k with P_A(k) < X_A
    let k = (0..=n).rev().find(|&k| t.pa(k) < xa).unwrap_or(0);
    if k < n && yd > t.pd(k + 1) {
        return Ok(family(LinearKind::Interior, 1, k, case_one(spec, &t, k)?, None));
    }
    if k == n && yd > t.pd(n + 1) {
        return Ok(family(LinearKind::Interior, 3, n, case_three(spec)?, None));
    }
    if let Some(j) = (1..=k.min(n)).find(|&j| t.pd(j) < yd && yd < t.pd(j + 1)) {
        return Ok(family(LinearKind::Interior, 2, j, case_two(spec, j)?, None));
    }
    Err(SolveError::UnhandledBudgetPoint {
        budget_attacker: xa,
        budget_defender: yd,
    })
}

/// Equally spaced members of a boundary family; interior families yield
/// their single equilibrium.
pub fn enumerate_boundary_nes(spec: &GameSpec, family: &LinearNEFamily, samples: usize) -> Result<Vec<Equilibrium>> {
    require_linear(spec)?;
    let Some((lo, hi)) = family.free_interval else {
        return Ok(vec![family.representative.clone()]);
    };
    let params: Vec<f64> = match samples {
        0 => vec![],
        1 => vec![lo],
        s => (0..s).map(|j| lo + (hi - lo) * j as f64 / (s - 1) as f64).collect(),
    };
    params
        .into_iter()
        .map(|p| match family.kind {
            LinearKind::AttackerBoundary => attacker_boundary_point(spec, family.k, p, (lo, hi)),
            _ => defender_boundary_point(spec, family.k, p, (lo, hi)),
        })
        .collect()
}
