//! First-order optimality residuals shared by every model.

use crate::model::{Equilibrium, GameSpec, Player};

/// Residual of one player's first-order conditions on one target: equality
/// on interior allocations, one-sided at zero and at the per-target cap.
fn branch_residual(marginal: f64, dual: f64, z: f64, cap: f64) -> f64 {
    let gap = marginal - dual;
    if z <= 0.0 {
        gap.max(0.0)
    } else if z >= cap {
        (-gap).max(0.0)
    } else {
        gap.abs()
    }
}

/// Largest violation of stationarity, complementary slackness, feasibility
/// and dual sign over all targets.
pub fn kkt_residual(spec: &GameSpec, eq: &Equilibrium) -> f64 {
    let (x, y) = (&eq.alloc.x, &eq.alloc.y);
    let (lambda, rho) = (eq.lambda, eq.rho);
    let cap_a = spec.target_cap(Player::Attacker);
    let cap_d = spec.target_cap(Player::Defender);
    let mut worst = 0.0f64;
    for i in 0..spec.n {
        match spec.marginals(i, x[i], y[i]) {
            Ok((ma, md)) if ma.is_nan() || md.is_nan() => return f64::INFINITY,
            Ok((ma, md)) => {
                worst = worst.max(branch_residual(ma, lambda, x[i], cap_a));
                worst = worst.max(branch_residual(md, rho, y[i], cap_d));
            }
            Err(_) => return f64::INFINITY,
        }
        worst = worst.max(-x[i]).max(-y[i]);
    }
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let r = worst
        .max((lambda * (spec.budget_attacker - sx)).abs())
        .max((rho * (spec.budget_defender - sy)).abs())
        .max(sx - spec.budget_attacker)
        .max(sy - spec.budget_defender)
        .max(-lambda)
        .max(-rho);
    // normalizes -0 from the dual-sign terms
    r + 0.0
}
