//! Seeded random game instances for regression and property suites.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SolveError;
use crate::linear::solve_linear;
use crate::model::{BreachingModel, BudgetDomain, EfficiencyFunction, GameSpec};
use crate::product::classify_budget_domain;
use crate::proportion::classify_budget_domain_proportion;

const DOMAINS: [BudgetDomain; 4] = [BudgetDomain::D1, BudgetDomain::D2, BudgetDomain::D3, BudgetDomain::D4];

fn weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w = vec![rng.random_range(1.0..3.0)];
    for _ in 1..n {
        let last = w[w.len() - 1];
        w.push(last * rng.random_range(0.5..0.95));
    }
    w
}

fn convex_defence<R: Rng>(rng: &mut R) -> EfficiencyFunction {
    let theta = rng.random_range(0.5..2.0);
    match rng.random_range(0..3) {
        0 => EfficiencyFunction::InvG { theta },
        1 => EfficiencyFunction::ExpG { theta },
        _ => EfficiencyFunction::QuadG { theta },
    }
}

fn increasing<R: Rng>(rng: &mut R) -> EfficiencyFunction {
    if rng.random_bool(0.5) {
        EfficiencyFunction::Power {
            a: rng.random_range(0.4..1.0),
        }
    } else {
        EfficiencyFunction::ExpAttack {
            a: Some(rng.random_range(0.5..2.0)),
        }
    }
}

fn budget_factor<R: Rng>(rng: &mut R, sufficient: bool) -> f64 {
    if sufficient {
        rng.random_range(1.2..3.0)
    } else {
        rng.random_range(0.2..0.7)
    }
}

/// Budgets around the sufficiency totals so that the corpus visits every
/// budget domain; `target` selects which player runs short.
fn scale_budgets<R: Rng>(rng: &mut R, spec: GameSpec, target: BudgetDomain) -> GameSpec {
    let open = spec.with_budgets(1e6, 1e6);
    let report = match spec.model {
        BreachingModel::ProductForm => classify_budget_domain(&open),
        _ => classify_budget_domain_proportion(&open),
    }
    .expect("sufficiency totals of a valid instance");
    let (a_ok, d_ok) = match target {
        BudgetDomain::D1 => (true, true),
        BudgetDomain::D2 => (false, true),
        BudgetDomain::D3 => (true, false),
        BudgetDomain::D4 => (false, false),
    };
    // D3 needs the attacker to cover its demand at a positive defender price
    let boost = if target == BudgetDomain::D3 { 2.0 } else { 1.0 };
    let xa = report.x_suf * budget_factor(rng, a_ok) * boost;
    let yd = report.y_suf * budget_factor(rng, d_ok);
    spec.with_budgets(xa, yd)
}

fn product<R: Rng>(rng: &mut R, n: usize, target: BudgetDomain) -> GameSpec {
    let w = weights(rng, n);
    let c = w[n - 1] * rng.random_range(0.1..0.7);
    let spec = GameSpec::product(
        w,
        (c, rng.random_range(0.05..0.5)),
        (1.0, 1.0),
        EfficiencyFunction::exp_attack(),
        convex_defence(rng),
    );
    scale_budgets(rng, spec, target)
}

fn proportion<R: Rng>(rng: &mut R, n: usize, target: BudgetDomain) -> GameSpec {
    let w = weights(rng, n);
    let attack = increasing(rng);
    let defence = match rng.random_range(0..4) {
        0 => increasing(rng),
        _ => convex_defence(rng),
    };
    let spec = GameSpec::proportion(
        w,
        (rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)),
        (1.0, 1.0),
        attack,
        defence,
    );
    scale_budgets(rng, spec, target)
}

/// Linear instances are redrawn until the closed form stays within the
/// per-target cap of one.
fn linear<R: Rng>(rng: &mut R, n: usize) -> GameSpec {
    loop {
        let w = weights(rng, n);
        let c = w[n - 1] * rng.random_range(0.2..0.8);
        let gamma = rng.random_range(0.0..0.9) * c / w[0];
        let spec = GameSpec::linear_matrix(
            w,
            (c, rng.random_range(0.2..1.5)),
            (rng.random_range(0.02..1.0), rng.random_range(0.02..1.0)),
            gamma,
        );
        match solve_linear(&spec) {
            Err(SolveError::UnhandledBudgetPoint { .. }) => continue,
            _ => return spec,
        }
    }
}

/// `count` instances cycling through product, proportion and linear models,
/// with one to four targets and budgets aimed at each domain in turn.
pub fn random_corpus(seed: u64, count: usize) -> Vec<GameSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.random_range(1..=4);
            let target = DOMAINS[(k / 3) % 4];
            match k % 3 {
                0 => product(&mut rng, n, target),
                1 => proportion(&mut rng, n, target),
                _ => linear(&mut rng, n),
            }
        })
        .collect()
}

/// Uniformly scaled random split of each budget, respecting per-target caps.
pub fn random_allocation<R: Rng>(rng: &mut R, spec: &GameSpec) -> crate::model::Allocation {
    use crate::model::Player;
    let mut draw = |player: Player| -> Vec<f64> {
        let cap = spec.target_cap(player);
        let cap = if cap.is_finite() && spec.model != BreachingModel::LinearMatrix {
            cap * 0.999
        } else {
            cap
        };
        let shares: Vec<f64> = (0..spec.n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = shares.iter().sum();
        let used = spec.budget(player) * rng.random_range(0.0..1.0);
        shares.iter().map(|s| (used * s / total).min(cap)).collect()
    };
    let x = draw(Player::Attacker);
    let y = draw(Player::Defender);
    crate::model::Allocation { x, y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_spec;

    #[test]
    fn corpus_is_valid_and_deterministic() {
        let a = random_corpus(7, 12);
        assert_eq!(a, random_corpus(7, 12));
        for spec in &a {
            assert!(validate_spec(spec).is_empty(), "{spec:?}");
        }
    }
}
