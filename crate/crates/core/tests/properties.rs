use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use secgame::corpus::random_allocation;
use secgame::dual::DemandModel;
use secgame::kkt::kkt_residual;
use secgame::linear::solve_linear;
use secgame::oracle::{best_response, best_response_dynamics, epsilon_nash_check, lemma_checks};
use secgame::product::{classify_budget_domain, solve_product, ProductDemand};
use secgame::proportion::{solve_proportion, solve_proportion_with, ProportionOptions};
use secgame::{utilities, Allocation, BudgetDomain, EfficiencyFunction, Equilibrium, GameSpec, Player};

fn descending_weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (1.0..3.0f64, prop::collection::vec(0.5..0.95f64, n - 1)).prop_map(|(top, ratios)| {
        let mut w = vec![top];
        for r in ratios {
            let last = w[w.len() - 1];
            w.push(last * r);
        }
        w
    })
}

fn convex_defence() -> impl Strategy<Value = EfficiencyFunction> {
    prop_oneof![
        (0.5..2.0f64).prop_map(|theta| EfficiencyFunction::InvG { theta }),
        (0.5..2.0f64).prop_map(|theta| EfficiencyFunction::ExpG { theta }),
        (0.5..2.0f64).prop_map(|theta| EfficiencyFunction::QuadG { theta }),
    ]
}

fn product_spec() -> impl Strategy<Value = GameSpec> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                descending_weights(n),
                0.1..0.9f64,
                0.05..0.5f64,
                0.05..3.0f64,
                0.05..3.0f64,
                convex_defence(),
            )
        })
        .prop_map(|(w, cf, ch, xa, yd, g)| {
            let c = w[w.len() - 1] * cf;
            GameSpec::product(w, (c, ch), (xa, yd), EfficiencyFunction::exp_attack(), g)
        })
}

fn increasing() -> impl Strategy<Value = EfficiencyFunction> {
    prop_oneof![
        (0.4..1.0f64).prop_map(|a| EfficiencyFunction::Power { a }),
        (0.5..2.0f64).prop_map(|a| EfficiencyFunction::ExpAttack { a: Some(a) }),
    ]
}

fn proportion_spec() -> impl Strategy<Value = GameSpec> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                descending_weights(n),
                (0.2..2.0f64, 0.2..2.0f64),
                (0.02..2.0f64, 0.02..2.0f64),
                increasing(),
                prop_oneof![increasing(), convex_defence()],
            )
        })
        .prop_map(|(w, costs, budgets, f, g)| GameSpec::proportion(w, costs, budgets, f, g))
}

fn linear_spec() -> impl Strategy<Value = GameSpec> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                descending_weights(n),
                0.2..0.8f64,
                0.2..1.5f64,
                0.0..0.9f64,
                0.02..1.0f64,
                0.02..1.0f64,
            )
        })
        .prop_map(|(w, cf, ch, gf, xa, yd)| {
            let c = w[w.len() - 1] * cf;
            let gamma = gf * c / w[0];
            let mut spec = GameSpec::linear_matrix(w, (c, ch), (xa, yd), gamma);
            spec.cap_budgets_at_one = false;
            spec
        })
}

fn assert_certified(spec: &GameSpec, eq: &Equilibrium) -> Result<(), TestCaseError> {
    let r = kkt_residual(spec, eq);
    prop_assert!(r <= 1e-6, "KKT residual {r:e}");
    let report = epsilon_nash_check(spec, eq).unwrap();
    prop_assert!(report.passed(), "failed {:?}", report.failures());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_solutions_are_certified(spec in product_spec()) {
        let eq = solve_product(&spec).unwrap();
        assert_certified(&spec, &eq)?;
    }

    #[test]
    fn proportion_solutions_are_certified(spec in proportion_spec()) {
        let eq = solve_proportion(&spec).unwrap();
        assert_certified(&spec, &eq)?;
        for w in eq.alloc.x.iter().zip(&eq.alloc.y) {
            let p = spec.breach_probability(*w.0, *w.1).unwrap();
            prop_assert!(p > 0.0 && p < 1.0);
        }
    }

    #[test]
    fn linear_solutions_are_certified(spec in linear_spec()) {
        match solve_linear(&spec) {
            Ok(fam) => {
                let eq = fam.representative;
                prop_assert!(kkt_residual(&spec, &eq) <= 1e-6);
                let report = epsilon_nash_check(&spec, &eq).unwrap();
                prop_assert!(report.passed(), "failed {:?}", report.failures());
            }
            Err(secgame::SolveError::UnhandledBudgetPoint { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn power_closed_forms_match_numeric_path(spec in proportion_spec(), a in 0.4..1.0f64) {
        let mut spec = spec;
        spec.attack_eff = EfficiencyFunction::Power { a };
        spec.defence_eff = EfficiencyFunction::Power { a };
        let closed = solve_proportion(&spec).unwrap();
        let numeric = solve_proportion_with(&spec, ProportionOptions { closed_forms: false }).unwrap();
        prop_assert!(closed.alloc.max_distance(&numeric.alloc) <= 1e-8);
    }

    #[test]
    fn best_response_beats_random_alternatives(spec in prop_oneof![product_spec(), proportion_spec()], seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = random_allocation(&mut rng, &spec);
        for player in [Player::Attacker, Player::Defender] {
            let opponent = match player {
                Player::Attacker => &profile.y,
                Player::Defender => &profile.x,
            };
            let br = best_response(player, opponent, &spec, 16).unwrap();
            prop_assert!(br.alloc.iter().sum::<f64>() <= spec.budget(player) * (1.0 + 1e-12));
            for _ in 0..50 {
                let alt = random_allocation(&mut rng, &spec);
                let own = alt.of(player).to_vec();
                let trial = match player {
                    Player::Attacker => Allocation { x: own, y: profile.y.clone() },
                    Player::Defender => Allocation { x: profile.x.clone(), y: own },
                };
                let (ua, ud) = utilities(&spec, &trial).unwrap();
                let u = if player == Player::Attacker { ua } else { ud };
                prop_assert!(br.utility >= u - 1e-12, "{:?}: {} < {}", player, br.utility, u);
            }
        }
    }

    #[test]
    fn verification_mirrors_under_role_swap(
        w in descending_weights(3),
        a in 0.4..1.0f64,
        cost in 0.2..2.0f64,
        budget in 0.1..2.0f64,
        seed in 0u64..1000,
    ) {
        let power = EfficiencyFunction::Power { a };
        let spec = GameSpec::proportion(w, (cost, cost), (budget, budget), power, power);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alloc = random_allocation(&mut rng, &spec);
        let swapped = Allocation { x: alloc.y.clone(), y: alloc.x.clone() };
        let as_eq = |a: Allocation| Equilibrium::assemble(&spec, a, 0.0, 0.0, BudgetDomain::D1, secgame::Multiplicity::Unique).unwrap();
        let r = epsilon_nash_check(&spec, &as_eq(alloc)).unwrap();
        let s = epsilon_nash_check(&spec, &as_eq(swapped)).unwrap();
        prop_assert!((r.eps_attacker - s.eps_defender).abs() <= 1e-9 * (1.0 + r.eps_attacker));
        prop_assert!((r.eps_defender - s.eps_attacker).abs() <= 1e-9 * (1.0 + r.eps_defender));
    }

    #[test]
    fn product_lemmas_hold(spec in product_spec()) {
        let eq = solve_product(&spec).unwrap();
        for r in lemma_checks(&spec, &eq) {
            prop_assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn demand_falls_in_own_price(spec in product_spec(), l in 0.0..0.5f64, r in 0.0..0.5f64, d in 0.001..0.3f64) {
        let m = ProductDemand::full(&spec);
        let (x0, y0) = m.totals(l, r).unwrap();
        let (x1, _) = m.totals(l + d, r).unwrap();
        let (_, y1) = m.totals(l, r + d).unwrap();
        prop_assert!(x1 <= x0 + 1e-12);
        prop_assert!(y1 <= y0 + 1e-12);
    }

    #[test]
    fn dynamics_stay_put_at_equilibrium(spec in prop_oneof![product_spec(), proportion_spec()]) {
        let eq = secgame::solve::solve(&spec).unwrap();
        let run = best_response_dynamics(&spec, &eq.alloc, 20, 1e-7).unwrap();
        prop_assert!(run.converged && run.trajectory.len() <= 2);
    }

    #[test]
    fn attacker_utility_grows_with_budget_when_defender_is_short(spec in product_spec()) {
        // defender at half its sufficiency total; sweep the attacker budget up to twice its own
        let open = spec.with_budgets(1e6, 1e6);
        let suf = classify_budget_domain(&open).unwrap();
        prop_assume!(suf.x_suf > 1e-6 && suf.y_suf > 1e-6);
        let yd = 0.5 * suf.y_suf;
        // only points where the defender's budget binds; small X_A may leave it slack
        let mut last = f64::NEG_INFINITY;
        for k in 1..=10 {
            let xa = 2.0 * suf.x_suf * k as f64 / 10.0;
            let eq = solve_product(&spec.with_budgets(xa, yd)).unwrap();
            if !matches!(eq.budget_domain, BudgetDomain::D3 | BudgetDomain::D4) {
                prop_assert!(last == f64::NEG_INFINITY, "defender slack again at X_A = {xa}");
                continue;
            }
            prop_assert!(eq.utility_attacker >= last - 1e-9, "U_A fell at X_A = {xa}");
            last = eq.utility_attacker;
        }
    }

    #[test]
    fn spec_json_round_trip(spec in prop_oneof![product_spec(), proportion_spec(), linear_spec()]) {
        let text = serde_json::to_string(&spec).unwrap();
        let back: GameSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, spec);
    }
}
