//! Acceptance criteria, one line of output per criterion.
//!
//! Runs without the libtest harness so the report is never captured; exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use secgame::corpus::random_corpus;
use secgame::kkt::kkt_residual;
use secgame::linear::{enumerate_boundary_nes, solve_linear};
use secgame::oracle::{brute_force_ne, epsilon_nash_check, lemma_checks, uniqueness_probe};
use secgame::product::{solve_product, DualPair};
use secgame::proportion::{proportion_utility_sensitivity, solve_proportion_with, ProportionOptions};
use secgame::regions::{classify_target, lambda_grid, region_boundaries, RegionLabel};
use secgame::solve::solve;
use secgame::{Allocation, BreachingModel, BudgetDomain, EfficiencyFunction, GameSpec};

const CORPUS_SEED: u64 = 0;
const CORPUS_SIZE: usize = 50;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match &outcome {
        Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
        Err(detail) => println!("criterion {id:>2} FAIL  {name}: {detail}"),
    }
    outcome.is_ok()
}

fn region_example(c: f64, ch: f64) -> GameSpec {
    GameSpec::product(
        vec![1.0],
        (c, ch),
        (10.0, 10.0),
        EfficiencyFunction::exp_attack(),
        EfficiencyFunction::ExpG { theta: 1.0 },
    )
}

fn c1_regions() -> Outcome {
    let mut worst = 0.0f64;
    for (c, ch) in [(0.3, 0.2), (0.1, 0.5), (0.6, 0.05), (0.45, 0.45)] {
        let spec = region_example(c, ch);
        for row in region_boundaries(0, &spec, &lambda_grid(1.0, 41)).map_err(|e| e.to_string())? {
            worst = worst.max((row.r1_threshold - (1.0 - c)).abs());
            let expected = (1.0 - c - ch - row.lambda).max(0.0);
            worst = worst.max((row.r2_rho_boundary - expected).abs());
        }
        // labels on either side of the closed-form boundary
        let l = 0.5 * (1.0 - c - ch);
        let b = 1.0 - c - ch - l;
        let above = classify_target(0, DualPair::new(l, b + 0.01), &spec).map_err(|e| e.to_string())?;
        let below = classify_target(0, DualPair::new(l, (b - 0.01).max(0.0)), &spec).map_err(|e| e.to_string())?;
        ensure(above == RegionLabel::R2 && below == RegionLabel::R4, || {
            format!("labels {above:?}/{below:?} at c={c}")
        })?;
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation from 1-c and 1-c-ĉ-λ is {worst:.1e}"))
}

fn rid_instance(defence: EfficiencyFunction) -> GameSpec {
    GameSpec::product(
        vec![1.0, 0.8],
        (0.3, 0.1),
        (10.0, 10.0),
        EfficiencyFunction::exp_attack(),
        defence,
    )
}

fn c2_rid_ordering() -> Outcome {
    let mut notes = Vec::new();
    for (defence, check) in [
        (EfficiencyFunction::InvG { theta: 1.0 }, 0),
        (EfficiencyFunction::ExpG { theta: 1.0 }, 1),
        (EfficiencyFunction::QuadG { theta: 0.5 }, 2),
    ] {
        let spec = rid_instance(defence);
        let eq = solve_product(&spec).map_err(|e| e.to_string())?;
        ensure(eq.k_defender == 2, || {
            format!("{} leaves a target undefended", defence.family_name())
        })?;
        let (x1, x2) = (eq.alloc.x[0], eq.alloc.x[1]);
        let ok = match check {
            0 => x1 > x2 + 1e-8,
            1 => (x1 - x2).abs() <= 1e-6,
            _ => x1 < x2 - 1e-8,
        };
        ensure(ok, || format!("{}: x = ({x1}, {x2})", defence.family_name()))?;
        let report = epsilon_nash_check(&spec, &eq).map_err(|e| e.to_string())?;
        ensure(report.passed(), || {
            format!("{} fails {:?}", defence.family_name(), report.failures())
        })?;
        notes.push(format!("{} x1-x2={:+.3e}", defence.family_name(), x1 - x2));
    }
    Ok(notes.join(", "))
}

fn linear_instance(xa: f64, yd: f64) -> GameSpec {
    let mut spec = GameSpec::linear_matrix(vec![10.0, 5.0], (1.0, 1.0), (xa, yd), 0.0);
    spec.cap_budgets_at_one = false;
    spec
}

/// Largest utility over grid allocations of step `h` (two targets, cap 1).
fn grid_best(spec: &GameSpec, attacker: bool, opponent: &[f64], h: f64) -> f64 {
    let budget = if attacker {
        spec.budget_attacker
    } else {
        spec.budget_defender
    };
    let units = |b: f64| (b / h + 1e-9).floor() as usize;
    let gb = 1.0 - spec.gamma;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=units(budget.min(1.0)) {
        let a = i as f64 * h;
        for j in 0..=units((budget - a).min(1.0)) {
            let b = j as f64 * h;
            let own = [a, b];
            let u: f64 = (0..2)
                .map(|t| {
                    let (x, y) = if attacker {
                        (own[t], opponent[t])
                    } else {
                        (opponent[t], own[t])
                    };
                    let p = x * (1.0 - gb * y);
                    if attacker {
                        spec.weights[t] * p - spec.cost_attacker * own[t]
                    } else {
                        -spec.weights[t] * p - spec.cost_defender * own[t]
                    }
                })
                .sum();
            best = best.max(u);
        }
    }
    best
}

fn grid_eps(spec: &GameSpec, a: &Allocation, h: f64) -> (f64, f64) {
    let (ua, ud) = secgame::utilities(spec, a).unwrap();
    (
        grid_best(spec, true, &a.y, h) - ua,
        grid_best(spec, false, &a.x, h) - ud,
    )
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p - q).abs() <= tol)
}

fn c3_linear_cases() -> Outcome {
    let h = 1e-3;
    let limit = 2.0 * h * 10.0;
    let mut worst_eps = 0.0f64;
    // unique cases: (X_A, Y_D), case, x*, y*
    let unique = [
        ((0.2, 1.0), 1, [0.1, 0.1], [0.5, 0.0]),
        ((0.5, 1.0), 2, [1.0 / 6.0, 1.0 / 3.0], [2.0 / 3.0, 1.0 / 3.0]),
        ((0.5, 1.8), 3, [0.1, 0.2], [0.9, 0.8]),
    ];
    for ((xa, yd), case, x, y) in unique {
        let spec = linear_instance(xa, yd);
        let fam = solve_linear(&spec).map_err(|e| e.to_string())?;
        let eq = &fam.representative;
        ensure(fam.case == case, || {
            format!("({xa}, {yd}) classified as case {}", fam.case)
        })?;
        ensure(close(&eq.alloc.x, &x, 1e-12) && close(&eq.alloc.y, &y, 1e-12), || {
            format!("case {case}: got {:?}", eq.alloc)
        })?;
        let (ea, ed) = grid_eps(&spec, &eq.alloc, h);
        worst_eps = worst_eps.max(ea).max(ed);
    }
    // case 4: X_A = P_A(1) = 0.1; y_1 = ỹ free in [0, 0.5]
    let spec = linear_instance(0.1, 1.0);
    let fam = solve_linear(&spec).map_err(|e| e.to_string())?;
    ensure(fam.case == 4 && fam.free_interval == Some((0.0, 0.5)), || {
        format!("case 4 family {fam:?}")
    })?;
    for eq in enumerate_boundary_nes(&spec, &fam, 5).map_err(|e| e.to_string())? {
        let yt = eq.alloc.y.iter().sum::<f64>();
        ensure(
            close(&eq.alloc.x, &[0.1, 0.0], 1e-12) && close(&eq.alloc.y, &[yt, 0.0], 1e-12),
            || format!("case 4 member {:?}", eq.alloc),
        )?;
        let (ea, ed) = grid_eps(&spec, &eq.alloc, h);
        worst_eps = worst_eps.max(ea).max(ed);
    }
    // case 5: Y_D = P_D(2) = 0.5; x_1 = x̃ free in [0.1, X_A], remainder on target 2
    let spec = linear_instance(0.2, 0.5);
    let fam = solve_linear(&spec).map_err(|e| e.to_string())?;
    let (lo, hi) = fam.free_interval.ok_or("case 5 without a family")?;
    ensure(
        fam.case == 5 && (lo - 0.1).abs() <= 1e-12 && (hi - 0.2).abs() <= 1e-12,
        || format!("case 5 family {fam:?}"),
    )?;
    for eq in enumerate_boundary_nes(&spec, &fam, 5).map_err(|e| e.to_string())? {
        let xt = eq.alloc.x[0];
        ensure(
            close(&eq.alloc.x, &[xt, 0.2 - xt], 1e-12) && close(&eq.alloc.y, &[0.5, 0.0], 1e-12),
            || format!("case 5 member {:?}", eq.alloc),
        )?;
        let (ea, ed) = grid_eps(&spec, &eq.alloc, h);
        worst_eps = worst_eps.max(ea).max(ed);
    }
    ensure(worst_eps <= limit, || format!("grid gain {worst_eps:e} above {limit}"))?;
    Ok(format!(
        "five cases exact, largest grid gain {worst_eps:.1e} (limit {limit:.0e})"
    ))
}

fn c4_multiple_ne() -> Outcome {
    let spec = linear_instance(0.1, 1.0);
    let fam = solve_linear(&spec).map_err(|e| e.to_string())?;
    let members = enumerate_boundary_nes(&spec, &fam, 11).map_err(|e| e.to_string())?;
    let ud: Vec<f64> = members.iter().map(|e| e.utility_defender).collect();
    let spread =
        ud.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ud.iter().cloned().fold(f64::INFINITY, f64::min);
    let x1 = members[0].alloc.x[0];
    let diff = members[0].utility_attacker - members[members.len() - 1].utility_attacker;
    let expected = x1 * (10.0 - 5.0);
    ensure(spread <= 1e-9, || format!("defender utility spread {spread:e}"))?;
    ensure((diff - expected).abs() <= 1e-9, || {
        format!("attacker endpoint gap {diff} vs {expected}")
    })?;
    Ok(format!(
        "U_D spread {spread:.1e}, U_A endpoint gap {diff:.12} = x1(w1-w2)"
    ))
}

fn power_spec(w: Vec<f64>, a: f64, costs: (f64, f64), budgets: (f64, f64)) -> GameSpec {
    GameSpec::proportion(
        w,
        costs,
        budgets,
        EfficiencyFunction::Power { a },
        EfficiencyFunction::Power { a },
    )
}

fn c5_proportion() -> Outcome {
    let numeric = ProportionOptions { closed_forms: false };
    let mut worst = [0.0f64; 3];
    for (a, c, ch) in [(1.0, 1.0, 2.0), (0.5, 1.0, 2.0), (0.8, 1.5, 0.7)] {
        let spec = power_spec(vec![2.0, 1.0], a, (c, ch), (10.0, 10.0));
        let eq = solve_proportion_with(&spec, numeric).map_err(|e| e.to_string())?;
        ensure(eq.budget_domain == BudgetDomain::D1, || {
            format!("a={a}: {:?}", eq.budget_domain)
        })?;
        let r: f64 = (c / ch).powf(a);
        for (i, w) in spec.weights.iter().enumerate() {
            let x = w * a * r / ((1.0 + r).powi(2) * c);
            worst[0] = worst[0]
                .max((eq.alloc.x[i] - x).abs())
                .max((eq.alloc.y[i] - x * c / ch).abs());
        }
    }
    for (a, budgets) in [(1.0, (0.3, 0.6)), (0.6, (0.2, 0.1)), (0.9, (0.05, 0.2))] {
        let spec = power_spec(vec![2.0, 1.0], a, (1.0, 1.0), budgets);
        let eq = solve_proportion_with(&spec, numeric).map_err(|e| e.to_string())?;
        ensure(eq.budget_domain == BudgetDomain::D4, || {
            format!("D4 instance solved as {:?}", eq.budget_domain)
        })?;
        for (i, w) in spec.weights.iter().enumerate() {
            worst[1] = worst[1]
                .max((eq.alloc.x[i] - w * budgets.0 / 3.0).abs())
                .max((eq.alloc.y[i] - w * budgets.1 / 3.0).abs());
        }
    }
    for (a, c, ch) in [(1.0, 1.0, 1.0), (0.7, 1.0, 1.0), (0.5, 0.4, 1.3)] {
        let spec = power_spec(vec![2.0, 1.0], a, (c, ch), (0.2, 10.0));
        let eq = solve_proportion_with(&spec, numeric).map_err(|e| e.to_string())?;
        ensure(eq.budget_domain == BudgetDomain::D2, || {
            format!("D2 instance solved as {:?}", eq.budget_domain)
        })?;
        let t = c + eq.lambda;
        let lhs = (1.0 + (t / ch).powf(a)).powi(2) * ch.powf(a) * t.powf(1.0 - a) * 0.2;
        worst[2] = worst[2].max((lhs - 3.0 * a).abs());
    }
    ensure(worst[0] <= 1e-8, || format!("D1 deviation {:e}", worst[0]))?;
    ensure(worst[1] <= 1e-10, || format!("D4 deviation {:e}", worst[1]))?;
    ensure(worst[2] <= 1e-8, || format!("D2 equation residual {:e}", worst[2]))?;
    Ok(format!(
        "D1 {:.1e}, D4 {:.1e}, D2 residual {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn c6_kkt_corpus() -> Outcome {
    let corpus = random_corpus(CORPUS_SEED, CORPUS_SIZE);
    let mut worst = 0.0f64;
    let mut domains = std::collections::BTreeSet::new();
    for (k, spec) in corpus.iter().enumerate() {
        let eq = solve(spec).map_err(|e| format!("instance {k}: {e}"))?;
        let r = kkt_residual(spec, &eq);
        ensure(r <= 1e-6, || format!("instance {k}: residual {r:e}"))?;
        worst = worst.max(r);
        domains.insert(format!("{}", eq.budget_domain));
    }
    ensure(domains.len() == 4, || format!("domains visited: {domains:?}"))?;
    Ok(format!(
        "{} instances, max residual {worst:.1e}, domains {domains:?}",
        corpus.len()
    ))
}

fn c7_brute_force() -> Outcome {
    let corpus = random_corpus(CORPUS_SEED, CORPUS_SIZE);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, spec) in corpus.iter().enumerate().filter(|(_, s)| s.n <= 2) {
        let eq = solve(spec).map_err(|e| format!("instance {k}: {e}"))?;
        let grid = brute_force_ne(spec, 1e-3).map_err(|e| format!("instance {k}: {e}"))?;
        let d = grid.max_distance(&eq.alloc);
        ensure(d <= 5e-3, || format!("instance {k} ({:?}): distance {d:e}", spec.model))?;
        worst = worst.max(d);
        count += 1;
    }
    Ok(format!("{count} instances with N <= 2, max distance {worst:.1e}"))
}

fn c8_uniqueness() -> Outcome {
    let concave: Vec<GameSpec> = random_corpus(CORPUS_SEED, 60)
        .into_iter()
        .filter(|s| s.model != BreachingModel::LinearMatrix)
        .take(20)
        .collect();
    ensure(concave.len() == 20, || "corpus too small".into())?;
    let mut worst = 0.0f64;
    for (k, spec) in concave.iter().enumerate() {
        let probe = uniqueness_probe(spec, 10, k as u64, 2000, 1e-9).map_err(|e| e.to_string())?;
        ensure(probe.all_converged, || format!("instance {k}: a run did not converge"))?;
        ensure(probe.spread <= 1e-3, || {
            format!("instance {k}: spread {:e}", probe.spread)
        })?;
        worst = worst.max(probe.spread);
    }
    Ok(format!("20 instances x 10 starts, max spread {worst:.1e}"))
}

fn c9_sensitivity() -> Outcome {
    let spec = power_spec(vec![2.0, 1.0], 1.0, (2.0, 0.5), (0.1, 10.0));
    let budgets: Vec<f64> = (0..12).map(|k| 0.02 + 0.18 * k as f64 / 11.0).collect();
    let rows = proportion_utility_sensitivity(&spec, &budgets).map_err(|e| e.to_string())?;
    ensure(rows.iter().all(|r| r.domain == BudgetDomain::D2), || {
        "sweep leaves D2".into()
    })?;
    for p in rows.windows(2) {
        ensure(p[1].utility_defender < p[0].utility_defender, || {
            format!("U_D not decreasing at X_A = {}", p[1].budget_attacker)
        })?;
    }
    let mut signs = Vec::new();
    for k in 1..rows.len() - 1 {
        let du = rows[k + 1].utility_attacker - rows[k - 1].utility_attacker;
        let dl = rows[k + 1].lambda - rows[k - 1].lambda;
        let analytic = rows[k].du_attacker_dlambda.ok_or("missing analytic derivative")? * dl.signum();
        ensure(du.signum() == analytic.signum(), || {
            format!(
                "X_A = {}: ΔU_A = {du:e}, analytic sign {analytic:e}",
                rows[k].budget_attacker
            )
        })?;
        signs.push(if du > 0.0 { '+' } else { '-' });
    }
    ensure(signs.contains(&'+') && signs.contains(&'-'), || {
        "sweep does not cross c = λ + ĉ".into()
    })?;
    Ok(format!(
        "U_D strictly decreasing; ΔU_A signs {}",
        signs.iter().collect::<String>()
    ))
}

fn c10_lemmas() -> Outcome {
    let corpus = random_corpus(CORPUS_SEED, CORPUS_SIZE);
    let mut counts = std::collections::BTreeMap::new();
    for (k, spec) in corpus.iter().enumerate() {
        let eq = solve(spec).map_err(|e| format!("instance {k}: {e}"))?;
        for r in lemma_checks(spec, &eq) {
            ensure(r.passed, || format!("instance {k}: {} fails ({})", r.name, r.detail))?;
            *counts.entry(r.name).or_insert(0) += 1;
        }
    }
    Ok(format!("checks passed: {counts:?}"))
}

fn main() -> ExitCode {
    let results = [
        run(1, "region thresholds", c1_regions),
        run(2, "RID ordering", c2_rid_ordering),
        run(3, "linear closed forms", c3_linear_cases),
        run(4, "multiple-NE boundary", c4_multiple_ne),
        run(5, "proportion closed forms", c5_proportion),
        run(6, "KKT residuals on corpus", c6_kkt_corpus),
        run(7, "brute-force agreement", c7_brute_force),
        run(8, "uniqueness probe", c8_uniqueness),
        run(9, "sensitivity signs", c9_sensitivity),
        run(10, "lemma suites", c10_lemmas),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
