//! Verification independent of the equilibrium solvers.
//!
//! Best responses work from utilities and their analytic partial
//! derivatives only; they never touch the inverse-derivative maps or the
//! per-target fixed points the solvers use. The brute-force search goes
//! further and uses nothing but utility values on a grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result, SolveError};
use crate::kkt::kkt_residual;
use crate::model::{utilities, Allocation, BreachingModel, Equilibrium, GameSpec, Player, RidClass};
use crate::numeric::{bisect, grow_bracket};

/// Default relative acceptance for utility gains: `ε = EPS_REL (1 + |U|)`.
pub const EPS_REL: f64 = 1e-4;

/// Attack placed on a target whose defence efficiency is zero in the
/// proportion form, where any positive attack breaches with certainty.
pub const PROPORTION_PROBE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BestResponseMethod {
    GridRefine,
    ProjectedAscent,
    DualBisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseResult {
    pub alloc: Vec<f64>,
    pub utility: f64,
    pub method: BestResponseMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub eps_attacker: f64,
    pub eps_defender: f64,
    pub kkt_max_residual: f64,
    pub invariant_results: Vec<InvariantResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.invariant_results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.invariant_results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.as_str())
            .collect()
    }

    pub fn result(&self, name: &str) -> Option<&InvariantResult> {
        self.invariant_results.iter().find(|r| r.name == name)
    }
}

fn profile(player: Player, own: &[f64], opponent: &[f64]) -> Allocation {
    match player {
        Player::Attacker => Allocation {
            x: own.to_vec(),
            y: opponent.to_vec(),
        },
        Player::Defender => Allocation {
            x: opponent.to_vec(),
            y: own.to_vec(),
        },
    }
}

fn utility_of(spec: &GameSpec, player: Player, alloc: &Allocation) -> std::result::Result<f64, ModelError> {
    let (ua, ud) = utilities(spec, alloc)?;
    Ok(match player {
        Player::Attacker => ua,
        Player::Defender => ud,
    })
}

/// Upper end of a player's search interval on one target.
fn search_upper(spec: &GameSpec, player: Player) -> f64 {
    let cap = spec.target_cap(player);
    let budget = spec.budget(player);
    if spec.model != BreachingModel::LinearMatrix && cap.is_finite() {
        budget.min(cap * (1.0 - 1e-12))
    } else {
        budget.min(cap)
    }
}

/// One player's separable problem against a frozen opponent.
struct Response<'a> {
    spec: &'a GameSpec,
    player: Player,
    opponent: &'a [f64],
    lower: Vec<f64>,
    upper: f64,
    resolution: usize,
}

impl<'a> Response<'a> {
    fn new(spec: &'a GameSpec, player: Player, opponent: &'a [f64], resolution: usize) -> Self {
        let upper = search_upper(spec, player);
        let lower = (0..spec.n)
            .map(|i| {
                let exposed = player == Player::Attacker
                    && spec.model == BreachingModel::ProportionForm
                    && spec.defence_gain(opponent[i]).map(|g| g == 0.0).unwrap_or(false);
                if exposed {
                    PROPORTION_PROBE.min(upper)
                } else {
                    0.0
                }
            })
            .collect();
        Response {
            spec,
            player,
            opponent,
            lower,
            upper,
            resolution: resolution.max(2),
        }
    }

    /// Marginal utility of the player's own allocation `z` on target `i`.
    fn marginal(&self, i: usize, z: f64) -> Result<f64> {
        let (x, y) = match self.player {
            Player::Attacker => (z, self.opponent[i]),
            Player::Defender => (self.opponent[i], z),
        };
        let (ma, md) = self.spec.marginals(i, x, y)?;
        Ok(match self.player {
            Player::Attacker => ma,
            Player::Defender => md,
        })
    }

    /// Maximizer of the target's utility minus `mu` per unit.
    fn target_at_price(&self, i: usize, mu: f64) -> Result<f64> {
        let (lo, hi) = (self.lower[i], self.upper);
        if hi <= lo || self.marginal(i, lo)? <= mu {
            return Ok(lo);
        }
        if self.marginal(i, hi)? >= mu {
            return Ok(hi);
        }
        // coarse grid to narrow the bracket, then bisection on the marginal
        let mut a = lo;
        let mut b = hi;
        for k in 1..self.resolution {
            let z = lo + (hi - lo) * k as f64 / self.resolution as f64;
            if self.marginal(i, z)? <= mu {
                b = z;
                break;
            }
            a = z;
        }
        let (_, z) = bisect(a, b, |z| Ok(self.marginal(i, z)? <= mu))?;
        Ok(z)
    }

    fn at_price(&self, mu: f64) -> Result<Vec<f64>> {
        (0..self.spec.n).map(|i| self.target_at_price(i, mu)).collect()
    }

    fn solve(&self) -> Result<(Vec<f64>, BestResponseMethod)> {
        let budget = self.spec.budget(self.player);
        let free = self.at_price(0.0)?;
        let used: f64 = free.iter().sum();
        if used < budget {
            return Ok((free, BestResponseMethod::GridRefine));
        }
        if used == budget {
            return Ok((free, BestResponseMethod::DualBisection));
        }
        let fits = |mu: f64| -> Result<bool> { Ok(self.at_price(mu)?.iter().sum::<f64>() <= budget) };
        let top = grow_bracket(1.0, "best-response price bracket", fits)?;
        let (mu_lo, mu_hi) = bisect(0.0, top, fits)?;
        let over = self.at_price(mu_lo)?;
        let under = self.at_price(mu_hi)?;
        let (so, su) = (over.iter().sum::<f64>(), under.iter().sum::<f64>());
        let theta = if so > su {
            ((budget - su) / (so - su)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let z = under.iter().zip(&over).map(|(u, o)| u + theta * (o - u)).collect();
        Ok((z, BestResponseMethod::DualBisection))
    }
}

/// Utility-maximizing allocation of `player` against a frozen opponent.
///
/// Per-target problems are solved at a common price on the player's
/// budget; `resolution` grid points per target bracket each maximizer
/// before refinement.
pub fn best_response(
    player: Player,
    fixed_opponent: &[f64],
    spec: &GameSpec,
    resolution: usize,
) -> Result<BestResponseResult> {
    if spec.budget(player) <= 0.0 {
        let alloc = vec![0.0; spec.n];
        let utility = utility_of(spec, player, &profile(player, &alloc, fixed_opponent))?;
        return Ok(BestResponseResult {
            alloc,
            utility,
            method: BestResponseMethod::GridRefine,
        });
    }
    let (alloc, method) = Response::new(spec, player, fixed_opponent, resolution).solve()?;
    let utility = utility_of(spec, player, &profile(player, &alloc, fixed_opponent))?;
    Ok(BestResponseResult { alloc, utility, method })
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> InvariantResult {
    InvariantResult {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

fn is_prefix(v: &[f64]) -> bool {
    let k = v.iter().take_while(|&&z| z > 0.0).count();
    v[k..].iter().all(|&z| z == 0.0)
}

fn prefix_check(eq: &Equilibrium) -> InvariantResult {
    let (x, y) = (&eq.alloc.x, &eq.alloc.y);
    let (ka, kd) = (crate::model::support_size(x), crate::model::support_size(y));
    let ok = is_prefix(x) && is_prefix(y) && ka >= kd;
    check("lemma2_prefix", ok, format!("K_A = {ka}, K_D = {kd}"))
}

fn lemma4_check(spec: &GameSpec, eq: &Equilibrium, tol: f64) -> InvariantResult {
    let (x, y) = (&eq.alloc.x, &eq.alloc.y);
    let kd = crate::model::support_size(y);
    let ka = crate::model::support_size(x);
    let mut bad = Vec::new();
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            if j < kd && y[i] < y[j] - tol {
                bad.push(format!("y_{} < y_{}", i + 1, j + 1));
            }
            if i >= kd && j < ka && x[i] < x[j] - tol {
                bad.push(format!("x_{} < x_{} on undefended targets", i + 1, j + 1));
            }
            if j < kd {
                let scale = tol * (1.0 + x[i].abs());
                let ok = match spec.defence_eff.rid_class() {
                    RidClass::Increasing => x[i] >= x[j] - scale,
                    RidClass::Constant => (x[i] - x[j]).abs() <= scale,
                    RidClass::Decreasing => x[i] <= x[j] + scale,
                };
                if !ok {
                    bad.push(format!(
                        "x_{} vs x_{} against {:?} RID",
                        i + 1,
                        j + 1,
                        spec.defence_eff.rid_class()
                    ));
                }
            }
        }
    }
    check("lemma4_ordering", bad.is_empty(), bad.join("; "))
}

fn strictly_descending(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[0] > p[1])
}

/// Structural invariants of equilibria that hold for the spec's model.
pub fn lemma_checks(spec: &GameSpec, eq: &Equilibrium) -> Vec<InvariantResult> {
    let (x, y) = (&eq.alloc.x, &eq.alloc.y);
    match spec.model {
        BreachingModel::ProductForm => vec![prefix_check(eq), lemma4_check(spec, eq, 1e-6)],
        BreachingModel::LinearMatrix => {
            let (ka, kd) = (crate::model::support_size(x), crate::model::support_size(y));
            vec![
                prefix_check(eq),
                check(
                    "lemma5_support",
                    ka == kd || ka == kd + 1,
                    format!("K_A = {ka}, K_D = {kd}"),
                ),
            ]
        }
        BreachingModel::ProportionForm => {
            let min = x.iter().chain(y).cloned().fold(f64::INFINITY, f64::min);
            vec![
                check("lemma6_positive", min > 1e-12, format!("smallest allocation {min:e}")),
                check(
                    "lemma7_ordering",
                    strictly_descending(x) && strictly_descending(y),
                    format!("x = {x:?}, y = {y:?}"),
                ),
            ]
        }
    }
}

/// Best-response gains of both players plus residual and lemma checks.
pub fn epsilon_nash_check(spec: &GameSpec, eq: &Equilibrium) -> Result<VerificationReport> {
    epsilon_nash_check_with(spec, eq, EPS_REL)
}

pub fn epsilon_nash_check_with(spec: &GameSpec, eq: &Equilibrium, eps_rel: f64) -> Result<VerificationReport> {
    if eq.alloc.x.len() != spec.n || eq.alloc.y.len() != spec.n {
        let detail = format!(
            "{} targets, allocations of length {} and {}",
            spec.n,
            eq.alloc.x.len(),
            eq.alloc.y.len()
        );
        return Ok(VerificationReport {
            eps_attacker: f64::INFINITY,
            eps_defender: f64::INFINITY,
            kkt_max_residual: f64::INFINITY,
            invariant_results: vec![
                check("epsilon_nash", false, "not evaluated"),
                check("feasibility", false, detail),
            ],
        });
    }
    let (ua, ud) = utilities(spec, &eq.alloc)?;
    let bra = best_response(Player::Attacker, &eq.alloc.y, spec, 16)?;
    let brd = best_response(Player::Defender, &eq.alloc.x, spec, 16)?;
    let eps_attacker = (bra.utility - ua).max(0.0);
    let eps_defender = (brd.utility - ud).max(0.0);
    let (tol_a, tol_d) = (eps_rel * (1.0 + ua.abs()), eps_rel * (1.0 + ud.abs()));

    let slack = 1e-9;
    let sx: f64 = eq.alloc.x.iter().sum();
    let sy: f64 = eq.alloc.y.iter().sum();
    let cap_a = spec.target_cap(Player::Attacker);
    let cap_d = spec.target_cap(Player::Defender);
    let within = |v: &[f64], cap: f64| v.iter().all(|&z| z >= 0.0 && z <= cap);
    let feasible = eq.alloc.x.len() == spec.n
        && eq.alloc.y.len() == spec.n
        && sx <= spec.budget_attacker + slack * (1.0 + spec.budget_attacker)
        && sy <= spec.budget_defender + slack * (1.0 + spec.budget_defender)
        && within(&eq.alloc.x, cap_a)
        && within(&eq.alloc.y, cap_d);
    let kkt = kkt_residual(spec, eq);

    let mut invariant_results = vec![
        check(
            "epsilon_nash",
            eps_attacker <= tol_a && eps_defender <= tol_d,
            format!("attacker gain {eps_attacker:.3e} (limit {tol_a:.3e}), defender gain {eps_defender:.3e} (limit {tol_d:.3e})"),
        ),
        check("feasibility", feasible, format!("Σx = {sx}, Σy = {sy}")),
        check("kkt", kkt <= crate::product::KKT_TOL, format!("max residual {kkt:.3e}")),
    ];
    invariant_results.extend(lemma_checks(spec, eq));
    Ok(VerificationReport {
        eps_attacker,
        eps_defender,
        kkt_max_residual: kkt,
        invariant_results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsResult {
    pub trajectory: Vec<Allocation>,
    pub converged: bool,
}

/// Damped alternating best responses: the defender answers the current
/// attack, and the attack moves a step `η` towards its answer to that.
///
/// The composite map reverses direction (more defence, less attack), so
/// full steps overshoot. `η` shrinks when successive steps point against
/// each other and grows back while they agree. Converged when the attack
/// is within `tol` of its best response in max-norm.
pub fn best_response_dynamics(
    spec: &GameSpec,
    start: &Allocation,
    max_iters: usize,
    tol: f64,
) -> Result<DynamicsResult> {
    let mut x = start.x.clone();
    let mut trajectory = vec![start.clone()];
    let mut eta: f64 = 1.0;
    let mut last_step: Option<Vec<f64>> = None;
    for _ in 0..max_iters {
        let y = best_response(Player::Defender, &x, spec, 8)?.alloc;
        let target = best_response(Player::Attacker, &y, spec, 8)?.alloc;
        let step: Vec<f64> = target.iter().zip(&x).map(|(t, a)| t - a).collect();
        let gap = step.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        if gap <= tol {
            trajectory.push(Allocation { x, y });
            return Ok(DynamicsResult {
                trajectory,
                converged: true,
            });
        }
        if let Some(prev) = &last_step {
            let dot: f64 = prev.iter().zip(&step).map(|(a, b)| a * b).sum();
            eta = if dot < 0.0 {
                (eta * 0.6).max(1e-4)
            } else {
                (eta * 1.2).min(1.0)
            };
        }
        for (a, d) in x.iter_mut().zip(&step) {
            *a += eta * d;
        }
        last_step = Some(step);
        trajectory.push(Allocation { x: x.clone(), y });
    }
    Ok(DynamicsResult {
        trajectory,
        converged: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessProbe {
    pub seed: u64,
    pub endpoints: Vec<Allocation>,
    pub all_converged: bool,
    /// Largest max-norm distance between any endpoint and the first.
    pub spread: f64,
}

/// Best-response dynamics from `starts` random feasible profiles.
pub fn uniqueness_probe(
    spec: &GameSpec,
    starts: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<UniquenessProbe> {
    use rand::SeedableRng;
    let runs: Vec<DynamicsResult> = (0..starts as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
            let start = crate::corpus::random_allocation(&mut rng, spec);
            best_response_dynamics(spec, &start, max_iters, tol)
        })
        .collect::<Result<_>>()?;
    let all_converged = runs.iter().all(|r| r.converged);
    let endpoints: Vec<Allocation> = runs
        .into_iter()
        .map(|r| r.trajectory.last().cloned().expect("trajectory holds the start"))
        .collect();
    let spread = endpoints
        .iter()
        .map(|e| e.max_distance(&endpoints[0]))
        .fold(0.0, f64::max);
    Ok(UniquenessProbe {
        seed,
        endpoints,
        all_converged,
        spread,
    })
}

/// Grid vectors with entries `j h <= upper`, summing to at most `budget`,
/// each coordinate within `radius` steps of `center` (or unrestricted).
fn simplex_points(n: usize, h: f64, upper: f64, budget: f64, window: Option<(&[f64], i64)>) -> Vec<Vec<f64>> {
    let max_units = |rem: f64| ((rem.min(upper) / h) * (1.0 + 1e-12)).floor().max(0.0) as i64;
    let mut out = Vec::new();
    let mut cur = vec![0.0; n];
    fn rec(
        i: usize,
        rem: f64,
        cur: &mut Vec<f64>,
        out: &mut Vec<Vec<f64>>,
        h: f64,
        window: Option<(&[f64], i64)>,
        max_units: &dyn Fn(f64) -> i64,
    ) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        let (lo, hi) = match window {
            Some((c, r)) => {
                let mid = (c[i] / h).round() as i64;
                ((mid - r).max(0), (mid + r).min(max_units(rem)))
            }
            None => (0, max_units(rem)),
        };
        for j in lo..=hi {
            cur[i] = j as f64 * h;
            rec(i + 1, rem - cur[i], cur, out, h, window, max_units);
        }
        cur[i] = 0.0;
    }
    rec(0, budget * (1.0 + 1e-12), &mut cur, &mut out, h, window, &max_units);
    out
}

/// Best utility over grid allocations of step `h`: greedy unit-by-unit
/// allocation, exact for separable concave objectives.
fn discrete_best_value(spec: &GameSpec, player: Player, opponent: &[f64], h: f64) -> Result<f64> {
    let upper = search_upper(spec, player);
    let units = ((spec.budget(player) / h) * (1.0 + 1e-12)).floor() as usize;
    let n = spec.n;
    let value = |i: usize, z: f64| -> Result<f64> {
        let (x, y) = match player {
            Player::Attacker => (z, opponent[i]),
            Player::Defender => (opponent[i], z),
        };
        let w = spec.weights[i];
        let p = spec.breach_probability(x, y)?;
        Ok(match player {
            Player::Attacker => w * p - spec.cost_attacker * z,
            Player::Defender => -w * p - spec.cost_defender * z,
        })
    };
    let mut level = vec![0usize; n];
    let mut current: Vec<f64> = (0..n).map(|i| value(i, 0.0)).collect::<Result<_>>()?;
    let gain_of = |i: usize, k: usize, cur: f64| -> Result<Option<f64>> {
        let z = (k + 1) as f64 * h;
        if z > upper * (1.0 + 1e-12) {
            return Ok(None);
        }
        Ok(Some(value(i, z)? - cur))
    };
    let mut gains: Vec<Option<f64>> = (0..n).map(|i| gain_of(i, 0, current[i])).collect::<Result<_>>()?;
    for _ in 0..units {
        let best = (0..n)
            .filter_map(|i| gains[i].map(|g| (i, g)))
            .fold(None, |acc: Option<(usize, f64)>, (i, g)| match acc {
                Some((_, bg)) if bg >= g => acc,
                _ => Some((i, g)),
            });
        match best {
            Some((i, g)) if g > 0.0 => {
                level[i] += 1;
                current[i] += g;
                gains[i] = gain_of(i, level[i], current[i])?;
            }
            _ => break,
        }
    }
    Ok(current.iter().sum())
}

/// Lipschitz-type scale of both utilities used to bound discretization error.
fn regret_bound(spec: &GameSpec, h: f64) -> f64 {
    let slope = |e: &crate::model::EfficiencyFunction| e.derivative(h).map(f64::abs).unwrap_or(1.0);
    let d = slope(&spec.attack_eff).max(slope(&spec.defence_eff)).max(1.0);
    let c = spec.cost_attacker.max(spec.cost_defender);
    2.0 * spec.n as f64 * (spec.weights[0] * d + c) * h
}

/// Profile with the smallest regret among `xs × ys`, first in
/// lexicographic order on ties.
fn best_pair(
    spec: &GameSpec,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    (ha, hd): (f64, f64),
) -> Result<Option<(f64, Allocation)>> {
    let va: Vec<f64> = ys
        .par_iter()
        .map(|y| discrete_best_value(spec, Player::Attacker, y, ha))
        .collect::<Result<_>>()?;
    let vd: Vec<f64> = xs
        .par_iter()
        .map(|x| discrete_best_value(spec, Player::Defender, x, hd))
        .collect::<Result<_>>()?;
    let (regret, k) = (0..xs.len() * ys.len())
        .into_par_iter()
        .map(|k| {
            let (ix, iy) = (k / ys.len(), k % ys.len());
            let alloc = Allocation {
                x: xs[ix].clone(),
                y: ys[iy].clone(),
            };
            let regret = utilities(spec, &alloc)
                .map(|(a, d)| (va[iy] - a).max(vd[ix] - d))
                .unwrap_or(f64::INFINITY);
            (regret, k)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |p, q| if q.0 < p.0 || (q.0 == p.0 && q.1 < p.1) { q } else { p },
        );
    if k == usize::MAX {
        return Ok(None);
    }
    Ok(Some((
        regret,
        Allocation {
            x: xs[k / ys.len()].clone(),
            y: ys[k % ys.len()].clone(),
        },
    )))
}

/// Whether `to` reaches the edge of a window of `radius` steps around `from`.
fn at_window_edge(from: &Allocation, to: &Allocation, (ha, hd): (f64, f64), radius: i64) -> bool {
    let edge = |a: &[f64], b: &[f64], h: f64| {
        a.iter()
            .zip(b)
            .any(|(p, q)| ((q - p) / h).round().abs() as i64 >= radius)
    };
    edge(&from.x, &to.x, ha) || edge(&from.y, &to.y, hd)
}

/// Exhaustive coarse-to-fine search for the grid profile with the smallest
/// best-response regret, for `N <= 3`.
///
/// Each player's grid starts coarse relative to its own budget and is
/// refined fourfold around the incumbent; a window whose best point lands
/// on its edge is re-centred at the same resolution.
pub fn brute_force_ne(spec: &GameSpec, grid_step: f64) -> Result<Allocation> {
    assert!(spec.n <= 3, "brute force search is limited to three targets");
    assert!(grid_step >= 1e-3 * (1.0 - 1e-12), "grid step below 1e-3");
    let n = spec.n;
    let ua = search_upper(spec, Player::Attacker);
    let ud = search_upper(spec, Player::Defender);
    let (ba, bd) = (spec.budget_attacker, spec.budget_defender);
    let (coarse_units, radius): (f64, i64) = match n {
        1 => (400.0, 24),
        2 => (40.0, 6),
        _ => (16.0, 3),
    };
    // finest steps divide the budgets so that exhausting a budget is on the grid
    let fine = |b: f64| b / (b / grid_step * (1.0 - 1e-12)).ceil().max(1.0);
    let fine_steps = (fine(ba), fine(bd));
    let coarse = |span: f64, h0: f64| {
        let mut h = h0;
        while span / h > coarse_units {
            h *= 4.0;
        }
        h
    };
    let mut steps = (coarse(ba, fine_steps.0), coarse(bd, fine_steps.1));
    let full = (
        simplex_points(n, steps.0, ua, ba, None),
        simplex_points(n, steps.1, ud, bd, None),
    );
    let not_found = |h: f64| SolveError::NotFound {
        best_regret: f64::INFINITY,
        bound: regret_bound(spec, h),
    };
    let (mut regret, mut best) = best_pair(spec, &full.0, &full.1, steps)?.ok_or_else(|| not_found(grid_step))?;

    loop {
        if steps.0 <= fine_steps.0 * (1.0 + 1e-12) && steps.1 <= fine_steps.1 * (1.0 + 1e-12) {
            break;
        }
        steps = ((steps.0 / 4.0).max(fine_steps.0), (steps.1 / 4.0).max(fine_steps.1));
        for _ in 0..64 {
            let xs = simplex_points(n, steps.0, ua, ba, Some((&best.x, radius)));
            let ys = simplex_points(n, steps.1, ud, bd, Some((&best.y, radius)));
            let (r, cand) = best_pair(spec, &xs, &ys, steps)?.ok_or_else(|| not_found(grid_step))?;
            let moved = cand != best && at_window_edge(&best, &cand, steps, radius);
            regret = r;
            best = cand;
            if !moved {
                break;
            }
        }
    }
    let bound = regret_bound(spec, grid_step);
    if regret > bound {
        return Err(SolveError::NotFound {
            best_regret: regret,
            bound,
        });
    }
    Ok(best)
}
