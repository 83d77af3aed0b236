//! Game instances, allocations, equilibria and utility evaluation.

mod efficiency;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub use efficiency::{eval_eff, eval_eff_prime, inv_eff_prime, rid_class, EfficiencyFunction, RidClass};

/// How the per-target breaching probability combines both efficiencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BreachingModel {
    /// `p = f(x) * g̃(y)`
    ProductForm,
    /// `p = f(x) / (f(x) + g(y))`
    ProportionForm,
    /// `p = x * (1 - (1 - γ) y)` with per-target probabilities in `[0, 1]`
    LinearMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Attacker,
    Defender,
}

/// A complete game instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub n: usize,
    pub weights: Vec<f64>,
    pub cost_attacker: f64,
    pub cost_defender: f64,
    pub budget_attacker: f64,
    pub budget_defender: f64,
    pub model: BreachingModel,
    pub attack_eff: EfficiencyFunction,
    pub defence_eff: EfficiencyFunction,
    #[serde(default)]
    pub gamma: f64,
    /// LinearMatrix only: whether the budgets themselves are probability
    /// masses bounded by 1. Per-target probabilities stay in `[0, 1]` either way.
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub cap_budgets_at_one: bool,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl GameSpec {
    pub fn product(
        weights: Vec<f64>,
        costs: (f64, f64),
        budgets: (f64, f64),
        attack_eff: EfficiencyFunction,
        defence_eff: EfficiencyFunction,
    ) -> Self {
        Self::with_model(
            BreachingModel::ProductForm,
            weights,
            costs,
            budgets,
            attack_eff,
            defence_eff,
        )
    }

    pub fn proportion(
        weights: Vec<f64>,
        costs: (f64, f64),
        budgets: (f64, f64),
        attack_eff: EfficiencyFunction,
        defence_eff: EfficiencyFunction,
    ) -> Self {
        Self::with_model(
            BreachingModel::ProportionForm,
            weights,
            costs,
            budgets,
            attack_eff,
            defence_eff,
        )
    }

    pub fn linear_matrix(weights: Vec<f64>, costs: (f64, f64), budgets: (f64, f64), gamma: f64) -> Self {
        let mut spec = Self::with_model(
            BreachingModel::LinearMatrix,
            weights,
            costs,
            budgets,
            EfficiencyFunction::Linear {
                intercept: 0.0,
                slope: 1.0,
            },
            EfficiencyFunction::Linear {
                intercept: 1.0,
                slope: -(1.0 - gamma),
            },
        );
        spec.gamma = gamma;
        spec
    }

    fn with_model(
        model: BreachingModel,
        weights: Vec<f64>,
        (cost_attacker, cost_defender): (f64, f64),
        (budget_attacker, budget_defender): (f64, f64),
        attack_eff: EfficiencyFunction,
        defence_eff: EfficiencyFunction,
    ) -> Self {
        GameSpec {
            n: weights.len(),
            weights,
            cost_attacker,
            cost_defender,
            budget_attacker,
            budget_defender,
            model,
            attack_eff,
            defence_eff,
            gamma: 0.0,
            cap_budgets_at_one: true,
        }
    }

    pub fn with_budgets(&self, budget_attacker: f64, budget_defender: f64) -> Self {
        GameSpec {
            budget_attacker,
            budget_defender,
            ..self.clone()
        }
    }

    pub fn budget(&self, player: Player) -> f64 {
        match player {
            Player::Attacker => self.budget_attacker,
            Player::Defender => self.budget_defender,
        }
    }

    pub fn cost(&self, player: Player) -> f64 {
        match player {
            Player::Attacker => self.cost_attacker,
            Player::Defender => self.cost_defender,
        }
    }

    /// `1 - γ`
    pub fn gamma_bar(&self) -> f64 {
        1.0 - self.gamma
    }

    /// Exclusive (QuadG) or inclusive (LinearMatrix) per-target allocation cap.
    pub fn target_cap(&self, player: Player) -> f64 {
        if self.model == BreachingModel::LinearMatrix {
            return 1.0;
        }
        let eff = match player {
            Player::Attacker => &self.attack_eff,
            Player::Defender => &self.defence_eff,
        };
        eff.domain_upper().unwrap_or(f64::INFINITY)
    }

    /// Defence efficiency `g` used by the proportion form. Decreasing
    /// families are read as the inefficiency `g̃` and turned into `1 - g̃`.
    pub fn defence_gain(&self, y: f64) -> Result<f64, ModelError> {
        if self.defence_eff.is_decreasing() {
            Ok(1.0 - self.defence_eff.value(y)?)
        } else {
            self.defence_eff.value(y)
        }
    }

    pub fn defence_gain_prime(&self, y: f64) -> Result<f64, ModelError> {
        if self.defence_eff.is_decreasing() {
            Ok(-self.defence_eff.derivative(y)?)
        } else {
            self.defence_eff.derivative(y)
        }
    }

    pub fn defence_gain_second(&self, y: f64) -> Result<f64, ModelError> {
        if self.defence_eff.is_decreasing() {
            Ok(-self.defence_eff.second_derivative(y)?)
        } else {
            self.defence_eff.second_derivative(y)
        }
    }

    pub fn breach_probability(&self, x: f64, y: f64) -> Result<f64, ModelError> {
        match self.model {
            BreachingModel::ProductForm | BreachingModel::LinearMatrix => {
                Ok(self.attack_eff.value(x)? * self.defence_eff.value(y)?)
            }
            BreachingModel::ProportionForm => {
                let f = self.attack_eff.value(x)?;
                let g = self.defence_gain(y)?;
                if f + g == 0.0 {
                    Ok(0.0)
                } else {
                    Ok(f / (f + g))
                }
            }
        }
    }
}

impl GameSpec {
    /// `(∂U_A/∂x_i, ∂U_D/∂y_i)` at `(x, y)` on target `i`.
    pub fn marginals(&self, i: usize, x: f64, y: f64) -> Result<(f64, f64), ModelError> {
        let w = self.weights[i];
        match self.model {
            BreachingModel::ProductForm | BreachingModel::LinearMatrix => {
                let f = self.attack_eff.value(x)?;
                let gt = self.defence_eff.value(y)?;
                let dm = if f == 0.0 {
                    0.0
                } else {
                    -w * f * self.defence_eff.derivative(y)?
                };
                Ok((
                    w * self.attack_eff.derivative(x)? * gt - self.cost_attacker,
                    dm - self.cost_defender,
                ))
            }
            BreachingModel::ProportionForm => {
                let f = self.attack_eff.value(x)?;
                let g = self.defence_gain(y)?;
                if f + g == 0.0 {
                    return Ok((f64::INFINITY, -self.cost_defender));
                }
                let s2 = (f + g) * (f + g);
                let ma = if g == 0.0 {
                    0.0
                } else {
                    w * self.attack_eff.derivative(x)? * g / s2
                };
                let md = if f == 0.0 {
                    0.0
                } else {
                    w * f * self.defence_gain_prime(y)? / s2
                };
                Ok((ma - self.cost_attacker, md - self.cost_defender))
            }
        }
    }
}

/// Pure-strategy resource allocation of both players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Allocation {
    pub fn zeros(n: usize) -> Self {
        Allocation {
            x: vec![0.0; n],
            y: vec![0.0; n],
        }
    }

    pub fn of(&self, player: Player) -> &[f64] {
        match player {
            Player::Attacker => &self.x,
            Player::Defender => &self.y,
        }
    }

    pub fn max_distance(&self, other: &Allocation) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .chain(self.y.iter().zip(&other.y))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BudgetDomain {
    D1,
    D2,
    D3,
    D4,
}

impl fmt::Display for BudgetDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Multiplicity {
    Unique,
    BoundaryFamily { free_interval: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub alloc: Allocation,
    pub lambda: f64,
    pub rho: f64,
    pub k_attacker: usize,
    pub k_defender: usize,
    pub budget_domain: BudgetDomain,
    pub utility_attacker: f64,
    pub utility_defender: f64,
    pub multiplicity: Multiplicity,
}

impl Equilibrium {
    /// Fill in support sizes and utilities from an allocation.
    pub fn assemble(
        spec: &GameSpec,
        alloc: Allocation,
        lambda: f64,
        rho: f64,
        budget_domain: BudgetDomain,
        multiplicity: Multiplicity,
    ) -> Result<Self, ModelError> {
        let (utility_attacker, utility_defender) = utilities(spec, &alloc)?;
        Ok(Equilibrium {
            k_attacker: support_size(&alloc.x),
            k_defender: support_size(&alloc.y),
            alloc,
            lambda,
            rho,
            budget_domain,
            utility_attacker,
            utility_defender,
            multiplicity,
        })
    }
}

pub fn support_size(v: &[f64]) -> usize {
    v.iter().filter(|&&z| z > 0.0).count()
}

/// `(U_A, U_D)` for an allocation.
pub fn utilities(spec: &GameSpec, alloc: &Allocation) -> Result<(f64, f64), ModelError> {
    let mut loss = 0.0;
    for ((w, &x), &y) in spec.weights.iter().zip(&alloc.x).zip(&alloc.y) {
        loss += w * spec.breach_probability(x, y)?;
    }
    let spent_a: f64 = alloc.x.iter().sum();
    let spent_d: f64 = alloc.y.iter().sum();
    Ok((
        loss - spec.cost_attacker * spent_a,
        -loss - spec.cost_defender * spent_d,
    ))
}

/// A violated modelling assumption.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub assumption: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.assumption, self.detail)
    }
}

pub fn validate_spec(spec: &GameSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |assumption: &str, detail: String| {
        out.push(Violation {
            assumption: assumption.to_string(),
            detail,
        })
    };

    if spec.n == 0 || spec.n != spec.weights.len() {
        push(
            "target count mismatch",
            format!("n = {} but {} weights given", spec.n, spec.weights.len()),
        );
    }
    if let Some(w) = spec.weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        push("weights not positive", format!("found weight {w}"));
    }
    if let Some(i) = spec.weights.windows(2).position(|p| !(p[0] > p[1])) {
        push(
            "weights not descending",
            format!(
                "w_{} = {} is not above w_{} = {}",
                i + 1,
                spec.weights[i],
                i + 2,
                spec.weights[i + 1]
            ),
        );
    }
    for (name, c) in [("c", spec.cost_attacker), ("ĉ", spec.cost_defender)] {
        if !(c > 0.0 && c.is_finite()) {
            push("unit costs not positive", format!("{name} = {c}"));
        }
    }
    for (name, b) in [("X_A", spec.budget_attacker), ("Y_D", spec.budget_defender)] {
        if !(b > 0.0 && b.is_finite()) {
            push("budgets not positive and finite", format!("{name} = {b}"));
        }
    }
    for eff in [&spec.attack_eff, &spec.defence_eff] {
        for detail in eff.parameter_violations() {
            push("efficiency parameters invalid", detail);
        }
    }

    match spec.model {
        BreachingModel::ProductForm => {
            if !matches!(spec.attack_eff, EfficiencyFunction::ExpAttack { .. }) {
                push(
                    "attack efficiency family",
                    format!("ProductForm needs ExpAttack, got {}", spec.attack_eff.family_name()),
                );
            }
            if !matches!(
                spec.defence_eff,
                EfficiencyFunction::InvG { .. } | EfficiencyFunction::ExpG { .. } | EfficiencyFunction::QuadG { .. }
            ) {
                push(
                    "defence efficiency family",
                    format!(
                        "ProductForm needs InvG, ExpG or QuadG, got {}",
                        spec.defence_eff.family_name()
                    ),
                );
            }
        }
        BreachingModel::ProportionForm => {
            if !matches!(
                spec.attack_eff,
                EfficiencyFunction::ExpAttack { .. } | EfficiencyFunction::Power { .. }
            ) {
                push(
                    "attack efficiency family",
                    format!(
                        "ProportionForm needs Power or ExpAttack, got {}",
                        spec.attack_eff.family_name()
                    ),
                );
            }
            if matches!(spec.defence_eff, EfficiencyFunction::Linear { .. }) {
                push(
                    "defence efficiency family",
                    "ProportionForm does not accept Linear".to_string(),
                );
            }
        }
        BreachingModel::LinearMatrix => {
            let g = spec.gamma;
            if !(0.0..1.0).contains(&g) {
                push("gamma outside [0, 1)", format!("γ = {g}"));
            }
            if spec.attack_eff
                != (EfficiencyFunction::Linear {
                    intercept: 0.0,
                    slope: 1.0,
                })
            {
                push("attack efficiency family", "LinearMatrix needs f(x) = x".to_string());
            }
            if spec.defence_eff
                != (EfficiencyFunction::Linear {
                    intercept: 1.0,
                    slope: -(1.0 - g),
                })
            {
                push(
                    "defence efficiency family",
                    format!("LinearMatrix needs g̃(y) = 1 - {}y", 1.0 - g),
                );
            }
            if spec.cap_budgets_at_one {
                for (name, b) in [("X_A", spec.budget_attacker), ("Y_D", spec.budget_defender)] {
                    if b > 1.0 {
                        push("probability budgets exceed 1", format!("{name} = {b}"));
                    }
                }
            }
            if let Some(w) = spec.weights.iter().find(|&&w| !(w > spec.cost_attacker)) {
                push(
                    "non-triviality w_i > c fails",
                    format!("w = {w} against c = {}", spec.cost_attacker),
                );
            }
            if let Some(w) = spec.weights.iter().find(|&&w| g * w > spec.cost_attacker) {
                push(
                    "non-triviality γw_i <= c fails",
                    format!("γw = {} against c = {}", g * w, spec.cost_attacker),
                );
            }
        }
    }
    if spec.model != BreachingModel::LinearMatrix && spec.gamma != 0.0 {
        push("gamma only applies to LinearMatrix", format!("γ = {}", spec.gamma));
    }
    out
}

/// `validate_spec` as a `Result`.
pub fn ensure_valid(spec: &GameSpec) -> Result<(), ModelError> {
    let v = validate_spec(spec);
    if v.is_empty() {
        Ok(())
    } else {
        Err(ModelError::InvalidSpec(v.iter().map(ToString::to_string).collect()))
    }
}
