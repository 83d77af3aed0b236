//! Per-target regions of the shadow-price plane for the product form.
//!
//! At prices `(λ, ρ)` a target is abandoned by both players (R1), attacked
//! but undefended (R2), defended but unattacked (R3) or contested (R4).

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolveError};
use crate::model::{BreachingModel, GameSpec};
use crate::product::DualPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    R1,
    R2,
    R3,
    R4,
}

/// One row of a region boundary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub lambda: f64,
    /// λ at and above which the target is in R1.
    pub r1_threshold: f64,
    /// ρ at and above which the target is in R2 (for λ below the R1 threshold).
    pub r2_rho_boundary: f64,
}

/// `w f'(0) g̃(0) - c`: the attacker's marginal profit at the origin.
fn attack_margin_at_origin(spec: &GameSpec, i: usize) -> Result<f64> {
    let w = spec.weights[i];
    Ok(w * spec.attack_eff.derivative(0.0)? * spec.defence_eff.value(0.0)? - spec.cost_attacker)
}

/// The defender's marginal profit at `y = 0` against the undefended attack
/// at price λ, before taking the positive part.
fn defence_margin_unclamped(spec: &GameSpec, i: usize, lambda: f64) -> Result<f64> {
    let w = spec.weights[i];
    let gt0 = spec.defence_eff.value(0.0)?;
    let x = spec
        .attack_eff
        .inverse_derivative((spec.cost_attacker + lambda) / (w * gt0))?;
    Ok(-w * spec.attack_eff.value(x)? * spec.defence_eff.derivative(0.0)? - spec.cost_defender)
}

fn require_product(spec: &GameSpec) -> Result<()> {
    if spec.model != BreachingModel::ProductForm {
        return Err(SolveError::WrongModel {
            expected: "ProductForm",
        });
    }
    Ok(())
}

pub fn classify_target(i: usize, duals: DualPair, spec: &GameSpec) -> Result<RegionLabel> {
    require_product(spec)?;
    let DualPair { lambda, rho } = duals;
    let w = spec.weights[i];
    let r1 = attack_margin_at_origin(spec, i)?.max(0.0);
    // defending an unattacked target; equals -ĉ because f(0) = 0
    let r3 = -w * spec.attack_eff.value(0.0)? * spec.defence_eff.derivative(0.0)? - spec.cost_defender;
    if lambda >= r1 && rho >= r3.max(0.0) {
        return Ok(RegionLabel::R1);
    }
    if lambda < r1 && rho >= defence_margin_unclamped(spec, i, lambda)?.max(0.0) {
        return Ok(RegionLabel::R2);
    }
    if lambda >= r1 && rho < r3 {
        return Ok(RegionLabel::R3);
    }
    Ok(RegionLabel::R4)
}

pub fn region_boundaries(i: usize, spec: &GameSpec, lambda_grid: &[f64]) -> Result<Vec<RegionBoundary>> {
    require_product(spec)?;
    let r1 = attack_margin_at_origin(spec, i)?.max(0.0);
    lambda_grid
        .iter()
        .map(|&lambda| {
            Ok(RegionBoundary {
                lambda,
                r1_threshold: r1,
                r2_rho_boundary: defence_margin_unclamped(spec, i, lambda)?.max(0.0),
            })
        })
        .collect()
}

/// Evenly spaced λ values on `[0, lambda_max]`.
pub fn lambda_grid(lambda_max: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(2);
    (0..steps).map(|k| lambda_max * k as f64 / (steps - 1) as f64).collect()
}
