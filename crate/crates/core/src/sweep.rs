//! Budget sweeps rendered as CSV.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::GameSpec;
use crate::solve::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    BudgetAttacker,
    BudgetDefender,
    /// Full grid over both budgets, attacker budget outermost.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepOutput {
    NE,
    Utilities,
    Duals,
    Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub spec: GameSpec,
    pub axis: SweepAxis,
    /// `(lo, hi, steps)`, inclusive of both ends.
    pub range: (f64, f64, usize),
    #[serde(default = "all_outputs")]
    pub outputs: Vec<SweepOutput>,
}

fn all_outputs() -> Vec<SweepOutput> {
    vec![
        SweepOutput::NE,
        SweepOutput::Utilities,
        SweepOutput::Duals,
        SweepOutput::Domain,
    ]
}

impl SweepRequest {
    pub fn problems(&self) -> Vec<String> {
        let (lo, hi, steps) = self.range;
        let mut out = Vec::new();
        if !(lo < hi) {
            out.push(format!("range needs lo < hi, got ({lo}, {hi})"));
        }
        if steps < 2 {
            out.push(format!("range needs at least 2 steps, got {steps}"));
        }
        out
    }

    fn values(&self) -> Vec<f64> {
        let (lo, hi, steps) = self.range;
        (0..steps)
            .map(|k| {
                if k + 1 == steps {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (steps - 1) as f64
                }
            })
            .collect()
    }

    /// Budget pairs in row order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let v = self.values();
        match self.axis {
            SweepAxis::BudgetAttacker => v.iter().map(|&a| (a, self.spec.budget_defender)).collect(),
            SweepAxis::BudgetDefender => v.iter().map(|&d| (self.spec.budget_attacker, d)).collect(),
            SweepAxis::Both => v.iter().flat_map(|&a| v.iter().map(move |&d| (a, d))).collect(),
        }
    }

    fn wants(&self, o: SweepOutput) -> bool {
        self.outputs.contains(&o)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = match self.axis {
            SweepAxis::BudgetAttacker => vec!["budget_attacker".into()],
            SweepAxis::BudgetDefender => vec!["budget_defender".into()],
            SweepAxis::Both => vec!["budget_attacker".into(), "budget_defender".into()],
        };
        if self.wants(SweepOutput::Duals) {
            h.extend(["lambda".into(), "rho".into()]);
        }
        if self.wants(SweepOutput::NE) {
            h.extend(["k_attacker".into(), "k_defender".into()]);
        }
        if self.wants(SweepOutput::Domain) {
            h.push("domain".into());
        }
        if self.wants(SweepOutput::Utilities) {
            h.extend(["utility_attacker".into(), "utility_defender".into()]);
        }
        if self.wants(SweepOutput::NE) {
            h.extend((1..=self.spec.n).map(|i| format!("x_{i}")));
            h.extend((1..=self.spec.n).map(|i| format!("y_{i}")));
        }
        h.push("error".into());
        h
    }

    fn row(&self, (xa, yd): (f64, f64)) -> Vec<String> {
        let mut row: Vec<String> = match self.axis {
            SweepAxis::BudgetAttacker => vec![xa.to_string()],
            SweepAxis::BudgetDefender => vec![yd.to_string()],
            SweepAxis::Both => vec![xa.to_string(), yd.to_string()],
        };
        let width = self.header().len() - row.len() - 1;
        match solve(&self.spec.with_budgets(xa, yd)) {
            Ok(eq) => {
                if self.wants(SweepOutput::Duals) {
                    row.extend([eq.lambda.to_string(), eq.rho.to_string()]);
                }
                if self.wants(SweepOutput::NE) {
                    row.extend([eq.k_attacker.to_string(), eq.k_defender.to_string()]);
                }
                if self.wants(SweepOutput::Domain) {
                    row.push(eq.budget_domain.to_string());
                }
                if self.wants(SweepOutput::Utilities) {
                    row.extend([eq.utility_attacker.to_string(), eq.utility_defender.to_string()]);
                }
                if self.wants(SweepOutput::NE) {
                    row.extend(eq.alloc.x.iter().chain(&eq.alloc.y).map(f64::to_string));
                }
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), width));
                row.push(e.to_string());
            }
        }
        row
    }

    /// Rows in grid order; solves run in parallel.
    pub fn rows(&self) -> Vec<Vec<String>> {
        self.points().par_iter().map(|&p| self.row(p)).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.header())?;
        for r in self.rows() {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
