use serde::{Deserialize, Serialize};

use super::{ExperimentId, Problem, ProblemKind, Result};
use crate::diagnostics::{
    posteriori_bound_check, rollout_deviation_check, BoundStatus, ConsistencyReport, ProbeConfig, Reference,
    RolloutReport,
};
use crate::numerics::StateVector;
use crate::training::Surrogate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledConsistency {
    pub label: String,
    pub report: ConsistencyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRollout {
    pub label: String,
    pub report: RolloutReport,
}

/// Fixed-point and rollout certificates of one surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub experiment: ExperimentId,
    pub consistency: Vec<LabeledConsistency>,
    pub rollout: Vec<LabeledRollout>,
}

impl Diagnosis {
    /// No certificate was violated (inapplicable and bound-only count as fine).
    pub fn all_satisfied(&self) -> bool {
        self.consistency.iter().all(|c| c.report.status != BoundStatus::Violated)
            && self.rollout.iter().all(|r| r.report.all_satisfied)
    }

    pub fn table(&self) -> String {
        let mut out = format!("diagnosis for {}\n", self.experiment);
        for c in &self.consistency {
            out.push_str(&format!("\n[fixed point] {}\n{}", c.label, c.report.table()));
        }
        for r in &self.rollout {
            out.push_str(&format!("\n[rollout] {}\n{}", r.label, r.report.table()));
        }
        out
    }
}

fn label(problem: &Problem, params: &[f64]) -> String {
    let parts: Vec<String> = problem
        .id()
        .param_names()
        .iter()
        .zip(params)
        .map(|(n, v)| format!("{n}={v}"))
        .collect();
    if parts.is_empty() {
        "default".into()
    } else {
        parts.join(",")
    }
}

/// Representative training parameters: first, middle and last.
fn representatives(problem: &Problem) -> Vec<Vec<f64>> {
    let p = &problem.train_params;
    let mut idx = vec![0, p.len() / 2, p.len() - 1];
    idx.dedup();
    idx.into_iter().map(|i| p[i].clone()).collect()
}

/// Certificates for `surrogate`.
///
/// Steady problems get fixed-point bounds against the analytic equilibrium.
/// Transient problems get rollout bounds; the linear ODEs also get the
/// fixed-point bound at `y* = k/α` with no inflation, since their sampled
/// ratio is exact.
pub fn diagnose(problem: &Problem, surrogate: &Surrogate, probes: &ProbeConfig, safety: f64) -> Result<Diagnosis> {
    let id = problem.id();
    let steps = problem.settings.solver.steps;
    let mut consistency = Vec::new();
    let mut rollout = Vec::new();
    if id.kind() == ProblemKind::Steady {
        for alpha in [1.0, 1.5, 2.0] {
            let params = [alpha];
            let u = surrogate.predict(0.0, &params)?;
            let star = problem.reference(&params, 0.0)?;
            let report = posteriori_bound_check(
                &u,
                problem.solver(&params)?.as_ref(),
                steps,
                Some(Reference::Analytic(star)),
                probes,
                safety,
            )?;
            consistency.push(LabeledConsistency {
                label: label(problem, &params),
                report,
            });
        }
    } else {
        for params in representatives(problem) {
            let solver = problem.solver(&params)?;
            let report = rollout_deviation_check(surrogate, solver.as_ref(), &params, &problem.times, steps, probes, safety)?;
            rollout.push(LabeledRollout {
                label: label(problem, &params),
                report,
            });
            if matches!(id, ExperimentId::OdeForward | ExperimentId::OdeInverse) {
                let (alpha, k) = if id == ExperimentId::OdeForward { (params[0], 0.0) } else { (params[0], params[1]) };
                let mid = problem.times[problem.times.len() / 2];
                let u = surrogate.predict(mid, &params)?;
                let star = StateVector::scalar(k / alpha);
                let report =
                    posteriori_bound_check(&u, solver.as_ref(), steps, Some(Reference::Analytic(star)), probes, 1.0)?;
                consistency.push(LabeledConsistency {
                    label: format!("{},t={mid}", label(problem, &params)),
                    report,
                });
            }
        }
    }
    Ok(Diagnosis {
        experiment: id,
        consistency,
        rollout,
    })
}
