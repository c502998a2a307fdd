use serde::{Deserialize, Serialize};

use super::{check_safety, estimate_contraction, perturbation_probes, within_bound, ProbeConfig, Result};
use crate::numerics::{discrete_l2_norm, StateVector};
use crate::solvers::Solver;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// `u − T(u)`.
    pub state: StateVector,
    pub norm: f64,
}

/// `u − S[u]` after `steps` solver steps, with its norm.
pub fn fixed_point_residual(u: &StateVector, solver: &dyn Solver, steps: usize) -> Result<Residual> {
    let tu = solver.apply(u, steps)?;
    let state = u.sub(&tu)?;
    let norm = discrete_l2_norm(&state)?;
    Ok(Residual { state, norm })
}

/// Where the fixed point for a bound check comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Analytic(StateVector),
    /// `100·steps` further solver steps from the checked state.
    LongRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Satisfied,
    Violated,
    /// No reference supplied; only the bound value is reported.
    BoundOnly,
    /// Inflated contraction estimate is not below 1.
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub residual_norm: f64,
    /// Sampled maximum ratio before inflation.
    pub contraction_raw: f64,
    pub safety: f64,
    /// `contraction_raw · safety`, the value used in the bound.
    pub contraction: f64,
    pub bound: Option<f64>,
    pub measured: Option<f64>,
    pub satisfied: Option<bool>,
    pub status: BoundStatus,
    pub reference: Option<String>,
    /// Residual of a long-run reference, when one was used.
    pub reference_residual: Option<f64>,
    pub pairs_used: usize,
}

/// Assemble a report from its measured ingredients.
pub fn consistency_report(
    residual_norm: f64,
    contraction_raw: f64,
    safety: f64,
    measured: Option<f64>,
) -> Result<ConsistencyReport> {
    check_safety(safety)?;
    let q = contraction_raw * safety;
    let mut report = ConsistencyReport {
        residual_norm,
        contraction_raw,
        safety,
        contraction: q,
        bound: None,
        measured,
        satisfied: None,
        status: BoundStatus::Inapplicable,
        reference: None,
        reference_residual: None,
        pairs_used: 0,
    };
    if q < 1.0 {
        let bound = residual_norm / (1.0 - q);
        report.bound = Some(bound);
        match measured {
            Some(m) => {
                let ok = within_bound(m, bound);
                report.satisfied = Some(ok);
                report.status = if ok { BoundStatus::Satisfied } else { BoundStatus::Violated };
            }
            None => report.status = BoundStatus::BoundOnly,
        }
    }
    Ok(report)
}

/// Long solver run from `u`; returns the limit and its own residual norm.
pub fn long_run_reference(u: &StateVector, solver: &dyn Solver, steps: usize) -> Result<(StateVector, f64)> {
    let limit = solver.apply(u, 100 * steps)?;
    let r = fixed_point_residual(&limit, solver, steps)?;
    Ok((limit, r.norm))
}

/// Residual bound `‖u − u*‖ ≤ ‖R(u)‖/(1−q̂)` with `q̂` sampled around `u`.
///
/// The reference, when present, joins the probe set so the pair `(u, u*)`
/// is always among the sampled ratios.
pub fn posteriori_bound_check(
    u: &StateVector,
    solver: &dyn Solver,
    steps: usize,
    reference: Option<Reference>,
    probes: &ProbeConfig,
    safety: f64,
) -> Result<ConsistencyReport> {
    check_safety(safety)?;
    let residual = fixed_point_residual(u, solver, steps)?;
    let (star, label, star_residual) = match reference {
        None => (None, None, None),
        Some(Reference::Analytic(s)) => (Some(s), Some("analytic".to_string()), None),
        Some(Reference::LongRun) => {
            let (s, r) = long_run_reference(u, solver, steps)?;
            (Some(s), Some(format!("long_run_{}_steps", 100 * steps)), Some(r))
        }
    };
    let mut set = perturbation_probes(u, solver, probes)?;
    let mut measured = None;
    if let Some(s) = &star {
        measured = Some(discrete_l2_norm(&u.sub(s)?)?);
        set.insert(1, s.clone());
    }
    let q = match estimate_contraction(solver, steps, &set, probes.max_pairs) {
        Ok(q) => q,
        // every probe coincides with u, so u is already the reference
        Err(super::DiagnosticsError::CoincidentProbes(_)) if residual.norm == 0.0 => super::ContractionEstimate {
            q: 0.0,
            contractive: true,
            pairs_used: 0,
            pairs_skipped: 0,
        },
        Err(e) => return Err(e),
    };
    let mut report = consistency_report(residual.norm, q.q, safety, measured)?;
    report.reference = label;
    report.reference_residual = star_residual;
    report.pairs_used = q.pairs_used;
    Ok(report)
}

impl ConsistencyReport {
    pub fn table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        let mut out = String::new();
        out.push_str(&format!("{:<22}{:.6e}\n", "residual norm", self.residual_norm));
        out.push_str(&format!("{:<22}{:.6e}\n", "contraction (raw)", self.contraction_raw));
        out.push_str(&format!("{:<22}{:.6e} (x{})\n", "contraction (used)", self.contraction, self.safety));
        out.push_str(&format!("{:<22}{}\n", "bound", opt(self.bound)));
        out.push_str(&format!("{:<22}{}\n", "measured distance", opt(self.measured)));
        if let Some(r) = &self.reference {
            out.push_str(&format!("{:<22}{}\n", "reference", r));
        }
        if let Some(r) = self.reference_residual {
            out.push_str(&format!("{:<22}{:.6e}\n", "reference residual", r));
        }
        out.push_str(&format!("{:<22}{:?}\n", "status", self.status));
        out
    }
}
