use std::collections::BTreeMap;

use super::{ExperimentId, Problem, Result};
use crate::numerics::{discrete_l2_norm, StateVector};
use crate::training::Surrogate;

/// `sqrt(Σ_n ‖a_n − b_n‖² / Σ_n ‖b_n‖²)` over stacked time levels.
fn space_time_relative_l2(pred: &[StateVector], reference: &[StateVector]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, r) in pred.iter().zip(reference) {
        num += discrete_l2_norm(&p.sub(r)?)?.powi(2);
        den += discrete_l2_norm(r)?.powi(2);
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

fn key(prefix: &str, v: f64) -> String {
    format!("{prefix}_{v}")
}

/// Post-training metrics of a surrogate, keyed by name.
///
/// Reported errors use the quadrature-weighted discrete L2 norm.
pub fn evaluate(problem: &Problem, surrogate: &Surrogate, beta: Option<&[f64]>) -> Result<BTreeMap<String, f64>> {
    use ExperimentId::*;
    let mut m = BTreeMap::new();
    let id = problem.id();
    match id {
        BurgersForward | AllenCahnForward | AllenCahnInverse | KsForward | KsInverse => {
            let mut total = 0.0;
            for p in &problem.train_params {
                let pred = surrogate.predict_levels(&problem.times, p)?;
                let reference = problem.reference_levels(p)?;
                total += space_time_relative_l2(&pred, &reference)?;
            }
            m.insert("rel_l2_error".into(), total / problem.train_params.len() as f64);
        }
        FokkerPlanckSteady => {
            let mut errors = Vec::new();
            for i in 0..=10 {
                let alpha = 1.0 + 0.1 * i as f64;
                let pred = surrogate.predict(0.0, &[alpha])?;
                let e = discrete_l2_norm(&pred.sub(&problem.reference(&[alpha], 0.0)?)?)?;
                m.insert(key("l2_error_alpha", (alpha * 10.0).round() / 10.0), e);
                errors.push(e);
            }
            let below = errors.iter().filter(|e| **e < 1e-2).count() as f64;
            m.insert("l2_error_max".into(), errors.iter().cloned().fold(0.0, f64::max));
            m.insert("l2_error_mean".into(), errors.iter().sum::<f64>() / errors.len() as f64);
            m.insert("fraction_below_1e-2".into(), below / errors.len() as f64);
        }
        OdeForward => {
            // off-grid cases inside the trained ranges
            let mut errors = Vec::new();
            for alpha in [0.15, 0.45, 0.85] {
                for y0 in [1.25, 2.75, 4.25] {
                    let pred = surrogate.predict_levels(&problem.times, &[alpha, y0])?;
                    let reference = problem.reference_levels(&[alpha, y0])?;
                    errors.push(space_time_relative_l2(&pred, &reference)?);
                }
            }
            m.insert("l2_error_mean".into(), errors.iter().sum::<f64>() / errors.len() as f64);
            m.insert("l2_error_max".into(), errors.iter().cloned().fold(0.0, f64::max));
        }
        OdeInverse => {}
        LorenzForward => {
            let pred = surrogate.predict_levels(&problem.times, &[])?;
            let reference = problem.reference_levels(&[])?;
            let mut short = 0.0f64;
            let mut mean = 0.0;
            for ((t, p), r) in problem.times.iter().zip(&pred).zip(&reference) {
                let d = p.sub(r)?;
                if *t <= 0.5 + 1e-9 {
                    short = d.values().iter().fold(short, |acc, v| acc.max(v.abs()));
                }
                mean += discrete_l2_norm(&d)?;
            }
            m.insert("max_error_short".into(), short);
            m.insert("l2_error_mean".into(), mean / pred.len() as f64);
        }
    }
    if let (Some(beta), Some(inv)) = (beta, &problem.settings.inverse) {
        for (&i, b) in id.beta_indices().iter().zip(beta) {
            let name = id.param_names()[i];
            let truth = inv.truth[i];
            m.insert(format!("beta_{name}"), *b);
            m.insert(format!("beta_{name}_rel_error"), ((b - truth) / truth).abs());
        }
        let mut p = inv.truth.clone();
        for (&i, b) in id.beta_indices().iter().zip(beta) {
            p[i] = *b;
        }
        let (times, data) = problem.observations()?;
        let pred = surrogate.predict_levels(&times, &p)?;
        m.insert("observation_rel_l2_error".into(), space_time_relative_l2(&pred, &data)?);
    }
    Ok(m)
}
