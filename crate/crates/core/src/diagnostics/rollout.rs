use serde::{Deserialize, Serialize};

use super::{check_safety, estimate_lipschitz_pairs, perturbation_probes, within_bound, DiagnosticsError, ProbeConfig, Result};
use crate::numerics::{discrete_l2_norm, StateVector};
use crate::solvers::Solver;
use crate::training::Surrogate;

/// Accumulated one-step residuals against the measured drift from a solver
/// rollout started at the network's initial state. Index `n` is time level `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutReport {
    pub times: Vec<f64>,
    /// `ε_n = ‖û^{n+1} − T(û^n)‖`, one per interval.
    pub residuals: Vec<f64>,
    pub lipschitz_raw: f64,
    pub safety: f64,
    pub lipschitz: f64,
    pub bounds: Vec<f64>,
    pub deviations: Vec<f64>,
    pub satisfied: Vec<bool>,
    pub all_satisfied: bool,
    pub pairs_used: usize,
}

/// `b_n = Σ_{k<n} L^{n−1−k} ε_k`, with `b_0 = 0`.
pub fn rollout_bounds(residuals: &[f64], lipschitz: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(residuals.len() + 1);
    let mut b = 0.0;
    out.push(b);
    for e in residuals {
        b = lipschitz * b + e;
        out.push(b);
    }
    out
}

impl RolloutReport {
    /// Same measurements, bounds recomputed with another constant.
    pub fn with_lipschitz(&self, lipschitz: f64) -> Self {
        let mut r = self.clone();
        r.lipschitz = lipschitz;
        r.bounds = rollout_bounds(&r.residuals, lipschitz);
        r.satisfied = r.deviations.iter().zip(&r.bounds).map(|(d, b)| within_bound(*d, *b)).collect();
        r.all_satisfied = r.satisfied.iter().all(|s| *s);
        r
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "lipschitz raw {:.6e}, used {:.6e} (x{}), pairs {}\n",
            self.lipschitz_raw, self.lipschitz, self.safety, self.pairs_used
        );
        out.push_str(&format!("{:>4} {:>10} {:>14} {:>14} {:>14}  ok\n", "n", "t", "residual", "bound", "deviation"));
        for n in 0..self.bounds.len() {
            let eps = if n == 0 { "-".to_string() } else { format!("{:.6e}", self.residuals[n - 1]) };
            let t = self.times.get(n).map_or("-".to_string(), |t| format!("{t:.4}"));
            out.push_str(&format!(
                "{:>4} {:>10} {:>14} {:>14.6e} {:>14.6e}  {}\n",
                n,
                t,
                eps,
                self.bounds[n],
                self.deviations[n],
                if self.satisfied[n] { "yes" } else { "NO" }
            ));
        }
        out
    }
}

/// Rollout check on precomputed network levels `û^0, …, û^N`.
///
/// `L̂` is sampled on the pairs `(û^k, u^k)` the telescoping argument needs
/// plus seeded perturbations around every `û^k`.
pub fn rollout_report_from_levels(
    predicted: &[StateVector],
    solver: &dyn Solver,
    steps: usize,
    probes: &ProbeConfig,
    safety: f64,
) -> Result<RolloutReport> {
    check_safety(safety)?;
    if predicted.len() < 2 {
        return Err(DiagnosticsError::InvalidInput("rollout needs at least two levels".into()));
    }
    let mut residuals = Vec::with_capacity(predicted.len() - 1);
    for w in predicted.windows(2) {
        let t = solver.apply(&w[0], steps)?;
        residuals.push(discrete_l2_norm(&w[1].sub(&t)?)?);
    }
    let mut rollout = vec![predicted[0].clone()];
    for _ in 1..predicted.len() {
        let next = solver.apply(rollout.last().expect("nonempty"), steps)?;
        rollout.push(next);
    }
    let mut deviations = Vec::with_capacity(predicted.len());
    for (p, u) in predicted.iter().zip(&rollout) {
        deviations.push(discrete_l2_norm(&p.sub(u)?)?);
    }

    let mut neighbours = Vec::new();
    for (k, p) in predicted[..predicted.len() - 1].iter().enumerate() {
        let cfg = ProbeConfig {
            seed: probes.seed.wrapping_add(k as u64),
            ..probes.clone()
        };
        neighbours.push(perturbation_probes(p, solver, &cfg)?);
    }
    // every rollout pair is kept; perturbation pairs are thinned to the limit
    let mut pairs: Vec<(&StateVector, &StateVector)> = (0..predicted.len() - 1).map(|k| (&predicted[k], &rollout[k])).collect();
    let local: Vec<(&StateVector, &StateVector)> = neighbours
        .iter()
        .enumerate()
        .flat_map(|(k, set)| set[1..].iter().map(move |q| (&predicted[k], q)))
        .collect();
    let stride = local.len().div_ceil(probes.max_pairs.max(1)).max(1);
    pairs.extend(local.into_iter().step_by(stride));
    let l = estimate_lipschitz_pairs(solver, steps, &pairs)?;
    let mut report = RolloutReport {
        times: Vec::new(),
        residuals,
        lipschitz_raw: l.value,
        safety,
        lipschitz: 0.0,
        bounds: Vec::new(),
        deviations,
        satisfied: Vec::new(),
        all_satisfied: false,
        pairs_used: l.pairs_used,
    }
    .with_lipschitz(l.value * safety);
    report.pairs_used = l.pairs_used;
    Ok(report)
}

/// Network levels at `times` for `params`, checked against the solver rollout.
pub fn rollout_deviation_check(
    surrogate: &Surrogate,
    solver: &dyn Solver,
    params: &[f64],
    times: &[f64],
    steps: usize,
    probes: &ProbeConfig,
    safety: f64,
) -> Result<RolloutReport> {
    let predicted = surrogate.predict_levels(times, params)?;
    let mut report = rollout_report_from_levels(&predicted, solver, steps, probes, safety)?;
    report.times = times.to_vec();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::LinearOdeEuler;
    use proptest::prelude::*;

    fn exact_levels(s: &dyn Solver, y0: f64, levels: usize, steps: usize) -> Vec<StateVector> {
        let mut out = vec![StateVector::scalar(y0)];
        for _ in 1..levels {
            let next = s.apply(out.last().unwrap(), steps).unwrap();
            out.push(next);
        }
        out
    }

    #[test]
    fn exact_replay_has_no_residual() {
        let s = LinearOdeEuler::new(0.5, 1.0, 0.01).unwrap();
        let levels = exact_levels(&s, 2.0, 11, 10);
        let r = rollout_report_from_levels(&levels, &s, 10, &ProbeConfig::default(), 1.1).unwrap();
        assert!(r.residuals.iter().all(|e| *e == 0.0));
        assert!(r.deviations.iter().all(|d| *d == 0.0));
        assert!(r.all_satisfied);
    }

    #[test]
    fn bound_holds_for_perturbed_decay_levels() {
        let s = LinearOdeEuler::new(0.8, -0.5, 0.01).unwrap();
        let mut levels = exact_levels(&s, 3.0, 21, 10);
        for (i, l) in levels.iter_mut().enumerate().skip(1) {
            l.values_mut()[0] += 0.01 * ((i * 7 % 5) as f64 - 2.0);
        }
        let r = rollout_report_from_levels(&levels, &s, 10, &ProbeConfig::default(), 1.1).unwrap();
        assert!(r.all_satisfied, "{}", r.table());
        assert!((r.lipschitz_raw - 0.992f64.powi(10)).abs() < 1e-12);
        assert_eq!(r.bounds.len(), 21);
    }

    #[test]
    fn bounds_recursion_matches_sum() {
        let eps = [0.1, 0.0, 0.3, 0.05];
        let l: f64 = 1.7;
        let b = rollout_bounds(&eps, l);
        for n in 0..=eps.len() {
            let direct: f64 = (0..n).map(|k| l.powi((n - 1 - k) as i32) * eps[k]).sum();
            assert!((b[n] - direct).abs() < 1e-14);
        }
    }

    fn report_strategy() -> impl Strategy<Value = RolloutReport> {
        (prop::collection::vec(0.0..1.0f64, 1..12), 0.0..3.0f64, prop::collection::vec(0.0..2.0f64, 13)).prop_map(
            |(eps, l, dev)| {
                let n = eps.len();
                RolloutReport {
                    times: (0..=n).map(|i| i as f64 * 0.1).collect(),
                    residuals: eps,
                    lipschitz_raw: l,
                    safety: 1.0,
                    lipschitz: 0.0,
                    bounds: Vec::new(),
                    deviations: dev[..=n].to_vec(),
                    satisfied: Vec::new(),
                    all_satisfied: false,
                    pairs_used: 1,
                }
                .with_lipschitz(l)
            },
        )
    }

    proptest! {
        #[test]
        fn larger_lipschitz_never_breaks_the_bound(r in report_strategy(), extra in 0.0..2.0f64) {
            let bigger = r.with_lipschitz(r.lipschitz + extra);
            for (a, b) in r.satisfied.iter().zip(&bigger.satisfied) {
                prop_assert!(!a || *b);
            }
        }

        #[test]
        fn bounds_grow_when_expanding(r in report_strategy()) {
            let r = r.with_lipschitz(1.0 + r.lipschitz);
            prop_assert!(r.bounds.windows(2).all(|w| w[1] >= w[0]));
        }

        #[test]
        fn report_json_round_trip(r in report_strategy()) {
            let text = serde_json::to_string(&r).unwrap();
            let back: RolloutReport = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
