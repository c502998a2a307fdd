use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Result, COINCIDENT_TOLERANCE};
use crate::numerics::{discrete_l2_norm, StateVector};
use crate::solvers::Solver;

/// Sampled ratio `max ‖T(u)−T(v)‖/‖u−v‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEstimate {
    pub value: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionEstimate {
    pub q: f64,
    pub contractive: bool,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// Seeded perturbations around a base state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Perturbation sizes relative to the RMS of the base.
    pub magnitudes: Vec<f64>,
    pub per_magnitude: usize,
    pub seed: u64,
    /// Upper limit on evaluated pairs.
    pub max_pairs: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            magnitudes: vec![1e-3, 1e-2, 1e-1],
            per_magnitude: 2,
            seed: 0,
            max_pairs: 64,
        }
    }
}

/// The base followed by `per_magnitude` Gaussian perturbations per magnitude.
///
/// Each perturbation is projected off the solver's conserved directions
/// before scaling. A zero base uses the magnitudes as absolute sizes.
pub fn perturbation_probes(base: &StateVector, solver: &dyn Solver, config: &ProbeConfig) -> Result<Vec<StateVector>> {
    if base.is_empty() {
        return Err(DiagnosticsError::InvalidInput("empty base state".into()));
    }
    let n = base.len() as f64;
    let rms = (base.values().iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let reference = if rms > 0.0 { rms } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut probes = vec![base.clone()];
    for &m in &config.magnitudes {
        for _ in 0..config.per_magnitude {
            let mut dir: Vec<f64> = (0..base.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            solver.project_perturbation(&mut dir);
            let dir_rms = (dir.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
            if dir_rms == 0.0 {
                continue;
            }
            let c = m * reference / dir_rms;
            let values = base.values().iter().zip(&dir).map(|(b, d)| b + c * d).collect();
            probes.push(base.with_values(values)?);
        }
    }
    Ok(probes)
}

/// All index pairs `i<j`, in lexicographic order, truncated to `max_pairs`.
fn probe_pairs(count: usize, max_pairs: usize) -> Vec<(usize, usize)> {
    (0..count)
        .flat_map(|i| (i + 1..count).map(move |j| (i, j)))
        .take(max_pairs)
        .collect()
}

/// Largest pairwise ratio over explicitly given pairs.
pub fn estimate_lipschitz_pairs(
    solver: &dyn Solver,
    steps: usize,
    pairs: &[(&StateVector, &StateVector)],
) -> Result<MapEstimate> {
    let mut best = 0.0f64;
    let mut used = 0;
    let mut skipped = 0;
    for (u, v) in pairs {
        let gap = discrete_l2_norm(&u.sub(v)?)?;
        if gap < COINCIDENT_TOLERANCE {
            skipped += 1;
            continue;
        }
        let tu = solver.apply(u, steps)?;
        let tv = solver.apply(v, steps)?;
        let ratio = discrete_l2_norm(&tu.sub(&tv)?)? / gap;
        best = best.max(ratio);
        used += 1;
    }
    if used == 0 {
        return Err(DiagnosticsError::CoincidentProbes(skipped));
    }
    Ok(MapEstimate {
        value: best,
        pairs_used: used,
        pairs_skipped: skipped,
    })
}

pub fn estimate_lipschitz(
    solver: &dyn Solver,
    steps: usize,
    probes: &[StateVector],
    max_pairs: usize,
) -> Result<MapEstimate> {
    if probes.len() < 2 {
        return Err(DiagnosticsError::TooFewProbes(probes.len()));
    }
    let pairs: Vec<_> = probe_pairs(probes.len(), max_pairs)
        .into_iter()
        .map(|(i, j)| (&probes[i], &probes[j]))
        .collect();
    estimate_lipschitz_pairs(solver, steps, &pairs)
}

pub fn estimate_contraction(
    solver: &dyn Solver,
    steps: usize,
    probes: &[StateVector],
    max_pairs: usize,
) -> Result<ContractionEstimate> {
    let m = estimate_lipschitz(solver, steps, probes, max_pairs)?;
    Ok(ContractionEstimate {
        q: m.value,
        contractive: m.value < 1.0,
        pairs_used: m.pairs_used,
        pairs_skipped: m.pairs_skipped,
    })
}
