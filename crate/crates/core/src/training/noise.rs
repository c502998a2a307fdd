use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::numerics::StateVector;

/// Root mean square over every entry of every state.
pub fn rms(data: &[StateVector]) -> f64 {
    let (sum, n) = data.iter().fold((0.0, 0usize), |(s, n), u| {
        (s + u.values().iter().map(|v| v * v).sum::<f64>(), n + u.len())
    });
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Zero-mean Gaussian noise with standard deviation `level · rms(data)`.
///
/// # Panics
/// If `level` is negative or not finite.
pub fn add_observation_noise(data: &[StateVector], level: f64, seed: u64) -> Vec<StateVector> {
    assert!(level.is_finite() && level >= 0.0, "noise level must be nonnegative, got {level}");
    if level == 0.0 {
        return data.to_vec();
    }
    let sigma = level * rms(data);
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    data.iter()
        .map(|u| {
            let values = u.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
            u.with_values(values).expect("same length")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Grid, Grid1D};

    fn unit_rms_signal() -> Vec<StateVector> {
        let g = Grid1D::new(0.0, 1.0, 500, true).unwrap();
        (0..4)
            .map(|k| {
                let v = g
                    .points()
                    .iter()
                    .map(|x| 2f64.sqrt() * (2.0 * std::f64::consts::PI * (x + 0.1 * k as f64)).sin())
                    .collect();
                StateVector::new(Grid::Line(g), 1, v).unwrap()
            })
            .collect()
    }

    #[test]
    fn zero_level_is_identity() {
        let d = unit_rms_signal();
        assert_eq!(add_observation_noise(&d, 0.0, 1), d);
    }

    #[test]
    fn empirical_std_matches_level() {
        let d = unit_rms_signal();
        assert!((rms(&d) - 1.0).abs() < 1e-12);
        let noisy = add_observation_noise(&d, 0.1, 5);
        let diffs: Vec<f64> = noisy
            .iter()
            .zip(&d)
            .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect::<Vec<_>>())
            .collect();
        assert!(diffs.len() >= 1000);
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let std = (diffs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / diffs.len() as f64).sqrt();
        assert!((0.08..=0.12).contains(&std), "std {std}");
    }

    #[test]
    fn seeded() {
        let d = unit_rms_signal();
        assert_eq!(add_observation_noise(&d, 0.1, 9), add_observation_noise(&d, 0.1, 9));
        assert_ne!(add_observation_noise(&d, 0.1, 9), add_observation_noise(&d, 0.1, 10));
    }
}
