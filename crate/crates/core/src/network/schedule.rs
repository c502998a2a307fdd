use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{NetworkError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrSchedule {
    Constant { base: f64, total: usize },
    Cosine { base: f64, min: f64, total: usize },
}

impl LrSchedule {
    pub fn total(&self) -> usize {
        match *self {
            LrSchedule::Constant { total, .. } | LrSchedule::Cosine { total, .. } => total,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LrSchedule::Constant { base, .. } => base.is_finite() && base > 0.0,
            LrSchedule::Cosine { base, min, .. } => {
                base.is_finite() && min.is_finite() && base > 0.0 && (0.0..=base).contains(&min)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(NetworkError::InvalidConfig(format!("bad learning-rate schedule {self:?}")))
        }
    }

    /// Rate at `step ∈ [0, total]`.
    pub fn rate(&self, step: usize) -> Result<f64> {
        let total = self.total();
        if step > total {
            return Err(NetworkError::StepOutOfRange { step, total });
        }
        Ok(match *self {
            LrSchedule::Constant { base, .. } => base,
            LrSchedule::Cosine { base, min, total } => {
                if total == 0 {
                    base
                } else {
                    let t = step as f64 / total as f64;
                    min + 0.5 * (base - min) * (1.0 + (PI * t).cos())
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_and_midpoint() {
        let s = LrSchedule::Cosine { base: 1e-3, min: 1e-5, total: 1000 };
        assert_eq!(s.rate(0).unwrap(), 1e-3);
        assert!((s.rate(1000).unwrap() - 1e-5).abs() < 1e-18);
        assert!((s.rate(500).unwrap() - (1e-3 + 1e-5) / 2.0).abs() < 1e-15);
        assert!(s.rate(1001).is_err());
        let c = LrSchedule::Constant { base: 2e-4, total: 10 };
        assert_eq!(c.rate(7).unwrap(), 2e-4);
    }

    #[test]
    fn validation() {
        assert!(LrSchedule::Cosine { base: 1e-3, min: 1e-2, total: 5 }.validate().is_err());
        assert!(LrSchedule::Constant { base: 0.0, total: 5 }.validate().is_err());
        assert!(LrSchedule::Cosine { base: 1e-3, min: 0.0, total: 5 }.validate().is_ok());
    }

    proptest! {
        #[test]
        fn cosine_stays_in_range(base in 1e-6f64..1.0, frac in 0.0f64..1.0, total in 1usize..5000, step_frac in 0.0f64..=1.0) {
            let min = base * frac;
            let s = LrSchedule::Cosine { base, min, total };
            let step = ((total as f64) * step_frac).floor() as usize;
            let r = s.rate(step).unwrap();
            prop_assert!(r >= min * (1.0 - 1e-12) && r <= base * (1.0 + 1e-12));
            if step < total {
                prop_assert!(s.rate(step + 1).unwrap() <= r * (1.0 + 1e-12));
            }
        }
    }
}
