use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss_total: f64,
    pub loss_ic: f64,
    pub loss_solver: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_inverse: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: String,
    pub seed: u64,
    pub batch_size: usize,
    pub granularity: String,
    pub epochs: Vec<EpochRecord>,
    pub wall_clock_seconds: f64,
    #[serde(default)]
    pub final_metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl RunRecord {
    pub fn new(kind: &str, seed: u64, batch_size: usize, granularity: &str) -> Self {
        Self {
            kind: kind.to_string(),
            seed,
            batch_size,
            granularity: granularity.to_string(),
            epochs: Vec::new(),
            wall_clock_seconds: 0.0,
            final_metrics: BTreeMap::new(),
            aborted: None,
        }
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.loss_total)
    }

    /// `epoch,loss_total,loss_ic,loss_solver,beta,lr`, 17 significant digits.
    /// Several β values are joined by `;`.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("epoch,loss_total,loss_ic,loss_solver,beta,lr\n");
        for e in &self.epochs {
            let beta: Vec<String> = e.beta.iter().map(|b| num(*b)).collect();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                e.epoch,
                num(e.loss_total),
                num(e.loss_ic),
                num(e.loss_solver),
                beta.join(";"),
                num(e.lr)
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_precision() {
        let mut r = RunRecord::new("inverse", 1, 4, "per_epoch");
        r.epochs.push(EpochRecord {
            epoch: 0,
            loss_total: 0.1 + 0.2,
            loss_ic: 0.1,
            loss_solver: 0.2,
            loss_inverse: Some(1.0),
            beta: vec![0.5, -1.25],
            lr: 1e-3,
        });
        let csv = r.metrics_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "epoch,loss_total,loss_ic,loss_solver,beta,lr");
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(fields[4], "5.0000000000000000e-1;-1.2500000000000000e0");
    }

    #[test]
    fn json_roundtrip() {
        let mut r = RunRecord::new("steady", 3, 8, "per_sample");
        r.final_metrics.insert("rel_l2_error".into(), 0.0123);
        let back: RunRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
