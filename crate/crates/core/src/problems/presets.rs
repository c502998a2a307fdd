use super::{
    ExperimentId, ExperimentSettings, InverseSettings, NetworkSettings, ScheduleKind, SolverSettings, TrainingSettings,
};
use crate::network::OptimizerKind;
use crate::training::UpdateGranularity;

fn training(epochs: usize, batch_size: usize, lr: f64) -> TrainingSettings {
    TrainingSettings {
        epochs,
        batch_size,
        granularity: UpdateGranularity::PerEpoch,
        lr,
        schedule: ScheduleKind::Constant,
        min_lr: 0.0,
        optimizer: OptimizerKind::Adam,
        weight_decay: 0.0,
        ic_weight: 1.0,
    }
}

fn mlp_5x64() -> NetworkSettings {
    NetworkSettings {
        hidden_layers: 5,
        hidden_width: 64,
    }
}

pub(super) fn preset(id: ExperimentId) -> ExperimentSettings {
    let base = |extended, solver, network, training| ExperimentSettings {
        experiment: id,
        seed: 0,
        extended,
        solver,
        network,
        training,
        inverse: None,
    };
    match id {
        // FTCS on 401 points of [-1, 1]; ν ∈ {0.01, …, 0.05}, levels every 0.1 up to 1.
        ExperimentId::BurgersForward => base(
            true,
            SolverSettings {
                dt: 1e-4,
                steps: 1000,
                dx: Some(5e-3),
            },
            mlp_5x64(),
            training(40_000, 1, 1e-3),
        ),
        // 32×32 cells of the unit square, 256 values of α in [1, 2]. The dense
        // network needs a larger step than 1e-4 to settle within 1000 epochs.
        ExperimentId::FokkerPlanckSteady => base(
            false,
            SolverSettings {
                dt: 1.0 / 32.0,
                steps: 10,
                dx: Some(1.0 / 32.0),
            },
            NetworkSettings {
                hidden_layers: 3,
                hidden_width: 256,
            },
            TrainingSettings {
                schedule: ScheduleKind::Cosine,
                optimizer: OptimizerKind::AdamW,
                weight_decay: 1e-2,
                ..training(1000, 64, 3e-3)
            },
        ),
        ExperimentId::AllenCahnForward | ExperimentId::AllenCahnInverse => {
            let mut s = base(
                id == ExperimentId::AllenCahnInverse,
                SolverSettings {
                    dt: 0.01,
                    steps: 20,
                    dx: Some(2.0 / 101.0),
                },
                mlp_5x64(),
                training(3000, 10, 1e-3),
            );
            if id == ExperimentId::AllenCahnInverse {
                s.inverse = Some(InverseSettings {
                    truth: vec![4e-4],
                    initial: vec![7e-4],
                    noise: 0.0,
                    lr: 1e-3,
                });
            }
            s
        }
        ExperimentId::KsForward | ExperimentId::KsInverse => {
            let mut s = base(
                true,
                SolverSettings {
                    dt: 0.02,
                    steps: 50,
                    dx: Some(1.0),
                },
                mlp_5x64(),
                training(3000, 11, 1e-3),
            );
            if id == ExperimentId::KsInverse {
                s.inverse = Some(InverseSettings {
                    truth: vec![1.3],
                    initial: vec![1.1],
                    noise: 0.0,
                    lr: 1e-3,
                });
            }
            s
        }
        ExperimentId::OdeForward => base(
            false,
            SolverSettings {
                dt: 0.01,
                steps: 10,
                dx: None,
            },
            mlp_5x64(),
            TrainingSettings {
                schedule: ScheduleKind::Cosine,
                ..training(3000, 64, 5e-3)
            },
        ),
        ExperimentId::OdeInverse => {
            let mut s = base(
                false,
                SolverSettings {
                    dt: 0.01,
                    steps: 10,
                    dx: None,
                },
                mlp_5x64(),
                TrainingSettings {
                    granularity: UpdateGranularity::PerSample,
                    schedule: ScheduleKind::Cosine,
                    ..training(40_000, 64, 1e-3)
                },
            );
            s.inverse = Some(InverseSettings {
                truth: vec![0.4, -1.5, 2.0],
                initial: vec![0.325, -2.25],
                noise: 0.0,
                lr: 1e-3,
            });
            s
        }
        ExperimentId::LorenzForward => base(
            false,
            SolverSettings {
                dt: 1e-3,
                steps: 10,
                dx: None,
            },
            mlp_5x64(),
            training(20_000, 1, 1e-3),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_has_consistent_inverse_settings() {
        for id in ExperimentId::ALL {
            let s = preset(id);
            assert_eq!(s.experiment, id);
            match &s.inverse {
                Some(inv) => {
                    assert_eq!(inv.truth.len(), id.param_names().len());
                    assert_eq!(inv.initial.len(), id.beta_indices().len());
                }
                None => assert!(id.beta_indices().is_empty()),
            }
        }
    }

    #[test]
    fn extended_flags() {
        let ext: Vec<_> = ExperimentId::ALL.into_iter().filter(|id| preset(*id).extended).collect();
        assert_eq!(
            ext,
            [
                ExperimentId::BurgersForward,
                ExperimentId::AllenCahnInverse,
                ExperimentId::KsForward,
                ExperimentId::KsInverse
            ]
        );
    }
}
