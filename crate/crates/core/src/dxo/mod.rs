//! Direct optimization of partial-AUC surrogates.
//!
//! Pairwise squared-hinge losses are aggregated with a KL-regularized DRO
//! soft-max over negatives (pAUC) and additionally over positives (tpAUC).

mod config;
mod dataset;
mod loss;
mod objective;
mod sampler;
mod scorer;
mod train;

pub use config::{DxoConfig, Objective};
pub use dataset::{read_feature_csv, FeatureDataset, FeatureSample};
pub use loss::{kl_dro_aggregate, kl_dro_weights, squared_hinge};
pub use objective::{
    objective_gradient, objective_value, pairwise_surrogate, pauc_objective, tpauc_objective, value_and_gradient,
};
pub use sampler::{controlled_batches, Batch, ControlledSampler};
pub use scorer::{Scorer, ScorerKind};
pub use train::{train, HistoryEntry, TrainMode, TrainResult};
