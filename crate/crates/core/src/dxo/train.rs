use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xrisk::{evaluate, XRiskParams};

use super::config::{DxoConfig, Objective};
use super::dataset::FeatureDataset;
use super::loss::{log_add_exp, log_mean_exp, squared_hinge};
use super::objective::{objective_value, subset_value_and_gradient};
use super::sampler::{controlled_batches, Batch};
use super::scorer::Scorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    FullBatch,
    MiniBatch,
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "full_batch" | "full" => Ok(TrainMode::FullBatch),
            "mini_batch" | "mini" => Ok(TrainMode::MiniBatch),
            other => Err(Error::Config(format!("unknown training mode `{other}`"))),
        }
    }
}

/// Exact full-data objective at the start of an epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub epoch: usize,
    /// Parameter updates performed before this entry.
    pub step: usize,
    pub objective: f64,
    /// tpAUC(50%, 5%) of the validation set, when one is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_tpauc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    #[serde(flatten)]
    pub scorer: Scorer,
    pub history: Vec<HistoryEntry>,
    pub seed: u64,
}

/// Trains `init` on `data`.
///
/// Full-batch mode runs `cfg.epochs` steps of gradient descent on the exact
/// objective. Mini-batch mode draws `cfg.epochs` epochs of controlled batches
/// and follows a compositional estimate of the gradient: each positive keeps a
/// moving average of its inner aggregate, and the tpAUC objective adds a
/// moving average of the outer one.
pub fn train(
    data: &FeatureDataset,
    cfg: &DxoConfig,
    mode: TrainMode,
    init: Scorer,
    validation: Option<&FeatureDataset>,
) -> Result<TrainResult> {
    cfg.validate()?;
    // Checks classes and dimensions before any work is done.
    objective_value(&init, data, cfg)?;
    if let Some(v) = validation {
        if v.dim() != init.dim() {
            return Err(Error::Contract(format!(
                "validation set has {} features, scorer expects {}",
                v.dim(),
                init.dim()
            )));
        }
    }

    let mut trainer = Trainer {
        data,
        cfg,
        validation,
        scorer: init,
        history: Vec::with_capacity(cfg.epochs),
        step: 0,
    };
    match mode {
        TrainMode::FullBatch => trainer.full_batch()?,
        TrainMode::MiniBatch => trainer.mini_batch()?,
    }
    Ok(TrainResult {
        scorer: trainer.scorer,
        history: trainer.history,
        seed: cfg.seed,
    })
}

struct Trainer<'a> {
    data: &'a FeatureDataset,
    cfg: &'a DxoConfig,
    validation: Option<&'a FeatureDataset>,
    scorer: Scorer,
    history: Vec<HistoryEntry>,
    step: usize,
}

impl Trainer<'_> {
    fn record(&mut self, epoch: usize, objective: f64) -> Result<()> {
        if !objective.is_finite() {
            return Err(Error::Divergence {
                epoch,
                step: self.step,
                value: objective,
            });
        }
        let val_tpauc = match self.validation {
            Some(v) if !v.positives().is_empty() && !v.negatives().is_empty() => {
                Some(evaluate(&v.score_set(&self.scorer)?, &XRiskParams::standard()).tpauc)
            }
            _ => None,
        };
        self.history.push(HistoryEntry {
            epoch,
            step: self.step,
            objective,
            val_tpauc,
        });
        Ok(())
    }

    fn apply(&mut self, epoch: usize, grad: &[f64]) -> Result<()> {
        let lr = self.cfg.learning_rate;
        for (p, g) in self.scorer.params_mut().iter_mut().zip(grad) {
            *p -= lr * g;
        }
        self.step += 1;
        if let Some(bad) = self.scorer.params().iter().find(|p| !p.is_finite()) {
            return Err(Error::Divergence {
                epoch,
                step: self.step,
                value: *bad,
            });
        }
        Ok(())
    }

    fn full_batch(&mut self) -> Result<()> {
        let (pos, neg) = (self.data.positives(), self.data.negatives());
        for epoch in 0..self.cfg.epochs {
            let (value, grad) = subset_value_and_gradient(&self.scorer, self.data, pos, neg, self.cfg);
            self.record(epoch, value)?;
            self.apply(epoch, &grad)?;
        }
        Ok(())
    }

    fn mini_batch(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let mut sampler = controlled_batches(self.data, cfg.batch_size, cfg.sampling_rate, cfg.seed)?;
        let per_epoch = sampler.batches_per_epoch();
        let mut state = MovingAverages::new(self.data.len(), cfg);
        for epoch in 0..cfg.epochs {
            let value = objective_value(&self.scorer, self.data, cfg)?;
            self.record(epoch, value)?;
            for _ in 0..per_epoch {
                let batch = sampler.next().expect("controlled sampler is endless");
                let grad = state.gradient(&self.scorer, self.data, &batch);
                if let Some(bad) = grad.iter().find(|g| !g.is_finite()) {
                    return Err(Error::Divergence {
                        epoch,
                        step: self.step,
                        value: *bad,
                    });
                }
                self.apply(epoch, &grad)?;
            }
        }
        Ok(())
    }
}

/// Log-space moving averages for the stochastic compositional estimator.
struct MovingAverages {
    /// `log uᵢ` per dataset index, `None` until the positive is first drawn.
    log_u: Vec<Option<f64>>,
    /// `log s`, the outer average of `uᵢ^{λ/λ′}` (tpAUC only).
    log_s: Option<f64>,
    log_keep: f64,
    log_gamma: f64,
    lambda: f64,
    ratio: f64,
    margin: f64,
    objective: Objective,
}

impl MovingAverages {
    fn new(n: usize, cfg: &DxoConfig) -> Self {
        MovingAverages {
            log_u: vec![None; n],
            log_s: None,
            log_keep: (1.0 - cfg.ma_gamma).ln(),
            log_gamma: cfg.ma_gamma.ln(),
            lambda: cfg.lambda,
            ratio: cfg.lambda / cfg.lambda_prime,
            margin: cfg.margin,
            objective: cfg.objective,
        }
    }

    fn blend(&self, old: Option<f64>, estimate: f64) -> f64 {
        match old {
            Some(old) if self.log_keep.is_finite() => log_add_exp(self.log_keep + old, self.log_gamma + estimate),
            _ => estimate,
        }
    }

    fn gradient(&mut self, scorer: &Scorer, data: &FeatureDataset, batch: &Batch) -> Vec<f64> {
        let score = |i: usize| scorer.score(&data.sample(i).features);
        let pos_scores: Vec<f64> = batch.positives.iter().map(|&i| score(i)).collect();
        let neg_scores: Vec<f64> = batch.negatives.iter().map(|&j| score(j)).collect();

        // Scaled losses Lᵢⱼ/λ and derivatives ℓ′(dᵢⱼ), row per batch positive.
        let mut scaled = Vec::with_capacity(pos_scores.len());
        let mut derivs = Vec::with_capacity(pos_scores.len());
        let mut log_u_batch = Vec::with_capacity(pos_scores.len());
        for (&i, &sp) in batch.positives.iter().zip(&pos_scores) {
            let (row_l, row_d): (Vec<f64>, Vec<f64>) = neg_scores
                .iter()
                .map(|&sn| {
                    let (l, d) = squared_hinge(self.margin, sp - sn);
                    (l / self.lambda, d)
                })
                .unzip();
            let estimate = log_mean_exp(row_l.iter().copied());
            let updated = self.blend(self.log_u[i], estimate);
            self.log_u[i] = Some(updated);
            log_u_batch.push(updated);
            scaled.push(row_l);
            derivs.push(row_d);
        }

        // Outer weight of each batch positive, in log space.
        let log_outer: Vec<f64> = match self.objective {
            Objective::PaucKl => vec![0.0; log_u_batch.len()],
            Objective::TpaucKl => {
                let estimate = log_mean_exp(log_u_batch.iter().map(|lu| self.ratio * lu));
                let log_s = self.blend(self.log_s, estimate);
                self.log_s = Some(log_s);
                log_u_batch.iter().map(|lu| self.ratio * lu - log_s).collect()
            }
        };

        let norm = 1.0 / (pos_scores.len() * neg_scores.len()) as f64;
        let mut pos_coef = vec![0.0; pos_scores.len()];
        let mut neg_coef = vec![0.0; neg_scores.len()];
        for k in 0..pos_scores.len() {
            let base = log_outer[k] - log_u_batch[k];
            for (m, (&l, &d)) in scaled[k].iter().zip(&derivs[k]).enumerate() {
                let t = norm * (base + l).exp() * d;
                pos_coef[k] += t;
                neg_coef[m] -= t;
            }
        }

        let mut grad = vec![0.0; scorer.n_params()];
        for (&i, &c) in batch.positives.iter().zip(&pos_coef) {
            scorer.accumulate_grad(&data.sample(i).features, c, &mut grad);
        }
        for (&j, &c) in batch.negatives.iter().zip(&neg_coef) {
            scorer.accumulate_grad(&data.sample(j).features, c, &mut grad);
        }
        grad
    }
}
