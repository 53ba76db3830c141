use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::dataset::FeatureDataset;

/// Dataset indices making up one mini-batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
}

/// Endless reshuffling draw over one class's indices.
#[derive(Debug, Clone)]
struct ClassStream {
    order: Vec<usize>,
    cursor: usize,
}

impl ClassStream {
    fn new(indices: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut order = indices.to_vec();
        order.shuffle(rng);
        ClassStream { order, cursor: 0 }
    }

    fn take(&mut self, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            if self.cursor == self.order.len() {
                self.order.shuffle(rng);
                self.cursor = 0;
            }
            out.push(self.order[self.cursor]);
            self.cursor += 1;
        }
        out
    }
}

/// Mini-batches with a fixed number of positives each.
///
/// Each class is drawn without replacement from its own shuffled order and
/// reshuffled when exhausted, so the smaller class is oversampled. The stream
/// is fully determined by the seed.
#[derive(Debug, Clone)]
pub struct ControlledSampler {
    pos: ClassStream,
    neg: ClassStream,
    pos_per_batch: usize,
    neg_per_batch: usize,
    batches_per_epoch: usize,
    rng: ChaCha8Rng,
}

impl ControlledSampler {
    pub fn new(data: &FeatureDataset, batch_size: usize, rate: f64, seed: u64) -> Result<Self> {
        if batch_size < 2 {
            return Err(Error::Config(format!("batch_size must be at least 2, got {batch_size}")));
        }
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::Config(format!("sampling rate must be in (0, 1), got {rate}")));
        }
        data.require_both_classes()?;
        // Both classes must be present in every batch.
        let pos_per_batch = ((rate * batch_size as f64).round() as usize).clamp(1, batch_size - 1);
        let neg_per_batch = batch_size - pos_per_batch;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pos = ClassStream::new(data.positives(), &mut rng);
        let neg = ClassStream::new(data.negatives(), &mut rng);
        let batches_per_epoch = data
            .positives()
            .len()
            .div_ceil(pos_per_batch)
            .max(data.negatives().len().div_ceil(neg_per_batch));
        Ok(ControlledSampler {
            pos,
            neg,
            pos_per_batch,
            neg_per_batch,
            batches_per_epoch,
            rng,
        })
    }

    pub fn positives_per_batch(&self) -> usize {
        self.pos_per_batch
    }

    pub fn negatives_per_batch(&self) -> usize {
        self.neg_per_batch
    }

    /// Batches needed for the larger class to be seen once.
    pub fn batches_per_epoch(&self) -> usize {
        self.batches_per_epoch
    }
}

impl Iterator for ControlledSampler {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        let positives = self.pos.take(self.pos_per_batch, &mut self.rng);
        let negatives = self.neg.take(self.neg_per_batch, &mut self.rng);
        Some(Batch { positives, negatives })
    }
}

/// Convenience constructor for [`ControlledSampler`].
pub fn controlled_batches(data: &FeatureDataset, batch_size: usize, rate: f64, seed: u64) -> Result<ControlledSampler> {
    ControlledSampler::new(data, batch_size, rate, seed)
}
