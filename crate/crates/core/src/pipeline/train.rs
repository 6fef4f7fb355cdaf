use rand::seq::SliceRandom;

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::flowdata::Dataset;
use crate::nncore::{cross_entropy, softmax, Mode, Sequential, Tensor};
use crate::rng::{derive_seed, seeded};

const SHUFFLE_STREAM: u64 = 0x5AFF;
const DROPOUT_STREAM: u64 = 0xD20F;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    /// Mean per-sample cross-entropy over the epoch (train mode).
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

impl History {
    pub fn first_loss(&self) -> Option<f64> {
        self.epochs.first().map(|e| e.loss)
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.loss)
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `[n_features, 1]` network input for one scaled row.
pub fn row_tensor(row: &[f64]) -> Tensor {
    Tensor::new(vec![row.len(), 1], row.to_vec()).expect("row shape")
}

/// Mini-batch Adam over `data`, reshuffled every epoch.
///
/// Shuffles and dropout masks come from streams derived from `config.seed`
/// and the epoch number, so a run is reproducible bit for bit.
pub fn train(net: &mut Sequential, data: &Dataset, config: &ModelConfig) -> Result<History> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    let n_classes = data.class_names().len();
    let mut adam = net.adam_state(config.learning_rate);
    let mut grads = net.zero_gradients();
    let mut history = History::default();
    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    let mut target = vec![0.0; n_classes];

    for epoch in 0..config.epochs as u64 {
        order.shuffle(&mut seeded(derive_seed(derive_seed(config.seed, SHUFFLE_STREAM), epoch)));
        let mut dropout_rng = seeded(derive_seed(derive_seed(config.seed, DROPOUT_STREAM), epoch));
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            grads.zero();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let label = data.labels()[i];
                let (logits, caches) = net.forward(&row_tensor(data.row(i)), Mode::Train, &mut dropout_rng)?;
                let probs = softmax(&logits);
                target[label] = 1.0;
                let (loss, mut g) = cross_entropy(&probs, &Tensor::vector(target.clone()))?;
                target[label] = 0.0;
                loss_sum += loss;
                correct += usize::from(argmax(probs.data()) == label);
                g.data_mut().iter_mut().for_each(|v| *v *= scale);
                net.backward(&caches, &g, &mut grads)?;
            }
            net.apply_adam(&mut adam, &grads)?;
        }
        let n = data.n_rows() as f64;
        history.epochs.push(EpochStats {
            loss: loss_sum / n,
            accuracy: correct as f64 / n,
        });
    }
    Ok(history)
}
