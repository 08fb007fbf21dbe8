use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::Network;
use super::tensor::Tensor;
use super::NeuralError;

/// Minibatch SGD settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub seed: u64,
    /// Weight decay coefficient; biases are not decayed.
    pub l2: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let fail = |m: &str| Err(NeuralError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.minibatch == 0 {
            return fail("minibatch must be at least 1");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return fail("l2 must be nonnegative");
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 10,
            minibatch: 16,
            seed: 0,
            l2: 0.0,
        }
    }
}

/// Trains a copy of `net` and returns it with the mean loss of each epoch.
pub fn train_supervised(
    net: &Network,
    inputs: &Tensor,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<(Network, Vec<f64>), NeuralError> {
    let mut out = net.clone();
    let trace = out.fit(inputs, labels, cfg)?;
    Ok((out, trace))
}

impl Network {
    /// In-place minibatch SGD on mean cross-entropy. The example order is
    /// reshuffled every epoch from `cfg.seed`. Each epoch's loss is the
    /// mean of minibatch losses measured before their update.
    pub fn fit(&mut self, inputs: &Tensor, labels: &[usize], cfg: &TrainConfig) -> Result<Vec<f64>, NeuralError> {
        cfg.validate()?;
        self.check_labels(inputs.rows(), labels)?;
        let probe = Tensor::new(
            std::iter::once(1).chain(inputs.shape()[1..].iter().copied()).collect(),
            inputs.row(0).to_vec(),
        )?;
        self.forward(&probe)?;
        let decay = self.weight_mask();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..labels.len()).collect();
        let mut trace = Vec::with_capacity(cfg.epochs);
        let mut grad = vec![0.0; self.param_count()];
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for chunk in order.chunks(cfg.minibatch) {
                grad.fill(0.0);
                let mut loss = 0.0;
                for &i in chunk {
                    loss += self.accumulate_gradient(inputs.row(i), labels[i], &mut grad);
                }
                if !loss.is_finite() {
                    return Err(NeuralError::NonFiniteLoss { epoch });
                }
                total += loss;
                let scale = cfg.learning_rate / chunk.len() as f64;
                for ((p, g), &d) in self.params_mut().iter_mut().zip(&grad).zip(&decay) {
                    let reg = if d { cfg.l2 * *p } else { 0.0 };
                    *p -= scale * g + cfg.learning_rate * reg;
                }
            }
            let mean = total / labels.len() as f64;
            if !mean.is_finite() || self.params().iter().any(|p| !p.is_finite()) {
                return Err(NeuralError::NonFiniteLoss { epoch });
            }
            trace.push(mean);
        }
        Ok(trace)
    }

    /// Fraction of rows whose argmax equals the label.
    pub fn accuracy(&self, inputs: &Tensor, labels: &[usize]) -> Result<f64, NeuralError> {
        let out = self.forward(inputs)?;
        if labels.len() != out.rows() {
            return Err(NeuralError::ShapeMismatch(format!("{} inputs but {} labels", out.rows(), labels.len())));
        }
        let hits = (0..out.rows()).filter(|&i| out.argmax_row(i) == labels[i]).count();
        Ok(hits as f64 / labels.len() as f64)
    }
}

/// Central-difference step used by [`gradient_check`].
pub const GRADIENT_CHECK_STEP: f64 = 1e-5;

/// Largest relative disagreement between backpropagated and central
/// finite-difference gradients of the single-example loss. Relative error
/// is `|a - n| / max(|a| + |n|, 1e-6)` so that parameters with vanishing
/// gradient compare absolutely.
pub fn gradient_check(net: &Network, input: &[f64], label: usize) -> f64 {
    let batch = Tensor::new(
        std::iter::once(1).chain(net.spec().input_shape.iter().copied()).collect(),
        input.to_vec(),
    )
    .expect("input matches the spec");
    let (_, analytic) = net.loss_gradient(&batch, &[label]).expect("classifier network");
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..net.param_count() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + GRADIENT_CHECK_STEP;
        let up = probe.loss(&batch, &[label]).expect("valid batch");
        probe.params_mut()[i] = orig - GRADIENT_CHECK_STEP;
        let down = probe.loss(&batch, &[label]).expect("valid batch");
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * GRADIENT_CHECK_STEP);
        let a = analytic[i];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}
