use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2D { filters: usize, kernel: usize, stride: usize },
    MaxPool { size: usize },
    Dense { units: usize },
    Activation { function: Activation },
}

impl LayerSpec {
    pub fn conv(filters: usize, kernel: usize) -> Self {
        LayerSpec::Conv2D { filters, kernel, stride: 1 }
    }

    pub fn pool(size: usize) -> Self {
        LayerSpec::MaxPool { size }
    }

    pub fn dense(units: usize) -> Self {
        LayerSpec::Dense { units }
    }

    pub fn relu() -> Self {
        LayerSpec::Activation { function: Activation::Relu }
    }

    pub fn sigmoid() -> Self {
        LayerSpec::Activation { function: Activation::Sigmoid }
    }

    pub fn softmax() -> Self {
        LayerSpec::Activation { function: Activation::Softmax }
    }
}

/// Layer list, per-example input shape, output arity and init seed.
///
/// Inputs of rank 2 (`[h, w]`) are read as one channel by convolutions.
/// Dense layers flatten whatever they receive. Softmax may only be last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub classes: usize,
    pub seed: u64,
}

impl NetworkSpec {
    /// Two conv/pool stages and a two-layer head over 16×16 glyphs, four classes.
    pub fn perception(seed: u64) -> Self {
        NetworkSpec {
            input_shape: vec![1, 16, 16],
            layers: vec![
                LayerSpec::conv(8, 3),
                LayerSpec::relu(),
                LayerSpec::pool(2),
                LayerSpec::conv(16, 3),
                LayerSpec::relu(),
                LayerSpec::pool(2),
                LayerSpec::dense(64),
                LayerSpec::relu(),
                LayerSpec::dense(4),
                LayerSpec::softmax(),
            ],
            classes: 4,
            seed,
        }
    }

    /// Two-layer binary classifier over `inputs` features.
    pub fn decision(inputs: usize, seed: u64) -> Self {
        NetworkSpec {
            input_shape: vec![inputs],
            layers: vec![
                LayerSpec::dense(16),
                LayerSpec::relu(),
                LayerSpec::dense(2),
                LayerSpec::softmax(),
            ],
            classes: 2,
            seed,
        }
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Conv {
        c: usize,
        h: usize,
        w: usize,
        filters: usize,
        k: usize,
        stride: usize,
        oh: usize,
        ow: usize,
        offset: usize,
    },
    Pool {
        c: usize,
        h: usize,
        w: usize,
        size: usize,
        oh: usize,
        ow: usize,
    },
    Dense {
        inputs: usize,
        units: usize,
        offset: usize,
    },
    Act(Activation),
}

/// A feed-forward network. Parameters live in one flat vector, layer by
/// layer, weights before biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    ops: Vec<Op>,
    params: Vec<f64>,
}

struct Compiled {
    ops: Vec<Op>,
    param_count: usize,
}

fn compile(spec: &NetworkSpec) -> Result<Compiled, NeuralError> {
    let bad = |msg: String| Err(NeuralError::ShapeMismatch(msg));
    if spec.input_shape.is_empty() || spec.input_shape.contains(&0) {
        return bad(format!("invalid input shape {:?}", spec.input_shape));
    }
    if spec.classes == 0 {
        return bad("classes must be positive".into());
    }
    let mut shape = spec.input_shape.clone();
    let mut ops = Vec::with_capacity(spec.layers.len());
    let mut offset = 0;
    for (i, layer) in spec.layers.iter().enumerate() {
        let image = |shape: &[usize]| -> Option<(usize, usize, usize)> {
            match *shape {
                [h, w] => Some((1, h, w)),
                [c, h, w] => Some((c, h, w)),
                _ => None,
            }
        };
        match *layer {
            LayerSpec::Conv2D { filters, kernel, stride } => {
                let Some((c, h, w)) = image(&shape) else {
                    return bad(format!("layer {i}: convolution needs an image input, got {shape:?}"));
                };
                if filters == 0 || kernel == 0 || stride == 0 || kernel > h || kernel > w {
                    return bad(format!("layer {i}: kernel {kernel} does not fit {h}x{w}"));
                }
                let (oh, ow) = ((h - kernel) / stride + 1, (w - kernel) / stride + 1);
                ops.push(Op::Conv { c, h, w, filters, k: kernel, stride, oh, ow, offset });
                offset += filters * c * kernel * kernel + filters;
                shape = vec![filters, oh, ow];
            }
            LayerSpec::MaxPool { size } => {
                let Some((c, h, w)) = image(&shape) else {
                    return bad(format!("layer {i}: pooling needs an image input, got {shape:?}"));
                };
                if size == 0 || size > h || size > w {
                    return bad(format!("layer {i}: pool size {size} does not fit {h}x{w}"));
                }
                let (oh, ow) = (h / size, w / size);
                ops.push(Op::Pool { c, h, w, size, oh, ow });
                shape = vec![c, oh, ow];
            }
            LayerSpec::Dense { units } => {
                if units == 0 {
                    return bad(format!("layer {i}: dense layer with no units"));
                }
                let inputs: usize = shape.iter().product();
                ops.push(Op::Dense { inputs, units, offset });
                offset += units * inputs + units;
                shape = vec![units];
            }
            LayerSpec::Activation { function } => {
                if function == Activation::Softmax && i + 1 != spec.layers.len() {
                    return bad(format!("layer {i}: softmax must be the final layer"));
                }
                ops.push(Op::Act(function));
            }
        }
    }
    let out: usize = shape.iter().product();
    if out != spec.classes {
        return bad(format!("network emits {out} values but {} classes are declared", spec.classes));
    }
    Ok(Compiled { ops, param_count: offset })
}

impl Network {
    /// Glorot-uniform weights, zero biases, deterministic in `spec.seed`.
    pub fn new(spec: NetworkSpec) -> Result<Self, NeuralError> {
        let Compiled { ops, param_count } = compile(&spec)?;
        let mut params = vec![0.0; param_count];
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for op in &ops {
            let (offset, n_weights, fan_in, fan_out) = match *op {
                Op::Conv { c, filters, k, offset, .. } => (offset, filters * c * k * k, c * k * k, filters * k * k),
                Op::Dense { inputs, units, offset } => (offset, units * inputs, inputs, units),
                _ => continue,
            };
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut params[offset..offset + n_weights] {
                *p = rng.random_range(-a..a);
            }
        }
        Ok(Network { spec, ops, params })
    }

    /// Rebuilds a network from a spec and a parameter vector.
    pub fn from_params(spec: NetworkSpec, params: Vec<f64>) -> Result<Self, NeuralError> {
        let Compiled { ops, param_count } = compile(&spec)?;
        if params.len() != param_count {
            return Err(NeuralError::ShapeMismatch(format!(
                "spec needs {param_count} parameters, got {}",
                params.len()
            )));
        }
        Ok(Network { spec, ops, params })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn classes(&self) -> usize {
        self.spec.classes
    }

    /// True if the last layer is a softmax, so outputs are distributions.
    pub fn is_classifier(&self) -> bool {
        matches!(self.ops.last(), Some(Op::Act(Activation::Softmax)))
    }

    /// Weight entries of `params` (biases excluded), for L2 decay.
    pub(crate) fn weight_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.params.len()];
        for op in &self.ops {
            let (offset, n) = match *op {
                Op::Conv { c, filters, k, offset, .. } => (offset, filters * c * k * k),
                Op::Dense { inputs, units, offset } => (offset, units * inputs),
                _ => continue,
            };
            mask[offset..offset + n].fill(true);
        }
        mask
    }

    fn check_batch(&self, batch: &Tensor) -> Result<(), NeuralError> {
        let inner = &batch.shape()[1..];
        let ok = batch.shape().len() >= 2 && inner.iter().product::<usize>() == self.spec.input_len();
        if ok {
            Ok(())
        } else {
            Err(NeuralError::ShapeMismatch(format!(
                "batch shape {:?} does not match input {:?}",
                batch.shape(),
                self.spec.input_shape
            )))
        }
    }

    /// Output rows for a batch whose leading dimension indexes examples.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor, NeuralError> {
        self.check_batch(batch)?;
        let rows: Vec<Vec<f64>> = batch
            .values()
            .par_chunks(batch.row_len())
            .map(|x| self.forward_one(x))
            .collect();
        Tensor::from_rows(&rows, &[self.spec.classes])
    }

    /// Output for a single example given as a flat slice.
    pub fn forward_one(&self, x: &[f64]) -> Vec<f64> {
        let mut acts = self.activations(x);
        acts.pop().expect("at least the input")
    }

    /// Input of every op followed by the final output.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.ops.len() + 1);
        acts.push(x.to_vec());
        for op in &self.ops {
            let input = acts.last().expect("nonempty");
            let out = self.apply(op, input);
            acts.push(out);
        }
        acts
    }

    fn apply(&self, op: &Op, x: &[f64]) -> Vec<f64> {
        let p = &self.params;
        match *op {
            Op::Conv { c, h, w, filters, k, stride, oh, ow, offset } => {
                let bias = offset + filters * c * k * k;
                let mut out = vec![0.0; filters * oh * ow];
                for f in 0..filters {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut s = p[bias + f];
                            for ci in 0..c {
                                for ky in 0..k {
                                    let wrow = offset + ((f * c + ci) * k + ky) * k;
                                    let xrow = (ci * h + oy * stride + ky) * w + ox * stride;
                                    for kx in 0..k {
                                        s += p[wrow + kx] * x[xrow + kx];
                                    }
                                }
                            }
                            out[(f * oh + oy) * ow + ox] = s;
                        }
                    }
                }
                out
            }
            Op::Pool { c, h, w, size, oh, ow } => {
                let mut out = vec![0.0; c * oh * ow];
                for ci in 0..c {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            out[(ci * oh + oy) * ow + ox] = x[pool_argmax(x, ci, h, w, size, oy, ox)];
                        }
                    }
                }
                out
            }
            Op::Dense { inputs, units, offset } => {
                let bias = offset + units * inputs;
                (0..units)
                    .map(|u| {
                        let row = &p[offset + u * inputs..offset + (u + 1) * inputs];
                        p[bias + u] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                    })
                    .collect()
            }
            Op::Act(Activation::Relu) => x.iter().map(|&v| v.max(0.0)).collect(),
            Op::Act(Activation::Sigmoid) => x.iter().map(|&v| sigmoid(v)).collect(),
            Op::Act(Activation::Softmax) => softmax(x),
        }
    }

    /// Cross-entropy of one example and its gradient, accumulated into
    /// `grad`. Requires a softmax output.
    pub(crate) fn accumulate_gradient(&self, x: &[f64], label: usize, grad: &mut [f64]) -> f64 {
        debug_assert!(self.is_classifier());
        let acts = self.activations(x);
        let probs = acts.last().expect("output");
        let loss = -probs[label].max(f64::MIN_POSITIVE).ln();
        // Softmax and cross-entropy combine to p - onehot at the logits.
        let mut g: Vec<f64> = probs.clone();
        g[label] -= 1.0;
        let last = self.ops.len() - 1;
        for (i, op) in self.ops[..last].iter().enumerate().rev() {
            g = self.backward(op, &acts[i], &acts[i + 1], &g, grad);
        }
        loss
    }

    /// Propagates `g` (gradient at this op's output) to its input,
    /// adding parameter gradients into `grad`.
    fn backward(&self, op: &Op, x: &[f64], y: &[f64], g: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let p = &self.params;
        match *op {
            Op::Conv { c, h, w, filters, k, stride, oh, ow, offset } => {
                let bias = offset + filters * c * k * k;
                let mut gx = vec![0.0; x.len()];
                for f in 0..filters {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let go = g[(f * oh + oy) * ow + ox];
                            if go == 0.0 {
                                continue;
                            }
                            grad[bias + f] += go;
                            for ci in 0..c {
                                for ky in 0..k {
                                    let wrow = offset + ((f * c + ci) * k + ky) * k;
                                    let xrow = (ci * h + oy * stride + ky) * w + ox * stride;
                                    for kx in 0..k {
                                        grad[wrow + kx] += go * x[xrow + kx];
                                        gx[xrow + kx] += go * p[wrow + kx];
                                    }
                                }
                            }
                        }
                    }
                }
                gx
            }
            Op::Pool { c, h, w, size, oh, ow } => {
                let mut gx = vec![0.0; x.len()];
                for ci in 0..c {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            gx[pool_argmax(x, ci, h, w, size, oy, ox)] += g[(ci * oh + oy) * ow + ox];
                        }
                    }
                }
                gx
            }
            Op::Dense { inputs, units, offset } => {
                let bias = offset + units * inputs;
                let mut gx = vec![0.0; inputs];
                for u in 0..units {
                    let go = g[u];
                    if go == 0.0 {
                        continue;
                    }
                    grad[bias + u] += go;
                    let row = offset + u * inputs;
                    for i in 0..inputs {
                        grad[row + i] += go * x[i];
                        gx[i] += go * p[row + i];
                    }
                }
                gx
            }
            Op::Act(Activation::Relu) => x.iter().zip(g).map(|(&v, &gv)| if v > 0.0 { gv } else { 0.0 }).collect(),
            Op::Act(Activation::Sigmoid) => y.iter().zip(g).map(|(&s, &gv)| gv * s * (1.0 - s)).collect(),
            Op::Act(Activation::Softmax) => {
                let dot: f64 = y.iter().zip(g).map(|(a, b)| a * b).sum();
                y.iter().zip(g).map(|(&s, &gv)| s * (gv - dot)).collect()
            }
        }
    }

    /// Mean cross-entropy over a batch and its gradient with respect to
    /// every parameter.
    pub fn loss_gradient(&self, batch: &Tensor, labels: &[usize]) -> Result<(f64, Vec<f64>), NeuralError> {
        self.check_batch(batch)?;
        self.check_labels(batch.rows(), labels)?;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for (x, &y) in batch.iter_rows().zip(labels) {
            loss += self.accumulate_gradient(x, y, &mut grad);
        }
        let n = labels.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        Ok((loss / n, grad))
    }

    /// Mean cross-entropy over a batch.
    pub fn loss(&self, batch: &Tensor, labels: &[usize]) -> Result<f64, NeuralError> {
        self.check_batch(batch)?;
        self.check_labels(batch.rows(), labels)?;
        let total: f64 = batch
            .iter_rows()
            .zip(labels)
            .map(|(x, &y)| -self.forward_one(x)[y].max(f64::MIN_POSITIVE).ln())
            .sum();
        Ok(total / labels.len() as f64)
    }

    pub(crate) fn check_labels(&self, rows: usize, labels: &[usize]) -> Result<(), NeuralError> {
        if !self.is_classifier() {
            return Err(NeuralError::NotClassifier);
        }
        if labels.len() != rows || rows == 0 {
            return Err(NeuralError::ShapeMismatch(format!("{rows} inputs but {} labels", labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.spec.classes) {
            return Err(NeuralError::LabelOutOfRange(bad));
        }
        Ok(())
    }
}

fn pool_argmax(x: &[f64], c: usize, h: usize, w: usize, size: usize, oy: usize, ox: usize) -> usize {
    let mut best = (c * h + oy * size) * w + ox * size;
    for dy in 0..size {
        for dx in 0..size {
            let i = (c * h + oy * size + dy) * w + ox * size + dx;
            if x[i] > x[best] {
                best = i;
            }
        }
    }
    best
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Numerically stable softmax.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
