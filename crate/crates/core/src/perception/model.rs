use crate::equation::{ProbRow, Slot, Sym, SymbolSeq};
use crate::neural::{argmax, Network, NetworkSpec, NeuralError, Tensor, TrainConfig};

use super::glyph::{GlyphImage, GLYPH_SIZE};

/// A four-way glyph classifier. Output unit `i` always denotes `Sym::ALL[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionModel {
    net: Network,
}

impl PerceptionModel {
    /// A freshly initialized network with the default architecture.
    pub fn new(seed: u64) -> Self {
        PerceptionModel {
            net: Network::new(NetworkSpec::perception(seed)).expect("default architecture is valid"),
        }
    }

    pub fn from_network(net: Network) -> Result<Self, NeuralError> {
        let spec = net.spec();
        if spec.classes != 4 || spec.input_len() != GLYPH_SIZE * GLYPH_SIZE || !net.is_classifier() {
            return Err(NeuralError::ShapeMismatch(
                "perception needs 16x16 inputs and four softmax outputs".into(),
            ));
        }
        Ok(PerceptionModel { net })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    fn batch(&self, images: &[&GlyphImage]) -> Tensor {
        let mut values = Vec::with_capacity(images.len() * GLYPH_SIZE * GLYPH_SIZE);
        for img in images {
            values.extend_from_slice(img.pixels());
        }
        let mut shape = vec![images.len()];
        shape.extend_from_slice(&self.net.spec().input_shape);
        Tensor::new(shape, values).expect("glyphs match the input shape")
    }

    /// Softmax rows, one per image.
    pub fn probabilities(&self, images: &[&GlyphImage]) -> Vec<ProbRow> {
        if images.is_empty() {
            return Vec::new();
        }
        let out = self.net.forward(&self.batch(images)).expect("valid batch");
        out.iter_rows().map(|r| [r[0], r[1], r[2], r[3]]).collect()
    }

    /// Argmax symbols (ties to the lowest class) and the probability rows.
    /// Needs at least one image.
    pub fn perceive(&self, images: &[&GlyphImage]) -> (SymbolSeq, Vec<ProbRow>) {
        assert!(!images.is_empty(), "perceive needs at least one image");
        let probs = self.probabilities(images);
        (sequence_of(&probs), probs)
    }

    /// Continues training from the current weights on `(image, symbol)` pairs.
    /// Needs at least one pair.
    pub fn retrain(&mut self, pairs: &[(&GlyphImage, Sym)], cfg: &TrainConfig) -> Result<Vec<f64>, NeuralError> {
        assert!(!pairs.is_empty(), "retrain needs at least one pair");
        let images: Vec<&GlyphImage> = pairs.iter().map(|(img, _)| *img).collect();
        let labels: Vec<usize> = pairs.iter().map(|(_, s)| s.index()).collect();
        self.net.fit(&self.batch(&images), &labels, cfg)
    }

    /// Fraction of images whose argmax matches the given symbol.
    pub fn accuracy(&self, labeled: &[(&GlyphImage, Sym)]) -> f64 {
        if labeled.is_empty() {
            return 0.0;
        }
        let images: Vec<&GlyphImage> = labeled.iter().map(|(img, _)| *img).collect();
        let probs = self.probabilities(&images);
        let hits = probs
            .iter()
            .zip(labeled)
            .filter(|(p, (_, s))| argmax(&p[..]) == s.index())
            .count();
        hits as f64 / labeled.len() as f64
    }
}

/// Argmax symbol of each probability row.
pub fn sequence_of(probs: &[ProbRow]) -> SymbolSeq {
    SymbolSeq::new(
        probs
            .iter()
            .map(|p| Slot::Filled(Sym::ALL[argmax(&p[..])]))
            .collect(),
    )
}
