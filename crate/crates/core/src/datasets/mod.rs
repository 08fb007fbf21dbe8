//! Labeled equation datasets: sampling, glyph rendering and persistence.
//!
//! Instances carry images and the equation-level label only. The symbols
//! behind each image live in a separate [`GroundTruth`] that training code
//! never receives.

mod io;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::equation::{entails, DigitList, Entailment, OpRuleSet, ParsedEquation, Sym, SymbolSeq};
use crate::perception::{render_glyph, GlyphFamilySpec, GlyphImage};

pub use io::{load, load_truth, save, FORMAT_VERSION};

/// Rejection-sampling attempts allowed per instance.
pub const MAX_ATTEMPTS: usize = 1_000_000;

/// Minimum share of instances in which every column pair must occur.
pub const MIN_PAIR_COVERAGE: f64 = 0.01;

/// Coverage is enforced only for datasets at least this large.
pub const COVERAGE_MIN_INSTANCES: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("no equation of length {0} could be sampled")]
    UnsatisfiableLength(usize),
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("malformed dataset: {0}")]
    Format(String),
    #[error("dataset format version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which operation the `+` sign denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    BinaryAdd,
    Xor,
}

impl Semantics {
    pub fn rules(self) -> OpRuleSet {
        match self {
            Semantics::BinaryAdd => OpRuleSet::addition(),
            Semantics::Xor => OpRuleSet::xor(),
        }
    }

    /// Integer oracle: the sum, or bitwise exclusive-or.
    pub fn apply(self, x: &DigitList, y: &DigitList) -> DigitList {
        match self {
            Semantics::BinaryAdd => DigitList::from_value(x.value() + y.value()),
            Semantics::Xor => DigitList::from_value(x.value() ^ y.value()),
        }
    }
}

impl std::str::FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "add" | "binary_add" => Ok(Semantics::BinaryAdd),
            "xor" => Ok(Semantics::Xor),
            other => Err(format!("unknown semantics {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub semantics: Semantics,
    /// Image rendering; instance `i` draws from `derive_seed(glyphs.seed, i)`.
    pub glyphs: GlyphFamilySpec,
    pub lengths: Vec<usize>,
    pub per_length: usize,
    pub positive_fraction: f64,
    /// Seed for equation sampling.
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(semantics: Semantics, glyphs: GlyphFamilySpec, lengths: Vec<usize>, per_length: usize, seed: u64) -> Self {
        DatasetSpec {
            semantics,
            glyphs,
            lengths,
            per_length,
            positive_fraction: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidSpec(m));
        if self.lengths.is_empty() {
            return bad("no lengths requested".into());
        }
        if let Some(l) = self.lengths.iter().find(|&&l| l < 5) {
            return bad(format!("length {l} is below the minimum of 5"));
        }
        if self.per_length == 0 {
            return bad("per_length must be at least 1".into());
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return bad("positive_fraction must lie strictly between 0 and 1".into());
        }
        self.glyphs.validate().map_err(DatasetError::InvalidSpec)
    }

    /// Positives per length stratum.
    pub fn positives_per_length(&self) -> usize {
        (self.per_length as f64 * self.positive_fraction).round() as usize
    }
}

/// One equation as the learner sees it: images and a label.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationInstance {
    pub images: Vec<GlyphImage>,
    pub label: bool,
}

impl EquationInstance {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image_refs(&self) -> Vec<&GlyphImage> {
        self.images.iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `z` is the true result.
    TrueResult,
    /// `z` was replaced by a different numeral of the same length.
    CorruptedZ,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::TrueResult => "true_result",
            Provenance::CorruptedZ => "corrupted_z",
        }
    }
}

/// Evaluation-only record of the symbols behind one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthRecord {
    pub seq: SymbolSeq,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    pub records: Vec<TruthRecord>,
}

impl GroundTruth {
    /// `(image, symbol)` pairs over the given instances, for probes.
    pub fn labeled_images<'a>(&'a self, instances: &'a [EquationInstance]) -> Vec<(&'a GlyphImage, Sym)> {
        instances
            .iter()
            .zip(&self.records)
            .flat_map(|(inst, rec)| {
                inst.images
                    .iter()
                    .zip(rec.seq.syms().expect("truth has no blanks"))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    /// Seed-resampling round that met the coverage requirement.
    pub round: u32,
    pub instances: Vec<EquationInstance>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Indices of instances no longer than `max_len`.
    pub fn indices_up_to(&self, max_len: usize) -> Vec<usize> {
        (0..self.instances.len()).filter(|&i| self.instances[i].len() <= max_len).collect()
    }
}

/// Samples `x + y = z` with `|x| + |y| + |z| + 2 = len`: operand lengths
/// uniform in `1..=len-4`, digits uniform, leading zeros stripped.
fn sample_equation<R: Rng + ?Sized>(semantics: Semantics, len: usize, rng: &mut R) -> Result<ParsedEquation, DatasetError> {
    let max = len - 4;
    for _ in 0..MAX_ATTEMPTS {
        let operand = |rng: &mut R| {
            let n = rng.random_range(1..=max);
            DigitList::normalized((0..n).map(|_| rng.random_range(0..=1u8)).collect())
        };
        let x = operand(rng);
        let y = operand(rng);
        let z = semantics.apply(&x, &y);
        if x.len() + y.len() + z.len() + 2 == len {
            return Ok(ParsedEquation { x, y, z });
        }
    }
    Err(DatasetError::UnsatisfiableLength(len))
}

/// A uniformly random numeral of the same length as `z`, different from it.
fn corrupt<R: Rng + ?Sized>(z: &DigitList, rng: &mut R) -> DigitList {
    loop {
        let digits: Vec<u8> = if z.len() == 1 {
            vec![rng.random_range(0..=1)]
        } else {
            std::iter::once(1)
                .chain((1..z.len()).map(|_| rng.random_range(0..=1)))
                .collect()
        };
        let cand = DigitList::new(digits).expect("valid numeral");
        if &cand != z {
            return cand;
        }
    }
}

/// Share of sequences that contain each column pair `(d1, d2)`, indexed
/// `2*d1 + d2`, after zero-padding the shorter operand.
pub fn column_pair_coverage(seqs: &[SymbolSeq]) -> [f64; 4] {
    let mut counts = [0usize; 4];
    for seq in seqs {
        let Ok(eq) = crate::equation::parse_equation(seq) else { continue };
        let mut seen = [false; 4];
        let n = eq.x.len().max(eq.y.len());
        let digit = |d: &DigitList, i: usize| if i < d.len() { d.digits()[d.len() - 1 - i] } else { 0 };
        for i in 0..n {
            seen[(digit(&eq.x, i) * 2 + digit(&eq.y, i)) as usize] = true;
        }
        for (c, s) in counts.iter_mut().zip(seen) {
            *c += usize::from(s);
        }
    }
    counts.map(|c| if seqs.is_empty() { 0.0 } else { c as f64 / seqs.len() as f64 })
}

/// Generates the dataset and its ground truth. Each length stratum holds
/// exactly the requested positives and negatives, in shuffled order.
/// If some column pair occurs in fewer than 1% of instances, equations are
/// resampled from the next derived seed.
pub fn generate(spec: &DatasetSpec) -> Result<(Dataset, GroundTruth), DatasetError> {
    spec.validate()?;
    let mut round = 0u32;
    let (equations, truth) = loop {
        let (equations, truth) = sample_all(spec, derive_seed(spec.seed, round as u64))?;
        let seqs: Vec<SymbolSeq> = truth.records.iter().map(|r| r.seq.clone()).collect();
        let cov = column_pair_coverage(&seqs);
        if seqs.len() < COVERAGE_MIN_INSTANCES || cov.iter().all(|&c| c >= MIN_PAIR_COVERAGE) || round >= 64 {
            break (equations, truth);
        }
        round += 1;
    };
    let instances = equations
        .par_iter()
        .enumerate()
        .map(|(i, (syms, label))| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.glyphs.seed, i as u64));
            EquationInstance {
                images: syms.iter().map(|&s| render_glyph(s, &spec.glyphs, &mut rng)).collect(),
                label: *label,
            }
        })
        .collect();
    Ok((
        Dataset {
            spec: spec.clone(),
            round,
            instances,
        },
        truth,
    ))
}

type Sampled = (Vec<(Vec<Sym>, bool)>, GroundTruth);

fn sample_all(spec: &DatasetSpec, seed: u64) -> Result<Sampled, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth_rules = spec.semantics.rules();
    let positives = spec.positives_per_length();
    let mut equations = Vec::new();
    let mut records = Vec::new();
    for &len in &spec.lengths {
        let mut labels: Vec<bool> = (0..spec.per_length).map(|i| i < positives).collect();
        labels.shuffle(&mut rng);
        for label in labels {
            let mut eq = sample_equation(spec.semantics, len, &mut rng)?;
            let provenance = if label {
                Provenance::TrueResult
            } else {
                eq.z = corrupt(&eq.z, &mut rng);
                Provenance::CorruptedZ
            };
            let syms = eq.to_syms();
            let seq = SymbolSeq::from_syms(&syms);
            let expected = if label { Entailment::True } else { Entailment::False };
            assert_eq!(entails(&truth_rules, &seq), expected, "generated {seq} has the wrong label");
            records.push(TruthRecord { seq, provenance });
            equations.push((syms, label));
        }
    }
    Ok((equations, GroundTruth { records }))
}
