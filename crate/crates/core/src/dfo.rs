//! Sampling-and-classification optimization over sparse binary vectors.
//!
//! [`optimize`] keeps the best few evaluated vectors as positives and all
//! others as negatives. Each round it takes a positive, freezes just enough
//! of its coordinates that every negative disagrees somewhere in the frozen
//! pattern, and samples the remaining coordinates at random. With a small
//! probability it samples the whole feasible set instead. [`random_search`]
//! is the uniform-sampling baseline.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::ops::Range;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DfoError {
    #[error("invalid sparsity constraint: {0}")]
    InvalidConstraint(String),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("no feasible vector exists")]
    InfeasibleConstraint,
    #[error("vector {0} violates the sparsity constraint")]
    ConstraintViolation(String),
}

/// A fixed-length bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryVector {
    bits: Vec<bool>,
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        BinaryVector { bits: vec![false; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BinaryVector { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Hex of the bits packed into bytes, bit `i` at position `i % 8` of
    /// byte `i / 8`.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        hex::encode(bytes)
    }
}

impl std::fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_char(if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// At most `k` ones inside each block; the blocks partition `[0, len)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityConstraint {
    k: usize,
    blocks: Vec<Range<usize>>,
}

impl SparsityConstraint {
    pub fn new(k: usize, blocks: Vec<Range<usize>>) -> Result<Self, DfoError> {
        if k < 2 {
            return Err(DfoError::InvalidConstraint(format!("k = {k}, need k >= 2")));
        }
        let mut next = 0;
        for b in &blocks {
            if b.start != next || b.end <= b.start {
                return Err(DfoError::InvalidConstraint(format!("blocks do not partition the vector at {b:?}")));
            }
            next = b.end;
        }
        if blocks.is_empty() {
            return Err(DfoError::InvalidConstraint("no blocks".into()));
        }
        Ok(SparsityConstraint { k, blocks })
    }

    /// One block spanning the whole vector.
    pub fn single(k: usize, len: usize) -> Result<Self, DfoError> {
        SparsityConstraint::new(k, vec![0..len])
    }

    /// Consecutive blocks of the given sizes.
    pub fn from_block_sizes(k: usize, sizes: &[usize]) -> Result<Self, DfoError> {
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&n| {
                let r = start..start + n;
                start += n;
                r
            })
            .collect();
        SparsityConstraint::new(k, blocks)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn is_satisfied(&self, v: &BinaryVector) -> bool {
        v.len() == self.dim() && self.blocks.iter().all(|b| v.bits[b.clone()].iter().filter(|&&x| x).count() <= self.k)
    }

    /// Number of feasible vectors, saturating at `u128::MAX`.
    pub fn feasible_count(&self) -> u128 {
        self.blocks
            .iter()
            .map(|b| (0..=self.k.min(b.len())).map(|c| binomial(b.len(), c)).sum::<u128>())
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    /// A uniform draw from the feasible set: per block, the number of ones
    /// is drawn with weight `C(n, c)`, then their positions uniformly.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> BinaryVector {
        let mut v = BinaryVector::zeros(self.dim());
        for b in &self.blocks {
            let n = b.len();
            let weights: Vec<f64> = (0..=self.k.min(n)).map(|c| binomial(n, c) as f64).collect();
            let count = WeightedIndex::new(&weights).expect("positive weights").sample(rng);
            for i in index::sample(rng, n, count) {
                v.bits[b.start + i] = true;
            }
        }
        v
    }

    /// Clears randomly chosen ones outside `frozen` until each block holds
    /// at most `k`.
    fn repair<R: Rng + ?Sized>(&self, v: &mut BinaryVector, frozen: &[bool], rng: &mut R) {
        for b in &self.blocks {
            let free_ones: Vec<usize> = b.clone().filter(|&i| v.bits[i] && !frozen[i]).collect();
            let ones = b.clone().filter(|&i| v.bits[i]).count();
            if ones > self.k {
                let excess = ones - self.k;
                for j in index::sample(rng, free_ones.len(), excess) {
                    v.bits[free_ones[j]] = false;
                }
            }
        }
    }
}

fn binomial(n: usize, c: usize) -> u128 {
    (0..c).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfoConfig {
    /// Maximum number of distinct objective evaluations.
    pub budget: usize,
    pub positive_set_size: usize,
    /// Probability of sampling the whole feasible set in a round.
    pub uncertainty_prob: f64,
    pub seed: u64,
}

impl Default for DfoConfig {
    fn default() -> Self {
        DfoConfig {
            budget: 64,
            positive_set_size: 2,
            uncertainty_prob: 0.1,
            seed: 0,
        }
    }
}

impl DfoConfig {
    pub fn validate(&self) -> Result<(), DfoError> {
        if self.positive_set_size == 0 {
            return Err(DfoError::InvalidConfig("positive_set_size must be at least 1".into()));
        }
        if self.budget < self.positive_set_size + 1 {
            return Err(DfoError::InvalidConfig("budget must exceed positive_set_size".into()));
        }
        if !(0.0..=1.0).contains(&self.uncertainty_prob) {
            return Err(DfoError::InvalidConfig("uncertainty_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One objective evaluation in call order.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub vector: BinaryVector,
    pub value: f64,
    /// Best value seen up to and including this evaluation.
    pub incumbent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best: BinaryVector,
    pub value: f64,
    pub trace: Vec<Evaluation>,
}

impl OptimizeResult {
    /// CSV with header `eval_index,value,bits`, bits as in [`BinaryVector::to_hex`].
    pub fn write_trace_csv<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "eval_index,value,bits")?;
        for (i, e) in self.trace.iter().enumerate() {
            writeln!(out, "{i},{},{}", e.value, e.vector.to_hex())?;
        }
        Ok(())
    }
}

/// Evaluation bookkeeping shared by both searches: feasibility check,
/// memoization, incumbent tracking.
struct Evaluator<'a, F> {
    objective: F,
    constraint: &'a SparsityConstraint,
    seen: HashMap<BinaryVector, f64>,
    trace: Vec<Evaluation>,
    best: Option<(BinaryVector, f64)>,
}

impl<'a, F: FnMut(&BinaryVector) -> f64> Evaluator<'a, F> {
    fn new(objective: F, constraint: &'a SparsityConstraint) -> Self {
        Evaluator {
            objective,
            constraint,
            seen: HashMap::new(),
            trace: Vec::new(),
            best: None,
        }
    }

    /// Evaluates `v` unless already seen. Returns whether a new evaluation
    /// was made.
    fn eval(&mut self, v: BinaryVector) -> Result<bool, DfoError> {
        if !self.constraint.is_satisfied(&v) {
            return Err(DfoError::ConstraintViolation(v.to_string()));
        }
        if self.seen.contains_key(&v) {
            return Ok(false);
        }
        let value = (self.objective)(&v);
        if self.best.as_ref().is_none_or(|(_, b)| value > *b) {
            self.best = Some((v.clone(), value));
        }
        let incumbent = self.best.as_ref().expect("set above").1;
        self.trace.push(Evaluation {
            vector: v.clone(),
            value,
            incumbent,
        });
        self.seen.insert(v, value);
        Ok(true)
    }

    fn finish(self) -> OptimizeResult {
        let (best, value) = self.best.expect("at least one evaluation");
        OptimizeResult {
            best,
            value,
            trace: self.trace,
        }
    }
}

/// Sampling attempts allowed per unit of budget before giving up on
/// finding unseen vectors.
const ATTEMPTS_PER_EVAL: usize = 50;

/// Maximizes `objective` over vectors satisfying `constraint`.
///
/// Stops after `cfg.budget` distinct evaluations, when the feasible set is
/// exhausted, or when sampling keeps returning seen vectors. Ties for the
/// incumbent keep the earlier vector.
pub fn optimize<F>(objective: F, constraint: &SparsityConstraint, cfg: &DfoConfig) -> Result<OptimizeResult, DfoError>
where
    F: FnMut(&BinaryVector) -> f64,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cap = cfg.budget.min(usize::try_from(constraint.feasible_count()).unwrap_or(usize::MAX));
    let mut ev = Evaluator::new(objective, constraint);
    let mut attempts = 0;
    let max_attempts = cfg.budget * ATTEMPTS_PER_EVAL;
    while ev.trace.len() < (cfg.positive_set_size + 1).min(cap) && attempts < max_attempts {
        attempts += 1;
        ev.eval(constraint.sample_uniform(&mut rng))?;
    }
    let dim = constraint.dim();
    while ev.trace.len() < cap && attempts < max_attempts {
        attempts += 1;
        let candidate = if rng.random_bool(cfg.uncertainty_prob) {
            constraint.sample_uniform(&mut rng)
        } else {
            let (positives, negatives) = split(&ev.trace, cfg.positive_set_size);
            let anchor = *positives.choose(&mut rng).expect("nonempty positive set");
            let frozen = discriminating_region(anchor, &negatives, dim, &mut rng);
            let mut v = anchor.clone();
            for i in 0..dim {
                if !frozen[i] {
                    v.set(i, rng.random_bool(0.5));
                }
            }
            constraint.repair(&mut v, &frozen, &mut rng);
            v
        };
        ev.eval(candidate)?;
    }
    Ok(ev.finish())
}

/// Top `m` evaluated vectors by value (earlier first among ties) and the rest.
fn split(trace: &[Evaluation], m: usize) -> (Vec<&BinaryVector>, Vec<&BinaryVector>) {
    let mut order: Vec<usize> = (0..trace.len()).collect();
    order.sort_by(|&a, &b| trace[b].value.total_cmp(&trace[a].value).then(a.cmp(&b)));
    let positives = order[..m.min(order.len())].iter().map(|&i| &trace[i].vector).collect();
    let negatives = order[m.min(order.len())..].iter().map(|&i| &trace[i].vector).collect();
    (positives, negatives)
}

/// Grows a set of frozen coordinates until every negative differs from
/// `anchor` on at least one of them: repeatedly take a random negative not
/// yet excluded and freeze a random coordinate where it disagrees.
fn discriminating_region<R: Rng + ?Sized>(
    anchor: &BinaryVector,
    negatives: &[&BinaryVector],
    dim: usize,
    rng: &mut R,
) -> Vec<bool> {
    let mut frozen = vec![false; dim];
    let mut remaining: Vec<&BinaryVector> = negatives.iter().copied().filter(|n| *n != anchor).collect();
    while !remaining.is_empty() {
        let neg = remaining[rng.random_range(0..remaining.len())];
        let diffs: Vec<usize> = (0..dim).filter(|&i| neg.get(i) != anchor.get(i) && !frozen[i]).collect();
        let i = diffs[rng.random_range(0..diffs.len())];
        frozen[i] = true;
        remaining.retain(|n| n.get(i) == anchor.get(i));
    }
    frozen
}

/// Uniform feasible sampling for `budget` distinct evaluations.
pub fn random_search<F>(objective: F, constraint: &SparsityConstraint, budget: usize, seed: u64) -> OptimizeResult
where
    F: FnMut(&BinaryVector) -> f64,
{
    assert!(budget >= 1, "budget must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = budget.min(usize::try_from(constraint.feasible_count()).unwrap_or(usize::MAX));
    let mut ev = Evaluator::new(objective, constraint);
    let mut attempts = 0;
    while ev.trace.len() < cap && attempts < budget * ATTEMPTS_PER_EVAL {
        attempts += 1;
        ev.eval(constraint.sample_uniform(&mut rng)).expect("uniform samples are feasible");
    }
    ev.finish()
}
