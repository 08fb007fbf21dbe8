//! The abductive learning loop.
//!
//! Each iteration draws a few equations, perceives them, searches for a
//! sparse set of positions to blank out so that greedy abduction explains as
//! many equations as possible, keeps the abduced rule table as a relational
//! feature, and retrains perception on the completed symbols. A small
//! decision network finally maps feature vectors to labels.

mod bundle;
mod features;

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::EquationInstance;
use crate::derive_seed;
use crate::dfo::{optimize, BinaryVector, DfoConfig, DfoError, SparsityConstraint};
use crate::equation::{abduce_ranked, parse_equation, entails, AbductionResult, Entailment, LabeledSeq, OpRuleSet, ProbRow, Sym, SymbolSeq};
use crate::neural::{argmax, Network, NetworkSpec, NeuralError, Tensor, TrainConfig};
use crate::perception::{sequence_of, GlyphImage, PerceptionModel};

pub use bundle::{
    features_from_text, features_to_text, load_model, read_log_csv, save_model, write_log_csv, BundleManifest,
    BUNDLE_FORMAT_VERSION,
};
pub use features::{consensus_rules, FeatureBuffer, RelationalFeature};

#[derive(Debug, thiserror::Error)]
pub enum TrainerError {
    #[error("invalid trainer configuration: {0}")]
    InvalidConfig(String),
    #[error("no training instances of length at most {0}")]
    EmptyStage(usize),
    #[error("no relational features to work with")]
    NoFeatures,
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Dfo(#[from] DfoError),
    #[error("malformed model bundle: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const STREAM_PERCEPTION_INIT: u64 = 1;
const STREAM_DECISION_INIT: u64 = 2;
const STREAM_SUBSAMPLE: u64 = 3;
const STREAM_DFO: u64 = 4;
const STREAM_RETRAIN: u64 = 5;
const STREAM_DECISION_TRAIN: u64 = 6;
const STREAM_RESTART: u64 = 1 << 16;

fn stream_seed(seed: u64, stream: u64, t: u64) -> u64 {
    derive_seed(derive_seed(seed, stream), t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    /// Total iterations, split evenly over the curriculum stages.
    pub iterations: usize,
    pub subsample_min: usize,
    pub subsample_max: usize,
    /// Maximum blanks per equation.
    pub k: usize,
    pub feature_capacity: usize,
    /// Maximum equation length of each stage.
    pub curriculum: Vec<usize>,
    pub perception: TrainConfig,
    pub decision: TrainConfig,
    pub dfo: DfoConfig,
    pub seed: u64,
    /// Fresh attempts allowed after the first when training accuracy stays
    /// below `accept_accuracy`.
    pub restarts: usize,
    pub accept_accuracy: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            iterations: 120,
            subsample_min: 5,
            subsample_max: 10,
            k: 2,
            feature_capacity: 20,
            curriculum: vec![5, 6, 7, 8],
            perception: TrainConfig {
                learning_rate: 0.05,
                epochs: 6,
                minibatch: 8,
                seed: 0,
                l2: 0.0,
            },
            decision: TrainConfig {
                learning_rate: 0.1,
                epochs: 60,
                minibatch: 16,
                seed: 0,
                l2: 1e-4,
            },
            dfo: DfoConfig::default(),
            seed: 0,
            restarts: 9,
            accept_accuracy: 0.8,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), TrainerError> {
        let fail = |m: &str| Err(TrainerError::InvalidConfig(m.to_string()));
        if self.subsample_min == 0 || self.subsample_min > self.subsample_max {
            return fail("subsample sizes must satisfy 1 <= min <= max");
        }
        if self.k < 2 {
            return fail("k must be at least 2");
        }
        if self.feature_capacity == 0 {
            return fail("feature capacity must be positive");
        }
        if self.curriculum.is_empty() || self.curriculum.contains(&0) {
            return fail("curriculum needs at least one positive length cap");
        }
        if !(0.0..=1.0).contains(&self.accept_accuracy) {
            return fail("accept_accuracy must lie in [0, 1]");
        }
        self.perception.validate()?;
        self.decision.validate()?;
        self.dfo.validate()?;
        Ok(())
    }

    /// Length cap in force at iteration `t`.
    pub fn stage_cap(&self, t: usize) -> usize {
        let n = self.curriculum.len();
        let idx = (t * n).checked_div(self.iterations).unwrap_or(0).min(n - 1);
        self.curriculum[idx]
    }
}

/// One batch as seen through a perception snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedBatch {
    pub labels: Vec<bool>,
    pub seqs: Vec<SymbolSeq>,
    pub probs: Vec<Vec<ProbRow>>,
}

impl PerceivedBatch {
    pub fn perceive(perception: &PerceptionModel, batch: &[&EquationInstance]) -> Self {
        let images: Vec<&GlyphImage> = batch.iter().flat_map(|inst| inst.images.iter()).collect();
        let mut rows = perception.probabilities(&images).into_iter();
        let probs: Vec<Vec<ProbRow>> = batch.iter().map(|inst| rows.by_ref().take(inst.len()).collect()).collect();
        PerceivedBatch::from_probs(batch.iter().map(|inst| inst.label).collect(), probs)
    }

    /// Uses the argmax of each row as the perceived symbol.
    pub fn from_probs(labels: Vec<bool>, probs: Vec<Vec<ProbRow>>) -> Self {
        assert_eq!(labels.len(), probs.len(), "one label per equation");
        let seqs = probs.iter().map(|p| sequence_of(p)).collect();
        PerceivedBatch { labels, seqs, probs }
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.seqs.iter().map(SymbolSeq::len).collect()
    }

    /// The perceived sequences with every position where `s` is set blanked.
    /// `s` needs one bit per perceived symbol.
    pub fn blanked(&self, s: &BinaryVector) -> Vec<LabeledSeq> {
        assert_eq!(s.len(), self.block_sizes().iter().sum::<usize>(), "one bit per perceived symbol");
        let mut offset = 0;
        self.seqs
            .iter()
            .zip(&self.labels)
            .map(|(seq, &label)| {
                let mask = &s.bits()[offset..offset + seq.len()];
                offset += seq.len();
                LabeledSeq::new(seq.blanked(mask), label)
            })
            .collect()
    }

    pub fn abduce(&self, s: &BinaryVector, base: &OpRuleSet) -> AbductionResult {
        abduce_ranked(&self.blanked(s), &self.probs, base)
    }

    pub fn objective(&self, s: &BinaryVector, base: &OpRuleSet) -> usize {
        self.abduce(s, base).consistency()
    }
}

/// Consistency reached by abduction from empty rules after blanking the
/// positions set in `s`.
pub fn substitution_objective(perception: &PerceptionModel, batch: &[&EquationInstance], s: &BinaryVector) -> usize {
    PerceivedBatch::perceive(perception, batch).objective(s, &OpRuleSet::new())
}

/// What a training loop may change.
#[derive(Debug, Clone, PartialEq)]
pub enum LearningMode {
    /// Perception is retrained and features are collected.
    Scratch,
    /// Perception stays fixed; features are collected.
    FrozenPerception,
    /// Features stay fixed and abduction starts from `base`; perception is retrained.
    FrozenKnowledge { base: OpRuleSet },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    /// Length cap of the curriculum stage.
    pub stage: usize,
    pub consistency: usize,
    pub subsample_size: usize,
    /// Probe accuracy of the perception used in this iteration, if a probe was given.
    pub perception_accuracy: Option<f64>,
    pub wall_time_ms: u64,
}

/// Mutable state of one training run.
#[derive(Debug, Clone)]
pub struct TrainerState {
    pub config: TrainerConfig,
    pub perception: PerceptionModel,
    pub buffer: FeatureBuffer,
    pub mode: LearningMode,
    pub log: Vec<IterationLog>,
}

impl TrainerState {
    pub fn new(config: TrainerConfig, perception: PerceptionModel, mode: LearningMode) -> Result<Self, TrainerError> {
        config.validate()?;
        let buffer = FeatureBuffer::new(config.feature_capacity);
        Ok(TrainerState {
            config,
            perception,
            buffer,
            mode,
            log: Vec::new(),
        })
    }

    fn base_rules(&self) -> OpRuleSet {
        match &self.mode {
            LearningMode::FrozenKnowledge { base } => *base,
            _ => OpRuleSet::new(),
        }
    }

    /// Draws the subsample of iteration `t` (indices into `instances`).
    pub fn subsample(&self, instances: &[EquationInstance], t: usize) -> Result<Vec<usize>, TrainerError> {
        let cap = self.config.stage_cap(t);
        let eligible: Vec<usize> = (0..instances.len()).filter(|&i| instances[i].len() <= cap).collect();
        if eligible.is_empty() {
            return Err(TrainerError::EmptyStage(cap));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.config.seed, STREAM_SUBSAMPLE, t as u64));
        let size = rng.random_range(self.config.subsample_min..=self.config.subsample_max).min(eligible.len());
        Ok(sample(&mut rng, eligible.len(), size).into_iter().map(|j| eligible[j]).collect())
    }

    /// One round of perceive, search, abduce, record and retrain.
    pub fn training_iteration(
        &mut self,
        instances: &[EquationInstance],
        t: usize,
        probe: Option<&[(&GlyphImage, Sym)]>,
    ) -> Result<IterationLog, TrainerError> {
        let start = Instant::now();
        let cfg = &self.config;
        let picks = self.subsample(instances, t)?;
        let batch: Vec<&EquationInstance> = picks.iter().map(|&i| &instances[i]).collect();
        let accuracy = probe.map(|p| self.perception.accuracy(p));

        let perceived = PerceivedBatch::perceive(&self.perception, &batch);
        let base = self.base_rules();
        let constraint = SparsityConstraint::from_block_sizes(cfg.k, &perceived.block_sizes())?;
        let dfo_cfg = DfoConfig {
            seed: stream_seed(cfg.seed ^ cfg.dfo.seed, STREAM_DFO, t as u64),
            ..cfg.dfo.clone()
        };
        let search = optimize(|s| perceived.objective(s, &base) as f64, &constraint, &dfo_cfg)?;
        let abduced = perceived.abduce(&search.best, &base);
        let consistency = abduced.consistency();

        if consistency > 0 && !matches!(self.mode, LearningMode::FrozenKnowledge { .. }) {
            self.buffer.push(RelationalFeature {
                rules: abduced.rules,
                created_at_iteration: t,
                source_consistency: consistency,
            });
        }

        if self.mode != LearningMode::FrozenPerception {
            // A wrong equation stays wrong under almost any misreading, so a
            // revision that only serves to falsify a negative is no evidence.
            // Revisions that make an unreadable sequence parse still count.
            let pairs: Vec<(&GlyphImage, Sym)> = batch
                .iter()
                .zip(&abduced.completed)
                .zip(&perceived.seqs)
                .zip(&abduced.consistent_mask)
                .filter(|(((inst, done), seen), &ok)| {
                    ok && (inst.label || done == seen || parse_equation(seen).is_err())
                })
                .flat_map(|(((inst, done), _), _)| {
                    inst.images.iter().zip(done.syms().expect("abduction fills every blank"))
                })
                .collect();
            if !pairs.is_empty() {
                let train = TrainConfig {
                    seed: stream_seed(cfg.seed ^ cfg.perception.seed, STREAM_RETRAIN, t as u64),
                    ..cfg.perception.clone()
                };
                self.perception.retrain(&pairs, &train)?;
            }
        }

        let entry = IterationLog {
            iteration: t,
            stage: self.config.stage_cap(t),
            consistency,
            subsample_size: batch.len(),
            perception_accuracy: accuracy,
            wall_time_ms: start.elapsed().as_millis() as u64,
        };
        self.log.push(entry.clone());
        Ok(entry)
    }

    fn check_stages(&self, instances: &[EquationInstance]) -> Result<(), TrainerError> {
        for &cap in &self.config.curriculum {
            if !instances.iter().any(|inst| inst.len() <= cap) {
                return Err(TrainerError::EmptyStage(cap));
            }
        }
        Ok(())
    }

    fn run_range(
        &mut self,
        instances: &[EquationInstance],
        range: std::ops::Range<usize>,
        probe: Option<&[(&GlyphImage, Sym)]>,
    ) -> Result<(), TrainerError> {
        for t in range {
            self.training_iteration(instances, t, probe)?;
        }
        Ok(())
    }
}

/// Perception, relational features and decision network of a trained learner.
#[derive(Debug, Clone, PartialEq)]
pub struct AbductiveModel {
    perception: PerceptionModel,
    features: Vec<RelationalFeature>,
    decision: Network,
}

impl AbductiveModel {
    pub fn new(perception: PerceptionModel, features: Vec<RelationalFeature>, decision: Network) -> Result<Self, TrainerError> {
        if features.is_empty() {
            return Err(TrainerError::NoFeatures);
        }
        if decision.spec().input_len() != features.len() || decision.classes() != 2 || !decision.is_classifier() {
            return Err(TrainerError::Neural(NeuralError::ShapeMismatch(format!(
                "decision network must map {} features to two classes",
                features.len()
            ))));
        }
        Ok(AbductiveModel {
            perception,
            features,
            decision,
        })
    }

    pub fn perception(&self) -> &PerceptionModel {
        &self.perception
    }

    pub fn features(&self) -> &[RelationalFeature] {
        &self.features
    }

    pub fn decision(&self) -> &Network {
        &self.decision
    }

    /// Whether each feature's rules make `seq` a true equation.
    pub fn feature_vector(&self, seq: &SymbolSeq) -> Vec<bool> {
        feature_vector(&self.features, seq)
    }

    pub fn predict(&self, instance: &EquationInstance) -> bool {
        self.predict_batch(std::slice::from_ref(instance))[0]
    }

    pub fn predict_batch(&self, instances: &[EquationInstance]) -> Vec<bool> {
        if instances.is_empty() {
            return Vec::new();
        }
        let rows = propositionalize_with(&self.perception, &self.features, instances);
        let out = self.decision.forward(&feature_tensor(&rows)).expect("decision arity matches features");
        out.iter_rows().map(|r| argmax(r) == 1).collect()
    }

    /// Fraction of instances whose label is predicted correctly.
    pub fn accuracy(&self, instances: &[EquationInstance]) -> f64 {
        if instances.is_empty() {
            return 0.0;
        }
        let hits = self
            .predict_batch(instances)
            .iter()
            .zip(instances)
            .filter(|(p, inst)| **p == inst.label)
            .count();
        hits as f64 / instances.len() as f64
    }

    /// Accuracy per equation length, ascending by length.
    pub fn accuracy_by_length(&self, instances: &[EquationInstance]) -> Vec<LengthAccuracy> {
        let predictions = self.predict_batch(instances);
        let mut lengths: Vec<usize> = instances.iter().map(EquationInstance::len).collect();
        lengths.sort_unstable();
        lengths.dedup();
        lengths
            .into_iter()
            .map(|length| {
                let (count, hits) = instances
                    .iter()
                    .zip(&predictions)
                    .filter(|(inst, _)| inst.len() == length)
                    .fold((0, 0), |(n, h), (inst, &p)| (n + 1, h + usize::from(p == inst.label)));
                LengthAccuracy {
                    length,
                    count,
                    accuracy: hits as f64 / count as f64,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthAccuracy {
    pub length: usize,
    pub count: usize,
    pub accuracy: f64,
}

fn feature_vector(features: &[RelationalFeature], seq: &SymbolSeq) -> Vec<bool> {
    features
        .iter()
        .map(|f| entails(&f.rules, seq) == Entailment::True)
        .collect()
}

fn propositionalize_with(
    perception: &PerceptionModel,
    features: &[RelationalFeature],
    instances: &[EquationInstance],
) -> Vec<Vec<bool>> {
    let images: Vec<&GlyphImage> = instances.iter().flat_map(|inst| inst.images.iter()).collect();
    let mut rows = perception.probabilities(&images).into_iter();
    instances
        .iter()
        .map(|inst| {
            let probs: Vec<ProbRow> = rows.by_ref().take(inst.len()).collect();
            feature_vector(features, &sequence_of(&probs))
        })
        .collect()
}

fn feature_tensor(rows: &[Vec<bool>]) -> Tensor {
    let values: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&b| f64::from(u8::from(b))).collect())
        .collect();
    let width = rows.first().map_or(0, Vec::len);
    Tensor::from_rows(&values, &[width]).expect("rows share the feature count")
}

/// Feature matrix (one row per instance) and labels.
/// The model must have at least one feature.
pub fn propositionalize(model: &AbductiveModel, instances: &[EquationInstance]) -> (Vec<Vec<bool>>, Vec<bool>) {
    assert!(!model.features.is_empty(), "propositionalize needs at least one feature");
    (
        propositionalize_with(&model.perception, &model.features, instances),
        instances.iter().map(|inst| inst.label).collect(),
    )
}

fn train_decision(
    perception: &PerceptionModel,
    features: &[RelationalFeature],
    instances: &[EquationInstance],
    cfg: &TrainerConfig,
) -> Result<Network, TrainerError> {
    if features.is_empty() {
        return Err(TrainerError::NoFeatures);
    }
    let rows = propositionalize_with(perception, features, instances);
    let labels: Vec<usize> = instances.iter().map(|inst| usize::from(inst.label)).collect();
    let mut net = Network::new(NetworkSpec::decision(
        features.len(),
        stream_seed(cfg.seed, STREAM_DECISION_INIT, 0),
    ))?;
    let train = TrainConfig {
        seed: stream_seed(cfg.seed ^ cfg.decision.seed, STREAM_DECISION_TRAIN, 0),
        ..cfg.decision.clone()
    };
    net.fit(&feature_tensor(&rows), &labels, &train)?;
    Ok(net)
}

/// How one attempt of a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptOutcome {
    pub iterations: usize,
    /// Accuracy on the training equations; `None` if no feature was found.
    pub training_accuracy: Option<f64>,
}

/// A finished run: the model and what happened on the way.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub model: AbductiveModel,
    /// Every iteration of every attempt, numbered consecutively.
    pub log: Vec<IterationLog>,
    /// Probe accuracy of the kept attempt after its last iteration.
    pub final_perception_accuracy: Option<f64>,
    pub attempts: Vec<AttemptOutcome>,
    /// Index into `attempts` of the attempt whose model was kept.
    pub kept_attempt: usize,
}

impl TrainingRun {
    pub fn training_accuracy(&self) -> f64 {
        self.attempts[self.kept_attempt].training_accuracy.unwrap_or(0.0)
    }

    /// Iterations spent until the kept attempt first explained a whole
    /// subsample, counting all iterations of attempts that ran before it.
    pub fn convergence_iteration(&self) -> Option<usize> {
        let start: usize = self.attempts[..self.kept_attempt].iter().map(|a| a.iterations).sum();
        self.log[start..]
            .iter()
            .take(self.attempts[self.kept_attempt].iterations)
            .find(|e| e.consistency == e.subsample_size)
            .map(|e| e.iteration)
    }
}

enum Start<'a> {
    Scratch,
    Perception(&'a PerceptionModel),
    Knowledge(&'a AbductiveModel, OpRuleSet),
}

fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        seed
    } else {
        derive_seed(seed, STREAM_RESTART + attempt as u64)
    }
}

fn assemble(
    start: &Start<'_>,
    state: &TrainerState,
    instances: &[EquationInstance],
) -> Result<Option<AbductiveModel>, TrainerError> {
    let perception = state.perception.clone();
    if let Start::Knowledge(source, _) = start {
        return AbductiveModel::new(perception, source.features.clone(), source.decision.clone()).map(Some);
    }
    let features = state.buffer.snapshot();
    if features.is_empty() {
        return Ok(None);
    }
    let decision = train_decision(&perception, &features, instances, &state.config)?;
    AbductiveModel::new(perception, features, decision).map(Some)
}

fn train_attempts(
    start: Start<'_>,
    instances: &[EquationInstance],
    cfg: &TrainerConfig,
    probe: Option<&[(&GlyphImage, Sym)]>,
) -> Result<TrainingRun, TrainerError> {
    cfg.validate()?;
    let mut log = Vec::new();
    let mut attempts = Vec::new();
    let mut best: Option<(f64, usize, AbductiveModel, Option<f64>)> = None;
    for attempt in 0..=cfg.restarts {
        let acfg = TrainerConfig {
            seed: attempt_seed(cfg.seed, attempt),
            ..cfg.clone()
        };
        let (perception, mode) = match &start {
            Start::Scratch => (
                PerceptionModel::new(stream_seed(acfg.seed, STREAM_PERCEPTION_INIT, 0)),
                LearningMode::Scratch,
            ),
            Start::Perception(p) => ((*p).clone(), LearningMode::FrozenPerception),
            Start::Knowledge(_, base) => (
                PerceptionModel::new(stream_seed(acfg.seed, STREAM_PERCEPTION_INIT, 0)),
                LearningMode::FrozenKnowledge { base: *base },
            ),
        };
        let mut state = TrainerState::new(acfg, perception, mode)?;
        state.check_stages(instances)?;
        // An attempt that explained nothing in the whole first stage has
        // never retrained perception and will not recover.
        let first_stage = (0..cfg.iterations).take_while(|&t| cfg.stage_cap(t) == cfg.curriculum[0]).count();
        state.run_range(instances, 0..first_stage, probe)?;
        let stuck = state.log.iter().all(|e| e.consistency == 0);
        if !stuck {
            state.run_range(instances, first_stage..cfg.iterations, probe)?;
        }

        let mut outcome = AttemptOutcome {
            iterations: state.log.len(),
            training_accuracy: None,
        };
        let offset = log.len();
        log.extend(state.log.drain(..).map(|mut e| {
            e.iteration += offset;
            e
        }));
        if stuck {
            attempts.push(outcome);
            continue;
        }
        if let Some(model) = assemble(&start, &state, instances)? {
            let accuracy = model.accuracy(instances);
            outcome.training_accuracy = Some(accuracy);
            if best.as_ref().is_none_or(|b| accuracy > b.0) {
                let probe_accuracy = probe.map(|p| model.perception.accuracy(p));
                best = Some((accuracy, attempt, model, probe_accuracy));
            }
        }
        attempts.push(outcome);
        if best.as_ref().is_some_and(|b| b.0 >= cfg.accept_accuracy) {
            break;
        }
    }
    let (_, kept_attempt, model, final_perception_accuracy) = best.ok_or(TrainerError::NoFeatures)?;
    Ok(TrainingRun {
        model,
        log,
        final_perception_accuracy,
        attempts,
        kept_attempt,
    })
}

/// Trains perception, features and decision network from labeled equations.
/// `probe` is only used to log perception accuracy.
///
/// A finished attempt whose model classifies fewer than
/// `cfg.accept_accuracy` of the training equations correctly is followed
/// by a fresh one, up to `cfg.restarts` times; the best attempt is kept.
pub fn fit(
    instances: &[EquationInstance],
    cfg: &TrainerConfig,
    probe: Option<&[(&GlyphImage, Sym)]>,
) -> Result<TrainingRun, TrainerError> {
    train_attempts(Start::Scratch, instances, cfg, probe)
}

/// Learns features and decision network on top of a fixed perception model.
pub fn transfer_perception(
    source: &PerceptionModel,
    instances: &[EquationInstance],
    cfg: &TrainerConfig,
    probe: Option<&[(&GlyphImage, Sym)]>,
) -> Result<TrainingRun, TrainerError> {
    train_attempts(Start::Perception(source), instances, cfg, probe)
}

/// Trains a fresh perception model under a source model's fixed features
/// and decision network. Abduction is constrained by the consensus of the
/// source's rule tables (see [`consensus_rules`]).
pub fn transfer_knowledge(
    source: &AbductiveModel,
    instances: &[EquationInstance],
    cfg: &TrainerConfig,
    probe: Option<&[(&GlyphImage, Sym)]>,
) -> Result<TrainingRun, TrainerError> {
    let base = consensus_rules(&source.features).ok_or(TrainerError::NoFeatures)?;
    train_attempts(Start::Knowledge(source, base), instances, cfg, probe)
}
