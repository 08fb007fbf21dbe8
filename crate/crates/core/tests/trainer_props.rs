mod common;

use abl_core::datasets::{self, DatasetSpec, EquationInstance, GroundTruth, Semantics};
use abl_core::dfo::BinaryVector;
use abl_core::equation::{abduce, LabeledSeq, OpRuleSet, ProbRow, SymbolSeq};
use abl_core::neural::{Network, NetworkSpec, Tensor, TrainConfig};
use abl_core::perception::{GlyphFamilySpec, PerceptionModel};
use abl_core::trainer::{
    self, propositionalize, substitution_objective, AbductiveModel, FeatureBuffer, LearningMode, PerceivedBatch,
    RelationalFeature, TrainerConfig, TrainerError, TrainerState,
};
use proptest::prelude::*;

fn one_hot(text: &str) -> Vec<ProbRow> {
    let seq: SymbolSeq = text.parse().unwrap();
    seq.syms()
        .unwrap()
        .iter()
        .map(|s| {
            let mut row = [0.0; 4];
            row[s.index()] = 1.0;
            row
        })
        .collect()
}

fn data(semantics: Semantics, lengths: Vec<usize>, per_length: usize, seed: u64) -> (Vec<EquationInstance>, GroundTruth) {
    let spec = DatasetSpec::new(semantics, GlyphFamilySpec::easy(seed + 50), lengths, per_length, seed);
    let (d, t) = datasets::generate(&spec).unwrap();
    (d.instances, t)
}

/// Perception fitted on the hidden symbols, standing in for a perfect reader.
fn oracle_perception(instances: &[EquationInstance], truth: &GroundTruth) -> PerceptionModel {
    let labeled = truth.labeled_images(instances);
    let mut p = PerceptionModel::new(0);
    let cfg = TrainConfig { learning_rate: 0.05, epochs: 30, minibatch: 8, seed: 0, l2: 0.0 };
    p.retrain(&labeled, &cfg).unwrap();
    assert_eq!(p.accuracy(&labeled), 1.0);
    p
}

fn feature(rules: OpRuleSet) -> RelationalFeature {
    RelationalFeature { rules, created_at_iteration: 0, source_consistency: 1 }
}

fn small_config(iterations: usize, curriculum: Vec<usize>) -> TrainerConfig {
    TrainerConfig { iterations, curriculum, restarts: 2, ..TrainerConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn feature_buffer_keeps_the_latest(capacity in 1usize..8, pushes in 0usize..30) {
        let mut buffer = FeatureBuffer::new(capacity);
        for t in 0..pushes {
            let evicted = buffer.push(RelationalFeature { created_at_iteration: t, ..feature(OpRuleSet::new()) });
            prop_assert_eq!(evicted.map(|f| f.created_at_iteration), t.checked_sub(capacity));
            prop_assert!(buffer.len() <= capacity);
        }
        let kept: Vec<usize> = buffer.snapshot().iter().map(|f| f.created_at_iteration).collect();
        let expected: Vec<usize> = (pushes.saturating_sub(capacity)..pushes).collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn substitution_search_is_bounded_by_the_exhaustive_optimum(seed in any::<u64>()) {
        let batch = common::micro_instance(seed);
        let greedy = common::greedy_max(&batch, 2);
        let exact = common::exhaustive_optimum(&batch, 2);
        prop_assert!(greedy <= exact);
        if batch.len() == 1 {
            prop_assert_eq!(greedy, exact);
        }
    }

    #[test]
    fn zero_substitution_is_plain_abduction(seed in 0u64..40) {
        let (instances, _) = data(Semantics::BinaryAdd, vec![5, 6], 4, seed);
        let perception = PerceptionModel::new(seed);
        let batch: Vec<&EquationInstance> = instances.iter().collect();
        let total: usize = batch.iter().map(|i| i.len()).sum();
        let zero = BinaryVector::zeros(total);
        let perceived = PerceivedBatch::perceive(&perception, &batch);
        let plain: Vec<LabeledSeq> = perceived
            .seqs
            .iter()
            .zip(&perceived.labels)
            .map(|(s, &l)| LabeledSeq::new(s.clone(), l))
            .collect();
        prop_assert_eq!(
            substitution_objective(&perception, &batch, &zero),
            abduce(&plain, &OpRuleSet::new()).consistency()
        );
    }
}

#[test]
fn blanking_two_positions_explains_a_misread_equation() {
    let batch = PerceivedBatch::from_probs(vec![true], vec![one_hot("11111")]);
    let s = BinaryVector::from_bits(vec![false, true, false, true, false]);
    let result = batch.abduce(&s, &OpRuleSet::new());
    assert_eq!(result.consistency(), 1);
    assert_eq!(result.completed[0], "1+1=1".parse().unwrap());
}

/// Positives commit their most probable reading, which can rule out a
/// less probable one that would also falsify both negatives.
#[test]
fn greedy_commitment_can_miss_the_optimum() {
    let batch = common::micro_instance(6571629178838659707);
    let text: Vec<String> = batch.seqs.iter().map(|s| s.to_string()).collect();
    assert_eq!(text, ["0+1=0", "1+0=1", "0+1=1"]);
    assert_eq!(batch.labels, [false, false, true]);
    assert_eq!(common::greedy_max(&batch, 2), 2);
    assert_eq!(common::exhaustive_optimum(&batch, 2), 3);
}

#[test]
fn correct_batch_is_explained_without_blanks() {
    let seqs = ["1+1=10", "0+1=1", "1+10=11"];
    let probs = seqs.iter().map(|s| one_hot(s)).collect();
    let batch = PerceivedBatch::from_probs(vec![true; 3], probs);
    let zero = BinaryVector::zeros(batch.block_sizes().iter().sum());
    assert_eq!(batch.objective(&zero, &OpRuleSet::new()), 3);
}

#[test]
fn features_follow_the_arithmetic_oracle() {
    let (instances, truth) = data(Semantics::BinaryAdd, vec![5, 6, 7], 10, 3);
    let perception = oracle_perception(&instances, &truth);
    let model = AbductiveModel::new(
        perception,
        vec![feature(OpRuleSet::addition()), feature(OpRuleSet::xor())],
        Network::new(NetworkSpec::decision(2, 0)).unwrap(),
    )
    .unwrap();
    let (rows, labels) = propositionalize(&model, &instances);
    for ((row, label), rec) in rows.iter().zip(&labels).zip(&truth.records) {
        let eq = abl_core::equation::parse_equation(&rec.seq).unwrap();
        let (x, y, z) = (eq.x.value(), eq.y.value(), eq.z.value());
        assert_eq!(row, &vec![x + y == z, x ^ y == z], "{}", rec.seq);
        assert_eq!(*label, x + y == z);
    }
}

#[test]
fn prediction_is_a_pure_function() {
    let (instances, _) = data(Semantics::BinaryAdd, vec![5, 6], 6, 8);
    let model = AbductiveModel::new(
        PerceptionModel::new(4),
        vec![feature(OpRuleSet::addition())],
        Network::new(NetworkSpec::decision(1, 4)).unwrap(),
    )
    .unwrap();
    let first = model.predict_batch(&instances);
    let single: Vec<bool> = instances.iter().map(|i| model.predict(i)).collect();
    assert_eq!(first, single);
    assert_eq!(model.clone().predict_batch(&instances), first);
}

#[test]
fn empty_stage_is_rejected() {
    let (instances, _) = data(Semantics::BinaryAdd, vec![6, 7], 4, 1);
    let state = TrainerState::new(small_config(4, vec![5]), PerceptionModel::new(0), LearningMode::Scratch).unwrap();
    assert!(matches!(state.subsample(&instances, 0), Err(TrainerError::EmptyStage(5))));
}

#[test]
fn subsamples_respect_the_stage_cap() {
    let (instances, _) = data(Semantics::BinaryAdd, vec![5, 6, 7, 8], 20, 2);
    let cfg = small_config(40, vec![5, 6, 7, 8]);
    let state = TrainerState::new(cfg.clone(), PerceptionModel::new(0), LearningMode::Scratch).unwrap();
    for t in 0..cfg.iterations {
        let picks = state.subsample(&instances, t).unwrap();
        assert!((cfg.subsample_min..=cfg.subsample_max).contains(&picks.len()));
        assert!(picks.iter().all(|&i| instances[i].len() <= cfg.stage_cap(t)));
        let mut unique = picks.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), picks.len());
        assert_eq!(state.subsample(&instances, t).unwrap(), picks);
    }
}

#[test]
fn frozen_perception_learns_the_target_table() {
    let (source, source_truth) = data(Semantics::BinaryAdd, vec![5, 6, 7], 20, 11);
    let perception = oracle_perception(&source, &source_truth);
    let before = perception.network().to_bytes();
    let (target, _) = data(Semantics::Xor, vec![5, 7], 60, 12);
    let run = trainer::transfer_perception(&perception, &target, &small_config(16, vec![5, 7]), None).unwrap();
    assert_eq!(perception.network().to_bytes(), before);
    assert_eq!(run.model.perception().network().to_bytes(), before);
    assert!(
        run.model.features().iter().any(|f| f.rules == OpRuleSet::xor()),
        "no feature equals the exclusive-or table"
    );
    assert!(run.training_accuracy() > 0.95);
}

#[test]
fn frozen_knowledge_keeps_features_and_decision() {
    let decision = {
        let mut net = Network::new(NetworkSpec::decision(1, 3)).unwrap();
        let x = Tensor::from_rows(&[vec![0.0], vec![1.0]], &[1]).unwrap();
        let cfg = TrainConfig { learning_rate: 0.5, epochs: 300, minibatch: 2, seed: 0, l2: 0.0 };
        net.fit(&x, &[0, 1], &cfg).unwrap();
        net
    };
    let source = AbductiveModel::new(PerceptionModel::new(1), vec![feature(OpRuleSet::addition())], decision).unwrap();
    let (target, _) = data(Semantics::BinaryAdd, vec![5, 6], 60, 13);
    let run = trainer::transfer_knowledge(&source, &target, &small_config(20, vec![5, 6]), None).unwrap();
    assert_eq!(run.model.features(), source.features());
    assert_eq!(run.model.decision().to_bytes(), source.decision().to_bytes());
    assert_ne!(run.model.perception().network().to_bytes(), source.perception().network().to_bytes());
}
