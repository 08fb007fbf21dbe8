//! Brute-force optimum of the substitution search on tiny batches.

use std::collections::BTreeSet;

use abl_core::dfo::BinaryVector;
use abl_core::equation::{entails, parse_equation, Entailment, OpResult, OpRuleSet, ProbRow, Sym, SymbolSeq};
use abl_core::trainer::PerceivedBatch;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAIRS: usize = 4;

/// Up to three perceived length-5 equations with random probability rows.
/// Each starts as a well-formed `d+d=d` and then has symbols misread.
pub fn micro_instance(seed: u64) -> PerceivedBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3);
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    for _ in 0..n {
        let mut syms = [Sym::D0, Sym::Plus, Sym::D0, Sym::Eq, Sym::D0];
        for i in [0, 2, 4] {
            syms[i] = Sym::ALL[rng.random_range(0..2)];
        }
        for s in syms.iter_mut() {
            if rng.random_bool(0.3) {
                *s = Sym::ALL[rng.random_range(0..4)];
            }
        }
        let rows: Vec<ProbRow> = syms
            .iter()
            .map(|s| {
                let mut row: ProbRow = std::array::from_fn(|_| rng.random_range(0.0..1.0));
                row[s.index()] = 1.5;
                let total: f64 = row.iter().sum();
                row.map(|p| p / total)
            })
            .collect();
        labels.push(rng.random_bool(0.5));
        probs.push(rows);
    }
    PerceivedBatch::from_probs(labels, probs)
}

/// Every blank mask over `len` positions with at most `k` blanks.
fn masks(len: usize, k: usize) -> Vec<Vec<bool>> {
    (0..1u32 << len)
        .filter(|m| m.count_ones() as usize <= k)
        .map(|m| (0..len).map(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Best objective over every feasible substitution vector.
pub fn greedy_max(batch: &PerceivedBatch, k: usize) -> usize {
    let per_eq: Vec<Vec<Vec<bool>>> = batch.seqs.iter().map(|s| masks(s.len(), k)).collect();
    let mut best = 0;
    let mut choice = vec![0usize; per_eq.len()];
    loop {
        let bits: Vec<bool> = choice.iter().zip(&per_eq).flat_map(|(&c, m)| m[c].clone()).collect();
        best = best.max(batch.objective(&BinaryVector::from_bits(bits), &OpRuleSet::new()));
        let mut i = 0;
        loop {
            if i == choice.len() {
                return best;
            }
            choice[i] += 1;
            if choice[i] < per_eq[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Complete, parseable sequences reachable from `seq` by rewriting at most
/// `k` positions.
fn readings(seq: &SymbolSeq, k: usize) -> Vec<SymbolSeq> {
    let base = seq.syms().expect("perceived sequences are complete");
    let mut out = BTreeSet::new();
    for mask in masks(base.len(), k) {
        let free: Vec<usize> = (0..base.len()).filter(|&i| mask[i]).collect();
        for mut code in 0..4usize.pow(free.len() as u32) {
            let mut syms = base.clone();
            for &i in &free {
                syms[i] = Sym::ALL[code % 4];
                code /= 4;
            }
            out.insert(syms);
        }
    }
    out.into_iter()
        .map(|s| SymbolSeq::from_syms(&s))
        .filter(|s| parse_equation(s).is_ok())
        .collect()
}

fn table(code: usize) -> OpRuleSet {
    let mut rules = OpRuleSet::new();
    for p in 0..PAIRS {
        let c = code / 7usize.pow(p as u32) % 7;
        if c < 6 {
            rules.insert((p / 2) as u8, (p % 2) as u8, OpResult::PREFERENCE[c]).unwrap();
        }
    }
    rules
}

fn without(rules: &OpRuleSet, p: usize) -> OpRuleSet {
    let mut out = OpRuleSet::new();
    for q in 0..PAIRS {
        if q != p {
            if let Some(r) = rules.get((q / 2) as u8, (q % 2) as u8) {
                out.insert((q / 2) as u8, (q % 2) as u8, r).unwrap();
            }
        }
    }
    out
}

/// Pairs of `rules` that evaluating `seq` looks up.
fn used_pairs(rules: &OpRuleSet, seq: &SymbolSeq) -> u8 {
    (0..PAIRS)
        .filter(|&p| rules.get((p / 2) as u8, (p % 2) as u8).is_some())
        .filter(|&p| entails(&without(rules, p), seq) == Entailment::Unknown)
        .fold(0, |acc, p| acc | 1 << p)
}

/// Exact optimum: over every rule table, reading and blank choice, the
/// most equations explained, where a positive is explained when it
/// evaluates true and a negative when it parses and evaluates false. Rules
/// are hypotheses for positive evidence, so every rule in the table must
/// be used by some explained positive.
pub fn exhaustive_optimum(batch: &PerceivedBatch, k: usize) -> usize {
    let reads: Vec<Vec<SymbolSeq>> = batch.seqs.iter().map(|s| readings(s, k)).collect();
    let mut best = 0;
    for code in 0..7usize.pow(PAIRS as u32) {
        let rules = table(code);
        let defined = (0..PAIRS)
            .filter(|&p| rules.get((p / 2) as u8, (p % 2) as u8).is_some())
            .fold(0u8, |acc, p| acc | 1 << p);
        // Each equation: the support masks under which it can be explained.
        let options: Vec<BTreeSet<u8>> = reads
            .iter()
            .zip(&batch.labels)
            .map(|(rs, &label)| {
                rs.iter()
                    .filter_map(|r| match (label, entails(&rules, r)) {
                        (true, Entailment::True) => Some(used_pairs(&rules, r)),
                        (false, Entailment::False) => Some(0),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        if let Some(v) = best_cover(&options, 0, defined) {
            best = best.max(v);
        }
    }
    best
}

/// Most equations explained with one option each, such that the chosen
/// supports cover every defined pair.
fn best_cover(options: &[BTreeSet<u8>], support: u8, defined: u8) -> Option<usize> {
    let Some((first, rest)) = options.split_first() else {
        return (support == defined).then_some(0);
    };
    let mut best = best_cover(rest, support, defined);
    for &m in first {
        if let Some(v) = best_cover(rest, support | m, defined) {
            best = best.max(Some(v + 1));
        }
    }
    best
}
