use super::calc::{entails_parsed, positive_extensions, Entailment};
use super::rules::OpRuleSet;
use super::symbols::{parse_syms, LabeledSeq, Sym, SymbolSeq};

/// Class probabilities for one position, indexed like [`Sym::ALL`].
pub type ProbRow = [f64; 4];

/// Sequences with more blanks than this are not enumerated.
pub const MAX_BLANKS: usize = 8;

/// Output of greedy abduction over a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbductionResult {
    pub rules: OpRuleSet,
    /// Blank-free sequences, one per input example.
    pub completed: Vec<SymbolSeq>,
    pub consistent_mask: Vec<bool>,
}

impl AbductionResult {
    pub fn consistency(&self) -> usize {
        self.consistent_mask.iter().filter(|&&c| c).count()
    }
}

/// Source of explanations for single examples. Two implementations exist:
/// a direct walk of the column adder and a query against the logic engine.
pub trait Explainer {
    /// Among blank fillings (in the order given) and rule extensions that
    /// make the sequence parse and evaluate true, returns the first filling
    /// that admits any extension, with its minimal extension by
    /// [`OpRuleSet::extension_key`].
    fn best_positive(&self, seq: &SymbolSeq, rules: &OpRuleSet, fills: &[Vec<Sym>]) -> Option<(usize, OpRuleSet)>;

    /// First filling that parses and evaluates false under `rules` alone.
    fn first_negative(&self, seq: &SymbolSeq, rules: &OpRuleSet, fills: &[Vec<Sym>]) -> Option<usize>;
}

/// Explains examples by walking the column adder directly.
#[derive(Debug, Clone, Copy, Default)]
pub struct NativeExplainer;

impl Explainer for NativeExplainer {
    fn best_positive(&self, seq: &SymbolSeq, rules: &OpRuleSet, fills: &[Vec<Sym>]) -> Option<(usize, OpRuleSet)> {
        fills.iter().enumerate().find_map(|(fi, fill)| {
            let syms = seq.filled(fill).syms()?;
            let eq = parse_syms(&syms).ok()?;
            positive_extensions(rules, &eq)
                .into_iter()
                .min_by_key(|ext| ext.extension_key(rules))
                .map(|ext| (fi, ext))
        })
    }

    fn first_negative(&self, seq: &SymbolSeq, rules: &OpRuleSet, fills: &[Vec<Sym>]) -> Option<usize> {
        fills.iter().position(|fill| {
            seq.filled(fill)
                .syms()
                .and_then(|syms| parse_syms(&syms).ok())
                .is_some_and(|eq| entails_parsed(rules, &eq) == Entailment::False)
        })
    }
}

/// All assignments to the blanks of `seq`, most probable first. Without
/// probabilities, or among equally probable fillings, alphabet order
/// (`0 1 + =`, first blank most significant) decides.
///
/// At most [`MAX_BLANKS`] blanks are supported and `probs` must cover
/// the whole sequence.
pub fn fill_order(seq: &SymbolSeq, probs: Option<&[ProbRow]>) -> Vec<Vec<Sym>> {
    let blanks = seq.blanks();
    assert!(blanks.len() <= MAX_BLANKS, "too many blanks to enumerate");
    let mut fills: Vec<Vec<Sym>> = vec![Vec::new()];
    for _ in &blanks {
        fills = fills
            .into_iter()
            .flat_map(|prefix| {
                Sym::ALL.iter().map(move |&s| {
                    let mut f = prefix.clone();
                    f.push(s);
                    f
                })
            })
            .collect();
    }
    if let Some(probs) = probs {
        assert!(probs.len() >= seq.len(), "one probability row per position");
        let score = |fill: &Vec<Sym>| -> f64 {
            blanks
                .iter()
                .zip(fill)
                .map(|(&pos, sym)| probs[pos][sym.index()])
                .product()
        };
        let mut scored: Vec<(f64, Vec<Sym>)> = fills.into_iter().map(|f| (score(&f), f)).collect();
        // Stable sort keeps alphabet order among ties.
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        fills = scored.into_iter().map(|(_, f)| f).collect();
    }
    fills
}

/// Greedy abduction with alphabet-ordered blank filling.
pub fn abduce(batch: &[LabeledSeq], base: &OpRuleSet) -> AbductionResult {
    abduce_with(batch, None, base, &NativeExplainer)
}

/// Greedy abduction where blanks are filled in order of the perception
/// model's probabilities (`probs[i]` covers example `i`).
pub fn abduce_ranked(batch: &[LabeledSeq], probs: &[Vec<ProbRow>], base: &OpRuleSet) -> AbductionResult {
    abduce_with(batch, Some(probs), base, &NativeExplainer)
}

/// Greedy consistency maximization.
///
/// Positive examples are taken first, in input order: each commits the
/// first blank filling (in [`fill_order`]) that some functional extension
/// of the current table makes true, together with the smallest such
/// extension. Negative examples are then taken in input order against the
/// final table: each commits the first filling that parses and evaluates
/// false, and never adds rules. Examples with no commitment keep their most
/// probable filling and are marked inconsistent.
pub fn abduce_with<E: Explainer + ?Sized>(
    batch: &[LabeledSeq],
    probs: Option<&[Vec<ProbRow>]>,
    base: &OpRuleSet,
    explainer: &E,
) -> AbductionResult {
    if let Some(p) = probs {
        assert_eq!(p.len(), batch.len(), "one probability matrix per example");
    }
    let orders: Vec<Vec<Vec<Sym>>> = batch
        .iter()
        .enumerate()
        .map(|(i, ex)| fill_order(&ex.seq, probs.map(|p| p[i].as_slice())))
        .collect();
    let mut rules = *base;
    let mut chosen: Vec<Option<usize>> = vec![None; batch.len()];
    for (i, ex) in batch.iter().enumerate().filter(|(_, ex)| ex.label) {
        if let Some((fi, ext)) = explainer.best_positive(&ex.seq, &rules, &orders[i]) {
            rules = ext;
            chosen[i] = Some(fi);
        }
    }
    for (i, ex) in batch.iter().enumerate().filter(|(_, ex)| !ex.label) {
        chosen[i] = explainer.first_negative(&ex.seq, &rules, &orders[i]);
    }
    let completed = batch
        .iter()
        .zip(&chosen)
        .zip(&orders)
        .map(|((ex, c), order)| ex.seq.filled(&order[c.unwrap_or(0)]))
        .collect();
    AbductionResult {
        rules,
        completed,
        consistent_mask: chosen.iter().map(Option::is_some).collect(),
    }
}
