use abl_core::equation::{
    abduce, abduce_with, consistency, domain_theory, entails, parse_equation, rules_to_delta, DigitList, Entailment,
    LabeledSeq, NativeExplainer, OpResult, OpRuleSet, PrologExplainer, Slot, Sym, SymbolSeq,
};
use abl_core::logic::check_ic;
use proptest::prelude::*;

fn numerals(max_len: u32) -> Vec<DigitList> {
    (0..1u128 << max_len).map(DigitList::from_value).collect()
}

fn equation(x: &DigitList, y: &DigitList, z: &DigitList) -> SymbolSeq {
    let syms: Vec<Sym> = x
        .syms()
        .chain([Sym::Plus])
        .chain(y.syms())
        .chain([Sym::Eq])
        .chain(z.syms())
        .collect();
    SymbolSeq::from_syms(&syms)
}

/// Every equation with operands of at most six digits against every
/// candidate result of at most seven.
fn check_against_oracle(rules: &OpRuleSet, oracle: impl Fn(u128, u128) -> u128) {
    let operands = numerals(6);
    let results = numerals(7);
    for x in &operands {
        for y in &operands {
            let truth = oracle(x.value(), y.value());
            for z in &results {
                let expected = if z.value() == truth { Entailment::True } else { Entailment::False };
                assert_eq!(entails(rules, &equation(x, y, z)), expected, "{x:?}+{y:?}={z:?}");
            }
        }
    }
}

#[test]
fn addition_table_matches_integer_addition() {
    check_against_oracle(&OpRuleSet::addition(), |x, y| x + y);
}

#[test]
fn xor_table_matches_bitwise_xor() {
    check_against_oracle(&OpRuleSet::xor(), |x, y| x ^ y);
}

/// A length 5..=7 sequence: a random equation, some symbols replaced,
/// then up to two positions blanked.
fn labeled_seq() -> impl Strategy<Value = LabeledSeq> {
    (
        1u128..8,
        0u128..4,
        0u128..8,
        proptest::collection::vec((0usize..7, 0usize..4), 0..2),
        proptest::collection::vec(0usize..7, 0..=2),
        any::<bool>(),
    )
        .prop_filter_map("length 5..=7", |(x, y, z, swaps, blanks, label)| {
            let seq = equation(&DigitList::from_value(x), &DigitList::from_value(y), &DigitList::from_value(z));
            if !(5..=7).contains(&seq.len()) {
                return None;
            }
            let mut syms = seq.syms().unwrap();
            for (pos, s) in swaps {
                if pos < syms.len() {
                    syms[pos] = Sym::ALL[s];
                }
            }
            let mask: Vec<bool> = (0..syms.len()).map(|i| blanks.contains(&i)).collect();
            Some(LabeledSeq::new(SymbolSeq::from_syms(&syms).blanked(&mask), label))
        })
}

fn base_rules() -> impl Strategy<Value = OpRuleSet> {
    proptest::collection::vec(0usize..7, 4).prop_map(|choice| table(&choice))
}

/// `choice[p]` picks the result of pair `p` (index 6 leaves it undefined).
fn table(choice: &[usize]) -> OpRuleSet {
    let mut rules = OpRuleSet::new();
    for (p, &c) in choice.iter().enumerate() {
        if c < 6 {
            rules.insert((p / 2) as u8, (p % 2) as u8, OpResult::PREFERENCE[c]).unwrap();
        }
    }
    rules
}

fn fillings(seq: &SymbolSeq) -> Vec<SymbolSeq> {
    let blanks = seq.blanks().len();
    (0..4usize.pow(blanks as u32))
        .map(|mut code| {
            let fill: Vec<Sym> = (0..blanks)
                .map(|_| {
                    let s = Sym::ALL[code % 4];
                    code /= 4;
                    s
                })
                .collect();
            seq.filled(&fill)
        })
        .collect()
}

/// Largest number of examples one rule table extending `base` can
/// explain, each with its own best filling.
fn exhaustive_optimum(batch: &[LabeledSeq], base: &OpRuleSet) -> usize {
    let fills: Vec<Vec<SymbolSeq>> = batch.iter().map(|ex| fillings(&ex.seq)).collect();
    let mut best = 0;
    for code in 0..7usize.pow(4) {
        let choice: Vec<usize> = (0..4).map(|p| code / 7usize.pow(p) % 7).collect();
        let rules = table(&choice);
        if !base.is_subset_of(&rules) {
            continue;
        }
        let explained = batch
            .iter()
            .zip(&fills)
            .filter(|(ex, fs)| {
                let want = if ex.label { Entailment::True } else { Entailment::False };
                fs.iter().any(|f| parse_equation(f).is_ok() && entails(&rules, f) == want)
            })
            .count();
        best = best.max(explained);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_lies_between_base_and_optimum(
        batch in proptest::collection::vec(labeled_seq(), 1..=3),
        base in base_rules(),
    ) {
        let result = abduce(&batch, &base);
        // Abduction only credits sequences that parse, so the base is scored
        // on the blank-free examples that do.
        let complete: Vec<LabeledSeq> = batch
            .iter()
            .filter(|ex| ex.seq.is_complete() && parse_equation(&ex.seq).is_ok())
            .cloned()
            .collect();
        prop_assert!(consistency(&base, &complete) <= result.consistency());
        prop_assert!(result.consistency() <= exhaustive_optimum(&batch, &base));
    }

    #[test]
    fn abduction_output_is_coherent(
        batch in proptest::collection::vec(labeled_seq(), 1..=4),
        base in base_rules(),
    ) {
        let result = abduce(&batch, &base);
        prop_assert!(base.is_subset_of(&result.rules));
        prop_assert!(check_ic(domain_theory(), &rules_to_delta(&result.rules)).unwrap());
        prop_assert_eq!(result.completed.len(), batch.len());
        for ((ex, done), &ok) in batch.iter().zip(&result.completed).zip(&result.consistent_mask) {
            prop_assert!(done.is_complete());
            // Filled positions keep their symbols.
            for (a, b) in ex.seq.slots().iter().zip(done.slots()) {
                if let Slot::Filled(s) = a {
                    prop_assert_eq!(Slot::Filled(*s), *b);
                }
            }
            if ok {
                let want = if ex.label { Entailment::True } else { Entailment::False };
                prop_assert_eq!(entails(&result.rules, done), want);
            }
        }
        prop_assert_eq!(abduce(&batch, &base), result);
    }

    #[test]
    fn native_and_prolog_explainers_agree(
        batch in proptest::collection::vec(labeled_seq(), 1..=3),
        base in base_rules(),
    ) {
        let native = abduce_with(&batch, None, &base, &NativeExplainer);
        let prolog = abduce_with(&batch, None, &base, &PrologExplainer);
        prop_assert_eq!(native, prolog);
    }

    #[test]
    fn parsed_equations_rebuild_their_source(x in 0u128..64, y in 0u128..64, z in 0u128..128) {
        let (x, y, z) = (DigitList::from_value(x), DigitList::from_value(y), DigitList::from_value(z));
        let seq = equation(&x, &y, &z);
        let parsed = parse_equation(&seq).unwrap();
        prop_assert_eq!(SymbolSeq::from_syms(&parsed.to_syms()), seq);
        prop_assert_eq!((parsed.x, parsed.y, parsed.z), (x, y, z));
    }
}
