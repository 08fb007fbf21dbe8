use std::sync::OnceLock;

use super::abduce::Explainer;
use super::rules::{OpResult, OpRuleSet};
use super::symbols::{Sym, SymbolSeq};
use crate::logic::{prove, solve, Delta, Term, Theory, DEFAULT_DEPTH_LIMIT};

/// The equation domain as an abductive logic program. `my_op/3` is the only
/// abducible; the constraint keeps it functional.
pub const DOMAIN_THEORY: &str = r"
:- abducible(my_op/3).
:- universe([[0], [1], [1,0], [1,1], [0,1], [0,0]]).

positive(S) :- parse_eq(S, X, Y, Z), calc(X, Y, Z).
negative(S) :- parse_eq(S, X, Y, Z), calc(X, Y, Zc), differ(Zc, Z).

parse_eq(S, X, Y, Z) :- digits(S, X, [+|R1]), digits(R1, Y, [=|R2]), digits(R2, Z, []).
digits([0|R], [0], R).
digits([1|R0], [1|Ds], R) :- tail_digits(R0, Ds, R).
tail_digits(R, [], R).
tail_digits([D|R0], [D|Ds], R) :- digit(D), tail_digits(R0, Ds, R).
digit(0).
digit(1).

calc(X, Y, Z) :- rev(X, RX), rev(Y, RY), add(RX, RY, 0, RZ), rev(RZ, Z0), strip(Z0, Z).

rev(L, R) :- rev_acc(L, [], R).
rev_acc([], A, A).
rev_acc([H|T], A, R) :- rev_acc(T, [H|A], R).

% Little-endian column addition, padding the shorter operand with zeros.
add([], [], 0, []).
add([], [], 1, [1]).
add([A|X], [B|Y], C, [D|Z]) :- column(A, B, C, D, C2), add(X, Y, C2, Z).
add([A|X], [], C, [D|Z]) :- column(A, 0, C, D, C2), add(X, [], C2, Z).
add([], [B|Y], C, [D|Z]) :- column(0, B, C, D, C2), add([], Y, C2, Z).

column(A, B, 0, D, C) :- my_op(A, B, L), split(L, D, C).
column(A, B, 1, D, C) :-
    my_op(A, B, L), split(L, D0, C1),
    my_op(D0, 1, L2), split(L2, D, C2),
    carry_sum(C1, C2, C).

split([D], D, 0).
split([_, D], D, 1).
carry_sum(0, 0, 0).
carry_sum(1, 0, 1).
carry_sum(0, 1, 1).

strip([D], [D]).
strip([1, D|T], [1, D|T]).
strip([0, D|T], Z) :- strip([D|T], Z).

differ([], [_|_]).
differ([_|_], []).
differ([A|_], [B|_]) :- bit_differ(A, B).
differ([A|X], [A|Y]) :- differ(X, Y).
bit_differ(0, 1).
bit_differ(1, 0).

false :- my_op(A, B, L1), my_op(A, B, L2), differ(L1, L2).
";

/// The parsed domain theory, built once.
pub fn domain_theory() -> &'static Theory {
    static THEORY: OnceLock<Theory> = OnceLock::new();
    THEORY.get_or_init(|| Theory::parse(DOMAIN_THEORY).expect("domain theory parses"))
}

fn sym_term(s: Sym) -> Term {
    match s {
        Sym::D0 => Term::int(0),
        Sym::D1 => Term::int(1),
        Sym::Plus => Term::atom("+"),
        Sym::Eq => Term::atom("="),
    }
}

fn digits_term(digits: &[u8]) -> Term {
    Term::list(digits.iter().map(|&d| Term::int(d as i64)).collect())
}

/// The rule table as a set of `my_op/3` assumptions.
pub fn rules_to_delta(rules: &OpRuleSet) -> Delta {
    rules
        .iter()
        .map(|(d1, d2, r)| Term::compound("my_op", vec![Term::int(d1 as i64), Term::int(d2 as i64), digits_term(r.digits())]))
        .collect()
}

/// Reads `my_op/3` assumptions back into a table. `None` if an atom is not
/// a well-typed rule or the atoms are not functional.
pub fn delta_to_rules(delta: &Delta) -> Option<OpRuleSet> {
    let digit = |t: &Term| match t {
        Term::Int(0) => Some(0u8),
        Term::Int(1) => Some(1u8),
        _ => None,
    };
    let mut rules = OpRuleSet::new();
    for atom in delta {
        let args = atom.args();
        if atom.signature()?.name.as_ref() != "my_op" || args.len() != 3 {
            return None;
        }
        let items = args[2].list_items()?;
        let ds: Option<Vec<u8>> = items.into_iter().map(digit).collect();
        let result = OpResult::from_digits(&ds?)?;
        rules.insert(digit(&args[0])?, digit(&args[1])?, result).ok()?;
    }
    Some(rules)
}

fn query(pred: &str, syms: &[Sym]) -> Vec<Term> {
    vec![Term::compound(pred, vec![Term::list(syms.iter().map(|&s| sym_term(s)).collect())])]
}

/// Answers examples by querying the domain theory with the logic engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrologExplainer;

impl PrologExplainer {
    /// Every extension of `rules` found by abductive proof of
    /// `positive(S)` for the complete sequence `syms`.
    pub fn extensions(&self, syms: &[Sym], rules: &OpRuleSet) -> Vec<OpRuleSet> {
        let theory = domain_theory();
        let base = rules_to_delta(rules);
        let goals = query("positive", syms);
        solve(theory, &goals, DEFAULT_DEPTH_LIMIT, &base)
            .expect("well-formed query")
            .filter_map(|a| delta_to_rules(&a.delta))
            .collect()
    }

    /// Whether `negative(S)` is provable from `rules` without new assumptions.
    pub fn refutes(&self, syms: &[Sym], rules: &OpRuleSet) -> bool {
        let theory = domain_theory();
        let goals = query("negative", syms);
        prove(theory, &goals, DEFAULT_DEPTH_LIMIT, &rules_to_delta(rules))
            .expect("well-formed query")
            .next()
            .is_some()
    }
}

impl Explainer for PrologExplainer {
    fn best_positive(&self, seq: &SymbolSeq, rules: &OpRuleSet, fills: &[Vec<Sym>]) -> Option<(usize, OpRuleSet)> {
        fills.iter().enumerate().find_map(|(fi, fill)| {
            let syms = seq.filled(fill).syms()?;
            self.extensions(&syms, rules)
                .into_iter()
                .min_by_key(|ext| ext.extension_key(rules))
                .map(|ext| (fi, ext))
        })
    }

    fn first_negative(&self, seq: &SymbolSeq, rules: &OpRuleSet, fills: &[Vec<Sym>]) -> Option<usize> {
        fills
            .iter()
            .position(|fill| seq.filled(fill).syms().is_some_and(|syms| self.refutes(&syms, rules)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::abduce::{abduce_with, NativeExplainer};
    use crate::equation::symbols::LabeledSeq;

    fn syms(text: &str) -> Vec<Sym> {
        text.parse::<SymbolSeq>().unwrap().syms().unwrap()
    }

    #[test]
    fn theory_loads() {
        let th = domain_theory();
        assert_eq!(th.ics().len(), 1);
        assert_eq!(th.universe().len(), 6);
    }

    #[test]
    fn delta_round_trip() {
        for rules in [OpRuleSet::addition(), OpRuleSet::xor(), OpRuleSet::new()] {
            assert_eq!(delta_to_rules(&rules_to_delta(&rules)), Some(rules));
        }
    }

    #[test]
    fn addition_table_proves_sums() {
        let p = PrologExplainer;
        let add = OpRuleSet::addition();
        assert_eq!(p.extensions(&syms("11+1=100"), &add), vec![add]);
        assert!(p.extensions(&syms("11+1=101"), &add).is_empty());
        assert!(p.refutes(&syms("11+1=101"), &add));
        assert!(!p.refutes(&syms("11+1=100"), &add));
        assert!(p.extensions(&syms("1+=11"), &OpRuleSet::new()).is_empty());
    }

    #[test]
    fn partial_table_neither_proves_nor_refutes() {
        let p = PrologExplainer;
        let r = OpRuleSet::from_rules(&[(1, 1, OpResult::OneZero)]).unwrap();
        assert!(!p.refutes(&syms("0+0=1"), &r));
    }

    #[test]
    fn carry_example_matches_native() {
        let batch = [LabeledSeq::positive("11+1=100")];
        let native = abduce_with(&batch, None, &OpRuleSet::new(), &NativeExplainer);
        let prolog = abduce_with(&batch, None, &OpRuleSet::new(), &PrologExplainer);
        assert_eq!(native, prolog);
    }
}
