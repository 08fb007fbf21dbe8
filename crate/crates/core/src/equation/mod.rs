//! Binary equations over the symbols `0 1 + =`, the bitwise rule tables
//! that explain them, and greedy abduction of rules and symbol labels.

mod abduce;
mod calc;
mod rules;
mod symbols;
mod theory;

pub use abduce::{
    abduce, abduce_ranked, abduce_with, fill_order, AbductionResult, Explainer, NativeExplainer, ProbRow, MAX_BLANKS,
};
pub use calc::{bitwise_calc, consistency, entails, CalcError, Entailment};
pub use rules::{IcViolation, OpResult, OpRuleSet, RuleTextError};
pub use symbols::{
    parse_equation, BadSequence, DigitList, LabeledSeq, ParseFailure, ParsedEquation, Segment, Slot, Sym, SymbolSeq,
};
pub use theory::{delta_to_rules, domain_theory, rules_to_delta, PrologExplainer, DOMAIN_THEORY};
