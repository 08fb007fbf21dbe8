//! A small abductive logic programming engine.
//!
//! Terms, occurs-checked unification, and depth-limited SLD resolution that
//! may assume ground atoms of declared abducible predicates, subject to the
//! theory's integrity constraints. There is no cut, negation as failure or
//! arithmetic; the equation theory is written without them.

mod parser;
mod solve;
mod term;
mod unify;

pub use parser::{parse_program, parse_query, parse_term, Program};
pub use solve::{
    check_ic, check_ic_with_limit, prove, solve, AbductiveAnswer, Solutions, Theory,
    DEFAULT_DEPTH_LIMIT,
};
pub use term::{Binding, Clause, Delta, Signature, Term, Var};
pub use unify::unify;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogicError {
    #[error("search truncated by depth limit {0}")]
    DepthExceeded(usize),
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("abducible {0} has a defining clause")]
    AbducibleDefined(Signature),
    #[error("integrity constraint must be headed by `false`: {0}")]
    BadConstraint(String),
    #[error("clause head is not callable: {0}")]
    BadClause(String),
    #[error("not a ground abducible atom: {0}")]
    InvalidDelta(String),
    #[error("depth limit must be at least 1")]
    ZeroDepth,
}

#[cfg(test)]
mod tests {
    use super::*;

    const WET_GRASS: &str = "
        :- abducible(rain_last_night/0, sprinkler_was_on/0).
        wet_grass :- rain_last_night.
        wet_grass :- sprinkler_was_on.
        wet_shoes :- wet_grass.
        false :- rain_last_night, sprinkler_was_on.
    ";

    fn delta(atoms: &[&str]) -> Delta {
        atoms.iter().map(|a| parse_term(a).unwrap()).collect()
    }

    #[test]
    fn family_query_binds_father() {
        let th = Theory::parse("father(adam, bob).\nparent(A, B) :- father(A, B).").unwrap();
        let goals = parse_query("parent(X, bob)").unwrap();
        let answers: Vec<_> = solve(&th, &goals, 100, &Delta::new()).unwrap().collect();
        assert_eq!(answers.len(), 1);
        assert_eq!(answers[0].binding.value("X"), Some(Term::atom("adam")));
        assert!(answers[0].delta.is_empty());
    }

    #[test]
    fn unprovable_goal_yields_nothing() {
        let th = Theory::parse("father(adam, bob).\nparent(A, B) :- father(A, B).").unwrap();
        let goals = parse_query("parent(eve, bob)").unwrap();
        let mut sols = solve(&th, &goals, 100, &Delta::new()).unwrap();
        assert!(sols.next().is_none());
        assert!(!sols.truncated());
    }

    #[test]
    fn empty_goal_returns_base_delta() {
        let th = Theory::parse(WET_GRASS).unwrap();
        let base = delta(&["sprinkler_was_on"]);
        let answers: Vec<_> = solve(&th, &[], 10, &base).unwrap().collect();
        assert_eq!(answers.len(), 1);
        assert!(answers[0].binding.is_empty());
        assert_eq!(answers[0].delta, base);
    }

    #[test]
    fn wet_shoes_has_two_singleton_explanations() {
        let th = Theory::parse(WET_GRASS).unwrap();
        let goals = parse_query("wet_shoes").unwrap();
        let deltas: Vec<_> = solve(&th, &goals, 100, &Delta::new()).unwrap().map(|a| a.delta).collect();
        assert_eq!(deltas, vec![delta(&["rain_last_night"]), delta(&["sprinkler_was_on"])]);
    }

    #[test]
    fn excluded_rain_leaves_sprinkler() {
        let src = format!("{WET_GRASS}\nfalse :- rain_last_night.");
        let th = Theory::parse(&src).unwrap();
        let goals = parse_query("wet_shoes").unwrap();
        let deltas: Vec<_> = solve(&th, &goals, 100, &Delta::new()).unwrap().map(|a| a.delta).collect();
        assert_eq!(deltas, vec![delta(&["sprinkler_was_on"])]);
    }

    #[test]
    fn ic_checks() {
        let th = Theory::parse(WET_GRASS).unwrap();
        assert_eq!(check_ic(&th, &delta(&["rain_last_night", "sprinkler_was_on"])), Ok(false));
        assert_eq!(check_ic(&th, &Delta::new()), Ok(true));
        assert_eq!(check_ic(&th, &delta(&["rain_last_night"])), Ok(true));
    }

    #[test]
    fn depth_limit_is_reported() {
        let th = Theory::parse("loop(X) :- loop(X).").unwrap();
        let goals = parse_query("loop(a)").unwrap();
        let mut sols = solve(&th, &goals, 50, &Delta::new()).unwrap();
        assert!(sols.next().is_none());
        assert!(sols.truncated());
    }

    #[test]
    fn rejects_malformed_theories_and_inputs() {
        let err = Theory::parse(":- abducible(a/0).\na.").unwrap_err();
        assert!(matches!(err, LogicError::AbducibleDefined(_)));
        let th = Theory::parse(WET_GRASS).unwrap();
        assert_eq!(solve(&th, &[], 0, &Delta::new()).err(), Some(LogicError::ZeroDepth));
        let bad = delta(&["wet_grass"]);
        assert!(matches!(solve(&th, &[], 10, &bad).err(), Some(LogicError::InvalidDelta(_))));
    }

    #[test]
    fn non_ground_abducibles_are_grounded_from_universe() {
        let th = Theory::parse(
            ":- abducible(colour/1).\n:- universe([red, green]).\npainted(X) :- colour(X).\nfalse :- colour(red).",
        )
        .unwrap();
        let goals = parse_query("painted(C)").unwrap();
        let answers: Vec<_> = solve(&th, &goals, 100, &Delta::new()).unwrap().collect();
        assert_eq!(answers.len(), 1);
        assert_eq!(answers[0].binding.value("C"), Some(Term::atom("green")));
        assert_eq!(answers[0].delta, delta(&["colour(green)"]));
    }

    #[test]
    fn duplicate_answers_are_suppressed() {
        let th = Theory::parse("p :- q.\np :- q.\nq.").unwrap();
        let answers: Vec<_> = solve(&th, &parse_query("p").unwrap(), 10, &Delta::new()).unwrap().collect();
        assert_eq!(answers.len(), 1);
    }
}
