use std::collections::BTreeSet;

use abl_core::logic::{check_ic, parse_query, parse_term, prove, solve, unify, Binding, Delta, Term, Theory, Var};
use proptest::prelude::*;

const VARS: [&str; 3] = ["X", "Y", "Z"];
const CONSTS: [&str; 3] = ["a", "b", "c"];

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(|i| Term::var(VARS[i])),
        (0..3usize).prop_map(|i| Term::atom(CONSTS[i])),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::compound("f", vec![t])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::compound("g", vec![a, b])),
        ]
    })
}

/// All 27 ground substitutions of X, Y, Z over the constants.
fn groundings() -> Vec<Binding> {
    let mut out = Vec::new();
    for i in 0..27 {
        let mut b = Binding::new();
        let mut n = i;
        for v in VARS {
            b = unify(&Term::var(v), &Term::atom(CONSTS[n % 3]), &b).unwrap();
            n /= 3;
        }
        out.push(b);
    }
    out
}

proptest! {
    #[test]
    fn unification_is_symmetric(a in term(), b in term()) {
        let ab = unify(&a, &b, &Binding::new());
        let ba = unify(&b, &a, &Binding::new());
        prop_assert_eq!(ab.is_some(), ba.is_some());
        if let (Some(ab), Some(ba)) = (ab, ba) {
            prop_assert_eq!(ab.resolve(&a), ab.resolve(&b));
            prop_assert_eq!(ba.resolve(&a), ba.resolve(&b));
            // Same equivalence classes: each unifier also unifies under the other.
            for v in VARS {
                let x = Term::var(v);
                prop_assert!(unify(&ab.resolve(&x), &ba.resolve(&x), &Binding::new()).is_some());
            }
        }
    }

    #[test]
    fn unifier_is_most_general(a in term(), b in term()) {
        let theta = unify(&a, &b, &Binding::new());
        for sigma in groundings() {
            if sigma.resolve(&a) != sigma.resolve(&b) {
                continue;
            }
            let theta = theta.as_ref();
            prop_assert!(theta.is_some(), "ground unifier exists but unify failed");
            let theta = theta.unwrap();
            for v in VARS {
                let x = Term::var(v);
                prop_assert_eq!(sigma.resolve(&theta.resolve(&x)), sigma.resolve(&x));
            }
        }
        if let Some(theta) = &theta {
            prop_assert_eq!(theta.resolve(&a), theta.resolve(&b));
        }
    }
}

const LIKES: &str = "
    :- abducible(likes/2).
    :- universe([ann, bob, cat]).
    friends(X, Y) :- likes(X, Y), likes(Y, X).
    popular(X) :- likes(ann, X), likes(bob, X).
    false :- likes(X, X).
";

const WET_GRASS: &str = "
    :- abducible(rain_last_night/0, sprinkler_was_on/0).
    wet_grass :- rain_last_night.
    wet_grass :- sprinkler_was_on.
    wet_shoes :- wet_grass.
    false :- rain_last_night, sprinkler_was_on.
";

fn likes_atoms() -> Vec<Term> {
    let people = ["ann", "bob", "cat"];
    people
        .iter()
        .flat_map(|a| people.iter().map(move |b| parse_term(&format!("likes({a}, {b})")).unwrap()))
        .collect()
}

fn subset(atoms: &[Term], mask: u32) -> Delta {
    atoms
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, t)| t.clone())
        .collect()
}

const QUERIES: [&str; 4] = ["friends(ann, Y)", "friends(X, Y)", "popular(X)", "friends(X, bob), popular(X)"];

fn query_vars(goals: &[Term]) -> Vec<Var> {
    let mut vars: BTreeSet<Var> = BTreeSet::new();
    for g in goals {
        vars.extend(g.variables());
    }
    vars.into_iter().collect()
}

proptest! {
    #[test]
    fn answers_are_sound_and_extend_the_base(q in 0..QUERIES.len(), mask in 0u32..512) {
        let theory = Theory::parse(LIKES).unwrap();
        let goals = parse_query(QUERIES[q]).unwrap();
        let base = subset(&likes_atoms(), mask);
        for answer in solve(&theory, &goals, 1000, &base).unwrap() {
            prop_assert!(answer.delta.is_superset(&base));
            prop_assert!(answer.delta.iter().all(Term::is_ground));
            prop_assert!(check_ic(&theory, &answer.delta).unwrap());
            let instantiated: Vec<Term> = goals.iter().map(|g| answer.binding.resolve(g)).collect();
            let mut replay = prove(&theory, &instantiated, 1000, &answer.delta).unwrap();
            prop_assert!(replay.next().is_some(), "answer {:?} does not replay", answer.delta);
        }
    }

    #[test]
    fn abduction_is_monotone(q in 0..QUERIES.len(), mask in 0u32..512) {
        let theory = Theory::parse(LIKES).unwrap();
        let goals = parse_query(QUERIES[q]).unwrap();
        let vars = query_vars(&goals);
        let base = subset(&likes_atoms(), mask);
        for answer in solve(&theory, &goals, 1000, &base).unwrap() {
            let wanted = answer.binding.restricted(&vars);
            let again: Vec<_> = solve(&theory, &goals, 1000, &answer.delta).unwrap().collect();
            prop_assert!(
                again.iter().any(|a| a.binding.restricted(&vars) == wanted && a.delta == answer.delta),
                "re-solving from {:?} lost the answer", answer.delta
            );
        }
    }

    #[test]
    fn ic_violation_is_monotone(small in 0u32..512, extra in 0u32..512) {
        let theory = Theory::parse(LIKES).unwrap();
        let atoms = likes_atoms();
        let d1 = subset(&atoms, small);
        let d2 = subset(&atoms, small | extra);
        if !check_ic(&theory, &d1).unwrap() {
            prop_assert!(!check_ic(&theory, &d2).unwrap());
        }
    }
}

#[test]
fn wet_grass_ic_cases() {
    let theory = Theory::parse(WET_GRASS).unwrap();
    let d = |atoms: &[&str]| -> Delta { atoms.iter().map(|a| parse_term(a).unwrap()).collect() };
    assert!(check_ic(&theory, &d(&[])).unwrap());
    assert!(check_ic(&theory, &d(&["rain_last_night"])).unwrap());
    assert!(check_ic(&theory, &d(&["sprinkler_was_on"])).unwrap());
    assert!(!check_ic(&theory, &d(&["rain_last_night", "sprinkler_was_on"])).unwrap());
}

#[test]
fn likes_theory_grounds_abducibles() {
    let theory = Theory::parse(LIKES).unwrap();
    let goals = parse_query("friends(ann, Y)").unwrap();
    let ys: BTreeSet<String> = solve(&theory, &goals, 1000, &Delta::new())
        .unwrap()
        .map(|a| a.binding.value("Y").unwrap().to_string())
        .collect();
    assert_eq!(ys, BTreeSet::from(["bob".to_string(), "cat".to_string()]));
}
