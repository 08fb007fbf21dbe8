use super::term::{Binding, Term, Var};

/// Unifies `a` and `b` under `binding`, returning the extended binding or
/// `None` when the terms do not unify. The occurs-check is always on.
pub fn unify(a: &Term, b: &Term, binding: &Binding) -> Option<Binding> {
    let mut out = binding.clone();
    unify_in_place(a, b, &mut out).then_some(out)
}

/// In-place variant used by the solver. On failure the binding may hold
/// partial extensions and must be discarded.
pub(crate) fn unify_in_place(a: &Term, b: &Term, binding: &mut Binding) -> bool {
    let a = binding.walk(a).clone();
    let b = binding.walk(b).clone();
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), t) | (t, Term::Var(x)) => bind(x, t, binding),
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::Int(x), Term::Int(y)) => x == y,
        (Term::Nil, Term::Nil) => true,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| unify_in_place(x, y, binding))
        }
        (Term::Cons(h1, t1), Term::Cons(h2, t2)) => {
            unify_in_place(h1, h2, binding) && unify_in_place(t1, t2, binding)
        }
        _ => false,
    }
}

fn bind(var: &Var, term: &Term, binding: &mut Binding) -> bool {
    if occurs(var, term, binding) {
        return false;
    }
    binding.insert(var.clone(), term.clone());
    true
}

fn occurs(var: &Var, term: &Term, binding: &Binding) -> bool {
    match binding.walk(term) {
        Term::Var(v) => v == var,
        Term::Compound(_, args) => args.iter().any(|a| occurs(var, a, binding)),
        Term::Cons(h, t) => occurs(var, h, binding) || occurs(var, t, binding),
        _ => false,
    }
}
