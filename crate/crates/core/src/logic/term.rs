use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// A logic variable. `scope` separates renamed-apart copies of the same
/// clause variable; query variables live in scope 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub scope: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var {
            name: Arc::from(name),
            scope: 0,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scope == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}_{}", self.name, self.scope)
        }
    }
}

/// First-order term with a native cons-cell list encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Atom(Arc<str>),
    Int(i64),
    Compound(Arc<str>, Vec<Term>),
    Nil,
    Cons(Box<Term>, Box<Term>),
}

/// Predicate signature `name/arity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub name: Arc<str>,
    pub arity: usize,
}

impl Signature {
    pub fn new(name: &str, arity: usize) -> Self {
        Signature {
            name: Arc::from(name),
            arity,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn atom(name: &str) -> Term {
        Term::Atom(Arc::from(name))
    }

    pub fn int(value: i64) -> Term {
        Term::Int(value)
    }

    /// Builds `functor(args...)`. A zero-argument compound collapses to an atom.
    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        assert!(!functor.is_empty(), "functor names are nonempty");
        if args.is_empty() {
            Term::atom(functor)
        } else {
            Term::Compound(Arc::from(functor), args)
        }
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::Nil)
    }

    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::Cons(Box::new(item), Box::new(acc)))
    }

    /// Signature of a callable term (atom or compound).
    pub fn signature(&self) -> Option<Signature> {
        match self {
            Term::Atom(name) => Some(Signature {
                name: name.clone(),
                arity: 0,
            }),
            Term::Compound(name, args) => Some(Signature {
                name: name.clone(),
                arity: args.len(),
            }),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) | Term::Int(_) | Term::Nil => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            Term::Cons(h, t) => h.is_ground() && t.is_ground(),
        }
    }

    /// True when the cons chain ends in `[]` or a variable.
    pub fn is_well_formed_list(&self) -> bool {
        let mut cur = self;
        loop {
            match cur {
                Term::Nil | Term::Var(_) => return true,
                Term::Cons(_, t) => cur = t,
                _ => return false,
            }
        }
    }

    /// Variables in first-occurrence order, without duplicates.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Cons(h, t) => {
                h.collect_vars(out);
                t.collect_vars(out);
            }
            _ => {}
        }
    }

    pub fn contains_var(&self, var: &Var) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Compound(_, args) => args.iter().any(|a| a.contains_var(var)),
            Term::Cons(h, t) => h.contains_var(var) || t.contains_var(var),
            _ => false,
        }
    }

    /// Elements of a proper list, or `None` for anything else.
    pub fn list_items(&self) -> Option<Vec<&Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Nil => return Some(items),
                Term::Cons(h, t) => {
                    items.push(h.as_ref());
                    cur = t;
                }
                _ => return None,
            }
        }
    }

    pub(crate) fn rename(&self, scope: u32) -> Term {
        match self {
            Term::Var(v) => Term::Var(Var {
                name: v.name.clone(),
                scope,
            }),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| a.rename(scope)).collect())
            }
            Term::Cons(h, t) => Term::Cons(Box::new(h.rename(scope)), Box::new(t.rename(scope))),
            other => other.clone(),
        }
    }
}

fn fmt_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    let plain = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_lowercase())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    let symbolic = name.chars().all(|c| "+-*/\\^<>=~:?@#&$".contains(c));
    if plain || symbolic || name == "[]" {
        write!(f, "{name}")
    } else {
        write!(f, "'{}'", name.replace('\'', "\\'"))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Atom(a) => fmt_name(f, a),
            Term::Int(i) => write!(f, "{i}"),
            Term::Compound(name, args) => {
                fmt_name(f, name)?;
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Term::Nil => write!(f, "[]"),
            Term::Cons(h, t) => {
                write!(f, "[{h}")?;
                let mut cur = t.as_ref();
                loop {
                    match cur {
                        Term::Nil => break,
                        Term::Cons(h, t) => {
                            write!(f, ",{h}")?;
                            cur = t;
                        }
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                write!(f, "]")
            }
        }
    }
}

/// A definite clause `head :- body`. Facts have an empty body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
}

impl Clause {
    pub fn fact(head: Term) -> Self {
        Clause {
            head,
            body: Vec::new(),
        }
    }

    pub fn rule(head: Term, body: Vec<Term>) -> Self {
        Clause { head, body }
    }

    pub(crate) fn rename(&self, scope: u32) -> Clause {
        Clause {
            head: self.head.rename(scope),
            body: self.body.iter().map(|t| t.rename(scope)).collect(),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        write!(f, ".")
    }
}

/// Substitution from variables to terms. Kept triangular; `resolve`
/// produces the fully dereferenced image of a term.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding {
    map: HashMap<Var, Term>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.map.get(var)
    }

    /// Looks up the value bound to the query variable `name` (scope 0),
    /// fully resolved.
    pub fn value(&self, name: &str) -> Option<Term> {
        self.map.get(&Var::new(name)).map(|t| self.resolve(t))
    }

    pub(crate) fn insert(&mut self, var: Var, term: Term) {
        self.map.insert(var, term);
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    /// Follows variable bindings at the top level only.
    pub fn walk<'a>(&'a self, mut term: &'a Term) -> &'a Term {
        while let Term::Var(v) = term {
            match self.map.get(v) {
                Some(t) => term = t,
                None => break,
            }
        }
        term
    }

    pub fn resolve(&self, term: &Term) -> Term {
        match self.walk(term) {
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
            Term::Cons(h, t) => Term::Cons(Box::new(self.resolve(h)), Box::new(self.resolve(t))),
            other => other.clone(),
        }
    }

    /// Fully resolved binding restricted to `vars`, as a sorted list.
    pub fn restricted(&self, vars: &[Var]) -> Binding {
        let map = vars
            .iter()
            .filter_map(|v| {
                let value = self.resolve(&Term::Var(v.clone()));
                (value != Term::Var(v.clone())).then(|| (v.clone(), value))
            })
            .collect();
        Binding { map }
    }

    pub(crate) fn sorted_entries(&self) -> Vec<(Var, Term)> {
        let mut entries: Vec<_> = self
            .map
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        entries.sort();
        entries
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.sorted_entries().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} = {}", self.resolve(v))?;
        }
        write!(f, "}}")
    }
}

/// A set of assumed ground abducible atoms, ordered for determinism.
pub type Delta = BTreeSet<Term>;
