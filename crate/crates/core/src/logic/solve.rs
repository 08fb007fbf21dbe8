use std::collections::{BTreeSet, HashMap, HashSet};

use super::term::{Binding, Clause, Delta, Signature, Term, Var};
use super::unify::unify_in_place;
use super::LogicError;

/// Default per-branch resolution-step limit.
pub const DEFAULT_DEPTH_LIMIT: usize = 10_000;

/// An abductive logic theory: knowledge base, abducible signatures and
/// integrity constraints (denials with head `false`), plus the constant
/// universe used to ground non-ground abducible goals.
#[derive(Debug, Clone)]
pub struct Theory {
    kb: Vec<Clause>,
    index: HashMap<Signature, Vec<usize>>,
    abducibles: BTreeSet<Signature>,
    ics: Vec<Clause>,
    universe: Vec<Term>,
}

impl Theory {
    pub fn new(
        kb: Vec<Clause>,
        abducibles: impl IntoIterator<Item = Signature>,
        ics: Vec<Clause>,
        universe: Vec<Term>,
    ) -> Result<Self, LogicError> {
        let abducibles: BTreeSet<Signature> = abducibles.into_iter().collect();
        let falsity = Term::atom("false");
        for ic in &ics {
            if ic.head != falsity {
                return Err(LogicError::BadConstraint(ic.to_string()));
            }
        }
        let mut index: HashMap<Signature, Vec<usize>> = HashMap::new();
        for (i, clause) in kb.iter().enumerate() {
            let sig = clause
                .head
                .signature()
                .ok_or_else(|| LogicError::BadClause(clause.to_string()))?;
            if abducibles.contains(&sig) {
                return Err(LogicError::AbducibleDefined(sig));
            }
            if sig.name.as_ref() == "false" && sig.arity == 0 {
                return Err(LogicError::BadClause(clause.to_string()));
            }
            index.entry(sig).or_default().push(i);
        }
        Ok(Theory {
            kb,
            index,
            abducibles,
            ics,
            universe,
        })
    }

    /// Builds a theory from program text; clauses headed by `false` become
    /// integrity constraints.
    pub fn parse(src: &str) -> Result<Self, LogicError> {
        let program = super::parser::parse_program(src)?;
        let falsity = Term::atom("false");
        let (ics, kb): (Vec<_>, Vec<_>) = program.clauses.into_iter().partition(|c| c.head == falsity);
        Theory::new(kb, program.abducibles, ics, program.universe)
    }

    pub fn kb(&self) -> &[Clause] {
        &self.kb
    }

    pub fn ics(&self) -> &[Clause] {
        &self.ics
    }

    pub fn abducibles(&self) -> &BTreeSet<Signature> {
        &self.abducibles
    }

    pub fn universe(&self) -> &[Term] {
        &self.universe
    }

    pub fn is_abducible(&self, sig: &Signature) -> bool {
        self.abducibles.contains(sig)
    }

    fn clauses_for(&self, sig: &Signature) -> &[usize] {
        self.index.get(sig).map_or(&[], Vec::as_slice)
    }
}

/// One abductive explanation: a binding of the query variables and the
/// set of assumed abducible atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AbductiveAnswer {
    pub binding: Binding,
    pub delta: Delta,
}

#[derive(Clone)]
struct Frame {
    /// Pending goals; the next goal is the last element.
    goals: Vec<Term>,
    binding: Binding,
    delta: Delta,
    depth: usize,
}

/// Lazy stream of answers in depth-first, clause-order sequence.
pub struct Solutions<'t> {
    theory: &'t Theory,
    stack: Vec<Frame>,
    query_vars: Vec<Var>,
    depth_limit: usize,
    abduction: bool,
    next_scope: u32,
    truncated: bool,
    seen: HashSet<(Vec<(Var, Term)>, Delta)>,
}

impl<'t> Solutions<'t> {
    /// True once any branch has been cut by the depth limit. Inspect after
    /// the stream is exhausted to distinguish "no proof" from "search truncated".
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn fresh_scope(&mut self) -> u32 {
        self.next_scope += 1;
        self.next_scope
    }

    fn step(&mut self, mut frame: Frame) -> Option<AbductiveAnswer> {
        let Some(goal) = frame.goals.pop() else {
            let binding = frame.binding.restricted(&self.query_vars);
            let key = (binding.sorted_entries(), frame.delta.clone());
            if self.seen.insert(key) {
                return Some(AbductiveAnswer {
                    binding,
                    delta: frame.delta,
                });
            }
            return None;
        };
        if frame.depth >= self.depth_limit {
            self.truncated = true;
            return None;
        }
        let goal = frame.binding.resolve(&goal);
        let Some(sig) = goal.signature() else {
            // Variables and numbers are not callable; the branch fails.
            return None;
        };
        if sig.name.as_ref() == "true" && sig.arity == 0 {
            self.stack.push(Frame {
                depth: frame.depth + 1,
                ..frame
            });
            return None;
        }
        if self.theory.is_abducible(&sig) {
            self.expand_abducible(frame, goal);
            return None;
        }
        let scope = self.fresh_scope();
        let mut children = Vec::new();
        for &ci in self.theory.clauses_for(&sig) {
            let clause = self.theory.kb[ci].rename(scope);
            let mut binding = frame.binding.clone();
            if unify_in_place(&clause.head, &goal, &mut binding) {
                let mut goals = frame.goals.clone();
                goals.extend(clause.body.into_iter().rev());
                children.push(Frame {
                    goals,
                    binding,
                    delta: frame.delta.clone(),
                    depth: frame.depth + 1,
                });
            }
        }
        self.stack.extend(children.into_iter().rev());
        None
    }

    fn expand_abducible(&mut self, frame: Frame, goal: Term) {
        let mut children = Vec::new();
        if !self.abduction {
            // Deductive mode: assumed atoms behave as facts.
            for atom in &frame.delta {
                let mut binding = frame.binding.clone();
                if unify_in_place(atom, &goal, &mut binding) {
                    children.push(Frame {
                        goals: frame.goals.clone(),
                        binding,
                        delta: frame.delta.clone(),
                        depth: frame.depth + 1,
                    });
                }
            }
        } else {
            for (binding, atom) in groundings(&goal, &frame.binding, &self.theory.universe) {
                let mut delta = frame.delta.clone();
                if delta.insert(atom) {
                    match violates_ic(self.theory, &delta, self.depth_limit) {
                        Ok(false) => {}
                        Ok(true) => continue,
                        Err(_) => {
                            self.truncated = true;
                            continue;
                        }
                    }
                }
                children.push(Frame {
                    goals: frame.goals.clone(),
                    binding,
                    delta,
                    depth: frame.depth + 1,
                });
            }
        }
        self.stack.extend(children.into_iter().rev());
    }
}

/// Ground instances of `goal` obtained by assigning each of its variables a
/// universe constant, in universe order (first variable varies slowest).
fn groundings(goal: &Term, binding: &Binding, universe: &[Term]) -> Vec<(Binding, Term)> {
    let vars = goal.variables();
    if vars.is_empty() {
        return vec![(binding.clone(), goal.clone())];
    }
    let mut partial = vec![binding.clone()];
    for var in &vars {
        let mut next = Vec::with_capacity(partial.len() * universe.len());
        for b in &partial {
            for value in universe {
                let mut extended = b.clone();
                if unify_in_place(&Term::Var(var.clone()), value, &mut extended) {
                    next.push(extended);
                }
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|b| {
            let atom = b.resolve(goal);
            (b, atom)
        })
        .filter(|(_, atom)| atom.is_ground())
        .collect()
}

impl Iterator for Solutions<'_> {
    type Item = AbductiveAnswer;

    fn next(&mut self) -> Option<AbductiveAnswer> {
        while let Some(frame) = self.stack.pop() {
            if let Some(answer) = self.step(frame) {
                return Some(answer);
            }
        }
        None
    }
}

fn start<'t>(
    theory: &'t Theory,
    goals: &[Term],
    depth_limit: usize,
    base_delta: &Delta,
    abduction: bool,
) -> Solutions<'t> {
    let mut query_vars = Vec::new();
    for g in goals {
        g.collect_vars(&mut query_vars);
    }
    Solutions {
        theory,
        stack: vec![Frame {
            goals: goals.iter().rev().cloned().collect(),
            binding: Binding::new(),
            delta: base_delta.clone(),
            depth: 0,
        }],
        query_vars,
        depth_limit,
        abduction,
        next_scope: 0,
        truncated: false,
        seen: HashSet::new(),
    }
}

fn validate(theory: &Theory, depth_limit: usize, delta: &Delta) -> Result<(), LogicError> {
    if depth_limit == 0 {
        return Err(LogicError::ZeroDepth);
    }
    for atom in delta {
        let ok = atom.is_ground() && atom.signature().is_some_and(|s| theory.is_abducible(&s));
        if !ok {
            return Err(LogicError::InvalidDelta(atom.to_string()));
        }
    }
    Ok(())
}

/// Abductive SLD resolution: proves `goals` from the knowledge base,
/// assuming ground abducible atoms as needed. Every yielded answer's delta
/// contains `base_delta` and satisfies the integrity constraints.
pub fn solve<'t>(
    theory: &'t Theory,
    goals: &[Term],
    depth_limit: usize,
    base_delta: &Delta,
) -> Result<Solutions<'t>, LogicError> {
    validate(theory, depth_limit, base_delta)?;
    if violates_ic(theory, base_delta, depth_limit)? {
        return Ok(Solutions {
            stack: Vec::new(),
            ..start(theory, goals, depth_limit, base_delta, true)
        });
    }
    Ok(start(theory, goals, depth_limit, base_delta, true))
}

/// Plain SLD resolution with `delta` treated as extra facts; no new
/// assumptions are made.
pub fn prove<'t>(
    theory: &'t Theory,
    goals: &[Term],
    depth_limit: usize,
    delta: &Delta,
) -> Result<Solutions<'t>, LogicError> {
    validate(theory, depth_limit, delta)?;
    Ok(start(theory, goals, depth_limit, delta, false))
}

fn violates_ic(theory: &Theory, delta: &Delta, depth_limit: usize) -> Result<bool, LogicError> {
    for ic in &theory.ics {
        let mut proofs = start(theory, &ic.body, depth_limit, delta, false);
        if proofs.next().is_some() {
            return Ok(true);
        }
        if proofs.truncated() {
            return Err(LogicError::DepthExceeded(depth_limit));
        }
    }
    Ok(false)
}

/// True iff no integrity-constraint body is provable from kb ∪ delta.
/// A truncated search that found no violation reports `DepthExceeded`.
pub fn check_ic(theory: &Theory, delta: &Delta) -> Result<bool, LogicError> {
    check_ic_with_limit(theory, delta, DEFAULT_DEPTH_LIMIT)
}

pub fn check_ic_with_limit(theory: &Theory, delta: &Delta, depth_limit: usize) -> Result<bool, LogicError> {
    validate(theory, depth_limit, delta)?;
    violates_ic(theory, delta, depth_limit).map(|v| !v)
}
