use super::rules::{pair_index, OpResult, OpRuleSet};
use super::symbols::{parse_equation, DigitList, LabeledSeq, ParsedEquation, SymbolSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CalcError {
    #[error("no rule for my_op({0},{1},_)")]
    Undefined(u8, u8),
    #[error("both lookups in one column produced a carry")]
    CarryOverflow,
}

/// Column adder driven by a rule table.
///
/// Operands are zero-padded to equal length and processed least significant
/// column first. Each column looks up `(x_i, y_i)`; with an incoming carry
/// it additionally looks up `(digit, 1)`. A result's last element is the
/// column digit and a two-element result carries one. A final carry appends
/// a `1` without lookup. The output has leading zeros stripped.
pub fn bitwise_calc(rules: &OpRuleSet, x: &DigitList, y: &DigitList) -> Result<DigitList, CalcError> {
    let (xs, ys) = padded_reversed(x, y);
    let mut carry = 0u8;
    let mut out = Vec::with_capacity(xs.len() + 1);
    for (&a, &b) in xs.iter().zip(&ys) {
        let first = rules.get(a, b).ok_or(CalcError::Undefined(a, b))?;
        let (digit, c1) = (first.digit(), first.carry());
        let (digit, cout) = if carry == 1 {
            let second = rules.get(digit, 1).ok_or(CalcError::Undefined(digit, 1))?;
            if c1 == 1 && second.carry() == 1 {
                return Err(CalcError::CarryOverflow);
            }
            (second.digit(), c1 + second.carry())
        } else {
            (digit, c1)
        };
        out.push(digit);
        carry = cout;
    }
    if carry == 1 {
        out.push(1);
    }
    out.reverse();
    Ok(DigitList::normalized(out))
}

fn padded_reversed(x: &DigitList, y: &DigitList) -> (Vec<u8>, Vec<u8>) {
    let n = x.len().max(y.len());
    let pad = |d: &DigitList| -> Vec<u8> {
        let mut v: Vec<u8> = d.digits().iter().rev().copied().collect();
        v.resize(n, 0);
        v
    };
    (pad(x), pad(y))
}

/// Three-valued entailment of a complete sequence under a rule table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entailment {
    True,
    False,
    Unknown,
}

/// `False` for unparseable sequences (including ones with blanks),
/// `Unknown` when the table cannot evaluate the equation.
pub fn entails(rules: &OpRuleSet, seq: &SymbolSeq) -> Entailment {
    match parse_equation(seq) {
        Ok(eq) => entails_parsed(rules, &eq),
        Err(_) => Entailment::False,
    }
}

pub(crate) fn entails_parsed(rules: &OpRuleSet, eq: &ParsedEquation) -> Entailment {
    match bitwise_calc(rules, &eq.x, &eq.y) {
        Ok(z) if z == eq.z => Entailment::True,
        Ok(_) => Entailment::False,
        Err(_) => Entailment::Unknown,
    }
}

/// Number of examples the table explains: positives entailed true,
/// negatives entailed false. `Unknown` never counts.
pub fn consistency(rules: &OpRuleSet, batch: &[LabeledSeq]) -> usize {
    batch
        .iter()
        .filter(|ex| {
            matches!(
                (ex.label, entails(rules, &ex.seq)),
                (true, Entailment::True) | (false, Entailment::False)
            )
        })
        .count()
}

/// Every extension of `rules` under which `eq` evaluates to true,
/// enumerated by a depth-first walk of the column adder that branches over
/// all results for each missing pair.
pub(crate) fn positive_extensions(rules: &OpRuleSet, eq: &ParsedEquation) -> Vec<OpRuleSet> {
    let (xs, ys) = padded_reversed(&eq.x, &eq.y);
    let zs: Vec<u8> = eq.z.digits().iter().rev().copied().collect();
    let mut walk = ExtensionWalk {
        xs: &xs,
        ys: &ys,
        zs: &zs,
        out: Vec::new(),
    };
    walk.column(0, 0, *rules);
    walk.out
}

struct ExtensionWalk<'a> {
    xs: &'a [u8],
    ys: &'a [u8],
    zs: &'a [u8],
    out: Vec<OpRuleSet>,
}

impl ExtensionWalk<'_> {
    /// Digit the stripped result must have at little-endian position `i`.
    fn expected(&self, i: usize) -> u8 {
        self.zs.get(i).copied().unwrap_or(0)
    }

    fn column(&mut self, i: usize, carry: u8, rules: OpRuleSet) {
        if i == self.xs.len() {
            let mut produced = i;
            if carry == 1 {
                if self.expected(i) != 1 {
                    return;
                }
                produced += 1;
            }
            if produced >= self.zs.len() {
                self.out.push(rules);
            }
            return;
        }
        let pair = pair_index(self.xs[i], self.ys[i]);
        for (first, rules) in choices(rules, pair) {
            let (digit, c1) = (first.digit(), first.carry());
            if carry == 0 {
                if digit == self.expected(i) {
                    self.column(i + 1, c1, rules);
                }
                continue;
            }
            for (second, rules) in choices(rules, pair_index(digit, 1)) {
                if c1 == 1 && second.carry() == 1 {
                    continue;
                }
                if second.digit() == self.expected(i) {
                    self.column(i + 1, c1 + second.carry(), rules);
                }
            }
        }
    }
}

/// The defined result for `pair`, or every result as a new rule.
fn choices(rules: OpRuleSet, pair: usize) -> Vec<(OpResult, OpRuleSet)> {
    match rules.get_index(pair) {
        Some(r) => vec![(r, rules)],
        None => OpResult::PREFERENCE
            .iter()
            .map(|&r| {
                let mut ext = rules;
                ext.set_index(pair, r);
                (r, ext)
            })
            .collect(),
    }
}
