use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Result of one bitwise rule `my_op(d1, d2, [..])`. Variants are declared
/// in abduction preference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpResult {
    Zero,
    One,
    OneZero,
    OneOne,
    ZeroOne,
    ZeroZero,
}

impl OpResult {
    /// All results, most preferred first.
    pub const PREFERENCE: [OpResult; 6] = [
        OpResult::Zero,
        OpResult::One,
        OpResult::OneZero,
        OpResult::OneOne,
        OpResult::ZeroOne,
        OpResult::ZeroZero,
    ];

    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn digits(self) -> &'static [u8] {
        match self {
            OpResult::Zero => &[0],
            OpResult::One => &[1],
            OpResult::OneZero => &[1, 0],
            OpResult::OneOne => &[1, 1],
            OpResult::ZeroOne => &[0, 1],
            OpResult::ZeroZero => &[0, 0],
        }
    }

    pub fn from_digits(digits: &[u8]) -> Option<OpResult> {
        OpResult::PREFERENCE.into_iter().find(|r| r.digits() == digits)
    }

    /// The column digit: the last element.
    pub fn digit(self) -> u8 {
        *self.digits().last().expect("nonempty")
    }

    /// Carry-out: 1 for two-element results.
    pub fn carry(self) -> u8 {
        u8::from(self.digits().len() == 2)
    }
}

impl fmt::Display for OpResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.digits().iter().map(u8::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A digit pair `(d1, d2)`; index `2*d1 + d2` orders pairs as
/// (0,0), (0,1), (1,0), (1,1).
pub(crate) fn pair_index(d1: u8, d2: u8) -> usize {
    debug_assert!(d1 <= 1 && d2 <= 1);
    (d1 as usize) * 2 + d2 as usize
}

pub(crate) fn pair_of(index: usize) -> (u8, u8) {
    ((index / 2) as u8, (index % 2) as u8)
}

/// Attempted to give a digit pair a second, different result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("my_op({d1},{d2},_) already maps to {existing}, cannot also map to {proposed}")]
pub struct IcViolation {
    pub d1: u8,
    pub d2: u8,
    pub existing: OpResult,
    pub proposed: OpResult,
}

/// A partial, functional table from digit pairs to results: the abduced
/// reasoning model. Functionality is the integrity constraint and is
/// guaranteed by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct OpRuleSet {
    table: [Option<OpResult>; 4],
}

impl OpRuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from `(d1, d2, result)` triples.
    pub fn from_rules(rules: &[(u8, u8, OpResult)]) -> Result<Self, IcViolation> {
        let mut set = OpRuleSet::new();
        for &(d1, d2, r) in rules {
            set.insert(d1, d2, r)?;
        }
        Ok(set)
    }

    /// The binary addition table with carries.
    pub fn addition() -> Self {
        OpRuleSet {
            table: [
                Some(OpResult::Zero),
                Some(OpResult::One),
                Some(OpResult::One),
                Some(OpResult::OneZero),
            ],
        }
    }

    /// The bitwise exclusive-or table.
    pub fn xor() -> Self {
        OpRuleSet {
            table: [
                Some(OpResult::Zero),
                Some(OpResult::One),
                Some(OpResult::One),
                Some(OpResult::Zero),
            ],
        }
    }

    pub fn get(&self, d1: u8, d2: u8) -> Option<OpResult> {
        self.table[pair_index(d1, d2)]
    }

    pub(crate) fn get_index(&self, index: usize) -> Option<OpResult> {
        self.table[index]
    }

    pub(crate) fn set_index(&mut self, index: usize, result: OpResult) {
        self.table[index] = Some(result);
    }

    /// Adds a rule; re-adding an identical rule is a no-op.
    pub fn insert(&mut self, d1: u8, d2: u8, result: OpResult) -> Result<(), IcViolation> {
        match self.get(d1, d2) {
            Some(existing) if existing != result => Err(IcViolation {
                d1,
                d2,
                existing,
                proposed: result,
            }),
            _ => {
                self.table[pair_index(d1, d2)] = Some(result);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.table.iter().filter(|r| r.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complete(&self) -> bool {
        self.len() == 4
    }

    /// True if every rule of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &OpRuleSet) -> bool {
        self.table
            .iter()
            .zip(&other.table)
            .all(|(a, b)| a.is_none() || a == b)
    }

    /// Rules sorted by `(d1, d2)`.
    pub fn iter(&self) -> impl Iterator<Item = (u8, u8, OpResult)> + '_ {
        self.table.iter().enumerate().filter_map(|(i, r)| {
            r.map(|r| {
                let (d1, d2) = pair_of(i);
                (d1, d2, r)
            })
        })
    }

    /// Canonical text: one `my_op(d1,d2,[r...])` per line, sorted by pair.
    pub fn to_canonical(&self) -> String {
        self.iter()
            .map(|(d1, d2, r)| format!("my_op({d1},{d2},{r})\n"))
            .collect()
    }

    /// Ordering key among extensions of `base`: fewer new rules first, then
    /// lexicographic over pairs in `(d1, d2)` order by result preference.
    pub fn extension_key(&self, base: &OpRuleSet) -> (usize, [usize; 4]) {
        let mut ranks = [0usize; 4];
        let mut added = 0;
        for i in 0..4 {
            if base.table[i].is_none() {
                if let Some(r) = self.table[i] {
                    added += 1;
                    ranks[i] = r.rank() + 1;
                }
            }
        }
        (added, ranks)
    }
}

impl fmt::Display for OpRuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules: Vec<String> = self
            .iter()
            .map(|(d1, d2, r)| format!("my_op({d1},{d2},{r})"))
            .collect();
        write!(f, "{{{}}}", rules.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleTextError {
    #[error("line {0}: expected my_op(D1,D2,[R...])")]
    Malformed(usize),
    #[error("line {line}: {source}")]
    Conflict { line: usize, source: IcViolation },
}

impl FromStr for OpRuleSet {
    type Err = RuleTextError;

    /// Reads the canonical text form; blank lines and `%` comments are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = OpRuleSet::new();
        for (n, raw) in s.lines().enumerate() {
            let line = raw.split('%').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || RuleTextError::Malformed(n + 1);
            let compact: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            let inner = compact
                .strip_prefix("my_op(")
                .and_then(|r| r.strip_suffix('.').or(Some(r)))
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(bad)?;
            let (d1, rest) = inner.split_once(',').ok_or_else(bad)?;
            let (d2, list) = rest.split_once(',').ok_or_else(bad)?;
            let digit = |t: &str| match t {
                "0" => Some(0u8),
                "1" => Some(1u8),
                _ => None,
            };
            let d1 = digit(d1).ok_or_else(bad)?;
            let d2 = digit(d2).ok_or_else(bad)?;
            let list = list
                .strip_prefix('[')
                .and_then(|l| l.strip_suffix(']'))
                .ok_or_else(bad)?;
            let digits: Option<Vec<u8>> = list.split(',').map(digit).collect();
            let result = digits
                .as_deref()
                .and_then(OpResult::from_digits)
                .ok_or_else(bad)?;
            set.insert(d1, d2, result)
                .map_err(|source| RuleTextError::Conflict { line: n + 1, source })?;
        }
        Ok(set)
    }
}
