use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four primitive symbols. Class index `i` of the perception network
/// always means `Sym::ALL[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sym {
    D0,
    D1,
    Plus,
    Eq,
}

impl Sym {
    pub const ALL: [Sym; 4] = [Sym::D0, Sym::D1, Sym::Plus, Sym::Eq];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Sym> {
        Sym::ALL.get(i).copied()
    }

    pub fn from_digit(d: u8) -> Sym {
        if d == 0 {
            Sym::D0
        } else {
            Sym::D1
        }
    }

    pub fn digit(self) -> Option<u8> {
        match self {
            Sym::D0 => Some(0),
            Sym::D1 => Some(1),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sym::D0 => '0',
            Sym::D1 => '1',
            Sym::Plus => '+',
            Sym::Eq => '=',
        }
    }

    pub fn from_char(c: char) -> Option<Sym> {
        match c {
            '0' => Some(Sym::D0),
            '1' => Some(Sym::D1),
            '+' => Some(Sym::Plus),
            '=' => Some(Sym::Eq),
            _ => None,
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One position of a perceived sequence: a symbol or a blank to be abduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Filled(Sym),
    Blank,
}

impl Slot {
    pub fn sym(self) -> Option<Sym> {
        match self {
            Slot::Filled(s) => Some(s),
            Slot::Blank => None,
        }
    }
}

/// A symbol sequence, possibly with blanks. Text form uses `0 1 + =` and
/// `_` for blanks, e.g. `1_1_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSeq {
    slots: Vec<Slot>,
}

impl SymbolSeq {
    pub fn new(slots: Vec<Slot>) -> Self {
        assert!(!slots.is_empty(), "symbol sequences are nonempty");
        SymbolSeq { slots }
    }

    pub fn from_syms(syms: &[Sym]) -> Self {
        SymbolSeq::new(syms.iter().map(|&s| Slot::Filled(s)).collect())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn blanks(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&i| self.slots[i] == Slot::Blank)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(|s| *s != Slot::Blank)
    }

    /// The symbols, if no slot is blank.
    pub fn syms(&self) -> Option<Vec<Sym>> {
        self.slots.iter().map(|s| s.sym()).collect()
    }

    /// Copy with every position where `mask` is set replaced by a blank.
    pub fn blanked(&self, mask: &[bool]) -> SymbolSeq {
        assert_eq!(mask.len(), self.slots.len(), "mask length must match sequence length");
        SymbolSeq {
            slots: self
                .slots
                .iter()
                .zip(mask)
                .map(|(&s, &m)| if m { Slot::Blank } else { s })
                .collect(),
        }
    }

    /// Fills the blanks, in position order, with `fill`.
    pub fn filled(&self, fill: &[Sym]) -> SymbolSeq {
        let mut it = fill.iter();
        let slots = self
            .slots
            .iter()
            .map(|&s| match s {
                Slot::Blank => Slot::Filled(*it.next().expect("one fill symbol per blank")),
                other => other,
            })
            .collect();
        assert!(it.next().is_none(), "more fill symbols than blanks");
        SymbolSeq { slots }
    }
}

impl fmt::Display for SymbolSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.slots {
            match s {
                Slot::Filled(sym) => write!(f, "{sym}")?,
                Slot::Blank => write!(f, "_")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid symbol sequence {0:?}")]
pub struct BadSequence(pub String);

impl FromStr for SymbolSeq {
    type Err = BadSequence;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let slots: Option<Vec<Slot>> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| {
                if c == '_' {
                    Some(Slot::Blank)
                } else {
                    Sym::from_char(c).map(Slot::Filled)
                }
            })
            .collect();
        match slots {
            Some(slots) if !slots.is_empty() => Ok(SymbolSeq { slots }),
            _ => Err(BadSequence(s.to_string())),
        }
    }
}

/// A binary numeral, most significant digit first, with no leading zero
/// unless it is exactly `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DigitList(Vec<u8>);

impl DigitList {
    pub fn new(digits: Vec<u8>) -> Option<Self> {
        let valid = !digits.is_empty()
            && digits.iter().all(|&d| d <= 1)
            && (digits.len() == 1 || digits[0] == 1);
        valid.then_some(DigitList(digits))
    }

    /// Strips leading zeros, keeping at least one digit.
    pub fn normalized(mut digits: Vec<u8>) -> Self {
        assert!(digits.iter().all(|&d| d <= 1), "binary digits only");
        let first_one = digits.iter().position(|&d| d == 1);
        match first_one {
            Some(i) => {
                digits.drain(..i);
                DigitList(digits)
            }
            None => DigitList(vec![0]),
        }
    }

    pub fn from_value(mut value: u128) -> Self {
        if value == 0 {
            return DigitList(vec![0]);
        }
        let mut digits = Vec::new();
        while value > 0 {
            digits.push((value & 1) as u8);
            value >>= 1;
        }
        digits.reverse();
        DigitList(digits)
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self) -> u128 {
        self.0.iter().fold(0u128, |acc, &d| (acc << 1) | d as u128)
    }

    pub fn syms(&self) -> impl Iterator<Item = Sym> + '_ {
        self.0.iter().map(|&d| Sym::from_digit(d))
    }
}

impl fmt::Display for DigitList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// An equation `x + y = z` split from a symbol sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedEquation {
    pub x: DigitList,
    pub y: DigitList,
    pub z: DigitList,
}

impl ParsedEquation {
    pub fn to_syms(&self) -> Vec<Sym> {
        let mut out: Vec<Sym> = self.x.syms().collect();
        out.push(Sym::Plus);
        out.extend(self.y.syms());
        out.push(Sym::Eq);
        out.extend(self.z.syms());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFailure {
    #[error("sequence contains blanks")]
    ContainsBlank,
    #[error("expected one `+` followed by one `=`, found {plus} `+` and {eq} `=`")]
    OperatorCount { plus: usize, eq: usize },
    #[error("`=` precedes `+`")]
    OperatorOrder,
    #[error("empty {0:?} operand")]
    EmptySegment(Segment),
    #[error("leading zero in {0:?} operand")]
    LeadingZero(Segment),
}

/// Parses `digits + digits = digits`.
pub fn parse_equation(seq: &SymbolSeq) -> Result<ParsedEquation, ParseFailure> {
    let syms = seq.syms().ok_or(ParseFailure::ContainsBlank)?;
    parse_syms(&syms)
}

pub(crate) fn parse_syms(syms: &[Sym]) -> Result<ParsedEquation, ParseFailure> {
    let plus: Vec<usize> = (0..syms.len()).filter(|&i| syms[i] == Sym::Plus).collect();
    let eq: Vec<usize> = (0..syms.len()).filter(|&i| syms[i] == Sym::Eq).collect();
    if plus.len() != 1 || eq.len() != 1 {
        return Err(ParseFailure::OperatorCount {
            plus: plus.len(),
            eq: eq.len(),
        });
    }
    let (p, e) = (plus[0], eq[0]);
    if e < p {
        return Err(ParseFailure::OperatorOrder);
    }
    let segment = |range: &[Sym], which: Segment| -> Result<DigitList, ParseFailure> {
        if range.is_empty() {
            return Err(ParseFailure::EmptySegment(which));
        }
        let digits: Vec<u8> = range.iter().map(|s| s.digit().expect("operators counted above")).collect();
        DigitList::new(digits).ok_or(ParseFailure::LeadingZero(which))
    };
    Ok(ParsedEquation {
        x: segment(&syms[..p], Segment::X)?,
        y: segment(&syms[p + 1..e], Segment::Y)?,
        z: segment(&syms[e + 1..], Segment::Z)?,
    })
}

/// A symbol sequence paired with its equation-level label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSeq {
    pub seq: SymbolSeq,
    pub label: bool,
}

impl LabeledSeq {
    pub fn new(seq: SymbolSeq, label: bool) -> Self {
        LabeledSeq { seq, label }
    }

    pub fn positive(text: &str) -> Self {
        LabeledSeq::new(text.parse().expect("valid sequence text"), true)
    }

    pub fn negative(text: &str) -> Self {
        LabeledSeq::new(text.parse().expect("valid sequence text"), false)
    }
}
