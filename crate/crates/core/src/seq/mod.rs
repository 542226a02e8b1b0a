//! b-regular recurrence specifications, their evaluator, the shipped
//! sequences and a brute-force abelian-complexity oracle.

mod abelian;
mod builtins;
mod dsl;
mod engine;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use abelian::{abelian_complexity, abelian_oracle};
pub use builtins::{builtin, builtin_source, BUILTIN_NAMES};
pub use dsl::parse_spec;
pub use engine::{SequenceEngine, Table, Window, WINDOW_CAP};

/// Validation and syntax diagnostics for `.seq` sources.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("line {line}: rule base {got} differs from declared base {base}")]
    BaseMismatch { line: usize, base: u32, got: u32 },
    #[error("line {line}: residue {residue} is not below base {base}")]
    ResidueOutOfRange { line: usize, residue: u32, base: u32 },
    #[error("sequence `{seq}` has no rule for residue {residue}")]
    MissingResidue { seq: String, residue: u32 },
    #[error("line {line}: second rule for `{seq}` residue {residue}")]
    DuplicateRule { line: usize, seq: String, residue: u32 },
    #[error("line {line}: second initial value for `{seq}({index})`")]
    DuplicateInitial { line: usize, seq: String, index: u128 },
    #[error(
        "line {line}: rule `{seq}({base}n+{residue})` uses shift {shift}, \
         must be < (b-1)*nmin + i = {bound}"
    )]
    NonWellFounded {
        line: usize,
        seq: String,
        base: u32,
        residue: u32,
        shift: u32,
        bound: u128,
    },
    #[error("missing initial value `{seq}({index})`")]
    MissingInitial { seq: String, index: u128 },
    #[error("line {line}: unknown sequence `{name}` (it has neither rules nor initials)")]
    UnknownSequence { line: usize, name: String },
}

/// `coef * seq(n + shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub coef: i128,
    pub seq: usize,
    pub shift: u32,
}

/// Right-hand side of `s(bn+i) = sum terms + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Rule {
    pub terms: Vec<Term>,
    pub constant: i128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqDef {
    pub name: String,
    pub initials: BTreeMap<u128, i128>,
    /// One rule per residue, indexed by residue.
    pub rules: Vec<Rule>,
}

/// A validated linear b-regular system. The sequence named by the `name`
/// header is the primary one; the others are auxiliaries it refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceSpec {
    pub base: u32,
    pub name: String,
    pub nmin: u64,
    pub seqs: Vec<SeqDef>,
    pub primary: usize,
}

impl RecurrenceSpec {
    pub fn seq_index(&self, name: &str) -> Option<usize> {
        self.seqs.iter().position(|s| s.name == name)
    }

    pub fn max_shift(&self) -> u32 {
        self.seqs
            .iter()
            .flat_map(|s| s.rules.iter())
            .flat_map(|r| r.terms.iter())
            .map(|t| t.shift)
            .max()
            .unwrap_or(0)
    }

    /// Smallest index from which the rules are used for every sequence.
    pub fn direct_below(&self) -> u128 {
        let max_init = self
            .seqs
            .iter()
            .filter_map(|s| s.initials.keys().next_back().copied())
            .max()
            .unwrap_or(0);
        (self.base as u128 * self.nmin as u128).max(max_init + 1)
    }

    /// Whether every initial lies below `b * nmin`, so rules hold everywhere above.
    pub fn rules_hold_above_start(&self) -> bool {
        let start = self.base as u128 * self.nmin as u128;
        self.seqs.iter().all(|s| s.initials.keys().all(|&k| k < start))
    }
}

impl fmt::Display for RecurrenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base {}", self.base)?;
        writeln!(f, "name {}", self.name)?;
        writeln!(f, "nmin {}", self.nmin)?;
        for s in &self.seqs {
            for (k, v) in &s.initials {
                writeln!(f, "init {}({}) = {}", s.name, k, v)?;
            }
        }
        for s in &self.seqs {
            for (i, rule) in s.rules.iter().enumerate() {
                write!(f, "rule {}({}n+{}) =", s.name, self.base, i)?;
                let mut parts: Vec<(bool, String)> = rule
                    .terms
                    .iter()
                    .map(|t| {
                        let name = &self.seqs[t.seq].name;
                        (t.coef < 0, format!("{}*{}(n+{})", t.coef.unsigned_abs(), name, t.shift))
                    })
                    .collect();
                if rule.constant != 0 || parts.is_empty() {
                    parts.push((rule.constant < 0, rule.constant.unsigned_abs().to_string()));
                }
                for (j, (neg, body)) in parts.iter().enumerate() {
                    match (j, neg) {
                        (0, false) => write!(f, " {body}")?,
                        (0, true) => write!(f, " -{body}")?,
                        (_, false) => write!(f, " + {body}")?,
                        (_, true) => write!(f, " - {body}")?,
                    }
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}
