//! Possibilistic Horn knowledge bases.
//!
//! Entailment goes through cuts: `K ⊨ (φ, α)` iff the classical projection of
//! the `α`-cut entails `φ`. The least-specific possibility distribution
//! [`PossKB::pi_k`] and [`Distribution::necessity`] give an independent,
//! purely semantic route to the same numbers, used as a brute-force oracle.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::horn::{self, clauses_entail, equivalent, BitClause, HornClause, HornError, HornKB, Variable};
use crate::valuation::{Valuation, ValuationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PossError {
    #[error(transparent)]
    Horn(#[from] HornError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("formula valuations must be positive")]
    ZeroValuation,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A pair `(φ, α)` with `α ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PossClause {
    pub formula: HornClause,
    valuation: Valuation,
}

impl PossClause {
    pub fn new(formula: HornClause, valuation: Valuation) -> Result<Self, PossError> {
        if valuation.is_zero() {
            return Err(PossError::ZeroValuation);
        }
        Ok(PossClause { formula, valuation })
    }

    pub fn valuation(&self) -> Valuation {
        self.valuation
    }
}

impl fmt::Display for PossClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.formula, self.valuation)
    }
}

impl FromStr for PossClause {
    type Err = PossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (formula, valuation) = s.rsplit_once('@').ok_or_else(|| PossError::Parse {
            line: 1,
            message: format!("expected `ANT -> CONS @ DECIMAL`, got `{}`", s.trim()),
        })?;
        let formula: HornClause = formula.trim().parse()?;
        let valuation: Valuation = valuation.trim().parse()?;
        PossClause::new(formula, valuation)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PossKB {
    clauses: IndexSet<PossClause>,
    signature: BTreeSet<Variable>,
}

impl PossKB {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = PossClause>) -> Self {
        let mut kb = PossKB::new();
        for c in clauses {
            kb.insert(c);
        }
        kb
    }

    /// `{(φ, α) : φ ∈ k}` for a single valuation.
    pub fn lift(k: &HornKB, valuation: Valuation) -> Result<Self, PossError> {
        let mut out = PossKB::new();
        out.extend_signature(k.signature().iter().cloned());
        for c in k.clauses() {
            out.insert(PossClause::new(c.clone(), valuation)?);
        }
        Ok(out)
    }

    pub fn insert(&mut self, clause: PossClause) -> bool {
        self.signature.extend(clause.formula.variables().cloned());
        self.clauses.insert(clause)
    }

    pub fn extend_signature(&mut self, vars: impl IntoIterator<Item = Variable>) {
        self.signature.extend(vars);
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &PossClause> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn signature(&self) -> &BTreeSet<Variable> {
        &self.signature
    }

    /// `k^v`, the set of valuations occurring in the KB.
    pub fn valuations(&self) -> BTreeSet<Valuation> {
        self.clauses.iter().map(|c| c.valuation).collect()
    }

    /// Largest precision among the KB's valuations, at least 1.
    pub fn prec(&self) -> u32 {
        self.clauses.iter().map(|c| c.valuation.prec()).max().unwrap_or(1)
    }

    pub fn projection(&self) -> HornKB {
        let mut k = HornKB::with_signature(self.signature.clone());
        for c in &self.clauses {
            k.insert(c.formula.clone());
        }
        k
    }

    /// Clauses with valuation `>= level`, or `> level` when `strict`.
    pub fn cut(&self, level: Valuation, strict: bool) -> PossKB {
        let mut out = PossKB { clauses: IndexSet::new(), signature: self.signature.clone() };
        for c in &self.clauses {
            if c.valuation > level || (!strict && c.valuation == level) {
                out.clauses.insert(c.clone());
            }
        }
        out
    }

    fn cut_formulas(&self, level: Valuation) -> Vec<&HornClause> {
        self.clauses.iter().filter(|c| c.valuation >= level).map(|c| &c.formula).collect()
    }

    /// Whether the `level`-cut classically entails `formula`.
    pub fn entails_at(&self, formula: &HornClause, level: Valuation) -> bool {
        clauses_entail(&self.cut_formulas(level), formula)
    }

    pub fn entails(&self, clause: &PossClause) -> bool {
        self.entails_at(&clause.formula, clause.valuation)
    }

    /// `self ⊨ other`, clause by clause.
    pub fn entails_all(&self, other: &PossKB) -> bool {
        other.clauses().all(|c| self.entails(c))
    }

    /// `val(φ, K)`: `Some(1)` for tautologies, otherwise the largest
    /// valuation in `k^v` whose cut entails `φ`, and `None` (zero) when even
    /// the full projection does not.
    pub fn val_of(&self, formula: &HornClause) -> Option<Valuation> {
        if formula.is_tautology() {
            return Some(Valuation::ONE);
        }
        self.valuations().into_iter().rev().find(|&level| self.entails_at(formula, level))
    }

    /// Inconsistency degree, `val(true -> false, K)`.
    pub fn inc_of(&self) -> Option<Valuation> {
        self.val_of(&HornClause::falsum())
    }

    /// The least-specific possibility distribution of the KB, materialized
    /// over every assignment of the signature.
    pub fn pi_k(&self, cap: usize) -> Result<Distribution, PossError> {
        let variables: Vec<Variable> = self.signature.iter().cloned().collect();
        if variables.len() > cap.min(26) {
            return Err(HornError::CapExceeded { size: variables.len(), cap }.into());
        }
        let index: HashMap<&Variable, usize> = variables.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let compiled: Vec<(BitClause, Valuation)> =
            self.clauses.iter().map(|c| (BitClause::compile(&c.formula, &index), c.valuation)).collect();
        let degrees = (0u64..(1u64 << variables.len()))
            .map(|model| {
                compiled
                    .iter()
                    .filter(|(c, _)| !c.holds(model))
                    .map(|(_, a)| a.complement())
                    .min()
                    .unwrap_or(Valuation::ONE)
            })
            .collect();
        Ok(Distribution { variables, degrees })
    }
}

/// Classical equivalence of non-strict cuts at every level in
/// `a^v ∪ b^v ∪ {1}`.
pub fn poss_equivalent(a: &PossKB, b: &PossKB) -> bool {
    let mut levels = a.valuations();
    levels.extend(b.valuations());
    levels.insert(Valuation::ONE);
    levels.into_iter().all(|l| {
        let ca = a.cut(l, false).projection();
        let cb = b.cut(l, false).projection();
        equivalent(&ca, &cb)
    })
}

/// A possibility degree for every assignment of a finite signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    variables: Vec<Variable>,
    degrees: Vec<Valuation>,
}

impl Distribution {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    /// Degree of the assignment making exactly `true_vars` true.
    pub fn degree(&self, true_vars: &BTreeSet<Variable>) -> Result<Valuation, HornError> {
        let mut mask = 0u64;
        for v in true_vars {
            let i = self
                .variables
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| HornError::UnknownVariable(v.to_string()))?;
            mask |= 1 << i;
        }
        Ok(self.degrees[mask as usize])
    }

    /// `N(φ)`: the infimum of `1 - π(I)` over assignments falsifying `φ`,
    /// and 1 when nothing falsifies it.
    pub fn necessity(&self, formula: &HornClause) -> Result<Valuation, HornError> {
        if let Some(v) = formula.variables().find(|v| !self.variables.contains(v)) {
            return Err(HornError::UnknownVariable(v.to_string()));
        }
        let index: HashMap<&Variable, usize> = self.variables.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let compiled = BitClause::compile(formula, &index);
        Ok(self
            .degrees
            .iter()
            .enumerate()
            .filter(|(model, _)| !compiled.holds(*model as u64))
            .map(|(_, d)| d.complement())
            .min()
            .unwrap_or(Valuation::ONE))
    }

    /// `Π(φ)`: the supremum of `π(I)` over models of `φ`.
    pub fn possibility(&self, formula: &HornClause) -> Result<Valuation, HornError> {
        let index: HashMap<&Variable, usize> = self.variables.iter().enumerate().map(|(i, v)| (v, i)).collect();
        if let Some(v) = formula.variables().find(|v| !index.contains_key(v)) {
            return Err(HornError::UnknownVariable(v.to_string()));
        }
        let compiled = BitClause::compile(formula, &index);
        Ok(self
            .degrees
            .iter()
            .enumerate()
            .filter(|(model, _)| compiled.holds(*model as u64))
            .map(|(_, d)| *d)
            .max()
            .unwrap_or(Valuation::ZERO))
    }
}

impl fmt::Display for PossKB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PossKB {
    type Err = PossError;

    /// One `ANT -> CONS @ DECIMAL` per line; tautologies are dropped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut kb = PossKB::new();
        for (i, line) in s.lines().enumerate() {
            let text = horn::content(line);
            if text.is_empty() {
                continue;
            }
            let clause: PossClause = text
                .parse()
                .map_err(|e: PossError| PossError::Parse { line: i + 1, message: e.to_string() })?;
            if !clause.formula.is_tautology() {
                kb.insert(clause);
            }
        }
        Ok(kb)
    }
}

/// Parses a list of possibilistic clauses, one per line, keeping order and
/// duplicates. Used for scripted counterexample files.
pub fn parse_clause_list(s: &str) -> Result<Vec<PossClause>, PossError> {
    let mut out = Vec::new();
    for (i, line) in s.lines().enumerate() {
        let text = horn::content(line);
        if text.is_empty() {
            continue;
        }
        out.push(
            text.parse()
                .map_err(|e: PossError| PossError::Parse { line: i + 1, message: e.to_string() })?,
        );
    }
    Ok(out)
}
