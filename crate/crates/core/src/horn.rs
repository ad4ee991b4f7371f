//! Propositional Horn clauses, forward-chaining entailment, and a
//! truth-table oracle used to cross-check it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on the number of variables the truth-table oracle accepts.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 16;
const HARD_BRUTE_FORCE_CAP: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HornError {
    #[error("invalid variable name `{0}`")]
    BadVariable(String),
    #[error("variable `{0}` is not in the signature")]
    UnknownVariable(String),
    #[error("{size} variables exceed the brute-force cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_error(line: usize, message: impl Into<String>) -> HornError {
    HornError::Parse { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Result<Self, HornError> {
        let name = name.into();
        let mut chars = name.chars();
        let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
            && name != "true"
            && name != "false";
        if ok {
            Ok(Variable(name))
        } else {
            Err(HornError::BadVariable(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Variable {
    type Error = HornError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Variable::new(s)
    }
}

impl From<Variable> for String {
    fn from(v: Variable) -> String {
        v.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Builds a variable set from names, panicking on invalid names. Test helper.
pub fn vars<'a>(names: impl IntoIterator<Item = &'a str>) -> BTreeSet<Variable> {
    names.into_iter().map(|n| Variable::new(n).expect("valid variable")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Consequent {
    Atom(Variable),
    Falsum,
}

impl Consequent {
    pub fn atom(&self) -> Option<&Variable> {
        match self {
            Consequent::Atom(v) => Some(v),
            Consequent::Falsum => None,
        }
    }
}

impl fmt::Display for Consequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Consequent::Atom(v) => v.fmt(f),
            Consequent::Falsum => f.write_str("false"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HornClause {
    pub antecedent: BTreeSet<Variable>,
    pub consequent: Consequent,
}

impl HornClause {
    pub fn new(antecedent: BTreeSet<Variable>, consequent: Consequent) -> Self {
        HornClause { antecedent, consequent }
    }

    /// The clause `x -> x`.
    pub fn tautology(x: Variable) -> Self {
        HornClause::new(BTreeSet::from([x.clone()]), Consequent::Atom(x))
    }

    /// `true -> false`, whose valuation in a possibilistic KB is its
    /// inconsistency degree.
    pub fn falsum() -> Self {
        HornClause::new(BTreeSet::new(), Consequent::Falsum)
    }

    pub fn is_tautology(&self) -> bool {
        match &self.consequent {
            Consequent::Atom(v) => self.antecedent.contains(v),
            Consequent::Falsum => false,
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.antecedent.iter().chain(self.consequent.atom())
    }

    pub fn is_over(&self, signature: &BTreeSet<Variable>) -> bool {
        self.variables().all(|v| signature.contains(v))
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.antecedent.is_empty() {
            f.write_str("true")?;
        } else {
            for (i, v) in self.antecedent.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                v.fmt(f)?;
            }
        }
        write!(f, " -> {}", self.consequent)
    }
}

impl FromStr for HornClause {
    type Err = HornError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ant, cons) = s
            .split_once("->")
            .ok_or_else(|| parse_error(1, format!("expected `ANT -> CONS`, got `{}`", s.trim())))?;
        let ant = ant.trim();
        let antecedent = if ant == "true" {
            BTreeSet::new()
        } else {
            ant.split(',')
                .map(|v| Variable::new(v.trim()))
                .collect::<Result<BTreeSet<_>, _>>()?
        };
        let cons = cons.trim();
        let consequent = if cons == "false" {
            Consequent::Falsum
        } else {
            Consequent::Atom(Variable::new(cons)?)
        };
        Ok(HornClause { antecedent, consequent })
    }
}

/// Result of forward chaining from a seed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Closure {
    Atoms(BTreeSet<Variable>),
    Inconsistent,
}

/// Counter-based forward chaining. Stops early once `goal` is derived.
/// Returns the derived atoms, or `None` if a falsum clause fired.
fn forward_chain<'a>(
    clauses: &[&'a HornClause],
    seed: impl IntoIterator<Item = &'a Variable>,
    goal: Option<&Variable>,
) -> Option<BTreeSet<&'a Variable>> {
    let mut missing: Vec<usize> = clauses.iter().map(|c| c.antecedent.len()).collect();
    let mut watchers: HashMap<&Variable, Vec<usize>> = HashMap::new();
    for (i, c) in clauses.iter().enumerate() {
        for v in &c.antecedent {
            watchers.entry(v).or_default().push(i);
        }
    }
    let mut derived: BTreeSet<&Variable> = BTreeSet::new();
    let mut queue: Vec<&Variable> = Vec::new();
    for v in seed {
        if derived.insert(v) {
            queue.push(v);
        }
    }
    let fire = |i: usize, derived: &mut BTreeSet<&'a Variable>, queue: &mut Vec<&'a Variable>| -> bool {
        match &clauses[i].consequent {
            Consequent::Falsum => false,
            Consequent::Atom(v) => {
                if derived.insert(v) {
                    queue.push(v);
                }
                true
            }
        }
    };
    let ready: Vec<usize> = (0..clauses.len()).filter(|&i| missing[i] == 0).collect();
    for i in ready {
        if !fire(i, &mut derived, &mut queue) {
            return None;
        }
    }
    while let Some(v) = queue.pop() {
        if goal == Some(v) {
            return Some(derived);
        }
        if let Some(ws) = watchers.get(v) {
            for &i in ws {
                missing[i] -= 1;
                if missing[i] == 0 && !fire(i, &mut derived, &mut queue) {
                    return None;
                }
            }
        }
    }
    Some(derived)
}

/// Classical entailment of `clause` by the given clause collection.
pub fn clauses_entail<'a>(clauses: &[&'a HornClause], clause: &'a HornClause) -> bool {
    if clause.is_tautology() {
        return true;
    }
    let goal = clause.consequent.atom();
    match forward_chain(clauses, clause.antecedent.iter(), goal) {
        None => true,
        Some(derived) => goal.is_some_and(|g| derived.contains(g)),
    }
}

/// A finite set of Horn clauses together with its signature.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HornKB {
    clauses: IndexSet<HornClause>,
    signature: BTreeSet<Variable>,
}

impl HornKB {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_signature(signature: BTreeSet<Variable>) -> Self {
        HornKB { clauses: IndexSet::new(), signature }
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = HornClause>) -> Self {
        let mut kb = HornKB::new();
        for c in clauses {
            kb.insert(c);
        }
        kb
    }

    /// Adds a clause and its variables to the signature. Returns false on a
    /// duplicate.
    pub fn insert(&mut self, clause: HornClause) -> bool {
        self.signature.extend(clause.variables().cloned());
        self.clauses.insert(clause)
    }

    pub fn extend_signature(&mut self, vars: impl IntoIterator<Item = Variable>) {
        self.signature.extend(vars);
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &HornClause> {
        self.clauses.iter()
    }

    pub fn contains(&self, clause: &HornClause) -> bool {
        self.clauses.contains(clause)
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

    /// Least superset of `seed` closed under this KB's clauses.
    pub fn closure(&self, seed: &BTreeSet<Variable>) -> Result<Closure, HornError> {
        if let Some(v) = seed.iter().find(|v| !self.signature.contains(*v)) {
            return Err(HornError::UnknownVariable(v.to_string()));
        }
        Ok(self.closure_unchecked(seed))
    }

    /// Forward chaining without the signature check; variables outside the
    /// signature simply never fire anything.
    pub fn closure_unchecked(&self, seed: &BTreeSet<Variable>) -> Closure {
        let refs: Vec<&HornClause> = self.clauses.iter().collect();
        match forward_chain(&refs, seed.iter(), None) {
            None => Closure::Inconsistent,
            Some(d) => Closure::Atoms(d.into_iter().cloned().collect()),
        }
    }

    pub fn entails(&self, clause: &HornClause) -> bool {
        let refs: Vec<&HornClause> = self.clauses.iter().collect();
        clauses_entail(&refs, clause)
    }

    pub fn entails_all<'a>(&self, clauses: impl IntoIterator<Item = &'a HornClause>) -> bool {
        let refs: Vec<&HornClause> = self.clauses.iter().collect();
        clauses.into_iter().all(|c| clauses_entail(&refs, c))
    }

    pub fn is_satisfiable(&self) -> bool {
        self.closure_unchecked(&BTreeSet::new()) != Closure::Inconsistent
    }

    pub fn is_falsifiable(&self) -> bool {
        self.clauses.iter().any(|c| !c.is_tautology())
    }

    pub fn is_non_trivial(&self) -> bool {
        self.is_satisfiable() && self.is_falsifiable()
    }

    /// Semantic entailment by enumerating all assignments over the joint
    /// signature of the KB and the clause.
    pub fn tt_entails(&self, clause: &HornClause, cap: usize) -> Result<bool, HornError> {
        let mut sig: BTreeSet<&Variable> = self.signature.iter().collect();
        sig.extend(self.clauses.iter().flat_map(|c| c.variables()));
        sig.extend(clause.variables());
        let cap = cap.min(HARD_BRUTE_FORCE_CAP);
        if sig.len() > cap {
            return Err(HornError::CapExceeded { size: sig.len(), cap });
        }
        let index: HashMap<&Variable, usize> = sig.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let kb: Vec<BitClause> = self.clauses.iter().map(|c| BitClause::compile(c, &index)).collect();
        let goal = BitClause::compile(clause, &index);
        let n = sig.len();
        Ok((0u64..(1u64 << n)).all(|model| !kb.iter().all(|c| c.holds(model)) || goal.holds(model)))
    }
}

/// Clause over a bitmask assignment.
pub(crate) struct BitClause {
    antecedent: u64,
    consequent: Option<u32>,
}

impl BitClause {
    pub(crate) fn compile(clause: &HornClause, index: &HashMap<&Variable, usize>) -> Self {
        let antecedent = clause.antecedent.iter().fold(0u64, |m, v| m | 1 << index[v]);
        let consequent = clause.consequent.atom().map(|v| index[v] as u32);
        BitClause { antecedent, consequent }
    }

    pub(crate) fn holds(&self, model: u64) -> bool {
        if self.antecedent & !model != 0 {
            return true;
        }
        match self.consequent {
            Some(b) => model & (1 << b) != 0,
            None => false,
        }
    }
}

/// Classical equivalence: each KB entails every clause of the other.
pub fn equivalent(a: &HornKB, b: &HornKB) -> bool {
    b.entails_all(a.clauses()) && a.entails_all(b.clauses())
}

/// All `k`-subsets of `0..n` in lexicographic order, produced lazily.
#[derive(Debug, Clone)]
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let (n, k) = (self.n, self.idx.len());
        let mut i = k;
        while i > 0 && self.idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            self.done = true;
        } else {
            self.idx[i - 1] += 1;
            for j in i..k {
                self.idx[j] = self.idx[j - 1] + 1;
            }
        }
        Some(out)
    }
}

pub(crate) fn combinations(n: usize, k: usize) -> Combinations {
    Combinations::new(n, k)
}

/// Every non-tautological clause over `signature` whose antecedent has at
/// most `max_antecedent` variables, ordered by antecedent size, then
/// lexicographically, then by consequent (falsum last).
pub fn all_clauses(signature: &BTreeSet<Variable>, max_antecedent: Option<usize>) -> Vec<HornClause> {
    let vars: Vec<&Variable> = signature.iter().collect();
    let bound = max_antecedent.unwrap_or(vars.len()).min(vars.len());
    let mut out = Vec::new();
    for size in 0..=bound {
        for subset in combinations(vars.len(), size) {
            let antecedent: BTreeSet<Variable> = subset.iter().map(|&i| vars[i].clone()).collect();
            for v in &vars {
                if !antecedent.contains(*v) {
                    out.push(HornClause::new(antecedent.clone(), Consequent::Atom((*v).clone())));
                }
            }
            out.push(HornClause::new(antecedent, Consequent::Falsum));
        }
    }
    out
}

/// Number of clauses [`all_clauses`] would produce, without building them.
pub fn count_clauses(n: usize, max_antecedent: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=max_antecedent.min(n) {
        if i > 0 {
            binom = binom * (n - i + 1) as u128 / i as u128;
        }
        total += binom * (n - i + 1) as u128;
    }
    total
}

impl fmt::Display for HornKB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Strips a `#` comment and surrounding whitespace.
pub(crate) fn content(line: &str) -> &str {
    match line.split_once('#') {
        Some((c, _)) => c.trim(),
        None => line.trim(),
    }
}

impl FromStr for HornKB {
    type Err = HornError;

    /// One `ANT -> CONS` per line; `#` comments and blank lines are skipped
    /// and tautologies are dropped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut kb = HornKB::new();
        for (i, line) in s.lines().enumerate() {
            let text = content(line);
            if text.is_empty() {
                continue;
            }
            let clause: HornClause = text.parse().map_err(|e| match e {
                HornError::Parse { message, .. } => parse_error(i + 1, message),
                other => parse_error(i + 1, other.to_string()),
            })?;
            if !clause.is_tautology() {
                kb.insert(clause);
            }
        }
        Ok(kb)
    }
}
