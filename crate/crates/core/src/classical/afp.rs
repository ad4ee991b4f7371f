//! Horn learning from entailment with membership and equivalence queries.
//!
//! The learner keeps an ordered list `S` of antecedent sets, each with a set
//! of consequents confirmed by membership queries; its hypothesis is
//! `{s -> c : s ∈ S, c ∈ consequents(s)}` and is therefore always entailed
//! by the target. On a positive counterexample `A -> b`:
//!
//! 1. `A` is saturated under the current hypothesis, giving `x`.
//! 2. Every unsaturated entry `s ⊆ x` has its consequents completed, and `x`
//!    is recomputed, until the counterexample is explained or no such entry
//!    remains.
//! 3. The first entry `s` with `s ∩ x ⊊ s` and `s ∩ x` target-negative (some
//!    `c ∉ s ∩ x` with `target ⊨ s ∩ x -> c`) is replaced by `s ∩ x`, whose
//!    consequents are recomputed.
//! 4. Otherwise `x` is appended. With lazy consequents (the default) it only
//!    carries `b` until step 2 first touches it; with eager consequents it is
//!    saturated immediately.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::horn::{Closure, Consequent, HornClause, HornKB, Variable};
use crate::learner::{Answer, Counters, Learner, LearnerError, Status};
use crate::oracle::EqAnswer;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AfpConfig {
    /// Saturate appended sets right away instead of on first use.
    pub eager_consequents: bool,
    /// Shrink counterexample antecedents with membership queries first.
    pub minimize_antecedents: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub antecedent: BTreeSet<Variable>,
    pub consequents: BTreeSet<Consequent>,
    /// Whether `consequents` holds every target consequent of `antecedent`.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum Task {
    Confirm,
    Minimize { position: usize },
    Saturate { entry: usize },
    Probe { entry: usize, set: BTreeSet<Variable> },
    Fill { entry: Option<usize>, set: BTreeSet<Variable> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Batch {
    task: Task,
    queries: Vec<HornClause>,
    answers: Vec<bool>,
    /// Finish as soon as one query is answered yes.
    any: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Refinement {
    antecedent: BTreeSet<Variable>,
    consequent: Consequent,
    /// Membership answers seen during this refinement.
    cache: Vec<(HornClause, bool)>,
    scan: usize,
}

impl Refinement {
    fn cached(&self, q: &HornClause) -> Option<bool> {
        self.cache.iter().find(|(c, _)| c == q).map(|(_, a)| *a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum Phase {
    Fresh,
    AwaitingEq,
    Querying { refinement: Refinement, batch: Batch },
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AfpLearner {
    signature: BTreeSet<Variable>,
    config: AfpConfig,
    entries: Vec<Entry>,
    phase: Phase,
    status: Status,
    counters: Counters,
}

enum Next {
    Batch(Refinement, Batch),
    /// Append a lazily filled entry, then ask an equivalence query.
    Append(Entry),
    Eq,
}

impl AfpLearner {
    pub fn new(signature: BTreeSet<Variable>) -> Self {
        Self::with_config(signature, AfpConfig::default())
    }

    pub fn with_config(signature: BTreeSet<Variable>, config: AfpConfig) -> Self {
        AfpLearner {
            signature,
            config,
            entries: Vec::new(),
            phase: Phase::Fresh,
            status: Status::Running,
            counters: Counters::default(),
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn hypothesis(&self) -> HornKB {
        let mut h = HornKB::with_signature(self.signature.clone());
        for e in &self.entries {
            for c in &e.consequents {
                h.insert(HornClause::new(e.antecedent.clone(), c.clone()));
            }
        }
        h
    }

    /// `set -> c` for every `c ∉ set`, falsum last.
    fn candidates(&self, set: &BTreeSet<Variable>) -> Vec<HornClause> {
        self.signature
            .iter()
            .filter(|v| !set.contains(*v))
            .map(|v| Consequent::Atom(v.clone()))
            .chain(std::iter::once(Consequent::Falsum))
            .map(|c| HornClause::new(set.clone(), c))
            .collect()
    }

    fn batch(task: Task, queries: Vec<HornClause>, any: bool) -> Batch {
        Batch { task, queries, answers: Vec::new(), any }
    }

    fn start_refinement(&self, cex: HornClause) -> Result<Next, LearnerError> {
        if cex.is_tautology() || self.hypothesis().entails(&cex) {
            return Err(LearnerError::NegativeCounterexample(cex.to_string()));
        }
        let refinement = Refinement {
            antecedent: cex.antecedent.clone(),
            consequent: cex.consequent.clone(),
            cache: Vec::new(),
            scan: 0,
        };
        Ok(Next::Batch(refinement, Self::batch(Task::Confirm, vec![cex], false)))
    }

    fn minimize_query(refinement: &Refinement, position: usize) -> HornClause {
        let mut smaller = refinement.antecedent.clone();
        let dropped = smaller.iter().nth(position).cloned().expect("position in range");
        smaller.remove(&dropped);
        HornClause::new(smaller, refinement.consequent.clone())
    }

    fn minimize_or_refine(&self, refinement: Refinement, position: usize) -> Next {
        if position < refinement.antecedent.len() {
            let q = Self::minimize_query(&refinement, position);
            Next::Batch(refinement, Self::batch(Task::Minimize { position }, vec![q], false))
        } else {
            self.refine(refinement)
        }
    }

    /// Steps 1 to 4 from the current state of the refinement.
    fn refine(&self, mut refinement: Refinement) -> Next {
        let h = self.hypothesis();
        let x = match h.closure_unchecked(&refinement.antecedent) {
            Closure::Inconsistent => return Next::Eq,
            Closure::Atoms(x) => x,
        };
        if let Consequent::Atom(b) = &refinement.consequent {
            if x.contains(b) {
                return Next::Eq;
            }
        }
        if !self.config.eager_consequents {
            if let Some(j) = self.entries.iter().position(|e| !e.saturated && e.antecedent.is_subset(&x)) {
                let queries = self.candidates(&self.entries[j].antecedent);
                return Next::Batch(refinement, Self::batch(Task::Saturate { entry: j }, queries, false));
            }
        }
        for i in refinement.scan..self.entries.len() {
            let s = &self.entries[i].antecedent;
            let meet: BTreeSet<Variable> = s.intersection(&x).cloned().collect();
            if meet.len() < s.len() {
                refinement.scan = i;
                let queries = self.candidates(&meet);
                return Next::Batch(refinement, Self::batch(Task::Probe { entry: i, set: meet }, queries, true));
            }
        }
        if self.config.eager_consequents {
            let queries = self.candidates(&x);
            Next::Batch(refinement, Self::batch(Task::Fill { entry: None, set: x }, queries, false))
        } else {
            // Appended sets already carry the counterexample consequent,
            // which the confirming query established for `A ⊆ x`.
            let consequents = BTreeSet::from([refinement.consequent.clone()]);
            Next::Append(Entry { antecedent: x, consequents, saturated: false })
        }
    }

    fn complete(&mut self, mut refinement: Refinement, batch: Batch) -> Result<Next, LearnerError> {
        let yes: Vec<&HornClause> =
            batch.queries.iter().zip(&batch.answers).filter(|(_, a)| **a).map(|(q, _)| q).collect();
        Ok(match batch.task {
            Task::Confirm => {
                if yes.is_empty() {
                    return Err(LearnerError::NegativeCounterexample(batch.queries[0].to_string()));
                }
                if self.config.minimize_antecedents {
                    self.minimize_or_refine(refinement, 0)
                } else {
                    self.refine(refinement)
                }
            }
            Task::Minimize { position } => {
                if yes.is_empty() {
                    self.minimize_or_refine(refinement, position + 1)
                } else {
                    refinement.antecedent = batch.queries[0].antecedent.clone();
                    self.minimize_or_refine(refinement, position)
                }
            }
            Task::Saturate { entry } => {
                let e = &mut self.entries[entry];
                e.consequents = yes.iter().map(|q| q.consequent.clone()).collect();
                e.saturated = true;
                self.refine(refinement)
            }
            Task::Probe { entry, set } => {
                if yes.is_empty() {
                    refinement.scan = entry + 1;
                    self.refine(refinement)
                } else {
                    let queries = self.candidates(&set);
                    Next::Batch(refinement, Self::batch(Task::Fill { entry: Some(entry), set }, queries, false))
                }
            }
            Task::Fill { entry, set } => {
                let fresh = Entry {
                    antecedent: set,
                    consequents: yes.iter().map(|q| q.consequent.clone()).collect(),
                    saturated: true,
                };
                match entry {
                    Some(i) => self.entries[i] = fresh,
                    None => self.entries.push(fresh),
                }
                self.dedup();
                Next::Eq
            }
        })
    }

    /// Merges entries with identical antecedents into the earliest one.
    fn dedup(&mut self) {
        let mut i = 0;
        while i < self.entries.len() {
            if let Some(j) = (0..i).find(|&j| self.entries[j].antecedent == self.entries[i].antecedent) {
                let dup = self.entries.remove(i);
                let keep = &mut self.entries[j];
                keep.consequents.extend(dup.consequents);
                keep.saturated |= dup.saturated;
            } else {
                i += 1;
            }
        }
    }

    /// Feeds cached answers and stops at the first uncached query.
    fn drive(&mut self, next: Next) -> Result<(), LearnerError> {
        let mut next = next;
        loop {
            match next {
                Next::Append(entry) => {
                    self.entries.push(entry);
                    next = Next::Eq;
                }
                Next::Eq => {
                    self.phase = Phase::AwaitingEq;
                    self.counters.eq += 1;
                    self.status = Status::AwaitingEquivalence(self.hypothesis());
                    return Ok(());
                }
                Next::Batch(refinement, mut batch) => {
                    let finished = batch.answers.len() == batch.queries.len()
                        || (batch.any && batch.answers.last() == Some(&true));
                    if finished {
                        next = self.complete(refinement, batch)?;
                        continue;
                    }
                    let q = batch.queries[batch.answers.len()].clone();
                    if let Some(a) = refinement.cached(&q) {
                        batch.answers.push(a);
                        next = Next::Batch(refinement, batch);
                        continue;
                    }
                    self.counters.mq += 1;
                    self.status = Status::AwaitingMembership(q);
                    self.phase = Phase::Querying { refinement, batch };
                    return Ok(());
                }
            }
        }
    }
}

impl Learner for AfpLearner {
    fn status(&self) -> &Status {
        &self.status
    }

    fn step(&mut self, answer: Option<Answer>) -> Result<&Status, LearnerError> {
        self.counters.steps += 1;
        let phase = std::mem::replace(&mut self.phase, Phase::Done);
        let next = match (phase, answer) {
            (Phase::Fresh, None) => Next::Eq,
            (Phase::AwaitingEq, Some(Answer::Equivalence(EqAnswer::Yes))) => {
                self.phase = Phase::Done;
                self.status = Status::Done(self.hypothesis());
                return Ok(&self.status);
            }
            (Phase::AwaitingEq, Some(Answer::Equivalence(EqAnswer::Counterexample(cex)))) => {
                match self.start_refinement(cex) {
                    Ok(n) => n,
                    Err(e) => {
                        self.phase = Phase::AwaitingEq;
                        return Err(e);
                    }
                }
            }
            (Phase::Querying { mut refinement, mut batch }, Some(Answer::Membership(a))) => {
                let q = batch.queries[batch.answers.len()].clone();
                refinement.cache.push((q, a));
                batch.answers.push(a);
                Next::Batch(refinement, batch)
            }
            (phase, answer) => {
                let msg = format!("answer {answer:?} does not fit status {:?}", self.status);
                self.phase = phase;
                return Err(LearnerError::Protocol(msg));
            }
        };
        self.drive(next)?;
        Ok(&self.status)
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}
