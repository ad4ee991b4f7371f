//! Seeded random targets for tests, benchmarks, and the CLI.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::horn::{equivalent, Consequent, HornClause, HornKB, Variable};
use crate::poss_kb::{PossClause, PossKB};
use crate::valuation::Valuation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub variables: usize,
    pub clauses: usize,
    pub max_antecedent: usize,
}

/// `x0, x1, ...`
pub fn signature(n: usize) -> BTreeSet<Variable> {
    (0..n).map(|i| Variable::new(format!("x{i}")).expect("valid name")).collect()
}

/// A random non-tautological clause. Falsum is picked with probability
/// `1/(n+1)`, matching its share among consequents.
pub fn random_clause<R: Rng + ?Sized>(rng: &mut R, sig: &[Variable], max_antecedent: usize) -> HornClause {
    let n = sig.len();
    let size = rng.gen_range(0..=max_antecedent.min(n.saturating_sub(1)));
    let antecedent: BTreeSet<Variable> = sig.choose_multiple(rng, size).cloned().collect();
    let free: Vec<&Variable> = sig.iter().filter(|v| !antecedent.contains(*v)).collect();
    let consequent = match free.len() {
        0 => Consequent::Falsum,
        k => match rng.gen_range(0..=k) {
            i if i == k => Consequent::Falsum,
            i => Consequent::Atom(free[i].clone()),
        },
    };
    HornClause::new(antecedent, consequent)
}

/// Up to `shape.clauses` distinct clauses (duplicates are dropped), with
/// a signature of exactly `shape.variables` variables.
pub fn random_horn_kb<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> HornKB {
    let sig = signature(shape.variables);
    let list: Vec<Variable> = sig.iter().cloned().collect();
    let mut k = HornKB::with_signature(sig);
    if list.is_empty() {
        return k;
    }
    let m = rng.gen_range(0..=shape.clauses);
    for _ in 0..m {
        k.insert(random_clause(rng, &list, shape.max_antecedent));
    }
    k
}

/// A random positive valuation with at most `precision` digits.
pub fn random_valuation<R: Rng + ?Sized>(rng: &mut R, precision: u32) -> Valuation {
    let top = 10u64.pow(precision);
    Valuation::grid_point(rng.gen_range(1..=top), precision).expect("grid point in range")
}

pub fn random_poss_kb<R: Rng + ?Sized>(rng: &mut R, shape: Shape, precision: u32) -> PossKB {
    let k = random_horn_kb(rng, shape);
    let mut t = PossKB::new();
    t.extend_signature(k.signature().iter().cloned());
    for c in k.clauses() {
        let v = random_valuation(rng, precision);
        t.insert(PossClause::new(c.clone(), v).expect("positive valuation"));
    }
    t
}

/// Levels at which the cuts of `k` actually change: `α ∈ k^v` whose cut is
/// not equivalent to the strict cut at `α`.
pub fn effective_levels(k: &PossKB) -> Vec<Valuation> {
    k.valuations()
        .into_iter()
        .filter(|&a| !equivalent(&k.cut(a, false).projection(), &k.cut(a, true).projection()))
        .collect()
}

/// Smallest precision of a KB equivalent to `k` (0 for KBs with no
/// effective level).
pub fn essential_precision(k: &PossKB) -> u32 {
    effective_levels(k).iter().map(|v| v.prec()).max().unwrap_or(0)
}
