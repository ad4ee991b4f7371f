//! Locating valuations with membership queries.

use std::collections::HashMap;

use crate::horn::HornClause;
use crate::learner::LearnerError;
use crate::oracle::MembershipOracle;
use crate::poss_kb::{PossClause, PossKB};
use crate::valuation::{Valuation, MAX_PRECISION};

pub const FIND_VALUATION: &str = "FindValuation";

pub(crate) fn check_precision(p: u32) -> Result<(), LearnerError> {
    if (1..=MAX_PRECISION).contains(&p) {
        Ok(())
    } else {
        Err(LearnerError::BadPrecision(p))
    }
}

/// Asks whether the target entails `(φ, α)`.
pub(crate) fn ask<O>(oracle: &mut O, formula: &HornClause, level: Valuation) -> Result<bool, LearnerError>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    let example = PossClause::new(formula.clone(), level).expect("membership levels are positive");
    Ok(oracle.membership(&example)?)
}

/// Largest point of the precision-`p` grid at which the target entails
/// `φ`, or zero. Entailment is monotone in the level, so a binary search over
/// the grid indices `0..=10^p` needs at most `ceil(log2(10^p + 1))` queries.
pub fn find_valuation<O>(oracle: &mut O, p: u32, formula: &HornClause) -> Result<Valuation, LearnerError>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    check_precision(p)?;
    let (mut lo, mut hi) = (0u64, 10u64.pow(p));
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if ask(oracle, formula, Valuation::grid_point(mid, p).expect("grid point"))? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(Valuation::grid_point(lo, p).expect("grid point"))
}

/// [`find_valuation`] with answers remembered per formula.
#[derive(Debug, Default)]
pub(crate) struct ValuationCache {
    known: HashMap<HornClause, Valuation>,
}

impl ValuationCache {
    pub(crate) fn get<O>(&mut self, oracle: &mut O, p: u32, formula: &HornClause) -> Result<Valuation, LearnerError>
    where
        O: MembershipOracle<PossClause> + ?Sized,
    {
        if let Some(v) = self.known.get(formula) {
            return Ok(*v);
        }
        oracle.set_instance(Some(FIND_VALUATION));
        let v = find_valuation(oracle, p, formula)?;
        self.known.insert(formula.clone(), v);
        Ok(v)
    }
}

/// Replaces each valuation of `h` by the valuation the target gives its
/// formula at precision `p`. Every clause must be entailed by the target.
pub fn normalize_hypothesis<O>(h: &PossKB, p: u32, oracle: &mut O) -> Result<PossKB, LearnerError>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    let mut cache = ValuationCache::default();
    normalize_cached(h.clauses().map(|c| &c.formula), p, oracle, &mut cache, h)
}

pub(crate) fn normalize_cached<'a, O>(
    formulas: impl IntoIterator<Item = &'a HornClause>,
    p: u32,
    oracle: &mut O,
    cache: &mut ValuationCache,
    like: &PossKB,
) -> Result<PossKB, LearnerError>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    let mut out = PossKB::new();
    out.extend_signature(like.signature().iter().cloned());
    for f in formulas {
        let v = cache.get(oracle, p, f)?;
        let clause = PossClause::new(f.clone(), v).map_err(|_| LearnerError::UnconfirmedClause(f.to_string()))?;
        out.insert(clause);
    }
    Ok(out)
}

/// `{(φ, α) : φ ∈ k_α}` over all given levels.
pub fn assemble<'a>(cuts: impl IntoIterator<Item = (Valuation, &'a crate::horn::HornKB)>) -> PossKB {
    let mut out = PossKB::new();
    for (level, k) in cuts {
        out.extend_signature(k.signature().iter().cloned());
        for c in k.clauses() {
            out.insert(PossClause::new(c.clone(), level).expect("assembled levels are positive"));
        }
    }
    out
}
