//! Learning with membership queries only, one classical run per level.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::orchestrator::instance_label;
use super::valuation_search::{assemble, check_precision, ValuationCache};
use crate::classical::ExhaustiveLearner;
use crate::horn::{HornClause, HornKB, Variable};
use crate::learner::{run_membership_only, LearnerError};
use crate::oracle::{MembershipOracle, OracleError};
use crate::poss_kb::{PossClause, PossKB};
use crate::valuation::{positive_grid, Valuation};

/// Bounds for the classical membership-only base learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseBounds {
    pub max_antecedent: usize,
    /// Largest number of queries one base run may ask.
    pub budget: u128,
}

/// Classical view of a possibilistic oracle at a fixed level.
struct AtLevel<'a, O: ?Sized> {
    inner: &'a mut O,
    level: Valuation,
}

impl<O> MembershipOracle<HornClause> for AtLevel<'_, O>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    fn membership(&mut self, formula: &HornClause) -> Result<bool, OracleError> {
        let example = PossClause::new(formula.clone(), self.level).expect("positive level");
        self.inner.membership(&example)
    }
}

fn learn_cut<O>(
    signature: &BTreeSet<Variable>,
    level: Valuation,
    bounds: BaseBounds,
    oracle: &mut O,
) -> Result<HornKB, LearnerError>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    oracle.set_instance(Some(&instance_label(level)));
    let mut learner = ExhaustiveLearner::new(signature.clone(), bounds.max_antecedent, bounds.budget)?;
    run_membership_only(&mut learner, &mut AtLevel { inner: oracle, level })
}

/// Learns the cut at every positive grid point and assembles them.
pub fn learn_mq_fixed_precision_naive<O>(
    signature: &BTreeSet<Variable>,
    p: u32,
    bounds: BaseBounds,
    oracle: &mut O,
) -> Result<PossKB, LearnerError>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    check_precision(p)?;
    let mut cuts = Vec::new();
    for level in positive_grid(p).expect("checked precision") {
        cuts.push((level, learn_cut(signature, level, bounds, oracle)?));
    }
    let mut out = assemble(cuts.iter().map(|(v, k)| (*v, k)));
    out.extend_signature(signature.iter().cloned());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelsRun {
    pub hypothesis: PossKB,
    /// Discovered levels with the cut learned just above the previous one.
    pub levels: Vec<(Valuation, HornKB)>,
}

impl LevelsRun {
    pub fn iterations(&self) -> usize {
        self.levels.len()
    }
}

/// Learns only the cuts where the target changes. Starting from `γ = 0`,
/// learns the cut just above `γ`; its weakest clause valuation is the next
/// level `β`, since every clause of that cut holds at `β` and the cut at `β`
/// is contained in it.
pub fn learn_mq_fixed_precision_levels<O>(
    signature: &BTreeSet<Variable>,
    p: u32,
    bounds: BaseBounds,
    oracle: &mut O,
) -> Result<LevelsRun, LearnerError>
where
    O: MembershipOracle<PossClause> + ?Sized,
{
    check_precision(p)?;
    let mut gamma = Valuation::ZERO;
    let mut levels = Vec::new();
    let mut cache = ValuationCache::default();
    while let Some(next) = gamma.step_up(p) {
        let k = learn_cut(signature, next, bounds, oracle)?;
        if k.is_empty() {
            break;
        }
        let mut beta = Valuation::ONE;
        for c in k.clauses() {
            beta = beta.min(cache.get(oracle, p, c)?);
        }
        if beta <= gamma {
            return Err(LearnerError::NoProgress { level: beta.to_string(), previous: gamma.to_string() });
        }
        levels.push((beta, k));
        gamma = beta;
    }
    let mut hypothesis = assemble(levels.iter().map(|(v, k)| (*v, k)));
    hypothesis.extend_signature(signature.iter().cloned());
    Ok(LevelsRun { hypothesis, levels })
}
