//! Classical Horn learning through a possibilistic learner.

use std::collections::BTreeSet;

use super::orchestrator::{learn_mq_eq, MqEqReport};
use crate::classical::AfpConfig;
use crate::horn::{HornClause, HornKB};
use crate::learner::LearnerError;
use crate::oracle::{EqAnswer, EquivalenceOracle, MembershipOracle, OracleError};
use crate::poss_kb::{PossClause, PossKB};
use crate::valuation::Valuation;

/// Presents classical oracles for `k` as oracles for `{(φ, 1) : φ ∈ k}`.
pub struct LiftedOracle<O> {
    inner: O,
    lifted: Vec<PossClause>,
}

impl<O> LiftedOracle<O> {
    pub fn new(inner: O) -> Self {
        LiftedOracle { inner, lifted: Vec::new() }
    }

    /// Counterexamples handed to the possibilistic learner, in order.
    pub fn lifted(&self) -> &[PossClause] {
        &self.lifted
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: MembershipOracle<HornClause>> MembershipOracle<PossClause> for LiftedOracle<O> {
    fn membership(&mut self, example: &PossClause) -> Result<bool, OracleError> {
        self.inner.membership(&example.formula)
    }

    fn set_instance(&mut self, label: Option<&str>) {
        self.inner.set_instance(label)
    }
}

impl<O: EquivalenceOracle<HornClause, HornKB>> EquivalenceOracle<PossClause, PossKB> for LiftedOracle<O> {
    fn equivalence(&mut self, hypothesis: &PossKB) -> Result<EqAnswer<PossClause>, OracleError> {
        let answer = self.inner.equivalence(&hypothesis.projection())?;
        Ok(answer.map(|c| {
            let lifted = PossClause::new(c, Valuation::ONE).expect("one is positive");
            self.lifted.push(lifted.clone());
            lifted
        }))
    }
}

/// Learns a classical Horn KB with the possibilistic learner.
pub fn classical_via_possibilistic<O>(
    signature: &BTreeSet<crate::horn::Variable>,
    oracle: &mut LiftedOracle<O>,
    config: AfpConfig,
) -> Result<(HornKB, MqEqReport), LearnerError>
where
    O: MembershipOracle<HornClause> + EquivalenceOracle<HornClause, HornKB>,
{
    let (h, report) = learn_mq_eq(signature, 1, oracle, config)?;
    let mut k = h.projection();
    k.extend_signature(signature.iter().cloned());
    Ok((k, report))
}
