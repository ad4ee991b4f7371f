use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;

use super::*;
use crate::classical::AfpConfig;
use crate::horn::{equivalent, vars, HornClause, HornKB};
use crate::learner::LearnerError;
use crate::oracle::{FnMembership, MembershipOracle};
use crate::poss_kb::tests::{arb_poss_kb, pc, target_t};
use crate::poss_kb::{poss_equivalent, PossClause, PossKB};
use crate::teacher::{CexStrategy, EventKind, Teacher};
use crate::valuation::{grid, Valuation};

fn v(s: &str) -> Valuation {
    s.parse().unwrap()
}

fn hc(s: &str) -> HornClause {
    s.parse().unwrap()
}

fn poss(s: &str) -> PossKB {
    s.parse().unwrap()
}

fn exact(t: PossKB) -> Teacher<PossKB> {
    Teacher::new(t, CexStrategy::ClauseExact, 0)
}

fn mq_levels(t: &Teacher<PossKB>) -> Vec<String> {
    t.transcript()
        .events()
        .iter()
        .filter(|e| e.event == EventKind::Mq)
        .map(|e| e.valuation.clone().unwrap())
        .collect()
}

/// Descending scan over the grid; the first yes is the answer.
fn linear_scan<O: MembershipOracle<PossClause>>(oracle: &mut O, p: u32, f: &HornClause) -> Valuation {
    for level in grid(p).unwrap().into_iter().rev() {
        if level.is_zero() {
            break;
        }
        if oracle.membership(&PossClause::new(f.clone(), level).unwrap()).unwrap() {
            return level;
        }
    }
    Valuation::ZERO
}

#[test]
fn find_valuation_on_the_two_level_target() {
    let mut t = exact(target_t());
    assert_eq!(find_valuation(&mut t, 1, &hc("p -> q1")).unwrap(), v("0.3"));
    assert_eq!(mq_levels(&t), ["0.5", "0.2", "0.3", "0.4"]);
    let mut t = exact(target_t());
    assert_eq!(find_valuation(&mut t, 1, &hc("p -> q2")).unwrap(), v("0.7"));
    let mut t = exact(target_t());
    let mut sig = target_t().signature().clone();
    sig.extend(vars(["r"]));
    let mut target = target_t();
    target.extend_signature(sig);
    let mut t2 = exact(target);
    assert_eq!(find_valuation(&mut t2, 1, &hc("p -> r")).unwrap(), Valuation::ZERO);
    assert_eq!(mq_levels(&t2), ["0.5", "0.2", "0.1"]);
    assert_eq!(find_valuation(&mut t, 2, &hc("p -> q2")).unwrap(), v("0.7"));
    assert_eq!(find_valuation(&mut t, 3, &hc("p -> p")).unwrap(), Valuation::ONE);
    assert!(matches!(find_valuation(&mut t, 0, &hc("p -> q1")), Err(LearnerError::BadPrecision(0))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn find_valuation_matches_linear_scan(k in arb_poss_kb(4, 3), f in crate::horn::tests::arb_clause(4), p in 1u32..=3) {
        let mut queries = 0usize;
        let target = k.clone();
        let mut counting = FnMembership(|e: &PossClause| {
            queries += 1;
            Ok(target.entails(e))
        });
        let found = find_valuation(&mut counting, p, &f).unwrap();
        let bound = [0, 4, 7, 10][p as usize];
        prop_assert!(queries <= bound);
        let mut oracle = FnMembership(|e: &PossClause| Ok(k.entails(e)));
        prop_assert_eq!(found, linear_scan(&mut oracle, p, &f));
        prop_assert_eq!(found, k.val_of(&f).unwrap_or(Valuation::ZERO).truncate(p));
    }

    #[test]
    fn assembling_true_cuts_round_trips(k in arb_poss_kb(4, 2)) {
        let mut levels: BTreeSet<Valuation> = k.valuations();
        levels.insert(v("0.05"));
        levels.insert(Valuation::ONE);
        let cuts: Vec<(Valuation, HornKB)> = levels.iter().map(|&a| (a, k.cut(a, false).projection())).collect();
        let h = assemble(cuts.iter().map(|(a, c)| (*a, c)));
        prop_assert!(poss_equivalent(&h, &k));
    }
}

#[test]
fn assemble_examples() {
    let c03: HornKB = "p -> q1\np -> q2".parse().unwrap();
    let c07: HornKB = "p -> q2".parse().unwrap();
    let h = assemble([(v("0.3"), &c03), (v("0.7"), &c07)]);
    assert!(poss_equivalent(&h, &target_t()));
    assert!(assemble(std::iter::empty()).is_empty());
    let h = assemble([(Valuation::ONE, &c07)]);
    assert_eq!(h, poss("p -> q2 @ 1"));
}

#[test]
fn normalization_examples() {
    let mut t = exact(target_t());
    assert_eq!(normalize_hypothesis(&poss("p -> q1 @ 0.1"), 1, &mut t).unwrap(), poss("p -> q1 @ 0.3"));
    assert_eq!(normalize_hypothesis(&poss("p -> q2 @ 0.21"), 1, &mut t).unwrap(), poss("p -> q2 @ 0.7"));
    let h = poss("p -> q1 @ 0.3\np -> q2 @ 0.7");
    assert_eq!(normalize_hypothesis(&h, 1, &mut t).unwrap(), h);
    let bad = poss("q1 -> p @ 0.5");
    assert!(matches!(normalize_hypothesis(&bad, 1, &mut t), Err(LearnerError::UnconfirmedClause(_))));
}

const BOUNDS: BaseBounds = BaseBounds { max_antecedent: 2, budget: 10_000 };

fn instances(t: &Teacher<PossKB>) -> BTreeSet<String> {
    t.transcript().events().iter().filter_map(|e| e.instance.clone()).collect()
}

#[test]
fn naive_membership_learner() {
    let mut t = exact(target_t());
    let h = learn_mq_fixed_precision_naive(target_t().signature(), 1, BOUNDS, &mut t).unwrap();
    assert!(poss_equivalent(&h, &target_t()));
    assert_eq!(instances(&t).len(), 10);

    let top = poss("a -> b @ 1\nb -> c @ 1");
    let mut t = exact(top.clone());
    let h = learn_mq_fixed_precision_naive(top.signature(), 1, BOUNDS, &mut t).unwrap();
    assert!(poss_equivalent(&h, &top));
    let cuts: BTreeSet<String> = h.clauses().map(|c| c.formula.to_string()).collect();
    assert_eq!(h.len(), 10 * cuts.len());

    let mut empty = PossKB::new();
    empty.extend_signature(vars(["a", "b"]));
    let mut t = exact(empty.clone());
    let h = learn_mq_fixed_precision_naive(empty.signature(), 1, BOUNDS, &mut t).unwrap();
    assert!(h.is_empty());
}

#[test]
fn levels_membership_learner() {
    let t0 = target_t();
    let mut t = exact(t0.clone());
    let run = learn_mq_fixed_precision_levels(t0.signature(), 1, BOUNDS, &mut t).unwrap();
    assert_eq!(run.iterations(), 2);
    assert_eq!(run.levels[0].0, v("0.3"));
    assert!(equivalent(&run.levels[0].1, &t0.cut(v("0.3"), false).projection()));
    assert_eq!(run.levels[1].0, v("0.7"));
    assert!(equivalent(&run.levels[1].1, &t0.cut(v("0.7"), false).projection()));
    assert!(poss_equivalent(&run.hypothesis, &t0));

    let one = poss("a -> b @ 1");
    let mut t = exact(one.clone());
    let run = learn_mq_fixed_precision_levels(one.signature(), 1, BOUNDS, &mut t).unwrap();
    assert_eq!(run.iterations(), 1);
    assert_eq!(run.levels[0].0, Valuation::ONE);
    assert!(equivalent(&run.levels[0].1, &"a -> b".parse().unwrap()));

    let mut empty = PossKB::new();
    empty.extend_signature(vars(["a", "b"]));
    let mut t = exact(empty.clone());
    let run = learn_mq_fixed_precision_levels(empty.signature(), 1, BOUNDS, &mut t).unwrap();
    assert_eq!(run.iterations(), 0);
    assert!(run.hypothesis.is_empty());
}

#[test]
fn eq_only_enumeration_order() {
    let sig = vars(["a", "b"]);
    let mut empty = PossKB::new();
    empty.extend_signature(sig.clone());
    let (h, n) = learn_eq_only(&sig, &mut exact(empty), 10).unwrap();
    assert!(h.is_empty());
    assert_eq!(n, 1);

    // a -> b is clause 3 of 8; at one digit 0.5 is grid point 5
    let target = poss("a -> b @ 0.5");
    let mut t = exact(target.clone());
    let (h, n) = learn_eq_only(&sig, &mut t, 1000).unwrap();
    assert!(poss_equivalent(&h, &target));
    assert_eq!(n, 1 + 3 * 10 + 5);

    // past the precision-1 singletons, into the precision-2 singletons
    let target = poss("a -> b @ 0.25");
    let mut t = exact(target.clone());
    let (h, n) = learn_eq_only(&sig, &mut t, 1000).unwrap();
    assert!(poss_equivalent(&h, &target));
    assert_eq!(n, 1 + 80 + 3 * 100 + 25);

    let mut t = exact(target);
    assert!(matches!(learn_eq_only(&sig, &mut t, 50), Err(LearnerError::CapReached(50))));
}

#[test]
fn enumeration_strata_sizes() {
    let sig = vars(["a"]);
    // clauses over one variable: -> a, -> false, a -> false
    let e: Vec<PossKB> = PossEnumeration::new(sig).take(1 + 30 + 300 + 435 + 1).collect();
    assert!(e[0].is_empty());
    assert!(e[1..31].iter().all(|k| k.len() == 1 && k.prec() == 1));
    assert!(e[31..331].iter().all(|k| k.len() == 1));
    assert!(e[331..766].iter().all(|k| k.len() == 2 && k.prec() == 1));
    assert_eq!(e[766].len(), 1);
    assert_eq!(e[766].prec(), 3);
}

pub(crate) fn mqeq_script() -> VecDeque<PossClause> {
    ["p -> q1 @ 0.1", "p -> q1 @ 0.1", "p -> q2 @ 0.21", "p -> q2 @ 0.1"].iter().map(|s| pc(s)).collect()
}

#[test]
fn scripted_session_spawns_and_dispatches() {
    let mut t = Teacher::new(target_t(), CexStrategy::Scripted(mqeq_script()), 0);
    let (outcome, stats) = orchestrate_mq_eq(target_t().signature(), 1, &mut t, AfpConfig::default()).unwrap();
    let Outcome::Learned(h) = outcome else { panic!("{outcome:?}") };
    assert!(poss_equivalent(&h, &target_t()));
    assert_eq!(stats.spawned, [v("0.1"), v("0.3"), v("0.7")]);
    assert_eq!(stats.dispatches[0], Dispatch { eq: 2, formula: hc("p -> q1"), levels: vec![v("0.1"), v("0.3")] });
    assert_eq!(stats.dispatches[1].levels, [v("0.1"), v("0.3"), v("0.7")]);
    assert_eq!(stats.eq_calls, 5);
    assert_eq!(h.to_string(), "p -> p @ 0.1\np -> q1 @ 0.3\np -> q2 @ 0.7\n");
}

#[test]
fn eager_consequents_skip_the_third_instance() {
    let mut t = Teacher::new(target_t(), CexStrategy::Scripted(mqeq_script()), 0);
    let config = AfpConfig { eager_consequents: true, minimize_antecedents: false };
    let (outcome, stats) = orchestrate_mq_eq(target_t().signature(), 1, &mut t, config).unwrap();
    // after the second counterexample A_0.1 knows p -> q2 too, so the third
    // hypothesis is already equivalent to the target
    assert!(matches!(outcome, Outcome::Learned(_)));
    assert_eq!(stats.spawned, [v("0.1"), v("0.3")]);
    assert_eq!(stats.eq_calls, 3);
}

#[test]
fn low_precision_is_detected() {
    let target = poss("a -> b @ 0.25");
    let mut t = exact(target.clone());
    let (outcome, _) = orchestrate_mq_eq(target.signature(), 1, &mut t, AfpConfig::default()).unwrap();
    assert!(matches!(outcome, Outcome::PrecisionTooLow(_)));

    let target = poss("a -> b @ 0.05");
    let mut t = exact(target.clone());
    let (outcome, _) = orchestrate_mq_eq(target.signature(), 1, &mut t, AfpConfig::default()).unwrap();
    assert!(matches!(outcome, Outcome::PrecisionTooLow(_)));
}

#[test]
fn fully_certain_singleton() {
    let target = poss("a -> b @ 1");
    let mut t = exact(target.clone());
    let (outcome, stats) = orchestrate_mq_eq(target.signature(), 1, &mut t, AfpConfig::default()).unwrap();
    let Outcome::Learned(h) = outcome else { panic!() };
    assert!(poss_equivalent(&h, &target));
    assert_eq!(stats.spawned, [v("0.1"), Valuation::ONE]);
}

#[test]
fn escalation() {
    let mut t = exact(target_t());
    let (h, report) = learn_mq_eq(target_t().signature(), 1, &mut t, AfpConfig::default()).unwrap();
    assert!(poss_equivalent(&h, &target_t()));
    assert_eq!((report.precision, report.escalations), (1, 0));

    let target = poss("a -> b @ 0.123");
    let mut t = exact(target.clone());
    let (h, report) = learn_mq_eq(target.signature(), 1, &mut t, AfpConfig::default()).unwrap();
    assert!(poss_equivalent(&h, &target));
    assert_eq!((report.precision, report.escalations), (3, 2));
    assert_eq!(report.runs.len(), 3);

    let target = poss("a -> b @ 1");
    let mut t = exact(target.clone());
    let (_, report) = learn_mq_eq(target.signature(), 1, &mut t, AfpConfig::default()).unwrap();
    assert_eq!((report.precision, report.escalations), (1, 0));
}

#[test]
fn empty_signature() {
    let target = PossKB::new();
    let mut t = exact(target.clone());
    let (h, _) = learn_mq_eq(&BTreeSet::new(), 1, &mut t, AfpConfig::default()).unwrap();
    assert!(poss_equivalent(&h, &target));
    let target = poss("true -> false @ 0.4");
    let mut t = exact(target.clone());
    let (h, _) = learn_mq_eq(&BTreeSet::new(), 1, &mut t, AfpConfig::default()).unwrap();
    assert!(poss_equivalent(&h, &target));
}

#[test]
fn reverse_reduction() {
    let k: HornKB = "p -> q1\np -> q2".parse().unwrap();
    let mut lifted = LiftedOracle::new(Teacher::new(k.clone(), CexStrategy::ClauseExact, 0));
    let (h, _) = classical_via_possibilistic(k.signature(), &mut lifted, AfpConfig::default()).unwrap();
    assert!(equivalent(&h, &k));
    assert!(!lifted.lifted().is_empty());
    assert!(lifted.lifted().iter().all(|c| c.valuation().is_one()));

    let mut empty = HornKB::new();
    empty.extend_signature(vars(["a"]));
    let mut lifted = LiftedOracle::new(Teacher::new(empty.clone(), CexStrategy::ClauseExact, 0));
    let (h, _) = classical_via_possibilistic(empty.signature(), &mut lifted, AfpConfig::default()).unwrap();
    assert!(equivalent(&h, &empty));
    assert!(lifted.lifted().is_empty());
}
