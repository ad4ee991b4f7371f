//! Invariants of the query learners, checked from the outside by wrapping
//! the teacher.

use posslearn::classical::{AfpConfig, AfpLearner};
use posslearn::generate::{random_horn_kb, random_poss_kb, Shape};
use posslearn::horn::{equivalent, HornKB};
use posslearn::learner::run_to_completion;
use posslearn::oracle::{EqAnswer, EquivalenceOracle, MembershipOracle, OracleError};
use posslearn::poss_kb::{poss_equivalent, PossKB};
use posslearn::possibilistic::{learn_mq_eq, orchestrate_mq_eq, Outcome};
use posslearn::teacher::{CexStrategy, Target, Teacher};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Records every hypothesis and checks that every counterexample is positive.
struct Checked<K: Target> {
    teacher: Teacher<K>,
    hypotheses: Vec<K>,
    negative: usize,
}

impl<K: Target> Checked<K> {
    fn new(teacher: Teacher<K>) -> Self {
        Checked { teacher, hypotheses: Vec::new(), negative: 0 }
    }
}

impl<K: Target> MembershipOracle<K::Example> for Checked<K> {
    fn membership(&mut self, e: &K::Example) -> Result<bool, OracleError> {
        self.teacher.membership(e)
    }

    fn set_instance(&mut self, label: Option<&str>) {
        self.teacher.set_instance(label)
    }
}

impl<K: Target> EquivalenceOracle<K::Example, K> for Checked<K> {
    fn equivalence(&mut self, h: &K) -> Result<EqAnswer<K::Example>, OracleError> {
        let answer = self.teacher.equivalence(h)?;
        if let EqAnswer::Counterexample(e) = &answer {
            if !(self.teacher.target().entails(e) && !h.entails(e)) {
                self.negative += 1;
            }
        }
        self.hypotheses.push(h.clone());
        Ok(answer)
    }
}

#[test]
fn afp_hypotheses_stay_pure_within_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = (0f64, 0f64);
    for seed in 0..500 {
        let n = rng.gen_range(1..=10);
        let t = random_horn_kb(&mut rng, Shape { variables: n, clauses: 12, max_antecedent: 3 });
        let mut oracle = Checked::new(Teacher::new(t.clone(), CexStrategy::Random, seed));
        let mut learner = AfpLearner::new(t.signature().clone());
        let h: HornKB = run_to_completion(&mut learner, &mut oracle).unwrap();
        assert!(equivalent(&h, &t), "{t}");
        assert_eq!(oracle.negative, 0, "{t}");
        for hyp in &oracle.hypotheses {
            assert!(hyp.clauses().all(|c| t.entails(c)), "unconfirmed clause in {hyp}");
        }
        let counts = oracle.teacher.counts();
        let (m, n) = (t.len().max(1) as f64, n as f64);
        worst.0 = f64::max(worst.0, counts.mq as f64 / (m * m * n * n));
        worst.1 = f64::max(worst.1, counts.eq as f64 / (m * n));
    }
    // c = 4, frozen from worst observed ratios (MQ 1.0, EQ 2.0)
    assert!(worst.0 <= 4.0 && worst.1 <= 4.0, "{worst:?}");
}

#[test]
fn orchestrator_hypotheses_are_confirmed_and_anchored() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for seed in 0..200 {
        let n = rng.gen_range(1..=6);
        let t = random_poss_kb(&mut rng, Shape { variables: n, clauses: 8, max_antecedent: 2 }, 2);
        let mut oracle = Checked::new(Teacher::new(t.clone(), CexStrategy::Random, seed));
        let (h, report) = learn_mq_eq(t.signature(), 1, &mut oracle, AfpConfig::default()).unwrap();
        assert!(poss_equivalent(&h, &t), "{t}");
        assert_eq!(oracle.negative, 0, "{t}");
        let mut hyps = oracle.hypotheses.iter();
        for run in &report.runs {
            for hyp in hyps.by_ref().take(run.eq_calls) {
                assert_eq!(hyp.prec(), run.precision, "{hyp}");
                assert!(hyp.clauses().all(|c| t.entails(c)), "unconfirmed clause in {hyp}");
            }
        }
        assert!(hyps.next().is_none());
    }
}

#[test]
fn pool_spawns_only_target_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for seed in 0..200 {
        let n = rng.gen_range(1..=6);
        let t = random_poss_kb(&mut rng, Shape { variables: n, clauses: 8, max_antecedent: 2 }, 2);
        let levels = t.valuations();
        for p in t.prec()..=t.prec() + 1 {
            let mut teacher = Teacher::new(t.clone(), CexStrategy::Random, seed);
            let (outcome, stats) = orchestrate_mq_eq(t.signature(), p, &mut teacher, AfpConfig::default()).unwrap();
            assert!(matches!(outcome, Outcome::Learned(_)), "{t} at {p}");
            // the first instance sits at 10^-p; every later one at a target level
            assert!(stats.spawned[1..].iter().all(|l| levels.contains(l)), "{t}: {:?}", stats.spawned);
            assert!(stats.spawned.len() <= levels.len() + 1);
            if levels.contains(&stats.spawned[0]) {
                assert!(stats.spawned.len() <= levels.len());
            }
        }
    }
}

#[test]
fn empty_target_is_learned_with_one_query() {
    let t = PossKB::from_clauses([]);
    let mut teacher = Teacher::new(t.clone(), CexStrategy::ClauseExact, 0);
    let (h, report) = learn_mq_eq(t.signature(), 1, &mut teacher, AfpConfig::default()).unwrap();
    assert!(poss_equivalent(&h, &t));
    assert_eq!(teacher.counts().eq, 1);
    assert_eq!(report.escalations, 0);
}
