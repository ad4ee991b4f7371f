use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use posslearn::cli::{cmd_oracle_check, cmd_oracle_check_with, EXIT_BUG, EXIT_OK};
use posslearn::generate::{random_poss_kb, Shape};
use posslearn::valuation::Valuation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posslearn")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn learn_modes_exit_zero() {
    let t = data("hypothesis.pkb");
    assert_eq!(code(&["learn", "--mode", "mq-eq", "--target", &t]), 0);
    assert_eq!(code(&["learn", "--mode", "mq-only", "--precision", "1", "--target", &t]), 0);
    assert_eq!(code(&["learn", "--mode", "mq-only", "--precision", "1", "--naive", "--target", &t]), 0);
    assert_eq!(code(&["learn", "--mode", "eq-only", "--target", &data("tiny.pkb"), "--cap", "100000"]), 0);
    assert_eq!(code(&["learn", "--mode", "pac", "--target", &t, "--seed", "3"]), 0);
    assert_eq!(code(&["learn", "--mode", "classical", "--target", &data("chain.hkb")]), 0);
    for s in ["clause-exact", "adversarial-low", "random"] {
        assert_eq!(code(&["learn", "--mode", "mq-eq", "--target", &t, "--cex-strategy", s, "--seed", "9"]), 0, "{s}");
    }
}

#[test]
fn error_exit_codes() {
    let t = data("hypothesis.pkb");
    // mq-only needs a precision
    assert_eq!(code(&["learn", "--mode", "mq-only", "--target", &t]), 2);
    assert_eq!(code(&["learn", "--mode", "mq-eq", "--target", "/nonexistent.pkb"]), 2);
    // scripted without a script
    assert_eq!(code(&["learn", "--mode", "mq-eq", "--target", &t, "--cex-strategy", "scripted"]), 2);
    assert_eq!(code(&["learn", "--mode", "eq-only", "--target", &t, "--cap", "100"]), 3);
    assert_eq!(code(&["verify", &t, &data("naive.pkb")]), 1);
    assert_eq!(code(&["verify", &t, &data("redundant.pkb")]), 0);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut previous: Option<(Vec<u8>, Vec<u8>, Vec<u8>)> = None;
    for i in 0..3 {
        let path = |name: &str| dir.path().join(format!("{name}{i}")).to_str().unwrap().to_owned();
        let (h, t, s) = (path("h"), path("t"), path("s"));
        let out = run(&[
            "learn",
            "--mode",
            "mq-eq",
            "--target",
            &data("hypothesis.pkb"),
            "--cex-strategy",
            "random",
            "--seed",
            "42",
            "--out-hypothesis",
            &h,
            "--out-transcript",
            &t,
            "--out-stats",
            &s,
        ]);
        assert!(out.status.success());
        let files = (std::fs::read(&h).unwrap(), std::fs::read(&t).unwrap(), std::fs::read(&s).unwrap());
        if let Some(prev) = &previous {
            assert_eq!(prev, &files);
        }
        previous = Some(files);
    }
    let (h, _, s) = previous.unwrap();
    let learned: posslearn::PossKB = String::from_utf8(h).unwrap().parse().unwrap();
    let target: posslearn::PossKB = std::fs::read_to_string(data("hypothesis.pkb")).unwrap().parse().unwrap();
    assert!(posslearn::poss_kb::poss_equivalent(&learned, &target));
    let stats: serde_json::Value = serde_json::from_slice(&s).unwrap();
    for key in ["mq_count", "eq_count", "instances_spawned", "escalations", "wall_steps"] {
        assert!(stats.get(key).is_some(), "{key}");
    }
}

#[test]
fn oracle_check_examples() {
    assert_eq!(code(&["oracle-check", &data("hypothesis.pkb")]), 0);
    assert_eq!(cmd_oracle_check(Path::new(&data("hypothesis.pkb")), 16, None).unwrap(), EXIT_OK);

    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for seed in 0..100 {
        let k = random_poss_kb(&mut rng, Shape { variables: 5, clauses: 6, max_antecedent: 2 }, 2);
        let path = dir.path().join(format!("k{seed}.pkb"));
        std::fs::write(&path, k.to_string()).unwrap();
        assert_eq!(cmd_oracle_check(&path, 16, Some(2)).unwrap(), EXIT_OK, "{k}");
    }
}

#[test]
fn oracle_check_catches_corrupted_val() {
    let corrupted = |k: &posslearn::PossKB, f: &posslearn::HornClause| {
        k.val_of(f).map(|v| if v.is_one() { v } else { v.step_up(v.prec()).unwrap_or(Valuation::ONE) })
    };
    let code = cmd_oracle_check_with(Path::new(&data("hypothesis.pkb")), 16, None, &corrupted).unwrap();
    assert_eq!(code, EXIT_BUG);
}
