mod common;

use drcheck::logic::{Solver, SolverBackend};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

const B: i64 = 5;

#[test]
fn enumerator_agrees_with_smt() {
    let Some(smt) = common::bounded_smt(B) else { return };
    let bounded = Solver::new(SolverBackend::enumerate(B)).unwrap();
    let mut runner = TestRunner::deterministic();
    let strategy = common::gen::query();
    let mut counts = [0usize; 3];
    for _ in 0..600 {
        let f = strategy.new_tree(&mut runner).unwrap().current();
        let r = common::backends_agree(&smt, &bounded, &f).unwrap_or_else(|e| panic!("{e}"));
        counts[match r {
            Some(true) => 0,
            Some(false) => 1,
            None => 2,
        }] += 1;
    }
    eprintln!("sat {} unsat {} unknown {}", counts[0], counts[1], counts[2]);
    assert!(counts[0] + counts[1] >= 500);
    assert!(counts[0] > 50 && counts[1] > 50);
}
