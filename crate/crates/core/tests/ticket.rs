mod common;

use std::sync::OnceLock;

use drcheck::abstraction::build_template;
use drcheck::coverability::{backward_reach, expand_target, forward_explore, Query, Verdict};
use drcheck::drcore::{check_monotone_sufficient, monotone_closure, DrProgram};

fn template() -> Option<&'static DrProgram> {
    static T: OnceLock<Option<DrProgram>> = OnceLock::new();
    T.get_or_init(|| {
        let solver = common::smt()?;
        let (p, preds) = common::load("programs/ticket.prog", "predicates/ticket.pred");
        Some(build_template(&p, &preds, 0, &solver).unwrap().0)
    })
    .as_ref()
}

fn mutex_query(d: &DrProgram) -> Vec<drcheck::coverability::CounterState> {
    let q = Query::from_json_str(&common::read("queries/ticket_mutex.json")).unwrap();
    expand_target(d, &q.target).unwrap()
}

#[test]
fn fixed_thread_counts_are_safe() {
    let Some(d) = template() else { return };
    let target = mutex_query(d);
    for n in [2, 3] {
        let r = forward_explore(d, n, &target, None).unwrap();
        assert_eq!(r.verdict, Verdict::Uncoverable);
        assert!(r.exhausted);
    }
}

#[test]
fn closure_is_safe_for_all_thread_counts() {
    let Some(d) = template() else { return };
    let m = monotone_closure(d).unwrap();
    assert!(check_monotone_sufficient(&m).is_monotone());
    let target = mutex_query(&m);
    let r = backward_reach(&m, &target).unwrap();
    assert_eq!(r.verdict, Verdict::Uncoverable);
}
