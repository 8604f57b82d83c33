mod common;

use drcheck::drcore::{
    check_monotone_sufficient, check_monotone_symbolic, compile_explicit, monotone_closure, monotone_violation_formula, nmf,
    SymbolicMonotonicity,
};
use drcheck::frontend::{parse_program, AsyncProgram};
use drcheck::logic::{eval_formula, CmpOp, Expr, SatResult, Solver, SolverBackend, Var};

const ROWS: [(&str, bool); 5] =
    [("swap", false), ("transfer", true), ("passive_add", true), ("active_add", false), ("broadcast", true)];

fn row(name: &str) -> AsyncProgram {
    parse_program(&common::read(&format!("programs/monotonicity/{name}.prog"))).unwrap()
}

fn solvers() -> Vec<Solver> {
    let mut v: Vec<Solver> = common::smt().into_iter().collect();
    v.push(Solver::new(SolverBackend::enumerate(5)).unwrap());
    v
}

/// Active pre/post values `l == pre && l' == post`.
fn active(p: &AsyncProgram, pre: i64, post: i64) -> Expr {
    let lit = |x: i64| match p.sig.sort_of("l") {
        Some(drcheck::logic::Sort::Bool) => Expr::Bool(x != 0),
        _ => Expr::Int(x),
    };
    let l = Var::base("l");
    Expr::and([Expr::cmp(CmpOp::Eq, Expr::var(l.clone()), lit(pre)), Expr::cmp(CmpOp::Eq, Expr::var(l.primed()), lit(post))])
}

#[test]
fn monotonicity_column() {
    for solver in solvers() {
        for (name, monotone) in ROWS {
            let p = row(name);
            let got = check_monotone_symbolic(&p, &solver, true).unwrap();
            match got {
                SymbolicMonotonicity::Monotone => assert!(monotone, "{name}"),
                SymbolicMonotonicity::Violation(m) => {
                    assert!(!monotone, "{name}: {m:?}");
                    assert!(eval_formula(&monotone_violation_formula(&p, true).unwrap(), &m).unwrap());
                }
                SymbolicMonotonicity::Unknown => panic!("{name}: unknown"),
            }
        }
    }
}

#[test]
fn witness_column() {
    for solver in solvers() {
        for (name, pre, post) in [("swap", 0, 1), ("active_add", 1, 1)] {
            let p = row(name);
            let f = Expr::and([monotone_violation_formula(&p, true).unwrap(), active(&p, pre, post)]);
            let SatResult::Sat(m) = solver.check_sat(&f, &p.sig).unwrap() else { panic!("{name}") };
            assert!(eval_formula(&f, &m).unwrap());
        }
        // a move that leaves l unchanged needs l@P == 0, so l > l' never violates
        let p = row("active_add");
        let f = Expr::and([
            monotone_violation_formula(&p, true).unwrap(),
            Expr::cmp(CmpOp::Gt, Expr::var(Var::base("l")), Expr::var(Var::base("l").primed())),
        ]);
        assert_eq!(solver.check_sat(&f, &p.sig).unwrap(), SatResult::Unsat);
    }
}

#[test]
fn naturals_matter_for_transfer_only_through_pre_states() {
    // over the integers, `l := l + l@P` stays non-monotone and the broadcast
    // stays monotone
    let solver = Solver::new(SolverBackend::enumerate(4)).unwrap();
    assert!(matches!(check_monotone_symbolic(&row("active_add"), &solver, false).unwrap(), SymbolicMonotonicity::Violation(_)));
    assert_eq!(check_monotone_symbolic(&row("broadcast"), &solver, false).unwrap(), SymbolicMonotonicity::Monotone);
}

#[test]
fn explicit_rows_agree_with_symbolic() {
    let swap = compile_explicit(&row("swap"), 1).unwrap();
    assert!(!check_monotone_sufficient(&swap).is_monotone());
    // NMF of the swap is l' != l@P, plus every passive in the sink
    let n: Vec<_> = nmf(&swap).into_iter().filter(|(_, q, _)| q.pc != swap.sink).collect();
    assert_eq!(n.len(), 4);
    for (_, q, a2) in n {
        assert_ne!(a2.bits, q.bits);
    }
    assert!(check_monotone_sufficient(&monotone_closure(&swap).unwrap()).is_monotone());

    let add = compile_explicit(&row("active_add"), 2).unwrap();
    assert!(!check_monotone_sufficient(&add).is_monotone());
    // (l, l@P, l') with l' >= l and l' != l + l@P, restricted to [0, 2]
    for (a, q, a2) in nmf(&add).into_iter().filter(|(_, q, _)| q.pc != add.sink) {
        let (l, lp, l2) = (a.bits as i64, q.bits as i64, a2.bits as i64);
        assert!(l2 >= l && l2 != l + lp, "{l} {lp} {l2}");
    }
    assert!(check_monotone_sufficient(&monotone_closure(&add).unwrap()).is_monotone());
}
