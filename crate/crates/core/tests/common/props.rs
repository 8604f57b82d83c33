//! Property checks shared by the suites and the acceptance run.

use std::collections::{BTreeMap, BTreeSet};

use drcheck::abstraction::{alpha, build_template, exabs_transitions, template_step, BitMatrix};
use drcheck::coverability::{covers, error_target, forward_explore, pred_basis, reachable_states, CounterState, PredIndex};
use drcheck::drcore::{
    all_tuples, check_monotone_sufficient, concrete_initial_states, concrete_states, concrete_successors,
    find_monotonicity_violation, is_initial, monotone_closure, nmf, step, ConcreteState, DrProgram, LocalState, MoveIndex,
};
use drcheck::frontend::{parse_predicates, parse_program, AsyncProgram, Predicate};
use drcheck::logic::{Solver, SolverBackend, Value};
use drcheck::minsky::{decode_config, encode_minsky, simulate_minsky, Config, CounterMachine};
use proptest::prelude::*;

use super::gen::Case;

pub const CONCRETE_BOUND: i64 = 2;

fn abs(s: &ConcreteState, p: &AsyncProgram, preds: &[Predicate]) -> (BitMatrix, Vec<LocalState>) {
    let n = s.locals.len();
    let m = alpha(&s.to_model(p), p, preds, n as u32).unwrap();
    let v = (0..n)
        .map(|t| {
            let Value::Loc(l) = &s.locals[t][0] else { panic!("pc is not a location") };
            let pc = p.sig.location_index(l).unwrap() as u16;
            let bits = (0..preds.len()).fold(0, |acc, c| acc | (m[c][t] as u32) << c);
            LocalState::new(pc, bits)
        })
        .collect();
    (m, v)
}

/// Every concrete n-thread step within the bound is in the existential
/// abstraction and admitted by the n-thread template; returns the template.
pub fn overapproximates(case: &Case, n: usize) -> Result<DrProgram, TestCaseError> {
    let b = CONCRETE_BOUND;
    let p = parse_program(&case.program).unwrap();
    let preds = parse_predicates(&case.predicates, &p.sig).unwrap();
    let solver = Solver::new(SolverBackend::enumerate(b)).unwrap();
    let t = template_step(&p, &preds, n as u32, &solver).unwrap();
    let mut d = DrProgram::new(p.sig.locations.clone(), preds.iter().map(|q| q.formula.to_string()).collect());
    d.trans = t.trans;
    d.init = t.init;
    let idx = MoveIndex::new(&d);
    let exact: BTreeSet<(BitMatrix, BitMatrix)> =
        (1..=n as u32).flat_map(|a| exabs_transitions(&p, &preds, n as u32, a, &solver).unwrap().into_keys()).collect();
    for s in concrete_states(&p, n, b) {
        let (ms, vs) = abs(&s, &p, &preds);
        let succ = step(&idx, &vs);
        for t in concrete_successors(&p, &s, b).unwrap() {
            let (mt, vt) = abs(&t, &p, &preds);
            prop_assert!(exact.contains(&(ms.clone(), mt)), "not in the existential abstraction: {s:?} -> {t:?}");
            prop_assert!(succ.contains(&vt), "template misses {vs:?} -> {vt:?}");
        }
    }
    for s in concrete_initial_states(&p, n, b).unwrap() {
        let (_, v) = abs(&s, &p, &preds);
        prop_assert!(is_initial(&idx, &v), "template misses initial {v:?}");
    }
    Ok(d)
}

/// The closure keeps every move, is monotone by the local check and up to
/// `max_k` threads by brute force, and changes nothing on monotone input.
pub fn closure_properties(d: &DrProgram, max_k: usize) -> Result<(), TestCaseError> {
    let m = monotone_closure(d).unwrap();
    prop_assert!(d.trans.is_subset(&m.trans));
    prop_assert!(check_monotone_sufficient(&m).is_monotone());
    prop_assert!(nmf(&m).is_empty());
    prop_assert_eq!(m.init.clone(), d.init.clone());
    prop_assert!(find_monotonicity_violation(&m, max_k, None).is_none());
    if check_monotone_sufficient(d).is_monotone() {
        prop_assert_eq!(&m.trans, &d.trans);
        prop_assert!(find_monotonicity_violation(d, max_k, None).is_none());
    }
    Ok(())
}

pub fn family_reaches_error(d: &DrProgram) -> bool {
    let target = error_target(d);
    (2..=4).any(|n| forward_explore(d, n, &target, None).unwrap().verdict.is_coverable())
}

/// Template of a Boolean case.
pub fn abstraction(case: &Case) -> DrProgram {
    let p = parse_program(&case.program).unwrap();
    let preds = parse_predicates(&case.predicates, &p.sig).unwrap();
    let solver = Solver::new(SolverBackend::enumerate(1)).unwrap();
    build_template(&p, &preds, 0, &solver).unwrap().0
}

/// Error reachability for n <= 4 on the template and on its closure.
pub fn verdicts(d: &DrProgram) -> (bool, bool) {
    (family_reaches_error(d), family_reaches_error(&monotone_closure(d).unwrap()))
}

/// The closure of a template is monotone and never loses an error.
pub fn closure_is_sound(case: &Case) -> Result<(), TestCaseError> {
    let d = abstraction(case);
    prop_assert!(d.width() <= 2 && d.locations.len() - 1 <= 3);
    prop_assert!(!d.error.is_empty());
    closure_properties(&d, 3)?;
    let (a, b) = verdicts(&d);
    prop_assert!(!a || b, "{}\n{}", case.program, case.predicates);
    Ok(())
}

fn multisets(alphabet: &[LocalState], n: usize) -> Vec<Vec<LocalState>> {
    let set: BTreeSet<Vec<LocalState>> = all_tuples(alphabet, n)
        .into_iter()
        .map(|mut v| {
            v.sort();
            v
        })
        .collect();
    set.into_iter().collect()
}

pub fn counter(d: &DrProgram, v: &[LocalState]) -> CounterState {
    CounterState::from_states(d, v).unwrap()
}

/// A state with at most four threads covers an element of the predecessor
/// basis iff one of its successors covers the target.
pub fn pred_basis_is_exact(d: &DrProgram, m: &[usize]) -> Result<(), TestCaseError> {
    let d = monotone_closure(d).unwrap();
    let alphabet = d.live_states();
    let target: Vec<LocalState> = m.iter().map(|&i| alphabet[i % alphabet.len()]).collect();
    let target = counter(&d, &target);
    let basis = pred_basis(&PredIndex::new(&d), &target);
    let idx = MoveIndex::new(&d);
    for n in 2..=4 {
        for v in multisets(&alphabet, n) {
            let c = counter(&d, &v);
            let oracle = step(&idx, &v).iter().any(|w| covers(&target, &counter(&d, w)).unwrap());
            let got = basis.iter().any(|b| covers(b, &c).unwrap());
            prop_assert_eq!(oracle, got, "{:?}", v);
        }
    }
    Ok(())
}

pub fn peak(run: &[Config]) -> usize {
    run.iter().map(|(_, a, b)| (a + b) as usize).max().unwrap()
}

/// Decoded configurations of the encoding with the first depth they are
/// reached at.
pub fn decoded(m: &CounterMachine, n: usize, depth: usize) -> BTreeMap<Config, usize> {
    let d = encode_minsky(m).unwrap();
    let mut out: BTreeMap<Config, usize> = BTreeMap::new();
    for (v, k) in reachable_states(&d, n, Some(depth)).unwrap() {
        let c = decode_config(&v).unwrap_or_else(|| panic!("threads disagree: {v:?}"));
        let e = out.entry(c).or_insert(k);
        *e = (*e).min(k);
    }
    out
}

pub fn first_index(run: &[Config]) -> BTreeMap<Config, usize> {
    let mut out = BTreeMap::new();
    for (i, c) in run.iter().enumerate() {
        out.entry(*c).or_insert(i);
    }
    out
}

/// With enough threads, the encoding reaches exactly the configurations of
/// the first `steps` machine steps, each at the same depth.
pub fn encoding_agrees(m: &CounterMachine, steps: usize) -> bool {
    let run = simulate_minsky(m, steps);
    let n = (peak(&run) + 1).max(2);
    decoded(m, n, steps) == first_index(&run)
}
