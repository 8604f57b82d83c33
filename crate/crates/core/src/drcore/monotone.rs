//! Monotonicity checks, the non-monotone fragment and the monotone closure.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::program::{DrProgram, LocalState, Quad};
use super::semantics::{is_initial, step, MoveIndex};
use crate::error::{Error, Result};

/// `(a, q, a')`: active move `a -> a'` that a passive thread in `q` blocks.
pub type NmfSet = BTreeSet<(LocalState, LocalState, LocalState)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Monotone,
    Violation { active: LocalState, active_next: LocalState, passive: LocalState },
}

impl Monotonicity {
    pub fn is_monotone(&self) -> bool {
        matches!(self, Monotonicity::Monotone)
    }
}

/// Partial moves that no passive successor completes although some other
/// passive state does.
pub fn nmf(d: &DrProgram) -> NmfSet {
    fragment(d, &d.live_states())
}

fn fragment(d: &DrProgram, states: &[LocalState]) -> NmfSet {
    let mut out = NmfSet::new();
    for ((a, a2), pairs) in d.by_active_pair() {
        let sources: BTreeSet<LocalState> = pairs.iter().map(|(p, _)| *p).collect();
        for q in states {
            if !sources.contains(q) {
                out.insert((a, *q, a2));
            }
        }
    }
    out
}

/// Local sufficient condition: every enabled active move can be completed
/// by every passive state.
pub fn check_monotone_sufficient(d: &DrProgram) -> Monotonicity {
    let states = d.live_states();
    for ((a, a2), pairs) in d.by_active_pair() {
        let sources: BTreeSet<LocalState> = pairs.iter().map(|(p, _)| *p).collect();
        if let Some(q) = states.iter().find(|q| !sources.contains(q)) {
            return Monotonicity::Violation { active: a, active_next: a2, passive: *q };
        }
    }
    Monotonicity::Monotone
}

/// Blocked passive threads are sent to the sink (with arbitrary bits).
/// Once the sink is in use, threads there are blocking passives as well.
pub fn monotone_closure(d: &DrProgram) -> Result<DrProgram> {
    d.validate()?;
    let size = nmf(d).len();
    let mut m = d.clone();
    let added = if size == 0 { NmfSet::new() } else { fragment(d, &d.states()) };
    for (a, q, a2) in &added {
        for &bits in &d.codes {
            m.trans.insert(Quad::new(*a, *q, *a2, LocalState { pc: d.sink, bits }));
        }
    }
    m.provenance.closure = true;
    m.provenance.nmf_size = Some(size);
    Ok(m)
}

/// `v -> v'` in `R^k` and a thread state `l` such that no extension of
/// `v'` by one thread is a successor of `v` extended by `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityWitness {
    pub before: Vec<LocalState>,
    pub after: Vec<LocalState>,
    pub extension: LocalState,
}

fn sorted(v: &[LocalState]) -> Vec<LocalState> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Is the sorted multiset `small` contained in `big`?
fn sub_multiset(small: &[LocalState], big: &[LocalState]) -> bool {
    let mut j = 0;
    for x in small {
        while j < big.len() && big[j] < *x {
            j += 1;
        }
        if j == big.len() || big[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

fn multisets(alphabet: &[LocalState], k: usize) -> Vec<Vec<LocalState>> {
    fn go(alpha: &[LocalState], start: usize, k: usize, cur: &mut Vec<LocalState>, out: &mut Vec<Vec<LocalState>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..alpha.len() {
            cur.push(alpha[i]);
            go(alpha, i, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(alphabet, 0, k, &mut Vec::new(), &mut out);
    out
}

/// k-thread states reachable from initial states in at most `depth` steps.
fn reachable(idx: &MoveIndex, alphabet: &[LocalState], k: usize, depth: usize) -> Vec<Vec<LocalState>> {
    let mut seen: BTreeSet<Vec<LocalState>> = multisets(alphabet, k).into_iter().filter(|v| is_initial(idx, v)).collect();
    let mut queue: VecDeque<(Vec<LocalState>, usize)> = seen.iter().map(|v| (v.clone(), 0)).collect();
    while let Some((v, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        for w in step(idx, &v) {
            let w = sorted(&w);
            if seen.insert(w.clone()) {
                queue.push_back((w, d + 1));
            }
        }
    }
    seen.into_iter().collect()
}

/// Brute-force search for a violation of monotonicity with up to `max_k`
/// threads. With `depth`, only states reachable within that many steps
/// are considered as sources.
pub fn find_monotonicity_violation(d: &DrProgram, max_k: usize, depth: Option<usize>) -> Option<MonotonicityWitness> {
    assert!(max_k >= 2);
    let idx = MoveIndex::new(d);
    let alphabet = d.live_states();
    for k in 2..=max_k {
        let sources = match depth {
            Some(depth) => reachable(&idx, &alphabet, k, depth),
            None => multisets(&alphabet, k),
        };
        for v in sources {
            let succ = step(&idx, &v);
            if succ.is_empty() {
                continue;
            }
            let mut ext_cache: BTreeMap<LocalState, Vec<Vec<LocalState>>> = BTreeMap::new();
            for v2 in &succ {
                let v2s = sorted(v2);
                for &l in &alphabet {
                    let big = ext_cache.entry(l).or_insert_with(|| {
                        let mut w = v.clone();
                        w.push(l);
                        step(&idx, &w).into_iter().map(|x| sorted(&x)).collect()
                    });
                    if !big.iter().any(|w| sub_multiset(&v2s, w)) {
                        return Some(MonotonicityWitness { before: v.clone(), after: v2.clone(), extension: l });
                    }
                }
            }
        }
    }
    None
}

/// Refuse non-monotone programs with a diagnostic naming the blocked move.
pub fn require_monotone(d: &DrProgram) -> Result<()> {
    match check_monotone_sufficient(d) {
        Monotonicity::Monotone => Ok(()),
        Monotonicity::Violation { active, active_next, passive } => Err(Error::NotMonotone(format!(
            "move {} -> {} cannot be completed by a passive thread in {}; apply the monotone closure first",
            d.fmt_state(active),
            d.fmt_state(active_next),
            d.fmt_state(passive)
        ))),
    }
}
