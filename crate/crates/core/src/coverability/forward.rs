//! Breadth-first exploration of a fixed thread count.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::counter::CounterState;
use super::trace::{Trace, Verdict};
use crate::drcore::{step, step_active, DrProgram, LocalState, MoveIndex};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ForwardResult {
    pub verdict: Verdict,
    pub states: usize,
    /// Largest BFS depth expanded.
    pub depth: usize,
    /// Whether the whole reachable state space was explored.
    pub exhausted: bool,
}

fn sorted(mut v: Vec<LocalState>) -> Vec<LocalState> {
    v.sort_unstable();
    v
}

fn multisets(xs: &[LocalState], size: usize) -> Vec<Vec<LocalState>> {
    let mut out = vec![vec![]];
    for _ in 0..size {
        let mut next = Vec::new();
        for v in &out {
            let start = v.last().map_or(0, |l| xs.iter().position(|x| x == l).unwrap());
            for x in &xs[start..] {
                let mut w: Vec<LocalState> = v.clone();
                w.push(*x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Initial n-thread states up to thread order.
fn initial_states(idx: &MoveIndex, n: usize) -> BTreeSet<Vec<LocalState>> {
    let mut out = BTreeSet::new();
    for (a, partners) in &idx.init {
        let partners: Vec<LocalState> = partners.iter().copied().collect();
        for mut rest in multisets(&partners, n - 1) {
            rest.push(*a);
            out.insert(sorted(rest));
        }
    }
    out
}

/// Explore the n-thread instance breadth first (states up to thread
/// order), stopping at the first state covering a target, at `depth` or
/// when the reachable space is exhausted.
pub fn forward_explore(d: &DrProgram, n: usize, targets: &[CounterState], depth: Option<usize>) -> Result<ForwardResult> {
    if n < 2 {
        return Err(Error::Invalid("forward exploration needs at least two threads".into()));
    }
    d.validate()?;
    let idx = MoveIndex::new(d);
    let hits = |v: &[LocalState]| -> Result<bool> {
        let c = CounterState::from_states(d, v)?;
        Ok(targets.iter().any(|t| t.leq(&c)))
    };
    let mut parent: BTreeMap<Vec<LocalState>, Option<(Vec<LocalState>, usize)>> = BTreeMap::new();
    let mut queue: VecDeque<(Vec<LocalState>, usize)> = VecDeque::new();
    let mut goal = None;
    for v in initial_states(&idx, n) {
        parent.insert(v.clone(), None);
        if goal.is_none() && hits(&v)? {
            goal = Some(v.clone());
        }
        queue.push_back((v, 0));
    }
    let mut max_depth = 0;
    let mut cut = false;
    'bfs: while goal.is_none() {
        let Some((v, k)) = queue.pop_front() else { break };
        if depth.is_some_and(|d| k >= d) {
            cut = true;
            continue;
        }
        max_depth = max_depth.max(k + 1);
        for a in 0..n {
            for w in step_active(&idx, &v, a) {
                let w = sorted(w);
                if parent.contains_key(&w) {
                    continue;
                }
                parent.insert(w.clone(), Some((v.clone(), a)));
                if hits(&w)? {
                    goal = Some(w);
                    break 'bfs;
                }
                queue.push_back((w, k + 1));
            }
        }
    }
    let states = parent.len();
    let Some(goal) = goal else {
        return Ok(ForwardResult { verdict: Verdict::Uncoverable, states, depth: max_depth, exhausted: !cut });
    };
    let mut states_rev = vec![goal.clone()];
    let mut active_rev = vec![];
    let mut cur = goal;
    while let Some(Some((p, a))) = parent.get(&cur) {
        states_rev.push(p.clone());
        active_rev.push(*a);
        cur = p.clone();
    }
    states_rev.reverse();
    active_rev.reverse();
    let depth = active_rev.len();
    Ok(ForwardResult {
        verdict: Verdict::Coverable(Trace { states: states_rev, active: active_rev }),
        states,
        depth,
        exhausted: false,
    })
}

/// Reachable n-thread states (up to thread order) with their BFS depth,
/// limited to `depth` steps when given.
pub fn reachable_states(d: &DrProgram, n: usize, depth: Option<usize>) -> Result<BTreeMap<Vec<LocalState>, usize>> {
    if n < 2 {
        return Err(Error::Invalid("exploration needs at least two threads".into()));
    }
    let idx = MoveIndex::new(d);
    let mut seen: BTreeMap<Vec<LocalState>, usize> = initial_states(&idx, n).into_iter().map(|v| (v, 0)).collect();
    let mut queue: VecDeque<(Vec<LocalState>, usize)> = seen.iter().map(|(v, k)| (v.clone(), *k)).collect();
    while let Some((v, k)) = queue.pop_front() {
        if depth.is_some_and(|d| k >= d) {
            continue;
        }
        for w in step(&idx, &v) {
            let w = sorted(w);
            if !seen.contains_key(&w) {
                seen.insert(w.clone(), k + 1);
                queue.push_back((w, k + 1));
            }
        }
    }
    Ok(seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drcore::Quad;

    #[test]
    fn initial_target_at_depth_zero() {
        let mut d = DrProgram::new(vec!["a".into()], vec![]);
        let a = LocalState::new(0, 0);
        d.init.insert((a, a));
        d.trans.insert(Quad::new(a, a, a, a));
        let t = CounterState::from_states(&d, &[a]).unwrap();
        let r = forward_explore(&d, 2, std::slice::from_ref(&t), Some(0)).unwrap();
        let trace = r.verdict.trace().unwrap();
        assert!(trace.is_empty());
        assert!(trace.replays(&d, &[t]));
    }

    #[test]
    fn safe_program_at_depth_zero() {
        let mut d = DrProgram::new(vec!["a".into(), "b".into()], vec![]);
        let (a, b) = (LocalState::new(0, 0), LocalState::new(1, 0));
        d.init.insert((a, a));
        d.trans.insert(Quad::new(a, a, b, a));
        let t = CounterState::from_states(&d, &[b, b]).unwrap();
        let r = forward_explore(&d, 2, std::slice::from_ref(&t), Some(0)).unwrap();
        assert_eq!(r.verdict, Verdict::Uncoverable);
        assert!(!r.exhausted);
        let r = forward_explore(&d, 2, &[t], None).unwrap();
        assert_eq!(r.verdict, Verdict::Uncoverable);
        assert!(r.exhausted);
        assert_eq!(r.states, 2);
    }
}
