//! Backward reachability over minimal bases of upward-closed sets.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use super::counter::{minimize, CounterState};
use super::trace::{Trace, Verdict};
use crate::drcore::{require_monotone, DrProgram, LocalState, MoveIndex};
use crate::error::Result;

/// For every active move `a -> a'` (as alphabet indices), the passive
/// sources of each passive target.
pub struct PredIndex {
    pairs: Vec<(usize, usize, Vec<Vec<usize>>)>,
    init: BTreeMap<usize, Vec<bool>>,
    k: usize,
}

impl PredIndex {
    pub fn new(d: &DrProgram) -> Self {
        let k = d.alphabet_size();
        let mut pairs = Vec::new();
        for ((a, a2), moves) in d.by_active_pair() {
            let mut sources = vec![Vec::new(); k];
            for (p, p2) in moves {
                let (Some(pi), Some(p2i)) = (d.index_of(p), d.index_of(p2)) else { continue };
                sources[p2i].push(pi);
            }
            for s in &mut sources {
                s.sort_unstable();
                s.dedup();
            }
            if let (Some(ai), Some(a2i)) = (d.index_of(a), d.index_of(a2)) {
                pairs.push((ai, a2i, sources));
            }
        }
        let mut init: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
        for (a, p) in &d.init {
            if let (Some(ai), Some(pi)) = (d.index_of(*a), d.index_of(*p)) {
                init.entry(ai).or_insert_with(|| vec![false; k])[pi] = true;
            }
        }
        PredIndex { pairs, init, k }
    }
}

/// How a predecessor reaches its successor: the active move and, for each
/// passive thread that matters, its move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepInfo {
    pub active: usize,
    pub active_next: usize,
    pub passive: Vec<(usize, usize)>,
}

fn multisets(xs: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn go(xs: &[usize], start: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..xs.len() {
            cur.push(xs[i]);
            go(xs, i, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(xs, 0, size, &mut Vec::new(), &mut out);
    out
}

fn pred_with_steps(idx: &PredIndex, m: &CounterState) -> Vec<(CounterState, StepInfo)> {
    let mut out = Vec::new();
    for (a, a2, sources) in &idx.pairs {
        for use_active in [true, false] {
            let mut rest = m.clone();
            if use_active {
                if rest.0[*a2] == 0 {
                    continue;
                }
                rest.0[*a2] -= 1;
            }
            // per target element: the multisets of sources producing its copies
            let mut options: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
            let mut dead = false;
            for (x, &c) in rest.0.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                if sources[x].is_empty() {
                    dead = true;
                    break;
                }
                options.push((x, multisets(&sources[x], c as usize)));
            }
            if dead {
                continue;
            }
            let mut partial: Vec<(CounterState, Vec<(usize, usize)>)> = vec![{
                let mut base = CounterState::zero(idx.k);
                base.0[*a] += 1;
                (base, Vec::new())
            }];
            for (x, choices) in &options {
                let mut next = Vec::with_capacity(partial.len() * choices.len());
                for (state, moves) in &partial {
                    for choice in choices {
                        let mut s = state.clone();
                        let mut mv = moves.clone();
                        for &src in choice {
                            s.0[src] += 1;
                            mv.push((src, *x));
                        }
                        next.push((s, mv));
                    }
                }
                partial = next;
            }
            for (s, passive) in partial {
                out.push((s, StepInfo { active: *a, active_next: *a2, passive }));
            }
        }
    }
    out.sort_by(|x, y| (x.0.total(), &x.0 .0).cmp(&(y.0.total(), &y.0 .0)));
    let mut kept: Vec<(CounterState, StepInfo)> = Vec::new();
    for (s, st) in out {
        if !kept.iter().any(|(k, _)| k.leq(&s)) {
            kept.push((s, st));
        }
    }
    kept
}

/// Minimal basis of the states with a successor covering `m`, for a
/// program satisfying the local monotonicity condition.
pub fn pred_basis(idx: &PredIndex, m: &CounterState) -> Vec<CounterState> {
    minimize(pred_with_steps(idx, m).into_iter().map(|(s, _)| s).collect())
}

/// An initial state of some thread count (at least two) covering `m`, if
/// any: an active initial state `a` whose passive partners include every
/// other element of `m`.
pub fn initial_intersect(d: &DrProgram, idx: &PredIndex, m: &CounterState) -> Option<Vec<LocalState>> {
    for (&a, partners) in &idx.init {
        let ok = m.0.iter().enumerate().all(|(i, &c)| {
            let need = if i == a { c.saturating_sub(1) } else { c };
            need == 0 || partners[i]
        });
        if !ok {
            continue;
        }
        let mut v = vec![d.state_at(a)];
        let mut rest = m.clone();
        if rest.0[a] > 0 {
            rest.0[a] -= 1;
        }
        v.extend(rest.to_states(d));
        if v.len() < 2 {
            let p = partners.iter().position(|&b| b).unwrap();
            v.push(d.state_at(p));
        }
        return Some(v);
    }
    None
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BackwardStats {
    pub iterations: usize,
    pub generated: usize,
    pub final_basis: usize,
    pub max_basis: usize,
    /// Work-set size before each iteration.
    pub work_sizes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BackwardResult {
    pub verdict: Verdict,
    pub stats: BackwardStats,
    /// Minimal basis of the backward-reachable states at the fixpoint
    /// (empty when a witness is found).
    pub basis: Vec<CounterState>,
}

struct Node {
    state: CounterState,
    parent: Option<usize>,
    step: Option<StepInfo>,
    alive: bool,
}

/// Replay one backward step forward from a concrete tuple covering the
/// predecessor.
fn replay_step(d: &DrProgram, moves: &MoveIndex, v: &[LocalState], st: &StepInfo) -> (Vec<LocalState>, usize) {
    let (a, a2) = (d.state_at(st.active), d.state_at(st.active_next));
    let i = v.iter().position(|s| *s == a).expect("predecessor covers the active state");
    let mut next = v.to_vec();
    let mut used = vec![false; v.len()];
    used[i] = true;
    next[i] = a2;
    for &(p, p2) in &st.passive {
        let (p, p2) = (d.state_at(p), d.state_at(p2));
        let j = (0..v.len()).find(|&j| !used[j] && v[j] == p).expect("predecessor covers the passive sources");
        used[j] = true;
        next[j] = p2;
    }
    let options = moves.moves[&a].iter().find(|(x, _)| *x == a2).map(|(_, m)| m).expect("active move exists");
    for j in 0..v.len() {
        if !used[j] {
            // some completion exists for every passive state by monotonicity
            next[j] = options[&v[j]][0];
        }
    }
    (next, i)
}

/// Backward saturation from `targets`. Refuses programs that violate the
/// local monotonicity condition.
pub fn backward_reach(d: &DrProgram, targets: &[CounterState]) -> Result<BackwardResult> {
    d.validate()?;
    require_monotone(d)?;
    let idx = PredIndex::new(d);
    let mut arena: Vec<Node> = Vec::new();
    let mut heap: BinaryHeap<Reverse<(u32, Vec<u32>, usize)>> = BinaryHeap::new();
    let mut stats = BackwardStats::default();
    let mut basis_size = 0usize;

    let mut found: Option<(usize, Vec<LocalState>)> = None;
    let insert = |arena: &mut Vec<Node>,
                  heap: &mut BinaryHeap<Reverse<(u32, Vec<u32>, usize)>>,
                  basis_size: &mut usize,
                  state: CounterState,
                  parent: Option<usize>,
                  step: Option<StepInfo>|
     -> Option<(usize, Vec<LocalState>)> {
        if arena.iter().any(|n| n.alive && n.state.leq(&state)) {
            return None;
        }
        for n in arena.iter_mut().filter(|n| n.alive && state.leq(&n.state)) {
            n.alive = false;
            *basis_size -= 1;
        }
        let id = arena.len();
        heap.push(Reverse((state.total(), state.0.clone(), id)));
        let init = initial_intersect(d, &idx, &state);
        arena.push(Node { state, parent, step, alive: true });
        *basis_size += 1;
        init.map(|w| (id, w))
    };

    for t in minimize(targets.to_vec()) {
        stats.generated += 1;
        if let Some(hit) = insert(&mut arena, &mut heap, &mut basis_size, t, None, None) {
            found = Some(hit);
            break;
        }
    }
    stats.max_basis = basis_size;
    while found.is_none() {
        let Some(Reverse((_, _, id))) = heap.pop() else { break };
        if !arena[id].alive {
            continue;
        }
        stats.iterations += 1;
        stats.work_sizes.push(heap.len() + 1);
        let preds = pred_with_steps(&idx, &arena[id].state);
        for (p, st) in preds {
            stats.generated += 1;
            if let Some(hit) = insert(&mut arena, &mut heap, &mut basis_size, p, Some(id), Some(st)) {
                found = Some(hit);
                break;
            }
        }
        stats.max_basis = stats.max_basis.max(basis_size);
    }
    stats.final_basis = basis_size;

    let Some((mut id, start)) = found else {
        let basis = minimize(arena.into_iter().filter(|n| n.alive).map(|n| n.state).collect());
        return Ok(BackwardResult { verdict: Verdict::Uncoverable, stats, basis });
    };
    let moves = MoveIndex::new(d);
    let mut trace = Trace { states: vec![start], active: vec![] };
    while let (Some(parent), Some(st)) = (arena[id].parent, arena[id].step.as_ref()) {
        let (next, a) = replay_step(d, &moves, trace.states.last().unwrap(), st);
        trace.states.push(next);
        trace.active.push(a);
        id = parent;
    }
    Ok(BackwardResult { verdict: Verdict::Coverable(trace), stats, basis: vec![] })
}
