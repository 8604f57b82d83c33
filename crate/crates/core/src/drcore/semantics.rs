//! n-thread semantics of DR programs.

use std::collections::{BTreeMap, BTreeSet};

use super::program::{DrProgram, LocalState};

/// Moves of a DR program keyed by active source.
#[derive(Clone, Debug, Default)]
pub struct MoveIndex {
    /// a -> [(a', p -> [p'])]
    pub moves: BTreeMap<LocalState, Vec<(LocalState, BTreeMap<LocalState, Vec<LocalState>>)>>,
    /// a -> passive states allowed next to an initial active `a`
    pub init: BTreeMap<LocalState, BTreeSet<LocalState>>,
}

impl MoveIndex {
    pub fn new(d: &DrProgram) -> Self {
        let mut moves: BTreeMap<LocalState, BTreeMap<LocalState, BTreeMap<LocalState, Vec<LocalState>>>> = BTreeMap::new();
        for q in &d.trans {
            moves
                .entry(q.active)
                .or_default()
                .entry(q.active_next)
                .or_default()
                .entry(q.passive)
                .or_default()
                .push(q.passive_next);
        }
        let mut init: BTreeMap<LocalState, BTreeSet<LocalState>> = BTreeMap::new();
        for (a, p) in &d.init {
            init.entry(*a).or_default().insert(*p);
        }
        MoveIndex { moves: moves.into_iter().map(|(a, m)| (a, m.into_iter().collect())).collect(), init }
    }
}

fn product(options: &[&Vec<LocalState>]) -> Vec<Vec<LocalState>> {
    let mut out = vec![Vec::with_capacity(options.len())];
    for opts in options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts.iter() {
                let mut v = prefix.clone();
                v.push(*o);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Successors of the tuple `v` with thread `a` (0-based) active: every
/// other thread must take a move compatible with the active one.
pub fn step_active(idx: &MoveIndex, v: &[LocalState], a: usize) -> Vec<Vec<LocalState>> {
    let mut out = Vec::new();
    if v.len() < 2 {
        return out;
    }
    let Some(moves) = idx.moves.get(&v[a]) else { return out };
    for (a2, passive) in moves {
        let mut opts = Vec::with_capacity(v.len() - 1);
        let mut blocked = false;
        for (i, s) in v.iter().enumerate() {
            if i == a {
                continue;
            }
            match passive.get(s) {
                Some(o) => opts.push(o),
                None => {
                    blocked = true;
                    break;
                }
            }
        }
        if blocked {
            continue;
        }
        for choice in product(&opts) {
            let mut w = Vec::with_capacity(v.len());
            let mut it = choice.into_iter();
            for i in 0..v.len() {
                w.push(if i == a { *a2 } else { it.next().unwrap() });
            }
            out.push(w);
        }
    }
    out
}

/// All successors of the tuple `v` (`R^n` with n = |v|), deduplicated.
pub fn step(idx: &MoveIndex, v: &[LocalState]) -> Vec<Vec<LocalState>> {
    let set: BTreeSet<Vec<LocalState>> = (0..v.len()).flat_map(|a| step_active(idx, v, a)).collect();
    set.into_iter().collect()
}

/// Is the tuple an initial n-thread state: some thread `a` has every other
/// thread's state in its passive set.
pub fn is_initial(idx: &MoveIndex, v: &[LocalState]) -> bool {
    v.len() >= 2
        && (0..v.len()).any(|a| idx.init.get(&v[a]).is_some_and(|ps| v.iter().enumerate().all(|(i, s)| i == a || ps.contains(s))))
}

/// A DR program instantiated at a fixed thread count.
pub struct Instance<'a> {
    pub program: &'a DrProgram,
    pub n: usize,
    pub index: MoveIndex,
}

/// `R^n` and `I^n` of a DR program; `n >= 2`.
pub fn instantiate_dr(d: &DrProgram, n: usize) -> Instance<'_> {
    assert!(n >= 2, "DR instantiation needs at least two threads");
    Instance { program: d, n, index: MoveIndex::new(d) }
}

impl Instance<'_> {
    pub fn successors(&self, v: &[LocalState]) -> Vec<Vec<LocalState>> {
        debug_assert_eq!(v.len(), self.n);
        step(&self.index, v)
    }

    pub fn is_initial(&self, v: &[LocalState]) -> bool {
        is_initial(&self.index, v)
    }

    /// All initial tuples (exponential in n; for small instances).
    pub fn initial_states(&self) -> Vec<Vec<LocalState>> {
        let support: BTreeSet<LocalState> =
            self.index.init.iter().flat_map(|(a, ps)| std::iter::once(*a).chain(ps.iter().copied())).collect();
        let support: Vec<LocalState> = support.into_iter().collect();
        all_tuples(&support, self.n).into_iter().filter(|v| self.is_initial(v)).collect()
    }
}

/// All n-tuples over `alphabet`.
pub fn all_tuples(alphabet: &[LocalState], n: usize) -> Vec<Vec<LocalState>> {
    let owned = alphabet.to_vec();
    product(&vec![&owned; n])
}
