//! Two-counter machines and their encoding as Boolean DR programs: counter
//! `c_i` is the number of threads at location `d_i`, and all threads keep a
//! synchronized copy of the control state in their bits.

use serde::{Deserialize, Serialize};

use crate::drcore::{DrProgram, LocalState, Quad, StatePattern};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Inc,
    Dec,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub op: Op,
    pub counter: u8,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterMachine {
    pub states: usize,
    #[serde(default)]
    pub initial: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halt: Option<usize>,
    pub edges: Vec<Edge>,
}

/// Control state and counter values.
pub type Config = (usize, u32, u32);

impl CounterMachine {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let m: CounterMachine = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    /// States in range, counters 1 or 2, and per state either nothing, one
    /// increment, or decrement and zero test on one counter (either may be
    /// missing, which blocks).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Invalid(msg));
        if self.states == 0 || self.initial >= self.states || self.halt.is_some_and(|h| h >= self.states) {
            return bad("machine states out of range".into());
        }
        for e in &self.edges {
            if e.from >= self.states || e.to >= self.states {
                return bad(format!("edge {} -> {} out of range", e.from, e.to));
            }
            if !(1..=2).contains(&e.counter) {
                return bad(format!("counter c{} does not exist", e.counter));
            }
        }
        for q in 0..self.states {
            let out: Vec<&Edge> = self.edges.iter().filter(|e| e.from == q).collect();
            let ok = match out.as_slice() {
                [] => true,
                [_] => true,
                [x, y] => x.counter == y.counter && matches!((x.op, y.op), (Op::Dec, Op::Zero) | (Op::Zero, Op::Dec)),
                _ => false,
            };
            if !ok || (Some(q) == self.halt && !out.is_empty()) {
                return bad(format!("state {q} is not deterministic"));
            }
        }
        Ok(())
    }

    fn step(&self, (q, c1, c2): Config) -> Option<Config> {
        let counter = |i: u8| if i == 1 { c1 } else { c2 };
        let set = |i: u8, v: u32| if i == 1 { (v, c2) } else { (c1, v) };
        for e in self.edges.iter().filter(|e| e.from == q) {
            let c = counter(e.counter);
            let (a, b) = match e.op {
                Op::Inc => set(e.counter, c + 1),
                Op::Dec if c > 0 => set(e.counter, c - 1),
                Op::Zero if c == 0 => (c1, c2),
                _ => continue,
            };
            return Some((e.to, a, b));
        }
        None
    }
}

/// The run from `(initial, 0, 0)` for up to `steps` steps; shorter when the
/// machine halts or blocks.
pub fn simulate_minsky(m: &CounterMachine, steps: usize) -> Vec<Config> {
    let mut run = vec![(m.initial, 0, 0)];
    while run.len() <= steps {
        match m.step(*run.last().unwrap()) {
            Some(c) => run.push(c),
            None => break,
        }
    }
    run
}

pub const POOL: &str = "d0";
pub const HALT: &str = "halt";

/// Location indices of the encoding.
const D0: u16 = 0;
const HALT_PC: u16 = 3;

fn counter_pc(i: u8) -> u16 {
    i as u16
}

/// DR program of the machine. Threads start in `d0` with the initial
/// control state; increments move the active thread from `d0` to `d_i`,
/// decrements back, zero tests need an active thread in `d0` and no
/// passive one in `d_i`. When the halt state is reached a thread may move
/// to the `halt` location, which is the error location.
pub fn encode_minsky(m: &CounterMachine) -> Result<DrProgram> {
    m.validate()?;
    let width = (usize::BITS - (m.states.max(2) - 1).leading_zeros()) as usize;
    let bit_names = (0..width).map(|i| format!("q#{i}")).collect();
    let mut d = DrProgram::new(vec![POOL.into(), "d1".into(), "d2".into(), HALT.into()], bit_names);
    d.codes = (0..m.states as u32).collect();
    let at = |pc: u16, q: usize| LocalState::new(pc, q as u32);
    let counters = [D0, counter_pc(1), counter_pc(2)];
    for e in &m.edges {
        let (a, a2) = match e.op {
            Op::Inc => (at(D0, e.from), at(counter_pc(e.counter), e.to)),
            Op::Dec => (at(counter_pc(e.counter), e.from), at(D0, e.to)),
            Op::Zero => (at(D0, e.from), at(D0, e.to)),
        };
        for &x in &counters {
            if e.op == Op::Zero && x == counter_pc(e.counter) {
                continue;
            }
            d.trans.insert(Quad::new(a, at(x, e.from), a2, at(x, e.to)));
        }
    }
    if let Some(h) = m.halt {
        for &x in counters.iter().chain([&HALT_PC]) {
            d.trans.insert(Quad::new(at(D0, h), at(x, h), at(HALT_PC, h), at(x, h)));
        }
    }
    d.init.insert((at(D0, m.initial), at(D0, m.initial)));
    d.error.push(StatePattern::location(HALT_PC));
    d.provenance.source = Some("minsky".into());
    Ok(d)
}

/// Machine configuration of an encoded state, if its threads agree on the
/// control state.
pub fn decode_config(v: &[LocalState]) -> Option<Config> {
    let q = v.first()?.bits;
    if v.iter().any(|s| s.bits != q) {
        return None;
    }
    let count = |pc: u16| v.iter().filter(|s| s.pc == pc).count() as u32;
    Some((q as usize, count(counter_pc(1)), count(counter_pc(2))))
}

/// The enumeration machine: it repeatedly moves `c1` to `c2` and back,
/// adding one to `c1` on every round.
pub fn enumerator_machine() -> CounterMachine {
    let e = |from, op, counter, to| Edge { from, op, counter, to };
    CounterMachine {
        states: 5,
        initial: 0,
        halt: None,
        edges: vec![
            e(0, Op::Dec, 1, 3),
            e(0, Op::Zero, 1, 1),
            e(3, Op::Inc, 2, 0),
            e(1, Op::Dec, 2, 4),
            e(4, Op::Inc, 1, 1),
            e(1, Op::Zero, 2, 2),
            e(2, Op::Inc, 1, 0),
        ],
    }
}
