//! Counter abstraction of symmetric global states.

use std::fmt::Write;

use crate::drcore::{DrProgram, LocalState};
use crate::error::{Error, Result};

/// Multiset over the local-state alphabet of a DR program, as dense counts
/// indexed like `DrProgram::states`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CounterState(pub Vec<u32>);

impl CounterState {
    pub fn zero(k: usize) -> Self {
        CounterState(vec![0; k])
    }

    pub fn from_states(d: &DrProgram, states: &[LocalState]) -> Result<Self> {
        let mut c = Self::zero(d.alphabet_size());
        for s in states {
            let i = d.index_of(*s).ok_or_else(|| Error::Invalid(format!("state {} outside the alphabet", d.fmt_state(*s))))?;
            c.0[i] += 1;
        }
        Ok(c)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// The multiset as a tuple, in alphabet order.
    pub fn to_states(&self, d: &DrProgram) -> Vec<LocalState> {
        self.0.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(d.state_at(i), c as usize)).collect()
    }

    /// `self ⪯ other` on two counters of the same alphabet.
    pub fn leq(&self, other: &CounterState) -> bool {
        self.0.iter().zip(&other.0).all(|(x, y)| x <= y)
    }

    pub fn display(&self, d: &DrProgram) -> String {
        let mut s = String::from("{");
        for (i, &c) in self.0.iter().enumerate().filter(|(_, c)| **c > 0) {
            if s.len() > 1 {
                s.push_str(", ");
            }
            let _ = write!(s, "{}", d.fmt_state(d.state_at(i)));
            if c > 1 {
                let _ = write!(s, " x{c}");
            }
        }
        s.push('}');
        s
    }
}

/// Does `y` cover `x` (componentwise `x <= y`)?
pub fn covers(x: &CounterState, y: &CounterState) -> Result<bool> {
    if x.0.len() != y.0.len() {
        return Err(Error::Invalid(format!("alphabet sizes differ: {} and {}", x.0.len(), y.0.len())));
    }
    Ok(x.leq(y))
}

/// Minimal elements, smallest first, without duplicates.
pub fn minimize(mut xs: Vec<CounterState>) -> Vec<CounterState> {
    xs.sort_by(|a, b| (a.total(), &a.0).cmp(&(b.total(), &b.0)));
    xs.dedup();
    let mut out: Vec<CounterState> = Vec::with_capacity(xs.len());
    for x in xs {
        if !out.iter().any(|y| y.leq(&x)) {
            out.push(x);
        }
    }
    out
}
