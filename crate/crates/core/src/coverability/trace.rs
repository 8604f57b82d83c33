//! Verdicts and witness traces.

use serde_json::json;

use super::counter::CounterState;
use crate::drcore::{is_initial, step_active, DrProgram, LocalState, MoveIndex};
use crate::{Error, Result};

/// A run of a fixed number of threads. `active[i]` is the thread that
/// moves from `states[i]` to `states[i + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<Vec<LocalState>>,
    pub active: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Uncoverable,
    Coverable(Trace),
}

impl Verdict {
    pub fn is_coverable(&self) -> bool {
        matches!(self, Verdict::Coverable(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Uncoverable => "uncoverable",
            Verdict::Coverable(_) => "coverable",
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            Verdict::Coverable(t) => Some(t),
            Verdict::Uncoverable => None,
        }
    }
}

fn sorted(v: &[LocalState]) -> Vec<LocalState> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

impl Trace {
    pub fn threads(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Does the trace start in an initial state, take only steps of the
    /// instantiated program (up to reordering of threads) and end in a
    /// state covering one of `targets`?
    pub fn replays(&self, d: &DrProgram, targets: &[CounterState]) -> bool {
        let idx = MoveIndex::new(d);
        let Some(first) = self.states.first() else { return false };
        if self.states.len() != self.active.len() + 1 || !is_initial(&idx, first) {
            return false;
        }
        for (i, &a) in self.active.iter().enumerate() {
            let (v, w) = (&self.states[i], sorted(&self.states[i + 1]));
            if a >= v.len() || !step_active(&idx, v, a).iter().any(|x| sorted(x) == w) {
                return false;
            }
        }
        let Ok(last) = CounterState::from_states(d, self.states.last().unwrap()) else { return false };
        targets.iter().any(|t| t.leq(&last))
    }

    pub fn to_json(&self, d: &DrProgram) -> serde_json::Value {
        let steps: Vec<_> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, v)| {
                json!({
                    "state": v.iter().map(|s| d.fmt_state(*s)).collect::<Vec<_>>(),
                    "active": self.active.get(i),
                })
            })
            .collect();
        json!({ "threads": self.threads(), "steps": steps })
    }

    /// Inverse of [`Trace::to_json`].
    pub fn from_json(d: &DrProgram, v: &serde_json::Value) -> Result<Trace> {
        let bad = || Error::Invalid("malformed trace".into());
        let steps = v["steps"].as_array().ok_or_else(bad)?;
        let mut t = Trace { states: vec![], active: vec![] };
        for (i, s) in steps.iter().enumerate() {
            let state = s["state"].as_array().ok_or_else(bad)?;
            t.states.push(state.iter().map(|x| d.parse_state(x.as_str().ok_or_else(bad)?)).collect::<Result<_>>()?);
            match s["active"].as_u64() {
                Some(a) if i + 1 < steps.len() => t.active.push(a as usize),
                None if i + 1 == steps.len() => {}
                _ => return Err(bad()),
            }
        }
        Ok(t)
    }
}
