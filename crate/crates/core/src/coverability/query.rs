//! Coverability queries: targets given as location patterns with counts.

use serde::{Deserialize, Serialize};

use super::counter::{minimize, CounterState};
use crate::drcore::{parse_pattern, DrProgram, LocalState};
use crate::error::{Error, Result};

fn one() -> u32 {
    1
}

/// `count` threads at location `pc` whose bits match `bits` (a string of
/// `0`, `1`, `?`; all valuations when absent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub pc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<String>,
    #[serde(default = "one")]
    pub count: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub target: Vec<TargetEntry>,
    #[serde(default)]
    pub engine: EngineOptions,
}

impl Query {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn multisets(xs: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..size {
        let mut next = Vec::new();
        for v in &out {
            let start = v.last().map_or(0, |&l| l);
            for &x in &xs[start..] {
                let mut w: Vec<usize> = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out.into_iter().map(|v| v.into_iter().map(|i| xs[i]).collect()).collect()
}

/// Minimal counter states satisfying every entry, entries counted
/// separately.
pub fn expand_target(d: &DrProgram, entries: &[TargetEntry]) -> Result<Vec<CounterState>> {
    if entries.is_empty() {
        return Err(Error::Invalid("empty target".into()));
    }
    let mut out = vec![CounterState::zero(d.alphabet_size())];
    for e in entries {
        let pc = d.location(&e.pc).ok_or_else(|| Error::Invalid(format!("unknown location `{}` in target", e.pc)))?;
        let (mask, value) = match &e.bits {
            Some(b) if b.len() == d.width() => {
                parse_pattern(b).ok_or_else(|| Error::Invalid(format!("bad bit pattern `{b}`")))?
            }
            Some(b) => return Err(Error::Invalid(format!("bit pattern `{b}` has the wrong width (expected {})", d.width()))),
            None => (0, 0),
        };
        if e.count == 0 {
            continue;
        }
        let matching: Vec<usize> = d
            .codes
            .iter()
            .filter(|&&bits| bits & mask == value)
            .map(|&bits| d.index_of(LocalState { pc, bits }).unwrap())
            .collect();
        if matching.is_empty() {
            return Err(Error::Invalid(format!("no local state matches target entry at `{}`", e.pc)));
        }
        let positions: Vec<usize> = (0..matching.len()).collect();
        let choices: Vec<Vec<usize>> =
            multisets(&positions, e.count as usize).into_iter().map(|c| c.into_iter().map(|i| matching[i]).collect()).collect();
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for base in &out {
            for c in &choices {
                let mut s = base.clone();
                for &i in c {
                    s.0[i] += 1;
                }
                next.push(s);
            }
        }
        out = next;
    }
    Ok(minimize(out))
}

/// One thread in an error state.
pub fn error_target(d: &DrProgram) -> Vec<CounterState> {
    let k = d.alphabet_size();
    let out = d
        .states()
        .into_iter()
        .filter(|s| d.is_error(*s))
        .map(|s| {
            let mut c = CounterState::zero(k);
            c.0[d.index_of(s).unwrap()] = 1;
            c
        })
        .collect();
    minimize(out)
}
