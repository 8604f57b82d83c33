//! Explicit Boolean dual-reference programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TEMPLATE_FORMAT: &str = "drcheck-template/1";
pub const DEFAULT_SINK: &str = "sink";

/// A thread-local state: program location and predicate bits (bit `c-1`
/// holds predicate `c`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalState {
    pub pc: u16,
    pub bits: u32,
}

impl LocalState {
    pub fn new(pc: u16, bits: u32) -> Self {
        LocalState { pc, bits }
    }
}

/// `(active, passive, active', passive')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quad {
    pub active: LocalState,
    pub passive: LocalState,
    pub active_next: LocalState,
    pub passive_next: LocalState,
}

impl Quad {
    pub fn new(a: LocalState, p: LocalState, a2: LocalState, p2: LocalState) -> Self {
        Quad { active: a, passive: p, active_next: a2, passive_next: p2 }
    }
}

/// Local states with location `pc` whose bits agree with `value` on `mask`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatePattern {
    pub pc: u16,
    pub mask: u32,
    pub value: u32,
}

impl StatePattern {
    pub fn location(pc: u16) -> Self {
        StatePattern { pc, mask: 0, value: 0 }
    }

    pub fn matches(&self, s: LocalState) -> bool {
        s.pc == self.pc && s.bits & self.mask == self.value
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_bound: Option<u32>,
    /// Cumulative transition counts after each thread count.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_n: Vec<(u32, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_added: Option<usize>,
    #[serde(default)]
    pub closure: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmf_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrProgram {
    pub locations: Vec<String>,
    pub sink: u16,
    /// Names of the bits, in bit order.
    pub bit_names: Vec<String>,
    /// Admissible bit valuations, sorted.
    pub codes: Vec<u32>,
    pub trans: BTreeSet<Quad>,
    pub init: BTreeSet<(LocalState, LocalState)>,
    pub error: Vec<StatePattern>,
    pub provenance: Provenance,
}

impl DrProgram {
    /// Empty program over `locations` plus a fresh sink, all bit valuations
    /// admissible.
    pub fn new(locations: Vec<String>, bit_names: Vec<String>) -> Self {
        let mut locations = locations;
        let mut sink_name = DEFAULT_SINK.to_string();
        while locations.contains(&sink_name) {
            sink_name.push('_');
        }
        locations.push(sink_name);
        let width = bit_names.len();
        DrProgram {
            sink: (locations.len() - 1) as u16,
            locations,
            codes: (0..1u32 << width).collect(),
            bit_names,
            trans: BTreeSet::new(),
            init: BTreeSet::new(),
            error: vec![],
            provenance: Provenance::default(),
        }
    }

    pub fn width(&self) -> usize {
        self.bit_names.len()
    }

    pub fn location(&self, name: &str) -> Option<u16> {
        self.locations.iter().position(|l| l == name).map(|i| i as u16)
    }

    /// The local-state alphabet, sink included.
    pub fn states(&self) -> Vec<LocalState> {
        (0..self.locations.len() as u16).flat_map(|pc| self.codes.iter().map(move |&bits| LocalState { pc, bits })).collect()
    }

    /// Does some transition mention the sink?
    pub fn uses_sink(&self) -> bool {
        self.trans.iter().any(|q| [q.active, q.passive, q.active_next, q.passive_next].iter().any(|s| s.pc == self.sink))
    }

    /// States a thread can occupy: the sink counts only once some
    /// transition mentions it.
    pub fn live_states(&self) -> Vec<LocalState> {
        let sink = !self.uses_sink();
        self.states().into_iter().filter(|s| !(sink && s.pc == self.sink)).collect()
    }

    pub fn alphabet_size(&self) -> usize {
        self.locations.len() * self.codes.len()
    }

    /// Dense index of a local state in `states()`.
    pub fn index_of(&self, s: LocalState) -> Option<usize> {
        let c = self.codes.binary_search(&s.bits).ok()?;
        ((s.pc as usize) < self.locations.len()).then(|| s.pc as usize * self.codes.len() + c)
    }

    pub fn state_at(&self, i: usize) -> LocalState {
        LocalState { pc: (i / self.codes.len()) as u16, bits: self.codes[i % self.codes.len()] }
    }

    pub fn in_alphabet(&self, s: LocalState) -> bool {
        self.index_of(s).is_some()
    }

    pub fn is_error(&self, s: LocalState) -> bool {
        self.error.iter().any(|p| p.matches(s))
    }

    pub fn fmt_state(&self, s: LocalState) -> String {
        let loc = self.locations.get(s.pc as usize).map(String::as_str).unwrap_or("?");
        if self.width() == 0 {
            loc.to_string()
        } else {
            format!("{loc}:{}", bits_string(s.bits, self.width()))
        }
    }

    pub fn parse_state(&self, text: &str) -> Result<LocalState> {
        let (loc, bits) = text.split_once(':').unwrap_or((text, ""));
        let pc = self.location(loc).ok_or_else(|| Error::Template(format!("unknown location `{loc}` in `{text}`")))?;
        if bits.len() != self.width() {
            return Err(Error::Template(format!("`{text}` has {} bits, expected {}", bits.len(), self.width())));
        }
        let bits = parse_bits(bits).ok_or_else(|| Error::Template(format!("bad bit string in `{text}`")))?;
        Ok(LocalState { pc, bits })
    }

    /// Structural well-formedness: every state is in the alphabet and the
    /// sink is never an active source or an initial state.
    pub fn validate(&self) -> Result<()> {
        let check = |s: LocalState| {
            if self.in_alphabet(s) {
                Ok(())
            } else {
                Err(Error::Template(format!("state {s:?} outside the alphabet")))
            }
        };
        for q in &self.trans {
            for s in [q.active, q.passive, q.active_next, q.passive_next] {
                check(s)?;
            }
            if q.active.pc == self.sink {
                return Err(Error::Template(format!("sink `{}` used as an active source", self.locations[self.sink as usize])));
            }
        }
        for (a, p) in &self.init {
            check(*a)?;
            check(*p)?;
            if a.pc == self.sink || p.pc == self.sink {
                return Err(Error::Template("sink state in the initial condition".into()));
            }
        }
        if self.error.iter().any(|e| e.pc == self.sink) {
            return Err(Error::Template("sink used in an error pattern".into()));
        }
        Ok(())
    }

    /// Transitions grouped by active pair.
    pub fn by_active_pair(&self) -> BTreeMap<(LocalState, LocalState), Vec<(LocalState, LocalState)>> {
        let mut m: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for q in &self.trans {
            m.entry((q.active, q.active_next)).or_default().push((q.passive, q.passive_next));
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TemplateJson::from(self)).expect("template serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).unwrap() + "\n"
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let t: TemplateJson = serde_json::from_str(text)?;
        t.into_program()
    }
}

pub fn bits_string(bits: u32, width: usize) -> String {
    (0..width).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<u32> {
    s.chars().enumerate().try_fold(0u32, |acc, (i, c)| match c {
        '0' => Some(acc),
        '1' => Some(acc | 1 << i),
        _ => None,
    })
}

/// Parse a `0/1/?` pattern into (mask, value).
pub fn parse_pattern(s: &str) -> Option<(u32, u32)> {
    s.chars().enumerate().try_fold((0u32, 0u32), |(m, v), (i, c)| match c {
        '0' => Some((m | 1 << i, v)),
        '1' => Some((m | 1 << i, v | 1 << i)),
        '?' => Some((m, v)),
        _ => None,
    })
}

fn pattern_string(mask: u32, value: u32, width: usize) -> String {
    (0..width)
        .map(|i| match (mask >> i & 1, value >> i & 1) {
            (0, _) => '?',
            (_, 1) => '1',
            _ => '0',
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct PatternJson {
    pc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bits: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TemplateJson {
    format: String,
    locations: Vec<String>,
    sink: String,
    bits: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    codes: Option<Vec<String>>,
    #[serde(default)]
    error: Vec<PatternJson>,
    transitions: Vec<[String; 4]>,
    initial: Vec<[String; 2]>,
    #[serde(default)]
    provenance: Provenance,
}

impl From<&DrProgram> for TemplateJson {
    fn from(d: &DrProgram) -> Self {
        let w = d.width();
        let all_codes = d.codes.len() == 1usize << w && d.codes.iter().enumerate().all(|(i, c)| *c == i as u32);
        TemplateJson {
            format: TEMPLATE_FORMAT.into(),
            locations: d.locations.clone(),
            sink: d.locations[d.sink as usize].clone(),
            bits: d.bit_names.clone(),
            codes: (!all_codes).then(|| d.codes.iter().map(|c| bits_string(*c, w)).collect()),
            error: d
                .error
                .iter()
                .map(|p| PatternJson {
                    pc: d.locations[p.pc as usize].clone(),
                    bits: (p.mask != 0).then(|| pattern_string(p.mask, p.value, w)),
                })
                .collect(),
            transitions: d
                .trans
                .iter()
                .map(|q| [q.active, q.passive, q.active_next, q.passive_next].map(|s| d.fmt_state(s)))
                .collect(),
            initial: d.init.iter().map(|(a, p)| [d.fmt_state(*a), d.fmt_state(*p)]).collect(),
            provenance: d.provenance.clone(),
        }
    }
}

impl TemplateJson {
    fn into_program(self) -> Result<DrProgram> {
        if self.format != TEMPLATE_FORMAT {
            return Err(Error::Template(format!("unsupported format `{}`", self.format)));
        }
        let sink = self
            .locations
            .iter()
            .position(|l| *l == self.sink)
            .ok_or_else(|| Error::Template(format!("sink `{}` is not a location", self.sink)))? as u16;
        let w = self.bits.len();
        if w > 31 {
            return Err(Error::Template("too many bits".into()));
        }
        let codes = match self.codes {
            None => (0..1u32 << w).collect(),
            Some(cs) => {
                let mut v = cs
                    .iter()
                    .map(|c| parse_bits(c).filter(|_| c.len() == w).ok_or_else(|| Error::Template(format!("bad code `{c}`"))))
                    .collect::<Result<Vec<_>>>()?;
                v.sort_unstable();
                v.dedup();
                v
            }
        };
        let mut d = DrProgram {
            locations: self.locations,
            sink,
            bit_names: self.bits,
            codes,
            trans: BTreeSet::new(),
            init: BTreeSet::new(),
            error: vec![],
            provenance: self.provenance,
        };
        for p in &self.error {
            let pc = d.location(&p.pc).ok_or_else(|| Error::Template(format!("unknown location `{}`", p.pc)))?;
            let (mask, value) = match &p.bits {
                None => (0, 0),
                Some(b) if b.len() == w => parse_pattern(b).ok_or_else(|| Error::Template(format!("bad pattern `{b}`")))?,
                Some(b) => return Err(Error::Template(format!("pattern `{b}` has wrong width"))),
            };
            d.error.push(StatePattern { pc, mask, value });
        }
        for t in &self.transitions {
            let [a, p, a2, p2] = [&t[0], &t[1], &t[2], &t[3]].map(|s| d.parse_state(s));
            d.trans.insert(Quad::new(a?, p?, a2?, p2?));
        }
        for [a, p] in &self.initial {
            d.init.insert((d.parse_state(a)?, d.parse_state(p)?));
        }
        d.validate()?;
        Ok(d)
    }
}

impl fmt::Display for DrProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.trans {
            writeln!(
                f,
                "({}, {}) -> ({}, {})",
                self.fmt_state(q.active),
                self.fmt_state(q.passive),
                self.fmt_state(q.active_next),
                self.fmt_state(q.passive_next)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DrProgram {
        let mut d = DrProgram::new(vec!["a".into(), "b".into()], vec!["x".into(), "y".into()]);
        let s = LocalState::new;
        d.trans.insert(Quad::new(s(0, 1), s(0, 2), s(1, 3), s(0, 2)));
        d.init.insert((s(0, 0), s(0, 0)));
        d.error.push(StatePattern { pc: 1, mask: 1, value: 1 });
        d
    }

    #[test]
    fn json_round_trip() {
        let d = toy();
        let text = d.to_json_string();
        assert!(text.contains("\"a:10\""));
        assert!(text.contains("\"1?\""));
        assert_eq!(DrProgram::from_json_str(&text).unwrap(), d);
    }

    #[test]
    fn alphabet_indexing() {
        let d = toy();
        assert_eq!(d.alphabet_size(), 12);
        for (i, s) in d.states().into_iter().enumerate() {
            assert_eq!(d.index_of(s), Some(i));
            assert_eq!(d.state_at(i), s);
        }
        assert_eq!(d.locations[d.sink as usize], "sink");
    }

    #[test]
    fn sink_source_rejected() {
        let mut d = toy();
        let s = LocalState::new(d.sink, 0);
        d.trans.insert(Quad::new(s, s, s, s));
        assert!(d.validate().is_err());
    }
}
