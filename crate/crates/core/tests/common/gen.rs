//! Random small programs and predicate sets.

use proptest::prelude::*;

/// (needs, text); `needs` lists the variables the snippet mentions.
type Snippet = (&'static [&'static str], &'static str);

const INT_GUARDS: &[Snippet] = &[
    (&[], ""),
    (&["l"], "l > 0"),
    (&["l"], "l == 0"),
    (&["l"], "l < 2"),
    (&["b"], "b"),
    (&["b"], "!b"),
    (&["s", "l"], "s > l"),
    (&["s"], "s == 0"),
];

const INT_ASSIGNS: &[(&str, Snippet)] = &[
    ("l", (&["l"], "l := l - 1")),
    ("l", (&["l"], "l := l + 1")),
    ("l", (&["l"], "l := 0")),
    ("l", (&["l", "s"], "l := s")),
    ("s", (&["s"], "s := s + 1")),
    ("s", (&["s", "l"], "s := l")),
    ("b", (&["b"], "b := !b")),
    ("b", (&["b", "l"], "b := l > 0")),
];

const INT_PREDS: &[Snippet] = &[
    (&["l"], "l < l@P"),
    (&["l"], "l == l@P"),
    (&["l"], "l > 0"),
    (&["l", "s"], "s == l"),
    (&["b"], "b"),
    (&["s"], "s > 0"),
    (&["l", "s"], "l <= s"),
    (&["b", "l"], "b || l != l@P"),
];

const INT_INITS: &[Snippet] = &[(&[], ""), (&["l"], "l == 0"), (&["l"], "l <= 1"), (&["l", "s"], "l == s")];

const BOOL_GUARDS: &[Snippet] = &[(&[], ""), (&["b"], "b"), (&["b"], "!b"), (&["s"], "s"), (&["s", "b"], "s != b")];

const BOOL_ASSIGNS: &[(&str, Snippet)] = &[
    ("b", (&["b"], "b := !b")),
    ("b", (&["b"], "b := true")),
    ("b", (&["b"], "b := false")),
    ("b", (&["b", "s"], "b := s")),
    ("s", (&["s"], "s := !s")),
    ("s", (&["s"], "s := true")),
    ("s", (&["s", "b"], "s := b")),
];

const BOOL_SINGLE: &[Snippet] = &[(&["b"], "b"), (&["s"], "s"), (&["b", "s"], "b == s")];
const BOOL_INTER: &[Snippet] = &[(&["b"], "b == b@P"), (&["b"], "b != b@P"), (&["b", "s"], "b && !b@P || s")];

const BOOL_INITS: &[Snippet] = &[(&[], ""), (&["b"], "!b"), (&["b", "s"], "b == s")];

#[derive(Clone, Debug)]
pub struct Case {
    pub program: String,
    pub predicates: String,
}

fn pick<'a>(pool: &'a [Snippet], vars: &[&str], i: usize) -> &'a str {
    let ok: Vec<&Snippet> = pool.iter().filter(|(needs, _)| needs.iter().all(|n| vars.contains(n))).collect();
    ok[i % ok.len()].1
}

fn command(vars: &[&str], from: &str, guard: &str, assigns: &[(&str, Snippet)], picks: &[usize], to: &str) -> String {
    let ok: Vec<&(&str, Snippet)> = assigns.iter().filter(|(_, (needs, _))| needs.iter().all(|n| vars.contains(n))).collect();
    let mut targets = Vec::new();
    let mut parts = Vec::new();
    for i in picks {
        let (t, (_, text)) = ok[i % ok.len()];
        if !targets.contains(t) {
            targets.push(*t);
            parts.push(*text);
        }
    }
    let guard = if guard.is_empty() { String::new() } else { format!("[{guard}] ") };
    format!("{from}: {guard}{} -> {to};", parts.join(", "))
}

type RawCommand = (usize, usize, Vec<usize>, usize);

fn raw_commands(max: usize) -> impl Strategy<Value = Vec<RawCommand>> {
    prop::collection::vec((0..8usize, 0..8usize, prop::collection::vec(0..8usize, 0..=2), 0..8usize), 1..=max)
}

/// Integer programs: `l: int`, optionally `b: bool` and a shared `s: int`,
/// one or two locations, up to two predicates.
pub fn int_case() -> impl Strategy<Value = Case> {
    (any::<bool>(), any::<bool>(), 1..=2usize, raw_commands(3), 0..4usize, prop::collection::vec(0..8usize, 1..=2)).prop_map(
        |(has_b, has_s, nlocs, cmds, init, preds)| {
            let mut vars = vec!["l"];
            let mut text = String::new();
            if has_s {
                vars.push("s");
                text.push_str("shared s: int;\n");
            }
            text.push_str("local l: int;\n");
            if has_b {
                vars.push("b");
                text.push_str("local b: bool;\n");
            }
            let locs = &["a", "c"][..nlocs];
            text.push_str(&format!("locations {};\n", locs.join(", ")));
            let init = pick(INT_INITS, &vars, init);
            if !init.is_empty() {
                text.push_str(&format!("init {init};\n"));
            }
            for (from, g, picks, to) in cmds {
                let (from, to) = (locs[from % locs.len()], locs[to % locs.len()]);
                text.push_str(&command(&vars, from, pick(INT_GUARDS, &vars, g), INT_ASSIGNS, &picks, to));
                text.push('\n');
            }
            let mut ps: Vec<&str> = preds.iter().map(|&i| pick(INT_PREDS, &vars, i)).collect();
            ps.dedup();
            Case { program: text, predicates: ps.join("\n") }
        },
    )
}

/// Boolean programs over `b` and optionally a shared `s`, with an error
/// location reached through guarded commands or a mutex. At most one
/// inter-thread predicate and two predicates overall.
pub fn bool_case() -> impl Strategy<Value = Case> {
    (any::<bool>(), any::<bool>(), raw_commands(4), 0..3usize, prop::option::of(0..3usize), prop::option::of(0..3usize))
        .prop_filter("at least one predicate", |(_, _, _, _, a, b)| a.is_some() || b.is_some())
        .prop_map(|(has_s, mutex, cmds, init, single, inter)| {
            let mut vars = vec!["b"];
            let mut text = String::new();
            if has_s {
                vars.push("s");
                text.push_str("shared s: bool;\n");
            }
            text.push_str("local b: bool;\n");
            let locs: &[&str] = if mutex { &["a", "c"] } else { &["a", "c", "error"] };
            text.push_str(&format!("locations {};\n", locs.join(", ")));
            if mutex {
                text.push_str("mutex c;\n");
            }
            let init = pick(BOOL_INITS, &vars, init);
            if !init.is_empty() {
                text.push_str(&format!("init {init};\n"));
            }
            for (from, g, picks, to) in cmds {
                // nothing leaves the error location
                let (from, to) = (locs[from % 2], locs[to % locs.len()]);
                text.push_str(&command(&vars, from, pick(BOOL_GUARDS, &vars, g), BOOL_ASSIGNS, &picks, to));
                text.push('\n');
            }
            let mut ps = Vec::new();
            if let Some(i) = single {
                ps.push(pick(BOOL_SINGLE, &vars, i));
            }
            if let Some(i) = inter {
                ps.push(pick(BOOL_INTER, &vars, i));
            }
            Case { program: text, predicates: ps.join("\n") }
        })
}

/// Random Boolean DR program; the last non-sink location is the error.
pub fn dr_program(max_locs: usize, max_bits: usize, max_quads: usize) -> impl Strategy<Value = drcheck::drcore::DrProgram> {
    use drcheck::drcore::{DrProgram, LocalState, Quad, StatePattern};
    (1..=max_locs, 0..=max_bits).prop_flat_map(move |(locs, bits)| {
        let k = locs * (1 << bits);
        let state = move |i: usize| LocalState::new((i / (1 << bits)) as u16, (i % (1 << bits)) as u32);
        (prop::collection::vec((0..k, 0..k, 0..k, 0..k), 0..=max_quads), prop::collection::vec((0..k, 0..k), 1..=3)).prop_map(
            move |(quads, init)| {
                let mut d =
                    DrProgram::new((0..locs).map(|i| format!("l{i}")).collect(), (0..bits).map(|i| format!("b{i}")).collect());
                d.trans = quads.into_iter().map(|(a, p, a2, p2)| Quad::new(state(a), state(p), state(a2), state(p2))).collect();
                d.init = init.into_iter().map(|(a, p)| (state(a), state(p))).collect();
                d.error = vec![StatePattern::location(locs as u16 - 1)];
                d
            },
        )
    })
}

/// Shared `x: int`, `s: bool`; locals `l: int`, `b: bool`, `pc: loc` over
/// locations `a`, `c`, `e`.
pub fn query_signature() -> drcheck::logic::Signature {
    use drcheck::logic::{Signature, Sort};
    Signature {
        shared: vec![("x".into(), Sort::Int), ("s".into(), Sort::Bool)],
        locals: vec![("l".into(), Sort::Int), ("b".into(), Sort::Bool), ("pc".into(), Sort::Loc)],
        locations: vec!["a".into(), "c".into(), "e".into()],
        aux: Default::default(),
    }
}

fn int_var() -> impl Strategy<Value = drcheck::logic::Var> {
    use drcheck::logic::Var;
    prop_oneof![
        Just(Var::base("x")),
        Just(Var::base("x").primed()),
        (1u32..=3).prop_map(|i| Var::thread("l", i)),
        (1u32..=2).prop_map(|i| Var::thread("l", i).primed()),
    ]
}

fn int_term() -> impl Strategy<Value = drcheck::logic::Expr> {
    use drcheck::logic::Expr;
    let leaf = prop_oneof![int_var().prop_map(Expr::var), (-2i64..=7).prop_map(Expr::Int)];
    leaf.prop_recursive(2, 6, 2, |t| {
        prop_oneof![
            (t.clone(), t.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (t.clone(), t.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (-2i64..=3, t).prop_map(|(k, a)| Expr::Scale(k, Box::new(a))),
        ]
    })
}

fn atom() -> impl Strategy<Value = drcheck::logic::Expr> {
    use drcheck::logic::{CmpOp, Expr, Var};
    let op = prop_oneof![Just(CmpOp::Eq), Just(CmpOp::Ne), Just(CmpOp::Lt), Just(CmpOp::Le), Just(CmpOp::Gt), Just(CmpOp::Ge)];
    let loc = prop_oneof![Just("a"), Just("c"), Just("e")];
    prop_oneof![
        4 => (op, int_term(), int_term()).prop_map(|(o, a, b)| Expr::cmp(o, a, b)),
        1 => (1u32..=3).prop_map(|i| Expr::var(Var::thread("b", i))),
        1 => Just(Expr::var(Var::base("s"))),
        1 => Just(Expr::var(Var::base("s").primed())),
        1 => ((1u32..=2), loc).prop_map(|(i, l)| Expr::eq(Expr::var(Var::thread("pc", i)), Expr::Loc(l.into()))),
        1 => (1u32..=2, 1u32..=2).prop_map(|(i, j)| Expr::eq(Expr::var(Var::thread("pc", i)), Expr::var(Var::thread("pc", j).primed()))),
        1 => any::<bool>().prop_map(Expr::Bool),
    ]
}

/// Random quantifier-free formulas over [`query_signature`].
pub fn query() -> impl Strategy<Value = drcheck::logic::Expr> {
    use drcheck::logic::Expr;
    atom().prop_recursive(3, 12, 3, |f| {
        prop_oneof![
            prop::collection::vec(f.clone(), 2..=3).prop_map(Expr::and),
            prop::collection::vec(f.clone(), 2..=3).prop_map(Expr::or),
            f.clone().prop_map(Expr::not),
            (f.clone(), f.clone()).prop_map(|(a, b)| Expr::implies(a, b)),
            (f.clone(), f).prop_map(|(a, b)| Expr::iff(a, b)),
        ]
    })
}
