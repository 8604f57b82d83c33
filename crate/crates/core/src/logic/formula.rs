//! Quantifier-free formulas over integer, Boolean and location-valued
//! variables, with the renaming operators used to build n-thread
//! instantiations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Which copy of a variable an occurrence refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    /// Template variable: shared, or a local of the active thread.
    Base,
    /// Local of a generic passive thread (`name@P`).
    Passive,
    /// Local of thread `i` in an n-thread instantiation (1-based).
    Thread(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub index: Index,
    pub primed: bool,
}

impl Var {
    pub fn base(name: impl Into<String>) -> Self {
        Var { name: name.into(), index: Index::Base, primed: false }
    }

    pub fn passive(name: impl Into<String>) -> Self {
        Var { name: name.into(), index: Index::Passive, primed: false }
    }

    pub fn thread(name: impl Into<String>, i: u32) -> Self {
        Var { name: name.into(), index: Index::Thread(i), primed: false }
    }

    pub fn primed(mut self) -> Self {
        self.primed = true;
        self
    }

    pub fn with_index(mut self, index: Index) -> Self {
        self.index = index;
        self
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        match self.index {
            Index::Base => {}
            Index::Passive => f.write_str("@P")?,
            Index::Thread(i) => write!(f, "@{i}")?,
        }
        if self.primed {
            f.write_str("'")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
    /// Program location; the domain is the declared location list.
    Loc,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
            Sort::Loc => "loc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Formula and term AST. Terms and formulas share one type; sorts are
/// checked against a [`Signature`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Loc(String),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    /// Multiplication by an integer constant (keeps terms linear).
    Scale(i64, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn tt() -> Self {
        Expr::Bool(true)
    }

    pub fn ff() -> Self {
        Expr::Bool(false)
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Self {
        Expr::cmp(CmpOp::Eq, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Self {
        match a {
            Expr::Bool(b) => Expr::Bool(!b),
            other => Expr::Not(Box::new(other)),
        }
    }

    pub fn iff(a: Expr, b: Expr) -> Self {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Self {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    /// Flattening conjunction; `And([])` is true.
    pub fn and(items: impl IntoIterator<Item = Expr>) -> Self {
        let mut out = Vec::new();
        for e in items {
            match e {
                Expr::Bool(true) => {}
                Expr::Bool(false) => return Expr::ff(),
                Expr::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::tt(),
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    /// Flattening disjunction; `Or([])` is false.
    pub fn or(items: impl IntoIterator<Item = Expr>) -> Self {
        let mut out = Vec::new();
        for e in items {
            match e {
                Expr::Bool(false) => {}
                Expr::Bool(true) => return Expr::tt(),
                Expr::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::ff(),
            1 => out.pop().unwrap(),
            _ => Expr::Or(out),
        }
    }

    /// Rebuild the expression with every variable occurrence mapped.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Var) -> Expr {
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Loc(_) => self.clone(),
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Add(a, b) => Expr::Add(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Scale(k, a) => Expr::Scale(*k, Box::new(a.map_vars(f))),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Not(a) => Expr::Not(Box::new(a.map_vars(f))),
            Expr::And(xs) => Expr::And(xs.iter().map(|x| x.map_vars(f)).collect()),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.map_vars(f)).collect()),
            Expr::Implies(a, b) => Expr::Implies(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Iff(a, b) => Expr::Iff(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
        }
    }

    /// Replace variables by expressions (simultaneous substitution).
    pub fn substitute(&self, f: &mut impl FnMut(&Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Loc(_) => self.clone(),
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Scale(k, a) => Expr::Scale(*k, Box::new(a.substitute(f))),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Not(a) => Expr::Not(Box::new(a.substitute(f))),
            Expr::And(xs) => Expr::And(xs.iter().map(|x| x.substitute(f)).collect()),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.substitute(f)).collect()),
            Expr::Implies(a, b) => Expr::Implies(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Iff(a, b) => Expr::Iff(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
        }
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Loc(_) => {}
            Expr::Var(v) => f(v),
            Expr::Scale(_, a) | Expr::Not(a) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.visit_vars(f)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    pub fn locations(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_locations(&mut out);
        out
    }

    fn collect_locations(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Loc(l) => {
                out.insert(l.clone());
            }
            Expr::Bool(_) | Expr::Int(_) | Expr::Var(_) => {}
            Expr::Scale(_, a) | Expr::Not(a) => a.collect_locations(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.collect_locations(out);
                b.collect_locations(out);
            }
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.collect_locations(out)),
        }
    }

    /// Prime every variable (the `f'` operator).
    pub fn prime(&self) -> Expr {
        self.map_vars(&mut |v| v.clone().primed())
    }

    /// Number of top-level conjuncts (1 for a non-conjunction).
    pub fn conjuncts(&self) -> &[Expr] {
        match self {
            Expr::And(xs) => xs,
            other => std::slice::from_ref(other),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Iff(..) => 1,
            Expr::Implies(..) => 2,
            Expr::Or(_) => 3,
            Expr::And(_) => 4,
            Expr::Not(_) => 5,
            Expr::Cmp(..) => 6,
            Expr::Add(..) | Expr::Sub(..) => 7,
            Expr::Scale(..) => 8,
            Expr::Bool(_) | Expr::Int(_) | Expr::Loc(_) | Expr::Var(_) => 10,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
        if child.precedence() < min_prec || (child.precedence() == 10 && matches!(child, Expr::Int(i) if *i < 0) && min_prec > 7)
        {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Loc(l) => f.write_str(l),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) => {
                self.fmt_child(f, a, 7)?;
                f.write_str(" + ")?;
                self.fmt_child(f, b, 8)
            }
            Expr::Sub(a, b) => {
                self.fmt_child(f, a, 7)?;
                f.write_str(" - ")?;
                self.fmt_child(f, b, 8)
            }
            Expr::Scale(k, a) => {
                write!(f, "{k} * ")?;
                self.fmt_child(f, a, 9)
            }
            Expr::Cmp(op, a, b) => {
                self.fmt_child(f, a, 7)?;
                write!(f, " {} ", op.symbol())?;
                self.fmt_child(f, b, 7)
            }
            Expr::Not(a) => {
                f.write_str("!")?;
                self.fmt_child(f, a, 6)
            }
            Expr::And(xs) | Expr::Or(xs) => {
                if xs.is_empty() {
                    return write!(f, "{}", matches!(self, Expr::And(_)));
                }
                let (sep, prec) = if matches!(self, Expr::And(_)) { (" && ", 5) } else { (" || ", 4) };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.fmt_child(f, x, prec)?;
                }
                Ok(())
            }
            Expr::Implies(a, b) => {
                self.fmt_child(f, a, 3)?;
                f.write_str(" => ")?;
                self.fmt_child(f, b, 2)
            }
            Expr::Iff(a, b) => {
                self.fmt_child(f, a, 2)?;
                f.write_str(" <=> ")?;
                self.fmt_child(f, b, 2)
            }
        }
    }
}

/// Variable declarations of a program: shared and local variables with
/// their sorts, the location list, and sorts of auxiliary variables
/// introduced by the analyses (abstraction bits, renamed copies).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub shared: Vec<(String, Sort)>,
    pub locals: Vec<(String, Sort)>,
    pub locations: Vec<String>,
    pub aux: BTreeMap<String, Sort>,
}

impl Signature {
    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.shared
            .iter()
            .chain(self.locals.iter())
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .or_else(|| self.aux.get(name).copied())
    }

    pub fn is_shared(&self, name: &str) -> bool {
        self.shared.iter().any(|(n, _)| n == name)
    }

    pub fn is_local(&self, name: &str) -> bool {
        self.locals.iter().any(|(n, _)| n == name)
    }

    pub fn local_names(&self) -> BTreeSet<String> {
        self.locals.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn shared_names(&self) -> BTreeSet<String> {
        self.shared.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn with_aux(mut self, name: impl Into<String>, sort: Sort) -> Self {
        self.aux.insert(name.into(), sort);
        self
    }
}

/// A uniformly-indexed variable set: a set of base names all carrying the
/// same index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformSet {
    pub names: BTreeSet<String>,
    pub index: Index,
}

impl UniformSet {
    pub fn new(names: impl IntoIterator<Item = impl Into<String>>, index: Index) -> Self {
        UniformSet { names: names.into_iter().map(Into::into).collect(), index }
    }

    pub fn reindexed(&self, index: Index) -> Self {
        UniformSet { names: self.names.clone(), index }
    }
}

/// Replace each occurrence of a variable of `from` by the variable of `to`
/// with the same base name; variables without a counterpart are left
/// unchanged. With `both_states`, primed occurrences are renamed too,
/// otherwise only current-state occurrences are.
pub fn rename(f: &Expr, from: &UniformSet, to: &UniformSet, both_states: bool) -> Expr {
    f.map_vars(&mut |v| {
        if v.index == from.index && (both_states || !v.primed) && from.names.contains(&v.name) && to.names.contains(&v.name) {
            Var { name: v.name.clone(), index: to.index, primed: v.primed }
        } else {
            v.clone()
        }
    })
}
