//! SMT-LIB2 text protocol over a child process.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use super::{Projection, SatResult};
use crate::error::SolverError;
use crate::logic::eval::{Model, Value};
use crate::logic::formula::{CmpOp, Expr, Signature, Sort, Var};

pub const DEFAULT_SOLVER: &str = "z3";

// Grace period on top of the solver's own timeout before the process is
// considered hung.
const WATCHDOG_SLACK: Duration = Duration::from_secs(5);

pub struct SmtProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    timeout: Duration,
    alive: bool,
}

impl Drop for SmtProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn solver_args(path: &Path) -> &'static [&'static str] {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
    if name.starts_with("cvc") {
        &["--lang=smt2", "--incremental", "--produce-models"]
    } else if name.starts_with("z3") {
        &["-in", "-smt2"]
    } else {
        &[]
    }
}

impl SmtProcess {
    pub fn spawn(path: &Path, timeout: Duration) -> Result<Self, SolverError> {
        let mut child = Command::new(path)
            .args(solver_args(path))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SolverError::Spawn { path: path.display().to_string(), source })?;
        let stdin = child.stdin.take().unwrap();
        let stdout = child.stdout.take().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(SmtProcess { child, stdin, lines: rx, timeout, alive: true })
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    fn send(&mut self, text: &str) -> Result<(), SolverError> {
        log::trace!("smt> {text}");
        self.stdin.write_all(text.as_bytes())?;
        self.stdin.write_all(b"\n")?;
        self.stdin.flush()?;
        Ok(())
    }

    /// Next complete response (balanced s-expression or bare atom), or
    /// None on timeout.
    fn response(&mut self) -> Result<Option<String>, SolverError> {
        let mut buf = String::new();
        loop {
            match self.lines.recv_timeout(self.timeout + WATCHDOG_SLACK) {
                Ok(line) => {
                    if line.trim().is_empty() && buf.is_empty() {
                        continue;
                    }
                    buf.push_str(&line);
                    buf.push('\n');
                    if balanced(&buf) {
                        let r = buf.trim().to_string();
                        if r.starts_with("(error") {
                            return Err(SolverError::Protocol(r));
                        }
                        return Ok(Some(r));
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.alive = false;
                    let _ = self.child.kill();
                    return Ok(None);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.alive = false;
                    return Err(SolverError::Protocol("solver exited".into()));
                }
            }
        }
    }

    fn start(
        &mut self,
        f: &Expr,
        sig: &Signature,
        int_bound: Option<i64>,
        extra: &[(String, &Expr)],
    ) -> Result<Vec<(Var, Sort)>, SolverError> {
        let vars: Vec<(Var, Sort)> = f
            .vars()
            .into_iter()
            .chain(extra.iter().flat_map(|(_, e)| e.vars()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|v| {
                let s = sig.sort_of(&v.name).ok_or_else(|| SolverError::Protocol(format!("no sort for variable `{v}`")))?;
                Ok((v, s))
            })
            .collect::<Result<_, SolverError>>()?;
        let mut script = String::new();
        script.push_str("(reset)\n(set-option :produce-models true)\n");
        writeln!(script, "(set-option :timeout {})", self.timeout.as_millis()).unwrap();
        script.push_str("(set-logic QF_LIA)\n");
        for (v, s) in &vars {
            let sym = symbol(v);
            match s {
                Sort::Bool => writeln!(script, "(declare-fun {sym} () Bool)").unwrap(),
                Sort::Int => {
                    writeln!(script, "(declare-fun {sym} () Int)").unwrap();
                    if let Some(b) = int_bound {
                        writeln!(script, "(assert (and (<= 0 {sym}) (<= {sym} {b})))").unwrap();
                    }
                }
                Sort::Loc => {
                    writeln!(script, "(declare-fun {sym} () Int)").unwrap();
                    writeln!(script, "(assert (and (<= 0 {sym}) (< {sym} {})))", sig.locations.len().max(1)).unwrap();
                }
            }
        }
        for (name, e) in extra {
            writeln!(script, "(declare-fun |{name}| () Bool)").unwrap();
            writeln!(script, "(assert (= |{name}| {}))", encode(e, sig)?).unwrap();
        }
        writeln!(script, "(assert {})", encode(f, sig)?).unwrap();
        self.send(&script)?;
        Ok(vars)
    }

    fn check(&mut self) -> Result<Option<String>, SolverError> {
        self.send("(check-sat)")?;
        self.response()
    }

    fn model(&mut self, vars: &[(Var, Sort)], sig: &Signature) -> Result<Model, SolverError> {
        if vars.is_empty() {
            return Ok(Model::new());
        }
        let syms: Vec<String> = vars.iter().map(|(v, _)| symbol(v)).collect();
        self.send(&format!("(get-value ({}))", syms.join(" ")))?;
        let resp = self.response()?.ok_or_else(|| SolverError::Protocol("timeout in get-value".into()))?;
        let pairs = parse_values(&resp)?;
        let mut m = Model::new();
        for ((v, s), (_, raw)) in vars.iter().zip(pairs) {
            m.insert(v.clone(), decode(&raw, *s, sig)?);
        }
        Ok(m)
    }

    pub fn check_sat(&mut self, f: &Expr, sig: &Signature, int_bound: Option<i64>) -> Result<SatResult, SolverError> {
        let vars = self.start(f, sig, int_bound, &[])?;
        match self.check()?.as_deref() {
            Some("sat") => Ok(SatResult::Sat(self.model(&vars, sig)?)),
            Some("unsat") => Ok(SatResult::Unsat),
            Some("unknown") | None => Ok(SatResult::Unknown),
            Some(other) => Err(SolverError::Protocol(format!("unexpected check-sat answer `{other}`"))),
        }
    }

    pub fn project(
        &mut self,
        f: &Expr,
        sig: &Signature,
        proj: &[Expr],
        int_bound: Option<i64>,
    ) -> Result<Projection, SolverError> {
        let names: Vec<String> = (0..proj.len()).map(|i| format!("#proj{i}")).collect();
        let extra: Vec<(String, &Expr)> = names.iter().cloned().zip(proj.iter()).collect();
        let vars = self.start(f, sig, int_bound, &extra)?;
        let mut out = Projection::default();
        loop {
            match self.check()?.as_deref() {
                Some("sat") => {}
                Some("unsat") => {
                    out.complete = true;
                    return Ok(out);
                }
                Some("unknown") | None => return Ok(out),
                Some(other) => return Err(SolverError::Protocol(format!("unexpected check-sat answer `{other}`"))),
            }
            let model = self.model(&vars, sig)?;
            let bits = if names.is_empty() {
                vec![]
            } else {
                let q: Vec<String> = names.iter().map(|n| format!("|{n}|")).collect();
                self.send(&format!("(get-value ({}))", q.join(" ")))?;
                let resp = self.response()?.ok_or_else(|| SolverError::Protocol("timeout in get-value".into()))?;
                parse_values(&resp)?
                    .into_iter()
                    .map(|(_, v)| match v.as_str() {
                        "true" => Ok(true),
                        "false" => Ok(false),
                        o => Err(SolverError::Protocol(format!("expected Boolean, got `{o}`"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            if names.is_empty() {
                out.solutions.push((bits, model));
                out.complete = true;
                return Ok(out);
            }
            let block: Vec<String> =
                names.iter().zip(&bits).map(|(n, b)| if *b { format!("(not |{n}|)") } else { format!("|{n}|") }).collect();
            self.send(&format!("(assert (or {}))", block.join(" ")))?;
            out.solutions.push((bits, model));
        }
    }
}

fn symbol(v: &Var) -> String {
    format!("|{v}|")
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    let mut quoted = false;
    let mut string = false;
    for c in s.chars() {
        match c {
            '|' if !string => quoted = !quoted,
            '"' if !quoted => string = !string,
            '(' if !quoted && !string => depth += 1,
            ')' if !quoted && !string => depth -= 1,
            _ => {}
        }
    }
    depth <= 0 && !quoted && !string
}

fn encode(e: &Expr, sig: &Signature) -> Result<String, SolverError> {
    let list = |op: &str, xs: &[Expr]| -> Result<String, SolverError> {
        let parts = xs.iter().map(|x| encode(x, sig)).collect::<Result<Vec<_>, _>>()?;
        Ok(format!("({op} {})", parts.join(" ")))
    };
    Ok(match e {
        Expr::Bool(b) => b.to_string(),
        Expr::Int(i) if *i < 0 => format!("(- {})", i.unsigned_abs()),
        Expr::Int(i) => i.to_string(),
        Expr::Loc(l) => {
            sig.location_index(l).ok_or_else(|| SolverError::Protocol(format!("unknown location `{l}`")))?.to_string()
        }
        Expr::Var(v) => symbol(v),
        Expr::Add(a, b) => format!("(+ {} {})", encode(a, sig)?, encode(b, sig)?),
        Expr::Sub(a, b) => format!("(- {} {})", encode(a, sig)?, encode(b, sig)?),
        Expr::Scale(k, a) => format!("(* {} {})", encode(&Expr::Int(*k), sig)?, encode(a, sig)?),
        Expr::Cmp(op, a, b) => {
            let o = match op {
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            format!("({o} {} {})", encode(a, sig)?, encode(b, sig)?)
        }
        Expr::Not(a) => format!("(not {})", encode(a, sig)?),
        Expr::And(xs) if xs.is_empty() => "true".into(),
        Expr::Or(xs) if xs.is_empty() => "false".into(),
        Expr::And(xs) if xs.len() == 1 => encode(&xs[0], sig)?,
        Expr::Or(xs) if xs.len() == 1 => encode(&xs[0], sig)?,
        Expr::And(xs) => list("and", xs)?,
        Expr::Or(xs) => list("or", xs)?,
        Expr::Implies(a, b) => format!("(=> {} {})", encode(a, sig)?, encode(b, sig)?),
        Expr::Iff(a, b) => format!("(= {} {})", encode(a, sig)?, encode(b, sig)?),
    })
}

#[derive(Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexp(s: &str) -> Result<Sexp, SolverError> {
    fn go(cs: &[char], i: &mut usize) -> Result<Sexp, SolverError> {
        while *i < cs.len() && cs[*i].is_whitespace() {
            *i += 1;
        }
        if *i >= cs.len() {
            return Err(SolverError::Protocol("truncated s-expression".into()));
        }
        if cs[*i] == '(' {
            *i += 1;
            let mut items = Vec::new();
            loop {
                while *i < cs.len() && cs[*i].is_whitespace() {
                    *i += 1;
                }
                if *i >= cs.len() {
                    return Err(SolverError::Protocol("unbalanced s-expression".into()));
                }
                if cs[*i] == ')' {
                    *i += 1;
                    return Ok(Sexp::List(items));
                }
                items.push(go(cs, i)?);
            }
        }
        let start = *i;
        if cs[*i] == '|' {
            *i += 1;
            while *i < cs.len() && cs[*i] != '|' {
                *i += 1;
            }
            *i += 1;
        } else {
            while *i < cs.len() && !cs[*i].is_whitespace() && cs[*i] != '(' && cs[*i] != ')' {
                *i += 1;
            }
        }
        Ok(Sexp::Atom(cs[start..(*i).min(cs.len())].iter().collect()))
    }
    let cs: Vec<char> = s.chars().collect();
    go(&cs, &mut 0)
}

fn atom_value(s: &Sexp) -> Result<String, SolverError> {
    match s {
        Sexp::Atom(a) => Ok(a.clone()),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(m), Sexp::Atom(n)] if m == "-" => Ok(format!("-{n}")),
            _ => Err(SolverError::Protocol(format!("unsupported value {s:?}"))),
        },
    }
}

fn parse_values(resp: &str) -> Result<Vec<(String, String)>, SolverError> {
    match parse_sexp(resp)? {
        Sexp::List(pairs) => pairs
            .iter()
            .map(|p| match p {
                Sexp::List(kv) if kv.len() == 2 => Ok((atom_value(&kv[0])?, atom_value(&kv[1])?)),
                _ => Err(SolverError::Protocol(format!("bad get-value entry in `{resp}`"))),
            })
            .collect(),
        Sexp::Atom(a) => Err(SolverError::Protocol(format!("unexpected solver output `{a}`"))),
    }
}

fn decode(raw: &str, sort: Sort, sig: &Signature) -> Result<Value, SolverError> {
    let bad = || SolverError::Protocol(format!("cannot read value `{raw}` as {sort}"));
    match sort {
        Sort::Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(bad()),
        },
        Sort::Int => raw.parse().map(Value::Int).map_err(|_| bad()),
        Sort::Loc => {
            let i: usize = raw.parse().map_err(|_| bad())?;
            sig.locations.get(i).cloned().map(Value::Loc).ok_or_else(bad)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sexp_values() {
        let v = parse_values("((|l@1'| (- 3))\n (|#proj0| true) (x 4))").unwrap();
        assert_eq!(v, [("|l@1'|".into(), "-3".into()), ("|#proj0|".into(), "true".into()), ("x".into(), "4".into())]);
    }

    #[test]
    fn balance_ignores_quoted_parens() {
        assert!(!balanced("((|a(| 1)"));
        assert!(balanced("((|a(| 1))"));
        assert!(balanced("sat"));
    }

    #[test]
    fn encoding() {
        let sig = Signature { locations: vec!["a".into(), "b".into()], ..Default::default() };
        let e = Expr::and([
            Expr::eq(Expr::var(Var::base("pc")), Expr::Loc("b".into())),
            Expr::cmp(CmpOp::Ne, Expr::Int(-2), Expr::Scale(3, Box::new(Expr::var(Var::passive("x").primed())))),
        ]);
        assert_eq!(encode(&e, &sig).unwrap(), "(and (= |pc| 1) (distinct (- 2) (* 3 |x@P'|)))");
    }
}
