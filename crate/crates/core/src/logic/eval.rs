//! Ground evaluation of formulas.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::{Expr, Var};
use crate::error::EvalError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Loc(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Loc(l) => f.write_str(l),
        }
    }
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }
}

/// Variable assignment.
pub type Model = BTreeMap<Var, Value>;

/// Evaluate a term (integer, Boolean or location valued).
pub fn eval_term(e: &Expr, m: &Model) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Int(i) => Value::Int(*i),
        Expr::Loc(l) => Value::Loc(l.clone()),
        Expr::Var(v) => m.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.to_string()))?,
        Expr::Add(a, b) => Value::Int(int(a, m)? + int(b, m)?),
        Expr::Sub(a, b) => Value::Int(int(a, m)? - int(b, m)?),
        Expr::Scale(k, a) => Value::Int(k * int(a, m)?),
        _ => Value::Bool(eval_formula(e, m)?),
    })
}

fn int(e: &Expr, m: &Model) -> Result<i64, EvalError> {
    match eval_term(e, m)? {
        Value::Int(i) => Ok(i),
        other => Err(EvalError::Sort(format!("expected int, got {other} in `{e}`"))),
    }
}

/// Evaluate a formula under an assignment covering its free variables.
pub fn eval_formula(f: &Expr, m: &Model) -> Result<bool, EvalError> {
    match f {
        Expr::Bool(b) => Ok(*b),
        Expr::Var(_) => match eval_term(f, m)? {
            Value::Bool(b) => Ok(b),
            other => Err(EvalError::Sort(format!("expected bool, got {other} in `{f}`"))),
        },
        Expr::Cmp(op, a, b) => {
            let (x, y) = (eval_term(a, m)?, eval_term(b, m)?);
            match (&x, &y) {
                (Value::Int(i), Value::Int(j)) => Ok(op.holds(*i, *j)),
                _ => {
                    use super::formula::CmpOp;
                    let same_sort = std::mem::discriminant(&x) == std::mem::discriminant(&y);
                    match op {
                        CmpOp::Eq if same_sort => Ok(x == y),
                        CmpOp::Ne if same_sort => Ok(x != y),
                        _ => Err(EvalError::Sort(format!("cannot compare {x} and {y} in `{f}`"))),
                    }
                }
            }
        }
        Expr::Not(a) => Ok(!eval_formula(a, m)?),
        Expr::And(xs) => {
            for x in xs {
                if !eval_formula(x, m)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Expr::Or(xs) => {
            for x in xs {
                if eval_formula(x, m)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Expr::Implies(a, b) => Ok(!eval_formula(a, m)? || eval_formula(b, m)?),
        Expr::Iff(a, b) => Ok(eval_formula(a, m)? == eval_formula(b, m)?),
        Expr::Int(_) | Expr::Loc(_) | Expr::Add(..) | Expr::Sub(..) | Expr::Scale(..) => {
            Err(EvalError::Sort(format!("`{f}` is not a formula")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::{CmpOp, Var};

    #[test]
    fn ground_comparison() {
        let f = Expr::cmp(CmpOp::Le, Expr::Int(4), Expr::Int(4));
        assert!(eval_formula(&f, &Model::new()).unwrap());
    }

    #[test]
    fn lowered_max_predicate_by_hand() {
        // t > max(l, l@P) lowered to t > l && t > l@P, at t=3, l=1, l@P=2
        let t = Expr::var(Var::base("t"));
        let f = Expr::and([
            Expr::cmp(CmpOp::Gt, t.clone(), Expr::var(Var::base("l"))),
            Expr::cmp(CmpOp::Gt, t, Expr::var(Var::passive("l"))),
        ]);
        let m: Model = [(Var::base("t"), Value::Int(3)), (Var::base("l"), Value::Int(1)), (Var::passive("l"), Value::Int(2))]
            .into_iter()
            .collect();
        assert!(eval_formula(&f, &m).unwrap());
    }

    #[test]
    fn location_equality() {
        let f = Expr::eq(Expr::var(Var::base("pc")), Expr::Loc("l3".into()));
        let m: Model = [(Var::base("pc"), Value::Loc("l2".into()))].into_iter().collect();
        assert!(!eval_formula(&f, &m).unwrap());
    }

    #[test]
    fn missing_binding_is_an_error() {
        let f = Expr::var(Var::base("x"));
        assert!(matches!(eval_formula(&f, &Model::new()), Err(EvalError::Unbound(_))));
    }
}
