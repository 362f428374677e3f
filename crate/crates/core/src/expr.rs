//! Expression trees shared by guards, flows, invariants and assignments.
//!
//! Numeric literals are exact rationals end to end; they are only lowered to
//! machine floats inside the simulator. This keeps emitted guards like
//! `t == 0.05` bit-exact.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Exact rational literal value.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne
        )
    }

    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge
            | BinaryOp::Eq
            | BinaryOp::Ne => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
        }
    }
}

/// Arithmetic/boolean expression over model variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Num(Rational),
    Bool(bool),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Result of evaluating an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(Rational),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown variable: {0}")]
    UnknownVar(String),
    #[error("division by zero")]
    DivByZero,
    #[error("type mismatch in expression")]
    TypeMismatch,
}

impl Expr {
    pub fn num_int(n: i64) -> Expr {
        Expr::Num(Rational::from_integer(BigInt::from(n)))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinaryOp::And, l, r)
    }

    pub fn eq(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Eq, l, r)
    }

    /// Conjunction of a list; the empty conjunction is `true`.
    pub fn conjoin(parts: impl IntoIterator<Item = Expr>) -> Expr {
        let mut iter = parts.into_iter();
        match iter.next() {
            None => Expr::Bool(true),
            Some(first) => iter.fold(first, Expr::and),
        }
    }

    /// All variable names referenced by the expression.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Bool(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn references_any(&self, vars: &BTreeSet<String>) -> bool {
        match self {
            Expr::Num(_) | Expr::Bool(_) => false,
            Expr::Var(v) => vars.contains(v),
            Expr::Unary(_, e) => e.references_any(vars),
            Expr::Binary(_, l, r) => l.references_any(vars) || r.references_any(vars),
        }
    }

    /// Parallel substitution of variables by expressions.
    pub fn subst(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Num(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Unary(op, e) => Expr::unary(*op, e.subst(map)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.subst(map), r.subst(map)),
        }
    }

    /// Complement of a boolean expression, kept inside the comparison
    /// fragment: `!(a < b)` becomes `a >= b`, `!(a == b)` becomes
    /// `a < b || a > b`, and conjunction/disjunction dualize.
    pub fn complement(&self) -> Expr {
        match self {
            Expr::Bool(b) => Expr::Bool(!b),
            Expr::Unary(UnaryOp::Not, e) => (**e).clone(),
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.as_ref().clone(), r.as_ref().clone());
                match op {
                    BinaryOp::Lt => Expr::binary(BinaryOp::Ge, l, r),
                    BinaryOp::Le => Expr::binary(BinaryOp::Gt, l, r),
                    BinaryOp::Gt => Expr::binary(BinaryOp::Le, l, r),
                    BinaryOp::Ge => Expr::binary(BinaryOp::Lt, l, r),
                    BinaryOp::Eq => Expr::binary(
                        BinaryOp::Or,
                        Expr::binary(BinaryOp::Lt, l.clone(), r.clone()),
                        Expr::binary(BinaryOp::Gt, l, r),
                    ),
                    BinaryOp::Ne => Expr::binary(BinaryOp::Eq, l, r),
                    BinaryOp::And => Expr::binary(BinaryOp::Or, l.complement(), r.complement()),
                    BinaryOp::Or => Expr::binary(BinaryOp::And, l.complement(), r.complement()),
                    _ => Expr::unary(UnaryOp::Not, self.clone()),
                }
            }
            _ => Expr::unary(UnaryOp::Not, self.clone()),
        }
    }

    /// Normalization: bottom-up constant folding of rational literals plus
    /// flattening of `&&`/`||` chains into left-associated spines with
    /// `true`/`false` units removed. Idempotent.
    pub fn normalize(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Bool(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, e) => {
                let e = e.normalize();
                match (op, &e) {
                    (UnaryOp::Neg, Expr::Num(n)) => Expr::Num(-n.clone()),
                    (UnaryOp::Not, Expr::Bool(b)) => Expr::Bool(!b),
                    _ => Expr::unary(*op, e),
                }
            }
            Expr::Binary(op, _, _) if matches!(op, BinaryOp::And | BinaryOp::Or) => {
                let mut parts = Vec::new();
                self.flatten_bool(*op, &mut parts);
                let unit = *op == BinaryOp::And; // true for &&, false for ||
                let mut kept = Vec::new();
                for p in parts {
                    match p {
                        Expr::Bool(b) if b == unit => {}
                        Expr::Bool(b) => return Expr::Bool(b), // dominating element
                        other => kept.push(other),
                    }
                }
                match kept.len() {
                    0 => Expr::Bool(unit),
                    _ => {
                        let mut iter = kept.into_iter();
                        let first = iter.next().unwrap();
                        iter.fold(first, |acc, e| Expr::binary(*op, acc, e))
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let l = l.normalize();
                let r = r.normalize();
                if let (Expr::Num(a), Expr::Num(b)) = (&l, &r) {
                    match op {
                        BinaryOp::Add => return Expr::Num(a + b),
                        BinaryOp::Sub => return Expr::Num(a - b),
                        BinaryOp::Mul => return Expr::Num(a * b),
                        BinaryOp::Div if !b.is_zero() => return Expr::Num(a / b),
                        BinaryOp::Lt => return Expr::Bool(a < b),
                        BinaryOp::Le => return Expr::Bool(a <= b),
                        BinaryOp::Gt => return Expr::Bool(a > b),
                        BinaryOp::Ge => return Expr::Bool(a >= b),
                        BinaryOp::Eq => return Expr::Bool(a == b),
                        BinaryOp::Ne => return Expr::Bool(a != b),
                        _ => {}
                    }
                }
                Expr::binary(*op, l, r)
            }
        }
    }

    fn flatten_bool(&self, op: BinaryOp, out: &mut Vec<Expr>) {
        match self {
            Expr::Binary(o, l, r) if *o == op => {
                l.flatten_bool(op, out);
                r.flatten_bool(op, out);
            }
            other => out.push(other.normalize()),
        }
    }

    /// Exact evaluation over a rational environment. Used for the discrete
    /// fragment during translation, where every referenced variable has a
    /// known value.
    pub fn eval_rational(&self, env: &BTreeMap<String, Rational>) -> Result<Value, EvalError> {
        match self {
            Expr::Num(n) => Ok(Value::Num(n.clone())),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Var(v) => env
                .get(v)
                .cloned()
                .map(Value::Num)
                .ok_or_else(|| EvalError::UnknownVar(v.clone())),
            Expr::Unary(op, e) => match (op, e.eval_rational(env)?) {
                (UnaryOp::Neg, Value::Num(n)) => Ok(Value::Num(-n)),
                (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                _ => Err(EvalError::TypeMismatch),
            },
            Expr::Binary(op, l, r) => {
                let l = l.eval_rational(env)?;
                let r = r.eval_rational(env)?;
                match (op, l, r) {
                    (BinaryOp::And, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a && b)),
                    (BinaryOp::Or, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a || b)),
                    (op, Value::Num(a), Value::Num(b)) => match op {
                        BinaryOp::Add => Ok(Value::Num(a + b)),
                        BinaryOp::Sub => Ok(Value::Num(a - b)),
                        BinaryOp::Mul => Ok(Value::Num(a * b)),
                        BinaryOp::Div => {
                            if b.is_zero() {
                                Err(EvalError::DivByZero)
                            } else {
                                Ok(Value::Num(a / b))
                            }
                        }
                        BinaryOp::Lt => Ok(Value::Bool(a < b)),
                        BinaryOp::Le => Ok(Value::Bool(a <= b)),
                        BinaryOp::Gt => Ok(Value::Bool(a > b)),
                        BinaryOp::Ge => Ok(Value::Bool(a >= b)),
                        BinaryOp::Eq => Ok(Value::Bool(a == b)),
                        BinaryOp::Ne => Ok(Value::Bool(a != b)),
                        _ => Err(EvalError::TypeMismatch),
                    },
                    _ => Err(EvalError::TypeMismatch),
                }
            }
        }
    }

    /// Numeric evaluation over an f64 environment (simulator side).
    /// Division by zero follows IEEE semantics.
    pub fn eval_f64(&self, env: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(n) => Ok(rational_to_f64(n)),
            Expr::Bool(_) => Err(EvalError::TypeMismatch),
            Expr::Var(v) => env
                .get(v)
                .copied()
                .ok_or_else(|| EvalError::UnknownVar(v.clone())),
            Expr::Unary(UnaryOp::Neg, e) => Ok(-e.eval_f64(env)?),
            Expr::Unary(UnaryOp::Not, _) => Err(EvalError::TypeMismatch),
            Expr::Binary(op, l, r) => {
                let a = l.eval_f64(env)?;
                let b = r.eval_f64(env)?;
                match op {
                    BinaryOp::Add => Ok(a + b),
                    BinaryOp::Sub => Ok(a - b),
                    BinaryOp::Mul => Ok(a * b),
                    BinaryOp::Div => Ok(a / b),
                    _ => Err(EvalError::TypeMismatch),
                }
            }
        }
    }

    /// Boolean evaluation with a tolerance applied to equality atoms:
    /// `a == b` holds when `|a - b| <= tol`, `a != b` when `|a - b| > tol`.
    pub fn eval_pred(&self, env: &BTreeMap<String, f64>, tol: f64) -> Result<bool, EvalError> {
        match self {
            Expr::Bool(b) => Ok(*b),
            Expr::Unary(UnaryOp::Not, e) => Ok(!e.eval_pred(env, tol)?),
            Expr::Binary(BinaryOp::And, l, r) => Ok(l.eval_pred(env, tol)? && r.eval_pred(env, tol)?),
            Expr::Binary(BinaryOp::Or, l, r) => Ok(l.eval_pred(env, tol)? || r.eval_pred(env, tol)?),
            Expr::Binary(op, l, r) if op.is_comparison() => {
                let a = l.eval_f64(env)?;
                let b = r.eval_f64(env)?;
                Ok(match op {
                    BinaryOp::Lt => a < b,
                    BinaryOp::Le => a <= b,
                    BinaryOp::Gt => a > b,
                    BinaryOp::Ge => a >= b,
                    BinaryOp::Eq => (a - b).abs() <= tol,
                    BinaryOp::Ne => (a - b).abs() > tol,
                    _ => unreachable!(),
                })
            }
            _ => Err(EvalError::TypeMismatch),
        }
    }

    /// Subexpressions SpaceEx cannot handle: products of two variable-bearing
    /// operands and divisions by a variable-bearing operand.
    pub fn nonlinear_parts(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        self.collect_nonlinear(&mut out);
        out
    }

    fn collect_nonlinear(&self, out: &mut Vec<Expr>) {
        match self {
            Expr::Num(_) | Expr::Bool(_) | Expr::Var(_) => {}
            Expr::Unary(_, e) => e.collect_nonlinear(out),
            Expr::Binary(op, l, r) => {
                let var_l = !l.vars().is_empty();
                let var_r = !r.vars().is_empty();
                match op {
                    BinaryOp::Mul if var_l && var_r => out.push(self.clone()),
                    BinaryOp::Div if var_r => out.push(self.clone()),
                    _ => {}
                }
                l.collect_nonlinear(out);
                r.collect_nonlinear(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(n) if n.is_negative() => 6,
            Expr::Num(_) | Expr::Bool(_) | Expr::Var(_) => 7,
            Expr::Unary(..) => 6,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8, right_operand: bool) -> fmt::Result {
        let prec = self.precedence();
        let needs_parens = prec < parent || (prec == parent && right_operand);
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(n) => write!(f, "{}", format_rational(n))?,
            Expr::Bool(b) => write!(f, "{}", b)?,
            Expr::Var(v) => write!(f, "{}", v)?,
            Expr::Unary(op, e) => {
                match op {
                    UnaryOp::Neg => write!(f, "-")?,
                    UnaryOp::Not => write!(f, "!")?,
                }
                e.fmt_prec(f, 6, false)?;
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                l.fmt_prec(f, p, false)?;
                // Multiplicative operators print tight: `0.1*t`, `x/2`.
                if matches!(op, BinaryOp::Mul | BinaryOp::Div) {
                    write!(f, "{}", op.symbol())?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                // Comparisons are non-associative; -, / are left-associative.
                let strict_right = matches!(
                    op,
                    BinaryOp::Sub | BinaryOp::Div
                ) || op.is_comparison();
                r.fmt_prec(f, p, strict_right)?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0, false)
    }
}

/// Render a rational: integers plainly, terminating decimals in decimal
/// notation (`0.05`, never `5e-2`), everything else as a fraction `p/q`.
pub fn format_rational(r: &Rational) -> String {
    let denom = r.denom();
    if denom.is_one() {
        return r.numer().to_string();
    }
    // Terminating decimal iff the denominator is 2^a * 5^b.
    let mut d = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut pow2 = 0u32;
    let mut pow5 = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        pow2 += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        pow5 += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = pow2.max(pow5);
    let scale = BigInt::from(10).pow(digits);
    let scaled = (r.numer() * &scale) / denom;
    let negative = scaled.is_negative();
    let abs = scaled.magnitude().to_string();
    let abs = if abs.len() <= digits as usize {
        format!("{}{}", "0".repeat(digits as usize + 1 - abs.len()), abs)
    } else {
        abs
    };
    let (int_part, frac_part) = abs.split_at(abs.len() - digits as usize);
    let sign = if negative { "-" } else { "" };
    format!("{}{}.{}", sign, int_part, frac_part)
}

/// Best-effort f64 view of an exact rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parse a decimal literal (`60`, `0.05`, `12.`) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    Some(Rational::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(text: &str) -> Rational {
        parse_decimal(text).unwrap()
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(format_rational(&r("60")), "60");
        assert_eq!(format_rational(&r("0.05")), "0.05");
        assert_eq!(format_rational(&r("0.1")), "0.1");
        assert_eq!(format_rational(&(-r("0.25"))), "-0.25");
        let third = Rational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(format_rational(&third), "1/3");
    }

    #[test]
    fn display_respects_precedence() {
        // 4 - 0.1*t
        let e = Expr::binary(
            BinaryOp::Sub,
            Expr::num_int(4),
            Expr::binary(BinaryOp::Mul, Expr::Num(r("0.1")), Expr::var("t")),
        );
        assert_eq!(e.to_string(), "4 - 0.1*t");
        let e = Expr::binary(
            BinaryOp::Mul,
            Expr::binary(BinaryOp::Add, Expr::var("a"), Expr::var("b")),
            Expr::num_int(2),
        );
        assert_eq!(e.to_string(), "(a + b)*2");
        let e = Expr::binary(
            BinaryOp::Sub,
            Expr::var("a"),
            Expr::binary(BinaryOp::Sub, Expr::var("b"), Expr::var("c")),
        );
        assert_eq!(e.to_string(), "a - (b - c)");
    }

    #[test]
    fn complement_table() {
        let a = Expr::var("a");
        let b = Expr::var("b");
        let lt = Expr::binary(BinaryOp::Lt, a.clone(), b.clone());
        assert_eq!(lt.complement(), Expr::binary(BinaryOp::Ge, a.clone(), b.clone()));
        let eq = Expr::binary(BinaryOp::Eq, a.clone(), b.clone());
        assert_eq!(
            eq.complement(),
            Expr::binary(
                BinaryOp::Or,
                Expr::binary(BinaryOp::Lt, a.clone(), b.clone()),
                Expr::binary(BinaryOp::Gt, a, b),
            )
        );
    }

    #[test]
    fn complement_is_exclusive_and_exhaustive() {
        // For any valuation exactly one of (g, complement(g)) holds.
        let g = Expr::binary(BinaryOp::Le, Expr::var("x"), Expr::Num(r("0.2")));
        let not_g = g.complement();
        for x in [-1.0, 0.0, 0.19999, 0.2, 0.2000001, 3.0] {
            let env = BTreeMap::from([("x".to_string(), x)]);
            let a = g.eval_pred(&env, 0.0).unwrap();
            let b = not_g.eval_pred(&env, 0.0).unwrap();
            assert!(a ^ b, "x = {}", x);
        }
    }

    #[test]
    fn normalize_folds_and_flattens() {
        // (1 + 2) * x  ->  3 * x
        let e = Expr::binary(
            BinaryOp::Mul,
            Expr::binary(BinaryOp::Add, Expr::num_int(1), Expr::num_int(2)),
            Expr::var("x"),
        );
        assert_eq!(
            e.normalize(),
            Expr::binary(BinaryOp::Mul, Expr::num_int(3), Expr::var("x"))
        );
        // true && (a && true) -> a
        let e = Expr::and(
            Expr::Bool(true),
            Expr::and(Expr::var("a"), Expr::Bool(true)),
        );
        assert_eq!(e.normalize(), Expr::var("a"));
        // 1 == 2 -> false
        let e = Expr::eq(Expr::num_int(1), Expr::num_int(2));
        assert_eq!(e.normalize(), Expr::Bool(false));
    }

    #[test]
    fn normalize_idempotent_on_samples() {
        let samples = [
            Expr::binary(
                BinaryOp::Sub,
                Expr::num_int(4),
                Expr::binary(BinaryOp::Mul, Expr::Num(r("0.1")), Expr::var("t")),
            ),
            Expr::conjoin([
                Expr::binary(BinaryOp::Le, Expr::var("t"), Expr::num_int(22)),
                Expr::Bool(true),
                Expr::binary(BinaryOp::Ge, Expr::var("u"), Expr::num_int(18)),
            ]),
            Expr::binary(BinaryOp::Div, Expr::num_int(1), Expr::num_int(0)),
        ];
        for e in samples {
            let once = e.normalize();
            assert_eq!(once.normalize(), once);
        }
    }

    #[test]
    fn eval_rational_div_by_zero() {
        let e = Expr::binary(BinaryOp::Div, Expr::num_int(1), Expr::var("x"));
        let env = BTreeMap::from([("x".to_string(), Rational::zero())]);
        assert_eq!(e.eval_rational(&env), Err(EvalError::DivByZero));
    }
}
