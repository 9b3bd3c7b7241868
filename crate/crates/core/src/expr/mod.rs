//! Arithmetic expression trees with exact symbolic differentiation.
//!
//! Hamiltonians, potentials, and metric entries are declared as strings,
//! parsed against a declared coordinate alphabet, and differentiated
//! symbolically so that every partial derivative used by the flow
//! generators is exact rather than finite-differenced.
//!
//! The grammar is documented in `docs/grammar.md`. Precedence is
//! `^` > unary `-` > `*`,`/` > `+`,`-`; binary operators of equal
//! precedence associate left, `^` associates right, and the exponent of
//! `^` must fold to a constant.

mod parser;

pub use parser::{parse, ParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Unary operations. `Neg` comes from the `-` sign; the rest are the
/// built-in function set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

/// Expression AST. Trees are immutable after construction; every
/// manipulation returns a new tree.
///
/// Variables and parameters are distinguished at parse time by the
/// declared [`Alphabet`]: differentiation treats parameters as constants.
/// The exponent of `^` is stored as an already-folded constant.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Param(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

/// Name-to-value map used by [`Expr::eval`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings(BTreeMap<String, f64>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Bindings {
    fn from_iter<T: IntoIterator<Item = (S, f64)>>(iter: T) -> Self {
        Bindings(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Declared names an expression may reference: coordinate variables
/// (subject to differentiation) and parameters (held constant).
#[derive(Debug, Clone, Default)]
pub struct Alphabet {
    variables: Vec<String>,
    parameters: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        variables: impl IntoIterator<Item = S>,
        parameters: impl IntoIterator<Item = S>,
    ) -> Self {
        Alphabet {
            variables: variables.into_iter().map(Into::into).collect(),
            parameters: parameters.into_iter().map(Into::into).collect(),
        }
    }

    /// Coordinate alphabet of the one-jet bundle in dimension `n`:
    /// `q1..qn, p1..pn, z, t`.
    pub fn jet(n: usize) -> Self {
        let mut variables = Vec::with_capacity(2 * n + 2);
        for i in 1..=n {
            variables.push(format!("q{i}"));
        }
        for i in 1..=n {
            variables.push(format!("p{i}"));
        }
        variables.push("z".to_string());
        variables.push("t".to_string());
        Alphabet {
            variables,
            parameters: Vec::new(),
        }
    }

    pub fn with_parameters<S: Into<String>>(mut self, params: impl IntoIterator<Item = S>) -> Self {
        self.parameters.extend(params.into_iter().map(Into::into));
        self
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn is_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v == name)
    }

    pub fn is_parameter(&self, name: &str) -> bool {
        self.parameters.iter().any(|v| v == name)
    }
}

/// Evaluation failure: an unbound name or a real-domain violation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn sin(self) -> Expr {
        Expr::Unary(UnaryOp::Sin, Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Unary(UnaryOp::Cos, Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Unary(UnaryOp::Exp, Box::new(self))
    }

    pub fn sqrt(self) -> Expr {
        Expr::Unary(UnaryOp::Sqrt, Box::new(self))
    }

    pub fn pow(self, exponent: f64) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    /// IEEE double-precision evaluation. Deterministic for a fixed tree
    /// shape; domain violations (division by zero, square root of a
    /// negative) are reported instead of silently producing NaN.
    pub fn eval(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(name) | Expr::Param(name) => bindings
                .get(name)
                .ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Unary(op, e) => {
                let v = e.eval(bindings)?;
                match op {
                    UnaryOp::Neg => Ok(-v),
                    UnaryOp::Sin => Ok(v.sin()),
                    UnaryOp::Cos => Ok(v.cos()),
                    UnaryOp::Exp => Ok(v.exp()),
                    UnaryOp::Sqrt => {
                        if v < 0.0 {
                            Err(EvalError::Domain(format!("sqrt of negative value {v}")))
                        } else {
                            Ok(v.sqrt())
                        }
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval(bindings)?;
                let y = b.eval(bindings)?;
                match op {
                    BinaryOp::Add => Ok(x + y),
                    BinaryOp::Sub => Ok(x - y),
                    BinaryOp::Mul => Ok(x * y),
                    BinaryOp::Div => {
                        if y == 0.0 {
                            Err(EvalError::Domain("division by zero".to_string()))
                        } else {
                            Ok(x / y)
                        }
                    }
                }
            }
            Expr::Pow(base, c) => {
                let b = base.eval(bindings)?;
                if b == 0.0 && *c < 0.0 {
                    return Err(EvalError::Domain("zero raised to a negative power".into()));
                }
                if b < 0.0 && c.fract() != 0.0 {
                    return Err(EvalError::Domain(format!(
                        "negative base {b} raised to non-integer power {c}"
                    )));
                }
                Ok(pow_const(b, *c))
            }
        }
    }

    /// Exact symbolic partial derivative with respect to `var`.
    /// Parameters differentiate to zero.
    pub fn diff(&self, var: &str) -> Expr {
        self.diff_raw(var).simplify()
    }

    fn diff_raw(&self, var: &str) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Var(name) => {
                if name == var {
                    Expr::Const(1.0)
                } else {
                    Expr::Const(0.0)
                }
            }
            Expr::Unary(op, e) => {
                let u = e.as_ref().clone();
                let du = e.diff_raw(var);
                match op {
                    UnaryOp::Neg => -du,
                    UnaryOp::Sin => u.cos() * du,
                    UnaryOp::Cos => -(u.sin() * du),
                    UnaryOp::Exp => u.exp() * du,
                    // d sqrt(u) = u' / (2 sqrt(u))
                    UnaryOp::Sqrt => du / (Expr::Const(2.0) * u.sqrt()),
                }
            }
            Expr::Binary(op, a, b) => {
                let da = a.diff_raw(var);
                let db = b.diff_raw(var);
                match op {
                    BinaryOp::Add => da + db,
                    BinaryOp::Sub => da - db,
                    BinaryOp::Mul => da * b.as_ref().clone() + a.as_ref().clone() * db,
                    // (a/b)' = (a'b - ab') / b^2
                    BinaryOp::Div => {
                        (da * b.as_ref().clone() - a.as_ref().clone() * db)
                            / b.as_ref().clone().pow(2.0)
                    }
                }
            }
            // d u^c = c u^(c-1) u'
            Expr::Pow(base, c) => {
                let du = base.diff_raw(var);
                Expr::Const(*c) * base.as_ref().clone().pow(c - 1.0) * du
            }
        }
    }

    /// Constant folding plus 0/1 identity elimination. The result
    /// evaluates to the same value as the input (up to floating-point
    /// associativity).
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => self.clone(),
            Expr::Unary(op, e) => {
                let e = e.simplify();
                match (op, &e) {
                    (UnaryOp::Neg, Expr::Const(c)) => Expr::Const(-c),
                    (UnaryOp::Neg, Expr::Unary(UnaryOp::Neg, inner)) => inner.as_ref().clone(),
                    (UnaryOp::Sin, Expr::Const(c)) => {
                        fold_or(c.sin(), Expr::Unary(*op, Box::new(e.clone())))
                    }
                    (UnaryOp::Cos, Expr::Const(c)) => {
                        fold_or(c.cos(), Expr::Unary(*op, Box::new(e.clone())))
                    }
                    (UnaryOp::Exp, Expr::Const(c)) => {
                        fold_or(c.exp(), Expr::Unary(*op, Box::new(e.clone())))
                    }
                    (UnaryOp::Sqrt, Expr::Const(c)) if *c >= 0.0 => {
                        fold_or(c.sqrt(), Expr::Unary(*op, Box::new(e.clone())))
                    }
                    _ => Expr::Unary(*op, Box::new(e)),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.simplify();
                let b = b.simplify();
                match op {
                    BinaryOp::Add => match (&a, &b) {
                        (Expr::Const(x), Expr::Const(y)) => fold_or(x + y, a.clone() + b.clone()),
                        (Expr::Const(z), _) if *z == 0.0 => b,
                        (_, Expr::Const(z)) if *z == 0.0 => a,
                        _ => a + b,
                    },
                    BinaryOp::Sub => match (&a, &b) {
                        (Expr::Const(x), Expr::Const(y)) => fold_or(x - y, a.clone() - b.clone()),
                        (_, Expr::Const(z)) if *z == 0.0 => a,
                        (Expr::Const(z), _) if *z == 0.0 => -b,
                        _ => a - b,
                    },
                    BinaryOp::Mul => match (&a, &b) {
                        (Expr::Const(x), Expr::Const(y)) => fold_or(x * y, a.clone() * b.clone()),
                        (Expr::Const(z), _) | (_, Expr::Const(z)) if *z == 0.0 => Expr::Const(0.0),
                        (Expr::Const(one), _) if *one == 1.0 => b,
                        (_, Expr::Const(one)) if *one == 1.0 => a,
                        _ => a * b,
                    },
                    BinaryOp::Div => match (&a, &b) {
                        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => {
                            fold_or(x / y, a.clone() / b.clone())
                        }
                        (_, Expr::Const(one)) if *one == 1.0 => a,
                        _ => a / b,
                    },
                }
            }
            Expr::Pow(base, c) => {
                let base = base.simplify();
                if *c == 0.0 {
                    Expr::Const(1.0)
                } else if *c == 1.0 {
                    base
                } else if let Expr::Const(x) = base {
                    fold_or(pow_const(x, *c), Expr::Pow(Box::new(base.clone()), *c))
                } else {
                    Expr::Pow(Box::new(base), *c)
                }
            }
        }
    }

    /// Free variable and parameter names, in sorted order.
    pub fn free_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        self.collect_names(&mut names);
        names
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(n) | Expr::Param(n) => {
                out.insert(n.clone());
            }
            Expr::Unary(_, e) => e.collect_names(out),
            Expr::Binary(_, a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Expr::Pow(b, _) => b.collect_names(out),
        }
    }

    /// Variable names only (parameters excluded).
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        self.collect_variables(&mut names);
        names
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) | Expr::Param(_) => {}
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Unary(_, e) => e.collect_variables(out),
            Expr::Binary(_, a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Expr::Pow(b, _) => b.collect_variables(out),
        }
    }

    /// Replaces every parameter reference with its bound value.
    pub fn substitute_params(&self, params: &Bindings) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Param(name) => Expr::Const(
                params
                    .get(name)
                    .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            ),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.substitute_params(params)?)),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute_params(params)?),
                Box::new(b.substitute_params(params)?),
            ),
            Expr::Pow(b, c) => Expr::Pow(Box::new(b.substitute_params(params)?), *c),
        })
    }

    /// Compiles against a slot layout for allocation-light repeated
    /// evaluation. Every free name must appear in `slots`.
    pub fn bind(&self, slots: &BTreeMap<String, usize>) -> Result<BoundExpr, EvalError> {
        Ok(match self {
            Expr::Const(c) => BoundExpr::Const(*c),
            Expr::Var(name) | Expr::Param(name) => BoundExpr::Slot(
                *slots
                    .get(name)
                    .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            ),
            Expr::Unary(op, e) => BoundExpr::Unary(*op, Box::new(e.bind(slots)?)),
            Expr::Binary(op, a, b) => {
                BoundExpr::Binary(*op, Box::new(a.bind(slots)?), Box::new(b.bind(slots)?))
            }
            Expr::Pow(b, c) => BoundExpr::Pow(Box::new(b.bind(slots)?), *c),
        })
    }
}

// Trees compose with the ordinary arithmetic operators.
impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Unary(UnaryOp::Neg, Box::new(self))
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Binary(BinaryOp::Add, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Binary(BinaryOp::Sub, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Binary(BinaryOp::Mul, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Binary(BinaryOp::Div, Box::new(self), Box::new(rhs))
    }
}

/// Integer exponents use `powi` so that small powers like `p1^2` are
/// exact products; everything else goes through `powf`.
fn pow_const(base: f64, c: f64) -> f64 {
    if c.fract() == 0.0 && c.abs() <= 64.0 {
        base.powi(c as i32)
    } else {
        base.powf(c)
    }
}

fn fold_or(value: f64, fallback: Expr) -> Expr {
    if value.is_finite() {
        Expr::Const(value)
    } else {
        fallback
    }
}

/// Expression compiled against a slot layout; evaluation reads values
/// from a flat slice. Domain violations evaluate to NaN here (the
/// checked path is [`Expr::eval`]); monitors and the integrator treat
/// non-finite values as divergence.
#[derive(Debug, Clone)]
pub enum BoundExpr {
    Const(f64),
    Slot(usize),
    Unary(UnaryOp, Box<BoundExpr>),
    Binary(BinaryOp, Box<BoundExpr>, Box<BoundExpr>),
    Pow(Box<BoundExpr>, f64),
}

impl BoundExpr {
    pub fn eval_slots(&self, values: &[f64]) -> f64 {
        match self {
            BoundExpr::Const(c) => *c,
            BoundExpr::Slot(i) => values[*i],
            BoundExpr::Unary(op, e) => {
                let v = e.eval_slots(values);
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Sqrt => v.sqrt(),
                }
            }
            BoundExpr::Binary(op, a, b) => {
                let x = a.eval_slots(values);
                let y = b.eval_slots(values);
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => x / y,
                }
            }
            BoundExpr::Pow(b, c) => pow_const(b.eval_slots(values), *c),
        }
    }
}

// Printing levels: Add/Sub 1, Mul/Div 2, unary minus 3, Pow 4, atoms 5.
// Children are parenthesized whenever the grammar requires it, so the
// printed form re-parses to the same tree shape.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 1,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
        Expr::Unary(UnaryOp::Neg, _) => 3,
        Expr::Pow(_, _) => 4,
        Expr::Const(c) if *c < 0.0 => 3,
        _ => 5,
    }
}

fn fmt_child(e: &Expr, min_level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(e) < min_level {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(n) | Expr::Param(n) => write!(f, "{n}"),
            Expr::Unary(UnaryOp::Neg, e) => {
                write!(f, "-")?;
                fmt_child(e, 3, f)
            }
            Expr::Unary(op, e) => write!(f, "{}({e})", op.name()),
            Expr::Binary(op, a, b) => {
                let lvl = level(self);
                fmt_child(a, lvl, f)?;
                write!(f, " {} ", op.symbol())?;
                // Right operand must sit strictly tighter to preserve
                // left associativity on re-parse.
                fmt_child(b, lvl + 1, f)
            }
            Expr::Pow(base, c) => {
                fmt_child(base, 5, f)?;
                if *c < 0.0 {
                    write!(f, "^({c})")
                } else {
                    write!(f, "^{c}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet1() -> Alphabet {
        Alphabet::jet(1)
    }

    #[test]
    fn parse_honors_precedence() {
        let a = jet1();
        let e = parse("p1^2/2 + q1^2/2", &a).unwrap();
        let expected = Expr::var("p1").pow(2.0) / Expr::constant(2.0)
            + Expr::var("q1").pow(2.0) / Expr::constant(2.0);
        assert_eq!(e, expected);
    }

    #[test]
    fn parse_distinguishes_parameters() {
        let a = jet1().with_parameters(["gamma", "omega", "phi"]);
        let e = parse("gamma*sin(omega*t + phi)", &a).unwrap();
        let expected = Expr::param("gamma")
            * (Expr::param("omega") * Expr::var("t") + Expr::param("phi")).sin();
        assert_eq!(e, expected);
    }

    #[test]
    fn parse_reports_truncated_input() {
        let err = parse("q1 +", &jet1()).unwrap_err();
        assert!(matches!(err, ParseError::UnexpectedEnd { .. }));
    }

    #[test]
    fn eval_spec_examples() {
        let a = jet1();
        let b = Bindings::new().set("p1", 3.0);
        assert_eq!(parse("p1^2/2", &a).unwrap().eval(&b).unwrap(), 4.5);

        let b = Bindings::new().set("t", 0.0);
        assert_eq!(parse("sin(t)", &a).unwrap().eval(&b).unwrap(), 0.0);

        let a2 = Alphabet::new(["q1", "q2"], []);
        let b = Bindings::new().set("q1", 1.0).set("q2", 0.0);
        let err = parse("q1/ q2", &a2).unwrap().eval(&b).unwrap_err();
        assert!(matches!(err, EvalError::Domain(_)));
    }

    #[test]
    fn eval_unbound_name() {
        let e = parse("q1 + p1", &jet1()).unwrap();
        let err = e.eval(&Bindings::new().set("q1", 1.0)).unwrap_err();
        assert_eq!(err, EvalError::Unbound("p1".to_string()));
    }

    #[test]
    fn diff_linear_term_is_coefficient() {
        let a = jet1().with_parameters(["alpha", "delta"]);
        let e = parse("p1^2/2 + alpha*q1^2/2 + delta*z", &a).unwrap();
        assert_eq!(e.diff("z").to_string(), "delta");
    }

    #[test]
    fn diff_chain_rule_matches_expected_value() {
        let a = jet1().with_parameters(["gamma", "omega", "phi"]);
        let e = parse("gamma*q1*sin(omega*t+phi)", &a).unwrap();
        let d = e.diff("t");
        // gamma*q1*omega*cos(omega*t+phi), compared by value.
        let b = Bindings::new()
            .set("gamma", 1.3)
            .set("omega", 0.7)
            .set("phi", 0.2)
            .set("q1", 2.0)
            .set("t", 0.9);
        let expected = 1.3 * 2.0 * 0.7 * (0.7 * 0.9 + 0.2_f64).cos();
        assert!((d.eval(&b).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn diff_absent_variable_is_zero() {
        let e = parse("q1^3", &jet1()).unwrap();
        assert_eq!(e.diff("p1"), Expr::Const(0.0));
    }

    #[test]
    fn diff_then_parse_round_trips() {
        let a = jet1().with_parameters(["alpha"]);
        let e = parse("alpha*q1^3 + sin(q1*p1)", &a).unwrap();
        let d = e.diff("q1");
        let reparsed = parse(&d.to_string(), &a).unwrap();
        let b = Bindings::new()
            .set("alpha", 0.4)
            .set("q1", 1.2)
            .set("p1", -0.3);
        assert_eq!(d.eval(&b).unwrap(), reparsed.eval(&b).unwrap());
    }

    #[test]
    fn simplify_spec_examples() {
        let a = jet1();
        assert_eq!(
            parse("0*q1 + 1*p1", &a).unwrap().simplify().to_string(),
            "p1"
        );
        assert_eq!(parse("2*3", &a).unwrap().simplify(), Expr::Const(6.0));
        assert_eq!(
            parse("sin(q1)*1 + 0", &a).unwrap().simplify().to_string(),
            "sin(q1)"
        );
    }

    #[test]
    fn simplify_pow_identities() {
        let a = jet1();
        assert_eq!(parse("q1^1", &a).unwrap().simplify().to_string(), "q1");
        assert_eq!(parse("q1^0", &a).unwrap().simplify(), Expr::Const(1.0));
    }

    #[test]
    fn negative_exponent_prints_reparseable() {
        let a = jet1();
        let e = Expr::var("q1").pow(-2.0);
        assert_eq!(e.to_string(), "q1^(-2)");
        assert_eq!(parse(&e.to_string(), &a).unwrap(), e);
    }

    #[test]
    fn bound_expr_matches_checked_eval() {
        let a = jet1();
        let e = parse("sin(q1)*p1^3 - z/2 + t", &a).unwrap();
        let slots: BTreeMap<String, usize> = [
            ("q1".to_string(), 0),
            ("p1".to_string(), 1),
            ("z".to_string(), 2),
            ("t".to_string(), 3),
        ]
        .into_iter()
        .collect();
        let bound = e.bind(&slots).unwrap();
        let vals = [0.7, -1.1, 0.4, 2.2];
        let b = Bindings::new()
            .set("q1", vals[0])
            .set("p1", vals[1])
            .set("z", vals[2])
            .set("t", vals[3]);
        assert_eq!(bound.eval_slots(&vals), e.eval(&b).unwrap());
    }
}
