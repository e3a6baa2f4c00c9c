//! Symbolic expressions in `u`, `v = u_x` and `m = u - u_xx`.
//!
//! Expressions are immutable trees built either by [`parse`] or through the
//! arithmetic operators, which apply light local simplification as they go.
//! Differentiation is symbolic; [`Expr::canonical`] collects polynomial
//! expressions into a sum of monomials for display.

mod diff;
mod parse;
mod poly;
mod render;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

pub use parse::{parse, parse_scalar, ParseError, ParseErrorKind};
pub use poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    U,
    V,
    M,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::V => "v",
            Var::M => "m",
        }
    }

    const fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sign,
    Sin,
    Cos,
    Tanh,
    Atanh,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Sign,
        Func::Sin,
        Func::Cos,
        Func::Tanh,
        Func::Atanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Atanh => "atanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, x: f64) -> Result<f64, EvalError> {
        let domain = |ok: bool, y: f64| {
            if ok {
                Ok(y)
            } else {
                Err(EvalError::Domain { func: self.name(), arg: x })
            }
        };
        match self {
            Func::Exp => Ok(x.exp()),
            Func::Ln => domain(x > 0.0, x.ln()),
            Func::Sqrt => domain(x >= 0.0, x.sqrt()),
            Func::Abs => Ok(x.abs()),
            Func::Sign => Ok(sign(x)),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Tanh => Ok(x.tanh()),
            Func::Atanh => domain(x.abs() < 1.0, x.atanh()),
        }
    }
}

/// Sign with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func}({arg}) is outside the domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub const ZERO: Expr = Expr::Const(0.0);
    pub const ONE: Expr = Expr::Const(1.0);

    pub fn u() -> Expr {
        Expr::Var(Var::U)
    }

    pub fn v() -> Expr {
        Expr::Var(Var::V)
    }

    pub fn m() -> Expr {
        Expr::Var(Var::M)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn contains(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == var,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.contains(var),
            Expr::Binary(_, a, b) => a.contains(var) || b.contains(var),
        }
    }

    pub fn pow(self, n: i32) -> Expr {
        match (self, n) {
            (_, 0) => Expr::ONE,
            (e, 1) => e,
            (Expr::Const(c), n) if c != 0.0 || n > 0 => Expr::Const(c.powi(n)),
            (Expr::Pow(b, k), n) => match k.checked_mul(n) {
                Some(kn) => (*b).pow(kn),
                None => Expr::Pow(Box::new(Expr::Pow(b, k)), n),
            },
            (e, n) => Expr::Pow(Box::new(e), n),
        }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        if let Expr::Const(c) = arg {
            if let Ok(y) = func.apply(c) {
                if y.is_finite() {
                    return Expr::Const(y);
                }
            }
        }
        Expr::Call(func, Box::new(arg))
    }

    pub fn eval(&self, u: f64, v: f64, m: f64) -> Result<f64, EvalError> {
        let y = self.eval_inner(&[u, v, m])?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_inner(&self, vars: &[f64; 3]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(w) => vars[w.index()],
            Expr::Neg(a) => -a.eval_inner(vars)?,
            Expr::Binary(op, a, b) => {
                let x = a.eval_inner(vars)?;
                let y = b.eval_inner(vars)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, n) => {
                let x = a.eval_inner(vars)?;
                if x == 0.0 && *n < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                x.powi(*n)
            }
            Expr::Call(f, a) => f.apply(a.eval_inner(vars)?)?,
        })
    }

    /// Replace every occurrence of `var` by `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(w) if *w == var => with.clone(),
            Expr::Var(_) => self.clone(),
            Expr::Neg(a) => -a.substitute(var, with),
            Expr::Binary(op, a, b) => {
                binary(*op, a.substitute(var, with), b.substitute(var, with))
            }
            Expr::Pow(a, n) => a.substitute(var, with).pow(*n),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(var, with)),
        }
    }

    /// Rebuild bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => -a.simplify(),
            Expr::Binary(op, a, b) => binary(*op, a.simplify(), b.simplify()),
            Expr::Pow(a, n) => a.simplify().pow(*n),
            Expr::Call(f, a) => Expr::call(*f, a.simplify()),
        }
    }

    /// Collected polynomial form when the expression is a polynomial in
    /// `u, v, m`, otherwise the simplified tree.
    pub fn canonical(&self) -> Expr {
        match Poly::from_expr(self) {
            Some(p) => p.to_expr(),
            None => self.simplify(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }
}

fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
    }
}

fn raw(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary(op, Box::new(a), Box::new(b))
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(a) => *a,
            e => Expr::Neg(Box::new(e)),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, Expr::Neg(b)) => a - *b,
            (a, Expr::Const(y)) if y < 0.0 => a - Expr::Const(-y),
            (a, b) => raw(BinOp::Add, a, b),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => -b,
            (a, b) if a == b => Expr::ZERO,
            (a, Expr::Neg(b)) => a + *b,
            (a, Expr::Const(y)) if y < 0.0 => a + Expr::Const(-y),
            (a, b) => raw(BinOp::Sub, a, b),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (a, b) if a.is_zero() || b.is_zero() => Expr::ZERO,
            (a, b) if a.is_one() => b,
            (a, b) if b.is_one() => a,
            (Expr::Const(c), b) if c == -1.0 => -b,
            (a, Expr::Const(c)) if c == -1.0 => -a,
            (Expr::Neg(a), b) => -(*a * b),
            (a, Expr::Neg(b)) => -(a * *b),
            (a, Expr::Const(c)) => Expr::Const(c) * a,
            (Expr::Const(c), Expr::Binary(BinOp::Mul, x, y)) if x.as_const().is_some() => {
                Expr::Const(c * x.as_const().unwrap_or(1.0)) * *y
            }
            (a, b) => raw(BinOp::Mul, a, b),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(x / y),
            (a, b) if a.is_zero() && !b.is_zero() => Expr::ZERO,
            (a, b) if b.is_one() => a,
            (Expr::Neg(a), b) => -(*a / b),
            (a, b) => raw(BinOp::Div, a, b),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::Const(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::Var(v)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render::write_expr(f, self)
    }
}

/// A function of the single variable `s`, stored with `s` in the `u` slot.
///
/// Used for the Hamiltonian profiles `f1(s)` and `g1(s)`; the field form is
/// recovered with [`ScalarFn::compose_s`], which substitutes `s = u^2 - v^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFn(Expr);

impl ScalarFn {
    pub fn parse(text: &str) -> Result<ScalarFn, ParseError> {
        parse_scalar(text).map(ScalarFn)
    }

    pub fn from_expr_in_s(e: Expr) -> ScalarFn {
        ScalarFn(e)
    }

    pub fn zero() -> ScalarFn {
        ScalarFn(Expr::ZERO)
    }

    pub fn eval(&self, s: f64) -> Result<f64, EvalError> {
        self.0.eval(s, 0.0, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn expr_in_s(&self) -> &Expr {
        &self.0
    }

    pub fn compose_s(&self) -> Expr {
        let s = Expr::u().pow(2) - Expr::v().pow(2);
        self.0.substitute(Var::U, &s)
    }

    pub fn derivative(&self) -> Result<ScalarFn, crate::Error> {
        self.0.differentiate(Var::U).map(ScalarFn)
    }

    /// Degree in `s` when the function is a polynomial.
    pub fn polynomial_degree(&self) -> Option<u32> {
        Poly::from_expr(&self.0).map(|p| p.terms().map(|(k, _)| k[0]).max().unwrap_or(0))
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render::write_with(f, &self.0, ["s", "v", "m"])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold_constants() {
        let e = Expr::constant(2.0) * Expr::constant(3.0) + Expr::u() * Expr::ZERO;
        assert_eq!(e, Expr::Const(6.0));
        assert_eq!(Expr::u() - Expr::u(), Expr::ZERO);
        assert_eq!(-(-Expr::v()), Expr::v());
        assert_eq!(Expr::u().pow(2).pow(3), Expr::u().pow(6));
    }

    #[test]
    fn eval_reports_domain_errors() {
        let e = parse("ln(u)").unwrap();
        assert!(matches!(e.eval(-1.0, 0.0, 0.0), Err(EvalError::Domain { func: "ln", .. })));
        let e = parse("1/(u-v)").unwrap();
        assert_eq!(e.eval(1.0, 1.0, 0.0), Err(EvalError::DivisionByZero));
        let e = parse("sqrt(u)").unwrap();
        assert!(e.eval(-0.5, 0.0, 0.0).is_err());
        assert_eq!(parse("u^-1").unwrap().eval(0.0, 0.0, 0.0), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(parse("sign(u)").unwrap().eval(0.0, 0.0, 0.0), Ok(0.0));
    }

    #[test]
    fn scalar_composition() {
        let f1 = ScalarFn::parse("s^2 - 3").unwrap();
        let e = f1.compose_s();
        let (u, v) = (0.7, -0.2);
        let s: f64 = u * u - v * v;
        assert!((e.eval(u, v, 0.0).unwrap() - (s * s - 3.0)).abs() < 1e-15);
        assert_eq!(f1.to_string(), "s^2 - 3");
    }
}
