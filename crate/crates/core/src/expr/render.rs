use std::fmt;

use super::{BinOp, Expr};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    write_with(f, e, ["u", "v", "m"])
}

pub(super) fn write_with(f: &mut dyn fmt::Write, e: &Expr, names: [&str; 3]) -> fmt::Result {
    Renderer { names }.write(f, e)
}

struct Renderer<'a> {
    names: [&'a str; 3],
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => UNARY,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
        Expr::Neg(_) => UNARY,
        Expr::Pow(..) => UNARY + 1,
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => SUM,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => PRODUCT,
    }
}

impl Renderer<'_> {
    fn write(&self, f: &mut dyn fmt::Write, e: &Expr) -> fmt::Result {
        match e {
            Expr::Const(c) => write_number(f, *c),
            Expr::Var(v) => f.write_str(self.names[v.index()]),
            Expr::Neg(a) => {
                f.write_str("-")?;
                // `-a*b` reads as `(-a)*b`, which has the same value.
                let min = if matches!(**a, Expr::Binary(BinOp::Mul | BinOp::Div, ..)) { PRODUCT } else { UNARY };
                self.operand(f, a, min)
            }
            Expr::Binary(op, a, b) => {
                let (sym, own) = match op {
                    BinOp::Add => (" + ", SUM),
                    BinOp::Sub => (" - ", SUM),
                    BinOp::Mul => ("*", PRODUCT),
                    BinOp::Div => ("/", PRODUCT),
                };
                self.operand(f, a, own)?;
                f.write_str(sym)?;
                let right_min = if own == PRODUCT { UNARY } else { own + 1 };
                self.operand(f, b, right_min)
            }
            Expr::Pow(a, n) => {
                self.operand(f, a, ATOM)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                self.write(f, a)?;
                f.write_str(")")
            }
        }
    }

    fn operand(&self, f: &mut dyn fmt::Write, e: &Expr, min: u8) -> fmt::Result {
        if precedence(e) >= min {
            self.write(f, e)
        } else {
            f.write_str("(")?;
            self.write(f, e)?;
            f.write_str(")")
        }
    }
}

/// Small-denominator rational close to `x` within a few ulps.
pub(super) fn as_rational(x: f64) -> Option<(i64, i64)> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    let tol = 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
    (1..=1000i64).find_map(|q| {
        let p = (x * q as f64).round();
        ((p / q as f64 - x).abs() <= tol).then_some((p as i64, q))
    })
}

fn write_number(f: &mut dyn fmt::Write, x: f64) -> fmt::Result {
    if x == 0.0 {
        return f.write_str("0");
    }
    let decimal = format!("{x:?}");
    if decimal.len() <= 8 {
        return f.write_str(decimal.trim_end_matches(".0"));
    }
    match as_rational(x) {
        Some((p, 1)) => write!(f, "{p}"),
        Some((p, q)) if p < 0 => write!(f, "-({}/{q})", -p),
        Some((p, q)) => write!(f, "({p}/{q})"),
        None => write!(f, "{x:?}"),
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn renders_minimal_parentheses() {
        for (text, shown) in [
            ("u - (v - m)", "u - (v - m)"),
            ("(u - v) - m", "u - v - m"),
            ("u/(v*m)", "u/(v*m)"),
            ("(u+v)^2", "(u + v)^2"),
            ("-(u^2)", "-u^2"),
            ("(-u)^2", "(-u)^2"),
            ("2/3*v*m", "(2/3)*v*m"),
            ("0.1*u", "0.1*u"),
            ("exp(-u)", "exp(-u)"),
        ] {
            assert_eq!(parse(text).unwrap().simplify().to_string(), shown, "{text}");
        }
    }
}
