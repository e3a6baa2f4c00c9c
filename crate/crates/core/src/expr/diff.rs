use super::{BinOp, Expr, Func, Var};
use crate::{Error, Result};

impl Expr {
    /// Symbolic partial derivative. `abs` and `sign` are rejected.
    pub fn differentiate(&self, var: Var) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) => Expr::ZERO,
            Expr::Var(w) => {
                if *w == var {
                    Expr::ONE
                } else {
                    Expr::ZERO
                }
            }
            Expr::Neg(a) => -a.differentiate(var)?,
            Expr::Binary(op, a, b) => {
                let da = a.differentiate(var)?;
                let db = b.differentiate(var)?;
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => da + db,
                    BinOp::Sub => da - db,
                    BinOp::Mul => da * b + a * db,
                    BinOp::Div => {
                        if db.is_zero() {
                            da / b
                        } else {
                            (da * b.clone() - a * db) / b.pow(2)
                        }
                    }
                }
            }
            Expr::Pow(a, n) => {
                let da = a.differentiate(var)?;
                Expr::Const(*n as f64) * a.as_ref().clone().pow(n - 1) * da
            }
            Expr::Call(f, a) => {
                let da = a.differentiate(var)?;
                if da.is_zero() {
                    return Ok(Expr::ZERO);
                }
                let a = a.as_ref().clone();
                let outer = match f {
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Ln => return Ok(da / a),
                    Func::Sqrt => return Ok(da / (Expr::Const(2.0) * Expr::call(Func::Sqrt, a))),
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => -Expr::call(Func::Sin, a),
                    Func::Tanh => Expr::ONE - Expr::call(Func::Tanh, a).pow(2),
                    Func::Atanh => return Ok(da / (Expr::ONE - a.pow(2))),
                    Func::Abs | Func::Sign => return Err(Error::NotDifferentiable(f.name())),
                };
                outer * da
            }
        })
    }

    /// The operator `v d/du + u d/dv`, the `x`-derivative along a peakon flank
    /// where `u_xx = u`.
    pub fn flank_derivative(&self) -> Result<Expr> {
        let du = self.differentiate(Var::U)?;
        let dv = self.differentiate(Var::V)?;
        Ok(Expr::v() * du + Expr::u() * dv)
    }
}
