//! Wave-breaking coefficients.
//!
//! Smooth solutions satisfy
//! `d/dt ∫(m² + m_x²) dx = -∫(A m² + B m_x²) dx` with
//! `A = A0 + A1 m + A2 m² + A3 m³` and `B = B0 + B1 m`, all built from
//! `f`, `g` and the operator `D̃ = u_x ∂_u + u ∂_{u_x}`.

use serde::Serialize;

use crate::expr::{Expr, Func, Var};
use crate::model::FgEquation;
use crate::{Error, Result};

/// `D̃ e = v ∂e/∂u + u ∂e/∂v`.
pub fn tilde_d(e: &Expr) -> Result<Expr> {
    Ok(e.flank_derivative()?.canonical())
}

fn tilde_d_n(e: &Expr, n: usize) -> Result<Expr> {
    (0..n).try_fold(e.clone(), |acc, _| tilde_d(&acc))
}

fn d(e: &Expr, var: Var) -> Result<Expr> {
    Ok(e.differentiate(var)?.canonical())
}

fn uses_nonsmooth(e: &Expr) -> Option<Func> {
    match e {
        Expr::Const(_) | Expr::Var(_) => None,
        Expr::Neg(a) | Expr::Pow(a, _) => uses_nonsmooth(a),
        Expr::Binary(_, a, b) => uses_nonsmooth(a).or_else(|| uses_nonsmooth(b)),
        Expr::Call(f, a) => match f {
            Func::Abs | Func::Sign => Some(*f),
            _ => uses_nonsmooth(a),
        },
    }
}

fn require_smooth(eq: &FgEquation) -> Result<()> {
    for (name, e) in [("f", eq.f()), ("g", eq.g())] {
        if let Some(func) = uses_nonsmooth(e) {
            return Err(Error::InvalidArgument(format!(
                "{name} uses {}, but wave-breaking coefficients need smooth f and g",
                func.name()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "CoefficientText")]
pub struct BlowupCoefficients {
    /// `A0..A3`, coefficients of `m^k` in `A`.
    pub a: [Expr; 4],
    /// `B0, B1`, coefficients of `m^k` in `B`.
    pub b: [Expr; 2],
}

/// Text rendering used for serialization.
#[derive(Serialize)]
struct CoefficientText {
    a: String,
    b: String,
    a_parts: Vec<String>,
    b_parts: Vec<String>,
}

impl From<BlowupCoefficients> for CoefficientText {
    fn from(c: BlowupCoefficients) -> Self {
        CoefficientText {
            a: c.a_expr().to_string(),
            b: c.b_expr().to_string(),
            a_parts: c.a.iter().map(|e| e.to_string()).collect(),
            b_parts: c.b.iter().map(|e| e.to_string()).collect(),
        }
    }
}

fn m_polynomial(parts: &[Expr]) -> Expr {
    let mut out = Expr::ZERO;
    for (k, c) in parts.iter().enumerate() {
        out = out + c.clone() * Expr::m().pow(k as i32);
    }
    out.canonical()
}

impl BlowupCoefficients {
    /// `A` assembled as a polynomial in `m`.
    pub fn a_expr(&self) -> Expr {
        m_polynomial(&self.a)
    }

    pub fn b_expr(&self) -> Expr {
        m_polynomial(&self.b)
    }

    /// `(A, B)` at a point.
    pub fn eval(&self, u: f64, ux: f64, m: f64) -> Result<(f64, f64)> {
        let mut a = 0.0;
        let mut mk = 1.0;
        for c in &self.a {
            a += c.eval(u, ux, m)? * mk;
            mk *= m;
        }
        let b = self.b[0].eval(u, ux, m)? + self.b[1].eval(u, ux, m)? * m;
        Ok((a, b))
    }
}

pub fn blowup_ab(eq: &FgEquation) -> Result<BlowupCoefficients> {
    require_smooth(eq)?;
    let (f, g) = (eq.f().clone(), eq.g().clone());
    let (u, v) = (Var::U, Var::V);
    let c = Expr::constant;

    let a0 = c(2.0) * f.clone() - tilde_d_n(&f, 2)? + tilde_d(&(g.clone() - tilde_d_n(&g, 2)?))?;
    let f_v = d(&f, v)?;
    let g_u = d(&g, u)?;
    let g_v = d(&g, v)?;
    let a1 = d(&f, u)?
        + c(5.0 / 3.0) * tilde_d(&f_v)?
        + c(8.0 / 3.0) * tilde_d(&g_u)?
        + c(7.0 / 3.0) * tilde_d_n(&g_v, 2)?;
    let g_vv = d(&g_v, v)?;
    let a2 = c(-2.0 / 3.0) * d(&f_v, v)? - c(2.0) * d(&g_u, v)? - c(11.0 / 6.0) * tilde_d(&g_vv)?;
    let a3 = c(0.5) * d(&g_vv, v)?;
    let b0 = c(2.0) * f + c(3.0) * tilde_d(&g)?;
    let b1 = c(-5.0) * g_v;
    Ok(BlowupCoefficients {
        a: [a0.canonical(), a1.canonical(), a2.canonical(), a3.canonical()],
        b: [b0.canonical(), b1.canonical()],
    })
}

/// Velocity and reaction of `m_t + g m_x = -(f + D̃g) m + g_v m²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportForm {
    pub velocity: Expr,
    pub reaction: Expr,
    /// `-(f + D̃g)`, the coefficient of `m` in the reaction.
    pub linear: Expr,
    /// `g_v`, the coefficient of `m²`.
    pub quadratic: Expr,
}

pub fn transport_coefficients(eq: &FgEquation) -> Result<TransportForm> {
    let (f, g) = (eq.f(), eq.g());
    let linear = (-(f.clone() + tilde_d(g)?)).canonical();
    let quadratic = d(g, Var::V)?;
    let reaction = (linear.clone() * Expr::m() + quadratic.clone() * Expr::m().pow(2)).canonical();
    Ok(TransportForm { velocity: g.clone(), reaction, linear, quadratic })
}

/// `inf_k (α A + β B)` over field samples `(u, u_x, m)`.
pub fn blowup_indicator(
    coeffs: &BlowupCoefficients,
    samples: impl IntoIterator<Item = (f64, f64, f64)>,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if alpha < 0.0 || beta < 0.0 || (alpha == 0.0 && beta == 0.0) {
        return Err(Error::InvalidArgument("indicator weights must be non-negative and not both zero".into()));
    }
    let mut worst = f64::INFINITY;
    for (u, ux, m) in samples {
        let (a, b) = coeffs.eval(u, ux, m)?;
        worst = worst.min(alpha * a + beta * b);
    }
    Ok(worst)
}
