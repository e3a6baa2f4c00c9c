use std::collections::BTreeMap;

use super::{BinOp, Expr, Var};

const MAX_DEGREE: u32 = 64;

/// Polynomial in `u, v, m` keyed by exponent triples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly {
    pub fn constant(c: f64) -> Poly {
        let mut p = Poly::default();
        p.insert([0, 0, 0], c);
        p
    }

    fn var(v: Var) -> Poly {
        let mut key = [0; 3];
        key[v.index()] = 1;
        let mut p = Poly::default();
        p.insert(key, 1.0);
        p
    }

    fn insert(&mut self, key: [u32; 3], c: f64) {
        *self.terms.entry(key).or_insert(0.0) += c;
    }

    pub fn coefficient(&self, u: u32, v: u32, m: u32) -> f64 {
        self.terms.get(&[u, v, m]).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ([u32; 3], f64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    fn scale(mut self, c: f64) -> Poly {
        self.terms.values_mut().for_each(|x| *x *= c);
        self
    }

    fn add(mut self, other: &Poly, sign: f64) -> Poly {
        for (k, c) in &other.terms {
            self.insert(*k, sign * c);
        }
        self
    }

    fn mul(&self, other: &Poly) -> Option<Poly> {
        let mut out = Poly::default();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
                if key.iter().sum::<u32>() > MAX_DEGREE {
                    return None;
                }
                out.insert(key, ca * cb);
            }
        }
        Some(out)
    }

    fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&[0, 0, 0]).copied(),
            _ => None,
        }
    }

    /// Collect `e` into monomials, or `None` if it is not a polynomial.
    pub fn from_expr(e: &Expr) -> Option<Poly> {
        let mut p = Poly::build(e)?;
        p.prune();
        Some(p)
    }

    fn build(e: &Expr) -> Option<Poly> {
        Some(match e {
            Expr::Const(c) => Poly::constant(*c),
            Expr::Var(v) => Poly::var(*v),
            Expr::Neg(a) => Poly::build(a)?.scale(-1.0),
            Expr::Binary(op, a, b) => {
                let pa = Poly::build(a)?;
                let pb = Poly::build(b)?;
                match op {
                    BinOp::Add => pa.add(&pb, 1.0),
                    BinOp::Sub => pa.add(&pb, -1.0),
                    BinOp::Mul => pa.mul(&pb)?,
                    BinOp::Div => {
                        let c = pb.as_constant()?;
                        if c == 0.0 {
                            return None;
                        }
                        pa.scale(1.0 / c)
                    }
                }
            }
            Expr::Pow(a, n) if *n >= 0 => {
                let base = Poly::build(a)?;
                let mut out = Poly::constant(1.0);
                for _ in 0..*n {
                    out = out.mul(&base)?;
                }
                out
            }
            Expr::Pow(..) | Expr::Call(..) => return None,
        })
    }

    /// Drop coefficients that are rounding residue of cancellation.
    fn prune(&mut self) {
        let scale = self.terms.values().fold(0.0f64, |a, c| a.max(c.abs()));
        self.terms.retain(|_, c| c.abs() > 1e-13 * scale);
    }

    /// Sum of monomials, highest power of `u` first.
    pub fn to_expr(&self) -> Expr {
        let mut out = Expr::ZERO;
        for (key, c) in self.terms.iter().rev() {
            let mut term = Expr::Const(c.abs());
            for (var, &k) in [Var::U, Var::V, Var::M].into_iter().zip(key) {
                if k > 0 {
                    term = term * Expr::Var(var).pow(k as i32);
                }
            }
            out = if out.is_zero() {
                if *c < 0.0 {
                    -term
                } else {
                    term
                }
            } else if *c < 0.0 {
                out - term
            } else {
                out + term
            };
        }
        out
    }
}
