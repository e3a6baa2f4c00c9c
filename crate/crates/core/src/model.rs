//! Members of the fg-family and the Hamiltonian subfamily.

use std::fmt;

use crate::expr::{parse, Expr, ScalarFn, Var};
use crate::quadrature::{GaussRule, Quadrature};
use crate::{Error, Result};

/// `m_t + f(u, u_x) m + (g(u, u_x) m)_x = 0`.
#[derive(Debug, Clone)]
pub struct FgEquation {
    name: String,
    f: Expr,
    g: Expr,
    f_anti: Option<Expr>,
    g_anti: Option<Expr>,
    f_u: Option<Expr>,
    g_u: Option<Expr>,
    f_anti_u: Option<Expr>,
    g_anti_u: Option<Expr>,
    quadrature: Quadrature,
}

impl FgEquation {
    pub fn new(name: impl Into<String>, f: Expr, g: Expr) -> Result<FgEquation> {
        if f.contains(Var::M) || g.contains(Var::M) {
            return Err(Error::InvalidArgument("f and g may depend on u and v only".into()));
        }
        let f = f.simplify();
        let g = g.simplify();
        Ok(FgEquation {
            name: name.into(),
            f_u: f.differentiate(Var::U).ok(),
            g_u: g.differentiate(Var::U).ok(),
            f,
            g,
            f_anti: None,
            g_anti: None,
            f_anti_u: None,
            g_anti_u: None,
            quadrature: Quadrature::default(),
        })
    }

    pub fn from_text(name: impl Into<String>, f: &str, g: &str) -> Result<FgEquation> {
        FgEquation::new(name, parse(f)?, parse(g)?)
    }

    /// Attach closed forms `F = ∫_0^v f dy` and `G = ∫_0^v g dy`.
    pub fn with_antiderivatives(mut self, f_anti: Expr, g_anti: Expr) -> FgEquation {
        let f_anti = f_anti.simplify();
        let g_anti = g_anti.simplify();
        self.f_anti_u = f_anti.differentiate(Var::U).ok();
        self.g_anti_u = g_anti.differentiate(Var::U).ok();
        self.f_anti = Some(f_anti);
        self.g_anti = Some(g_anti);
        self
    }

    /// Drop attached closed forms so every kernel goes through quadrature.
    pub fn without_antiderivatives(mut self) -> FgEquation {
        self.f_anti = None;
        self.g_anti = None;
        self.f_anti_u = None;
        self.g_anti_u = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn analytic_f_antiderivative(&self) -> Option<&Expr> {
        self.f_anti.as_ref()
    }

    pub fn analytic_g_antiderivative(&self) -> Option<&Expr> {
        self.g_anti.as_ref()
    }

    pub fn eval_f(&self, u: f64, ux: f64) -> Result<f64> {
        Ok(self.f.eval(u, ux, 0.0)?)
    }

    pub fn eval_g(&self, u: f64, ux: f64) -> Result<f64> {
        Ok(self.g.eval(u, ux, 0.0)?)
    }

    fn integrate_in_ux(&self, e: &Expr, u: f64, ux: f64) -> Result<f64> {
        integrate_signed(&self.quadrature, |y| Ok(e.eval(u, y, 0.0)?), ux)
    }

    /// `F(u, u_x) = ∫_0^{u_x} f(u, y) dy`.
    pub fn antiderivative_f(&self, u: f64, ux: f64) -> Result<f64> {
        match &self.f_anti {
            Some(e) => Ok(e.eval(u, ux, 0.0)?),
            None => self.integrate_in_ux(&self.f, u, ux),
        }
    }

    pub fn antiderivative_g(&self, u: f64, ux: f64) -> Result<f64> {
        match &self.g_anti {
            Some(e) => Ok(e.eval(u, ux, 0.0)?),
            None => self.integrate_in_ux(&self.g, u, ux),
        }
    }

    pub fn antiderivative_f_quadrature(&self, u: f64, ux: f64) -> Result<f64> {
        self.integrate_in_ux(&self.f, u, ux)
    }

    pub fn antiderivative_g_quadrature(&self, u: f64, ux: f64) -> Result<f64> {
        self.integrate_in_ux(&self.g, u, ux)
    }

    /// `∂F/∂u`, from the closed form when attached.
    pub fn antiderivative_f_du(&self, u: f64, ux: f64) -> Result<f64> {
        if let Some(e) = &self.f_anti_u {
            return Ok(e.eval(u, ux, 0.0)?);
        }
        let fu = self.f_u.as_ref().ok_or(Error::NotDifferentiable("f"))?;
        self.integrate_in_ux(fu, u, ux)
    }

    pub fn antiderivative_g_du(&self, u: f64, ux: f64) -> Result<f64> {
        if let Some(e) = &self.g_anti_u {
            return Ok(e.eval(u, ux, 0.0)?);
        }
        let gu = self.g_u.as_ref().ok_or(Error::NotDifferentiable("g"))?;
        self.integrate_in_ux(gu, u, ux)
    }
}

impl fmt::Display for FgEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: f = {}, g = {}", self.name, self.f, self.g)
    }
}

/// `∫_0^x h(y) dy` for either sign of `x`.
pub(crate) fn integrate_signed<F>(q: &Quadrature, h: F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if x == 0.0 {
        Ok(0.0)
    } else if x > 0.0 {
        q.integrate(h, 0.0, x)
    } else {
        Ok(-q.integrate(h, x, 0.0)?)
    }
}

/// `f = v f1(s)`, `g = u f1(s) + g1(s)` with `s = u^2 - v^2`.
#[derive(Debug, Clone)]
pub struct HamiltonianFamily {
    name: String,
    f1: ScalarFn,
    g1: ScalarFn,
    quadrature: Quadrature,
    // Exact rule for polynomial profiles: every kernel integrand then has
    // degree at most `2 deg` in the integration variable.
    exact: Option<GaussRule>,
}

impl HamiltonianFamily {
    pub fn new(name: impl Into<String>, f1: ScalarFn, g1: ScalarFn) -> HamiltonianFamily {
        let exact = match (f1.polynomial_degree(), g1.polynomial_degree()) {
            (Some(a), Some(b)) if a.max(b) <= 40 => Some(GaussRule::new(a.max(b) as usize + 1)),
            _ => None,
        };
        HamiltonianFamily { name: name.into(), f1, g1, quadrature: Quadrature::default(), exact }
    }

    fn kernel_integral<F>(&self, h: F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        match &self.exact {
            Some(rule) => rule.integrate(h, a, b),
            None if a <= b => self.quadrature.integrate(h, a, b),
            None => Ok(-self.quadrature.integrate(h, b, a)?),
        }
    }

    pub fn from_text(name: impl Into<String>, f1: &str, g1: &str) -> Result<HamiltonianFamily> {
        Ok(HamiltonianFamily::new(name, ScalarFn::parse(f1)?, ScalarFn::parse(g1)?))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f1(&self) -> &ScalarFn {
        &self.f1
    }

    pub fn g1(&self) -> &ScalarFn {
        &self.g1
    }

    pub fn to_fg(&self) -> Result<FgEquation> {
        let f1 = self.f1.compose_s();
        let g1 = self.g1.compose_s();
        FgEquation::new(self.name.clone(), Expr::v() * f1.clone(), Expr::u() * f1 + g1)
    }

    /// `F1(s) = ∫_0^s f1`.
    pub fn kernel_f1(&self, s: f64) -> Result<f64> {
        self.kernel_integral(|y| Ok(self.f1.eval(y)?), 0.0, s)
    }

    /// `G̃1(s) = s^{-1} ∫_0^s g1`, as `∫_0^1 g1(λ s) dλ` near `s = 0`.
    pub fn kernel_g1_tilde(&self, s: f64) -> Result<f64> {
        if self.g1.is_zero() {
            return Ok(0.0);
        }
        if s.abs() < 1e-8 || self.exact.is_some() {
            self.kernel_integral(|l| Ok(self.g1.eval(l * s)?), 0.0, 1.0)
        } else {
            Ok(integrate_signed(&self.quadrature, |y| Ok(self.g1.eval(y)?), s)? / s)
        }
    }

    pub fn kernels_f1_g1_tilde(&self, s: f64) -> Result<(f64, f64)> {
        Ok((self.kernel_f1(s)?, self.kernel_g1_tilde(s)?))
    }

    /// `(F̂1, Ĝ1) = ∫_0^{u_x} (f1, g1)(u^2 - y^2) dy`.
    pub fn kernels_hat(&self, u: f64, ux: f64) -> Result<(f64, f64)> {
        let f = if self.f1.is_zero() {
            0.0
        } else {
            self.kernel_integral(|y| Ok(self.f1.eval(u * u - y * y)?), 0.0, ux)?
        };
        let g = if self.g1.is_zero() {
            0.0
        } else {
            self.kernel_integral(|y| Ok(self.g1.eval(u * u - y * y)?), 0.0, ux)?
        };
        Ok((f, g))
    }

    /// `(c1, c0)` with single-peakon speed `c = a c1 + c0`.
    pub fn speed_coefficients(&self, a: f64) -> Result<(f64, f64)> {
        let a2 = a * a;
        let c1 = self.kernel_integral(|l| Ok(self.f1.eval((1.0 - l * l) * a2)?), 0.0, 1.0)?;
        let c0 = self.kernel_integral(|l| Ok(self.g1.eval((1.0 - l * l) * a2)?), 0.0, 1.0)?;
        Ok((c1, c0))
    }

    pub fn speed(&self, a: f64) -> Result<f64> {
        let (c1, c0) = self.speed_coefficients(a)?;
        Ok(a * c1 + c0)
    }

    /// Largest `|f m - d/dx (F1(u^2 - u_x^2) / 2)|` over sample points, the
    /// derivative taken by central differences of step `step`.
    ///
    /// `profile(x)` returns `(u, u_x, u_xx)` of a smooth curve.
    pub fn hamiltonian_structure_residual<P>(&self, profile: P, xs: &[f64], step: f64) -> Result<f64>
    where
        P: Fn(f64) -> (f64, f64, f64),
    {
        let half_f1 = |x: f64| -> Result<f64> {
            let (u, ux, _) = profile(x);
            Ok(0.5 * self.kernel_f1(u * u - ux * ux)?)
        };
        let mut worst = 0.0f64;
        for &x in xs {
            let (u, ux, uxx) = profile(x);
            let f = ux * self.f1.eval(u * u - ux * ux)?;
            let lhs = f * (u - uxx);
            let rhs = (half_f1(x + step)? - half_f1(x - step)?) / (2.0 * step);
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    }
}

/// `γ_p = (√π/2) Γ(p)/Γ(p + 1/2)` for integer `p ≥ 1`.
pub fn gamma_coeff(p: u32) -> f64 {
    (1..p).fold(1.0, |g, q| g * (2 * q) as f64 / (2 * q + 1) as f64)
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |c, j| c * (n - j) as f64 / (j + 1) as f64)
}

/// Table presets plus the generalized and unified families.
#[derive(Debug, Clone)]
pub enum Preset {
    Ch,
    Dp,
    Novikov,
    Mch,
    BFamily { b: f64 },
    ModifiedB { b: f64 },
    UnifiedChdpn { b: f64, p: i32 },
    UnifiedChdpnMch { a: f64, b: f64, p: i32 },
    Gch { p: u32 },
    Gmch { p: u32 },
    /// `f1 = a s^{k/2}`, `g1 = b s^{(k+1)/2}`.
    UnifiedGchGmch { k: u32, a: f64, b: f64 },
    Hamiltonian(HamiltonianFamily),
}

pub const PRESET_NAMES: [&str; 12] = [
    "ch",
    "dp",
    "novikov",
    "mch",
    "b-family",
    "modified-b",
    "unified-chdpn",
    "unified-chdpnmch",
    "gch",
    "gmch",
    "unified-gch-gmch",
    "hamiltonian",
];

fn num(x: f64) -> String {
    format!("({x:?})")
}

/// `s^{n/2}` as DSL text in the scalar variable.
fn half_power(n: u32) -> String {
    if n % 2 == 0 {
        format!("s^{}", n / 2)
    } else {
        format!("sqrt(s)^{n}")
    }
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Ch => "ch",
            Preset::Dp => "dp",
            Preset::Novikov => "novikov",
            Preset::Mch => "mch",
            Preset::BFamily { .. } => "b-family",
            Preset::ModifiedB { .. } => "modified-b",
            Preset::UnifiedChdpn { .. } => "unified-chdpn",
            Preset::UnifiedChdpnMch { .. } => "unified-chdpnmch",
            Preset::Gch { .. } => "gch",
            Preset::Gmch { .. } => "gmch",
            Preset::UnifiedGchGmch { .. } => "unified-gch-gmch",
            Preset::Hamiltonian(_) => "hamiltonian",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("{}: {msg}", self.name())));
        match self {
            Preset::BFamily { b } | Preset::ModifiedB { b } if *b == 0.0 => bad("b must be non-zero"),
            Preset::UnifiedChdpn { b, .. } | Preset::UnifiedChdpnMch { b, .. } if *b == 0.0 => {
                bad("b must be non-zero")
            }
            Preset::Gch { p } | Preset::Gmch { p } if *p < 1 => bad("p must be at least 1"),
            _ => Ok(()),
        }
    }

    /// The Hamiltonian `(f1, g1)` pair when the preset belongs to the subfamily.
    pub fn hamiltonian_family(&self) -> Option<HamiltonianFamily> {
        let make = |f1: &str, g1: &str| HamiltonianFamily::from_text(self.name(), f1, g1).ok();
        match self {
            Preset::Ch => make("1", "0"),
            Preset::Mch => make("0", "s"),
            Preset::Gch { p } if *p >= 1 => make(&format!("s^{}", p - 1), "0"),
            Preset::Gmch { p } if *p >= 1 => make("0", &format!("s^{p}")),
            Preset::UnifiedGchGmch { k, a, b } => make(
                &format!("{}*{}", num(*a), half_power(*k)),
                &format!("{}*{}", num(*b), half_power(k + 1)),
            ),
            Preset::Hamiltonian(h) => Some(h.clone()),
            _ => None,
        }
    }

    pub fn equation(&self) -> Result<FgEquation> {
        self.validate()?;
        let name = self.name();
        let eq = |f: &str, g: &str| FgEquation::from_text(name, f, g);
        let with = |fg: Result<FgEquation>, fa: &str, ga: &str| -> Result<FgEquation> {
            Ok(fg?.with_antiderivatives(parse(fa)?, parse(ga)?))
        };
        match self {
            Preset::Ch => with(eq("v", "u"), "v^2/2", "u*v"),
            Preset::Dp => with(eq("2*v", "u"), "v^2", "u*v"),
            Preset::Novikov => with(eq("u*v", "u^2"), "u*v^2/2", "u^2*v"),
            Preset::Mch => with(eq("0", "u^2 - v^2"), "0", "u^2*v - v^3/3"),
            Preset::BFamily { b } => eq(&format!("({} - 1)*v", num(*b)), "u"),
            Preset::ModifiedB { b } => eq(&format!("({} - 2)*u*v", num(*b)), "u^2"),
            Preset::UnifiedChdpn { b, p } => eq(
                &format!("({} - {p})*u^({})*v", num(*b), p - 1),
                &format!("u^({p})"),
            ),
            Preset::UnifiedChdpnMch { a, b, p } => eq(
                &format!(
                    "u^({})*v*(({} - {p})*u^2 + 3*{}*({p} - 2)*v^2)",
                    p - 3,
                    num(*b),
                    num(*a)
                ),
                &format!("u^({})*(u^2 - 3*{}*v^2)", p - 2, num(*a)),
            ),
            Preset::Gch { p } => {
                let p = *p;
                let f = format!("v*(u^2 - v^2)^{}", p - 1);
                let g = format!("u*(u^2 - v^2)^{}", p - 1);
                let fa = format!("(u^{} - (u^2 - v^2)^{p})/{}", 2 * p, 2 * p);
                let ga = format!("u*({})", binomial_sum(p - 1));
                with(eq(&f, &g), &fa, &ga)
            }
            Preset::Gmch { p } => {
                let g = format!("(u^2 - v^2)^{p}");
                with(eq("0", &g), "0", &binomial_sum(*p))
            }
            Preset::UnifiedGchGmch { .. } | Preset::Hamiltonian(_) => {
                let h = self.hamiltonian_family().ok_or_else(|| {
                    Error::InvalidArgument(format!("{name}: could not build f1, g1"))
                })?;
                let mut e = h.to_fg()?;
                e.name = name.to_string();
                Ok(e)
            }
        }
    }

    /// Closed speed law `c(a)` when one is known.
    pub fn closed_speed(&self, a: f64) -> Option<f64> {
        match self {
            Preset::Ch => Some(a),
            Preset::Mch => Some(2.0 / 3.0 * a * a),
            Preset::Gch { p } if *p >= 1 => Some(gamma_coeff(*p) * a.powi(2 * *p as i32 - 1)),
            Preset::Gmch { p } if *p >= 1 => Some(gamma_coeff(p + 1) * a.powi(2 * *p as i32)),
            _ => None,
        }
    }
}

/// `∫_0^v (u^2 - y^2)^q dy` expanded binomially.
fn binomial_sum(q: u32) -> String {
    let terms: Vec<String> = (0..=q)
        .map(|j| {
            let c = binomial(q, j) / (2 * j + 1) as f64;
            let sign = if j % 2 == 0 { "" } else { "-" };
            format!("{sign}{}*u^{}*v^{}", num(c), 2 * (q - j), 2 * j + 1)
        })
        .collect();
    terms.join(" + ")
}
