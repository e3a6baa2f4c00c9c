//! Multi-peakon dynamics for equations of the form
//! `m_t + f(u, u_x) m + (g(u, u_x) m)_x = 0` with `m = u - u_xx`.
//!
//! The crate covers the symbolic description of an equation ([`expr`],
//! [`model`]), the peakon ODE system ([`dynamics`]) and its integration
//! ([`integrator`]), conserved quantities ([`conservation`]), the two-peakon
//! phase portraits ([`twopeakon`]), wave-breaking coefficients
//! ([`wavebreak`]) and a periodic spectral solver for smooth data
//! ([`field`]).

pub mod conservation;
pub mod dynamics;
mod error;
pub mod expr;
pub mod field;
pub mod integrator;
pub mod model;
pub mod quadrature;
pub mod twopeakon;
pub mod wavebreak;

pub use error::{Error, Result};
pub use expr::{Expr, ScalarFn};

pub use dynamics::{PeakonDerivative, PeakonState, PeakonSystem};
pub use model::{FgEquation, HamiltonianFamily, Preset};
pub use field::{FieldRun, FieldSolver, FieldState};
pub use integrator::{integrate, CollisionPolicy, EventKind, IntegrationConfig, Termination, Trajectory};
pub use twopeakon::{Regime, RegimeReport, TwoPeakonModel};
pub use wavebreak::{blowup_ab, BlowupCoefficients};
