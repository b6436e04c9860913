//! Numerical kernels shared by the measure formulas and the simulators:
//! adaptive Gauss-Kronrod quadrature, safeguarded root bracketing, and the
//! Gamma/Beta family of special functions.

mod quadrature;
mod roots;
mod special;

pub use quadrature::{
    adaptive_integrate, adaptive_integrate_breakpoints, integrate_semi_infinite, QuadratureResult, DEFAULT_REL_TOL,
    MAX_SUBDIVISIONS,
};
pub use roots::{bracketed_root, MAX_ROOT_ITERATIONS};
pub use special::{gamma_ratio, ln_beta, ln_gamma, regularized_incomplete_beta};
