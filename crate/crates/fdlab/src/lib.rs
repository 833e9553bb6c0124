//! Pseudospectral laboratory for fractional dispersive equations.
//!
//! Two model equations on a large periodic box, both with cubic
//! nonlinearity and a fractional symbol of order `alpha` in (-1,1):
//!
//! * a fractional KdV type equation for real fields,
//!   `u_t - |D|^alpha u_x +- u^2 u_x = 0`
//! * a fractional NLS type equation for complex fields,
//!   `i u_t - |D|^{alpha+1} u +- |u|^2 u = 0`
//!
//! The crate provides the spectral toolbox (transforms, band projections,
//! weighted norms), an adaptive profile-frame integrator, diagnostics for
//! pointwise decay and modified scattering (phase-corrected profiles,
//! convergence and drift reports), solitary wave computation, and a small
//! experiment runner with reproducible on-disk output.
//!
//! The `examples/` directory is the intended entry point: each example
//! exercises one capability end to end.

pub mod cutoff;
pub mod equation;
pub mod evolve;
pub mod experiments;
pub mod groundstate;
pub mod field;
pub mod grid;
pub mod linear;
pub mod norms;
pub mod quad;
pub mod scatter;

pub use equation::{EquationKind, EquationSpec, Sign};
pub use field::SpectralField;
pub use grid::{make_grid, Grid};
pub use norms::NormKind;

use thiserror::Error;

pub type Complex64 = num_complex::Complex<f64>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Config(_) => 2,
            Error::Numerical(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validate(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Validation(msg.into()))
    }
}
