//! Equation family: symbols, linear phases, conserved-energy weights.

use crate::{validate, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    /// Real dispersive equation `u_t - |D|^alpha u_x +- u^2 u_x = 0`.
    Fkdv,
    /// Complex equation `i u_t - |D|^{alpha+1} u +- |u|^2 u = 0`.
    Fnls,
}

/// Nonlinearity sign. `Focusing` is the `+` branch of the equations above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Focusing => 1.0,
            Sign::Defocusing => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Focusing => 1,
            Sign::Defocusing => -1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Sign::Focusing),
            -1 => Ok(Sign::Defocusing),
            _ => Err(crate::Error::Validation(format!("bad sign byte {v}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub kind: EquationKind,
    pub alpha: f64,
    pub sign: Sign,
}

impl EquationSpec {
    pub fn new(kind: EquationKind, alpha: f64, sign: Sign) -> Result<Self> {
        let spec = EquationSpec { kind, alpha, sign };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        validate(
            self.alpha.is_finite() && self.alpha > -1.0 && self.alpha < 1.0 && self.alpha != 0.0,
            format!("alpha = {} outside (-1,1) \\ {{0}}", self.alpha),
        )
    }

    /// Dispersion relation `Lambda(xi)`: the solution of the linear part is
    /// `u_hat(t, xi) = exp(i t Lambda_phase(xi)) u_hat(0, xi)` with
    /// `Lambda_phase = xi |xi|^alpha` (fKdV) or `-|xi|^{alpha+1}` (fNLS).
    pub fn dispersion(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            return 0.0;
        }
        match self.kind {
            EquationKind::Fkdv => xi * xi.abs().powf(self.alpha),
            EquationKind::Fnls => -xi.abs().powf(self.alpha + 1.0),
        }
    }

    /// Phase accumulated by the free flow over time `t` at frequency `xi`.
    pub fn linear_phase(&self, xi: f64, t: f64) -> f64 {
        t * self.dispersion(xi)
    }

    /// Symbol of the elliptic operator in the solitary wave equation:
    /// `|xi|^alpha` (fKdV) or `|xi|^{alpha+1}` (fNLS).
    pub fn elliptic_symbol(&self, xi: f64) -> f64 {
        match self.kind {
            EquationKind::Fkdv => xi.abs().powf(self.alpha),
            EquationKind::Fnls => xi.abs().powf(self.alpha + 1.0),
        }
    }

    /// Largest group speed over frequencies up to `xi_max`:
    /// `(alpha+1) |xi|^alpha` is monotone in `|xi|` for alpha > 0 and
    /// diverges at 0 for alpha < 0, so take the max over the band edges.
    pub fn group_speed_bound(&self, xi_lo: f64, xi_hi: f64) -> f64 {
        let s = |xi: f64| {
            if xi == 0.0 {
                f64::INFINITY
            } else {
                (self.alpha + 1.0) * xi.abs().powf(self.alpha)
            }
        };
        s(xi_lo).max(s(xi_hi))
    }

    /// Exponent pair in the phase correction weight `|xi|^{(1-alpha)/4}`.
    pub fn z_weight_exponent(&self) -> f64 {
        (1.0 - self.alpha) / 4.0
    }
}
