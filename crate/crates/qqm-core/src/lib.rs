//! Closed-form solution families of the quaternionic Schrödinger equation
//! with the imaginary unit acting from the left, plus the numerical
//! machinery that verifies them: grid residuals, probability currents, and
//! the step-potential scattering problem.

pub mod error;
pub mod quaternion;
pub mod scattering;
pub mod stationary;
pub mod time_evolution;
pub mod verifier;

pub use error::{QqmError, Result};
pub use quaternion::Quaternion;

use serde::{Deserialize, Serialize};

/// Physical constants of a problem. Defaults to natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    #[serde(default = "default_unit")]
    pub hbar: f64,
    #[serde(default = "default_unit")]
    pub mass: f64,
}

fn default_unit() -> f64 {
    1.0
}

impl Default for Units {
    fn default() -> Self {
        Units {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl Units {
    pub fn new(hbar: f64, mass: f64) -> Self {
        Units { hbar, mass }
    }

    /// hbar^2 / 2m, the kinetic prefactor.
    pub fn kinetic_factor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}
