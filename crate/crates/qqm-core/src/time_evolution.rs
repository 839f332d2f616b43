//! Unitary time-dependence families Lambda(t) and their separation
//! constants.
//!
//! Separating Psi(x, t) = Phi(x) Lambda(t) with a unit quaternionic
//! Lambda turns the time dependence into the eigen-relation
//! dLambda/dt Lambda* = kappa / hbar, with quaternionic separation
//! constant kappa = kappa0 + kappa1 j. Three closed-form families solve
//! it:
//!
//! * `ComplexPhase`   — Lambda = exp(-i E t / hbar) Lambda0, the complex
//!   analogue; kappa = -i E.
//! * `CounterRotating` — a fixed mix of the two counter-rotating complex
//!   phases, cos(Xi) e^{-iEt/h} + sin(Xi) e^{i(Et/h + tau0)} j;
//!   kappa = i E (-cos 2Xi + sin 2Xi e^{i tau0} j).
//! * `JOscillation`   — an oscillation between the complex slot and the
//!   j slot with constant phases; kappa = E e^{i tau0} j.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QqmError, Result};
use crate::quaternion::{self, Quaternion};

/// Quaternionic separation constant kappa = kappa0 + kappa1 j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationConstant {
    pub kappa0: Complex64,
    pub kappa1: Complex64,
}

impl SeparationConstant {
    pub fn new(kappa0: Complex64, kappa1: Complex64) -> Self {
        SeparationConstant { kappa0, kappa1 }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn as_quaternion(&self) -> Quaternion {
        Quaternion::new(self.kappa0, self.kappa1)
    }

    /// The real energy scale i kappa0 of the stationary families.
    pub fn quaternionic_energy(&self) -> f64 {
        (Complex64::i() * self.kappa0).re
    }

    /// Phase of kappa1; zero when kappa1 vanishes.
    pub fn tau0(&self) -> f64 {
        if self.kappa1.norm() == 0.0 {
            0.0
        } else {
            self.kappa1.arg()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeFamilyKind {
    ComplexPhase,
    CounterRotating,
    JOscillation,
}

/// One of the three closed-form unitary time factors.
///
/// `xi` is used by `CounterRotating` only, `x0` by `JOscillation` only;
/// both families use `tau0`. `lambda0` must be a unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaFamily {
    pub family_tag: TimeFamilyKind,
    pub energy: f64,
    #[serde(default)]
    pub xi: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub tau0: f64,
    #[serde(default = "quaternion_one")]
    pub lambda0: Quaternion,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn quaternion_one() -> Quaternion {
    quaternion::ONE
}

fn one() -> f64 {
    1.0
}

impl LambdaFamily {
    pub fn new(
        family_tag: TimeFamilyKind,
        energy: f64,
        xi: f64,
        x0: f64,
        tau0: f64,
        lambda0: Quaternion,
        hbar: f64,
    ) -> Result<Self> {
        let fam = LambdaFamily {
            family_tag,
            energy,
            xi,
            x0,
            tau0,
            lambda0,
            hbar,
        };
        fam.validate()?;
        Ok(fam)
    }

    /// Complex-phase family with trivial constants.
    pub fn complex_phase(energy: f64, hbar: f64) -> Self {
        LambdaFamily {
            family_tag: TimeFamilyKind::ComplexPhase,
            energy,
            xi: 0.0,
            x0: 0.0,
            tau0: 0.0,
            lambda0: quaternion::ONE,
            hbar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.lambda0.norm() - 1.0).abs() > 1e-12 {
            return Err(QqmError::constraint(
                "unit lambda0",
                format!("|lambda0| = {} is not 1", self.lambda0.norm()),
            ));
        }
        if !(self.hbar > 0.0) {
            return Err(QqmError::constraint("positive hbar", "hbar must be > 0"));
        }
        Ok(())
    }

    /// Lambda(t). Unit norm for all t.
    pub fn evaluate(&self, t: f64) -> Quaternion {
        let x = self.energy * t / self.hbar;
        let head = match self.family_tag {
            TimeFamilyKind::ComplexPhase => {
                Quaternion::from_complex(Complex64::from_polar(1.0, -x))
            }
            TimeFamilyKind::CounterRotating => Quaternion::new(
                Complex64::from_polar(self.xi.cos(), -x),
                Complex64::from_polar(self.xi.sin(), x + self.tau0),
            ),
            TimeFamilyKind::JOscillation => Quaternion::new(
                Complex64::from_polar(x.cos(), -self.x0),
                Complex64::from_polar(x.sin(), self.x0 + self.tau0),
            ),
        };
        head * self.lambda0
    }

    /// The closed-form kappa = hbar dLambda/dt Lambda*.
    pub fn kappa(&self) -> SeparationConstant {
        let e = self.energy;
        match self.family_tag {
            TimeFamilyKind::ComplexPhase => {
                SeparationConstant::new(Complex64::new(0.0, -e), Complex64::new(0.0, 0.0))
            }
            TimeFamilyKind::CounterRotating => SeparationConstant::new(
                Complex64::new(0.0, -e * (2.0 * self.xi).cos()),
                Complex64::i() * e * (2.0 * self.xi).sin() * Complex64::from_polar(1.0, self.tau0),
            ),
            TimeFamilyKind::JOscillation => SeparationConstant::new(
                Complex64::new(0.0, 0.0),
                Complex64::from_polar(e, self.tau0),
            ),
        }
    }

    /// Step size balancing truncation against roundoff for the
    /// central-difference check.
    pub fn default_dt(&self) -> f64 {
        if self.energy.abs() > 0.0 {
            1e-5 * self.hbar / self.energy.abs()
        } else {
            1e-5
        }
    }

    /// Max over `t_samples` of |D_c Lambda (t) Lambda*(t) - kappa/hbar|,
    /// where D_c is the second-order central difference with step `dt`.
    /// The residual is O(dt^2) for all three families.
    pub fn verify_separation(&self, t_samples: &[f64], dt: f64) -> f64 {
        assert!(dt > 0.0, "dt must be positive");
        let kappa_over_hbar = self.kappa().as_quaternion().scale(1.0 / self.hbar);
        let mut worst = 0.0_f64;
        for &t in t_samples {
            let deriv = (self.evaluate(t + dt) - self.evaluate(t - dt)).scale(0.5 / dt);
            let resid = (deriv * self.evaluate(t).conj() - kappa_over_hbar).norm();
            worst = worst.max(resid);
        }
        worst
    }
}
