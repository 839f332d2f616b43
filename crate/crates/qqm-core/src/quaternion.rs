//! Quaternion arithmetic in symplectic form.
//!
//! A quaternion q = x0 + x1 i + x2 j + x3 k is stored as the pair of
//! complex numbers (z, zeta) with q = z + zeta j. The multiplication rule
//! in this form is
//!
//! ```text
//! (z1 + zeta1 j)(z2 + zeta2 j) = (z1 z2 - zeta1 conj(zeta2))
//!                              + (z1 zeta2 + zeta1 conj(z2)) j,
//! ```
//!
//! which encodes j z = conj(z) j once and for all. Left and right
//! multiplication by the complex unit i are distinct operations here:
//! `lmul_i` and `rmul_i` do not agree on a generic quaternion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QqmError, Result};

/// A quaternion in symplectic representation: q = z + zeta j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    /// Houses x0 + x1 i.
    pub z: Complex64,
    /// Houses x2 + x3 i.
    pub zeta: Complex64,
}

pub const ZERO: Quaternion = Quaternion {
    z: Complex64::new(0.0, 0.0),
    zeta: Complex64::new(0.0, 0.0),
};
pub const ONE: Quaternion = Quaternion {
    z: Complex64::new(1.0, 0.0),
    zeta: Complex64::new(0.0, 0.0),
};
pub const I: Quaternion = Quaternion {
    z: Complex64::new(0.0, 1.0),
    zeta: Complex64::new(0.0, 0.0),
};
pub const J: Quaternion = Quaternion {
    z: Complex64::new(0.0, 0.0),
    zeta: Complex64::new(1.0, 0.0),
};
pub const K: Quaternion = Quaternion {
    z: Complex64::new(0.0, 0.0),
    zeta: Complex64::new(0.0, 1.0),
};

impl Quaternion {
    pub fn new(z: Complex64, zeta: Complex64) -> Self {
        Quaternion { z, zeta }
    }

    /// Build from the four real components (x0, x1, x2, x3).
    pub fn from_components(x: [f64; 4]) -> Self {
        Quaternion {
            z: Complex64::new(x[0], x[1]),
            zeta: Complex64::new(x[2], x[3]),
        }
    }

    /// The four real components (x0, x1, x2, x3). Exact round-trip with
    /// `from_components`.
    pub fn components(&self) -> [f64; 4] {
        [self.z.re, self.z.im, self.zeta.re, self.zeta.im]
    }

    pub fn from_complex(z: Complex64) -> Self {
        Quaternion {
            z,
            zeta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    /// Quaternionic conjugate: (z, zeta)* = (conj z, -zeta).
    pub fn conj(&self) -> Self {
        Quaternion {
            z: self.z.conj(),
            zeta: -self.zeta,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z.norm_sqr() + self.zeta.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inverse(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(QqmError::ZeroInverse);
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    pub fn scale(&self, s: f64) -> Self {
        Quaternion {
            z: self.z * s,
            zeta: self.zeta * s,
        }
    }

    /// Left multiplication by a complex scalar: c * q.
    pub fn lmul_complex(&self, c: Complex64) -> Self {
        Quaternion {
            z: c * self.z,
            zeta: c * self.zeta,
        }
    }

    /// Right multiplication by a complex scalar: q * c. Differs from
    /// `lmul_complex` because zeta j c = zeta conj(c) j.
    pub fn rmul_complex(&self, c: Complex64) -> Self {
        Quaternion {
            z: self.z * c,
            zeta: self.zeta * c.conj(),
        }
    }

    /// i * q.
    pub fn lmul_i(&self) -> Self {
        self.lmul_complex(Complex64::new(0.0, 1.0))
    }

    /// q * i. Not the same as `lmul_i` when zeta != 0.
    pub fn rmul_i(&self) -> Self {
        self.rmul_complex(Complex64::new(0.0, 1.0))
    }

    pub fn is_finite(&self) -> bool {
        self.z.re.is_finite()
            && self.z.im.is_finite()
            && self.zeta.re.is_finite()
            && self.zeta.im.is_finite()
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            z: self.z + rhs.z,
            zeta: self.zeta + rhs.zeta,
        }
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            z: self.z - rhs.z,
            zeta: self.zeta - rhs.zeta,
        }
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion {
            z: -self.z,
            zeta: -self.zeta,
        }
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    /// Hamilton product via the symplectic rule.
    fn mul(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            z: self.z * rhs.z - self.zeta * rhs.zeta.conj(),
            zeta: self.z * rhs.zeta + self.zeta * rhs.z.conj(),
        }
    }
}

impl From<Complex64> for Quaternion {
    fn from(z: Complex64) -> Self {
        Quaternion::from_complex(z)
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Quaternion::from_real(x)
    }
}

/// The unit spatial factor K = cos(theta) e^{i gamma} + sin(theta) e^{i omega} j.
///
/// KK* = 1 holds in closed form; numerically the norm is within a few ulp
/// of one for any angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitK {
    pub theta: f64,
    pub gamma_phase: f64,
    pub omega_phase: f64,
}

impl UnitK {
    pub fn new(theta: f64, gamma_phase: f64, omega_phase: f64) -> Self {
        UnitK {
            theta,
            gamma_phase,
            omega_phase,
        }
    }

    pub fn to_quaternion(&self) -> Quaternion {
        build_k(self.theta, self.gamma_phase, self.omega_phase)
    }
}

/// cos(theta) e^{i gamma} + sin(theta) e^{i omega} j.
pub fn build_k(theta: f64, gamma: f64, omega: f64) -> Quaternion {
    Quaternion {
        z: Complex64::from_polar(theta.cos(), gamma),
        zeta: Complex64::from_polar(theta.sin(), omega),
    }
}
