//! Spatial solution families of the separated equation H Phi = i Phi kappa
//! and the residual diagnostics that certify a candidate solution.
//!
//! Every family factors as Phi = phi * rho * (unit-quaternion combination),
//! with a complex plane-wave factor phi, a real modulus factor rho along a
//! direction alpha, and linear phases Gamma = gamma.x + Gamma0,
//! Omega = omega.x + Omega0 mixed by a constant angle Theta. Separability
//! forces |kappa1| cos W = 0 with W = Gamma - Omega + tau0, which splits the
//! solutions into three classes:
//!
//! * `Kappa1Zero`          — kappa1 = 0; gamma and omega collinear, rho a
//!   pair of real exponentials, quaternionic energy
//!   hbar^2 (|gamma|^2 - |omega|^2) / 4m.
//! * `CosWZero`            — cos W = 0 with kappa0 != 0; gamma = omega, the
//!   j-sector locks into a constant unit factor and the energy picks up the
//!   factor cos 2Theta.
//! * `CosWZeroKappa0Zero`  — cos W = 0 with kappa0 = 0; additionally
//!   Theta = pi/4 mod pi/2, and the energy is |kappa1|.
//!
//! The sign of the |alpha|^2 term in the cos W = 0 energies follows the rho
//! branch: growing exponentials contribute -|alpha|^2, the sine/cosine
//! branch +|alpha|^2, and the linear branch drops the term. This binding is
//! what makes the grid residuals of the verifier vanish.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QqmError, Result};
use crate::quaternion::Quaternion;
use crate::time_evolution::{LambdaFamily, SeparationConstant, TimeFamilyKind};
use crate::Units;

const ORTHO_TOL: f64 = 1e-9;
const CONSTRAINT_TOL: f64 = 1e-8;

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn cross_norm(a: [f64; 3], b: [f64; 3]) -> f64 {
    let c = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    norm(c)
}

/// The complex plane-wave factor phi(x) = a1 e^{i k.x} + a2 e^{-i k.x}
/// with energy E = hbar^2 |k|^2 / 2m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub k: [f64; 3],
    pub a1: Complex64,
    pub a2: Complex64,
    pub units: Units,
}

impl PlaneWave {
    pub fn energy(&self) -> f64 {
        self.units.hbar * self.units.hbar * dot(self.k, self.k) / (2.0 * self.units.mass)
    }

    pub fn evaluate(&self, x: [f64; 3]) -> Complex64 {
        let phase = dot(self.k, x);
        self.a1 * Complex64::from_polar(1.0, phase) + self.a2 * Complex64::from_polar(1.0, -phase)
    }
}

/// Build the complex factor and its energy.
pub fn build_phi(k: [f64; 3], a1: Complex64, a2: Complex64, units: Units) -> PlaneWave {
    PlaneWave { k, a1, a2, units }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyClass {
    /// kappa1 = 0.
    Kappa1Zero,
    /// cos W = 0 with kappa0 != 0.
    CosWZero,
    /// cos W = 0 with kappa0 = 0 (Theta quantized to pi/4 mod pi/2).
    CosWZeroKappa0Zero,
}

/// Shape of the modulus factor rho along alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoBranch {
    /// rho = A e^{alpha.x} + B e^{-alpha.x}; laplacian(rho)/rho = +|alpha|^2.
    GrowingExp,
    /// rho = A cos(alpha.x) + B sin(alpha.x); laplacian(rho)/rho = -|alpha|^2.
    Trig,
    /// rho = A + B alpha.x; laplacian(rho) = 0.
    Linear,
}

impl RhoBranch {
    /// Sign s in laplacian(rho)/rho = s |alpha|^2.
    pub fn laplacian_sign(&self) -> f64 {
        match self {
            RhoBranch::GrowingExp => 1.0,
            RhoBranch::Trig => -1.0,
            RhoBranch::Linear => 0.0,
        }
    }
}

fn default_rho_branch() -> RhoBranch {
    RhoBranch::GrowingExp
}

fn one_complex() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn zero_complex() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Raw parameter document of a stationary family; validated by
/// [`StationaryFamily::new`]. Serializes with the same field names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryFamilyParams {
    pub family_tag: FamilyClass,
    /// Wave vector of the complex factor phi.
    #[serde(default)]
    pub k_vec: [f64; 3],
    #[serde(default = "one_complex")]
    pub a1: Complex64,
    #[serde(default = "zero_complex")]
    pub a2: Complex64,
    pub gamma_vec: [f64; 3],
    pub omega_vec: [f64; 3],
    pub alpha_vec: [f64; 3],
    pub theta: f64,
    #[serde(default)]
    pub gamma0: f64,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default)]
    pub tau0: f64,
    #[serde(rename = "A_amp", default = "one_f64")]
    pub a_amp: f64,
    #[serde(rename = "B_amp", default)]
    pub b_amp: f64,
    #[serde(rename = "C1", default = "one_complex")]
    pub c1: Complex64,
    #[serde(rename = "C2", default = "zero_complex")]
    pub c2: Complex64,
    #[serde(rename = "C3", default = "zero_complex")]
    pub c3: Complex64,
    #[serde(rename = "C4", default = "zero_complex")]
    pub c4: Complex64,
    #[serde(default = "default_rho_branch")]
    pub rho_branch: RhoBranch,
    /// Energy of the complex factor; derived from `k_vec` when absent.
    #[serde(rename = "complex_E", default)]
    pub complex_e: Option<f64>,
    #[serde(default = "one_f64")]
    pub hbar: f64,
    #[serde(default = "one_f64")]
    pub mass: f64,
}

fn one_f64() -> f64 {
    1.0
}

/// A validated stationary family with its derived energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryFamily {
    params: StationaryFamilyParams,
    complex_energy: f64,
    energy: f64,
    kappa1_abs: f64,
    sin_w: f64,
}

impl StationaryFamily {
    pub fn new(params: StationaryFamilyParams) -> Result<Self> {
        if !(params.hbar > 0.0) || !(params.mass > 0.0) {
            return Err(QqmError::constraint(
                "positive units",
                "hbar and mass must be > 0",
            ));
        }
        let units = Units {
            hbar: params.hbar,
            mass: params.mass,
        };
        let phi = build_phi(params.k_vec, params.a1, params.a2, units);
        let complex_energy = phi.energy();
        if let Some(given) = params.complex_e {
            if (given - complex_energy).abs() > CONSTRAINT_TOL * (1.0 + complex_energy.abs()) {
                return Err(QqmError::constraint(
                    "complex energy",
                    format!("complex_E = {given} but hbar^2 |k|^2 / 2m = {complex_energy}"),
                ));
            }
        }
        if params.a_amp == 0.0 && params.b_amp == 0.0 {
            return Err(QqmError::constraint(
                "nonzero amplitude",
                "A_amp and B_amp are both zero, rho vanishes identically",
            ));
        }

        let (g, w, a, k) = (
            params.gamma_vec,
            params.omega_vec,
            params.alpha_vec,
            params.k_vec,
        );
        let pairs: [(&str, [f64; 3], [f64; 3]); 5] = [
            ("k . alpha", k, a),
            ("k . gamma", k, g),
            ("k . omega", k, w),
            ("alpha . gamma", a, g),
            ("alpha . omega", a, w),
        ];
        for (name, u, v) in pairs {
            let scale = 1.0 + norm(u) * norm(v);
            if dot(u, v).abs() > ORTHO_TOL * scale {
                return Err(QqmError::constraint(
                    "orthogonality",
                    format!("{name} = {} is not zero", dot(u, v)),
                ));
            }
        }

        let hbar2_2m = params.hbar * params.hbar / (2.0 * params.mass);
        let g2 = dot(g, g);
        let w2 = dot(w, w);
        let a2 = dot(a, a);

        let fam = match params.family_tag {
            FamilyClass::Kappa1Zero => {
                if cross_norm(g, w) > ORTHO_TOL * (1.0 + norm(g) * norm(w)) {
                    return Err(QqmError::constraint(
                        "collinearity",
                        "gamma_vec and omega_vec must be collinear",
                    ));
                }
                if params.rho_branch != RhoBranch::GrowingExp {
                    return Err(QqmError::constraint(
                        "rho branch",
                        "only the growing-exponential rho solves the kappa1 = 0 class",
                    ));
                }
                if g2 < w2 - CONSTRAINT_TOL * (1.0 + g2) {
                    return Err(QqmError::constraint(
                        "gamma-omega ordering",
                        format!("|omega|^2 = {w2} exceeds |gamma|^2 = {g2}"),
                    ));
                }
                let want_a2 = complex_energy / hbar2_2m + 0.5 * (g2 + w2);
                if (a2 - want_a2).abs() > CONSTRAINT_TOL * (1.0 + want_a2.abs()) {
                    return Err(QqmError::constraint(
                        "alpha magnitude",
                        format!("|alpha|^2 = {a2}, the energy balance requires {want_a2}"),
                    ));
                }
                let energy = 0.5 * hbar2_2m * (g2 - w2);
                StationaryFamily {
                    params,
                    complex_energy,
                    energy,
                    kappa1_abs: 0.0,
                    sin_w: 0.0,
                }
            }
            FamilyClass::CosWZero | FamilyClass::CosWZeroKappa0Zero => {
                let dg = [g[0] - w[0], g[1] - w[1], g[2] - w[2]];
                if norm(dg) > ORTHO_TOL * (1.0 + norm(g)) {
                    return Err(QqmError::constraint(
                        "phase gradient alignment",
                        "gamma_vec and omega_vec must coincide when cos W = 0",
                    ));
                }
                let w_phase = params.gamma0 - params.omega0 + params.tau0;
                if w_phase.cos().abs() > 1e-9 {
                    return Err(QqmError::constraint(
                        "phase alignment (cos W = 0)",
                        format!(
                            "Gamma0 - Omega0 + tau0 = {w_phase} is not an odd multiple of pi/2"
                        ),
                    ));
                }
                let sin_w = w_phase.sin().round();
                if params.family_tag == FamilyClass::CosWZeroKappa0Zero {
                    // Theta = pi/4 mod pi/2 <=> cos 2 Theta = 0.
                    if (2.0 * params.theta).cos().abs() > 1e-9 {
                        return Err(QqmError::constraint(
                            "theta quantization",
                            format!(
                                "theta = {} must be an odd multiple of pi/4 when kappa0 = 0",
                                params.theta
                            ),
                        ));
                    }
                }
                let s = params.rho_branch.laplacian_sign();
                let bracket = complex_energy + hbar2_2m * (g2 - s * a2);
                let sin_2t = (2.0 * params.theta).sin();
                let kappa1_abs = -bracket * sin_2t / sin_w;
                if kappa1_abs < -CONSTRAINT_TOL * (1.0 + bracket.abs()) {
                    return Err(QqmError::constraint(
                        "nonnegative kappa1 magnitude",
                        format!(
                            "derived |kappa1| = {kappa1_abs} < 0; \
                             shift Gamma0 - Omega0 + tau0 by pi to flip the W branch"
                        ),
                    ));
                }
                let kappa1_abs = kappa1_abs.max(0.0);
                let energy = match params.family_tag {
                    FamilyClass::CosWZero => (2.0 * params.theta).cos() * bracket,
                    _ => kappa1_abs,
                };
                StationaryFamily {
                    params,
                    complex_energy,
                    energy,
                    kappa1_abs,
                    sin_w,
                }
            }
        };
        Ok(fam)
    }

    pub fn params(&self) -> &StationaryFamilyParams {
        &self.params
    }

    pub fn class(&self) -> FamilyClass {
        self.params.family_tag
    }

    pub fn units(&self) -> Units {
        Units {
            hbar: self.params.hbar,
            mass: self.params.mass,
        }
    }

    /// Quaternionic energy (i kappa0, or |kappa1| in the kappa0 = 0 class).
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Energy E of the complex factor.
    pub fn complex_energy(&self) -> f64 {
        self.complex_energy
    }

    pub fn kappa1_abs(&self) -> f64 {
        self.kappa1_abs
    }

    /// sin W = +-1 for the cos W = 0 classes; 0 otherwise.
    pub fn sin_w(&self) -> f64 {
        self.sin_w
    }

    pub fn kappa(&self) -> SeparationConstant {
        let kappa0 = match self.params.family_tag {
            FamilyClass::CosWZeroKappa0Zero => Complex64::new(0.0, 0.0),
            _ => Complex64::new(0.0, -self.energy),
        };
        let kappa1 = Complex64::from_polar(self.kappa1_abs, self.params.tau0);
        SeparationConstant::new(kappa0, kappa1)
    }

    pub fn phi(&self) -> PlaneWave {
        build_phi(self.params.k_vec, self.params.a1, self.params.a2, self.units())
    }

    pub fn rho_at(&self, x: [f64; 3]) -> f64 {
        let s = dot(self.params.alpha_vec, x);
        let (a, b) = (self.params.a_amp, self.params.b_amp);
        match self.params.rho_branch {
            RhoBranch::GrowingExp => a * s.exp() + b * (-s).exp(),
            RhoBranch::Trig => a * s.cos() + b * s.sin(),
            RhoBranch::Linear => a + b * s,
        }
    }

    pub fn gamma_at(&self, x: [f64; 3]) -> f64 {
        dot(self.params.gamma_vec, x) + self.params.gamma0
    }

    pub fn omega_at(&self, x: [f64; 3]) -> f64 {
        dot(self.params.omega_vec, x) + self.params.omega0
    }

    /// Phi(x). The kappa1 = 0 class combines all four phase signs with the
    /// constants C1..C4; the cos W = 0 classes use C1, C2 and the locked
    /// unit factor cos Theta - i sin W sin Theta e^{i tau0} j.
    pub fn evaluate(&self, x: [f64; 3]) -> Quaternion {
        let p = &self.params;
        let phi = self.phi().evaluate(x);
        let rho = self.rho_at(x);
        let (ct, st) = (p.theta.cos(), p.theta.sin());
        let egamma = Complex64::from_polar(1.0, self.gamma_at(x));
        let eomega = Complex64::from_polar(1.0, self.omega_at(x));
        let q = match p.family_tag {
            FamilyClass::Kappa1Zero => {
                let mut acc = crate::quaternion::ZERO;
                let signs = [
                    (egamma, eomega, p.c1),
                    (egamma, eomega.conj(), p.c2),
                    (egamma.conj(), eomega, p.c3),
                    (egamma.conj(), eomega.conj(), p.c4),
                ];
                for (eg, eo, c) in signs {
                    acc = acc + Quaternion::new(ct * eg, st * eo).rmul_complex(c);
                }
                acc
            }
            _ => {
                let chi = p.c1 * egamma + p.c2 * egamma.conj();
                let locked = Quaternion::new(
                    Complex64::new(ct, 0.0),
                    -Complex64::i() * self.sin_w * st * Complex64::from_polar(1.0, p.tau0),
                );
                locked.lmul_complex(chi)
            }
        };
        q.lmul_complex(phi).scale(rho)
    }

    /// Field closure for grid sampling.
    pub fn wave_function(&self) -> impl Fn([f64; 3]) -> Quaternion + Send + Sync + 'static {
        let fam = *self;
        move |x| fam.evaluate(x)
    }

    /// Time family whose separation constant matches this family's kappa.
    pub fn matching_lambda(&self) -> LambdaFamily {
        let kappa1_abs = self.kappa1_abs;
        match self.params.family_tag {
            FamilyClass::Kappa1Zero => LambdaFamily::complex_phase(self.energy, self.params.hbar),
            FamilyClass::CosWZeroKappa0Zero => LambdaFamily {
                family_tag: TimeFamilyKind::JOscillation,
                energy: kappa1_abs,
                xi: 0.0,
                x0: 0.0,
                tau0: self.params.tau0,
                lambda0: crate::quaternion::ONE,
                hbar: self.params.hbar,
            },
            FamilyClass::CosWZero => {
                if kappa1_abs == 0.0 {
                    return LambdaFamily::complex_phase(self.energy, self.params.hbar);
                }
                let scale = self.energy.hypot(kappa1_abs);
                LambdaFamily {
                    family_tag: TimeFamilyKind::CounterRotating,
                    energy: scale,
                    xi: 0.5 * kappa1_abs.atan2(self.energy),
                    x0: 0.0,
                    tau0: self.params.tau0 - std::f64::consts::FRAC_PI_2,
                    lambda0: crate::quaternion::ONE,
                    hbar: self.params.hbar,
                }
            }
        }
    }

    /// Half-extent along alpha keeping max(rho)/min(rho) below `max_ratio`
    /// for the growing-exponential branch.
    pub fn rho_capped_half_extent(&self, max_ratio: f64) -> f64 {
        let a = norm(self.params.alpha_vec);
        if a == 0.0 || self.params.rho_branch != RhoBranch::GrowingExp {
            f64::INFINITY
        } else {
            max_ratio.ln() / (2.0 * a)
        }
    }
}

/// A single residual that may be indeterminate at a tan/cot pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Residual {
    Value(f64),
    Indeterminate,
}

impl Residual {
    pub fn value(&self) -> Option<f64> {
        match self {
            Residual::Value(v) => Some(*v),
            Residual::Indeterminate => None,
        }
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Residual::Indeterminate)
    }
}

/// Pointwise separation diagnostics for a candidate lambda = rho K.
///
/// The gradient of K splits as grad K = p e^{i Gamma} + q e^{i Omega} j and
/// its laplacian as u e^{i Gamma} + v e^{i Omega} j. Z0, Z1, Z2 collect the
/// rho-phi coupling terms. The four residuals come from the real and
/// imaginary parts of the two symplectic sectors of the separated equation;
/// all four vanish at every point of a genuine solution.
#[derive(Debug, Clone, Copy)]
pub struct SeparationDiagnostics {
    pub p_vec: [Complex64; 3],
    pub q_vec: [Complex64; 3],
    pub u_val: Complex64,
    pub v_val: Complex64,
    pub z0: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
    pub w: f64,
    /// Real part of the cos-sector equation (carries tan Theta terms).
    pub cos_sector_re: Residual,
    /// Imaginary part of the cos-sector equation.
    pub cos_sector_im: Residual,
    /// Real part of the sin-sector equation (carries cot Theta terms).
    pub sin_sector_re: Residual,
    /// Imaginary part of the sin-sector equation.
    pub sin_sector_im: Residual,
}

impl SeparationDiagnostics {
    pub fn residuals(&self) -> [Residual; 4] {
        [
            self.cos_sector_re,
            self.sin_sector_re,
            self.cos_sector_im,
            self.sin_sector_im,
        ]
    }

    /// Largest determinate residual, if any residual is determinate.
    pub fn max_residual(&self) -> Option<f64> {
        self.residuals()
            .iter()
            .filter_map(|r| r.value())
            .map(f64::abs)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.residuals()
            .iter()
            .all(|r| r.value().map_or(true, |v| v.abs() <= tol))
    }
}

/// The scalar fields of a candidate lambda = rho K plus the complex factor.
pub struct ScalarFields<'a> {
    pub rho: &'a dyn Fn([f64; 3]) -> f64,
    pub theta: &'a dyn Fn([f64; 3]) -> f64,
    pub gamma: &'a dyn Fn([f64; 3]) -> f64,
    pub omega: &'a dyn Fn([f64; 3]) -> f64,
    pub phi: &'a dyn Fn([f64; 3]) -> Complex64,
}

impl<'a> ScalarFields<'a> {
    /// Fields of a constructed family (phi energy read off analytically).
    pub fn point_gradient(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], h: f64) -> [f64; 3] {
        let mut g = [0.0; 3];
        for axis in 0..3 {
            g[axis] = stencil_derivative(&|s| f(offset(x, axis, s)), h);
        }
        g
    }
}

fn offset(x: [f64; 3], axis: usize, s: f64) -> [f64; 3] {
    let mut y = x;
    y[axis] += s;
    y
}

/// Fourth-order central first derivative on a 5-point stencil.
fn stencil_derivative(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative on a 5-point stencil.
fn stencil_second(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

fn grad_real(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], h: f64) -> [f64; 3] {
    [
        stencil_derivative(&|s| f(offset(x, 0, s)), h),
        stencil_derivative(&|s| f(offset(x, 1, s)), h),
        stencil_derivative(&|s| f(offset(x, 2, s)), h),
    ]
}

fn laplacian_real(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], h: f64) -> f64 {
    (0..3)
        .map(|axis| stencil_second(&|s| f(offset(x, axis, s)), h))
        .sum()
}

fn grad_complex(f: &dyn Fn([f64; 3]) -> Complex64, x: [f64; 3], h: f64) -> [Complex64; 3] {
    let mut g = [Complex64::new(0.0, 0.0); 3];
    for axis in 0..3 {
        let re = stencil_derivative(&|s| f(offset(x, axis, s)).re, h);
        let im = stencil_derivative(&|s| f(offset(x, axis, s)).im, h);
        g[axis] = Complex64::new(re, im);
    }
    g
}

fn laplacian_complex(f: &dyn Fn([f64; 3]) -> Complex64, x: [f64; 3], h: f64) -> Complex64 {
    let re = (0..3)
        .map(|axis| stencil_second(&|s| f(offset(x, axis, s)).re, h))
        .sum();
    let im = (0..3)
        .map(|axis| stencil_second(&|s| f(offset(x, axis, s)).im, h))
        .sum();
    Complex64::new(re, im)
}

/// Default stencil spacing: 1e-3 in units of 1/|gamma|, or 1e-3 absolute
/// when gamma vanishes.
pub fn default_spacing(gamma_norm: f64) -> f64 {
    if gamma_norm > 0.0 {
        1e-3 / gamma_norm
    } else {
        1e-3
    }
}

/// Threshold below which tan/cot factors are treated as poles.
const POLE_EPS: f64 = 1e-9;

/// Evaluate p, q, u, v, Z0, Z1, Z2 and the four separation residuals at a
/// point, using 5-point stencils of spacing `h` on the supplied closures.
/// The complex-factor energy is recovered from phi itself via
/// E = Re[(-hbar^2/2m laplacian(phi)) / phi], so the check needs no
/// externally supplied E (free-particle context, V = 0).
pub fn separation_diagnostics(
    fields: &ScalarFields,
    kappa: &SeparationConstant,
    units: Units,
    point: [f64; 3],
    h: f64,
) -> SeparationDiagnostics {
    let grad_rho = grad_real(fields.rho, point, h);
    let lap_rho = laplacian_real(fields.rho, point, h);
    let grad_theta = grad_real(fields.theta, point, h);
    let lap_theta = laplacian_real(fields.theta, point, h);
    let grad_gamma = grad_real(fields.gamma, point, h);
    let lap_gamma = laplacian_real(fields.gamma, point, h);
    let grad_omega = grad_real(fields.omega, point, h);
    let lap_omega = laplacian_real(fields.omega, point, h);
    let grad_phi = grad_complex(fields.phi, point, h);
    let lap_phi = laplacian_complex(fields.phi, point, h);

    let rho = (fields.rho)(point);
    let theta = (fields.theta)(point);
    let phi = (fields.phi)(point);
    let (ct, st) = (theta.cos(), theta.sin());
    let i = Complex64::i();

    let hbar2_2m = units.hbar * units.hbar / (2.0 * units.mass);
    let two_m_h2 = 1.0 / hbar2_2m;
    let complex_energy = (-hbar2_2m * lap_phi / phi).re;

    let mut p_vec = [Complex64::new(0.0, 0.0); 3];
    let mut q_vec = [Complex64::new(0.0, 0.0); 3];
    for axis in 0..3 {
        p_vec[axis] = -st * grad_theta[axis] + i * ct * grad_gamma[axis];
        q_vec[axis] = ct * grad_theta[axis] + i * st * grad_omega[axis];
    }
    let g2 = dot(grad_gamma, grad_gamma);
    let o2 = dot(grad_omega, grad_omega);
    let t2 = dot(grad_theta, grad_theta);
    let u_val = -ct * (g2 + t2) - st * lap_theta
        + i * (ct * lap_gamma - 2.0 * st * dot(grad_gamma, grad_theta));
    let v_val = -st * (o2 + t2) + ct * lap_theta
        + i * (st * lap_omega + 2.0 * ct * dot(grad_omega, grad_theta));

    // grad(rho phi) / (rho phi) = grad(rho)/rho + grad(phi)/phi
    let mut log_grad = [Complex64::new(0.0, 0.0); 3];
    for axis in 0..3 {
        log_grad[axis] = grad_rho[axis] / rho + grad_phi[axis] / phi;
    }
    let z0 = lap_rho / rho
        + 2.0 * (grad_phi[0] * grad_rho[0] + grad_phi[1] * grad_rho[1] + grad_phi[2] * grad_rho[2])
            / (phi * rho);
    let mut z1_dot = Complex64::new(0.0, 0.0);
    let mut z2_dot = Complex64::new(0.0, 0.0);
    for axis in 0..3 {
        z1_dot += log_grad[axis] * p_vec[axis];
        z2_dot += log_grad[axis] * q_vec[axis];
    }
    let z1 = if ct.abs() > POLE_EPS {
        2.0 * z1_dot / ct
    } else {
        Complex64::new(f64::NAN, f64::NAN)
    };
    let z2 = if st.abs() > POLE_EPS {
        2.0 * z2_dot / st
    } else {
        Complex64::new(f64::NAN, f64::NAN)
    };

    let quat_energy = kappa.quaternionic_energy();
    let kappa1_abs = kappa.kappa1.norm();
    let tau0 = kappa.tau0();
    let w = (fields.gamma)(point) - (fields.omega)(point) + tau0;

    let cos_sector = if ct.abs() > POLE_EPS {
        let tan_t = st / ct;
        let re = (z0 + z1).re
            - g2
            - t2
            - tan_t * lap_theta
            - two_m_h2 * (complex_energy - quat_energy + kappa1_abs * tan_t * w.sin());
        let im = (z0 + z1).im + lap_gamma - 2.0 * tan_t * dot(grad_theta, grad_gamma)
            - two_m_h2 * kappa1_abs * tan_t * w.cos();
        (Residual::Value(re), Residual::Value(im))
    } else {
        (Residual::Indeterminate, Residual::Indeterminate)
    };
    let sin_sector = if st.abs() > POLE_EPS {
        let cot_t = ct / st;
        let re = (z0 + z2).re
            - o2
            - t2
            + cot_t * lap_theta
            - two_m_h2 * (complex_energy + quat_energy + kappa1_abs * cot_t * w.sin());
        let im = (z0 + z2).im
            + lap_omega
            + 2.0 * cot_t * dot(grad_theta, grad_omega)
            + two_m_h2 * kappa1_abs * cot_t * w.cos();
        (Residual::Value(re), Residual::Value(im))
    } else {
        (Residual::Indeterminate, Residual::Indeterminate)
    };

    SeparationDiagnostics {
        p_vec,
        q_vec,
        u_val,
        v_val,
        z0,
        z1,
        z2,
        w,
        cos_sector_re: cos_sector.0,
        cos_sector_im: cos_sector.1,
        sin_sector_re: sin_sector.0,
        sin_sector_im: sin_sector.1,
    }
}

/// Residual report for the constant-phase configuration
/// (grad Gamma = grad Omega = 0) where Theta may vary.
#[derive(Debug, Clone, Copy)]
pub struct VaryingThetaReport {
    /// Residual of the amplitude equation
    /// laplacian(rho)/rho - |grad Theta|^2 = 2m/hbar^2 (E - EQ cos 2Theta + |kappa1| sin W sin 2Theta).
    pub amplitude_residual: f64,
    /// Residual of the angle equation
    /// laplacian(Theta) = 2m/hbar^2 (EQ sin 2Theta + |kappa1| sin W cos 2Theta).
    pub theta_residual: f64,
}

impl VaryingThetaReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.amplitude_residual.abs() <= tol && self.theta_residual.abs() <= tol
    }
}

/// Check the constant-phase configuration at a point. A non-constant Theta
/// with kappa != 0 leaves a nonzero angle residual; the exotic kappa = 0
/// case with linear Theta and laplacian(rho)/rho = |grad Theta|^2 passes.
pub fn varying_theta_check(
    rho: &dyn Fn([f64; 3]) -> f64,
    theta: &dyn Fn([f64; 3]) -> f64,
    kappa: &SeparationConstant,
    w_phase: f64,
    complex_energy: f64,
    units: Units,
    point: [f64; 3],
    h: f64,
) -> VaryingThetaReport {
    let lap_rho = laplacian_real(rho, point, h);
    let rho_v = rho(point);
    let grad_theta = grad_real(theta, point, h);
    let lap_theta = laplacian_real(theta, point, h);
    let t = theta(point);

    let two_m_h2 = 2.0 * units.mass / (units.hbar * units.hbar);
    let quat_energy = kappa.quaternionic_energy();
    let kappa1_abs = kappa.kappa1.norm();

    let amplitude_residual = lap_rho / rho_v
        - dot(grad_theta, grad_theta)
        - two_m_h2
            * (complex_energy - quat_energy * (2.0 * t).cos()
                + kappa1_abs * w_phase.sin() * (2.0 * t).sin());
    let theta_residual = lap_theta
        - two_m_h2 * (quat_energy * (2.0 * t).sin() + kappa1_abs * w_phase.sin() * (2.0 * t).cos());
    VaryingThetaReport {
        amplitude_residual,
        theta_residual,
    }
}
