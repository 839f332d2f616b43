//! The quaternionic step potential: V = 0 for x < 0 and V = V0 for x >= 0.
//!
//! Each wave is a free quaternionic particle
//!
//! ```text
//! coef * rho(x) [cos T e^{i(s a x_hat + g_perp).x} + sin T e^{i(-s a x_hat + w_perp).x} j]
//! ```
//!
//! with a real normal wavenumber a, perpendicular phase vectors g_perp and
//! w_perp, modulus direction alpha, and a common mixing angle Theta. The
//! complex factor carries zero energy, so the quaternionic energy
//! EQ = hbar^2 (|g_perp|^2 - |w_perp|^2) / 4m plays the role of the beam
//! energy, and the transmitted normal wavenumber obeys
//! p^2 / k^2 = 1 - V0 / EQ.
//!
//! Reflection flips the normal momentum and, in this construction, also the
//! perpendicular vectors and alpha; transmission scales all of them by
//! p / k. With those choices every matching row at the interface closes in
//! closed form, so the continuity report measures only rounding error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QqmError, Result};
use crate::quaternion::Quaternion;
use crate::Units;

const CONSTRAINT_TOL: f64 = 1e-8;

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn half() -> f64 {
    0.5
}

/// Parameters of one free wave in the step problem. The normal direction
/// is x; `gamma_perp`, `omega_perp` and `alpha` must be orthogonal to it.
/// The modulus factor is rho(x) = A e^{alpha.x} + B e^{-alpha.x}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    /// Magnitude of the normal wavenumber (the propagation is along
    /// +-x depending on the wave's role).
    pub wavenumber: f64,
    pub gamma_perp: [f64; 3],
    pub omega_perp: [f64; 3],
    pub alpha: [f64; 3],
    pub theta: f64,
    #[serde(rename = "A_amp", default = "half")]
    pub a_amp: f64,
    #[serde(rename = "B_amp", default = "half")]
    pub b_amp: f64,
}

impl WaveParams {
    /// rho(0) = A + B.
    pub fn rho0(&self) -> f64 {
        self.a_amp + self.b_amp
    }

    /// grad rho(0) = alpha (A - B).
    pub fn grad_rho0(&self) -> [f64; 3] {
        scale3(self.alpha, self.a_amp - self.b_amp)
    }

    /// Quaternionic energy hbar^2 (|gamma_perp|^2 - |omega_perp|^2) / 4m.
    pub fn quaternionic_energy(&self, units: Units) -> f64 {
        0.5 * units.kinetic_factor() * (dot(self.gamma_perp, self.gamma_perp) - dot(self.omega_perp, self.omega_perp))
    }

    /// A generic valid incident wave for tests and examples: gamma_perp and
    /// omega_perp along y, alpha along z with the magnitude fixed by the
    /// energy balance.
    pub fn example(wavenumber: f64, gamma_perp: f64, omega_perp: f64, theta: f64) -> Self {
        let alpha =
            (wavenumber * wavenumber + 0.5 * (gamma_perp * gamma_perp + omega_perp * omega_perp))
                .sqrt();
        WaveParams {
            wavenumber,
            gamma_perp: [0.0, gamma_perp, 0.0],
            omega_perp: [0.0, omega_perp, 0.0],
            alpha: [0.0, 0.0, alpha],
            theta,
            a_amp: 0.5,
            b_amp: 0.5,
        }
    }
}

/// A step of height `v0` at x = 0 hit by the `incident` wave from the
/// left. Reflected/transmitted rho amplitudes default to the incident ones
/// unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepProblem {
    pub v0: f64,
    pub incident: WaveParams,
    #[serde(default)]
    pub units: Units,
    /// (A, B) of the reflected modulus factor, if different.
    #[serde(default)]
    pub reflected_amps: Option<(f64, f64)>,
    /// (A, B) of the transmitted modulus factor, if different.
    #[serde(default)]
    pub transmitted_amps: Option<(f64, f64)>,
}

impl StepProblem {
    pub fn new(v0: f64, incident: WaveParams, units: Units) -> Result<Self> {
        let prob = StepProblem {
            v0,
            incident,
            units,
            reflected_amps: None,
            transmitted_amps: None,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.units.hbar > 0.0) || !(self.units.mass > 0.0) {
            return Err(QqmError::constraint(
                "positive units",
                "hbar and mass must be > 0",
            ));
        }
        if self.v0 < 0.0 {
            return Err(QqmError::constraint(
                "nonnegative step",
                format!("V0 = {} must be >= 0", self.v0),
            ));
        }
        let w = &self.incident;
        if !(w.wavenumber > 0.0) {
            return Err(QqmError::constraint(
                "positive wavenumber",
                format!("|k| = {} must be > 0", w.wavenumber),
            ));
        }
        for (name, v) in [
            ("gamma_perp", w.gamma_perp),
            ("omega_perp", w.omega_perp),
            ("alpha", w.alpha),
        ] {
            if v[0].abs() > CONSTRAINT_TOL * (1.0 + norm(v)) {
                return Err(QqmError::constraint(
                    "orthogonality",
                    format!("{name} must be normal to the x axis"),
                ));
            }
        }
        for (name, v) in [("gamma_perp", w.gamma_perp), ("omega_perp", w.omega_perp)] {
            if dot(w.alpha, v).abs() > CONSTRAINT_TOL * (1.0 + norm(w.alpha) * norm(v)) {
                return Err(QqmError::constraint(
                    "orthogonality",
                    format!("alpha . {name} must vanish"),
                ));
            }
        }
        let want_alpha_sq = w.wavenumber * w.wavenumber
            + 0.5 * (dot(w.gamma_perp, w.gamma_perp) + dot(w.omega_perp, w.omega_perp));
        let alpha_sq = dot(w.alpha, w.alpha);
        if (alpha_sq - want_alpha_sq).abs() > CONSTRAINT_TOL * (1.0 + want_alpha_sq) {
            return Err(QqmError::constraint(
                "alpha magnitude",
                format!("|alpha|^2 = {alpha_sq}, the energy balance requires {want_alpha_sq}"),
            ));
        }
        let eq = self.quaternionic_energy();
        if eq == 0.0 {
            return Err(QqmError::ZeroEnergyRatio);
        }
        if eq < 0.0 || eq <= self.v0 && self.v0 > 0.0 {
            return Err(QqmError::Evanescent {
                energy: eq,
                v0: self.v0,
            });
        }
        if w.rho0() == 0.0 {
            return Err(QqmError::DegenerateAmplitude(
                "incident rho(0) = A + B vanishes".into(),
            ));
        }
        Ok(())
    }

    pub fn quaternionic_energy(&self) -> f64 {
        self.incident.quaternionic_energy(self.units)
    }
}

/// The role a wave plays, fixing its propagation sign along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveRole {
    Incident,
    Reflected,
    Transmitted,
}

impl WaveRole {
    /// Sign of the normal momentum in the complex slot.
    pub fn sign(&self) -> f64 {
        match self {
            WaveRole::Reflected => -1.0,
            _ => 1.0,
        }
    }
}

/// One concrete wave of the solution: role, parameters and the complex
/// coefficient multiplying it from the left (1, R or T).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub role: WaveRole,
    pub coef: Complex64,
    pub params: WaveParams,
}

impl Wave {
    fn rho(&self, x: [f64; 3]) -> f64 {
        let s = dot(self.params.alpha, x);
        self.params.a_amp * s.exp() + self.params.b_amp * (-s).exp()
    }

    /// The wave's value at a point.
    pub fn evaluate(&self, x: [f64; 3]) -> Quaternion {
        let p = &self.params;
        let s = self.role.sign() * p.wavenumber;
        let z_phase = s * x[0] + dot(p.gamma_perp, x);
        let j_phase = -s * x[0] + dot(p.omega_perp, x);
        Quaternion::new(
            Complex64::from_polar(p.theta.cos(), z_phase),
            Complex64::from_polar(p.theta.sin(), j_phase),
        )
        .lmul_complex(self.coef)
        .scale(self.rho(x))
    }

    /// Analytic gradient at the interface point x = 0.
    pub fn gradient0(&self) -> [Quaternion; 3] {
        let p = &self.params;
        let s = self.role.sign() * p.wavenumber;
        let k_head = Quaternion::new(
            Complex64::new(p.theta.cos(), 0.0),
            Complex64::new(p.theta.sin(), 0.0),
        );
        let rho0 = self.rho([0.0; 3]);
        let grad_rho0 = self.params.grad_rho0();
        let mut out = [crate::quaternion::ZERO; 3];
        let i = Complex64::i();
        for axis in 0..3 {
            let z_k = if axis == 0 { s } else { p.gamma_perp[axis] };
            let j_k = if axis == 0 { -s } else { p.omega_perp[axis] };
            let phase_part = Quaternion::new(
                i * z_k * p.theta.cos(),
                i * j_k * p.theta.sin(),
            )
            .scale(rho0);
            let rho_part = k_head.scale(grad_rho0[axis]);
            out[axis] = (phase_part + rho_part).lmul_complex(self.coef);
        }
        out
    }

    /// Closed-form normal probability current at x = 0:
    /// +- (hbar a / m) rho(0)^2 |coef|^2 cos 2 Theta.
    pub fn normal_current(&self, units: Units) -> f64 {
        let p = &self.params;
        let rho0 = self.rho([0.0; 3]);
        self.role.sign() * units.hbar * p.wavenumber / units.mass
            * rho0
            * rho0
            * self.coef.norm_sqr()
            * (2.0 * p.theta).cos()
    }
}

/// The (S16)-style ratio table of the solved problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub gamma_reflected: f64,
    pub omega_reflected: f64,
    pub grad_rho_reflected: f64,
    pub gamma_transmitted: f64,
    pub omega_transmitted: f64,
    pub grad_rho_transmitted: f64,
    pub alpha_sq_ratio: f64,
    pub p_sq_over_k_sq: f64,
}

/// Full output of the matching problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSolution {
    pub r_coef: Complex64,
    pub t_coef: Complex64,
    pub incident: Wave,
    pub reflected: Wave,
    pub transmitted: Wave,
    pub ratio_table: RatioTable,
}

impl ScatteringSolution {
    pub fn r_sq(&self) -> f64 {
        self.r_coef.norm_sqr()
    }

    pub fn t_sq(&self) -> f64 {
        self.t_coef.norm_sqr()
    }
}

fn ratio_or(out: f64, inp: f64, nominal: f64) -> f64 {
    if inp > 0.0 {
        out / inp
    } else {
        nominal
    }
}

/// Solve the matching problem: derive the reflected and transmitted
/// parameter sets and the coefficients R and T.
pub fn solve_step(prob: &StepProblem) -> Result<ScatteringSolution> {
    prob.validate()?;
    let eq = prob.quaternionic_energy();
    let inc = prob.incident;
    let k = inc.wavenumber;
    let r = (1.0 - prob.v0 / eq).sqrt();
    let p = k * r;

    let (ra, rb) = prob.reflected_amps.unwrap_or((inc.a_amp, inc.b_amp));
    let (ta, tb) = prob.transmitted_amps.unwrap_or((inc.a_amp, inc.b_amp));
    // Reflection flips the perpendicular vectors and alpha; transmission
    // scales them by p/k. This keeps the interface rows exactly closed.
    let reflected_params = WaveParams {
        wavenumber: k,
        gamma_perp: scale3(inc.gamma_perp, -1.0),
        omega_perp: scale3(inc.omega_perp, -1.0),
        alpha: scale3(inc.alpha, -1.0),
        theta: inc.theta,
        a_amp: ra,
        b_amp: rb,
    };
    let transmitted_params = WaveParams {
        wavenumber: p,
        gamma_perp: scale3(inc.gamma_perp, r),
        omega_perp: scale3(inc.omega_perp, r),
        alpha: scale3(inc.alpha, r),
        theta: inc.theta,
        a_amp: ta,
        b_amp: tb,
    };
    let rho_k0 = inc.rho0();
    let rho_q0 = reflected_params.rho0();
    let rho_p0 = transmitted_params.rho0();
    if rho_p0 == 0.0 || rho_q0 == 0.0 {
        return Err(QqmError::DegenerateAmplitude(
            "reflected/transmitted rho(0) vanishes".into(),
        ));
    }
    let r_coef = Complex64::new(rho_k0 * (k - p) / (rho_q0 * (k + p)), 0.0);
    let t_coef = Complex64::new(2.0 * k * rho_k0 / (rho_p0 * (k + p)), 0.0);

    let g_in = norm(inc.gamma_perp);
    let w_in = norm(inc.omega_perp);
    let gr_in = norm(inc.grad_rho0());
    let ratio_table = RatioTable {
        gamma_reflected: ratio_or(norm(reflected_params.gamma_perp), g_in, 1.0),
        omega_reflected: ratio_or(norm(reflected_params.omega_perp), w_in, 1.0),
        grad_rho_reflected: ratio_or(norm(reflected_params.grad_rho0()), gr_in, 1.0),
        gamma_transmitted: ratio_or(norm(transmitted_params.gamma_perp), g_in, r),
        omega_transmitted: ratio_or(norm(transmitted_params.omega_perp), w_in, r),
        grad_rho_transmitted: ratio_or(norm(transmitted_params.grad_rho0()), gr_in, r),
        alpha_sq_ratio: dot(transmitted_params.alpha, transmitted_params.alpha)
            / dot(inc.alpha, inc.alpha),
        p_sq_over_k_sq: r * r,
    };

    Ok(ScatteringSolution {
        r_coef,
        t_coef,
        incident: Wave {
            role: WaveRole::Incident,
            coef: Complex64::new(1.0, 0.0),
            params: inc,
        },
        reflected: Wave {
            role: WaveRole::Reflected,
            coef: r_coef,
            params: reflected_params,
        },
        transmitted: Wave {
            role: WaveRole::Transmitted,
            coef: t_coef,
            params: transmitted_params,
        },
        ratio_table,
    })
}

/// Interface mismatches: wave-function value, normal gradient, and
/// perpendicular gradient, each the max quaternion norm over components.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub value_mismatch: f64,
    pub parallel_mismatch: f64,
    pub perp_mismatch: f64,
}

impl ContinuityReport {
    pub fn max_mismatch(&self) -> f64 {
        self.value_mismatch
            .max(self.parallel_mismatch)
            .max(self.perp_mismatch)
    }
}

/// Evaluate the matching rows at x = 0.
pub fn check_continuity(sol: &ScatteringSolution) -> ContinuityReport {
    let origin = [0.0; 3];
    let left = sol.incident.evaluate(origin) + sol.reflected.evaluate(origin);
    let right = sol.transmitted.evaluate(origin);
    let value_mismatch = (left - right).norm();

    let gi = sol.incident.gradient0();
    let gr = sol.reflected.gradient0();
    let gt = sol.transmitted.gradient0();
    let parallel_mismatch = (gi[0] + gr[0] - gt[0]).norm();
    let perp_mismatch = (gi[1] + gr[1] - gt[1])
        .norm()
        .max((gi[2] + gr[2] - gt[2]).norm());
    ContinuityReport {
        value_mismatch,
        parallel_mismatch,
        perp_mismatch,
    }
}

/// Normal currents of the three waves at the interface and their balance
/// defect (incident + reflected - transmitted). The defect is reported,
/// not asserted.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FluxReport {
    pub incident: f64,
    pub reflected: f64,
    pub transmitted: f64,
    pub defect: f64,
}

pub fn flux_balance(sol: &ScatteringSolution, prob: &StepProblem) -> FluxReport {
    let incident = sol.incident.normal_current(prob.units);
    let reflected = sol.reflected.normal_current(prob.units);
    let transmitted = sol.transmitted.normal_current(prob.units);
    FluxReport {
        incident,
        reflected,
        transmitted,
        defect: incident + reflected - transmitted,
    }
}

/// One row of a V0 sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    pub v0_over_energy: f64,
    pub p_sq_over_k_sq: f64,
    pub r_sq: f64,
    pub t_sq: f64,
    pub flux_defect: f64,
}

/// Sweep the step height as a fraction of the quaternionic energy.
pub fn sweep(incident: WaveParams, units: Units, ratios: &[f64]) -> Result<Vec<SweepRow>> {
    let eq = incident.quaternionic_energy(units);
    let mut rows = Vec::with_capacity(ratios.len());
    for &fraction in ratios {
        let prob = StepProblem::new(fraction * eq, incident, units)?;
        let sol = solve_step(&prob)?;
        let flux = flux_balance(&sol, &prob);
        rows.push(SweepRow {
            v0_over_energy: fraction,
            p_sq_over_k_sq: sol.ratio_table.p_sq_over_k_sq,
            r_sq: sol.r_sq(),
            t_sq: sol.t_sq(),
            flux_defect: flux.defect,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units() -> Units {
        Units::default()
    }

    fn incident() -> WaveParams {
        // |gamma_perp| = 2, |omega_perp| = 1 gives EQ = 3/4.
        WaveParams::example(1.1, 2.0, 1.0, 0.4)
    }

    #[test]
    fn energy_relations_hold_on_output() {
        let prob = StepProblem::new(0.25, incident(), units()).unwrap();
        let eq = prob.quaternionic_energy();
        assert!((eq - 0.75).abs() < 1e-15);
        let sol = solve_step(&prob).unwrap();
        // Reflected energy equals EQ; transmitted equals EQ - V0.
        assert!((sol.reflected.params.quaternionic_energy(units()) - eq).abs() < 1e-12);
        assert!(
            (sol.transmitted.params.quaternionic_energy(units()) - (eq - 0.25)).abs() < 1e-12
        );
        // The alpha balance holds per wave.
        for wave in [&sol.reflected, &sol.transmitted] {
            let p = &wave.params;
            let want = p.wavenumber * p.wavenumber
                + 0.5 * (dot(p.gamma_perp, p.gamma_perp) + dot(p.omega_perp, p.omega_perp));
            assert!((dot(p.alpha, p.alpha) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn transparent_step() {
        let prob = StepProblem::new(0.0, incident(), units()).unwrap();
        let sol = solve_step(&prob).unwrap();
        assert!((sol.ratio_table.p_sq_over_k_sq - 1.0).abs() < 1e-15);
        assert!(sol.r_sq() < 1e-30);
        assert!((sol.t_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_energy_step() {
        let eq = incident().quaternionic_energy(units());
        let prob = StepProblem::new(0.5 * eq, incident(), units()).unwrap();
        let sol = solve_step(&prob).unwrap();
        assert!((sol.ratio_table.p_sq_over_k_sq - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_rho_coefficients() {
        // k = 1, p = 1/sqrt(2), all rho(0) = 1:
        // T^2 = 4 / (1 + 1/sqrt 2)^2, R^2 = (1 - 1/sqrt 2)^2 / (1 + 1/sqrt 2)^2.
        let inc = WaveParams::example(1.0, 2.0, 1.0, 0.4);
        let eq = inc.quaternionic_energy(units());
        let prob = StepProblem::new(0.5 * eq, inc, units()).unwrap();
        let sol = solve_step(&prob).unwrap();
        let s = 0.5_f64.sqrt();
        assert!((sol.t_sq() - 4.0 / (1.0 + s).powi(2)).abs() < 1e-14);
        assert!((sol.r_sq() - (1.0 - s).powi(2) / (1.0 + s).powi(2)).abs() < 1e-14);
        // |q| = |k| premise.
        assert_eq!(sol.reflected.params.wavenumber, 1.0);
    }

    #[test]
    fn s13_identity() {
        let prob = StepProblem::new(0.3, incident(), units()).unwrap();
        let sol = solve_step(&prob).unwrap();
        let k = sol.incident.params.wavenumber;
        let q = sol.reflected.params.wavenumber;
        let p = sol.transmitted.params.wavenumber;
        let rho_k0 = sol.incident.params.rho0();
        let lhs = k - q * sol.r_coef.re * sol.reflected.params.rho0() / rho_k0;
        let rhs = p * sol.t_coef.re * sol.transmitted.params.rho0() / rho_k0;
        assert!((lhs - rhs).abs() < 1e-13, "{lhs} vs {rhs}");
    }

    #[test]
    fn ratio_laws() {
        let prob = StepProblem::new(0.45, incident(), units()).unwrap();
        let sol = solve_step(&prob).unwrap();
        let t = &sol.ratio_table;
        let r = t.p_sq_over_k_sq.sqrt();
        for refl in [t.gamma_reflected, t.omega_reflected, t.grad_rho_reflected] {
            assert!((refl - 1.0).abs() < 1e-12);
        }
        for trans in [t.gamma_transmitted, t.omega_transmitted, t.grad_rho_transmitted] {
            assert!((trans - r).abs() < 1e-12);
        }
        assert!((t.alpha_sq_ratio - t.p_sq_over_k_sq).abs() < 1e-12);
    }

    #[test]
    fn continuity_closes() {
        for fraction in [0.0, 0.25, 0.5, 0.75] {
            let eq = incident().quaternionic_energy(units());
            let prob = StepProblem::new(fraction * eq, incident(), units()).unwrap();
            let sol = solve_step(&prob).unwrap();
            let rep = check_continuity(&sol);
            assert!(
                rep.max_mismatch() < 1e-10,
                "fraction {fraction}: {rep:?}"
            );
        }
    }

    #[test]
    fn continuity_closes_with_uneven_rho_amplitudes() {
        // Equal (A, B) across the three waves close every row even when
        // A != B, so rho(0) != 1 and grad rho(0) != 0.
        let mut inc = incident();
        inc.a_amp = 0.8;
        inc.b_amp = 0.3;
        let prob = StepProblem::new(0.3, inc, units()).unwrap();
        let sol = solve_step(&prob).unwrap();
        assert!(check_continuity(&sol).max_mismatch() < 1e-10);
    }

    #[test]
    fn continuity_detects_perturbed_t() {
        let prob = StepProblem::new(0.3, incident(), units()).unwrap();
        let mut sol = solve_step(&prob).unwrap();
        sol.transmitted.coef += Complex64::new(1e-3, 0.0);
        let rep = check_continuity(&sol);
        assert!(rep.max_mismatch() >= 1e-4, "{rep:?}");
    }

    #[test]
    fn complex_limit_matching() {
        // Theta = 0, no perpendicular omega: the classic step equations
        // R = (k - p)/(k + p), T = 2k/(k + p) with unit rho.
        let inc = WaveParams::example(1.0, 2.0, 0.0, 0.0);
        let eq = inc.quaternionic_energy(units());
        let prob = StepProblem::new(0.5 * eq, inc, units()).unwrap();
        let sol = solve_step(&prob).unwrap();
        let p = sol.transmitted.params.wavenumber;
        assert!((sol.r_coef.re - (1.0 - p) / (1.0 + p)).abs() < 1e-14);
        assert!((sol.t_coef.re - 2.0 / (1.0 + p)).abs() < 1e-14);
        let flux = flux_balance(&sol, &prob);
        assert!(flux.defect.abs() < 1e-10, "{flux:?}");
        // Classic balance |R|^2 + (p/k) |T|^2 = 1.
        assert!((sol.r_sq() + p * sol.t_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flux_defect_vanishes_generically() {
        // The per-wave closed-form currents balance identically with the
        // constructed R and T.
        for fraction in [0.0, 0.2, 0.6, 0.9] {
            let eq = incident().quaternionic_energy(units());
            let prob = StepProblem::new(fraction * eq, incident(), units()).unwrap();
            let sol = solve_step(&prob).unwrap();
            let flux = flux_balance(&sol, &prob);
            assert!(flux.defect.abs() < 1e-10, "fraction {fraction}: {flux:?}");
            assert!(flux.incident > 0.0 && flux.reflected <= 0.0);
        }
    }

    #[test]
    fn reflection_grows_with_step_height() {
        let eq = incident().quaternionic_energy(units());
        let mut last = -1.0;
        for n in 0..20 {
            let fraction = 0.05 * n as f64;
            let prob = StepProblem::new(fraction * eq, incident(), units()).unwrap();
            let sol = solve_step(&prob).unwrap();
            assert!(sol.r_sq() >= last, "fraction {fraction}");
            last = sol.r_sq();
        }
    }

    #[test]
    fn sweep_table() {
        let rows = sweep(incident(), units(), &[0.0, 0.25, 0.5, 0.75]).unwrap();
        let want = [1.0, 0.75, 0.5, 0.25];
        for (row, want) in rows.iter().zip(want) {
            assert!((row.p_sq_over_k_sq - want).abs() < 1e-12);
            assert!(row.flux_defect.abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_evanescent_and_zero_energy() {
        let eq = incident().quaternionic_energy(units());
        assert!(matches!(
            StepProblem::new(1.5 * eq, incident(), units()),
            Err(QqmError::Evanescent { .. })
        ));
        // |gamma_perp| = |omega_perp| gives EQ = 0.
        let zero = WaveParams::example(1.0, 1.0, 1.0, 0.4);
        assert!(matches!(
            StepProblem::new(0.0, zero, units()),
            Err(QqmError::ZeroEnergyRatio)
        ));
    }

    #[test]
    fn rejects_bad_incident_geometry() {
        let mut inc = incident();
        inc.alpha = [0.5, 0.0, inc.alpha[2]];
        let err = StepProblem::new(0.0, inc, units()).unwrap_err();
        assert!(err.to_string().contains("orthogonality"), "{err}");

        let mut inc = incident();
        inc.alpha = scale3(inc.alpha, 2.0);
        let err = StepProblem::new(0.0, inc, units()).unwrap_err();
        assert!(err.to_string().contains("alpha magnitude"), "{err}");
    }

    #[test]
    fn degenerate_rho_rejected() {
        let mut inc = incident();
        inc.a_amp = 0.5;
        inc.b_amp = -0.5;
        assert!(matches!(
            StepProblem::new(0.0, inc, units()),
            Err(QqmError::DegenerateAmplitude(_))
        ));
    }
}
