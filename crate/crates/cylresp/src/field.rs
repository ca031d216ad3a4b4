//! Displacement and stress fields of a solved excitation, everywhere in the
//! cylinder.
//!
//! The two families share one set of radial functions: family 2 maps onto the
//! family-1 forms by negating the third amplitude and swapping the angular
//! factors (`sin(m theta) -> cos(m theta)` for the `u_r`-class components,
//! `cos(m theta) -> -sin(m theta)` for the `u_theta`-class). The time
//! dependence always factors as `sin(omega t)`; the `stationary_*` accessors
//! return the time-independent part directly.
//!
//! The three curved-surface stresses come from the derivative-free closed
//! forms; `sigma_{theta theta}`, `sigma_{zz}`, and `sigma_{theta z}` are
//! completed through the stress-displacement relations with analytic Bessel
//! derivatives (no numeric differentiation anywhere).
//!
//! Terms of shape `(m/r) B_m(alpha r)` are given their series limits at
//! `r = 0` (`alpha/2` for `m = 1`, zero otherwise, and analogously for the
//! higher inverse powers), so the axis is a legitimate evaluation point.

use crate::bessel::{bessel_i_pair, bessel_j_pair};
use crate::cases::{branch_signs, CaseClassification, CaseId};
use crate::model::{Bvp, ExcitationSpec, MaterialGeometry};
use crate::solver::ModalSolution;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldError {
    /// Point lies outside the closed cylinder.
    OutOfDomain { r: f64, z: f64 },
    /// The solution does not belong to the given classification/excitation.
    Contract { reason: &'static str },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::OutOfDomain { r, z } => {
                write!(f, "point (r={r}, z={z}) outside the cylinder")
            }
            FieldError::Contract { reason } => write!(f, "inconsistent inputs: {reason}"),
        }
    }
}

impl std::error::Error for FieldError {}

/// Spatial point in cylinder coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
}

impl Point {
    pub fn new(r: f64, theta: f64, z: f64) -> Self {
        Self { r, theta, z }
    }
}

/// Displacement triple and stress six-tuple at one point and time.
/// Component order: `u = [u_r, u_theta, u_z]`,
/// `sigma = [rr, theta_theta, zz, r_theta, rz, theta_z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub u: [f64; 3],
    pub sigma: [f64; 6],
    pub t: f64,
}

#[derive(Clone, Copy)]
struct Branch {
    /// `+1` modified (`I`), `-1` ordinary (`J`).
    sigma: f64,
    alpha: f64,
    gamma: f64,
}

impl Branch {
    fn pair(&self, m: u32, r: f64) -> (f64, f64) {
        let x = self.alpha * r;
        if self.sigma > 0.0 {
            bessel_i_pair(m, x).expect("validated radial argument")
        } else {
            bessel_j_pair(m, x).expect("validated radial argument")
        }
    }
}

/// Per-branch radial ingredient values at one radius, with axis limits.
#[derive(Clone, Copy)]
struct Radial {
    /// `B_m(alpha r)`.
    b: f64,
    /// `d/dr B_m(alpha r) = (m/r) B_m + sigma alpha B_{m+1}`.
    d: f64,
    /// `d^2/dr^2`-combination `(m(m-1)/r^2 + sigma alpha^2) B_m - sigma (alpha/r) B_{m+1}`.
    dp: f64,
    /// `(m/r) B_m(alpha r)`.
    m_over_r: f64,
    /// `m(m-1)/r^2 B_m(alpha r)`.
    mm1_over_r2: f64,
    /// `(alpha/r) B_{m+1}(alpha r)`.
    a_over_r: f64,
    /// `(m alpha / r) B_{m+1}(alpha r)`.
    ma_over_r: f64,
}

fn radial(branch: &Branch, m: u32, r: f64) -> Radial {
    let mf = m as f64;
    let a = branch.alpha;
    let s = branch.sigma;
    if r == 0.0 {
        let (b, _) = branch.pair(m, 0.0); // 1 for m = 0, else 0
        return Radial {
            b,
            d: if m == 1 { a / 2.0 } else { 0.0 },
            dp: match m {
                0 => s * a * a / 2.0,
                2 => a * a / 4.0,
                _ => 0.0,
            },
            m_over_r: if m == 1 { a / 2.0 } else { 0.0 },
            mm1_over_r2: if m == 2 { a * a / 4.0 } else { 0.0 },
            a_over_r: if m == 0 { a * a / 2.0 } else { 0.0 },
            ma_over_r: 0.0,
        };
    }
    let (b, bp) = branch.pair(m, r);
    let m_over_r = mf / r * b;
    let mm1_over_r2 = mf * (mf - 1.0) / (r * r) * b;
    let a_over_r = a / r * bp;
    Radial {
        b,
        d: m_over_r + s * a * bp,
        dp: (mf * (mf - 1.0) / (r * r) + s * a * a) * b - s * a_over_r,
        m_over_r,
        mm1_over_r2,
        a_over_r,
        ma_over_r: mf * a_over_r,
    }
}

/// Evaluation context binding a solved excitation to its radial machinery.
pub struct FieldEvaluator<'a> {
    mg: &'a MaterialGeometry,
    ex: &'a ExcitationSpec,
    kz: f64,
    /// None for the `k = 0` single-branch solution.
    branches: Option<[Branch; 2]>,
    /// Family-1 convention amplitudes (family 2 third slot negated here).
    amps: [f64; 3],
    /// `k = 0`: the single shear amplitude and `alpha`.
    k0: Option<(f64, f64)>,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(
        sol: &ModalSolution,
        cls: &CaseClassification,
        ex: &'a ExcitationSpec,
        mg: &'a MaterialGeometry,
    ) -> Result<Self, FieldError> {
        if sol.bvp != ex.bvp || sol.m != ex.m || sol.k != ex.k {
            return Err(FieldError::Contract {
                reason: "solution was produced for a different excitation",
            });
        }
        if sol.case_id != cls.case_id {
            return Err(FieldError::Contract {
                reason: "solution was produced under a different classification",
            });
        }
        let kz = mg.axial_wavenumber(ex.k);
        if sol.case_id == CaseId::KZero {
            return Ok(Self {
                mg,
                ex,
                kz,
                branches: None,
                amps: [0.0; 3],
                k0: Some((sol.amplitudes[0], cls.alpha2)),
            });
        }
        let (s1, s2) = branch_signs(cls.case_id);
        let mut amps = sol.amplitude_triple();
        if ex.bvp == Bvp::Two {
            amps[2] = -amps[2];
        }
        Ok(Self {
            mg,
            ex,
            kz,
            branches: Some([
                Branch {
                    sigma: s1,
                    alpha: cls.alpha1,
                    gamma: cls.gamma1,
                },
                Branch {
                    sigma: s2,
                    alpha: cls.alpha2,
                    gamma: cls.gamma2,
                },
            ]),
            amps,
            k0: None,
        })
    }

    fn check_point(&self, p: &Point) -> Result<(), FieldError> {
        let ok = p.r.is_finite()
            && p.theta.is_finite()
            && p.z.is_finite()
            && (0.0..=self.mg.radius).contains(&p.r)
            && (0.0..=self.mg.length).contains(&p.z);
        if ok {
            Ok(())
        } else {
            Err(FieldError::OutOfDomain { r: p.r, z: p.z })
        }
    }

    /// Angular factors `(fr, ft)`: `fr` multiplies the `u_r`-class components
    /// (`u_r, u_z, sigma_rr, sigma_zz, sigma_tt, sigma_rz`), `ft` the
    /// `u_theta`-class (`u_theta, sigma_rt, sigma_tz`).
    fn angular(&self, theta: f64) -> (f64, f64) {
        let m = self.ex.m as f64;
        match self.ex.bvp {
            Bvp::One => ((m * theta).sin(), (m * theta).cos()),
            Bvp::Two => ((m * theta).cos(), -(m * theta).sin()),
        }
    }

    /// Axial factors `(sin(kz z), cos(kz z))`, exact at the ends: the
    /// simply-supported conditions are identities of the ansatz, not
    /// approximations, so `z = 0` and `z = L` must not pick up the rounding
    /// of `sin(k pi)`.
    fn axial(&self, z: f64) -> (f64, f64) {
        if z == 0.0 {
            return (0.0, 1.0);
        }
        if z == self.mg.length {
            return (0.0, if self.ex.k % 2 == 0 { 1.0 } else { -1.0 });
        }
        ((self.kz * z).sin(), (self.kz * z).cos())
    }

    /// Radial displacement profiles `[R_r, R_t, R_z]` at radius `r`:
    /// the stationary field is `u_r = R_r fr sz`, `u_theta = R_t ft sz`,
    /// `u_z = R_z fr cz` with the angular/axial factors of this excitation.
    fn displacement_radial(&self, r: f64) -> [f64; 3] {
        if let Some((amp, alpha)) = self.k0 {
            let (jm, _) = bessel_j_pair(self.ex.m, alpha * r).expect("validated argument");
            return [0.0, 0.0, amp * jm];
        }
        let branches = self.branches.as_ref().unwrap();
        let m = self.ex.m;
        let rad = [radial(&branches[0], m, r), radial(&branches[1], m, r)];
        let a = &self.amps;
        let u_r = a[0] * rad[0].d + a[1] * rad[1].d - a[2] * rad[1].m_over_r;
        let u_t = a[0] * rad[0].m_over_r + a[1] * rad[1].m_over_r - a[2] * rad[1].d;
        let u_z = a[0] * branches[0].gamma * rad[0].b + a[1] * branches[1].gamma * rad[1].b;
        [u_r, u_t, self.kz * u_z]
    }

    /// Radial stress profiles `[S_rr, S_tt, S_zz, S_rt, S_rz, S_tz]`;
    /// composition rule as in `displacement_radial` (`sz` for the first
    /// four, `cz` for the shear pair; `ft` for `S_rt`, `S_tz`).
    fn stress_radial(&self, r: f64) -> [f64; 6] {
        let mu = self.mg.mu;
        let lambda = self.mg.lambda;
        let m = self.ex.m;
        let mf = m as f64;
        if let Some((amp, alpha)) = self.k0 {
            let (jm, jm1) = bessel_j_pair(m, alpha * r).expect("validated argument");
            let m_over_r = if r == 0.0 {
                if m == 1 {
                    alpha / 2.0
                } else {
                    0.0
                }
            } else {
                mf / r * jm
            };
            let s_rz = mu * amp * (m_over_r - alpha * jm1);
            let s_tz = mu * amp * m_over_r;
            return [0.0, 0.0, 0.0, 0.0, s_rz, s_tz];
        }
        let branches = self.branches.as_ref().unwrap();
        let kz = self.kz;
        let kz_sq = kz * kz;
        let rad = [radial(&branches[0], m, r), radial(&branches[1], m, r)];
        let a = &self.amps;

        let mut s_rr = 0.0;
        let mut s_rt = 0.0;
        let mut u_t = 0.0;
        let mut u_z = 0.0;
        let mut u_r_prime = 0.0;
        let mut hoop = 0.0; // (U_r - m U_theta) / r
        let mut s_rz = 0.0;
        let mut m_over_r_uz = 0.0; // (m/r) U_z
        for s in 0..2 {
            let br = &branches[s];
            let rd = &rad[s];
            let a_sq = br.alpha * br.alpha;
            // beta_s (modified) or -eta_s (ordinary), sign folded via sigma.
            let c = br.sigma * (lambda * (a_sq - br.sigma * br.gamma * kz_sq) + 2.0 * mu * a_sq);
            s_rr += a[s] * (c * rd.b + 2.0 * mu * rd.mm1_over_r2 - br.sigma * 2.0 * mu * rd.a_over_r);
            s_rt += a[s] * 2.0 * mu * (rd.mm1_over_r2 + br.sigma * rd.ma_over_r);
            s_rz += a[s] * (1.0 + br.gamma) * rd.d;
            u_t += a[s] * rd.m_over_r;
            u_z += a[s] * br.gamma * rd.b;
            u_r_prime += a[s] * rd.dp;
            hoop += a[s] * (br.sigma * rd.a_over_r - rd.mm1_over_r2);
            m_over_r_uz += a[s] * br.gamma * rd.m_over_r;
        }
        // Third-amplitude terms ride on the shear branch.
        let b2 = &branches[1];
        let r2 = &rad[1];
        s_rr -= a[2] * 2.0 * mu * (r2.mm1_over_r2 + b2.sigma * r2.ma_over_r);
        s_rt += a[2]
            * 2.0
            * mu
            * (-b2.sigma * b2.alpha * b2.alpha / 2.0 * r2.b - r2.mm1_over_r2
                + b2.sigma * r2.a_over_r);
        s_rz -= a[2] * r2.m_over_r;
        u_t -= a[2] * r2.d;
        u_r_prime -= a[2] * (r2.mm1_over_r2 + b2.sigma * r2.ma_over_r);
        hoop += a[2] * (r2.mm1_over_r2 + b2.sigma * r2.ma_over_r);
        s_rz *= mu * kz;

        let s_tt = lambda * u_r_prime + (lambda + 2.0 * mu) * hoop - lambda * kz_sq * u_z;
        let s_zz = lambda * u_r_prime + lambda * hoop - (lambda + 2.0 * mu) * kz_sq * u_z;
        let s_tz = mu * kz * (u_t + m_over_r_uz);
        [s_rr, s_tt, s_zz, s_rt, s_rz, s_tz]
    }

    /// Stationary displacement `[u_r, u_theta, u_z]` (time factor removed).
    pub fn stationary_displacement(&self, p: &Point) -> Result<[f64; 3], FieldError> {
        self.check_point(p)?;
        let rad = self.displacement_radial(p.r);
        let (fr, ft) = self.angular(p.theta);
        let (sz, cz) = self.axial(p.z);
        Ok([rad[0] * fr * sz, rad[1] * ft * sz, rad[2] * fr * cz])
    }

    /// Stationary stress `[rr, tt, zz, rt, rz, tz]` (time factor removed).
    pub fn stationary_stress(&self, p: &Point) -> Result<[f64; 6], FieldError> {
        self.check_point(p)?;
        let rad = self.stress_radial(p.r);
        let (fr, ft) = self.angular(p.theta);
        let (sz, cz) = self.axial(p.z);
        Ok([
            rad[0] * fr * sz,
            rad[1] * fr * sz,
            rad[2] * fr * sz,
            rad[3] * ft * sz,
            rad[4] * fr * cz,
            rad[5] * ft * cz,
        ])
    }

    /// Full time-dependent displacement at time `t`.
    pub fn displacement(&self, p: &Point, t: f64) -> Result<[f64; 3], FieldError> {
        let base = self.stationary_displacement(p)?;
        let f = (self.ex.omega * t).sin();
        Ok([base[0] * f, base[1] * f, base[2] * f])
    }

    /// Full time-dependent stress at time `t`.
    pub fn stress(&self, p: &Point, t: f64) -> Result<[f64; 6], FieldError> {
        let base = self.stationary_stress(p)?;
        let f = (self.ex.omega * t).sin();
        Ok(base.map(|v| v * f))
    }

    pub fn sample(&self, p: &Point, t: f64) -> Result<FieldSample, FieldError> {
        Ok(FieldSample {
            u: self.displacement(p, t)?,
            sigma: self.stress(p, t)?,
            t,
        })
    }

    /// Maximum over an inclusive `(theta, z)` surface grid of the absolute
    /// mismatch between the computed curved-surface stresses and the
    /// prescribed ones, normalized by the largest prescribed amplitude.
    /// The Bessel profile at `r = R` is shared across the grid; only the
    /// harmonic factors vary.
    pub fn boundary_residual(&self, n_theta: usize, n_z: usize) -> Result<f64, FieldError> {
        assert!(n_theta >= 2 && n_z >= 2, "grid must have at least 2x2 points");
        let amp_scale = self
            .ex
            .amp_a
            .abs()
            .max(self.ex.amp_b.abs())
            .max(self.ex.amp_c.abs());
        let rad = self.stress_radial(self.mg.radius);
        let mut worst = 0.0_f64;
        for i in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
            let (fr, ft) = self.angular(theta);
            for j in 0..n_z {
                let z = self.mg.length * j as f64 / (n_z - 1) as f64;
                let (sz, cz) = self.axial(z);
                let got = [rad[0] * fr * sz, rad[3] * ft * sz, rad[4] * fr * cz];
                let pre = prescribed_surface_stress(self.ex, self.mg, theta, z);
                let local = (got[0] - pre[0])
                    .abs()
                    .max((got[1] - pre[1]).abs())
                    .max((got[2] - pre[2]).abs());
                worst = worst.max(local);
            }
        }
        Ok(worst / amp_scale)
    }
}

/// Prescribed stationary curved-surface stresses
/// `(sigma_rr, sigma_rt, sigma_rz)` at `(theta, z)` for the excitation.
pub fn prescribed_surface_stress(
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
    theta: f64,
    z: f64,
) -> [f64; 3] {
    let m = ex.m as f64;
    let kz = mg.axial_wavenumber(ex.k);
    let (sz, cz) = if z == 0.0 {
        (0.0, 1.0)
    } else if z == mg.length {
        (0.0, if ex.k % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        ((kz * z).sin(), (kz * z).cos())
    };
    match ex.bvp {
        Bvp::One => [
            ex.amp_a * (m * theta).sin() * sz,
            ex.amp_b * (m * theta).cos() * sz,
            ex.amp_c * (m * theta).sin() * cz,
        ],
        Bvp::Two => [
            ex.amp_a * (m * theta).cos() * sz,
            ex.amp_b * (m * theta).sin() * sz,
            ex.amp_c * (m * theta).cos() * cz,
        ],
    }
}
