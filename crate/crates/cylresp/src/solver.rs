//! Boundary-condition linear systems and their solutions.
//!
//! Enforcing the three prescribed curved-surface stresses on the two-branch
//! displacement ansatz gives, for `m >= 1`, a 3x3 linear system in the modal
//! amplitudes. The two excitation families share one matrix up to the sign of
//! the third column and of the second right-hand side entry. The entries are
//! built from Bessel evaluations at `alpha_s R`; the three parameter cases
//! share one entry pattern once each branch carries its sign
//! (`+1` modified, `-1` ordinary):
//!
//! ```text
//! x1 = e1 - s1 v1          e1 = (c1 R/(2 mu) + m(m-1)/R) B_m(a1 R)
//! y1 = (m-1) p1 + s1 m v1  p1 = (m/R) B_m(a1 R),  v1 = a1 B_{m+1}(a1 R)
//! z1 = 2 (p1 + s1 v1)      c_s = s_s (lambda (a_s^2 - s_s g_s kz^2) + 2 mu a_s^2)
//! ```
//! and analogously `x2, y2, z2` plus `t2 = h2 - s2 w2`, `t3 = q2` for the
//! shear branch. Family 1 solves
//! `[[x1,x2,-y2],[y1,y2,-t2],[z1,z2,-t3]] a = (A, B, C)` and family 2 flips
//! the third column and negates `B`.
//!
//! Two independent solution routes are kept: the exact cofactor coefficients
//! (the transcription-sensitive closed forms) and Gaussian elimination with
//! partial pivoting. The first is the production path, the second the oracle.
//!
//! Reduced configurations: `m = 0` in family 1 decouples to one equation for
//! the torsional amplitude; `m = 0` in family 2 to a 2x2 system; `k = 0`
//! (family 2 only) to a single shear-type amplitude
//! `A = C / (mu [(m/R) J_m(a R) - a J_{m+1}(a R)])`.

use crate::bessel::{bessel_i_pair, bessel_i_scaled, bessel_j_pair, BesselError};
use crate::cases::{branch_signs, CaseClassification, CaseId};
use crate::model::{Bvp, ExcitationSpec, MaterialGeometry};
use std::fmt;

/// Determinants whose row-scaled magnitude falls below this floor are treated
/// as exactly resonant and refused.
pub const DET_ABS_FLOOR: f64 = 1e-300;

/// Equilibrated-determinant threshold below which a solution is flagged
/// near-resonant (still reported; the sweep needs peak shapes). The
/// equilibrated determinant is O(0.01..1) away from resonance and crosses
/// zero roughly linearly, so this flags points within ~1 Hz of a crossing
/// on the example cylinder.
pub const NEAR_RESONANCE_DET_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// Input routed to the wrong assembler (wrong `m`, `k`, or family).
    Routing { reason: &'static str },
    /// The determinant is exactly zero (or below the absolute floor):
    /// the excitation frequency coincides with a natural frequency.
    Resonant { det: f64 },
    /// An entry evaluation failed (argument out of range or overflowed).
    Entry(BesselError),
    /// Pivot vanished during elimination.
    SingularMatrix,
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Routing { reason } => write!(f, "routing error: {reason}"),
            SolverError::Resonant { det } => {
                write!(f, "excitation at resonance: determinant = {det}")
            }
            SolverError::Entry(e) => write!(f, "entry evaluation failed: {e}"),
            SolverError::SingularMatrix => write!(f, "singular matrix in elimination"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<BesselError> for SolverError {
    fn from(e: BesselError) -> Self {
        SolverError::Entry(e)
    }
}

/// Evaluated ingredients of the boundary system, one branch pair.
///
/// `sigma1`/`sigma2` are `+1` where the branch uses modified Bessel functions
/// and `-1` where it uses ordinary ones; with that sign folded in, `e`, `h`,
/// `p`, `q`, `v`, `w` are exactly the per-case entry symbols of the closed
/// forms (lowercase set for modified branches, uppercase for ordinary).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemEntries {
    pub m: u32,
    /// `f_m` (modified) or `F_m` (ordinary).
    pub e1: f64,
    /// `g_m` or `G_m`.
    pub e2: f64,
    /// `h_m` or `H_m`.
    pub h2: f64,
    /// `p_m` or `P_m` = `(m/R) B_m(alpha_1 R)`.
    pub p1: f64,
    /// `q_m` or `Q_m` = `(m/R) B_m(alpha_2 R)`.
    pub q2: f64,
    /// `v_{m+1}` or `V_{m+1}` = `alpha_1 B_{m+1}(alpha_1 R)`.
    pub v1: f64,
    /// `w_{m+1}` or `W_{m+1}` = `alpha_2 B_{m+1}(alpha_2 R)`.
    pub w2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub one_plus_gamma2: f64,
    /// `(A, B, C) = (amp_a R / 2 mu, amp_b R / 2 mu, amp_c L / k pi mu)`,
    /// before any family-dependent sign.
    pub rhs: [f64; 3],
}

impl SystemEntries {
    pub fn x1(&self) -> f64 {
        self.e1 - self.sigma1 * self.v1
    }
    pub fn x2(&self) -> f64 {
        self.e2 - self.sigma2 * self.w2
    }
    pub fn y1(&self) -> f64 {
        (self.m as f64 - 1.0) * self.p1 + self.sigma1 * self.m as f64 * self.v1
    }
    pub fn y2(&self) -> f64 {
        (self.m as f64 - 1.0) * self.q2 + self.sigma2 * self.m as f64 * self.w2
    }
    pub fn z1(&self) -> f64 {
        2.0 * (self.p1 + self.sigma1 * self.v1)
    }
    pub fn z2(&self) -> f64 {
        self.one_plus_gamma2 * (self.q2 + self.sigma2 * self.w2)
    }
    pub fn t2(&self) -> f64 {
        self.h2 - self.sigma2 * self.w2
    }
    pub fn t3(&self) -> f64 {
        self.q2
    }

    /// The full 3x3 boundary matrix for the given excitation family.
    pub fn matrix(&self, bvp: Bvp) -> [[f64; 3]; 3] {
        let c3 = match bvp {
            Bvp::One => -1.0,
            Bvp::Two => 1.0,
        };
        [
            [self.x1(), self.x2(), c3 * self.y2()],
            [self.y1(), self.y2(), c3 * self.t2()],
            [self.z1(), self.z2(), c3 * self.t3()],
        ]
    }

    /// Right-hand side for the given family (`B` is negated for family 2).
    pub fn rhs_for(&self, bvp: Bvp) -> [f64; 3] {
        match bvp {
            Bvp::One => self.rhs,
            Bvp::Two => [self.rhs[0], -self.rhs[1], self.rhs[2]],
        }
    }
}

/// Arguments beyond this use the scaled `e^{-x} I_n(x)` in determinant-only
/// assemblies; the factor is constant per matrix column, so the determinant
/// changes only by a positive normalization.
const SCALED_I_THRESHOLD: f64 = 600.0;

/// Branch Bessel pair `(B_m(a R), B_{m+1}(a R))` by branch sign.
fn branch_pair(sigma: f64, m: u32, x: f64, scaled: bool) -> Result<(f64, f64), BesselError> {
    if sigma > 0.0 {
        if scaled && x > SCALED_I_THRESHOLD {
            Ok((bessel_i_scaled(m, x)?, bessel_i_scaled(m + 1, x)?))
        } else {
            bessel_i_pair(m, x)
        }
    } else {
        bessel_j_pair(m, x)
    }
}

fn ensure_finite(entries: &SystemEntries) -> Result<(), SolverError> {
    let vals = [
        entries.e1, entries.e2, entries.h2, entries.p1, entries.q2, entries.v1, entries.w2,
        entries.rhs[0], entries.rhs[1], entries.rhs[2],
    ];
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolverError::Entry(BesselError::Overflow { x: f64::NAN }))
    }
}

fn rhs_vector(ex: &ExcitationSpec, mg: &MaterialGeometry) -> [f64; 3] {
    [
        ex.amp_a * mg.radius / (2.0 * mg.mu),
        ex.amp_b * mg.radius / (2.0 * mg.mu),
        ex.amp_c * mg.length / (ex.k as f64 * std::f64::consts::PI * mg.mu),
    ]
}

/// Assembles the boundary-system ingredients for `m >= 1`, `k >= 1`.
pub fn assemble_system(
    cls: &CaseClassification,
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
) -> Result<SystemEntries, SolverError> {
    if ex.m == 0 {
        return Err(SolverError::Routing {
            reason: "m = 0 uses the reduced axisymmetric/torsional assemblers",
        });
    }
    if cls.case_id == CaseId::KZero || ex.k == 0 {
        return Err(SolverError::Routing {
            reason: "k = 0 uses the dedicated single-amplitude solve",
        });
    }
    assemble_entries(cls, ex, mg)
}

/// Shared entry evaluation for any `m` (the reduced systems reuse it).
fn assemble_entries(
    cls: &CaseClassification,
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
) -> Result<SystemEntries, SolverError> {
    assemble_entries_inner(cls, ex.m, ex.k, mg, rhs_vector(ex, mg), false)
}

/// Entries with a zero right-hand side, for determinant-only scans
/// (resonance detection does not need amplitudes).
pub fn assemble_entries_for_det(
    cls: &CaseClassification,
    m: u32,
    k: u32,
    mg: &MaterialGeometry,
) -> Result<SystemEntries, SolverError> {
    if k == 0 {
        return Err(SolverError::Routing {
            reason: "k = 0 has no two-branch system",
        });
    }
    assemble_entries_inner(cls, m, k, mg, [0.0; 3], true)
}

fn assemble_entries_inner(
    cls: &CaseClassification,
    m: u32,
    k: u32,
    mg: &MaterialGeometry,
    rhs: [f64; 3],
    det_only: bool,
) -> Result<SystemEntries, SolverError> {
    let (sigma1, sigma2) = branch_signs(cls.case_id);
    let mf = m as f64;
    let r = mg.radius;
    let kz = mg.axial_wavenumber(k);
    let kz_sq = kz * kz;
    let (b1, b1p) = branch_pair(sigma1, m, cls.alpha1 * r, det_only)?;
    let (b2, b2p) = branch_pair(sigma2, m, cls.alpha2 * r, det_only)?;
    let a1_sq = cls.alpha1 * cls.alpha1;
    let a2_sq = cls.alpha2 * cls.alpha2;
    // c_s R / (2 mu) with c_s = beta_s (modified) or -eta_s (ordinary).
    let c1 = sigma1 * (mg.lambda * (a1_sq - sigma1 * cls.gamma1 * kz_sq) + 2.0 * mg.mu * a1_sq);
    let c2 = sigma2 * (mg.lambda * (a2_sq - sigma2 * cls.gamma2 * kz_sq) + 2.0 * mg.mu * a2_sq);
    let mm1_over_r = mf * (mf - 1.0) / r;
    let entries = SystemEntries {
        m,
        e1: (c1 * r / (2.0 * mg.mu) + mm1_over_r) * b1,
        e2: (c2 * r / (2.0 * mg.mu) + mm1_over_r) * b2,
        h2: (sigma2 * a2_sq * r / 2.0 + mm1_over_r) * b2,
        p1: mf / r * b1,
        q2: mf / r * b2,
        v1: cls.alpha1 * b1p,
        w2: cls.alpha2 * b2p,
        sigma1,
        sigma2,
        one_plus_gamma2: 1.0 + cls.gamma2,
        rhs,
    };
    ensure_finite(&entries)?;
    Ok(entries)
}

/// The 2x2 axisymmetric system for family 2 with `m = 0`:
/// `[[x1, x2], [z1, z2]] (A1, A2) = (A, C)`.
pub fn assemble_axisymmetric_system(
    cls: &CaseClassification,
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
) -> Result<([[f64; 2]; 2], [f64; 2]), SolverError> {
    if ex.bvp != Bvp::Two {
        return Err(SolverError::Routing {
            reason: "axisymmetric 2x2 system exists only for the second family",
        });
    }
    if ex.m != 0 {
        return Err(SolverError::Routing {
            reason: "axisymmetric system requires m = 0",
        });
    }
    if cls.case_id == CaseId::KZero || ex.k == 0 {
        return Err(SolverError::Routing {
            reason: "k = 0 uses the dedicated single-amplitude solve",
        });
    }
    let e = assemble_entries(cls, ex, mg)?;
    Ok((
        [[e.x1(), e.x2()], [e.z1(), e.z2()]],
        [e.rhs[0], e.rhs[2]],
    ))
}

/// Solved modal amplitudes plus the determinant used for resonance logic.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalSolution {
    pub bvp: Bvp,
    pub m: u32,
    pub k: u32,
    pub case_id: CaseId,
    /// Length 3 for `m >= 1`; length 2 for `m = 0` family 2; length 1 for
    /// `m = 0` family 1 and for `k = 0`.
    pub amplitudes: Vec<f64>,
    /// Determinant of the boundary system in the closed-form normalization
    /// (for family 2 the 3x3 matrix determinant is `-det`; the zero set,
    /// which is what matters, is identical).
    pub det: f64,
    /// Row-and-column equilibrated determinant, a dimensionless proximity-to-
    /// resonance measure in roughly `[-1, 1]`.
    pub det_scaled: f64,
    pub near_resonance: bool,
}

impl ModalSolution {
    /// Amplitudes padded to the three-slot layout of the full field formulas
    /// (first-family convention). Not defined for `k = 0` solutions, whose
    /// field has its own shape.
    pub fn amplitude_triple(&self) -> [f64; 3] {
        match (self.bvp, self.m) {
            _ if self.k == 0 => panic!("k = 0 solutions have a single-amplitude field"),
            (Bvp::One, 0) => [0.0, 0.0, self.amplitudes[0]],
            (Bvp::Two, 0) => [self.amplitudes[0], self.amplitudes[1], 0.0],
            _ => [self.amplitudes[0], self.amplitudes[1], self.amplitudes[2]],
        }
    }
}

/// Amplitude sign pattern of the closed-form solution for each family:
/// `(-1, +1, +1)` for family 1 and `(-1, +1, -1)` for family 2.
pub fn delta_signs(bvp: Bvp) -> [f64; 3] {
    match bvp {
        Bvp::One => [-1.0, 1.0, 1.0],
        Bvp::Two => [-1.0, 1.0, -1.0],
    }
}

/// The nine exact cofactor coefficients and the determinant of the 3x3
/// system, as functions of the entry blocks (identical structure in all
/// three cases). Returns `(c_a, c_b, c_c, det)` with
/// `amp_i = delta_i (c_a[i] A + c_b[i] B + c_c[i] C) / det` for family 1
/// and the `B` sign flipped for family 2.
pub fn closed_form_coefficients(e: &SystemEntries) -> ([f64; 3], [f64; 3], [f64; 3], f64) {
    let (x1, x2) = (e.x1(), e.x2());
    let (y1, y2) = (e.y1(), e.y2());
    let (z1, z2) = (e.z1(), e.z2());
    let (t2, t3) = (e.t2(), e.t3());
    let c_a = [y2 * t3 - t2 * z2, y1 * t3 - t2 * z1, y1 * z2 - y2 * z1];
    let c_b = [y2 * z2 - x2 * t3, y2 * z1 - x1 * t3, x2 * z1 - x1 * z2];
    let c_c = [x2 * t2 - y2 * y2, x1 * t2 - y2 * y1, x1 * y2 - x2 * y1];
    let det = (y2 * y2 - x2 * t2) * z1 + (x1 * t2 - y1 * y2) * z2 + (x2 * y1 - x1 * y2) * t3;
    (c_a, c_b, c_c, det)
}

/// The reduced `m = 1` coefficient formulas (the special case where
/// `y1 = s1 v1`, `y2 = s2 w2`). Algebraically identical to
/// `closed_form_coefficients` at `m = 1`; kept as an independent
/// transcription for cross-checking.
pub fn closed_form_coefficients_m1(
    e: &SystemEntries,
) -> Option<([f64; 3], [f64; 3], [f64; 3], f64)> {
    if e.m != 1 {
        return None;
    }
    let (s1, s2) = (e.sigma1, e.sigma2);
    let g = e.one_plus_gamma2;
    let (f1, g1, h1) = (e.e1, e.e2, e.h2);
    let (p1, q1) = (e.p1, e.q2);
    let (v2, w2) = (e.v1, e.w2);
    let c_a = [
        s2 * q1 * w2 - g * (h1 - s2 * w2) * (q1 + s2 * w2),
        s1 * q1 * v2 - 2.0 * (h1 - s2 * w2) * (p1 + s1 * v2),
        g * (q1 + s2 * w2) * s1 * v2 - 2.0 * (p1 + s1 * v2) * s2 * w2,
    ];
    let c_b = [
        g * (q1 + s2 * w2) * s2 * w2 - (g1 - s2 * w2) * q1,
        2.0 * (p1 + s1 * v2) * s2 * w2 - (f1 - s1 * v2) * q1,
        2.0 * (g1 - s2 * w2) * (p1 + s1 * v2) - g * (f1 - s1 * v2) * (q1 + s2 * w2),
    ];
    let c_c = [
        (g1 - s2 * w2) * (h1 - s2 * w2) - s2 * w2 * s2 * w2,
        (f1 - s1 * v2) * (h1 - s2 * w2) - s1 * v2 * s2 * w2,
        (f1 - s1 * v2) * s2 * w2 - (g1 - s2 * w2) * s1 * v2,
    ];
    let det = 2.0 * (s2 * w2 * s2 * w2 - (g1 - s2 * w2) * (h1 - s2 * w2)) * (p1 + s1 * v2)
        + g * ((f1 - s1 * v2) * (h1 - s2 * w2) - s1 * v2 * s2 * w2) * (q1 + s2 * w2)
        + ((g1 - s2 * w2) * s1 * v2 - (f1 - s1 * v2) * s2 * w2) * q1;
    Some((c_a, c_b, c_c, det))
}

/// Equilibrated determinant: rows then columns scaled by their max-abs.
/// Insensitive to the exponential entry growth and to whole columns
/// vanishing at case boundaries.
fn equilibrated_det(matrix: &[[f64; 3]; 3]) -> f64 {
    let mut m = *matrix;
    for row in m.iter_mut() {
        let mx = row.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        if mx > 0.0 {
            for v in row.iter_mut() {
                *v /= mx;
            }
        }
    }
    for j in 0..3 {
        let mx = (0..3).fold(0.0_f64, |a, i| a.max(m[i][j].abs()));
        if mx > 0.0 {
            for row in m.iter_mut() {
                row[j] /= mx;
            }
        }
    }
    det3(&m)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn equilibrated_det2(matrix: &[[f64; 2]; 2]) -> f64 {
    let mut m = *matrix;
    for row in m.iter_mut() {
        let mx = row[0].abs().max(row[1].abs());
        if mx > 0.0 {
            row[0] /= mx;
            row[1] /= mx;
        }
    }
    for j in 0..2 {
        let mx = m[0][j].abs().max(m[1][j].abs());
        if mx > 0.0 {
            m[0][j] /= mx;
            m[1][j] /= mx;
        }
    }
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Row-scaled determinant magnitude used for the absolute resonance floor.
fn row_scaled_det(matrix: &[[f64; 3]; 3]) -> f64 {
    let mut m = *matrix;
    for row in m.iter_mut() {
        let mx = row.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        if mx > 0.0 {
            for v in row.iter_mut() {
                *v /= mx;
            }
        }
    }
    det3(&m)
}

/// Solves the assembled `m >= 1` system by the exact closed-form
/// coefficients.
pub fn solve_closed_form(
    entries: &SystemEntries,
    cls: &CaseClassification,
    ex: &ExcitationSpec,
) -> Result<ModalSolution, SolverError> {
    if ex.m == 0 {
        return Err(SolverError::Routing {
            reason: "m = 0 uses the reduced solves",
        });
    }
    let (c_a, c_b, c_c, det) = closed_form_coefficients(entries);
    let matrix = entries.matrix(ex.bvp);
    if row_scaled_det(&matrix).abs() < DET_ABS_FLOOR {
        return Err(SolverError::Resonant { det });
    }
    let delta = delta_signs(ex.bvp);
    let rhs = entries.rhs_for(ex.bvp); // family-2 sign of B already applied
    let amplitudes: Vec<f64> = (0..3)
        .map(|i| delta[i] * (c_a[i] * rhs[0] + c_b[i] * rhs[1] + c_c[i] * rhs[2]) / det)
        .collect();
    let det_scaled = equilibrated_det(&matrix);
    Ok(ModalSolution {
        bvp: ex.bvp,
        m: ex.m,
        k: ex.k,
        case_id: cls.case_id,
        amplitudes,
        det,
        det_scaled,
        near_resonance: det_scaled.abs() < NEAR_RESONANCE_DET_TOL,
    })
}

/// Gaussian elimination with partial pivoting for the small boundary systems.
/// Independent of the closed-form route; serves as its oracle.
pub fn solve_generic(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = matrix.len();
    assert!(
        (2..=3).contains(&n) && matrix.iter().all(|r| r.len() == n) && rhs.len() == n,
        "solve_generic handles square systems of size 2 or 3"
    );
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut b: Vec<f64> = rhs.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col] == 0.0 {
            return Err(SolverError::SingularMatrix);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[row][j] * x[j];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// `m = 0`, family 1: the boundary conditions decouple to one equation for
/// the torsional amplitude, `-t2 * a3 = B`.
fn solve_m0_bvp1(
    cls: &CaseClassification,
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
) -> Result<ModalSolution, SolverError> {
    let e = assemble_entries(cls, ex, mg)?;
    let det = -e.t2();
    if det.abs() < DET_ABS_FLOOR * e.h2.abs().max(e.w2.abs()).max(1.0) {
        return Err(SolverError::Resonant { det });
    }
    let a3 = e.rhs[1] / det;
    let det_scaled = det / e.h2.abs().max(e.w2.abs());
    Ok(ModalSolution {
        bvp: ex.bvp,
        m: 0,
        k: ex.k,
        case_id: cls.case_id,
        amplitudes: vec![a3],
        det,
        det_scaled,
        near_resonance: det_scaled.abs() < NEAR_RESONANCE_DET_TOL,
    })
}

/// `m = 0`, family 2: the 2x2 axisymmetric solve (closed form).
fn solve_m0_bvp2(
    cls: &CaseClassification,
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
) -> Result<ModalSolution, SolverError> {
    let (matrix, rhs) = assemble_axisymmetric_system(cls, ex, mg)?;
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    let det_scaled = equilibrated_det2(&matrix);
    let row_scale = matrix
        .iter()
        .map(|r| r[0].abs().max(r[1].abs()))
        .fold(1.0, |a, b| a * if b > 0.0 { b } else { 1.0 });
    if (det / row_scale).abs() < DET_ABS_FLOOR {
        return Err(SolverError::Resonant { det });
    }
    let a1 = (matrix[1][1] * rhs[0] - matrix[0][1] * rhs[1]) / det;
    let a2 = (matrix[0][0] * rhs[1] - matrix[1][0] * rhs[0]) / det;
    Ok(ModalSolution {
        bvp: ex.bvp,
        m: 0,
        k: ex.k,
        case_id: cls.case_id,
        amplitudes: vec![a1, a2],
        det,
        det_scaled,
        near_resonance: det_scaled.abs() < NEAR_RESONANCE_DET_TOL,
    })
}

/// `k = 0` (family 2 only): single amplitude
/// `A = C / (mu [(m/R) J_m(a R) - a J_{m+1}(a R)])`, `a = sqrt(rho omega^2 / mu)`.
pub fn solve_k0(
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
) -> Result<ModalSolution, SolverError> {
    if ex.k != 0 {
        return Err(SolverError::Routing {
            reason: "solve_k0 requires k = 0",
        });
    }
    if ex.bvp != Bvp::Two {
        return Err(SolverError::Routing {
            reason: "the k = 0 solution exists only for the second family",
        });
    }
    let alpha = (mg.rho * ex.omega * ex.omega / mg.mu).sqrt();
    let (jm, jm1) = bessel_j_pair(ex.m, alpha * mg.radius)?;
    let det = (ex.m as f64 / mg.radius) * jm - alpha * jm1;
    let scale = ((ex.m as f64 / mg.radius) * jm).abs().max((alpha * jm1).abs());
    if det.abs() < DET_ABS_FLOOR * scale.max(1.0) {
        return Err(SolverError::Resonant { det });
    }
    let amplitude = ex.amp_c / (mg.mu * det);
    let det_scaled = if scale > 0.0 { det / scale } else { det };
    Ok(ModalSolution {
        bvp: ex.bvp,
        m: ex.m,
        k: 0,
        case_id: CaseId::KZero,
        amplitudes: vec![amplitude],
        det,
        det_scaled,
        near_resonance: det_scaled.abs() < NEAR_RESONANCE_DET_TOL,
    })
}

/// Classified solve: routes to the full 3x3, the reduced `m = 0` forms, or
/// the `k = 0` form, using the closed-form path.
pub fn solve_modal(
    cls: &CaseClassification,
    ex: &ExcitationSpec,
    mg: &MaterialGeometry,
) -> Result<ModalSolution, SolverError> {
    if ex.k == 0 {
        return solve_k0(ex, mg);
    }
    match ex.m {
        0 => match ex.bvp {
            Bvp::One => solve_m0_bvp1(cls, ex, mg),
            Bvp::Two => solve_m0_bvp2(cls, ex, mg),
        },
        _ => {
            let entries = assemble_system(cls, ex, mg)?;
            solve_closed_form(&entries, cls, ex)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::classify;
    use crate::model::{Bvp, ExcitationSpec, MaterialGeometry};
    use std::f64::consts::PI;

    fn table_cylinder() -> MaterialGeometry {
        MaterialGeometry::from_young_poisson(190e9, 0.30, 8000.0, 0.15, 0.05).unwrap()
    }

    fn make_ex(bvp: Bvp, m: u32, k: u32, f: f64) -> ExcitationSpec {
        ExcitationSpec::new(bvp, m, k, 2.0 * PI * f, 1e5, 1e5, 1e5).unwrap()
    }

    #[test]
    fn entries_match_direct_formulas_case1() {
        // p_m must equal (m/R) I_m(alpha_1 R) bit-for-bit, etc.
        let mg = table_cylinder();
        let ex = make_ex(Bvp::One, 2, 1, 5e3);
        let cls = classify(&mg, 1, ex.omega).unwrap();
        assert_eq!(cls.case_id, CaseId::Case1);
        let e = assemble_system(&cls, &ex, &mg).unwrap();
        let r = mg.radius;
        let im = crate::bessel::bessel_i(2, cls.alpha1 * r).unwrap();
        assert_eq!(e.p1, 2.0 / r * im);
        let im2 = crate::bessel::bessel_i(3, cls.alpha2 * r).unwrap();
        assert_eq!(e.w2, cls.alpha2 * im2);
        let kz2 = mg.axial_wavenumber(1).powi(2);
        let beta1 =
            mg.lambda * (cls.alpha1.powi(2) - cls.gamma1 * kz2) + 2.0 * mg.mu * cls.alpha1.powi(2);
        assert_eq!(
            e.e1,
            (beta1 * r / (2.0 * mg.mu) + 2.0 * 1.0 / r) * im
        );
        assert_eq!(
            e.rhs,
            [
                1e5 * r / (2.0 * mg.mu),
                1e5 * r / (2.0 * mg.mu),
                1e5 * mg.length / (PI * mg.mu)
            ]
        );
    }

    #[test]
    fn entries_match_direct_formulas_case2() {
        let mg = table_cylinder();
        let ex = make_ex(Bvp::One, 1, 1, 25e3);
        let cls = classify(&mg, 1, ex.omega).unwrap();
        assert_eq!(cls.case_id, CaseId::Case2);
        let e = assemble_system(&cls, &ex, &mg).unwrap();
        let r = mg.radius;
        let kz2 = mg.axial_wavenumber(1).powi(2);
        let jm = crate::bessel::bessel_j(1, cls.alpha2 * r).unwrap();
        let eta2 =
            mg.lambda * (cls.alpha2.powi(2) + cls.gamma2 * kz2) + 2.0 * mg.mu * cls.alpha2.powi(2);
        assert_eq!(e.e2, (-eta2 * r / (2.0 * mg.mu)) * jm);
        assert_eq!(e.h2, (-cls.alpha2.powi(2) * r / 2.0) * jm);
    }

    #[test]
    fn family_matrices_differ_only_in_third_column_and_b_sign() {
        let mg = table_cylinder();
        for f in [5e3, 15e3, 25e3] {
            let ex1 = make_ex(Bvp::One, 2, 1, f);
            let ex2 = make_ex(Bvp::Two, 2, 1, f);
            let cls = classify(&mg, 1, ex1.omega).unwrap();
            let e1 = assemble_system(&cls, &ex1, &mg).unwrap();
            let m1 = e1.matrix(ex1.bvp);
            let m2 = e1.matrix(ex2.bvp);
            for i in 0..3 {
                assert_eq!(m1[i][0], m2[i][0]);
                assert_eq!(m1[i][1], m2[i][1]);
                assert_eq!(m1[i][2], -m2[i][2]);
            }
            assert_eq!(e1.rhs_for(Bvp::One)[1], -e1.rhs_for(Bvp::Two)[1]);
            assert_eq!(e1.rhs_for(Bvp::One)[0], e1.rhs_for(Bvp::Two)[0]);
        }
    }

    #[test]
    fn homogeneous_rhs_gives_zero_amplitudes() {
        let mg = table_cylinder();
        for (bvp, f) in [(Bvp::One, 5e3), (Bvp::Two, 15e3), (Bvp::One, 25e3)] {
            let ex = ExcitationSpec {
                bvp,
                m: 2,
                k: 1,
                omega: 2.0 * PI * f,
                amp_a: 0.0,
                amp_b: 0.0,
                amp_c: 0.0,
            };
            let cls = classify(&mg, 1, ex.omega).unwrap();
            let e = assemble_system(&cls, &ex, &mg).unwrap();
            let sol = solve_closed_form(&e, &cls, &ex).unwrap();
            assert_eq!(sol.amplitudes, vec![0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn closed_form_agrees_with_elimination() {
        let mg = table_cylinder();
        for bvp in [Bvp::One, Bvp::Two] {
            for m in [1u32, 2, 3] {
                for k in 1u32..=5 {
                    for fk in 1..=100u32 {
                        let f = fk as f64 * 1e3;
                        let ex = ExcitationSpec::new(bvp, m, k, 2.0 * PI * f, 1e5, 1e5, 1e5)
                            .unwrap();
                        let Ok(cls) = classify(&mg, k, ex.omega) else {
                            continue;
                        };
                        let e = assemble_system(&cls, &ex, &mg).unwrap();
                        let sol = solve_closed_form(&e, &cls, &ex).unwrap();
                        if sol.det_scaled.abs() < 1e-3 {
                            continue; // near-resonant grid point
                        }
                        let matrix: Vec<Vec<f64>> =
                            e.matrix(bvp).iter().map(|r| r.to_vec()).collect();
                        let generic = solve_generic(&matrix, &e.rhs_for(bvp)).unwrap();
                        let scale = sol
                            .amplitudes
                            .iter()
                            .fold(0.0_f64, |a, &v| a.max(v.abs()));
                        for i in 0..3 {
                            assert!(
                                (sol.amplitudes[i] - generic[i]).abs() / scale < 1e-11,
                                "bvp {bvp} m={m} k={k} f={f}: {:?} vs {:?}",
                                sol.amplitudes,
                                generic
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn m1_reduced_formulas_match_general() {
        let mg = table_cylinder();
        for bvp in [Bvp::One, Bvp::Two] {
            for k in 1u32..=4 {
                for f in [3e3, 9e3, 14e3, 22e3, 31e3, 47e3, 66e3, 88e3] {
                    let ex = ExcitationSpec::new(bvp, 1, k, 2.0 * PI * f, 1e5, 1e5, 1e5).unwrap();
                    let Ok(cls) = classify(&mg, k, ex.omega) else {
                        continue;
                    };
                    let e = assemble_system(&cls, &ex, &mg).unwrap();
                    let (ca, cb, cc, d) = closed_form_coefficients(&e);
                    let (ca1, cb1, cc1, d1) = closed_form_coefficients_m1(&e).unwrap();
                    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-280);
                    assert!(rel(d, d1) < 1e-13, "det {d} vs {d1}");
                    for i in 0..3 {
                        assert!(rel(ca[i], ca1[i]) < 1e-13, "ca[{i}]");
                        assert!(rel(cb[i], cb1[i]) < 1e-13, "cb[{i}]");
                        assert!(rel(cc[i], cc1[i]) < 1e-13, "cc[{i}]");
                    }
                }
            }
        }
    }

    #[test]
    fn residual_of_assembled_system_is_small() {
        let mg = table_cylinder();
        for bvp in [Bvp::One, Bvp::Two] {
            for (m, k, f) in [(1u32, 1u32, 5e3), (2, 2, 15e3), (3, 1, 25e3), (1, 4, 60e3)] {
                let ex = ExcitationSpec::new(bvp, m, k, 2.0 * PI * f, 1e5, 3e4, -2e5).unwrap();
                let cls = classify(&mg, k, ex.omega).unwrap();
                let e = assemble_system(&cls, &ex, &mg).unwrap();
                let sol = solve_closed_form(&e, &cls, &ex).unwrap();
                let matrix = e.matrix(bvp);
                let rhs = e.rhs_for(bvp);
                let rhs_scale = rhs.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
                for i in 0..3 {
                    let ax: f64 = (0..3).map(|j| matrix[i][j] * sol.amplitudes[j]).sum();
                    assert!(
                        (ax - rhs[i]).abs() / rhs_scale < 1e-10,
                        "row {i}: {ax} vs {}",
                        rhs[i]
                    );
                }
            }
        }
    }

    #[test]
    fn generic_solver_basics() {
        let id: Vec<Vec<f64>> = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let b = [3.0, -4.0, 5.5];
        assert_eq!(solve_generic(&id, &b).unwrap(), b.to_vec());
        let diag = vec![vec![2.0, 0.0], vec![0.0, 4.0]];
        assert_eq!(solve_generic(&diag, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        let singular = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(
            solve_generic(&singular, &[1.0, 2.0]),
            Err(SolverError::SingularMatrix)
        ));
    }

    #[test]
    fn delta_sign_conventions_confirmed_by_elimination() {
        // Closed form uses delta = (-1, +1, +1) for family 1 and
        // (-1, +1, -1) for family 2; elimination on the corresponding matrix
        // must agree with each component including sign.
        let mg = table_cylinder();
        for bvp in [Bvp::One, Bvp::Two] {
            let ex = ExcitationSpec::new(bvp, 2, 1, 2.0 * PI * 7e3, 2e5, -1e5, 4e4).unwrap();
            let cls = classify(&mg, 1, ex.omega).unwrap();
            let e = assemble_system(&cls, &ex, &mg).unwrap();
            let sol = solve_closed_form(&e, &cls, &ex).unwrap();
            let matrix: Vec<Vec<f64>> = e.matrix(bvp).iter().map(|r| r.to_vec()).collect();
            let generic = solve_generic(&matrix, &e.rhs_for(bvp)).unwrap();
            for i in 0..3 {
                let denom = generic[i].abs().max(1e-300);
                assert!(
                    (sol.amplitudes[i] - generic[i]).abs() / denom < 1e-9,
                    "component {i} sign/value mismatch: {} vs {}",
                    sol.amplitudes[i],
                    generic[i]
                );
            }
        }
    }

    #[test]
    fn m0_family2_matches_paper_reduced_forms() {
        let mg = table_cylinder();
        for (f, expect_case) in [(5e3, CaseId::Case1), (25e3, CaseId::Case2), (15e3, CaseId::Case3)]
        {
            let ex = ExcitationSpec::new(Bvp::Two, 0, 1, 2.0 * PI * f, 1e5, 0.0, 1e5).unwrap();
            let cls = classify(&mg, 1, ex.omega).unwrap();
            assert_eq!(cls.case_id, expect_case);
            let (matrix, rhs) = assemble_axisymmetric_system(&cls, &ex, &mg).unwrap();
            let sol = solve_modal(&cls, &ex, &mg).unwrap();
            assert_eq!(sol.amplitudes.len(), 2);
            // Cross-check against elimination.
            let gm: Vec<Vec<f64>> = matrix.iter().map(|r| r.to_vec()).collect();
            let g = solve_generic(&gm, &rhs).unwrap();
            for i in 0..2 {
                let denom = g[i].abs().max(1e-300);
                assert!((sol.amplitudes[i] - g[i]).abs() / denom < 1e-11);
            }
            // Determinant of the assembled matrix equals the closed-form
            // denominator.
            let direct = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
            assert_eq!(sol.det, direct);
        }
    }

    #[test]
    fn axisymmetric_entries_match_reduced_closed_forms() {
        let mg = table_cylinder();
        // Case 1: entry (2,1) = 2 v_1 = 2 alpha_1 I_1(alpha_1 R).
        let ex = ExcitationSpec::new(Bvp::Two, 0, 1, 2.0 * PI * 5e3, 1e5, 0.0, 1e5).unwrap();
        let cls = classify(&mg, 1, ex.omega).unwrap();
        assert_eq!(cls.case_id, CaseId::Case1);
        let (matrix, _) = assemble_axisymmetric_system(&cls, &ex, &mg).unwrap();
        let i1 = crate::bessel::bessel_i(1, cls.alpha1 * mg.radius).unwrap();
        assert_eq!(matrix[1][0], 2.0 * cls.alpha1 * i1);

        // Case 2: entry (2,2) = -(1 + gamma_2) W_1.
        let ex = ExcitationSpec::new(Bvp::Two, 0, 1, 2.0 * PI * 25e3, 1e5, 0.0, 1e5).unwrap();
        let cls = classify(&mg, 1, ex.omega).unwrap();
        assert_eq!(cls.case_id, CaseId::Case2);
        let (matrix, _) = assemble_axisymmetric_system(&cls, &ex, &mg).unwrap();
        let j1 = crate::bessel::bessel_j(1, cls.alpha2 * mg.radius).unwrap();
        let w1 = cls.alpha2 * j1;
        assert_eq!(matrix[1][1], -(1.0 + cls.gamma2) * w1);
    }

    #[test]
    fn closed_form_determinant_matches_cofactor_expansion() {
        let mg = table_cylinder();
        let det3 = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        for m in 1..=3u32 {
            for k in 1..=5u32 {
                for f in [4e3, 9e3, 16e3, 33e3, 71e3] {
                    let ex =
                        ExcitationSpec::new(Bvp::One, m, k, 2.0 * PI * f, 1e5, 1e5, 1e5).unwrap();
                    let Ok(cls) = classify(&mg, k, ex.omega) else {
                        continue;
                    };
                    let e = assemble_system(&cls, &ex, &mg).unwrap();
                    let (_, _, _, det) = closed_form_coefficients(&e);
                    let direct = det3(&e.matrix(Bvp::One));
                    assert!(
                        (det - direct).abs() <= 1e-11 * det.abs().max(direct.abs()),
                        "m={m} k={k} f={f}: {det} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn axisymmetric_routing_errors() {
        let mg = table_cylinder();
        let ex = ExcitationSpec::new(Bvp::One, 0, 1, 2.0 * PI * 5e3, 0.0, 1e5, 0.0).unwrap();
        let cls = classify(&mg, 1, ex.omega).unwrap();
        assert!(matches!(
            assemble_axisymmetric_system(&cls, &ex, &mg),
            Err(SolverError::Routing { .. })
        ));
        let ex = ExcitationSpec::new(Bvp::Two, 0, 1, 2.0 * PI * 5e3, 1e5, 0.0, 1e5).unwrap();
        assert!(matches!(
            assemble_system(&cls, &ex, &mg),
            Err(SolverError::Routing { .. })
        ));
    }

    #[test]
    fn k0_solution_and_errors() {
        let mg = table_cylinder();
        // amp_c = 0 -> zero amplitude.
        let ex = ExcitationSpec::new(Bvp::Two, 1, 0, 2.0 * PI * 10e3, 1e5, 0.0, 0.0).unwrap();
        let sol = solve_k0(&ex, &mg).unwrap();
        assert_eq!(sol.amplitudes, vec![0.0]);

        // m = 0: A = -C / (mu alpha J_1(alpha R)).
        let ex = ExcitationSpec::new(Bvp::Two, 0, 0, 2.0 * PI * 10e3, 0.0, 0.0, 1e5).unwrap();
        let sol = solve_k0(&ex, &mg).unwrap();
        let alpha = (mg.rho * ex.omega * ex.omega / mg.mu).sqrt();
        let j1 = crate::bessel::bessel_j(1, alpha * mg.radius).unwrap();
        let expect = -1e5 / (mg.mu * alpha * j1);
        assert!((sol.amplitudes[0] - expect).abs() / expect.abs() < 1e-14);

        // m = 1: matches an independent evaluation of the closed form.
        let ex = ExcitationSpec::new(Bvp::Two, 1, 0, 2.0 * PI * 10e3, 0.0, 0.0, 1e5).unwrap();
        let sol = solve_k0(&ex, &mg).unwrap();
        let (jm, jm1) = bessel_j_pair(1, alpha * mg.radius).unwrap();
        let expect = 1e5 / (mg.mu * ((1.0 / mg.radius) * jm - alpha * jm1));
        assert!((sol.amplitudes[0] - expect).abs() / expect.abs() < 1e-14);

        // family 1 with k = 0 is not covered by the retained solutions.
        let ex = ExcitationSpec::new(Bvp::One, 1, 0, 2.0 * PI * 10e3, 0.0, 1e5, 0.0).unwrap();
        assert!(matches!(
            solve_k0(&ex, &mg),
            Err(SolverError::Routing { .. })
        ));
    }

    #[test]
    fn amplitude_norm_times_det_is_continuous_across_resonance() {
        // Near a determinant zero the amplitudes blow up like 1/det while
        // norm * |det| stays bounded and continuous.
        let mg = table_cylinder();
        // A root of the (m=1, k=1) system sits near 6.118 kHz.
        let probe = |f: f64| -> (f64, f64) {
            let ex = ExcitationSpec::new(Bvp::Two, 1, 1, 2.0 * PI * f, 1e5, 1e5, 1e5).unwrap();
            let cls = classify(&mg, 1, ex.omega).unwrap();
            let e = assemble_system(&cls, &ex, &mg).unwrap();
            let sol = solve_closed_form(&e, &cls, &ex).unwrap();
            let norm = sol.amplitudes.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
            (norm, sol.det)
        };
        let (n_lo, d_lo) = probe(6.10e3);
        let (n_hi, d_hi) = probe(6.14e3);
        let (n_very, d_very) = probe(6.118e3);
        assert!(n_very > 10.0 * n_lo.max(n_hi), "amplitudes must blow up");
        let p_lo = n_lo * d_lo.abs();
        let p_hi = n_hi * d_hi.abs();
        let p_very = n_very * d_very.abs();
        let pmax = p_lo.max(p_hi).max(p_very);
        let pmin = p_lo.min(p_hi).min(p_very);
        assert!(pmax / pmin < 3.0, "norm*|det| must stay bounded: {p_lo} {p_very} {p_hi}");
    }
}
