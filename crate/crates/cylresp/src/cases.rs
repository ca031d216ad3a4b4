//! Parameter-case classification.
//!
//! For `k >= 1` the retained solutions split into three regimes according to
//! how `(k pi / L)^2` compares with `rho omega^2 / (lambda + 2 mu)` and
//! `rho omega^2 / mu`; the comparison decides whether each radial branch uses
//! ordinary or modified Bessel functions and fixes the radial wavenumbers
//! `alpha_1, alpha_2` and the axial coupling constants `gamma_1 = 1`,
//! `gamma_2 = 1 - rho omega^2 / ((k pi / L)^2 mu)`.
//!
//! `k = 0` is a structurally different single-branch solution and gets its
//! own classification. Exact coincidence with either comparison boundary is a
//! singular configuration that is detected and refused, never solved.

use crate::model::MaterialGeometry;
use std::fmt;

/// Relative half-width of the band around the case boundaries treated as
/// singular. The closed forms hold only away from exact equality; floating
/// point needs a band rather than an equality test.
pub const SINGULAR_REL_TOL: f64 = 1e-9;

/// Classifications closer than this (relative) to a boundary are solvable but
/// flagged, since the vanishing radial wavenumber degrades conditioning.
pub const NEAR_BOUNDARY_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    /// Both branches modified (`I_m`): `rho omega^2 / mu < (k pi / L)^2`.
    Case1,
    /// Both branches ordinary (`J_m`): `rho omega^2 / (lambda+2mu) > (k pi / L)^2`.
    Case2,
    /// Mixed: modified dilatational branch, ordinary shear branch.
    Case3,
    /// `k = 0`: single shear-type branch, `alpha = sqrt(rho omega^2 / mu)`.
    KZero,
    /// `rho omega^2 / (lambda + 2 mu) = (k pi / L)^2` within tolerance.
    Singular1,
    /// `rho omega^2 / mu = (k pi / L)^2` within tolerance.
    Singular2,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
            CaseId::KZero => "k0",
            CaseId::Singular1 => "singular1",
            CaseId::Singular2 => "singular2",
        };
        write!(f, "{s}")
    }
}

/// A singular configuration: the excitation sits on a case boundary where
/// the radial part degenerates. Reported as an error, never solved.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularExcitation {
    /// `Singular1` or `Singular2`.
    pub id: CaseId,
    /// `rho omega^2 / (lambda + 2 mu)` or `rho omega^2 / mu`.
    pub lhs: f64,
    /// `(k pi / L)^2`.
    pub rhs: f64,
}

impl fmt::Display for SingularExcitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "singular excitation ({}): {} vs (k pi / L)^2 = {} within {SINGULAR_REL_TOL}",
            self.id, self.lhs, self.rhs
        )
    }
}

impl std::error::Error for SingularExcitation {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseClassification {
    pub case_id: CaseId,
    /// Radial wavenumber of the dilatational-related branch, 1/m.
    /// Unused (zero) in `KZero`.
    pub alpha1: f64,
    /// Radial wavenumber of the shear-related branch, 1/m.
    /// In `KZero` this is the single `alpha = sqrt(rho omega^2 / mu)`.
    pub alpha2: f64,
    /// Always 1.
    pub gamma1: f64,
    /// `1 - rho omega^2 / ((k pi / L)^2 mu)`; unused (zero) in `KZero`.
    pub gamma2: f64,
    /// `-(k pi / L)^2`, 1/m^2.
    pub kappa: f64,
    /// `-omega^2`, 1/s^2.
    pub tau: f64,
    /// Within `NEAR_BOUNDARY_REL_TOL` of a case boundary.
    pub near_boundary: bool,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Classifies an excitation `(k, omega)` of the given cylinder.
pub fn classify(
    mg: &MaterialGeometry,
    k: u32,
    omega: f64,
) -> Result<CaseClassification, SingularExcitation> {
    assert!(omega > 0.0, "omega must be positive");
    let tau = -omega * omega;
    let shear_sq = mg.rho * omega * omega / mg.mu;
    if k == 0 {
        return Ok(CaseClassification {
            case_id: CaseId::KZero,
            alpha1: 0.0,
            alpha2: shear_sq.sqrt(),
            gamma1: 1.0,
            gamma2: 0.0,
            kappa: 0.0,
            tau,
            near_boundary: false,
        });
    }
    let kz = mg.axial_wavenumber(k);
    let kz_sq = kz * kz;
    let dil_sq = mg.rho * omega * omega / mg.p_wave_modulus();
    let gap1 = rel_gap(dil_sq, kz_sq);
    let gap2 = rel_gap(shear_sq, kz_sq);
    if gap1 < SINGULAR_REL_TOL {
        return Err(SingularExcitation {
            id: CaseId::Singular1,
            lhs: dil_sq,
            rhs: kz_sq,
        });
    }
    if gap2 < SINGULAR_REL_TOL {
        return Err(SingularExcitation {
            id: CaseId::Singular2,
            lhs: shear_sq,
            rhs: kz_sq,
        });
    }
    let gamma2 = 1.0 - shear_sq / kz_sq;
    let near_boundary = gap1 < NEAR_BOUNDARY_REL_TOL || gap2 < NEAR_BOUNDARY_REL_TOL;
    // dil_sq < shear_sq always (lambda + 2 mu > mu), so the three orderings
    // relative to kz_sq are exactly the three cases.
    let (case_id, alpha1, alpha2) = if shear_sq < kz_sq {
        (
            CaseId::Case1,
            (kz_sq - dil_sq).sqrt(),
            (kz_sq - shear_sq).sqrt(),
        )
    } else if dil_sq > kz_sq {
        (
            CaseId::Case2,
            (dil_sq - kz_sq).sqrt(),
            (shear_sq - kz_sq).sqrt(),
        )
    } else {
        (
            CaseId::Case3,
            (kz_sq - dil_sq).sqrt(),
            (shear_sq - kz_sq).sqrt(),
        )
    };
    Ok(CaseClassification {
        case_id,
        alpha1,
        alpha2,
        gamma1: 1.0,
        gamma2,
        kappa: -kz_sq,
        tau,
        near_boundary,
    })
}

/// Branch sign convention shared by the solver and the field evaluator:
/// `+1` selects the modified branch (`I_m`), `-1` the ordinary branch (`J_m`).
/// Returns `(sigma_1, sigma_2)` for the dilatational and shear branches.
/// Only the three two-branch cases have a branch pair.
pub fn branch_signs(case_id: CaseId) -> (f64, f64) {
    match case_id {
        CaseId::Case1 => (1.0, 1.0),
        CaseId::Case2 => (-1.0, -1.0),
        CaseId::Case3 => (1.0, -1.0),
        other => panic!("no radial branch pair for {other}"),
    }
}
