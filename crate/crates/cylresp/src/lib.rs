//! Exact steady-state forced-vibration response of a simply-supported
//! isotropic solid elastic circular cylinder under 2D harmonic standing-wave
//! surface excitations.
//!
//! The curved surface carries prescribed stresses separable into harmonic
//! factors in `theta`, `z`, and `t`; the ends are simply supported
//! (`u_r = u_theta = 0`, `sigma_zz = 0` at `z = 0, L`). The steady-state
//! displacement follows in closed form from two-branch Bessel solutions of
//! the equation of motion: classifying the excitation into one of three
//! parameter cases fixes the radial basis (ordinary vs modified Bessel
//! functions), and a 3x3 linear system (reduced forms for `m = 0` and
//! `k = 0`) pins the modal amplitudes. Determinant zeros of that system are
//! the resonances.
//!
//! Module map:
//! - [`bessel`]: `J_n` / `I_n` evaluation (series, normalized backward
//!   recurrence, scaled variant).
//! - [`model`]: material/geometry, excitation spec, elastic-constant
//!   conversions, bundled natural-frequency table.
//! - [`cases`]: the three-case parameter split, radial wavenumbers, and
//!   singular-configuration detection.
//! - [`solver`]: boundary-system assembly, exact closed-form amplitudes,
//!   and the independent elimination oracle.
//! - [`field`]: displacement and stress fields everywhere in the cylinder,
//!   plus the curved-surface residual instrument.
//! - [`verify`]: finite-difference residual of the equation of motion and
//!   the ENBKS axisymmetric cross-formulation.
//! - [`sweep`]: frequency sweeps, CSV output, resonance detection, config
//!   parsing.

pub mod bessel;
pub mod cases;
pub mod field;
pub mod model;
pub mod solver;
pub mod sweep;
pub mod verify;

pub use cases::{classify, CaseClassification, CaseId, SingularExcitation};
pub use field::{FieldEvaluator, FieldSample, Point};
pub use model::{
    lame_from_young_poisson, young_poisson_from_lame, Bvp, ExcitationSpec, MaterialGeometry,
    NaturalFrequencyTable,
};
pub use solver::{ModalSolution, SolverError};

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Singular(SingularExcitation),
    Solver(SolverError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Singular(e) => write!(f, "{e}"),
            SolveError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolveError {}

/// Classifies and solves an excitation in one call.
pub fn solve(
    mg: &MaterialGeometry,
    ex: &ExcitationSpec,
) -> Result<(CaseClassification, ModalSolution), SolveError> {
    let cls = classify(mg, ex.k, ex.omega).map_err(SolveError::Singular)?;
    let sol = solver::solve_modal(&cls, ex, mg).map_err(SolveError::Solver)?;
    Ok((cls, sol))
}
