//! Frequency sweeps, resonance detection, and the key=value config format.
//!
//! A sweep evaluates the stationary displacement at one representative point
//! over a uniform frequency grid and emits one CSV row per grid frequency.
//! Grid points whose classification is singular are kept as rows with empty
//! field columns and a status marker, so the row count is grid-determined.
//! Rows are computed independently (in parallel when the `parallel` feature
//! is on) and merged in grid order, so the output is byte-identical across
//! runs and across sequential/parallel builds.
//!
//! Resonances are located as sign changes of the boundary-system determinant
//! between adjacent same-case grid points, refined by bisection to a 0.1 Hz
//! bracket, and cross-referenced against the natural-frequency table.
//! Determinant zeros, not displacement peaks, define resonance positions:
//! peak heights on a discrete grid are resolution artifacts.

use crate::cases::{classify, CaseId, SingularExcitation};
use crate::field::{FieldEvaluator, Point};
use crate::model::{Bvp, ExcitationSpec, MaterialGeometry, ModelError, NaturalFrequencyTable};
use crate::solver::{
    closed_form_coefficients, assemble_entries_for_det, solve_modal, SolverError,
};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;

/// Fixed CSV column set; floats are rendered with 17 significant digits.
pub const CSV_HEADER: &str = "f_hz,case,u_r_m,u_theta_m,u_z_m,det,boundary_residual,status";

/// Surface grid used for the per-row boundary-residual column.
const ROW_RESIDUAL_GRID: (usize, usize) = (20, 20);

/// Bisection stops once the bracket is at most this wide (Hz).
pub const REFINE_WIDTH_HZ: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    MissingKey { key: &'static str },
    UnknownKey { line: usize, key: String },
    DuplicateKey { line: usize, key: String },
    Invalid { key: String, reason: String },
    Validation { reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::MissingKey { key } => write!(f, "missing required key '{key}'"),
            ConfigError::UnknownKey { line, key } => {
                write!(f, "line {line}: unknown key '{key}'")
            }
            ConfigError::DuplicateKey { line, key } => {
                write!(f, "line {line}: duplicate key '{key}'")
            }
            ConfigError::Invalid { key, reason } => write!(f, "key '{key}': {reason}"),
            ConfigError::Validation { reason } => write!(f, "{reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        ConfigError::Validation {
            reason: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub bvp: Bvp,
    pub m: u32,
    /// One entry for a sweep; `resonances` unions over all entries.
    pub ks: Vec<u32>,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub f_step_hz: f64,
    pub point: Point,
    pub amp_a: f64,
    pub amp_b: f64,
    pub amp_c: f64,
    pub material: MaterialGeometry,
    pub out: Option<String>,
}

impl SweepConfig {
    /// The uniform frequency grid `f_i = f_start + i * f_step <= f_stop`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = ((self.f_stop_hz - self.f_start_hz) / self.f_step_hz + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| self.f_start_hz + i as f64 * self.f_step_hz)
            .collect()
    }

    pub fn excitation(&self, k: u32, f_hz: f64) -> Result<ExcitationSpec, ModelError> {
        ExcitationSpec::new(
            self.bvp,
            self.m,
            k,
            2.0 * std::f64::consts::PI * f_hz,
            self.amp_a,
            self.amp_b,
            self.amp_c,
        )
    }

    fn single_k(&self) -> Result<u32, SweepError> {
        if self.ks.len() == 1 {
            Ok(self.ks[0])
        } else {
            Err(SweepError::MultipleK { found: self.ks.len() })
        }
    }
}

const REQUIRED_KEYS: [&str; 17] = [
    "bvp",
    "m",
    "k",
    "f_start_hz",
    "f_stop_hz",
    "f_step_hz",
    "point_r",
    "point_theta",
    "point_z",
    "amp_a_pa",
    "amp_b_pa",
    "amp_c_pa",
    "lambda_pa",
    "mu_pa",
    "rho",
    "length_m",
    "radius_m",
];

/// Parses the key=value config format. `#` starts a comment; unknown keys
/// are errors (fail-closed).
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut seen: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or(ConfigError::Invalid {
            key: stripped.to_string(),
            reason: "expected key=value".to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !REQUIRED_KEYS.contains(&key.as_str()) && key != "out" {
            return Err(ConfigError::UnknownKey { line: line_no, key });
        }
        if seen.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::DuplicateKey { line: line_no, key });
        }
        seen.push((key, value));
    }
    let get = |key: &'static str| -> Result<&str, ConfigError> {
        seen.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or(ConfigError::MissingKey { key })
    };
    let parse_f64 = |key: &'static str| -> Result<f64, ConfigError> {
        get(key)?.parse::<f64>().map_err(|e| ConfigError::Invalid {
            key: key.to_string(),
            reason: e.to_string(),
        })
    };
    let parse_u32 = |key: &'static str| -> Result<u32, ConfigError> {
        get(key)?.parse::<u32>().map_err(|e| ConfigError::Invalid {
            key: key.to_string(),
            reason: e.to_string(),
        })
    };

    let bvp = match get("bvp")? {
        "1" => Bvp::One,
        "2" => Bvp::Two,
        other => {
            return Err(ConfigError::Invalid {
                key: "bvp".to_string(),
                reason: format!("expected 1 or 2, got '{other}'"),
            })
        }
    };
    let m = parse_u32("m")?;
    let mut ks = Vec::new();
    let mut ks_seen = BTreeSet::new();
    for part in get("k")?.split(',') {
        let k: u32 = part.trim().parse().map_err(|e| ConfigError::Invalid {
            key: "k".to_string(),
            reason: format!("'{}': {e}", part.trim()),
        })?;
        if !ks_seen.insert(k) {
            return Err(ConfigError::Invalid {
                key: "k".to_string(),
                reason: format!("duplicate k = {k}"),
            });
        }
        ks.push(k);
    }
    let f_start_hz = parse_f64("f_start_hz")?;
    let f_stop_hz = parse_f64("f_stop_hz")?;
    let f_step_hz = parse_f64("f_step_hz")?;
    let material = MaterialGeometry::new(
        parse_f64("lambda_pa")?,
        parse_f64("mu_pa")?,
        parse_f64("rho")?,
        parse_f64("length_m")?,
        parse_f64("radius_m")?,
    )?;
    let point = Point::new(
        parse_f64("point_r")?,
        parse_f64("point_theta")?,
        parse_f64("point_z")?,
    );
    let amp_a = parse_f64("amp_a_pa")?;
    let amp_b = parse_f64("amp_b_pa")?;
    let amp_c = parse_f64("amp_c_pa")?;
    let out = seen
        .iter()
        .find(|(k, _)| k == "out")
        .map(|(_, v)| v.clone());

    if !(f_start_hz > 0.0) {
        return Err(ConfigError::Invalid {
            key: "f_start_hz".to_string(),
            reason: "must be positive".to_string(),
        });
    }
    if !(f_step_hz > 0.0) {
        return Err(ConfigError::Invalid {
            key: "f_step_hz".to_string(),
            reason: "must be positive".to_string(),
        });
    }
    if f_stop_hz < f_start_hz {
        return Err(ConfigError::Invalid {
            key: "f_stop_hz".to_string(),
            reason: "must be >= f_start_hz".to_string(),
        });
    }
    if !(0.0..=material.radius).contains(&point.r) {
        return Err(ConfigError::Invalid {
            key: "point_r".to_string(),
            reason: format!("must lie in [0, {}]", material.radius),
        });
    }
    if !(0.0..=material.length).contains(&point.z) {
        return Err(ConfigError::Invalid {
            key: "point_z".to_string(),
            reason: format!("must lie in [0, {}]", material.length),
        });
    }
    if !point.theta.is_finite() {
        return Err(ConfigError::Invalid {
            key: "point_theta".to_string(),
            reason: "must be finite".to_string(),
        });
    }
    if ks.is_empty() {
        return Err(ConfigError::Invalid {
            key: "k".to_string(),
            reason: "at least one k required".to_string(),
        });
    }
    if bvp == Bvp::One && ks.contains(&0) {
        return Err(ConfigError::Validation {
            reason: "k = 0 has a solution only for bvp = 2".to_string(),
        });
    }
    // Amplitude rules are frequency-independent; probe once. The all-zero
    // (unforced) configuration is allowed for sweeps: the response is
    // identically zero and the determinant column still carries the scan.
    if amp_a != 0.0 || amp_b != 0.0 || amp_c != 0.0 {
        ExcitationSpec::new(
            bvp,
            m,
            ks[0],
            2.0 * std::f64::consts::PI * f_start_hz,
            amp_a,
            amp_b,
            amp_c,
        )?;
    }
    Ok(SweepConfig {
        bvp,
        m,
        ks,
        f_start_hz,
        f_stop_hz,
        f_step_hz,
        point,
        amp_a,
        amp_b,
        amp_c,
        material,
        out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Solved, but the equilibrated determinant is tiny; amplitudes are
    /// dominated by the resonance denominator.
    NearResonance,
    /// Classification landed inside the singular band; not solved.
    Singular,
    /// The determinant was exactly zero (or an entry overflowed).
    Failed,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RowStatus::Ok => "ok",
            RowStatus::NearResonance => "near_resonance",
            RowStatus::Singular => "singular",
            RowStatus::Failed => "failed",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub f_hz: f64,
    pub case_id: Option<CaseId>,
    /// Stationary displacement at the representative point.
    pub u: Option<[f64; 3]>,
    pub det: Option<f64>,
    pub boundary_residual: Option<f64>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    /// A sweep needs exactly one `k`.
    MultipleK { found: usize },
    Model(ModelError),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::MultipleK { found } => {
                write!(f, "a sweep requires exactly one k, config lists {found}")
            }
            SweepError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SweepError {}

fn compute_row(cfg: &SweepConfig, k: u32, f_hz: f64) -> SweepRow {
    let omega = 2.0 * std::f64::consts::PI * f_hz;
    let cls = match classify(&cfg.material, k, omega) {
        Ok(cls) => cls,
        Err(SingularExcitation { id, .. }) => {
            return SweepRow {
                f_hz,
                case_id: Some(id),
                u: None,
                det: None,
                boundary_residual: None,
                status: RowStatus::Singular,
            }
        }
    };
    if cfg.amp_a == 0.0 && cfg.amp_b == 0.0 && cfg.amp_c == 0.0 {
        // Unforced: the steady-state response is identically zero; the
        // determinant column stays meaningful for resonance scans.
        let det = determinant_at(&cfg.material, cfg.bvp, cfg.m, k, f_hz).map(|(_, d)| d);
        return SweepRow {
            f_hz,
            case_id: Some(cls.case_id),
            u: Some([0.0; 3]),
            det,
            boundary_residual: Some(0.0),
            status: RowStatus::Ok,
        };
    }
    let ex = match cfg.excitation(k, f_hz) {
        Ok(ex) => ex,
        Err(_) => {
            return SweepRow {
                f_hz,
                case_id: Some(cls.case_id),
                u: None,
                det: None,
                boundary_residual: None,
                status: RowStatus::Failed,
            }
        }
    };
    match solve_modal(&cls, &ex, &cfg.material) {
        Ok(sol) => {
            let ev = FieldEvaluator::new(&sol, &cls, &ex, &cfg.material)
                .expect("solution matches its own inputs");
            let u = ev
                .stationary_displacement(&cfg.point)
                .expect("config point validated");
            let res = ev
                .boundary_residual(ROW_RESIDUAL_GRID.0, ROW_RESIDUAL_GRID.1)
                .expect("surface grid is valid");
            SweepRow {
                f_hz,
                case_id: Some(sol.case_id),
                u: Some(u),
                det: Some(sol.det),
                boundary_residual: Some(res),
                status: if sol.near_resonance {
                    RowStatus::NearResonance
                } else {
                    RowStatus::Ok
                },
            }
        }
        Err(SolverError::Resonant { det }) => SweepRow {
            f_hz,
            case_id: Some(cls.case_id),
            u: None,
            det: Some(det),
            boundary_residual: None,
            status: RowStatus::Failed,
        },
        Err(_) => SweepRow {
            f_hz,
            case_id: Some(cls.case_id),
            u: None,
            det: None,
            boundary_residual: None,
            status: RowStatus::Failed,
        },
    }
}

/// Runs the sweep over the config grid (parallel when the feature is on).
/// Output order is the grid order regardless of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    let k = cfg.single_k()?;
    let fs = cfg.frequencies();
    #[cfg(feature = "parallel")]
    {
        Ok(fs.par_iter().map(|&f| compute_row(cfg, k, f)).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(fs.iter().map(|&f| compute_row(cfg, k, f)).collect())
    }
}

/// Sequential fallback, always available; the benchmark suite compares the
/// two paths and tests assert byte-identical output.
pub fn run_sweep_sequential(cfg: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    let k = cfg.single_k()?;
    Ok(cfg
        .frequencies()
        .iter()
        .map(|&f| compute_row(cfg, k, f))
        .collect())
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders rows as CSV (LF line endings, 17 significant digits).
pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_float(row.f_hz));
        out.push(',');
        if let Some(case) = row.case_id {
            out.push_str(&case.to_string());
        }
        out.push(',');
        match row.u {
            Some(u) => {
                out.push_str(&fmt_float(u[0]));
                out.push(',');
                out.push_str(&fmt_float(u[1]));
                out.push(',');
                out.push_str(&fmt_float(u[2]));
            }
            None => out.push_str(",,"),
        }
        out.push(',');
        if let Some(det) = row.det {
            out.push_str(&fmt_float(det));
        }
        out.push(',');
        if let Some(res) = row.boundary_residual {
            out.push_str(&fmt_float(res));
        }
        out.push(',');
        out.push_str(&row.status.to_string());
        out.push('\n');
    }
    out
}

/// Boundary-system determinant at one `(k, f)`, without solving.
/// `None` when the classification is singular there. At extreme arguments
/// (`alpha R > 600`) the modified-Bessel columns are evaluated in scaled
/// form, so the value differs from the solve's determinant by a positive
/// per-column factor; the zero set and the sign are unaffected.
pub fn determinant_at(
    mg: &MaterialGeometry,
    bvp: Bvp,
    m: u32,
    k: u32,
    f_hz: f64,
) -> Option<(CaseId, f64)> {
    let omega = 2.0 * std::f64::consts::PI * f_hz;
    if k == 0 {
        if bvp != Bvp::Two {
            return None;
        }
        let alpha = (mg.rho * omega * omega / mg.mu).sqrt();
        let (jm, jm1) = crate::bessel::bessel_j_pair(m, alpha * mg.radius).ok()?;
        return Some((CaseId::KZero, (m as f64 / mg.radius) * jm - alpha * jm1));
    }
    let cls = classify(mg, k, omega).ok()?;
    let e = assemble_entries_for_det(&cls, m, k, mg).ok()?;
    let det = match (m, bvp) {
        (0, Bvp::One) => -e.t2(),
        (0, Bvp::Two) => e.x1() * e.z2() - e.x2() * e.z1(),
        _ => closed_form_coefficients(&e).3,
    };
    Some((cls.case_id, det))
}

/// A refined determinant zero-crossing and its nearest table entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceHit {
    pub k: u32,
    pub f_hz: f64,
    pub bracket: (f64, f64),
    pub case_id: CaseId,
    /// `(mode, table_khz, signed relative offset)` for the sweep's `m`.
    pub nearest: Option<(u32, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResonanceReport {
    pub hits: Vec<ResonanceHit>,
}

impl ResonanceReport {
    /// Hits sorted by refined frequency (the per-`k` scans are concatenated).
    pub fn sorted_by_frequency(&self) -> Vec<&ResonanceHit> {
        let mut v: Vec<&ResonanceHit> = self.hits.iter().collect();
        v.sort_by(|a, b| a.f_hz.partial_cmp(&b.f_hz).unwrap());
        v
    }
}

/// Scans the config grid for determinant sign changes (per `k`, within
/// same-case runs), bisects each bracket to 0.1 Hz, and matches refined
/// roots against the table. An empty report is a valid outcome.
pub fn detect_resonances(
    cfg: &SweepConfig,
    table: Option<&NaturalFrequencyTable>,
) -> ResonanceReport {
    let mut report = ResonanceReport::default();
    for &k in &cfg.ks {
        let mut prev: Option<(f64, CaseId, f64)> = None;
        for f in cfg.frequencies() {
            let current = determinant_at(&cfg.material, cfg.bvp, cfg.m, k, f);
            match (prev, current) {
                (Some((f0, case0, d0)), Some((case1, d1)))
                    if case0 == case1 && d0.signum() != d1.signum() && d1 != 0.0 && d0 != 0.0 =>
                {
                    if let Some((root, bracket)) =
                        refine_root(&cfg.material, cfg.bvp, cfg.m, k, case0, f0, f, d0)
                    {
                        let nearest =
                            table.and_then(|t| t.nearest(cfg.m, root / 1e3));
                        report.hits.push(ResonanceHit {
                            k,
                            f_hz: root,
                            bracket,
                            case_id: case0,
                            nearest,
                        });
                    }
                }
                _ => {}
            }
            prev = current.map(|(case, d)| (f, case, d));
            if current.is_none() {
                prev = None;
            }
        }
    }
    report
}

fn refine_root(
    mg: &MaterialGeometry,
    bvp: Bvp,
    m: u32,
    k: u32,
    case: CaseId,
    mut lo: f64,
    mut hi: f64,
    mut det_lo: f64,
) -> Option<(f64, (f64, f64))> {
    while hi - lo > REFINE_WIDTH_HZ {
        let mid = 0.5 * (lo + hi);
        match determinant_at(mg, bvp, m, k, mid) {
            Some((c, d)) if c == case => {
                if d.signum() == det_lo.signum() {
                    lo = mid;
                    det_lo = d;
                } else {
                    hi = mid;
                }
            }
            _ => return None,
        }
    }
    Some((0.5 * (lo + hi), (lo, hi)))
}
