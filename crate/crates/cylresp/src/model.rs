//! Physical configuration: material and geometry, excitation specification,
//! elastic-constant conversions, and the reference natural-frequency table.
//!
//! All quantities are SI internally (Pa, kg/m^3, m, rad/s). The CLI accepts
//! frequencies in Hz and converts with `omega = 2 pi f`.

use std::collections::BTreeMap;
use std::fmt;

/// Reference natural frequencies (kHz) for the example steel cylinder,
/// bundled as a repo asset. Values originate from published free-vibration
/// data for this geometry, not from this crate's own equations.
pub const NATURAL_FREQUENCIES_CSV: &str =
    include_str!("../../../data/natural_frequencies.csv");

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A material or geometric quantity violates its positivity constraint.
    NonPositive { name: &'static str, value: f64 },
    /// Poisson ratio outside (-1, 0.5); 0.5 (incompressible) is rejected.
    PoissonOutOfRange { nu: f64 },
    /// Excitation amplitude rules for the given (bvp, m) are violated.
    Amplitudes { reason: &'static str },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositive { name, value } => {
                write!(f, "{name} must be positive and finite, got {value}")
            }
            ModelError::PoissonOutOfRange { nu } => {
                write!(f, "poisson ratio must lie in (-1, 0.5), got {nu}")
            }
            ModelError::Amplitudes { reason } => write!(f, "invalid amplitudes: {reason}"),
        }
    }
}

impl std::error::Error for ModelError {}

/// Lame constants, density, and cylinder dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialGeometry {
    /// First Lame constant, Pa. Assumed positive.
    pub lambda: f64,
    /// Second Lame constant (shear modulus), Pa.
    pub mu: f64,
    /// Mass density, kg/m^3.
    pub rho: f64,
    /// Cylinder length, m.
    pub length: f64,
    /// Cylinder radius, m.
    pub radius: f64,
}

impl MaterialGeometry {
    pub fn new(
        lambda: f64,
        mu: f64,
        rho: f64,
        length: f64,
        radius: f64,
    ) -> Result<Self, ModelError> {
        for (name, value) in [
            ("lambda", lambda),
            ("mu", mu),
            ("rho", rho),
            ("length", length),
            ("radius", radius),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        Ok(Self {
            lambda,
            mu,
            rho,
            length,
            radius,
        })
    }

    pub fn from_young_poisson(
        young: f64,
        poisson: f64,
        rho: f64,
        length: f64,
        radius: f64,
    ) -> Result<Self, ModelError> {
        let (lambda, mu) = lame_from_young_poisson(young, poisson)?;
        Self::new(lambda, mu, rho, length, radius)
    }

    /// P-wave (dilatational) modulus `lambda + 2 mu`.
    pub fn p_wave_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// Axial wavenumber `k pi / L` of the standing-wave excitation.
    pub fn axial_wavenumber(&self, k: u32) -> f64 {
        k as f64 * std::f64::consts::PI / self.length
    }
}

/// `(lambda, mu)` from Young modulus and Poisson ratio:
/// `lambda = E nu / ((1+nu)(1-2nu))`, `mu = E / (2(1+nu))`.
pub fn lame_from_young_poisson(young: f64, poisson: f64) -> Result<(f64, f64), ModelError> {
    if !(young.is_finite() && young > 0.0) {
        return Err(ModelError::NonPositive {
            name: "young",
            value: young,
        });
    }
    if !poisson.is_finite() || poisson <= -1.0 || poisson >= 0.5 {
        return Err(ModelError::PoissonOutOfRange { nu: poisson });
    }
    let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = young / (2.0 * (1.0 + poisson));
    Ok((lambda, mu))
}

/// Inverse conversion: `E = mu (3 lambda + 2 mu) / (lambda + mu)`,
/// `nu = lambda / (2 (lambda + mu))`.
pub fn young_poisson_from_lame(lambda: f64, mu: f64) -> (f64, f64) {
    let young = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
    let poisson = lambda / (2.0 * (lambda + mu));
    (young, poisson)
}

/// Which of the two families of prescribed surface stresses drives the
/// cylinder. They differ only by swapped sin/cos circumferential factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bvp {
    One,
    Two,
}

impl fmt::Display for Bvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bvp::One => write!(f, "1"),
            Bvp::Two => write!(f, "2"),
        }
    }
}

/// A single harmonic standing-wave surface excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationSpec {
    pub bvp: Bvp,
    /// Circumferential wave number.
    pub m: u32,
    /// Longitudinal wave number.
    pub k: u32,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Normal-stress amplitude, Pa.
    pub amp_a: f64,
    /// Circumferential shear amplitude, Pa.
    pub amp_b: f64,
    /// Longitudinal shear amplitude, Pa.
    pub amp_c: f64,
}

impl ExcitationSpec {
    /// Validates the forcing rules: for `m = 0` BVP 1 only the circumferential
    /// shear drives the motion, for `m = 0` BVP 2 only the normal and
    /// longitudinal stresses do, and for `m >= 1` at least one amplitude must
    /// be non-zero.
    pub fn new(
        bvp: Bvp,
        m: u32,
        k: u32,
        omega: f64,
        amp_a: f64,
        amp_b: f64,
        amp_c: f64,
    ) -> Result<Self, ModelError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ModelError::NonPositive {
                name: "omega",
                value: omega,
            });
        }
        for (name, value) in [("amp_a", amp_a), ("amp_b", amp_b), ("amp_c", amp_c)] {
            if !value.is_finite() {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        match (m, bvp) {
            (0, Bvp::One) if amp_b == 0.0 => {
                return Err(ModelError::Amplitudes {
                    reason: "m = 0 with bvp 1 requires amp_b != 0",
                })
            }
            (0, Bvp::Two) if amp_a == 0.0 && amp_c == 0.0 => {
                return Err(ModelError::Amplitudes {
                    reason: "m = 0 with bvp 2 requires amp_a != 0 or amp_c != 0",
                })
            }
            (m, _) if m >= 1 && amp_a == 0.0 && amp_b == 0.0 && amp_c == 0.0 => {
                return Err(ModelError::Amplitudes {
                    reason: "at least one of amp_a, amp_b, amp_c must be non-zero",
                })
            }
            _ => {}
        }
        Ok(Self {
            bvp,
            m,
            k,
            omega,
            amp_a,
            amp_b,
            amp_c,
        })
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / (2.0 * std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableError {
    Empty,
    BadHeader { found: String },
    Parse { line: usize, reason: String },
    Duplicate { line: usize, m: u32, mode: u32 },
    OutOfRange { line: usize, reason: String },
    NotIncreasing { m: u32, mode: u32 },
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::Empty => write!(f, "empty frequency table stream"),
            TableError::BadHeader { found } => {
                write!(f, "expected header 'm,mode,freq_khz', found '{found}'")
            }
            TableError::Parse { line, reason } => write!(f, "line {line}: {reason}"),
            TableError::Duplicate { line, m, mode } => {
                write!(f, "line {line}: duplicate entry (m={m}, mode={mode})")
            }
            TableError::OutOfRange { line, reason } => write!(f, "line {line}: {reason}"),
            TableError::NotIncreasing { m, mode } => write!(
                f,
                "frequencies must increase with mode index: violated at (m={m}, mode={mode})"
            ),
        }
    }
}

impl std::error::Error for TableError {}

/// Reference natural frequencies indexed by `(m, mode)`, in kHz.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalFrequencyTable {
    entries: BTreeMap<(u32, u32), f64>,
}

impl NaturalFrequencyTable {
    /// Parses a `m,mode,freq_khz` CSV stream.
    pub fn load(text: &str) -> Result<Self, TableError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(TableError::Empty)?;
        if header.trim() != "m,mode,freq_khz" {
            return Err(TableError::BadHeader {
                found: header.trim().to_string(),
            });
        }
        let mut entries = BTreeMap::new();
        for (idx, raw) in lines {
            let line = idx + 1; // 1-based, counting the header as line 1
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            let mut parts = row.split(',');
            let mut next_field = |what: &str| {
                parts.next().map(str::trim).ok_or(TableError::Parse {
                    line,
                    reason: format!("missing field '{what}'"),
                })
            };
            let m: u32 = next_field("m")?.parse().map_err(|e| TableError::Parse {
                line,
                reason: format!("bad m: {e}"),
            })?;
            let mode: u32 = next_field("mode")?
                .parse()
                .map_err(|e| TableError::Parse {
                    line,
                    reason: format!("bad mode: {e}"),
                })?;
            let freq: f64 = next_field("freq_khz")?
                .parse()
                .map_err(|e| TableError::Parse {
                    line,
                    reason: format!("bad freq_khz: {e}"),
                })?;
            if parts.next().is_some() {
                return Err(TableError::Parse {
                    line,
                    reason: "too many fields".to_string(),
                });
            }
            if m > 3 {
                return Err(TableError::OutOfRange {
                    line,
                    reason: format!("m = {m} outside 0..=3"),
                });
            }
            if !(1..=9).contains(&mode) {
                return Err(TableError::OutOfRange {
                    line,
                    reason: format!("mode = {mode} outside 1..=9"),
                });
            }
            if !(freq.is_finite() && freq > 0.0) {
                return Err(TableError::OutOfRange {
                    line,
                    reason: format!("freq_khz = {freq} not positive"),
                });
            }
            if entries.insert((m, mode), freq).is_some() {
                return Err(TableError::Duplicate { line, m, mode });
            }
        }
        let table = Self { entries };
        for m in 0..=3 {
            let mut prev = 0.0;
            for (mode, freq) in table.modes_for(m) {
                if freq <= prev {
                    return Err(TableError::NotIncreasing { m, mode });
                }
                prev = freq;
            }
        }
        Ok(table)
    }

    /// Parses the CSV from raw bytes (must be UTF-8).
    pub fn load_bytes(bytes: &[u8]) -> Result<Self, TableError> {
        let text = std::str::from_utf8(bytes).map_err(|e| TableError::Parse {
            line: 0,
            reason: format!("not UTF-8: {e}"),
        })?;
        Self::load(text)
    }

    /// The bundled reference table (36 entries).
    pub fn bundled() -> Self {
        Self::load(NATURAL_FREQUENCIES_CSV).expect("bundled table is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frequency_khz(&self, m: u32, mode: u32) -> Option<f64> {
        self.entries.get(&(m, mode)).copied()
    }

    /// `(mode, freq_khz)` pairs for a given circumferential wave number,
    /// in increasing mode order.
    pub fn modes_for(&self, m: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries
            .range((m, 0)..(m + 1, 0))
            .map(|(&(_, mode), &f)| (mode, f))
    }

    /// Nearest table entry to `f_khz` among modes with the given `m`,
    /// returned as `(mode, table_khz, signed relative offset)`.
    pub fn nearest(&self, m: u32, f_khz: f64) -> Option<(u32, f64, f64)> {
        self.modes_for(m)
            .map(|(mode, t)| (mode, t, (f_khz - t) / t))
            .min_by(|a, b| a.2.abs().partial_cmp(&b.2.abs()).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lame_conversion_matches_example_values() {
        let (lambda, mu) = lame_from_young_poisson(190e9, 0.30).unwrap();
        assert!((lambda - 109.62e9).abs() < 0.01e9, "lambda = {lambda}");
        assert!((mu - 73.08e9).abs() < 0.01e9, "mu = {mu}");
    }

    #[test]
    fn zero_poisson_zeroes_lambda() {
        let (lambda, mu) = lame_from_young_poisson(55e9, 0.0).unwrap();
        assert_eq!(lambda, 0.0);
        assert_eq!(mu, 27.5e9);
    }

    #[test]
    fn quarter_poisson_gives_equal_constants() {
        // Direct evaluation of both conversion formulas at (100 GPa, 0.25).
        let (lambda, mu) = lame_from_young_poisson(100e9, 0.25).unwrap();
        assert!((lambda - 40e9).abs() < 1.0);
        assert!((mu - 40e9).abs() < 1.0);
    }

    #[test]
    fn incompressible_rejected() {
        assert!(matches!(
            lame_from_young_poisson(100e9, 0.5),
            Err(ModelError::PoissonOutOfRange { .. })
        ));
    }

    #[test]
    fn bundled_table_is_complete_and_golden() {
        let t = NaturalFrequencyTable::bundled();
        assert_eq!(t.len(), 36);
        assert_eq!(t.frequency_khz(1, 1), Some(6.118));
        assert_eq!(t.frequency_khz(0, 1), Some(15.766));
        assert_eq!(t.frequency_khz(3, 9), Some(54.054));
        assert_eq!(t.frequency_khz(2, 5), Some(33.123));
    }

    #[test]
    fn loader_rejects_empty_and_malformed() {
        assert!(matches!(
            NaturalFrequencyTable::load(""),
            Err(TableError::Empty)
        ));
        let bad = "m,mode,freq_khz\n0,1,15.766\n0,x,20.0\n";
        match NaturalFrequencyTable::load(bad) {
            Err(TableError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn loader_rejects_duplicates_and_nonmonotone() {
        let dup = "m,mode,freq_khz\n1,1,6.118\n1,1,6.2\n";
        assert!(matches!(
            NaturalFrequencyTable::load(dup),
            Err(TableError::Duplicate { line: 3, m: 1, mode: 1 })
        ));
        let non_mono = "m,mode,freq_khz\n1,1,6.118\n1,2,5.0\n";
        assert!(matches!(
            NaturalFrequencyTable::load(non_mono),
            Err(TableError::NotIncreasing { m: 1, mode: 2 })
        ));
    }

    #[test]
    fn excitation_amplitude_rules() {
        let ok = ExcitationSpec::new(Bvp::One, 0, 1, 100.0, 0.0, 1e5, 0.0);
        assert!(ok.is_ok());
        assert!(ExcitationSpec::new(Bvp::One, 0, 1, 100.0, 1e5, 0.0, 1e5).is_err());
        assert!(ExcitationSpec::new(Bvp::Two, 0, 1, 100.0, 0.0, 1e5, 0.0).is_err());
        assert!(ExcitationSpec::new(Bvp::Two, 0, 1, 100.0, 1e5, 0.0, 0.0).is_ok());
        assert!(ExcitationSpec::new(Bvp::Two, 2, 1, 100.0, 0.0, 0.0, 0.0).is_err());
        assert!(ExcitationSpec::new(Bvp::Two, 2, 1, -5.0, 1e5, 0.0, 0.0).is_err());
    }

    #[test]
    fn nearest_entry_lookup() {
        let t = NaturalFrequencyTable::bundled();
        let (mode, table, off) = t.nearest(1, 6.2).unwrap();
        assert_eq!(mode, 1);
        assert_eq!(table, 6.118);
        assert!(off > 0.0 && off < 0.02);
    }
}
