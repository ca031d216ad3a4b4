//! Bessel functions of the first kind `J_n` and modified Bessel functions of
//! the first kind `I_n` for non-negative integer order.
//!
//! These are the only special functions the retained radial solutions need:
//! second-kind functions (`Y_n`, `K_n`) are excluded by the finiteness
//! condition on the cylinder axis and never evaluated here.
//!
//! Evaluation strategy:
//! - `J_n`: ascending series for `x <= 2` (terms decay immediately, no
//!   cancellation), normalized backward recurrence (Miller's algorithm with
//!   the identity `J_0 + 2*sum J_{2k} = 1`) for larger arguments. The
//!   backward recurrence avoids the catastrophic cancellation that limits a
//!   plain f64 series to ~1e-11 already at `x ~ 12`.
//! - `I_n`: ascending series (all terms positive, condition number 1) with
//!   compensated summation. Direct evaluation overflows f64 near `x ~ 713`;
//!   beyond that `bessel_i` reports a range error and the scaled variant
//!   `e^{-x} I_n(x)` remains available for determinant-ratio work.

use std::fmt;

/// Largest argument for which `I_0(x)` is representable in f64
/// (`I_n(x) ~ e^x / sqrt(2 pi x)` hits `f64::MAX` near 713.7).
pub const I_OVERFLOW_X: f64 = 713.0;

const J_SERIES_CUTOFF: f64 = 2.0;
const RESCALE_THRESHOLD: f64 = 1e280;
const RESCALE_FACTOR: f64 = 1e-280;

#[derive(Debug, Clone, PartialEq)]
pub enum BesselError {
    /// Argument is NaN, infinite, or negative.
    Domain { x: f64 },
    /// `I_n(x)` exceeds the representable f64 range.
    Overflow { x: f64 },
}

impl fmt::Display for BesselError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BesselError::Domain { x } => write!(f, "bessel argument out of domain: x = {x}"),
            BesselError::Overflow { x } => {
                write!(f, "modified bessel overflow: I_n({x}) exceeds f64 range")
            }
        }
    }
}

impl std::error::Error for BesselError {}

fn check_arg(x: f64) -> Result<(), BesselError> {
    if !x.is_finite() || x < 0.0 {
        return Err(BesselError::Domain { x });
    }
    Ok(())
}

/// `J_n(x)` for integer order `n >= 0` and `x >= 0`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64, BesselError> {
    Ok(bessel_j_pair(n, x)?.0)
}

/// `(J_n(x), J_{n+1}(x))` in one pass; the radial formulas always need the
/// consecutive pair. `bessel_j(n, x)` is exactly `bessel_j_pair(n, x).0`;
/// the second component may differ from `bessel_j(n + 1, x)` by an ulp or
/// two because the recurrence start depends on the highest order requested.
pub fn bessel_j_pair(n: u32, x: f64) -> Result<(f64, f64), BesselError> {
    check_arg(x)?;
    if x == 0.0 {
        return Ok((if n == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    if x <= J_SERIES_CUTOFF {
        return Ok((j_series(n, x), j_series(n + 1, x)));
    }
    let seq = j_backward(n + 1, x);
    Ok((seq[n as usize], seq[n as usize + 1]))
}

/// Ascending series `sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!)`.
///
/// Only used for `x <= 2`, where the terms decrease from the start and the
/// partial sums never exceed the leading term.
fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = 1.0_f64;
    for j in 1..=n as u64 {
        term *= half / j as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let mut sum = term;
    for k in 0..60u64 {
        term *= -q / ((k + 1) as f64 * (n as u64 + k + 1) as f64);
        sum += term;
        if term.abs() <= sum.abs() * 1e-18 {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence, normalized with `J_0 + 2 sum J_{2k} = 1`.
/// Returns `J_0(x) ..= J_{n_max}(x)`.
fn j_backward(n_max: u32, x: f64) -> Vec<f64> {
    let n_max = n_max as usize;
    // Start far enough above both the order and the turning point that the
    // contaminating (second-kind) component has decayed below f64 precision.
    let start = n_max.max(x.ceil() as usize) + 16 + (12.0 * x.cbrt()).ceil() as usize;
    let mut out = vec![0.0_f64; n_max + 1];
    let mut upper = 0.0_f64; // trial J_{j+1}
    let mut cur = 1e-300_f64; // trial J_{start}
    let mut acc = if start % 2 == 0 { 2.0 * cur } else { 0.0 };
    if start <= n_max {
        out[start] = cur;
    }
    for j in (1..=start).rev() {
        let lower = (2.0 * j as f64 / x) * cur - upper; // J_{j-1}
        upper = cur;
        cur = lower;
        let order = j - 1;
        if order % 2 == 0 {
            acc += 2.0 * cur;
        }
        if order <= n_max {
            out[order] = cur;
        }
        if cur.abs() > RESCALE_THRESHOLD {
            upper *= RESCALE_FACTOR;
            cur *= RESCALE_FACTOR;
            acc *= RESCALE_FACTOR;
            for v in out.iter_mut() {
                *v *= RESCALE_FACTOR;
            }
        }
    }
    let norm = acc - cur; // J_0 enters the identity with weight 1, not 2
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `I_n(x)` for integer order `n >= 0` and `x >= 0`.
pub fn bessel_i(n: u32, x: f64) -> Result<f64, BesselError> {
    check_arg(x)?;
    if x > I_OVERFLOW_X {
        return Err(BesselError::Overflow { x });
    }
    Ok(i_series(n, x))
}

/// `(I_n(x), I_{n+1}(x))` in one pass.
pub fn bessel_i_pair(n: u32, x: f64) -> Result<(f64, f64), BesselError> {
    Ok((bessel_i(n, x)?, bessel_i(n + 1, x)?))
}

/// Scaled modified Bessel `e^{-x} I_n(x)`.
///
/// Stays finite for all representable `x`; used internally where
/// determinant ratios would otherwise overflow at large `alpha * R`.
/// For `x > 713` an asymptotic expansion is used; it is accurate to the
/// 1e-13 target only for orders `n <= 8`, which is all that regime can need.
pub(crate) fn bessel_i_scaled(n: u32, x: f64) -> Result<f64, BesselError> {
    check_arg(x)?;
    if x <= I_OVERFLOW_X {
        return Ok(i_series(n, x) * (-x).exp());
    }
    Ok(i_scaled_asymptotic(n, x))
}

/// Ascending series `sum_k (x/2)^{n+2k} / (k! (n+k)!)` with Kahan summation.
fn i_series(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = 1.0_f64;
    for j in 1..=n as u64 {
        term *= half / j as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let mut sum = term;
    let mut comp = 0.0_f64;
    for k in 0..4000u64 {
        term *= q / ((k + 1) as f64 * (n as u64 + k + 1) as f64);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term <= sum * 1e-18 {
            break;
        }
    }
    sum
}

/// Large-argument expansion of `e^{-x} I_n(x)`,
/// `(2 pi x)^{-1/2} [1 - (mu-1)/(8x) + (mu-1)(mu-9)/(2!(8x)^2) - ...]`,
/// `mu = 4 n^2`.
fn i_scaled_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..30u32 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
        let prev = sum;
        sum += term;
        if term.abs() <= prev.abs() * 1e-17 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
