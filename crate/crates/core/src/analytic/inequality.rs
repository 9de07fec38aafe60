//! Perturbation bounds for iterated logarithms.
//!
//! Both checks return `lhs - rhs` of
//!
//! ```text
//! log_(s)(a - b) >= log_(s) a - 2 s b / (a log a ... log_(s-1) a)
//! log_(s)(a / b) >= log_(s) a - 2 (s-1) log b / (log a ... log_(s-1) a)
//! ```
//!
//! The perturbed chain is tracked through its offset from the unperturbed
//! one, `e_j = log_(j)(a') - log_(j) a = ln(1 + e_{j-1} / log_(j-1) a)`,
//! which keeps the gap accurate when `b` is many orders below `a`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityGap {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`, computed without cancellation.
    pub gap: f64,
}

fn domain(what: &str, s: usize, level: usize, value: f64) -> Error {
    Error::Domain(format!(
        "{what} at s = {s}: argument of log #{level} is {value}"
    ))
}

/// Gap of the difference form for `a > b > 0`, `s >= 1`.
pub fn check_iter_log_diff(s: usize, a: f64, b: f64) -> Result<InequalityGap> {
    if s == 0 {
        return Err(Error::InvalidParameter("level s must be at least 1".into()));
    }
    if !(b > 0.0 && a > b) {
        return Err(Error::Domain(format!(
            "need a > b > 0, got a = {a}, b = {b}"
        )));
    }
    // x = log_(j) a, e = offset of log_(j)(a - b); `tail` is the product of
    // log_(1) a .. log_(s-1) a, the denominator without its leading `a`.
    let mut x = a;
    let mut e = -b;
    let mut tail = 1.0;
    for level in 1..=s {
        if !(x > 0.0) {
            return Err(domain("log_(s) a", s, level, x));
        }
        let rel = e / x;
        if !(rel > -1.0) {
            return Err(domain("log_(s)(a - b)", s, level, x + e));
        }
        if level >= 2 {
            tail *= x;
        }
        e = rel.ln_1p();
        x = x.ln();
    }
    let correction = 2.0 * s as f64 * (b / a) / tail;
    Ok(InequalityGap {
        lhs: x + e,
        rhs: x - correction,
        gap: e + correction,
    })
}

/// Gap of the ratio form for `a, b > 0`, `s >= 1`.
pub fn check_iter_log_ratio(s: usize, a: f64, b: f64) -> Result<InequalityGap> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "need a, b > 0, got a = {a}, b = {b}"
        )));
    }
    check_iter_log_ratio_ln(s, a.ln(), b.ln())
}

/// Ratio form with `a` and `b` given through their logarithms, for
/// arguments beyond double range such as `a = e^{e^{10}}`.
pub fn check_iter_log_ratio_ln(s: usize, ln_a: f64, ln_b: f64) -> Result<InequalityGap> {
    if s == 0 {
        return Err(Error::InvalidParameter("level s must be at least 1".into()));
    }
    let mut x = ln_a;
    let mut e = -ln_b;
    let mut denom = 1.0;
    for level in 2..=s {
        if !(x > 0.0) {
            return Err(domain("log_(s) a", s, level, x));
        }
        let rel = e / x;
        if !(rel > -1.0) {
            return Err(domain("log_(s)(a / b)", s, level, x + e));
        }
        denom *= x;
        e = rel.ln_1p();
        x = x.ln();
    }
    let correction = 2.0 * (s - 1) as f64 * ln_b / denom;
    Ok(InequalityGap {
        lhs: x + e,
        rhs: x - correction,
        gap: e + correction,
    })
}
