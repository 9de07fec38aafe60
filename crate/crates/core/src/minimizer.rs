//! Minimization of `Σ ℓ_i log(ℓ_i / ℓ_{i-1})` subject to `Σ ℓ_i = d`,
//! `ℓ_0 = 1`.
//!
//! The continuous minimizer satisfies the stationarity system
//! `1 + log p_i - p_{i+1} + λ = 0` (`i < r`), `1 + log p_r + λ = 0` with
//! `p_i = ℓ_i / ℓ_{i-1}`. Hence `p_i = p_r e^{p_{i+1}}`, and the whole
//! solution is a function of `p_r`, found by bisection on the constraint.
//! The integer problem is solved exhaustively as an independent check.

use rayon::prelude::*;

use crate::analytic::{iter_log, log_sum_exp, positive_composition_count, LayerComposition};
use crate::error::{Error, Result};

/// Default relative constraint tolerance `|Σ ℓ_i - d| / d`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default limit on the number of compositions scanned by brute force.
pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 100_000_000;

const MAX_BISECTIONS: usize = 400;

/// `Σ ℓ_i log(ℓ_i / ℓ_{i-1})` with `ℓ_0 = 1`. A term with `ℓ_i = 0` is
/// zero; an empty layer followed by a nonempty one gives `+∞`.
pub fn objective(comp: &LayerComposition) -> f64 {
    let mut total = 0.0;
    let mut parent = 1u64;
    for &l in comp.values() {
        if l > 0 {
            if parent == 0 {
                return f64::INFINITY;
            }
            total += l as f64 * (l as f64 / parent as f64).ln();
        }
        parent = l;
    }
    total
}

/// [`objective`] over real layer sizes.
pub fn objective_continuous(ell: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut parent = 1.0;
    for &l in ell {
        if l > 0.0 {
            if parent == 0.0 {
                return f64::INFINITY;
            }
            total += l * (l / parent).ln();
        }
        parent = l;
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeSolution {
    pub r: usize,
    pub d: f64,
    pub lambda: f64,
    /// Ratios `p_1..p_r`.
    pub p: Vec<f64>,
    /// Layer sizes `ℓ_1..ℓ_r`.
    pub ell: Vec<f64>,
    pub objective: f64,
    pub constraint_residual: f64,
    pub stationarity_residual: f64,
}

impl LagrangeSolution {
    /// `d / ℓ_r`.
    pub fn c1(&self) -> f64 {
        self.d / self.ell[self.r - 1]
    }

    /// Summands `T_i = ℓ_i log p_i` of the objective.
    pub fn terms(&self) -> Vec<f64> {
        self.ell
            .iter()
            .zip(&self.p)
            .map(|(l, p)| l * p.ln())
            .collect()
    }
}

/// `ln p_i` and `ln ℓ_i` generated from `p_r`. Everything stays in log
/// scale because `p_1` is an exponential tower in `p_r`; overflow shows up
/// as `+∞`, which only ever pushes the bisection down.
struct Tower {
    log_p: Vec<f64>,
    log_ell: Vec<f64>,
    log_sum: f64,
}

fn tower(r: usize, p_r: f64) -> Tower {
    let mut log_p = vec![0.0; r];
    let ln_pr = p_r.ln();
    log_p[r - 1] = ln_pr;
    for i in (0..r - 1).rev() {
        log_p[i] = ln_pr + log_p[i + 1].exp();
    }
    let mut log_ell = Vec::with_capacity(r);
    let mut acc = 0.0;
    for &lp in &log_p {
        acc += lp;
        log_ell.push(acc);
    }
    let log_sum = if log_ell.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        f64::INFINITY
    } else {
        log_sum_exp(log_ell.iter().copied())
    };
    Tower {
        log_p,
        log_ell,
        log_sum,
    }
}

fn assemble(r: usize, d: f64, p_r: f64, t: &Tower) -> LagrangeSolution {
    let ell: Vec<f64> = t.log_ell.iter().map(|v| v.exp()).collect();
    let p: Vec<f64> = t.log_p.iter().map(|v| v.exp()).collect();
    let lambda = -1.0 - p_r.ln();
    let objective = ell.iter().zip(&t.log_p).map(|(l, lp)| l * lp).sum();
    let mut stationarity: f64 = (1.0 + t.log_p[r - 1] + lambda).abs();
    for i in 0..r - 1 {
        stationarity = stationarity.max((1.0 + t.log_p[i] - p[i + 1] + lambda).abs());
    }
    LagrangeSolution {
        r,
        d,
        lambda,
        constraint_residual: (ell.iter().sum::<f64>() - d).abs(),
        p,
        ell,
        objective,
        stationarity_residual: stationarity,
    }
}

/// Solves the stationarity system for `Σ ℓ_i = d` by bisection on
/// `p_r ∈ [1, log_{(r-1)} d + 1]`.
pub fn solve_lagrange(r: usize, d: f64, tol: f64) -> Result<LagrangeSolution> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if !(d.is_finite() && d >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "d must be at least 1, got {d}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if r == 1 {
        let ln_d = d.ln();
        return Ok(LagrangeSolution {
            r,
            d,
            lambda: -1.0 - ln_d,
            p: vec![d],
            ell: vec![d],
            objective: d * ln_d,
            constraint_residual: 0.0,
            stationarity_residual: 0.0,
        });
    }
    let ln_d = d.ln();
    let mut lo = 1.0;
    let floor = tower(r, lo);
    if floor.log_sum == f64::INFINITY {
        return Err(Error::Overflow(format!(
            "at p_r = 1 the layer sizes for r = {r} already exceed double range; \
             no finite d admits a stationary point"
        )));
    }
    if floor.log_sum > ln_d {
        return Err(Error::Regime(format!(
            "stationary solutions for r = {r} need d >= {:.6}, got d = {d}",
            floor.log_sum.exp()
        )));
    }
    let mut hi = match iter_log(r - 1, d) {
        Ok(v) => v + 1.0,
        Err(e) => return Err(Error::Regime(format!("no bisection bracket: {e}"))),
    };
    if !(tower(r, hi).log_sum >= ln_d) {
        return Err(Error::Regime(format!(
            "bracket [1, {hi}] does not reach d = {d} for r = {r}"
        )));
    }
    let mut best = (f64::INFINITY, lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let t = tower(r, mid);
        let residual = (t.log_ell.iter().map(|v| v.exp()).sum::<f64>() - d).abs();
        if residual < best.0 {
            best = (residual, mid);
        }
        if residual <= tol * d {
            break;
        }
        if t.log_sum < ln_d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_r = best.1;
    let sol = assemble(r, d, p_r, &tower(r, p_r));
    if sol.constraint_residual > tol * d {
        return Err(Error::NoConvergence(format!(
            "constraint residual {} exceeds {} at double precision",
            sol.constraint_residual,
            tol * d
        )));
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegerMinResult {
    pub composition: LayerComposition,
    pub value: f64,
    pub scanned: u64,
}

#[derive(Debug, Clone)]
struct Best {
    value: f64,
    parts: Vec<u64>,
    scanned: u64,
}

impl Best {
    fn none() -> Self {
        Self {
            value: f64::INFINITY,
            parts: Vec::new(),
            scanned: 0,
        }
    }

    fn better_than(&self, other: &Best) -> bool {
        !self.parts.is_empty()
            && (other.parts.is_empty()
                || self.value < other.value
                || (self.value == other.value && self.parts < other.parts))
    }

    fn merge(self, other: Best) -> Best {
        let scanned = self.scanned + other.scanned;
        let mut keep = if other.better_than(&self) {
            other
        } else {
            self
        };
        keep.scanned = scanned;
        keep
    }
}

fn search(pos: usize, parent: u64, left: u64, acc: f64, parts: &mut [u64], best: &mut Best) {
    let r = parts.len();
    if pos + 1 == r {
        parts[pos] = left;
        let value = acc + left as f64 * (left as f64 / parent as f64).ln();
        best.scanned += 1;
        if best.parts.is_empty() || value < best.value {
            best.value = value;
            best.parts.clear();
            best.parts.extend_from_slice(parts);
        }
        return;
    }
    let reserve = (r - 1 - pos) as u64;
    for v in 1..=left - reserve {
        parts[pos] = v;
        let term = v as f64 * (v as f64 / parent as f64).ln();
        search(pos + 1, v, left - v, acc + term, parts, best);
    }
}

/// Exact minimum of [`objective`] over compositions of `d` into `r`
/// positive parts. Ties go to the lexicographically smallest composition.
pub fn brute_force_min(r: usize, d: u64) -> Result<IntegerMinResult> {
    brute_force_min_capped(r, d, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn brute_force_min_capped(r: usize, d: u64, cap: u64) -> Result<IntegerMinResult> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if d < r as u64 {
        return Err(Error::InvalidParameter(format!(
            "d = {d} has no composition into {r} positive parts"
        )));
    }
    let count = positive_composition_count(d, r);
    if count > cap {
        return Err(Error::Capacity(format!(
            "{count} compositions of d = {d} into r = {r} parts exceed the cap {cap}"
        )));
    }
    if r == 1 {
        let composition = LayerComposition::new(vec![d])?;
        return Ok(IntegerMinResult {
            value: objective(&composition),
            composition,
            scanned: 1,
        });
    }
    let reserve = (r - 1) as u64;
    let best = (1..=d - reserve)
        .into_par_iter()
        .map(|first| {
            let mut parts = vec![0; r];
            parts[0] = first;
            let mut best = Best::none();
            let acc = first as f64 * (first as f64).ln();
            search(1, first, d - first, acc, &mut parts, &mut best);
            best
        })
        .reduce(Best::none, Best::merge);
    let composition = LayerComposition::new(best.parts)?;
    Ok(IntegerMinResult {
        value: objective(&composition),
        composition,
        scanned: best.scanned,
    })
}

/// Best integer composition of `d` obtained by rounding each coordinate of
/// `ell` down or up (at least 1) and absorbing the leftover into a single
/// coordinate. Returns `None` when no candidate is a valid composition.
pub fn round_repair(ell: &[f64], d: u64) -> Option<(LayerComposition, f64)> {
    let r = ell.len();
    assert!(r <= 16, "rounding enumerates 2^r candidates");
    let mut best: Option<(LayerComposition, f64)> = None;
    for mask in 0u32..1 << r {
        let base: Vec<i64> = ell
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let v = if mask >> i & 1 == 1 {
                    l.ceil()
                } else {
                    l.floor()
                };
                (v as i64).max(1)
            })
            .collect();
        let diff = d as i64 - base.iter().sum::<i64>();
        for absorb in 0..r {
            let mut cand = base.clone();
            cand[absorb] += diff;
            if cand[absorb] < 1 {
                continue;
            }
            let comp = LayerComposition::new(cand.iter().map(|&v| v as u64).collect()).ok()?;
            let value = objective(&comp);
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((comp, value));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMethod {
    Continuous,
    BruteForce,
}

/// Realized slack `minimum - d log_{(r)} d` in the lower bound on the
/// objective. Its sign is reported, not asserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundGap {
    pub r: usize,
    pub d: u64,
    pub minimum: f64,
    pub baseline: f64,
    pub gap: f64,
}

impl LowerBoundGap {
    pub fn per_d(&self) -> f64 {
        self.gap / self.d as f64
    }
}

pub fn lower_bound_gap(r: usize, d: u64, method: GapMethod) -> Result<LowerBoundGap> {
    let baseline = d as f64 * iter_log(r, d as f64)?;
    let minimum = match method {
        GapMethod::Continuous => solve_lagrange(r, d as f64, DEFAULT_TOL)?.objective,
        GapMethod::BruteForce => brute_force_min(r, d)?.value,
    };
    Ok(LowerBoundGap {
        r,
        d,
        minimum,
        baseline,
        gap: minimum - baseline,
    })
}

/// Result of [`minimize`]: the stationary solution when one exists, the
/// exhaustive integer minimum below the large-d regime.
#[derive(Debug, Clone, PartialEq)]
pub enum MinimizeOutcome {
    Continuous(LagrangeSolution),
    SmallD(IntegerMinResult),
}

impl MinimizeOutcome {
    pub fn objective(&self) -> f64 {
        match self {
            MinimizeOutcome::Continuous(s) => s.objective,
            MinimizeOutcome::SmallD(b) => b.value,
        }
    }

    pub fn regime(&self) -> &'static str {
        match self {
            MinimizeOutcome::Continuous(_) => "continuous",
            MinimizeOutcome::SmallD(_) => "small-d",
        }
    }
}

pub fn minimize(r: usize, d: u64, tol: f64) -> Result<MinimizeOutcome> {
    match solve_lagrange(r, d as f64, tol) {
        Ok(sol) => Ok(MinimizeOutcome::Continuous(sol)),
        Err(Error::Regime(_)) => Ok(MinimizeOutcome::SmallD(brute_force_min(r, d)?)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(v: &[u64]) -> LayerComposition {
        LayerComposition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn objective_examples() {
        assert!((objective(&comp(&[8])) - 8.0 * 8f64.ln()).abs() < 1e-14);
        assert!((objective(&comp(&[8])) - 16.6355).abs() < 1e-4);
        assert_eq!(objective(&comp(&[1, 1])), 0.0);
        assert_eq!(objective(&comp(&[0, 5])), f64::INFINITY);
        assert_eq!(objective(&comp(&[3, 0])), 3.0 * 3f64.ln());
    }

    #[test]
    fn brute_force_hand_enumeration() {
        // ℓ_1 = 1: 3 log 3; ℓ_1 = 2: 2 log 2; ℓ_1 = 3: 3 log 3 - log 3
        let cands = [3.0 * 3f64.ln(), 2.0 * 2f64.ln(), 2.0 * 3f64.ln()];
        assert!((cands[0] - 3.2958).abs() < 1e-4);
        assert!((cands[1] - 1.3863).abs() < 1e-4);
        assert!((cands[2] - 2.1972).abs() < 1e-4);
        let res = brute_force_min(2, 4).unwrap();
        assert_eq!(res.composition.values(), &[2, 2]);
        assert!((res.value - cands[1]).abs() < 1e-14);
        assert_eq!(res.scanned, 3);

        let res = brute_force_min(1, 7).unwrap();
        assert_eq!(res.composition.values(), &[7]);
        assert_eq!(res.value, 7.0 * 7f64.ln());
    }

    #[test]
    fn brute_force_guards() {
        assert!(matches!(
            brute_force_min_capped(3, 1000, 10),
            Err(Error::Capacity(_))
        ));
        assert!(brute_force_min(3, 2).is_err());
    }

    #[test]
    fn r1_is_fully_determined() {
        let s = solve_lagrange(1, 37.0, DEFAULT_TOL).unwrap();
        assert_eq!(s.p, vec![37.0]);
        assert_eq!(s.ell, vec![37.0]);
        assert!((s.objective - 37.0 * 37f64.ln()).abs() < 1e-12);
        assert_eq!(
            lower_bound_gap(1, 37, GapMethod::BruteForce).unwrap().gap,
            0.0
        );
        assert_eq!(
            lower_bound_gap(1, 37, GapMethod::Continuous).unwrap().gap,
            0.0
        );
    }

    #[test]
    fn r2_d1e4_structure() {
        let d = 1e4;
        let s = solve_lagrange(2, d, DEFAULT_TOL).unwrap();
        let (ld, lld) = (d.ln(), d.ln().ln());
        assert!(s.p[1] <= ld && s.p[1] >= ld - 5.0 * lld, "p_r = {}", s.p[1]);
        assert!(s.c1() > 1.0);
        assert!(s.constraint_residual <= 1e-10 * d);
        assert!(s.stationarity_residual <= 1e-8);
        // ratio ordering
        assert!(s.p[0] >= s.p[1] * s.p[1]);

        // cross-check against a dense grid over p_r
        let mut best = (f64::INFINITY, 0.0);
        let steps = 200_000;
        for k in 0..=steps {
            let pr = 1.0 + (ld + 1.0 - 1.0) * k as f64 / steps as f64;
            let total = pr * pr.exp() * (1.0 + pr);
            if (total - d).abs() < best.0 {
                best = ((total - d).abs(), pr);
            }
        }
        assert!((best.1 - s.p[1]).abs() < 1e-4);
    }

    #[test]
    fn relaxation_and_rounding_small_d() {
        for d in [20u64, 37, 100] {
            let s = solve_lagrange(2, d as f64, DEFAULT_TOL).unwrap();
            let b = brute_force_min(2, d).unwrap();
            assert!(s.objective <= b.value + 1e-9);
            let (_, rounded) = round_repair(&s.ell, d).unwrap();
            assert!(rounded <= 1.03 * b.value);
        }
    }

    #[test]
    fn small_d_falls_back_to_brute_force() {
        assert!(matches!(
            solve_lagrange(2, 4.0, DEFAULT_TOL),
            Err(Error::Regime(_))
        ));
        match minimize(2, 4, DEFAULT_TOL).unwrap() {
            MinimizeOutcome::SmallD(b) => assert_eq!(b.composition.values(), &[2, 2]),
            other => panic!("{other:?}"),
        }
        assert_eq!(minimize(2, 50, DEFAULT_TOL).unwrap().regime(), "continuous");
    }

    #[test]
    fn deep_towers_report_overflow() {
        assert!(matches!(
            solve_lagrange(6, 1e6, DEFAULT_TOL),
            Err(Error::Overflow(_))
        ));
        // r = 5 is finite at p_r = 1 but needs an astronomically large d
        assert!(matches!(
            solve_lagrange(5, 1e6, DEFAULT_TOL),
            Err(Error::Regime(_))
        ));
    }
}
