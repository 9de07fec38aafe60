//! Closed-form quantities for the layer profile of a vertex in sparse
//! `G(n, c/n)` and the maximum degree of its powers.
//!
//! All probabilities are handled in natural-log scale. Values are the
//! `n -> ∞` (branching-process) limits; the `1 + O(d²/n)` finite-size factor
//! is never applied.

pub mod gw;
pub mod inequality;
pub mod logspace;

pub use gw::{gw_sample_profile, sample_poisson};
pub use inequality::{
    check_iter_log_diff, check_iter_log_ratio, check_iter_log_ratio_ln, InequalityGap,
};
pub use logspace::{ln_factorial, log_sum_exp, poisson_ln_pmf, LogProb, LogSumExp};

use crate::error::{Error, Result};

/// Default bound on the number of compositions enumerated per pmf value.
pub const DEFAULT_ENUMERATION_CAP: u64 = 20_000_000;

/// Terms more than this far (in log scale) below the running maximum are
/// negligible for the tail sum.
pub const TAIL_LOG_FLOOR: f64 = 60.0;

/// Consecutive negligible terms required before the tail sum stops.
pub const TAIL_NEGLIGIBLE_RUN: usize = 50;

/// `log_{(k)} x`: the natural log applied `k` times.
pub fn iter_log(k: usize, x: f64) -> Result<f64> {
    let mut v = x;
    for step in 0..k {
        if !(v > 0.0) {
            return Err(Error::Domain(format!(
                "log_({k}) {x}: argument of log #{} is {v}",
                step + 1
            )));
        }
        v = v.ln();
    }
    Ok(v)
}

/// `exp` applied `k` times.
pub fn iter_exp(k: usize, x: f64) -> f64 {
    (0..k).fold(x, |v, _| v.exp())
}

/// `d* = log n / log_{(r+1)} n`.
pub fn d_star(n: f64, r: usize) -> Result<f64> {
    // log_{(r+1)} n > 0 exactly when n exceeds exp applied r times to 1.
    let threshold = iter_exp(r, 1.0);
    let guard = || {
        Error::Domain(format!(
            "d* for r = {r} needs log_({}) n > 0, i.e. n > {threshold}; got n = {n}",
            r + 1
        ))
    };
    if r == 0 {
        return Err(Error::Domain("d* needs r >= 1".into()));
    }
    let denom = iter_log(r + 1, n).map_err(|_| guard())?;
    if !(denom > 0.0) {
        return Err(guard());
    }
    Ok(n.ln() / denom)
}

/// Layer sizes `(ℓ_1, ..., ℓ_r)` with the implicit `ℓ_0 = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerComposition {
    values: Vec<u64>,
}

impl LayerComposition {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("composition needs r >= 1 parts".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn r(&self) -> usize {
        self.values.len()
    }

    pub fn d(&self) -> u64 {
        self.values.iter().sum()
    }

    /// `ℓ_{i-1}` for `i` in `1..=r`.
    pub fn parent(&self, i: usize) -> u64 {
        if i == 1 {
            1
        } else {
            self.values[i - 2]
        }
    }

    /// Some layer is empty while the next one is not.
    pub fn is_orphaned(&self) -> bool {
        self.values.windows(2).any(|w| w[0] == 0 && w[1] > 0)
    }
}

fn check_density(c: f64) {
    assert!(
        c.is_finite() && c > 0.0,
        "density c must be positive, got {c}"
    );
}

/// Shared body of the product form, given the integer `1 + Σ_{i<r} ℓ_i`
/// that multiplies `-c`.
fn product_form(c: f64, comp: &LayerComposition, parent_total: u64) -> LogProb {
    if comp.is_orphaned() {
        return LogProb::ZERO;
    }
    let l = comp.values();
    let mut acc = comp.d() as f64 * c.ln() - c * parent_total as f64;
    for (i, &li) in l.iter().enumerate() {
        acc -= ln_factorial(li);
        if i > 0 && li > 0 {
            acc += li as f64 * (l[i - 1] as f64).ln();
        }
    }
    LogProb::from_ln(acc)
}

/// `ln u_{ℓ_1..ℓ_r} = d ln c - c(1 + d - ℓ_r) - Σ ln ℓ_i! + Σ_{i≥2} ℓ_i ln ℓ_{i-1}`.
///
/// Exact zero when some layer is empty but the following one is not.
pub fn log_u(c: f64, comp: &LayerComposition) -> LogProb {
    check_density(c);
    let d = comp.d();
    let last = *comp.values().last().expect("r >= 1");
    product_form(c, comp, 1 + d - last)
}

/// Joint pmf of the layer sizes written with the exponent
/// `-c(1 + ℓ_1 + ... + ℓ_{r-1})`. Identical to [`log_u`].
pub fn joint_profile_pmf(c: f64, comp: &LayerComposition) -> LogProb {
    check_density(c);
    let l = comp.values();
    let inner: u64 = l[..l.len() - 1].iter().sum();
    product_form(c, comp, 1 + inner)
}

/// `C(d + r - 1, r - 1)`, saturating at `u64::MAX`.
pub fn weak_composition_count(d: u64, r: usize) -> u64 {
    binomial_saturating(d + r as u64 - 1, r as u64 - 1)
}

/// `C(d - 1, r - 1)`, saturating; zero when `d < r`.
pub fn positive_composition_count(d: u64, r: usize) -> u64 {
    if d < r as u64 || r == 0 {
        return 0;
    }
    binomial_saturating(d - 1, r as u64 - 1)
}

fn binomial_saturating(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `f` on every weak composition of `d` into `parts.len()` parts, in
/// lexicographic order.
pub fn for_each_weak_composition(d: u64, parts: &mut [u64], f: &mut impl FnMut(&[u64])) {
    fn go(pos: usize, left: u64, parts: &mut [u64], f: &mut impl FnMut(&[u64])) {
        if pos + 1 == parts.len() {
            parts[pos] = left;
            f(parts);
            return;
        }
        for v in 0..=left {
            parts[pos] = v;
            go(pos + 1, left - v, parts, f);
        }
    }
    if !parts.is_empty() {
        go(0, d, parts, f);
    }
}

/// `P[d_1 + ... + d_r = d]` as the log-sum-exp of `log_u` over every weak
/// composition of `d` into `r` parts.
pub fn power_degree_pmf(c: f64, r: usize, d: u64) -> Result<LogProb> {
    power_degree_pmf_capped(c, r, d, DEFAULT_ENUMERATION_CAP)
}

pub fn power_degree_pmf_capped(c: f64, r: usize, d: u64, cap: u64) -> Result<LogProb> {
    check_density(c);
    if r == 0 {
        return Err(Error::InvalidInput("r must be at least 1".into()));
    }
    let count = weak_composition_count(d, r);
    if count > cap {
        return Err(Error::Capacity(format!(
            "{count} compositions of d = {d} into r = {r} parts exceed the cap {cap}; \
             estimate this value by Monte Carlo instead"
        )));
    }
    let mut acc = LogSumExp::new();
    let mut comp = LayerComposition { values: vec![0; r] };
    let mut parts = vec![0; r];
    for_each_weak_composition(d, &mut parts, &mut |p| {
        comp.values.copy_from_slice(p);
        acc.add(log_u(c, &comp).ln());
    });
    Ok(LogProb::from_ln(acc.ln()))
}

/// Union-bound estimate of `P[Δ(G^r) ≥ d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub n: u64,
    pub c: f64,
    pub r: usize,
    pub d: u64,
    /// `ln Σ_{d' ≥ d} P[degree = d']` for one vertex.
    pub per_vertex_ln: f64,
    /// `per_vertex_ln + ln n`.
    pub union_ln: f64,
    /// Last degree included in the tail sum.
    pub horizon: u64,
}

impl TailEstimate {
    /// The estimate as a probability, clipped to 1.
    pub fn union_probability(&self) -> f64 {
        self.union_ln.exp().min(1.0)
    }
}

/// Per-vertex upper tail of the `G^r` degree and its union over `n` roots.
///
/// Terms are added until [`TAIL_NEGLIGIBLE_RUN`] consecutive ones sit more
/// than [`TAIL_LOG_FLOOR`] below the running maximum. This is a heuristic
/// estimate built from the limiting pmf, not a certified bound.
pub fn union_bound_tail(n: u64, c: f64, r: usize, d: u64) -> Result<TailEstimate> {
    d_star(n as f64, r)?;
    let mut acc = LogSumExp::new();
    let mut running_max = f64::NEG_INFINITY;
    let mut negligible = 0;
    let mut dd = d;
    loop {
        let term = power_degree_pmf(c, r, dd)?.ln();
        acc.add(term);
        running_max = running_max.max(term);
        if term < running_max - TAIL_LOG_FLOOR {
            negligible += 1;
            if negligible >= TAIL_NEGLIGIBLE_RUN {
                break;
            }
        } else {
            negligible = 0;
        }
        dd += 1;
    }
    let per_vertex_ln = acc.ln();
    Ok(TailEstimate {
        n,
        c,
        r,
        d,
        per_vertex_ln,
        union_ln: per_vertex_ln + (n as f64).ln(),
        horizon: dd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn comp(v: &[u64]) -> LayerComposition {
        LayerComposition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn iter_log_examples() {
        assert_eq!(iter_log(0, 3.5).unwrap(), 3.5);
        assert!((iter_log(1, E).unwrap() - 1.0).abs() < 1e-15);
        let tower = E.powf(E.powf(E));
        assert!((iter_log(3, tower).unwrap() - 1.0).abs() < 1e-12);
        // two calls to the scalar log
        let expect = (1e6f64).ln().ln();
        assert!(((iter_log(2, 1e6).unwrap() - expect) / expect).abs() < 1e-12);
        assert!((expect - 2.6259).abs() < 5e-4);
    }

    #[test]
    fn iter_log_domain() {
        assert!(matches!(iter_log(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(iter_log(3, 2.0), Err(Error::Domain(_))));
        assert!(matches!(iter_log(2, 0.5), Err(Error::Domain(_))));
        assert!(iter_log(2, 1.0).is_err());
        assert_eq!(iter_log(1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn d_star_examples() {
        let n = E.powf(E.powf(E));
        assert!((d_star(n, 2).unwrap() - E.powf(E)).abs() < 1e-9);
        assert!((E.powf(E) - 15.1543).abs() < 1e-4);
        let expect = (1e6f64).ln() / (1e6f64).ln().ln().ln();
        assert!((d_star(1e6, 2).unwrap() - expect).abs() < 1e-12);
        match d_star(15.0, 2) {
            Err(Error::Domain(msg)) => assert!(msg.contains("15.15"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn log_u_examples() {
        let v = log_u(1.0, &comp(&[2])).ln();
        assert!((v - (-1.0 - 2f64.ln())).abs() < 1e-15);
        assert!((v + 1.6931).abs() < 1e-4);
        assert_eq!(log_u(1.0, &comp(&[1, 1])).ln(), -2.0);
        assert!(log_u(1.0, &comp(&[0, 3])).is_zero());
        assert_eq!(joint_profile_pmf(1.0, &comp(&[1, 1])).ln(), -2.0);
    }

    #[test]
    fn joint_pmf_poisson_factorization_example() {
        // Pois_2(2) * Pois_4(3) * Pois_6(1), with the Poisson terms written out.
        let pois = |lam: f64, k: u64| {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            (-lam).exp() * lam.powi(k as i32) / fact
        };
        let expect = (pois(2.0, 2) * pois(4.0, 3) * pois(6.0, 1)).ln();
        let got = joint_profile_pmf(2.0, &comp(&[2, 3, 1])).ln();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn degree_pmf_examples() {
        assert_eq!(power_degree_pmf(1.0, 1, 0).unwrap().ln(), -1.0);
        assert_eq!(power_degree_pmf(1.0, 2, 0).unwrap().ln(), -1.0);
        // (0,2) -> 0, (1,1) -> e^-2, (2,0) -> e^-3 / 2
        let expect = ((-2f64).exp() + (-3f64).exp() / 2.0).ln();
        assert!((power_degree_pmf(1.0, 2, 2).unwrap().ln() - expect).abs() < 1e-14);
        assert!(matches!(
            power_degree_pmf_capped(1.0, 3, 100, 10),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn composition_counts() {
        assert_eq!(weak_composition_count(2, 2), 3);
        assert_eq!(weak_composition_count(80, 3), 3321);
        assert_eq!(positive_composition_count(4, 2), 3);
        assert_eq!(positive_composition_count(2, 3), 0);
        assert_eq!(weak_composition_count(1 << 40, 6), u64::MAX);
        let mut seen = Vec::new();
        for_each_weak_composition(2, &mut [0; 2], &mut |p| seen.push(p.to_vec()));
        assert_eq!(seen, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn tail_union_is_per_vertex_plus_log_n() {
        let t = union_bound_tail(100_000, 1.0, 2, 20).unwrap();
        assert_eq!(t.union_ln, t.per_vertex_ln + (100_000f64).ln());
        assert!((t.union_ln - t.per_vertex_ln - (100_000f64).ln()).abs() < 1e-12);
        assert!(t.horizon > 20 + TAIL_NEGLIGIBLE_RUN as u64);
        assert!(matches!(
            union_bound_tail(15, 1.0, 2, 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn r1_tail_is_poisson_upper_tail() {
        for d in [0u64, 1, 3, 6, 12] {
            let t = union_bound_tail(1000, 1.0, 1, d).unwrap();
            // 1 - Σ_{k<d} e^{-1}/k!
            let mut head = 0.0;
            let mut term = (-1f64).exp();
            for k in 0..d {
                head += term;
                term /= (k + 1) as f64;
            }
            let expect = if d < 4 {
                1.0 - head
            } else {
                // direct sum avoids cancellation deep in the tail
                let mut s = 0.0;
                let mut t = (-1f64).exp() / (1..=d).map(|i| i as f64).product::<f64>();
                for k in d..d + 60 {
                    s += t;
                    t /= (k + 1) as f64;
                }
                s
            };
            let rel = (t.per_vertex_ln.exp() - expect).abs() / expect;
            assert!(rel < 1e-12, "d = {d}: rel error {rel}");
        }
    }
}
