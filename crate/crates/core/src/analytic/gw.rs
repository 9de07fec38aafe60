//! Poisson(c) Galton–Watson generation sizes, the `n -> ∞` model of the
//! BFS layers around a vertex of `G(n, c/n)`.

use rand::Rng;

use crate::power::NeighborhoodProfile;

/// Means above this are split into independent pieces; a sum of
/// independent Poisson variables is Poisson with the summed mean.
const INVERSION_CHUNK: f64 = 10.0;

/// Exact Poisson sample by sequential CDF inversion.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    debug_assert!(lambda >= 0.0 && lambda.is_finite());
    let mut remaining = lambda;
    let mut total = 0;
    while remaining > 0.0 {
        let piece = remaining.min(INVERSION_CHUNK);
        remaining -= piece;
        total += invert(piece, rng);
    }
    total
}

fn invert<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut term = (-lambda).exp();
    let mut cdf = term;
    while u >= cdf {
        k += 1;
        term *= lambda / k as f64;
        if term == 0.0 {
            // CDF saturated below u through rounding.
            break;
        }
        cdf += term;
    }
    k
}

/// Generation sizes `(Z_1, ..., Z_r)` with `Z_0 = 1` and
/// `Z_i | Z_{i-1} ~ Poisson(c * Z_{i-1})`.
pub fn gw_sample_profile<R: Rng + ?Sized>(c: f64, r: usize, rng: &mut R) -> NeighborhoodProfile {
    let mut layers = Vec::with_capacity(r);
    let mut parents = 1u64;
    for _ in 0..r {
        let z = if parents == 0 {
            0
        } else {
            sample_poisson(c * parents as f64, rng)
        };
        layers.push(z);
        parents = z;
    }
    NeighborhoodProfile { root: 0, layers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::logspace::poisson_ln_pmf;
    use crate::stream;

    #[test]
    fn extinct_process_stays_extinct() {
        let mut rng = stream::stream(3, 0, 0);
        let mut seen = 0;
        for _ in 0..20_000 {
            let p = gw_sample_profile(1.0, 3, &mut rng);
            if p.layers[0] == 0 {
                assert_eq!(p.layers, vec![0, 0, 0]);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn poisson_mean_and_variance() {
        let mut rng = stream::stream(4, 0, 0);
        for &lambda in &[0.3, 4.0, 37.5] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n)
                .map(|_| sample_poisson(lambda, &mut rng) as f64)
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (lambda / n as f64).sqrt();
            assert!(
                (mean - lambda).abs() < 4.0 * se,
                "lambda {lambda}: mean {mean}"
            );
            assert!(
                (var / lambda - 1.0).abs() < 0.03,
                "lambda {lambda}: var {var}"
            );
        }
    }

    #[test]
    fn small_mean_frequencies() {
        let mut rng = stream::stream(5, 0, 0);
        let n = 100_000;
        let mut counts = [0u64; 8];
        for _ in 0..n {
            let k = sample_poisson(1.0, &mut rng) as usize;
            if k < counts.len() {
                counts[k] += 1;
            }
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = poisson_ln_pmf(1.0, k as u64).exp();
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 4.0 * sd + 1e-6, "k = {k}");
        }
    }
}
