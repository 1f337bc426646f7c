//! Quicksort comparison counts: exact expectation, random costs, and the
//! toll function that survives in the limit.
//!
//! The comparison count satisfies C_n = (n - 1) + C_{I-1} + C_{n-I} with the
//! pivot rank I uniform on {1..n}. Centering by the exact mean and scaling by
//! n sends the law of C_n to the fixed point studied in [`crate::fixed_point`],
//! and the conditional expectation of that recursion is where the toll
//! function g comes from.

use crate::dist::{EmpiricalDist, Provenance};
use crate::error::{Error, Result};
use crate::exec;
use crate::stream::Stream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// x ln x extended by continuity to 0 at x = 0.
#[inline]
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Toll function 2u ln u + 2(1-u) ln(1-u) + 1 without the domain check;
/// callers feed RNG output already inside [0, 1).
#[inline]
pub(crate) fn toll(u: f64) -> f64 {
    2.0 * xlnx(u) + 2.0 * xlnx(1.0 - u) + 1.0
}

/// Toll function g(u) = 2u ln u + 2(1-u) ln(1-u) + 1 on [0, 1], with the
/// endpoint values g(0) = g(1) = 1 taken by continuity.
pub fn g(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!(
            "toll argument must lie in [0,1], got {u}"
        )));
    }
    Ok(toll(u))
}

/// E g(U)^2 = 7/3 - 2 pi^2 / 9 for U uniform on (0,1).
pub fn g_second_moment() -> f64 {
    7.0 / 3.0 - 2.0 * PI * PI / 9.0
}

/// One draw of the comparison count for n distinct keys: walk the recursion
/// on subproblem sizes with an explicit stack; each subproblem of size s
/// costs s - 1 comparisons and splits at a uniform pivot rank.
pub fn quicksort_comparisons(n: u64, rng: &mut ChaCha8Rng) -> u64 {
    let mut cost = 0u64;
    let mut stack: Vec<u64> = Vec::with_capacity(64);
    if n >= 2 {
        stack.push(n);
    }
    while let Some(s) = stack.pop() {
        cost += s - 1;
        let pivot = rng.random_range(1..=s);
        let left = pivot - 1;
        let right = s - pivot;
        if left >= 2 {
            stack.push(left);
        }
        if right >= 2 {
            stack.push(right);
        }
    }
    cost
}

/// `reps` independent comparison counts for size `n`.
pub fn comparison_costs(n: u64, reps: usize, stream: Stream) -> Vec<u64> {
    exec::sample_indexed(reps, stream, |rng, _| quicksort_comparisons(n, rng))
}

/// Exact mean comparison count 2(n+1)H_n - 4n, with the harmonic number
/// accumulated under Kahan compensation so large n stays at full precision.
pub fn expected_comparisons(n: u64) -> f64 {
    let mut h = 0.0f64;
    let mut carry = 0.0f64;
    for k in 1..=n {
        let y = 1.0 / k as f64 - carry;
        let t = h + y;
        carry = (t - h) - y;
        h = t;
    }
    2.0 * (n + 1) as f64 * h - 4.0 * n as f64
}

/// Sample of (C_n - E C_n) / n over `reps` independent runs.
pub fn normalized_costs(n: u64, reps: usize, stream: Stream) -> Result<EmpiricalDist> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "normalized costs need n >= 2, got {n}"
        )));
    }
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let expected = expected_comparisons(n);
    let scale = 1.0 / n as f64;
    let values = exec::sample_indexed(reps, stream, |rng, _| {
        (quicksort_comparisons(n, rng) as f64 - expected) * scale
    });
    EmpiricalDist::new(
        values,
        Provenance::with_stream(format!("normalized_costs(n={n}, reps={reps})"), stream),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen reference values, each computed from the defining expression at
    // f64 precision (closed forms evaluated independently of this module).
    const G_QUARTER: f64 = -0.12467028923761658; // 1 + 0.5 ln(1/4) + 1.5 ln(3/4)
    const G_HALF: f64 = -0.3862943611198906; // 1 - 2 ln 2
    const G_SECOND_MOMENT: f64 = 0.1400879108690316; // 7/3 - 2 pi^2/9

    #[test]
    fn toll_known_values_and_domain() {
        assert_eq!(g(0.0).unwrap(), 1.0);
        assert_eq!(g(1.0).unwrap(), 1.0);
        assert!((g(0.5).unwrap() - G_HALF).abs() < 1e-15);
        assert!((g(0.25).unwrap() - G_QUARTER).abs() < 1e-15);
        assert!(g(-0.01).is_err());
        assert!(g(1.01).is_err());
        assert!(g(f64::NAN).is_err());
    }

    #[test]
    fn toll_is_symmetric_with_interior_minimum() {
        for k in 0..=500 {
            let u = k as f64 / 500.0;
            let a = g(u).unwrap();
            let b = g(1.0 - u).unwrap();
            assert!((a - b).abs() < 1e-12, "asymmetry at u = {u}");
            assert!(a <= 1.0 + 1e-15);
            assert!(a >= G_HALF - 1e-15, "below the u = 1/2 minimum at {u}");
        }
    }

    #[test]
    fn toll_moments_match_monte_carlo() {
        // Oracle: direct averaging over 1e7 uniforms; E g = 0 and
        // E g^2 = 7/3 - 2 pi^2/9 both to within 1e-3.
        let n = 10_000_000;
        let draws = exec::sample_indexed(n, Stream::root(101), |rng, _| toll(rng.random::<f64>()));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let second = draws.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-3, "E g(U) = {mean}");
        assert!((second - G_SECOND_MOMENT).abs() < 1e-3, "E g^2 = {second}");
        assert!((g_second_moment() - G_SECOND_MOMENT).abs() < 1e-15);
    }

    #[test]
    fn tiny_sizes_are_deterministic() {
        let mut rng = Stream::root(7).rng();
        assert_eq!(quicksort_comparisons(0, &mut rng), 0);
        assert_eq!(quicksort_comparisons(1, &mut rng), 0);
        for _ in 0..32 {
            assert_eq!(quicksort_comparisons(2, &mut rng), 1);
        }
    }

    #[test]
    fn three_keys_enumerate() {
        // Pivot rank 2 gives cost 2; ranks 1 and 3 give cost 3, so the law is
        // P(2) = 1/3, P(3) = 2/3, mean 8/3.
        let reps = 60_000;
        let costs = comparison_costs(3, reps, Stream::root(13));
        assert!(costs.iter().all(|&c| c == 2 || c == 3));
        let p2 = costs.iter().filter(|&&c| c == 2).count() as f64 / reps as f64;
        let se = (2.0 / 9.0f64 / reps as f64).sqrt();
        assert!((p2 - 1.0 / 3.0).abs() < 4.0 * se, "P(2) = {p2}");
        assert!((expected_comparisons(3) - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn cost_bounds_hold() {
        let mut rng = Stream::root(29).rng();
        for n in [2u64, 3, 5, 17, 64, 257] {
            for _ in 0..50 {
                let c = quicksort_comparisons(n, &mut rng);
                assert!(c >= n - 1, "n={n}: {c} below the one-pass minimum");
                assert!(
                    c <= n * (n - 1) / 2,
                    "n={n}: {c} above the sorted-input worst case"
                );
            }
        }
    }

    #[test]
    fn expectation_matches_rational_recursion() {
        // Oracle: E C_n = (n-1) + (2/n) sum_{k<n} E C_k in exact arithmetic.
        use num_bigint::BigInt;
        use num_rational::BigRational;
        let big = |v: u64| BigRational::from_integer(BigInt::from(v));
        let mut exact = vec![big(0); 13];
        for n in 2..=12u64 {
            let below: BigRational = exact[..n as usize].iter().fold(big(0), |acc, v| acc + v);
            exact[n as usize] = big(n - 1) + big(2) / big(n) * below;
        }
        for n in 0..=12u64 {
            let num: f64 = exact[n as usize].numer().to_string().parse().unwrap();
            let den: f64 = exact[n as usize].denom().to_string().parse().unwrap();
            let want = num / den;
            let got = expected_comparisons(n);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "n={n}: closed form {got} vs recursion {want}"
            );
        }
        // Spot values from the recursion: E C_7 = 472/35, E C_12 = 452993/13860.
        assert!((expected_comparisons(7) - 472.0 / 35.0).abs() < 1e-12);
        assert!((expected_comparisons(12) - 452_993.0 / 13_860.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_mean_tracks_expectation() {
        for (i, n) in [10u64, 100, 1000].into_iter().enumerate() {
            let reps = 100_000;
            let costs = comparison_costs(n, reps, Stream::root(40 + i as u64));
            let mean = costs.iter().map(|&c| c as f64).sum::<f64>() / reps as f64;
            let var = costs
                .iter()
                .map(|&c| (c as f64 - mean) * (c as f64 - mean))
                .sum::<f64>()
                / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            let want = expected_comparisons(n);
            assert!(
                (mean - want).abs() <= 4.0 * se,
                "n={n}: mean {mean} vs {want} (se {se})"
            );
        }
    }

    #[test]
    fn normalized_costs_are_centered() {
        let d = normalized_costs(200, 50_000, Stream::root(55)).unwrap();
        let se = d.stdev() / (d.len() as f64).sqrt();
        assert!(d.mean().abs() < 4.0 * se + 1e-3, "mean {}", d.mean());
        assert!(normalized_costs(1, 10, Stream::root(1)).is_err());
    }
}
