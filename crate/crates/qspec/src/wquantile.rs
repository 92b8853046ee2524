//! Check (pinball) loss and the exact weighted quantile.
//!
//! The local-constant quantile smoother minimizes a kernel-weighted check
//! loss, and that minimizer is exactly a weighted quantile of the sample
//! values. The implementation sorts by value and scans cumulative weight,
//! so every downstream estimator inherits an exact argmin rather than an
//! iterative approximation. Flat minima are resolved to their left
//! endpoint, the generalized-inverse CDF convention.

use crate::num::Real;
use crate::{Error, Result};

/// The check loss τ_α(u) = α·u₊ − (1−α)·u₋; nonnegative, minimized over
/// location by the α-quantile.
#[inline]
pub fn check_loss<F: Real>(alpha: F, u: F) -> Result<F> {
    if alpha <= F::zero() || alpha >= F::one() {
        return Err(Error::InvalidQuantileLevel(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(check_loss_unchecked(alpha, u))
}

#[inline]
pub(crate) fn check_loss_unchecked<F: Real>(alpha: F, u: F) -> F {
    if u > F::zero() {
        alpha * u
    } else {
        (alpha - F::one()) * u
    }
}

/// Values with nonnegative weights, the abstract sample every smoother
/// reduces to.
#[derive(Debug, Clone)]
pub struct WeightedSample<F> {
    values: Vec<F>,
    weights: Vec<F>,
}

impl<F: Real> WeightedSample<F> {
    /// Validates lengths, finiteness and weight signs.
    pub fn new(values: Vec<F>, weights: Vec<F>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::Data(format!(
                "weighted sample length mismatch: {} values, {} weights",
                values.len(),
                weights.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value in weighted sample".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < F::zero()) {
            return Err(Error::Data("weights must be finite and nonnegative".into()));
        }
        Ok(WeightedSample { values, weights })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn total_weight(&self) -> F {
        self.weights.iter().fold(F::zero(), |a, w| a + *w)
    }

    /// The smallest sample value v with cumulative weight of {values ≤ v}
    /// at least α·W. This v minimizes the weighted check loss; ties at a
    /// flat minimum resolve to the left endpoint.
    pub fn quantile(&self, alpha: F) -> Result<F> {
        if alpha <= F::zero() || alpha >= F::one() {
            return Err(Error::InvalidQuantileLevel(alpha.to_f64().unwrap_or(f64::NAN)));
        }
        let total = self.total_weight();
        if !(total > F::zero()) {
            return Err(Error::AllZeroWeights);
        }
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            self.values[a]
                .partial_cmp(&self.values[b])
                .expect("values validated finite")
        });
        let target = alpha * total;
        let mut cum = F::zero();
        for &i in &order {
            cum += self.weights[i];
            if cum >= target {
                return Ok(self.values[i]);
            }
        }
        // Rounding can leave cum a hair under target; the last positive-
        // weight value is then the quantile.
        let last = order
            .iter()
            .rev()
            .find(|&&i| self.weights[i] > F::zero())
            .expect("positive total weight implies a positive weight");
        Ok(self.values[*last])
    }

    /// Σ w_i τ_α(v_i − r), the objective the quantile minimizes. Exposed
    /// for oracle checks.
    pub fn objective(&self, alpha: F, r: F) -> F {
        self.values
            .iter()
            .zip(self.weights.iter())
            .fold(F::zero(), |acc, (v, w)| {
                acc + *w * check_loss_unchecked(alpha, *v - r)
            })
    }
}

/// Free-function form of [`WeightedSample::quantile`].
pub fn weighted_quantile<F: Real>(sample: &WeightedSample<F>, alpha: F) -> Result<F> {
    sample.quantile(alpha)
}

/// Free-function form of [`WeightedSample::objective`].
pub fn weighted_objective<F: Real>(sample: &WeightedSample<F>, alpha: F, r: F) -> F {
    sample.objective(alpha, r)
}

/// Convenience constructor used in the smoothing hot path: no allocation
/// validation round trip, caller guarantees finiteness.
pub(crate) fn quantile_of<F: Real>(values: &[F], weights: &[F], alpha: F) -> Result<F> {
    let sample = WeightedSample::new(values.to_vec(), weights.to_vec())?;
    sample.quantile(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(values: &[f64]) -> WeightedSample<f64> {
        WeightedSample::new(values.to_vec(), vec![1.0; values.len()]).unwrap()
    }

    /// Dense grid search over the objective, the independent oracle.
    fn grid_argmin(sample: &WeightedSample<f64>, alpha: f64, points: usize) -> (f64, f64) {
        let lo = sample.values().iter().cloned().fold(f64::INFINITY, f64::min) - 0.5;
        let hi = sample.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
        let mut best = (lo, sample.objective(alpha, lo));
        for i in 0..=points {
            let r = lo + (hi - lo) * i as f64 / points as f64;
            let o = sample.objective(alpha, r);
            if o < best.1 {
                best = (r, o);
            }
        }
        best
    }

    #[test]
    fn check_loss_known_values() {
        assert_eq!(check_loss(0.5, 2.0_f64).unwrap(), 1.0);
        assert_eq!(check_loss(0.25, -4.0_f64).unwrap(), 3.0);
        assert_eq!(check_loss(0.9, 0.0_f64).unwrap(), 0.0);
        assert!(check_loss(0.0, 1.0_f64).is_err());
        assert!(check_loss(1.0, 1.0_f64).is_err());
    }

    #[test]
    fn median_and_first_quartile_of_three_points() {
        let s = unit(&[1.0, 2.0, 3.0]);
        assert_eq!(s.quantile(0.5).unwrap(), 2.0);
        // Subgradient of Σ τ_{0.25}(v_i − r) is negative for r < 1 and
        // positive on (1, 2); confirmed against the grid oracle.
        assert_eq!(s.quantile(0.25).unwrap(), 1.0);
        let (_, oracle_obj) = grid_argmin(&s, 0.25, 10_000);
        assert!(s.objective(0.25, 1.0) <= oracle_obj + 1e-12);
    }

    #[test]
    fn single_atom_is_returned_for_every_level() {
        let s = WeightedSample::new(vec![5.0], vec![0.3]).unwrap();
        for alpha in [0.05, 0.3, 0.5, 0.77, 0.99] {
            assert_eq!(s.quantile(alpha).unwrap(), 5.0);
        }
    }

    #[test]
    fn objective_known_values() {
        let s = unit(&[1.0, 3.0]);
        assert_abs_diff_eq!(s.objective(0.5, 2.0), 1.0, epsilon = 1e-15);
        let one = WeightedSample::new(vec![1.0], vec![2.0]).unwrap();
        assert_abs_diff_eq!(one.objective(0.25, 0.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn all_zero_weights_are_rejected() {
        let s = WeightedSample::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(s.quantile(0.5), Err(Error::AllZeroWeights)));
    }

    #[test]
    fn mismatched_lengths_and_bad_weights_are_rejected() {
        assert!(WeightedSample::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(WeightedSample::new(vec![1.0], vec![-0.1]).is_err());
        assert!(WeightedSample::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn tie_break_returns_left_endpoint_of_flat_minimum() {
        // Even count, unit weights, α = 0.5: every point of [2, 3] is a
        // minimizer; the convention picks 2.
        let s = unit(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.quantile(0.5).unwrap(), 2.0);
    }

    #[test]
    fn quantile_beats_grid_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..200 {
            let n = rng.random_range(1..=50);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            if weights.iter().sum::<f64>() <= 0.0 {
                continue;
            }
            let alpha = [0.1, 0.25, 0.5, 0.75, 0.9][case % 5];
            let s = WeightedSample::new(values, weights).unwrap();
            let q = s.quantile(alpha).unwrap();
            let (_, oracle_obj) = grid_argmin(&s, alpha, 10_000);
            assert!(
                s.objective(alpha, q) <= oracle_obj + 1e-12,
                "case {case}: objective {} above grid minimum {}",
                s.objective(alpha, q),
                oracle_obj
            );
        }
    }

    proptest! {
        #[test]
        fn quantile_is_monotone_in_alpha(
            values in proptest::collection::vec(-100.0..100.0f64, 1..40),
            weights in proptest::collection::vec(0.01..1.0f64, 40),
            a in 0.05..0.9f64,
            d in 0.01..0.09f64,
        ) {
            let w = weights[..values.len()].to_vec();
            let s = WeightedSample::new(values, w).unwrap();
            let lo = s.quantile(a).unwrap();
            let hi = s.quantile(a + d).unwrap();
            prop_assert!(lo <= hi);
        }

        #[test]
        fn quantile_is_affine_equivariant_and_weight_scale_free(
            values in proptest::collection::vec(-100.0..100.0f64, 1..40),
            weights in proptest::collection::vec(0.01..1.0f64, 40),
            a in 0.05..0.95f64,
            scale in 0.1..10.0f64,
            shift in -50.0..50.0f64,
            wscale in 0.1..10.0f64,
        ) {
            let w = weights[..values.len()].to_vec();
            let s = WeightedSample::new(values.clone(), w.clone()).unwrap();
            let q = s.quantile(a).unwrap();

            let transformed: Vec<f64> = values.iter().map(|v| scale * v + shift).collect();
            let st = WeightedSample::new(transformed, w.clone()).unwrap();
            prop_assert!((st.quantile(a).unwrap() - (scale * q + shift)).abs() <= 1e-9);

            let ws: Vec<f64> = w.iter().map(|wi| wi * wscale).collect();
            let ss = WeightedSample::new(values, ws).unwrap();
            prop_assert_eq!(ss.quantile(a).unwrap(), q);
        }
    }
}
