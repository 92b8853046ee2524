//! Scalar abstraction for the numeric core.
//!
//! Everything below the report/CLI layer is generic over [`Real`], so the
//! estimators can run in `f32` or `f64`. The blanket impl covers any float
//! with the few extra bounds the algorithms need.

use num_traits::Float;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

/// Scalar type of the numeric core.
pub trait Real: Float + AddAssign + Sum + Debug + Display + Send + Sync + 'static {}

impl<T> Real for T where T: Float + AddAssign + Sum + Debug + Display + Send + Sync + 'static {}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the target type cannot represent finite `f64` values at
/// all, which none of the supported scalars trigger.
#[inline]
pub fn real<F: Real>(x: f64) -> F {
    F::from(x).expect("constant not representable in scalar type")
}

/// Sums a slice pairwise in index order.
///
/// The reduction tree depends only on the slice length, so parallel
/// producers that fill the slice by index get a deterministic total
/// independent of scheduling, and the error growth is O(log n).
pub fn pairwise_sum<F: Real>(v: &[F]) -> F {
    match v.len() {
        0 => F::zero(),
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_sequential_on_small_inputs() {
        let v: Vec<f64> = (1..=17).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 153.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
        assert_eq!(pairwise_sum(&[4.25]), 4.25);
    }

    #[test]
    fn real_conversion_round_trips_for_f32_and_f64() {
        let x: f32 = real(0.5);
        assert_eq!(x, 0.5f32);
        let y: f64 = real(0.3);
        assert_eq!(y, 0.3f64);
    }
}
