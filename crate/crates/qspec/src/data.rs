//! Observations and their covariate support box.

use crate::num::Real;
use crate::{Error, Result};

/// n observations of (X ∈ R^d, Y ∈ R) with an axis-aligned support box.
///
/// Immutable after construction; estimators borrow it and may evaluate at
/// distinct points concurrently.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    x: Vec<F>, // row-major n × d
    y: Vec<F>,
    dim: usize,
    support_lo: Vec<F>,
    support_hi: Vec<F>,
}

impl<F: Real> Dataset<F> {
    /// Builds a dataset with an explicit support box. Every row must lie
    /// inside the box and every entry must be finite.
    pub fn new(x: Vec<F>, y: Vec<F>, dim: usize, support_lo: Vec<F>, support_hi: Vec<F>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Data("covariate dimension must be positive".into()));
        }
        let n = y.len();
        if n == 0 {
            return Err(Error::Data("empty data".into()));
        }
        if x.len() != n * dim {
            return Err(Error::Data(format!(
                "covariate matrix has {} entries, expected {} × {}",
                x.len(),
                n,
                dim
            )));
        }
        if support_lo.len() != dim || support_hi.len() != dim {
            return Err(Error::Data("support box dimension mismatch".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite entry in data".into()));
        }
        for (j, (lo, hi)) in support_lo.iter().zip(support_hi.iter()).enumerate() {
            if !(lo <= hi) {
                return Err(Error::Data(format!("support box is empty on axis {j}")));
            }
        }
        for i in 0..n {
            for j in 0..dim {
                let v = x[i * dim + j];
                if v < support_lo[j] || v > support_hi[j] {
                    return Err(Error::Data(format!(
                        "row {} column {} = {} lies outside the support box",
                        i + 1,
                        j + 1,
                        v.to_f64().unwrap_or(f64::NAN)
                    )));
                }
            }
        }
        Ok(Dataset { x, y, dim, support_lo, support_hi })
    }

    /// Builds a dataset whose support box is the per-axis data range.
    pub fn from_rows(x: Vec<F>, y: Vec<F>, dim: usize) -> Result<Self> {
        if dim == 0 || y.is_empty() || x.len() != y.len() * dim {
            return Err(Error::Data("inconsistent data shape".into()));
        }
        let n = y.len();
        let mut lo = vec![F::infinity(); dim];
        let mut hi = vec![F::neg_infinity(); dim];
        for i in 0..n {
            for j in 0..dim {
                let v = x[i * dim + j];
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        Dataset::new(x, y, dim, lo, hi)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self) -> &[F] {
        &self.y
    }

    pub fn support_lo(&self) -> &[F] {
        &self.support_lo
    }

    pub fn support_hi(&self) -> &[F] {
        &self.support_hi
    }

    /// Rescales each covariate axis by a positive factor, scaling the
    /// support box along. Used for interquartile-range standardization.
    pub fn scale_axes(&self, factors: &[F]) -> Result<Self> {
        if factors.len() != self.dim {
            return Err(Error::Data("axis scale dimension mismatch".into()));
        }
        if factors.iter().any(|f| !(*f > F::zero()) || !f.is_finite()) {
            return Err(Error::Data("axis scales must be positive and finite".into()));
        }
        let mut x = self.x.clone();
        for i in 0..self.len() {
            for j in 0..self.dim {
                x[i * self.dim + j] = x[i * self.dim + j] * factors[j];
            }
        }
        let lo = self.support_lo.iter().zip(factors).map(|(v, f)| *v * *f).collect();
        let hi = self.support_hi.iter().zip(factors).map(|(v, f)| *v * *f).collect();
        Dataset::new(x, self.y.clone(), self.dim, lo, hi)
    }

    /// Per-axis interquartile range of the covariates (unit-weight sample
    /// quantiles at 0.25 and 0.75).
    pub fn covariate_iqr(&self) -> Result<Vec<F>> {
        let quarter = crate::num::real::<F>(0.25);
        let three_q = crate::num::real::<F>(0.75);
        let mut out = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let col: Vec<F> = (0..self.len()).map(|i| self.row(i)[j]).collect();
            let s = crate::wquantile::WeightedSample::new(col, vec![F::one(); self.len()])?;
            out.push(s.quantile(three_q)? - s.quantile(quarter)?);
        }
        Ok(out)
    }
}
