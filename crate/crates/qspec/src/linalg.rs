//! Dense solvers for the small systems that show up in the estimators:
//! kernel moment matrices and local design bases, both of dimension
//! `r_p` (a handful at most). Row-major storage, no blocking.

use crate::num::Real;

/// Square matrix in row-major order.
#[derive(Debug, Clone)]
pub struct SmallMatrix<F> {
    pub n: usize,
    pub a: Vec<F>,
}

impl<F: Real> SmallMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        SmallMatrix { n, a: vec![F::zero(); n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.a[i * self.n + j] = v;
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    ///
    /// Returns `None` when a pivot falls below `n * eps * max|A|`.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut m = self.a.clone();
        let mut x: Vec<F> = b.to_vec();
        let scale = self
            .a
            .iter()
            .fold(F::zero(), |acc, v| acc.max(v.abs()))
            .max(F::one());
        let tiny = F::epsilon() * scale * crate::num::real::<F>(n as f64);
        for col in 0..n {
            let mut piv = col;
            for row in col + 1..n {
                if m[row * n + col].abs() > m[piv * n + col].abs() {
                    piv = row;
                }
            }
            if m[piv * n + col].abs() <= tiny {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    m.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = m[col * n + col];
            for row in col + 1..n {
                let f = m[row * n + col] / d;
                if f != F::zero() {
                    for j in col..n {
                        let v = m[col * n + j] * f;
                        m[row * n + j] = m[row * n + j] - v;
                    }
                    x[row] = x[row] - x[col] * f;
                }
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in col + 1..n {
                s = s - m[col * n + j] * x[j];
            }
            x[col] = s / m[col * n + col];
        }
        Some(x)
    }

    /// Cholesky factorization check for symmetric positive definiteness.
    ///
    /// Succeeds iff every pivot stays above `n * eps * max diag`, which is
    /// the numerical version of "smallest eigenvalue > 0".
    pub fn is_spd(&self) -> bool {
        let n = self.n;
        let mut l = vec![F::zero(); n * n];
        let mut maxdiag = F::zero();
        for i in 0..n {
            maxdiag = maxdiag.max(self.get(i, i).abs());
        }
        let tiny = F::epsilon() * maxdiag.max(F::one()) * crate::num::real::<F>(n as f64);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= tiny {
                        return false;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn solve_recovers_known_solution() {
        let mut a = SmallMatrix::<f64>::zeros(3);
        let rows = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                a.set(i, j, *v);
            }
        }
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a.get(i, j) * x_true[j]).sum())
            .collect();
        let x = a.solve(&b).unwrap();
        for (xi, ti) in x.iter().zip(x_true.iter()) {
            assert_abs_diff_eq!(xi, ti, epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_rejects_singular_matrix() {
        let mut a = SmallMatrix::<f64>::zeros(2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 4.0);
        assert!(a.solve(&[1.0, 2.0]).is_none());
    }

    #[test]
    fn spd_check_separates_definite_from_indefinite() {
        let mut spd = SmallMatrix::<f64>::zeros(2);
        spd.set(0, 0, 2.0);
        spd.set(0, 1, 1.0);
        spd.set(1, 0, 1.0);
        spd.set(1, 1, 2.0);
        assert!(spd.is_spd());

        let mut indef = SmallMatrix::<f64>::zeros(2);
        indef.set(0, 0, 1.0);
        indef.set(0, 1, 3.0);
        indef.set(1, 0, 3.0);
        indef.set(1, 1, 1.0);
        assert!(!indef.is_spd());
    }
}
