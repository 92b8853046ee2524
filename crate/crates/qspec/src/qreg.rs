//! Weighted linear quantile regression.
//!
//! Minimizes Σ w_i τ_α(y_i − x_iᵀθ) exactly by walking between basic
//! solutions (exact fits through q observations). The objective is convex
//! piecewise linear, so an optimum sits at such a vertex; at each vertex
//! the 2q edge directions are tested by one-sided directional derivatives
//! and a descent edge is followed to the next sign change of a residual.
//! Exact ties in the data are treated conservatively (a kink contributes
//! its worst-case one-sided slope), which cannot report a false optimum.
//!
//! The same routine backs the global parametric fit (unit weights) and the
//! local-polynomial smoother (kernel weights); an intercept-only design is
//! routed to the weighted quantile so its left-endpoint tie convention is
//! preserved.

use crate::linalg::SmallMatrix;
use crate::num::{real, Real};
use crate::wquantile::{check_loss_unchecked, WeightedSample};
use crate::{Error, Result};

/// Solves min_θ Σ w_i τ_α(y_i − x_iᵀθ) for a row-major design with `ncols`
/// columns. Rows with zero weight are ignored.
pub fn weighted_quantile_regression<F: Real>(
    design: &[F],
    y: &[F],
    weights: &[F],
    ncols: usize,
    alpha: F,
) -> Result<Vec<F>> {
    let n = y.len();
    assert_eq!(design.len(), n * ncols);
    assert_eq!(weights.len(), n);
    if alpha <= F::zero() || alpha >= F::one() {
        return Err(Error::InvalidQuantileLevel(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    let active: Vec<usize> = (0..n).filter(|&i| weights[i] > F::zero()).collect();
    if active.is_empty() {
        return Err(Error::AllZeroWeights);
    }
    if active.len() < ncols {
        return Err(Error::DegenerateDesign);
    }

    // Intercept-only designs reduce to the weighted quantile; keeping that
    // path shared pins the tie convention and makes the p = 0 local
    // polynomial agree with the local-constant smoother bit for bit.
    if ncols == 1 {
        let c = design[active[0]];
        if c > F::zero() && active.iter().all(|&i| design[i] == c) {
            let vals: Vec<F> = active.iter().map(|&i| y[i] / c).collect();
            let ws: Vec<F> = active.iter().map(|&i| weights[i]).collect();
            let q = WeightedSample::new(vals, ws)?.quantile(alpha)?;
            return Ok(vec![q]);
        }
    }

    Simplex {
        design,
        y,
        weights,
        q: ncols,
        alpha,
        active,
    }
    .run()
}

/// Objective value Σ w_i τ_α(y_i − x_iᵀθ).
pub fn objective<F: Real>(design: &[F], y: &[F], weights: &[F], ncols: usize, alpha: F, theta: &[F]) -> F {
    let mut acc = F::zero();
    for i in 0..y.len() {
        if weights[i] == F::zero() {
            continue;
        }
        let mut fit = F::zero();
        for j in 0..ncols {
            fit += design[i * ncols + j] * theta[j];
        }
        acc += weights[i] * check_loss_unchecked(alpha, y[i] - fit);
    }
    acc
}

struct Simplex<'a, F> {
    design: &'a [F],
    y: &'a [F],
    weights: &'a [F],
    q: usize,
    alpha: F,
    active: Vec<usize>,
}

impl<F: Real> Simplex<'_, F> {
    fn row(&self, i: usize) -> &[F] {
        &self.design[i * self.q..(i + 1) * self.q]
    }

    fn run(&self) -> Result<Vec<F>> {
        let q = self.q;
        let mut basis = self.initial_basis()?;
        let mut theta = self.solve_basis(&basis).ok_or(Error::DegenerateDesign)?;

        let scale_y = self
            .active
            .iter()
            .fold(F::zero(), |a, &i| a.max(self.y[i].abs()))
            .max(F::one());
        let zero_tol = real::<F>(1e-11) * scale_y;

        let mut best_theta = theta.clone();
        let mut best_obj = self.obj(&theta);
        let max_iters = 50 * self.active.len() + 200;

        for _ in 0..max_iters {
            let residuals: Vec<F> = self
                .active
                .iter()
                .map(|&i| self.y[i] - dot(self.row(i), &theta))
                .collect();

            // Edge directions: X_B d_j = e_j for each basis position.
            let mat = self.basis_matrix(&basis);
            let mut directions: Vec<Vec<F>> = Vec::with_capacity(q);
            for j in 0..q {
                let mut e = vec![F::zero(); q];
                e[j] = F::one();
                match mat.solve(&e) {
                    Some(d) => directions.push(d),
                    None => return Err(Error::DegenerateDesign),
                }
            }

            // Most negative one-sided derivative over the 2q edges.
            let mut best_dir: Option<(usize, bool, F)> = None;
            for (j, d) in directions.iter().enumerate() {
                for &flip in &[false, true] {
                    let (deriv, scale) = self.directional_derivative(&basis, &residuals, d, flip, zero_tol);
                    let tol = real::<F>(1e-10) * scale;
                    if deriv < -tol {
                        let better = match best_dir {
                            None => true,
                            Some((_, _, cur)) => deriv < cur,
                        };
                        if better {
                            best_dir = Some((j, flip, deriv));
                        }
                    }
                }
            }

            let (j, flip, start_slope) = match best_dir {
                None => return Ok(theta), // vertex is optimal
                Some(v) => v,
            };
            let dir: Vec<F> = directions[j]
                .iter()
                .map(|&v| if flip { -v } else { v })
                .collect();

            // Ratio scan: slope gains w_i |c_i| at each residual sign change.
            let mut breaks: Vec<(F, F, usize)> = Vec::new();
            for (pos, &i) in self.active.iter().enumerate() {
                if basis.contains(&i) {
                    continue;
                }
                let c = dot(self.row(i), &dir);
                if c == F::zero() {
                    continue;
                }
                let r = residuals[pos];
                if r.abs() <= zero_tol {
                    continue; // kink at t = 0, already in the derivative
                }
                let t = r / c;
                if t > F::zero() {
                    breaks.push((t, self.weights[i] * c.abs(), i));
                }
            }
            breaks.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite breakpoints"));

            let mut slope = start_slope;
            let mut entering: Option<(F, usize)> = None;
            for &(t, gain, i) in &breaks {
                slope += gain;
                if slope >= F::zero() {
                    entering = Some((t, i));
                    break;
                }
            }
            let (step, enter) = match entering {
                Some(v) => v,
                None => match breaks.last() {
                    // Rounding left the slope negative past the last
                    // breakpoint; land on it, the true optimum is there.
                    Some(&(t, _, i)) => (t, i),
                    None => return Ok(theta),
                },
            };

            basis[j] = enter;
            for (t, d) in theta.iter_mut().zip(dir.iter()) {
                *t = *t + step * *d;
            }
            // Re-anchor on the exact interpolation to stop drift.
            if let Some(exact) = self.solve_basis(&basis) {
                theta = exact;
            }
            let o = self.obj(&theta);
            if o < best_obj {
                best_obj = o;
                best_theta = theta.clone();
            }
        }
        Ok(best_theta)
    }

    fn obj(&self, theta: &[F]) -> F {
        objective(self.design, self.y, self.weights, self.q, self.alpha, theta)
    }

    fn basis_matrix(&self, basis: &[usize]) -> SmallMatrix<F> {
        let q = self.q;
        let mut m = SmallMatrix::zeros(q);
        for (bi, &i) in basis.iter().enumerate() {
            for j in 0..q {
                m.set(bi, j, self.row(i)[j]);
            }
        }
        m
    }

    fn solve_basis(&self, basis: &[usize]) -> Option<Vec<F>> {
        let yb: Vec<F> = basis.iter().map(|&i| self.y[i]).collect();
        self.basis_matrix(basis).solve(&yb)
    }

    /// Greedy full-rank basis, preferring heavy rows for conditioning.
    fn initial_basis(&self) -> Result<Vec<usize>> {
        let q = self.q;
        let mut order = self.active.clone();
        order.sort_by(|&a, &b| {
            self.weights[b]
                .partial_cmp(&self.weights[a])
                .expect("finite weights")
                .then(a.cmp(&b))
        });
        let mut basis = Vec::with_capacity(q);
        let mut reduced: Vec<Vec<F>> = Vec::with_capacity(q);
        let mut pivots: Vec<usize> = Vec::with_capacity(q);
        for &i in &order {
            let mut v: Vec<F> = self.row(i).to_vec();
            let norm0 = v.iter().fold(F::zero(), |a, x| a.max(x.abs()));
            if norm0 == F::zero() {
                continue;
            }
            for (r, &pcol) in reduced.iter().zip(pivots.iter()) {
                let f = v[pcol];
                if f != F::zero() {
                    for (vj, rj) in v.iter_mut().zip(r.iter()) {
                        *vj = *vj - f * *rj;
                    }
                }
            }
            let (pcol, pval) = v
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite"))
                .map(|(j, v)| (j, *v))
                .expect("nonzero length row");
            if pval.abs() <= real::<F>(1e-10) * norm0.max(F::one()) {
                continue;
            }
            let inv = F::one() / pval;
            for vj in v.iter_mut() {
                *vj = *vj * inv;
            }
            reduced.push(v);
            pivots.push(pcol);
            basis.push(i);
            if basis.len() == q {
                return Ok(basis);
            }
        }
        Err(Error::DegenerateDesign)
    }

    /// One-sided derivative of the objective along `±d`, plus the weight
    /// scale used for the optimality tolerance.
    fn directional_derivative(
        &self,
        basis: &[usize],
        residuals: &[F],
        d: &[F],
        flip: bool,
        zero_tol: F,
    ) -> (F, F) {
        let one = F::one();
        let mut deriv = F::zero();
        let mut scale = F::zero();
        for (pos, &i) in self.active.iter().enumerate() {
            let mut c = dot(self.row(i), d);
            if flip {
                c = -c;
            }
            if c == F::zero() {
                continue;
            }
            let w = self.weights[i];
            scale += w * c.abs();
            let r = residuals[pos];
            let at_kink = basis.contains(&i) || r.abs() <= zero_tol;
            let g = if at_kink {
                if c > F::zero() {
                    (one - self.alpha) * c
                } else {
                    -self.alpha * c
                }
            } else if r > F::zero() {
                -self.alpha * c
            } else {
                (one - self.alpha) * c
            };
            deriv += w * g;
        }
        (deriv, scale.max(F::one()))
    }
}

#[inline]
fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b.iter()).fold(F::zero(), |acc, (x, y)| acc + *x * *y)
}
