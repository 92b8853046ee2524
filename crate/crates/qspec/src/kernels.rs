//! Kernels for the quantile smoothers: one-dimensional families on [-1, 1],
//! their d-dimensional products, convolution products at zero, and the
//! equivalent kernel induced by a local-polynomial fit.
//!
//! All families are polynomials with compact support, so every moment and
//! convolution integral below is computed exactly (up to rounding) by
//! fixed-order Gauss–Legendre panels split at the integrands' breakpoints.
//! The j-fold convolution value `K^(j)(0)` enters the test statistic's
//! asymptotic bias (j = 2) and variance (j = 4).

use crate::linalg::SmallMatrix;
use crate::num::{real, Real};
use crate::quad::GaussLegendre;
use crate::{Error, Result};

/// One-dimensional kernel density on [-1, 1].
///
/// Every family is symmetric, nondecreasing on [-1, 0] and integrates to
/// one; those are the conditions the smoothing theory needs, and they are
/// properties of the closed forms rather than runtime checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel1D {
    Epanechnikov,
    Biweight,
    Triweight,
}

impl Kernel1D {
    /// Evaluates k(u); zero outside [-1, 1].
    #[inline]
    pub fn eval<F: Real>(&self, u: F) -> F {
        let a = u.abs();
        if a >= F::one() {
            return F::zero();
        }
        let one = F::one();
        let t = one - u * u;
        match self {
            Kernel1D::Epanechnikov => real::<F>(0.75) * t,
            Kernel1D::Biweight => real::<F>(15.0 / 16.0) * t * t,
            Kernel1D::Triweight => real::<F>(35.0 / 32.0) * t * t * t,
        }
    }

    /// The raw moment ∫ u^r k(u) du, exact for the polynomial menu.
    pub fn moment<F: Real>(&self, r: usize) -> F {
        let gl = GaussLegendre::<F>::new(64);
        gl.integrate(-F::one(), F::one(), |u| u.powi(r as i32) * self.eval(u))
    }

    /// The j-times self-convolution of k evaluated at zero, j ∈ {2, 4}.
    ///
    /// `k^(2)(0) = ∫ k(u)² du` and `k^(4)(0) = ∫ (k⋆k)(t)² dt`.
    pub fn conv_at_zero<F: Real>(&self, j: usize) -> Result<F> {
        let gl = GaussLegendre::<F>::new(64);
        match j {
            2 => Ok(gl.integrate(-F::one(), F::one(), |u| {
                let v = self.eval(u);
                v * v
            })),
            4 => {
                // (k⋆k) is piecewise polynomial with a breakpoint at t = 0,
                // where the overlap bounds switch branch.
                let two = real::<F>(2.0);
                let selfconv = |t: F| {
                    let lo = (-F::one()).max(t - F::one());
                    let hi = F::one().min(t + F::one());
                    if hi <= lo {
                        return F::zero();
                    }
                    gl.integrate(lo, hi, |u| self.eval(u) * self.eval(t - u))
                };
                let left = gl.integrate(-two, F::zero(), |t| {
                    let c = selfconv(t);
                    c * c
                });
                let right = gl.integrate(F::zero(), two, |t| {
                    let c = selfconv(t);
                    c * c
                });
                Ok(left + right)
            }
            other => Err(Error::UnsupportedConvOrder(other)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel1D::Epanechnikov => "epanechnikov",
            Kernel1D::Biweight => "biweight",
            Kernel1D::Triweight => "triweight",
        }
    }
}

impl std::str::FromStr for Kernel1D {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" => Ok(Kernel1D::Epanechnikov),
            "biweight" => Ok(Kernel1D::Biweight),
            "triweight" => Ok(Kernel1D::Triweight),
            other => Err(Error::Config(format!(
                "unknown kernel '{other}'; expected epanechnikov | biweight | triweight"
            ))),
        }
    }
}

/// Product kernel K(u) = ∏_j k(u_j) on [-1, 1]^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductKernel {
    pub base: Kernel1D,
    pub dim: usize,
}

impl ProductKernel {
    pub fn new(base: Kernel1D, dim: usize) -> Self {
        ProductKernel { base, dim }
    }

    /// Evaluates K at a point of length `dim`; zero outside the unit box.
    #[inline]
    pub fn eval<F: Real>(&self, u: &[F]) -> F {
        debug_assert_eq!(u.len(), self.dim);
        let mut acc = F::one();
        for &uj in u {
            let v = self.base.eval(uj);
            if v == F::zero() {
                return F::zero();
            }
            acc = acc * v;
        }
        acc
    }

    /// K^(j)(0) = (k^(j)(0))^d by the product structure; d = 0 gives 1.
    pub fn conv_at_zero<F: Real>(&self, j: usize) -> Result<F> {
        let base: F = self.base.conv_at_zero(j)?;
        Ok(base.powi(self.dim as i32))
    }
}

/// Multi-index ν over d axes; |ν| is the total degree.
pub type MultiIndex = Vec<usize>;

/// Lists {ν : |ν| ≤ p} over `dim` axes, ordered by total degree then
/// lexicographically. The listing fixes the coordinate order of the local
/// polynomial coefficient vector.
pub fn multi_indices(dim: usize, p: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=p {
        let mut current = vec![0usize; dim];
        fill(&mut out, &mut current, 0, deg);
    }
    return out;

    fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<usize>, axis: usize, remaining: usize) {
        if axis + 1 == current.len() {
            current[axis] = remaining;
            out.push(current.clone());
            return;
        }
        for v in (0..=remaining).rev() {
            current[axis] = v;
            fill(out, current, axis + 1, remaining - v);
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
}

fn index_factorial(nu: &[usize]) -> f64 {
    nu.iter().map(|&n| factorial(n)).product()
}

/// π_ν(u) = u^ν / ν!.
fn poly_basis<F: Real>(nu: &[usize], u: &[F]) -> F {
    let mut acc = real::<F>(1.0 / index_factorial(nu));
    for (j, &e) in nu.iter().enumerate() {
        if e > 0 {
            acc = acc * u[j].powi(e as i32);
        }
    }
    acc
}

/// Equivalent kernel of a degree-p local polynomial fit, targeting the
/// coefficient with multi-index ν†:
///
/// `L(u) = e_ν†ᵀ M⁻¹ π(u) K(u)` with `M = ∫ π(v) π(v)ᵀ K(v) dv`.
///
/// For p = 0 the moment matrix is the scalar ∫K = 1 and L collapses to K;
/// that case is short-circuited so it shares the product kernel's exact
/// code path.
#[derive(Debug, Clone)]
pub struct EquivalentKernel<F> {
    pub base: Kernel1D,
    pub dim: usize,
    pub degree: usize,
    pub target: MultiIndex,
    /// Multi-index listing shared by the coefficient row.
    pub indices: Vec<MultiIndex>,
    /// Row e_ν†ᵀ M⁻¹ in the listing order.
    coeff: Vec<F>,
    conv2: F,
    conv4: F,
}

impl<F: Real> EquivalentKernel<F> {
    /// Builds L and its convolution constants.
    ///
    /// Fails with [`Error::SingularMoments`] when the moment matrix is not
    /// positive definite and with [`Error::Config`] when |ν†| > p.
    pub fn build(base: Kernel1D, dim: usize, p: usize, target: MultiIndex) -> Result<Self> {
        if target.len() != dim {
            return Err(Error::Config(format!(
                "target multi-index has {} axes, kernel has {dim}",
                target.len()
            )));
        }
        let total: usize = target.iter().sum();
        if total > p {
            return Err(Error::Config(format!(
                "target multi-index degree {total} exceeds polynomial degree {p}"
            )));
        }
        let indices = multi_indices(dim, p);
        let pk = ProductKernel::new(base, dim);

        if p == 0 {
            // M = ∫K = 1 analytically; L ≡ K bit for bit.
            return Ok(EquivalentKernel {
                base,
                dim,
                degree: 0,
                target,
                indices,
                coeff: vec![F::one()],
                conv2: pk.conv_at_zero(2)?,
                conv4: pk.conv_at_zero(4)?,
            });
        }

        // M factorizes over axes into 1-d kernel moments.
        let rp = indices.len();
        let max_deg = 2 * p;
        let moments: Vec<F> = (0..=max_deg).map(|r| base.moment(r)).collect();
        let mut m = SmallMatrix::<F>::zeros(rp);
        for a in 0..rp {
            for b in 0..rp {
                let mut v = F::one();
                for j in 0..dim {
                    v = v * moments[indices[a][j] + indices[b][j]];
                }
                let scale = real::<F>(1.0 / (index_factorial(&indices[a]) * index_factorial(&indices[b])));
                m.set(a, b, v * scale);
            }
        }
        if !m.is_spd() {
            return Err(Error::SingularMoments(format!(
                "moment matrix of size {rp} is not positive definite (kernel {}, d={dim}, p={p})",
                base.name()
            )));
        }
        let mut e = vec![F::zero(); rp];
        let pos = indices
            .iter()
            .position(|nu| nu == &target)
            .expect("target is in the listing by construction");
        e[pos] = F::one();
        let coeff = m
            .solve(&e)
            .ok_or_else(|| Error::SingularMoments("moment matrix solve failed".into()))?;

        let mut ek = EquivalentKernel {
            base,
            dim,
            degree: p,
            target,
            indices,
            coeff,
            conv2: F::zero(),
            conv4: F::zero(),
        };
        ek.conv2 = ek.compute_conv2();
        ek.conv4 = ek.compute_conv4();
        Ok(ek)
    }

    /// Evaluates L at a point of length `dim`; zero outside the unit box.
    pub fn eval(&self, u: &[F]) -> F {
        debug_assert_eq!(u.len(), self.dim);
        let k = ProductKernel::new(self.base, self.dim).eval(u);
        if k == F::zero() {
            return F::zero();
        }
        if self.degree == 0 {
            return k;
        }
        let mut s = F::zero();
        for (c, nu) in self.coeff.iter().zip(self.indices.iter()) {
            s += *c * poly_basis(nu, u);
        }
        s * k
    }

    /// L^(2)(0) = ∫ L(u)² du.
    pub fn conv2_at_zero(&self) -> F {
        self.conv2
    }

    /// L^(4)(0), the 4-fold convolution of L at zero.
    pub fn conv4_at_zero(&self) -> F {
        self.conv4
    }

    fn compute_conv2(&self) -> F {
        let gl = GaussLegendre::<F>::new(64);
        let lo = vec![-F::one(); self.dim];
        let hi = vec![F::one(); self.dim];
        gl.integrate_box(&lo, &hi, |u| {
            let v = self.eval(u);
            v * v
        })
    }

    /// 4-fold convolution at 0 as ∫ (L⋆L)(t) (L⋆L)(-t) dt, with the outer
    /// box split at the per-axis breakpoints of the overlap bounds.
    fn compute_conv4(&self) -> F {
        let (outer_n, inner_n) = match self.dim {
            1 => (64, 64),
            2 => (32, 24),
            _ => (16, 12),
        };
        let outer = GaussLegendre::<F>::new(outer_n);
        let inner = GaussLegendre::<F>::new(inner_n);
        let d = self.dim;
        let selfconv = |t: &[F]| -> F {
            let mut lo = vec![F::zero(); d];
            let mut hi = vec![F::zero(); d];
            for j in 0..d {
                lo[j] = (-F::one()).max(t[j] - F::one());
                hi[j] = F::one().min(t[j] + F::one());
                if hi[j] <= lo[j] {
                    return F::zero();
                }
            }
            let mut shifted = vec![F::zero(); d];
            inner.integrate_box(&lo, &hi, |u| {
                for j in 0..d {
                    shifted[j] = t[j] - u[j];
                }
                self.eval(u) * self.eval(&shifted)
            })
        };
        let two = real::<F>(2.0);
        let mut acc = F::zero();
        let mut neg_t = vec![F::zero(); d];
        for orthant in 0..(1usize << d) {
            let mut lo = vec![F::zero(); d];
            let mut hi = vec![F::zero(); d];
            for j in 0..d {
                if orthant & (1 << j) == 0 {
                    lo[j] = -two;
                    hi[j] = F::zero();
                } else {
                    lo[j] = F::zero();
                    hi[j] = two;
                }
            }
            acc += outer.integrate_box(&lo, &hi, |t| {
                for j in 0..d {
                    neg_t[j] = -t[j];
                }
                selfconv(t) * selfconv(&neg_t)
            });
        }
        acc
    }
}
