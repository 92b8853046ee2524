//! Gauss–Legendre quadrature on intervals and tensor boxes.
//!
//! The kernel menu is polynomial with compact support, so fixed-order rules
//! integrate every moment and convolution integral in this crate exactly up
//! to rounding, provided panels are split at the integrands' breakpoints.
//! `GaussLegendre::new(64)` is exact through polynomial degree 127.

use crate::num::{real, Real};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<F> {
    pub nodes: Vec<F>,
    pub weights: Vec<F>,
}

impl<F: Real> GaussLegendre<F> {
    /// Builds the rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![F::zero(); n];
        let mut weights = vec![F::zero(); n];
        let nf = real::<F>(n as f64);
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th positive root.
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
            let mut x: F = real(theta.cos());
            let mut dp = F::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= F::epsilon() * (F::one() + x.abs()) {
                    break;
                }
            }
            let w = real::<F>(2.0) / ((F::one() - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // Center node of an odd rule sits exactly at zero.
            nodes[n / 2] = F::zero();
            let (_, d) = legendre_with_deriv(n, F::zero());
            weights[n / 2] = real::<F>(2.0) / (d * d);
        }
        let _ = nf;
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<G: FnMut(F) -> F>(&self, a: F, b: F, mut f: G) -> F {
        let half = (b - a) / real(2.0);
        let mid = (a + b) / real(2.0);
        let mut acc = F::zero();
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += *w * f(mid + half * *x);
        }
        acc * half
    }

    /// Integrates `f` over `[a, b]` split into equal panels.
    pub fn integrate_panels<G: FnMut(F) -> F>(&self, a: F, b: F, panels: usize, mut f: G) -> F {
        let step = (b - a) / real(panels as f64);
        let mut acc = F::zero();
        for p in 0..panels {
            let lo = a + step * real(p as f64);
            acc += self.integrate(lo, lo + step, &mut f);
        }
        acc
    }

    /// Integrates `f` over the tensor box `∏ [lo_j, hi_j]`.
    pub fn integrate_box<G: FnMut(&[F]) -> F>(&self, lo: &[F], hi: &[F], mut f: G) -> F {
        let d = lo.len();
        assert_eq!(hi.len(), d);
        if d == 0 {
            return f(&[]);
        }
        let n = self.nodes.len();
        let mut point = vec![F::zero(); d];
        let mut halves = vec![F::zero(); d];
        let mut mids = vec![F::zero(); d];
        for j in 0..d {
            halves[j] = (hi[j] - lo[j]) / real(2.0);
            mids[j] = (hi[j] + lo[j]) / real(2.0);
        }
        let vol_scale = halves.iter().fold(F::one(), |acc, h| acc * *h);
        let mut acc = F::zero();
        let total = n.pow(d as u32);
        for flat in 0..total {
            let mut rem = flat;
            let mut wprod = F::one();
            for j in 0..d {
                let idx = rem % n;
                rem /= n;
                point[j] = mids[j] + halves[j] * self.nodes[idx];
                wprod = wprod * self.weights[idx];
            }
            acc += wprod * f(&point);
        }
        acc * vol_scale
    }
}

fn legendre_with_deriv<F: Real>(n: usize, x: F) -> (F, F) {
    let mut p0 = F::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, F::zero());
    }
    for k in 2..=n {
        let kf = real::<F>(k as f64);
        let p2 = ((real::<F>(2.0) * kf - F::one()) * x * p1 - (kf - F::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = real::<F>(n as f64) * (x * p1 - p0) / (x * x - F::one());
    (p1, d)
}

/// Midpoint-rule tensor grid over a box: per-axis midpoints and the common
/// cell volume. Used for the statistic's integration grid, where evaluation
/// points must avoid the box boundary.
#[derive(Debug, Clone)]
pub struct MidpointGrid<F> {
    pub axes: Vec<Vec<F>>,
    pub cell_volume: F,
}

impl<F: Real> MidpointGrid<F> {
    pub fn new(lo: &[F], hi: &[F], points_per_axis: usize) -> Self {
        assert!(points_per_axis >= 1);
        let mut axes = Vec::with_capacity(lo.len());
        let mut vol = F::one();
        let m = real::<F>(points_per_axis as f64);
        for (a, b) in lo.iter().zip(hi.iter()) {
            let step = (*b - *a) / m;
            vol = vol * step;
            let axis = (0..points_per_axis)
                .map(|i| *a + step * (real::<F>(i as f64) + real::<F>(0.5)))
                .collect();
            axes.push(axis);
        }
        MidpointGrid { axes, cell_volume: vol }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The grid point with flat index `flat`, first axis fastest.
    pub fn point(&self, mut flat: usize) -> Vec<F> {
        let mut x = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            x.push(axis[flat % axis.len()]);
            flat /= axis.len();
        }
        x
    }
}
