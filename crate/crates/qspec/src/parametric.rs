//! The parametric quantile family under test.
//!
//! Families are linear in their parameters: m_{α,θ}(x) = θᵀ basis(x) with a
//! basis of polynomial terms over the covariates. The gradient of the
//! family with respect to θ is then exactly the basis, so the remainder in
//! the parametric-drift linearization is identically zero. Fitting per
//! quantile level is a global quantile regression, solved exactly by the
//! vertex simplex in [`crate::qreg`].

use crate::data::Dataset;
use crate::num::Real;
use crate::qreg;
use crate::{Error, Result};

/// A single polynomial basis term over named covariate axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTerm {
    /// Constant 1.
    One,
    /// x_j (0-based axis).
    Linear(usize),
    /// x_j².
    Square(usize),
    /// x_j · x_k.
    Cross(usize, usize),
}

impl BasisTerm {
    #[inline]
    pub fn eval<F: Real>(&self, x: &[F]) -> F {
        match *self {
            BasisTerm::One => F::one(),
            BasisTerm::Linear(j) => x[j],
            BasisTerm::Square(j) => x[j] * x[j],
            BasisTerm::Cross(j, k) => x[j] * x[k],
        }
    }

    fn max_axis(&self) -> Option<usize> {
        match *self {
            BasisTerm::One => None,
            BasisTerm::Linear(j) | BasisTerm::Square(j) => Some(j),
            BasisTerm::Cross(j, k) => Some(j.max(k)),
        }
    }
}

/// Parses a model formula like `"1 + x1 + x2 + x1*x2 + x1^2"`.
///
/// Axis names are `x1..xd` (1-based). The constant term must be present;
/// it is moved to the front of the basis.
pub fn parse_formula(formula: &str, dim: usize) -> Result<Vec<BasisTerm>> {
    let mut terms = Vec::new();
    for raw in formula.split('+') {
        let t = raw.trim();
        if t.is_empty() {
            return Err(Error::Config(format!("empty term in formula '{formula}'")));
        }
        let term = if t == "1" {
            BasisTerm::One
        } else if let Some((a, b)) = t.split_once('*') {
            BasisTerm::Cross(parse_axis(a, dim)?, parse_axis(b, dim)?)
        } else if let Some((a, p)) = t.split_once('^') {
            if p.trim() != "2" {
                return Err(Error::Config(format!("only power 2 is supported, got '{t}'")));
            }
            BasisTerm::Square(parse_axis(a, dim)?)
        } else {
            BasisTerm::Linear(parse_axis(t, dim)?)
        };
        if terms.contains(&term) {
            return Err(Error::Config(format!("duplicate term '{t}' in formula")));
        }
        terms.push(term);
    }
    let const_pos = terms
        .iter()
        .position(|t| *t == BasisTerm::One)
        .ok_or_else(|| Error::Config("formula must contain the constant term '1'".into()))?;
    terms.swap(0, const_pos);
    Ok(terms)
}

fn parse_axis(s: &str, dim: usize) -> Result<usize> {
    let s = s.trim();
    let idx: usize = s
        .strip_prefix('x')
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| Error::Config(format!("cannot parse covariate name '{s}'")))?;
    if idx == 0 || idx > dim {
        return Err(Error::Config(format!(
            "covariate '{s}' out of range for {dim} covariate(s)"
        )));
    }
    Ok(idx - 1)
}

/// Linear-in-parameters quantile family with a per-level parameter store.
#[derive(Debug, Clone)]
pub struct ParametricQuantileModel<F> {
    basis: Vec<BasisTerm>,
    /// Fitted parameters keyed by the exact level they were fitted at.
    fitted: Vec<(F, Vec<F>)>,
}

impl<F: Real> ParametricQuantileModel<F> {
    pub fn new(basis: Vec<BasisTerm>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Config("empty basis".into()));
        }
        if basis[0] != BasisTerm::One {
            return Err(Error::Config("first basis term must be the constant 1".into()));
        }
        Ok(ParametricQuantileModel { basis, fitted: Vec::new() })
    }

    pub fn from_formula(formula: &str, dim: usize) -> Result<Self> {
        Self::new(parse_formula(formula, dim)?)
    }

    pub fn basis(&self) -> &[BasisTerm] {
        &self.basis
    }

    pub fn num_params(&self) -> usize {
        self.basis.len()
    }

    /// Basis values at x, which is also γ_α(x): the gradient of the family
    /// in θ, exact for linear families.
    pub fn gradient_gamma(&self, x: &[F]) -> Vec<F> {
        self.basis.iter().map(|t| t.eval(x)).collect()
    }

    /// Row-major design matrix over the dataset rows.
    pub fn design_matrix(&self, data: &Dataset<F>) -> Vec<F> {
        let q = self.basis.len();
        let mut out = Vec::with_capacity(data.len() * q);
        for i in 0..data.len() {
            let x = data.row(i);
            for t in &self.basis {
                out.push(t.eval(x));
            }
        }
        out
    }

    /// Fits θ̂(α) by global quantile regression and stores it. The stored
    /// value is write-once: refitting the same level is rejected.
    pub fn fit(&mut self, data: &Dataset<F>, alpha: F) -> Result<&[F]> {
        if self.lookup(alpha).is_some() {
            return Err(Error::Config(format!(
                "level {} already fitted; the parameter store is write-once",
                alpha.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let theta = fit_parametric(data, alpha, self)?;
        self.fitted.push((alpha, theta));
        Ok(&self.fitted.last().expect("just pushed").1)
    }

    /// Inserts an externally computed fit (used by parallel drivers).
    pub fn insert_fit(&mut self, alpha: F, theta: Vec<F>) -> Result<()> {
        if self.lookup(alpha).is_some() {
            return Err(Error::Config("level already fitted".into()));
        }
        if theta.len() != self.basis.len() {
            return Err(Error::Config("parameter length does not match basis".into()));
        }
        self.fitted.push((alpha, theta));
        Ok(())
    }

    pub fn lookup(&self, alpha: F) -> Option<&[F]> {
        self.fitted
            .iter()
            .find(|(a, _)| *a == alpha)
            .map(|(_, t)| t.as_slice())
    }

    pub fn fitted_levels(&self) -> Vec<F> {
        self.fitted.iter().map(|(a, _)| *a).collect()
    }

    /// m_{α,θ̂(α)}(x); requires a prior fit at exactly this level.
    pub fn eval(&self, alpha: F, x: &[F]) -> Result<F> {
        let theta = self
            .lookup(alpha)
            .ok_or_else(|| Error::NotFitted(alpha.to_f64().unwrap_or(f64::NAN)))?;
        Ok(self.eval_with(theta, x))
    }

    /// θᵀ basis(x) for explicit parameters.
    pub fn eval_with(&self, theta: &[F], x: &[F]) -> F {
        self.basis
            .iter()
            .zip(theta.iter())
            .fold(F::zero(), |acc, (t, c)| acc + *c * t.eval(x))
    }

    /// Residuals Y_i − θᵀ basis(X_i) for explicit parameters.
    pub fn residuals_with(&self, data: &Dataset<F>, theta: &[F]) -> Vec<F> {
        (0..data.len())
            .map(|i| data.y()[i] - self.eval_with(theta, data.row(i)))
            .collect()
    }

    /// Checks that every basis axis index exists in the dataset.
    pub fn validate_against(&self, data: &Dataset<F>) -> Result<()> {
        for t in &self.basis {
            if let Some(j) = t.max_axis() {
                if j >= data.dim() {
                    return Err(Error::Config(format!(
                        "basis refers to covariate x{} but data has {} covariate(s)",
                        j + 1,
                        data.dim()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Global quantile regression fit of the family at level α.
///
/// Returns a minimizer of Σ τ_α(Y_i − θᵀ basis(X_i)); the vertex simplex
/// lands on an exact optimum, well inside the 1e-9 relative-gap contract.
pub fn fit_parametric<F: Real>(
    data: &Dataset<F>,
    alpha: F,
    model: &ParametricQuantileModel<F>,
) -> Result<Vec<F>> {
    model.validate_against(data)?;
    let q = model.num_params();
    let design = model.design_matrix(data);
    let weights = vec![F::one(); data.len()];
    qreg::weighted_quantile_regression(&design, data.y(), &weights, q, alpha).map_err(|e| match e {
        Error::DegenerateDesign => Error::RankDeficient(format!(
            "basis of {} term(s) is not of full column rank over {} observation(s)",
            q,
            data.len()
        )),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn line_data(n: usize) -> Dataset<f64> {
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.0 + 3.0 * v).collect();
        Dataset::from_rows(x, y, 1).unwrap()
    }

    #[test]
    fn exact_line_is_recovered_for_every_level() {
        let data = line_data(12);
        for alpha in [0.1, 0.5, 0.9] {
            let mut model = ParametricQuantileModel::from_formula("1 + x1", 1).unwrap();
            let theta = model.fit(&data, alpha).unwrap().to_vec();
            assert_abs_diff_eq!(theta[0], 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(theta[1], 3.0, epsilon = 1e-10);
            // Interpolating fit reproduces Y exactly.
            for i in 0..data.len() {
                assert_abs_diff_eq!(model.eval(alpha, data.row(i)).unwrap(), data.y()[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn intercept_only_fit_is_the_sample_quantile() {
        let y = vec![5.0, 1.0, 3.0, 2.0, 4.0];
        let data = Dataset::from_rows(vec![0.1, 0.2, 0.3, 0.4, 0.5], y.clone(), 1).unwrap();
        let model = ParametricQuantileModel::from_formula("1", 1).unwrap();
        for alpha in [0.2, 0.5, 0.8] {
            let theta = fit_parametric(&data, alpha, &model).unwrap();
            let s = crate::wquantile::WeightedSample::new(y.clone(), vec![1.0; 5]).unwrap();
            assert_eq!(theta[0], s.quantile(alpha).unwrap());
        }
    }

    #[test]
    fn fit_matches_vertex_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for case in 0..100 {
            let n = rng.random_range(4..=20);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let data = Dataset::from_rows(x, y, 1).unwrap();
            let model = ParametricQuantileModel::from_formula("1 + x1", 1).unwrap();
            let alpha = [0.25, 0.5, 0.75][case % 3];
            let theta = fit_parametric(&data, alpha, &model).unwrap();
            let design = model.design_matrix(&data);
            let w = vec![1.0; n];
            let got = crate::qreg::objective(&design, data.y(), &w, 2, alpha, &theta);
            let want = crate::qreg::tests::vertex_oracle(&design, data.y(), &w, 2, alpha);
            assert!(got <= want * (1.0 + 1e-9) + 1e-12, "case {case}: {got} vs {want}");
        }
    }

    #[test]
    fn eval_and_gradient_known_values() {
        let mut model = ParametricQuantileModel::from_formula("1 + x1", 1).unwrap();
        model.insert_fit(0.5, vec![2.0, 3.0]).unwrap();
        assert_eq!(model.eval(0.5, &[1.0]).unwrap(), 5.0);
        assert!(matches!(model.eval(0.25, &[1.0]), Err(Error::NotFitted(_))));

        model.insert_fit(0.25, vec![0.0, 0.0]).unwrap();
        assert_eq!(model.eval(0.25, &[7.3]).unwrap(), 0.0);

        assert_eq!(model.gradient_gamma(&[2.0]), vec![1.0, 2.0]);
        let intercept = ParametricQuantileModel::<f64>::from_formula("1", 3).unwrap();
        assert_eq!(intercept.gradient_gamma(&[0.1, 0.2, 0.3]), vec![1.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let model = ParametricQuantileModel::<f64>::from_formula("1 + x1 + x2 + x1*x2 + x1^2", 2).unwrap();
        let theta = vec![0.3, -1.2, 0.7, 2.0, -0.4];
        let x = [0.6, -0.3];
        let gamma = model.gradient_gamma(&x);
        let delta = 1e-6;
        for j in 0..theta.len() {
            let mut tp = theta.clone();
            tp[j] += delta;
            let fd = (model.eval_with(&tp, &x) - model.eval_with(&theta, &x)) / delta;
            assert_abs_diff_eq!(fd, gamma[j], epsilon = 1e-8);
        }
    }

    #[test]
    fn coverage_fraction_respects_first_order_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 1.0 + 2.0 * v + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let data = Dataset::from_rows(x, y, 1).unwrap();
        let model = ParametricQuantileModel::from_formula("1 + x1", 1).unwrap();
        let q = model.num_params() as f64;
        for alpha in [0.25, 0.5, 0.75] {
            let theta = fit_parametric(&data, alpha, &model).unwrap();
            let below = (0..n)
                .filter(|&i| data.y()[i] <= model.eval_with(&theta, data.row(i)))
                .count() as f64
                / n as f64;
            assert!(
                below >= alpha - q / n as f64 - 1e-12 && below <= alpha + q / n as f64 + 1e-12,
                "coverage {below} outside [{}, {}]",
                alpha - q / n as f64,
                alpha + q / n as f64
            );
        }
    }

    #[test]
    fn fitted_parameters_are_lipschitz_in_alpha_at_desk_scale() {
        // Location model: θ̂(α) tracks the error quantile, whose derivative
        // in α is bounded on interior levels. The ratio must not grow with
        // n; estimation noise inflates it at small n by O(n^{-1/2}/Δα).
        let mut ratios = Vec::new();
        for n in [100usize, 400, 1600] {
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|&v| 1.0 + 2.0 * v + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let data = Dataset::from_rows(x, y, 1).unwrap();
            let model = ParametricQuantileModel::from_formula("1 + x1", 1).unwrap();
            let grid: Vec<f64> = (0..5).map(|i| 0.3 + 0.1 * i as f64).collect();
            let fits: Vec<Vec<f64>> = grid
                .iter()
                .map(|&a| fit_parametric(&data, a, &model).unwrap())
                .collect();
            let mut max_ratio = 0.0_f64;
            for w in fits.windows(2) {
                let diff = w[0]
                    .iter()
                    .zip(w[1].iter())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                max_ratio = max_ratio.max(diff / 0.1);
            }
            ratios.push(max_ratio);
        }
        assert!(
            ratios.iter().all(|r| *r < 25.0),
            "Lipschitz ratios too large: {ratios:?}"
        );
        assert!(
            ratios[2] <= ratios[0] + 2.0,
            "Lipschitz ratio grew with n: {ratios:?}"
        );
    }

    #[test]
    fn formula_parsing_accepts_the_documented_grammar() {
        let terms = parse_formula("x1 + 1 + x2^2 + x1*x2", 2).unwrap();
        assert_eq!(terms[0], BasisTerm::One);
        assert!(terms.contains(&BasisTerm::Linear(0)));
        assert!(terms.contains(&BasisTerm::Square(1)));
        assert!(terms.contains(&BasisTerm::Cross(0, 1)));

        assert!(parse_formula("x1", 1).is_err()); // missing constant
        assert!(parse_formula("1 + x3", 2).is_err()); // axis out of range
        assert!(parse_formula("1 + x1^3", 1).is_err()); // unsupported power
        assert!(parse_formula("1 + 1", 1).is_err()); // duplicate
        assert!(parse_formula("1 + y1", 1).is_err()); // bad name
    }

    #[test]
    fn rank_deficiency_is_reported_with_diagnostic() {
        // One distinct x value cannot identify intercept and slope.
        let data = Dataset::from_rows(vec![0.5, 0.5, 0.5], vec![1.0, 2.0, 3.0], 1).unwrap();
        let model = ParametricQuantileModel::from_formula("1 + x1", 1).unwrap();
        assert!(matches!(
            fit_parametric(&data, 0.5, &model),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn parameter_store_is_write_once() {
        let data = line_data(5);
        let mut model = ParametricQuantileModel::from_formula("1 + x1", 1).unwrap();
        model.fit(&data, 0.5).unwrap();
        assert!(model.fit(&data, 0.5).is_err());
        assert_eq!(model.fitted_levels(), vec![0.5]);
    }
}
