//! Lack-of-fit tests for parametric conditional quantile models.
//!
//! The library compares a parametric quantile fit against a kernel quantile
//! smoother of its residuals. A weighted L2 distance of the smoothed residual
//! field serves as the test statistic; critical values come either from the
//! plug-in normal approximation or from a quantile wild bootstrap that
//! resamples the linearized residual field. A local-polynomial variant tests
//! derivatives of the quantile function. The `simulate` module provides
//! seeded Monte Carlo drivers for size, power and linearization diagnostics.
//!
//! Numeric routines are generic over the scalar type through [`num::Real`];
//! the `f64` instantiations used by the CLI are re-exported at the crate
//! root.

pub mod bootstrap;
pub mod config;
pub mod data;
pub mod kernels;
mod linalg;
pub mod num;
pub mod parametric;
pub mod qreg;
pub mod quad;
pub mod simulate;
pub mod smoother;
pub mod teststat;
pub mod wquantile;

use thiserror::Error;

/// Errors reported by the estimation and testing routines.
///
/// The exit-code mapping used by the CLI distinguishes configuration/usage
/// problems, data problems and numeric failures; see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// No observation had positive kernel weight at the evaluation point.
    #[error("empty kernel window at x = {x:?}; enlarge the bandwidth")]
    EmptyWindow { x: Vec<f64> },
    /// Too many grid points had empty windows.
    #[error("sparse design: {skipped} of {total} grid points had empty kernel windows")]
    SparseDesign { skipped: usize, total: usize },
    /// The local design matrix is rank deficient.
    #[error("degenerate design: local design matrix is rank deficient")]
    DegenerateDesign,
    /// The kernel moment matrix is numerically singular.
    #[error("singular kernel moment matrix: {0}")]
    SingularMoments(String),
    /// Convolution order other than 2 or 4.
    #[error("unsupported convolution order {0}; only 2 and 4 are defined")]
    UnsupportedConvOrder(usize),
    /// Quantile level outside (0, 1).
    #[error("quantile level {0} outside the open interval (0, 1)")]
    InvalidQuantileLevel(f64),
    /// Weighted quantile of a sample without positive weight.
    #[error("weighted quantile requires at least one strictly positive weight")]
    AllZeroWeights,
    /// Model evaluation at a level that has not been fitted.
    #[error("no fitted parameters stored for quantile level {0}")]
    NotFitted(f64),
    /// Global design matrix rank deficiency in the parametric fit.
    #[error("parametric design matrix is rank deficient: {0}")]
    RankDeficient(String),
    /// Plug-in variance came out nonpositive.
    #[error("plug-in variance is not positive ({0}); cannot standardize")]
    NonPositiveVariance(f64),
    /// Invalid configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Invalid or unreadable data.
    #[error("data error: {0}")]
    Data(String),
    /// Monte Carlo driver aborted.
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub use data::Dataset;
pub use kernels::{EquivalentKernel, Kernel1D, ProductKernel};
pub use parametric::ParametricQuantileModel;



