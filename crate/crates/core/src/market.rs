//! Gaussian market models: EMA operator matrices, return covariance
//! matrices for the stochastic-trend and autoregressive-trend models, and
//! the stationary variogram of returns.
//!
//! Returns are zero-mean Gaussian with unit short-time variance; trends
//! enter only through auto-correlations. The two models share the
//! parameters `lambda` (per-step trend decay) and `beta0` (asymptotic
//! excess volatility): the stationary variance of returns approaches
//! `1 + beta0^2` in both.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Which auto-correlation mechanism generates trends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketModel {
    /// Trends driven by an exogenous discrete Ornstein-Uhlenbeck process.
    StochasticTrend,
    /// Trends fed back from past returns with exponential weights.
    AutoregressiveTrend,
}

impl MarketModel {
    pub fn name(&self) -> &'static str {
        match self {
            MarketModel::StochasticTrend => "stochastic",
            MarketModel::AutoregressiveTrend => "autoregressive",
        }
    }
}

/// Market model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketSpec {
    pub kind: MarketModel,
    /// Per-step trend decay, in (0, 1]. The trend memory is ~1/lambda steps.
    pub lambda: f64,
    /// Asymptotic excess-volatility parameter, >= 0. The stationary
    /// variance of returns is 1 + beta0^2.
    pub beta0: f64,
}

impl MarketSpec {
    pub fn new(kind: MarketModel, lambda: f64, beta0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("{lambda} is outside (0, 1]"),
            });
        }
        if !(beta0 >= 0.0) || !beta0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta0",
                reason: format!("{beta0} is negative or not finite"),
            });
        }
        let spec = Self { kind, lambda, beta0 };
        if kind == MarketModel::AutoregressiveTrend && spec.effective_decay() >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "beta0",
                reason: format!(
                    "autoregressive model is non-stationary: 1 - lambda + beta = {} >= 1",
                    spec.effective_decay()
                ),
            });
        }
        Ok(spec)
    }

    pub fn stochastic(lambda: f64, beta0: f64) -> Result<Self> {
        Self::new(MarketModel::StochasticTrend, lambda, beta0)
    }

    pub fn autoregressive(lambda: f64, beta0: f64) -> Result<Self> {
        Self::new(MarketModel::AutoregressiveTrend, lambda, beta0)
    }

    /// Trend strength rescaled so that the stationary excess variance is
    /// `beta0^2` independently of the timescale: `beta = beta0 sqrt(lambda (2 - lambda))`.
    pub fn beta(&self) -> f64 {
        self.beta0 * (self.lambda * (2.0 - self.lambda)).sqrt()
    }

    /// Stationary variance of returns, `1 + beta0^2`.
    pub fn stationary_variance(&self) -> f64 {
        1.0 + self.beta0 * self.beta0
    }

    /// Effective decay `1 - lambda + beta` of the autoregressive model.
    pub fn effective_decay(&self) -> f64 {
        1.0 - self.lambda + self.beta()
    }

    /// Return covariance matrix of the first `size` steps.
    pub fn covariance(&self, size: usize) -> Result<CovarianceMatrix> {
        match self.kind {
            MarketModel::StochasticTrend => covariance_stochastic(self, size),
            MarketModel::AutoregressiveTrend => covariance_autoregressive(self, size),
        }
    }
}

/// Lower-strictly-triangular EMA operator: entry `(j, k) = q^(j-k-1)` for
/// `j > k`, zero elsewhere. Applying it to a series produces, at each step,
/// the geometrically weighted sum of strictly earlier entries.
#[derive(Debug, Clone)]
pub struct EmaMatrix {
    q: f64,
    matrix: DMatrix<f64>,
}

impl EmaMatrix {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Builds the EMA operator matrix of decay `q` in [0, 1) and size `size`.
pub fn ema_matrix(q: f64, size: usize) -> Result<EmaMatrix> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("{q} is outside [0, 1)"),
        });
    }
    if size < 1 {
        return Err(Error::InvalidParameter {
            name: "size",
            reason: "matrix size must be at least 1".into(),
        });
    }
    let powers = geometric_powers(q, size);
    let matrix = DMatrix::from_fn(size, size, |j, k| if j > k { powers[j - k - 1] } else { 0.0 });
    Ok(EmaMatrix { q, matrix })
}

/// `[1, q, q^2, ..., q^(n-1)]`
pub(crate) fn geometric_powers(q: f64, n: usize) -> Vec<f64> {
    let mut powers = Vec::with_capacity(n);
    let mut acc = 1.0;
    for _ in 0..n {
        powers.push(acc);
        acc *= q;
    }
    powers
}

/// Symmetric positive-definite return covariance `C[j][k] = <r_j r_k>`.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
    identity: bool,
}

impl CovarianceMatrix {
    /// Identity covariance (independent unit-variance returns).
    pub fn identity(size: usize) -> Self {
        Self {
            matrix: DMatrix::identity(size, size),
            identity: true,
        }
    }

    /// Wraps an explicit symmetric positive-definite matrix.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::SizeMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let identity = matrix == DMatrix::identity(matrix.nrows(), matrix.ncols());
        Ok(Self { matrix, identity })
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// True when the matrix is exactly the identity (beta0 = 0), letting
    /// downstream code skip the Cholesky factorization.
    pub fn is_identity(&self) -> bool {
        self.identity
    }
}

/// Covariance of the stochastic-trend model, evaluated from the closed
/// elementwise form
/// `C[j][k] = delta(j,k) + beta0^2 [(1-lambda)^|j-k| - (1-lambda)^(j+k-2)]`
/// (1-based indices). The prefactor `beta^2 / (lambda (2-lambda))` has
/// already been substituted by `beta0^2`, which stays finite for all
/// lambda in (0, 1].
pub fn covariance_stochastic(spec: &MarketSpec, size: usize) -> Result<CovarianceMatrix> {
    if spec.kind != MarketModel::StochasticTrend {
        return Err(Error::ModelUnsupported {
            model: spec.kind.name(),
            hint: "covariance_stochastic requires the stochastic-trend model",
        });
    }
    if size < 1 {
        return Err(Error::InvalidParameter {
            name: "size",
            reason: "matrix size must be at least 1".into(),
        });
    }
    let b2 = spec.beta0 * spec.beta0;
    if b2 == 0.0 {
        return Ok(CovarianceMatrix::identity(size));
    }
    let q = 1.0 - spec.lambda;
    // powers[m] = q^m for m up to 2(size-1)
    let powers = geometric_powers(q, 2 * size - 1);
    let mut matrix = DMatrix::zeros(size, size);
    for j in 0..size {
        for k in 0..=j {
            let excess = b2 * (powers[j - k] - powers[j + k]);
            let value = if j == k { 1.0 + excess } else { excess };
            matrix[(j, k)] = value;
            matrix[(k, j)] = value;
        }
    }
    Ok(CovarianceMatrix {
        matrix,
        identity: false,
    })
}

/// Covariance of the autoregressive-trend model,
/// `C = (I + beta E) (I + beta E)^T` with the EMA decay `1 - lambda + beta`.
pub fn covariance_autoregressive(spec: &MarketSpec, size: usize) -> Result<CovarianceMatrix> {
    if spec.kind != MarketModel::AutoregressiveTrend {
        return Err(Error::ModelUnsupported {
            model: spec.kind.name(),
            hint: "covariance_autoregressive requires the autoregressive-trend model",
        });
    }
    if size < 1 {
        return Err(Error::InvalidParameter {
            name: "size",
            reason: "matrix size must be at least 1".into(),
        });
    }
    let q_eff = spec.effective_decay();
    if q_eff >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "lambda/beta0",
            reason: format!("effective decay {q_eff} >= 1: non-stationary model"),
        });
    }
    let beta = spec.beta();
    if beta == 0.0 {
        return Ok(CovarianceMatrix::identity(size));
    }
    let ema = ema_matrix(q_eff, size)?;
    let b = DMatrix::identity(size, size) + ema.as_matrix() * beta;
    let matrix = &b * b.transpose();
    Ok(CovarianceMatrix {
        matrix,
        identity: false,
    })
}

/// Stationary variogram of returns at lag `t`: the variance of a `t`-step
/// sum divided by `t` times the single-step variance, after an infinite
/// initiation period. Equal to 1 for iid returns; monotonically increasing
/// towards `1 + 2 (1-lambda) beta0^2 / (lambda (1 + beta0^2))`.
pub fn variogram_returns_stationary(spec: &MarketSpec, t: usize) -> Result<f64> {
    if spec.kind != MarketModel::StochasticTrend {
        return Err(Error::ModelUnsupported {
            model: spec.kind.name(),
            hint: "the stationary variogram closed form covers the stochastic-trend model",
        });
    }
    if t < 1 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "lag must be at least 1".into(),
        });
    }
    let lambda = spec.lambda;
    let b2 = spec.beta0 * spec.beta0;
    let q = 1.0 - lambda;
    let tf = t as f64;
    let shape = 1.0 - (1.0 - q.powi(t as i32)) / (lambda * tf);
    Ok(1.0 + 2.0 * q * b2 / (lambda * (1.0 + b2)) * shape)
}
