//! The trend-following strategy: signal construction and the symmetric
//! quadratic-form matrices behind cumulative and incremental P&L.
//!
//! The position at step `t` is the signal `s_t`, a scaled EMA of strictly
//! earlier returns. P&L over a window is then `sum r_k s_k`, which is a
//! quadratic form `(1/2) r^T M r` of the whole return vector; `M` is what
//! the distribution machinery consumes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::market::geometric_powers;

/// Strategy parameters plus the evaluation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySpec {
    /// Signal decay in (0, 1]; the trading timescale is ~1/eta steps.
    pub eta: f64,
    /// Initiation period ignored by the P&L window, >= 0 steps.
    pub t0: usize,
    /// P&L horizon, >= 1 steps.
    pub horizon: usize,
    /// Transaction cost scale, >= 0.
    pub theta: f64,
    /// Transaction cost exponent, > 0 (typically 1 or 2).
    pub alpha: f64,
}

impl StrategySpec {
    pub fn new(eta: f64, t0: usize, horizon: usize, theta: f64, alpha: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("{eta} is outside (0, 1]"),
            });
        }
        if horizon < 1 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "horizon must be at least 1 step".into(),
            });
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("{theta} is negative or not finite"),
            });
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("{alpha} must be positive"),
            });
        }
        Ok(Self {
            eta,
            t0,
            horizon,
            theta,
            alpha,
        })
    }

    /// Strategy with the cost terms switched off.
    pub fn costless(eta: f64, t0: usize, horizon: usize) -> Result<Self> {
        Self::new(eta, t0, horizon, 0.0, 1.0)
    }

    /// Signal scale `gamma = sqrt(eta (2 - eta))`, normalizing the
    /// stationary incremental P&L to unit variance for independent returns.
    pub fn gamma(&self) -> f64 {
        gamma_of(self.eta).expect("eta validated at construction")
    }

    /// Total matrix size `t0 + horizon` required by this window.
    pub fn size(&self) -> usize {
        self.t0 + self.horizon
    }

    /// Last step of the window, `t0 + horizon` (1-based).
    pub fn last_step(&self) -> usize {
        self.t0 + self.horizon
    }
}

/// `gamma = sqrt(eta (2 - eta))` for `eta` in (0, 1].
pub fn gamma_of(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{eta} is outside (0, 1]"),
        });
    }
    Ok((eta * (2.0 - eta)).sqrt())
}

/// Signal series with the standard scale `gamma_of(eta)`.
///
/// `s[0] = 0` and `s_t = gamma sum_{k<t} (1-eta)^(t-1-k) r_k`: the signal
/// at a step sees only strictly earlier returns.
pub fn signal_series(returns: &[f64], eta: f64) -> Result<Vec<f64>> {
    let gamma = gamma_of(eta)?;
    signal_series_scaled(returns, eta, gamma)
}

/// Signal series with an explicit scale; the strategy is linear in it.
pub fn signal_series_scaled(returns: &[f64], eta: f64, gamma: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{eta} is outside (0, 1]"),
        });
    }
    if returns.is_empty() {
        return Err(Error::SeriesTooShort { need: 1, got: 0 });
    }
    let p = 1.0 - eta;
    let mut signal = Vec::with_capacity(returns.len());
    let mut ema = 0.0;
    signal.push(0.0);
    for t in 1..returns.len() {
        ema = p * ema + returns[t - 1];
        signal.push(gamma * ema);
    }
    Ok(signal)
}

/// Which window defines the quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnlKind {
    /// P&L accumulated over the whole window `[t0+1, t0+horizon]`.
    Cumulative,
    /// Single-step P&L at the window's last step.
    Incremental,
}

/// Symmetric matrix `M` with `(1/2) r^T M r` equal to the windowed P&L.
#[derive(Debug, Clone)]
pub struct PnlQuadForm {
    matrix: DMatrix<f64>,
    t0: usize,
    horizon: usize,
    kind: PnlKind,
}

impl PnlQuadForm {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn window(&self) -> (usize, usize) {
        (self.t0, self.horizon)
    }

    pub fn kind(&self) -> PnlKind {
        self.kind
    }

    /// Evaluates `(1/2) r^T M r`.
    pub fn evaluate(&self, returns: &[f64]) -> Result<f64> {
        if returns.len() != self.size() {
            return Err(Error::SizeMismatch {
                expected: self.size(),
                got: returns.len(),
            });
        }
        let r = DVector::from_column_slice(returns);
        Ok(0.5 * (r.transpose() * &self.matrix * &r)[(0, 0)])
    }
}

/// Builds the P&L quadratic form `M = gamma (O A + A^T O)`, where `A` is
/// the EMA operator with decay `1 - eta` and `O` projects onto the window
/// (all of `[t0+1, t0+horizon]` for cumulative; the single last step for
/// incremental). `O` is never materialized: the projector just masks rows
/// and columns of `A`.
pub fn pnl_quad_form(spec: &StrategySpec, kind: PnlKind) -> PnlQuadForm {
    let size = spec.size();
    let gamma = spec.gamma();
    let p = 1.0 - spec.eta;
    let powers = geometric_powers(p, size);
    // 0-based window of row/column indices that O keeps
    let (w_lo, w_hi) = match kind {
        PnlKind::Cumulative => (spec.t0, size - 1),
        PnlKind::Incremental => (size - 1, size - 1),
    };
    let in_window = |i: usize| i >= w_lo && i <= w_hi;
    let mut matrix = DMatrix::zeros(size, size);
    for j in 0..size {
        for k in 0..j {
            // (O A)[j][k] survives if row j is in the window; its transpose
            // partner fills the upper triangle. The diagonal of A is zero,
            // so M has zero diagonal.
            let mut value = 0.0;
            if in_window(j) {
                value += powers[j - k - 1];
            }
            matrix[(j, k)] = gamma * value;
            matrix[(k, j)] = gamma * value;
        }
    }
    PnlQuadForm {
        matrix,
        t0: spec.t0,
        horizon: spec.horizon,
        kind,
    }
}

/// Windowed P&L series of a concrete return path.
#[derive(Debug, Clone, PartialEq)]
pub struct PnlPath {
    /// Single-step P&L `r_k s_k` for each step of the window.
    pub incremental: Vec<f64>,
    /// Running sum of the incremental entries.
    pub cumulative: Vec<f64>,
}

/// Direct-sum evaluation of the windowed P&L. This is the oracle side of
/// the quadratic-form identity: for every path,
/// `(1/2) r^T M r = sum_{k in window} r_k s_k`.
pub fn pnl_from_path(returns: &[f64], spec: &StrategySpec) -> Result<PnlPath> {
    let need = spec.size();
    if returns.len() < need {
        return Err(Error::SeriesTooShort {
            need,
            got: returns.len(),
        });
    }
    let signal = signal_series(returns, spec.eta)?;
    let mut incremental = Vec::with_capacity(spec.horizon);
    let mut cumulative = Vec::with_capacity(spec.horizon);
    let mut acc = 0.0;
    for k in spec.t0..spec.t0 + spec.horizon {
        let step = returns[k] * signal[k];
        acc += step;
        incremental.push(step);
        cumulative.push(acc);
    }
    Ok(PnlPath {
        incremental,
        cumulative,
    })
}
