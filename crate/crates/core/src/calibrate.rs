//! Empirical side: price standardization into unit-variance returns, the
//! empirical variogram, and least-squares calibration of `(lambda, beta0)`
//! against the stationary variogram model.

use crate::error::{Error, Result};

/// Volatility floor applied when standardizing (keeps constant stretches
/// of prices from dividing by zero).
const VOL_FLOOR: f64 = 1e-8;
/// Fitted trend strength below which lambda carries no information.
const BETA_IDENTIFIABLE: f64 = 1e-8;

/// Standardized return series.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    /// Optional date labels aligned with `values` (empty for synthetic data).
    pub dates: Vec<String>,
    /// Standardized log-returns, target unit variance.
    pub values: Vec<f64>,
    /// Leading entries dominated by the volatility estimator's start-up;
    /// excluded from downstream fits.
    pub warmup: usize,
}

impl ReturnSeries {
    /// Wraps returns that are already standardized.
    pub fn from_returns(dates: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "returns must be finite".into(),
            });
        }
        if !dates.is_empty() && dates.len() != values.len() {
            return Err(Error::SizeMismatch {
                expected: values.len(),
                got: dates.len(),
            });
        }
        Ok(Self {
            dates,
            values,
            warmup: 0,
        })
    }

    /// Values past the warm-up.
    pub fn settled(&self) -> &[f64] {
        &self.values[self.warmup.min(self.values.len())..]
    }
}

/// Standardizes a strictly positive price series: log-returns divided by a
/// one-step-lagged EMA realized-volatility estimate with decay
/// `1/vol_span`. The first `vol_span` outputs are flagged as warm-up.
pub fn standardize_returns(
    dates: Vec<String>,
    prices: &[f64],
    vol_span: usize,
) -> Result<ReturnSeries> {
    if vol_span < 2 {
        return Err(Error::InvalidParameter {
            name: "vol_span",
            reason: "volatility span must be at least 2 steps".into(),
        });
    }
    if prices.len() < vol_span + 2 {
        return Err(Error::SeriesTooShort {
            need: vol_span + 2,
            got: prices.len(),
        });
    }
    for (index, &value) in prices.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositivePrice { index, value });
        }
    }
    let alpha = 1.0 / vol_span as f64;
    let mut values = Vec::with_capacity(prices.len() - 1);
    // variance state seeded by the first squared return; every later output
    // divides by a state built from strictly earlier returns
    let mut log_ret = (prices[1] / prices[0]).ln();
    let mut var_state = log_ret * log_ret;
    values.push(if log_ret == 0.0 {
        0.0
    } else {
        log_ret / var_state.sqrt().max(VOL_FLOOR)
    });
    for t in 2..prices.len() {
        var_state = (1.0 - alpha) * var_state + alpha * log_ret * log_ret;
        log_ret = (prices[t] / prices[t - 1]).ln();
        values.push(log_ret / var_state.sqrt().max(VOL_FLOOR));
    }
    let return_dates = if dates.is_empty() {
        Vec::new()
    } else {
        if dates.len() != prices.len() {
            return Err(Error::SizeMismatch {
                expected: prices.len(),
                got: dates.len(),
            });
        }
        dates[1..].to_vec()
    };
    Ok(ReturnSeries {
        dates: return_dates,
        values,
        warmup: vol_span,
    })
}

/// Empirical variogram: for each lag `t` in `1..=t_max`, the sample
/// variance of overlapping `t`-step sums divided by `t` times the
/// single-step sample variance, over the data past warm-up and `burn_in`.
/// The lag-1 ratio is 1 by construction.
pub fn empirical_variogram(
    series: &ReturnSeries,
    t_max: usize,
    burn_in: usize,
) -> Result<Vec<f64>> {
    Ok(empirical_variogram_with_se(series, t_max, burn_in)?.0)
}

/// Variogram ratios together with standard-error estimates. Overlapping
/// windows reuse data, so the error bars carry an effective-sample-size
/// correction of `t`.
pub fn empirical_variogram_with_se(
    series: &ReturnSeries,
    t_max: usize,
    burn_in: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if t_max < 1 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            reason: "need at least one lag".into(),
        });
    }
    let start = burn_in.max(series.warmup);
    let data = &series.values[start.min(series.values.len())..];
    let n = data.len();
    if n < 10 * t_max {
        return Err(Error::SeriesTooShort {
            need: start + 10 * t_max,
            got: series.values.len(),
        });
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &x in data {
        acc += x;
        prefix.push(acc);
    }
    let window_variance = |t: usize| -> f64 {
        let count = n - t + 1;
        let mut mean = 0.0;
        for i in 0..count {
            mean += prefix[i + t] - prefix[i];
        }
        mean /= count as f64;
        let mut ss = 0.0;
        for i in 0..count {
            let d = prefix[i + t] - prefix[i] - mean;
            ss += d * d;
        }
        ss / (count - 1) as f64
    };
    let base = window_variance(1);
    if base <= 0.0 {
        return Err(Error::FitFailure("single-step variance is zero".into()));
    }
    let mut ratios = Vec::with_capacity(t_max);
    let mut errors = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let ratio = window_variance(t) / (t as f64 * base);
        let effective = ((n - t + 1) as f64 / t as f64).max(2.0);
        ratios.push(ratio);
        errors.push(ratio * (2.0 / (effective - 1.0)).sqrt());
    }
    Ok((ratios, errors))
}

/// Stationary variogram model evaluated at raw parameters: `1 + u g(lambda, t)`
/// with `u = beta0^2 / (1 + beta0^2)` and
/// `g = [2 (1-lambda)/lambda] (1 - (1 - (1-lambda)^t) / (lambda t))`.
fn model_shape(lambda: f64, t: usize) -> f64 {
    let q = 1.0 - lambda;
    let tf = t as f64;
    2.0 * q / lambda * (1.0 - (1.0 - q.powi(t as i32)) / (lambda * tf))
}

/// Fit configuration.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Weight lag `t` by `t` (reduces the influence of short lags, where
    /// the model is known to miss fast auto-correlation structure).
    pub down_weight_short_lags: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            down_weight_short_lags: false,
        }
    }
}

/// Calibrated variogram parameters.
#[derive(Debug, Clone)]
pub struct VariogramFit {
    pub lambda: f64,
    pub beta0: f64,
    /// Lags used, inclusive.
    pub lag_range: (usize, usize),
    /// Weighted root-mean-square residual.
    pub residual: f64,
    /// Covariance of `(lambda, beta0)` from the least-squares normal
    /// equations; `lambda` row/column is infinite when unidentified.
    pub covariance: [[f64; 2]; 2],
    /// False when the data carry no trend signal (`beta0 ~ 0`), leaving
    /// `lambda` unconstrained.
    pub lambda_identified: bool,
}

/// Least-squares fit of the stationary variogram model over a lag range.
///
/// For fixed `lambda` the model is linear in `u = beta0^2/(1+beta0^2)`, so
/// the search profiles `u` out analytically and scans `lambda` over a
/// fixed logarithmic grid, then refines the best cell by golden-section.
/// Deterministic given inputs.
pub fn fit_variogram(
    empirical: &[f64],
    lag_range: (usize, usize),
    options: &FitOptions,
) -> Result<VariogramFit> {
    let (t_min, t_max) = lag_range;
    if t_min < 1 || t_max > empirical.len() || t_max < t_min {
        return Err(Error::InvalidParameter {
            name: "lag_range",
            reason: format!(
                "range [{t_min}, {t_max}] does not fit the {} available lags",
                empirical.len()
            ),
        });
    }
    let n_lags = t_max - t_min + 1;
    if n_lags < 10 {
        return Err(Error::InvalidParameter {
            name: "lag_range",
            reason: format!("{n_lags} lags are too few to fit two parameters (min 10)"),
        });
    }
    let lags: Vec<usize> = (t_min..=t_max).collect();
    let weights: Vec<f64> = lags
        .iter()
        .map(|&t| if options.down_weight_short_lags { t as f64 } else { 1.0 })
        .collect();
    let targets: Vec<f64> = lags.iter().map(|&t| empirical[t - 1] - 1.0).collect();

    // profiled residual in lambda
    let rss_at = |lambda: f64| -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        let shapes: Vec<f64> = lags.iter().map(|&t| model_shape(lambda, t)).collect();
        for i in 0..lags.len() {
            num += weights[i] * shapes[i] * targets[i];
            den += weights[i] * shapes[i] * shapes[i];
        }
        let u = if den > 0.0 {
            (num / den).clamp(0.0, 1.0 - 1e-12)
        } else {
            0.0
        };
        let mut rss = 0.0;
        for i in 0..lags.len() {
            let e = targets[i] - u * shapes[i];
            rss += weights[i] * e * e;
        }
        (rss, u)
    };

    // multi-start scan over a fixed logarithmic grid
    const GRID: usize = 240;
    let (lo, hi) = (1e-4f64, 0.95f64);
    let ratio = (hi / lo).powf(1.0 / (GRID - 1) as f64);
    let mut best = (f64::INFINITY, lo, 0.0);
    let mut best_idx = 0;
    for i in 0..GRID {
        let lambda = lo * ratio.powi(i as i32);
        let (rss, u) = rss_at(lambda);
        if rss < best.0 {
            best = (rss, lambda, u);
            best_idx = i;
        }
    }

    // golden-section refinement on ln(lambda) around the best cell
    let mut a = (lo * ratio.powi(best_idx as i32 - 1)).max(lo).ln();
    let mut b = (lo * ratio.powi(best_idx as i32 + 1)).min(hi).ln();
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut f_c = rss_at(c.exp()).0;
    let mut f_d = rss_at(d.exp()).0;
    for _ in 0..200 {
        if f_c < f_d {
            b = d;
            d = c;
            f_d = f_c;
            c = b - phi * (b - a);
            f_c = rss_at(c.exp()).0;
        } else {
            a = c;
            c = d;
            f_c = f_d;
            d = a + phi * (b - a);
            f_d = rss_at(d.exp()).0;
        }
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    let lambda_hat = (0.5 * (a + b)).exp();
    let (rss, u_hat) = rss_at(lambda_hat);
    let beta0_hat = (u_hat / (1.0 - u_hat)).sqrt();

    let grid_edge = lambda_hat <= lo * (1.0 + 1e-6) || lambda_hat >= hi * (1.0 - 1e-6);
    if grid_edge && u_hat > BETA_IDENTIFIABLE {
        return Err(Error::FitFailure(format!(
            "lambda pinned to the search bound ({lambda_hat:.3e})"
        )));
    }

    let weight_sum: f64 = weights.iter().sum();
    let residual = (rss / weight_sum).sqrt();

    // covariance from the weighted normal equations at the optimum
    let lambda_identified = beta0_hat > BETA_IDENTIFIABLE;
    let sigma2 = rss / (n_lags as f64 - 2.0).max(1.0);
    let mut covariance = [[f64::INFINITY, 0.0], [0.0, f64::INFINITY]];
    let du_dbeta = 2.0 * beta0_hat / (1.0 + beta0_hat * beta0_hat).powi(2);
    if lambda_identified {
        let dl = (lambda_hat * 1e-6).max(1e-10);
        let mut jtj = [[0.0f64; 2]; 2];
        for (i, &t) in lags.iter().enumerate() {
            let j_lambda =
                u_hat * (model_shape(lambda_hat + dl, t) - model_shape(lambda_hat - dl, t))
                    / (2.0 * dl);
            let j_beta = model_shape(lambda_hat, t) * du_dbeta;
            jtj[0][0] += weights[i] * j_lambda * j_lambda;
            jtj[0][1] += weights[i] * j_lambda * j_beta;
            jtj[1][1] += weights[i] * j_beta * j_beta;
        }
        jtj[1][0] = jtj[0][1];
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det > 1e-300 {
            covariance = [
                [sigma2 * jtj[1][1] / det, -sigma2 * jtj[0][1] / det],
                [-sigma2 * jtj[1][0] / det, sigma2 * jtj[0][0] / det],
            ];
        }
    } else {
        // beta0 still has a one-parameter error bar from the linear fit
        let mut gg = 0.0;
        for (i, &t) in lags.iter().enumerate() {
            let g = model_shape(lambda_hat, t);
            gg += weights[i] * g * g;
        }
        if gg > 0.0 && du_dbeta > 0.0 {
            covariance[1][1] = sigma2 / gg / (du_dbeta * du_dbeta);
        } else {
            // flat model: report the u-scale variance directly
            covariance[1][1] = if gg > 0.0 { sigma2 / gg } else { f64::INFINITY };
        }
    }

    Ok(VariogramFit {
        lambda: lambda_hat,
        beta0: beta0_hat,
        lag_range,
        residual,
        covariance,
        lambda_identified,
    })
}

/// Synthetic noiseless variogram from the model itself, for round trips
/// and test fixtures: ratios for lags `1..=t_max`.
pub fn model_variogram(lambda: f64, beta0: f64, t_max: usize) -> Vec<f64> {
    let u = beta0 * beta0 / (1.0 + beta0 * beta0);
    (1..=t_max)
        .map(|t| 1.0 + u * model_shape(lambda, t))
        .collect()
}
