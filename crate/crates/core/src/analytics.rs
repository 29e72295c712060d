//! Closed-form analytics for the stochastic-trend market: P&L moments,
//! turnover, the P&L variogram, net risk-adjusted P&L with transaction
//! costs, the optimal trading timescale, and the asymptotics of the
//! extreme eigenvalues of the P&L quadratic form.
//!
//! Formulas use `p = 1 - eta` (signal decay) and `q = 1 - lambda` (trend
//! decay). Several expressions carry removable `(p - q)` singularities;
//! whenever `|p - q| < 1e-9` the dedicated equal-timescale forms are
//! evaluated instead, with powers arranged so that `q = 0` stays finite.
//! The autoregressive model has no closed forms here: its moments go
//! through the `_numeric` matrix routes.

use crate::error::{Error, Result};
use crate::market::{MarketModel, MarketSpec};
use crate::strategy::StrategySpec;

/// Below this `|p - q|` the equal-timescale special cases take over.
const PQ_DEGENERATE: f64 = 1e-9;

/// Trading days per year in the annualization convention `sqrt(255)`.
pub const ANNUALIZATION_DAYS: f64 = 255.0;

fn require_stochastic(market: &MarketSpec, hint: &'static str) -> Result<()> {
    if market.kind != MarketModel::StochasticTrend {
        return Err(Error::ModelUnsupported {
            model: market.kind.name(),
            hint,
        });
    }
    Ok(())
}

fn decay_pair(market: &MarketSpec, strat: &StrategySpec) -> (f64, f64) {
    (1.0 - strat.eta, 1.0 - market.lambda)
}

// ---------------------------------------------------------------------------
// Mean incremental P&L
// ---------------------------------------------------------------------------

/// Mean single-step P&L at absolute step `t_tilde` (initiation included),
/// starting from zero signal history.
pub fn mean_incremental_pnl(
    market: &MarketSpec,
    strat: &StrategySpec,
    t_tilde: usize,
) -> Result<f64> {
    require_stochastic(market, "use mean_incremental_pnl_numeric for other models")?;
    if t_tilde < 1 {
        return Err(Error::InvalidParameter {
            name: "t_tilde",
            reason: "step index must be at least 1".into(),
        });
    }
    if t_tilde == 1 {
        return Ok(0.0); // no signal yet
    }
    let gamma = strat.gamma();
    let b2 = market.beta0 * market.beta0;
    let (p, q) = decay_pair(market, strat);
    let n = t_tilde as i32 - 1;
    let value = if (p - q).abs() < PQ_DEGENERATE {
        // equal timescales: q (1 - q^2n) / (1 - q^2) - n q^(2n-1)
        q * (1.0 - q.powi(2 * n)) / (1.0 - q * q) - n as f64 * q.powi(2 * n - 1)
    } else {
        q * (1.0 - (p * q).powi(n)) / (1.0 - p * q)
            - q.powi(n) * (p.powi(n) - q.powi(n)) / (p - q)
    };
    Ok(gamma * b2 * value)
}

/// Stationary limit of the mean single-step P&L:
/// `gamma beta0^2 (1 - lambda) / (1 - (1-eta)(1-lambda))`. The stationary
/// mean cumulative P&L over `t` steps is `t` times this.
pub fn mean_stationary_pnl(market: &MarketSpec, strat: &StrategySpec) -> Result<f64> {
    require_stochastic(market, "use mean_incremental_pnl_numeric for other models")?;
    let (p, q) = decay_pair(market, strat);
    Ok(strat.gamma() * market.beta0 * market.beta0 * q / (1.0 - p * q))
}

/// Numeric route for any Gaussian model: the mean incremental P&L as half
/// the trace of `M C`, reduced to the single nonzero row of the
/// incremental form.
pub fn mean_incremental_pnl_numeric(
    market: &MarketSpec,
    strat: &StrategySpec,
    t_tilde: usize,
) -> Result<f64> {
    if t_tilde < 1 {
        return Err(Error::InvalidParameter {
            name: "t_tilde",
            reason: "step index must be at least 1".into(),
        });
    }
    if t_tilde == 1 {
        return Ok(0.0);
    }
    let cov = market.covariance(t_tilde)?;
    let c = cov.as_matrix();
    let p = 1.0 - strat.eta;
    let i = t_tilde - 1; // 0-based row of the window step
    let mut acc = 0.0;
    let mut weight = 1.0;
    for k in (0..i).rev() {
        acc += weight * c[(i, k)];
        weight *= p;
    }
    Ok(strat.gamma() * acc)
}

// ---------------------------------------------------------------------------
// Variance of incremental P&L
// ---------------------------------------------------------------------------

/// Variance of the single-step P&L at absolute step `t_tilde >= 2`.
pub fn variance_incremental_pnl(
    market: &MarketSpec,
    strat: &StrategySpec,
    t_tilde: usize,
) -> Result<f64> {
    require_stochastic(market, "use variance_incremental_pnl_numeric for other models")?;
    if t_tilde < 2 {
        return Err(Error::InvalidParameter {
            name: "t_tilde",
            reason: "variance needs a step index of at least 2".into(),
        });
    }
    let gamma2 = strat.gamma().powi(2);
    let b2 = market.beta0 * market.beta0;
    let b4 = b2 * b2;
    let (p, q) = decay_pair(market, strat);
    let n = t_tilde as i32 - 1;
    let q2n = q.powi(2 * n);
    let var_t = 1.0 + b2 * (1.0 - q2n); // return variance at the step

    if (p - q).abs() < PQ_DEGENERATE {
        // equal timescales; powers arranged to stay finite at q = 0
        let one_m_q2 = 1.0 - q * q;
        // q^(2n) (1 + q^2 [1 + n (q^-2 - 1)]^2) = q^2n + ((2-t~) q^t~ + n q^(t~-2))^2
        let t = t_tilde as i32;
        let inner_pow = q2n
            + ((2 - t) as f64 * q.powi(t) + n as f64 * q.powi(t - 2)).powi(2);
        let signal_var = (1.0 - q2n) + b2 / one_m_q2 * (1.0 + q * q - inner_pow);
        // 1 - q^(2n) [1 + n (q^-2 - 1)] = 1 - (2-t~) q^(2n) - n q^(2n-2)
        let cross = 1.0 - (2 - t) as f64 * q2n - n as f64 * q.powi(2 * n - 2);
        return Ok(gamma2 / one_m_q2 * (var_t * signal_var + b4 * q * q / one_m_q2 * cross * cross));
    }

    let p2n = p.powi(2 * n);
    let pqn = (p * q).powi(n);
    let pn = p.powi(n);
    let qn = q.powi(n);
    let one_m_p2 = 1.0 - p * p;
    let one_m_q2 = 1.0 - q * q;
    let one_m_pq = 1.0 - p * q;

    let signal_var = (1.0 - p2n) / one_m_p2
        + b2 * one_m_q2 / (one_m_pq * (p - q))
            * (p * (1.0 - p2n) / one_m_p2
                - q * (1.0 - q2n) / one_m_q2
                - (pn - qn).powi(2) / (p - q));
    let cross = b4 * one_m_q2 * one_m_q2 / ((p - q) * (p - q))
        * ((1.0 - pqn) / one_m_pq - (1.0 - q2n) / one_m_q2).powi(2);
    Ok(gamma2 * (var_t * signal_var + cross))
}

/// Stationary variance of the single-step P&L; equals 1 for independent
/// returns by the gamma normalization.
pub fn variance_stationary_pnl(market: &MarketSpec, strat: &StrategySpec) -> Result<f64> {
    require_stochastic(market, "use variance_incremental_pnl_numeric for other models")?;
    let gamma2 = strat.gamma().powi(2);
    let b2 = market.beta0 * market.beta0;
    let (p, q) = decay_pair(market, strat);
    let one_m_pq = 1.0 - p * q;
    Ok(gamma2 / (1.0 - p * p)
        * (1.0
            + 2.0 * b2 / one_m_pq
            + b2 * b2 * (1.0 + q * q - 2.0 * p * p * q * q) / (one_m_pq * one_m_pq)))
}

/// Numeric route for any Gaussian model, from Wick's theorem:
/// `gamma^2 [ C_tt (E C E^T)_tt + ((E C)_tt)^2 ]` with `E` the signal's
/// EMA operator; only the needed entries are formed.
pub fn variance_incremental_pnl_numeric(
    market: &MarketSpec,
    strat: &StrategySpec,
    t_tilde: usize,
) -> Result<f64> {
    if t_tilde < 2 {
        return Err(Error::InvalidParameter {
            name: "t_tilde",
            reason: "variance needs a step index of at least 2".into(),
        });
    }
    let cov = market.covariance(t_tilde)?;
    let c = cov.as_matrix();
    let p = 1.0 - strat.eta;
    let i = t_tilde - 1;
    // weights w_k = p^(i-k-1) for k < i: the signal row of E
    let mut w = vec![0.0; i];
    let mut acc = 1.0;
    for k in (0..i).rev() {
        w[k] = acc;
        acc *= p;
    }
    let mut ec = 0.0; // (E C)_ii
    for k in 0..i {
        ec += w[k] * c[(k, i)];
    }
    let mut ece = 0.0; // (E C E^T)_ii
    for k in 0..i {
        let mut row = 0.0;
        for l in 0..i {
            row += c[(k, l)] * w[l];
        }
        ece += w[k] * row;
    }
    let gamma2 = strat.gamma().powi(2);
    Ok(gamma2 * (c[(i, i)] * ece + ec * ec))
}

// ---------------------------------------------------------------------------
// Turnover
// ---------------------------------------------------------------------------

fn turnover_prefactor(strat: &StrategySpec) -> f64 {
    let gamma2 = strat.gamma().powi(2);
    strat.theta * statrs::function::gamma::gamma((1.0 + strat.alpha) / 2.0)
        / std::f64::consts::PI.sqrt()
        * (2.0 * gamma2).powf(strat.alpha / 2.0)
}

/// Mean turnover `theta <|s_t - s_(t-1)|^alpha>` at absolute step `t >= 2`.
pub fn mean_turnover(market: &MarketSpec, strat: &StrategySpec, t: usize) -> Result<f64> {
    require_stochastic(market, "turnover closed forms cover the stochastic-trend model")?;
    if t < 2 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "the signal change needs two steps".into(),
        });
    }
    let b2 = market.beta0 * market.beta0;
    let (p, q) = decay_pair(market, strat);
    let ti = t as i32;
    let variance_shape = if (p - q).abs() < PQ_DEGENERATE {
        // q^(2t-4) ((q^-1 - q)(t-2) - 1)^2 = ((t-2)(q^(t-3) - q^(t-1)) - q^(t-2))^2
        let osc = (ti - 2) as f64 * (q.powi(ti - 3) - q.powi(ti - 1)) - q.powi(ti - 2);
        (2.0 - (1.0 - q) * q.powi(2 * ti - 4)) / (1.0 + q)
            + b2 / ((1.0 + q) * (1.0 + q)) * (2.0 - q.powi(2 * ti - 4) - osc * osc)
    } else {
        let jump = p.powi(ti - 1) - p.powi(ti - 2) - q.powi(ti - 1) + q.powi(ti - 2);
        (2.0 - (1.0 - p) * p.powi(2 * ti - 4)) / (1.0 + p)
            + b2 * (1.0 - q * q) / ((1.0 - p * q) * (p - q))
                * (2.0 * (p - q) / ((1.0 + p) * (1.0 + q))
                    - (1.0 - p) * p.powi(2 * ti - 3) / (1.0 + p)
                    + (1.0 - q) * q.powi(2 * ti - 3) / (1.0 + q)
                    - jump * jump / (p - q))
    };
    Ok(turnover_prefactor(strat) * variance_shape.powf(strat.alpha / 2.0))
}

/// Stationary mean turnover.
pub fn mean_turnover_stationary(market: &MarketSpec, strat: &StrategySpec) -> Result<f64> {
    require_stochastic(market, "turnover closed forms cover the stochastic-trend model")?;
    let b2 = market.beta0 * market.beta0;
    let (p, q) = decay_pair(market, strat);
    let variance_shape =
        2.0 / (1.0 + p) + 2.0 * b2 * (1.0 - q * q) / ((1.0 - p * q) * (1.0 + p) * (1.0 + q));
    Ok(turnover_prefactor(strat) * variance_shape.powf(strat.alpha / 2.0))
}

/// Leading small-timescale approximation of the stationary turnover:
/// `theta Gamma((1+alpha)/2) 2^alpha / sqrt(pi) eta^(alpha/2)`.
pub fn mean_turnover_small_eta(strat: &StrategySpec) -> f64 {
    strat.theta * statrs::function::gamma::gamma((1.0 + strat.alpha) / 2.0)
        * 2.0f64.powf(strat.alpha)
        / std::f64::consts::PI.sqrt()
        * strat.eta.powf(strat.alpha / 2.0)
}

// ---------------------------------------------------------------------------
// Variogram of incremental P&L
// ---------------------------------------------------------------------------

fn pnl_variogram_linear_coeff(b2: f64, p: f64, q: f64) -> f64 {
    let b4 = b2 * b2;
    let one_m_pq = 1.0 - p * q;
    if (p - q).abs() < PQ_DEGENERATE {
        let one_m_q2 = 1.0 - q * q;
        1.0 + 2.0 * b2 * (1.0 + 2.0 * q * q) / one_m_q2
            + b4 * (1.0 + 7.0 * q * q + 2.0 * q.powi(4)) / (one_m_q2 * one_m_q2)
    } else {
        let c2 = (2.0 * p.powi(3) * q.powi(5) + 2.0 * p.powi(3) * q.powi(3)
            - 6.0 * p * p * q * q
            + 2.0 * q.powi(4) * p * p
            - 4.0 * q.powi(3) * p
            - q.powi(5) * p
            + p * q
            + 1.0
            - q.powi(4)
            + 4.0 * q * q)
            / ((1.0 - q * q) * one_m_pq.powi(3));
        1.0 + 2.0 * b2 * (1.0 + q * q - 2.0 * p * p * q * q) / (one_m_pq * one_m_pq) + b4 * c2
    }
}

/// Stationary variogram of the incremental P&L at lag `t`: the variance of
/// the `t`-step cumulative P&L divided by `t` times the stationary
/// single-step variance. Equal to 1 for all `t` when returns are
/// independent.
pub fn pnl_variogram_stationary(market: &MarketSpec, strat: &StrategySpec, t: usize) -> Result<f64> {
    require_stochastic(market, "the P&L variogram closed form covers the stochastic-trend model")?;
    if t < 1 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "lag must be at least 1".into(),
        });
    }
    let b2 = market.beta0 * market.beta0;
    if b2 == 0.0 {
        return Ok(1.0);
    }
    let b4 = b2 * b2;
    let (p, q) = decay_pair(market, strat);
    let tf = t as f64;
    let one_m_pq = 1.0 - p * q;
    let one_m_q2 = 1.0 - q * q;
    let q2t = q.powi(2 * t as i32);

    let numerator = if (p - q).abs() < PQ_DEGENERATE {
        pnl_variogram_linear_coeff(b2, p, q) * tf
            - 4.0 * b2 * q * q / (one_m_q2 * one_m_q2)
                * (1.0 + b2 * (2.0 * q * q + 1.5) / one_m_q2)
                * (1.0 - q2t)
            + 4.0 * b4 * q * q / (one_m_q2 * one_m_q2) * q2t * tf
    } else {
        pnl_variogram_linear_coeff(b2, p, q) * tf
            - 2.0 * b2 * q * (p + q - 2.0 * p * p * q) / one_m_pq.powi(3)
                * (1.0 + b2 * p * one_m_q2 / (one_m_pq * (p - q)))
                * (1.0 - (p * q).powi(t as i32))
            + 4.0 * b4 * q.powi(3) * (1.0 - p * p)
                / (one_m_pq * (p - q) * one_m_q2 * one_m_q2)
                * (1.0 - q2t)
    };
    let v_inf = variance_stationary_pnl(market, strat)?;
    Ok(numerator * strat.gamma().powi(2) / (1.0 - p * p) / (tf * v_inf))
}

/// Long-lag limit of the stationary P&L variogram.
pub fn pnl_variogram_asymptote(market: &MarketSpec, strat: &StrategySpec) -> Result<f64> {
    require_stochastic(market, "the P&L variogram closed form covers the stochastic-trend model")?;
    let b2 = market.beta0 * market.beta0;
    if b2 == 0.0 {
        return Ok(1.0);
    }
    let (p, q) = decay_pair(market, strat);
    let v_inf = variance_stationary_pnl(market, strat)?;
    Ok(pnl_variogram_linear_coeff(b2, p, q) * strat.gamma().powi(2) / (1.0 - p * p) / v_inf)
}

/// Small-parameter form of the long-lag P&L variogram for matched
/// timescales (`eta = lambda`, both small):
/// `1 + 2c + c^2 / (2 (1 + c))` with `c = beta0^2 / lambda`.
pub fn pnl_variogram_asymptote_small_params(lambda: f64, beta0: f64) -> f64 {
    let c = beta0 * beta0 / lambda;
    1.0 + 2.0 * c + c * c / (2.0 * (1.0 + c))
}

// ---------------------------------------------------------------------------
// Net risk-adjusted P&L and the optimal timescale
// ---------------------------------------------------------------------------

/// Exact stationary net risk-adjusted P&L at timescale `eta`:
/// `(<dPNL> - <turnover>) / sqrt(v_inf)`, times `sqrt(255)` when
/// `annualize` is set. Cost terms follow the strategy's `theta`, `alpha`.
pub fn net_risk_adjusted_pnl(
    market: &MarketSpec,
    strat: &StrategySpec,
    eta: f64,
    annualize: bool,
) -> Result<f64> {
    let at_eta = StrategySpec::new(eta, strat.t0, strat.horizon, strat.theta, strat.alpha)?;
    let mean = mean_stationary_pnl(market, &at_eta)?;
    let turnover = mean_turnover_stationary(market, &at_eta)?;
    let variance = variance_stationary_pnl(market, &at_eta)?;
    let value = (mean - turnover) / variance.sqrt();
    Ok(if annualize {
        value * ANNUALIZATION_DAYS.sqrt()
    } else {
        value
    })
}

/// Small-parameter approximation of the stationary net risk-adjusted P&L
/// for linear costs:
/// `(beta0^2 sqrt(2 eta) - (2/sqrt(pi)) theta sqrt(eta) (lambda+eta)) /
///  sqrt((lambda+eta)^2 + 2 beta0^2 (lambda+eta))`.
pub fn net_risk_adjusted_pnl_approx(
    market: &MarketSpec,
    theta: f64,
    eta: f64,
    annualize: bool,
) -> Result<f64> {
    require_stochastic(market, "the risk-adjusted approximation covers the stochastic-trend model")?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{eta} is outside (0, 1]"),
        });
    }
    let b2 = market.beta0 * market.beta0;
    let sum = market.lambda + eta;
    let numerator = b2 * (2.0 * eta).sqrt()
        - 2.0 / std::f64::consts::PI.sqrt() * theta * eta.sqrt() * sum;
    let value = numerator / (sum * sum + 2.0 * b2 * sum).sqrt();
    Ok(if annualize {
        value * ANNUALIZATION_DAYS.sqrt()
    } else {
        value
    })
}

/// Timescale maximizing the approximate net risk-adjusted P&L under linear
/// costs. Costless: `eta_opt = lambda sqrt(1 + 2 beta0^2 / lambda)`. With
/// costs, `eta_opt = lambda z` where `z` is the unique positive root of
///
/// `theta' z^3 + (c + theta'(4c+3)) z^2 + 3 theta'(1+2c) z - (1+2c)(c-theta') = 0`,
///
/// `theta' = theta sqrt(2/pi)`, `c = beta0^2/lambda`; found by bracketed
/// bisection. No positive root exists once `c <= theta'` (the constant
/// term turns non-negative): the strategy cannot be profitable at any
/// timescale and a dedicated error is returned.
pub fn optimal_eta(market: &MarketSpec, theta: f64) -> Result<f64> {
    require_stochastic(market, "the optimal-timescale cubic covers the stochastic-trend model")?;
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("{theta} is negative or not finite"),
        });
    }
    let lambda = market.lambda;
    let c = market.beta0 * market.beta0 / lambda;
    if theta == 0.0 {
        return Ok(lambda * (1.0 + 2.0 * c).sqrt());
    }
    let theta_p = theta * (2.0 / std::f64::consts::PI).sqrt();
    if c <= theta_p {
        return Err(Error::NoProfitableEta { theta, c });
    }
    let poly = |z: f64| {
        theta_p * z * z * z
            + (c + theta_p * (4.0 * c + 3.0)) * z * z
            + 3.0 * theta_p * (1.0 + 2.0 * c) * z
            - (1.0 + 2.0 * c) * (c - theta_p)
    };
    // poly(0) < 0 and all leading coefficients are positive: a single sign
    // change brackets the unique positive root.
    let mut hi = 1.0;
    let mut guard = 0;
    while poly(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::FitFailure(
                "optimal-timescale cubic never changed sign".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if poly(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(lambda * 0.5 * (lo + hi))
}

/// Largest transaction cost at which the strategy stays profitable:
/// `sqrt(pi/2) beta0^2 / (lambda + eta)`.
pub fn max_cost_bound(market: &MarketSpec, eta: f64) -> Result<f64> {
    require_stochastic(market, "the cost bound covers the stochastic-trend model")?;
    Ok((std::f64::consts::PI / 2.0).sqrt() * market.beta0 * market.beta0
        / (market.lambda + eta))
}

/// Sweeps the approximate net risk-adjusted P&L over a list of timescales.
pub fn sweep_net_risk_adjusted_approx(
    market: &MarketSpec,
    theta: f64,
    etas: &[f64],
    annualize: bool,
) -> Result<Vec<f64>> {
    require_stochastic(market, "the risk-adjusted approximation covers the stochastic-trend model")?;
    let market = *market;
    let etas_owned: Vec<f64> = etas.to_vec();
    let values = crate::exec::map_indexed(etas_owned.len(), move |i| {
        net_risk_adjusted_pnl_approx(&market, theta, etas_owned[i], annualize)
    });
    values.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Eigenvalue asymptotics (independent returns)
// ---------------------------------------------------------------------------

/// Long-horizon limits of the extreme eigenvalues of the cumulative P&L
/// form with independent returns:
/// `mu+ = 2 gamma / eta`, `mu- = -gamma / (2 (1-eta) eta (2-eta))`.
pub fn eigen_asymptotics_long(eta: f64) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{eta} is outside (0, 1); the negative limit diverges at eta = 1"),
        });
    }
    let gamma = (eta * (2.0 - eta)).sqrt();
    let mu_plus = 2.0 * gamma / eta;
    let mu_minus = -gamma / (2.0 * (1.0 - eta) * eta * (2.0 - eta));
    Ok((mu_plus, mu_minus))
}

/// Leading small-`eta` forms of the long-horizon extremes:
/// `(sqrt(8/eta), -1/sqrt(8 eta))`.
pub fn eigen_asymptotics_long_small_eta(eta: f64) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{eta} is outside (0, 1)"),
        });
    }
    Ok(((8.0 / eta).sqrt(), -1.0 / (8.0 * eta).sqrt()))
}

/// Short-horizon behaviour of the extreme eigenvalues for small `eta` and
/// moderate `t` (a conjectural expansion, useful while `t * eta << 1`):
/// `mu± ~ ±sqrt(t) + (t-1) sqrt(eta/2)`.
pub fn eigen_asymptotics_short(eta: f64, t: usize) -> (f64, f64) {
    let drift = (t as f64 - 1.0) * (eta / 2.0).sqrt();
    let spread = (t as f64).sqrt();
    (spread + drift, -spread + drift)
}

/// Bulk spectrum of the long cumulative form without initiation masking,
/// from its near-cyclic limit. `omega` in [0, 1] indexes eigenvalues from
/// the smallest (`omega = 0`, value `-gamma / (1 - eta/2)`) to the largest
/// (`omega = 1`, value `2 gamma / eta`).
pub fn cyclic_spectrum_limit(eta: f64, omega: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{eta} is outside (0, 1)"),
        });
    }
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("{omega} is outside [0, 1]"),
        });
    }
    let gamma = (eta * (2.0 - eta)).sqrt();
    let p = 1.0 - eta;
    let cosine = (std::f64::consts::PI * (1.0 - omega)).cos();
    Ok(2.0 * gamma * (cosine - p) / (1.0 - 2.0 * p * cosine + p * p))
}

/// Magnitude of the two nonzero eigenvalues of the incremental form with
/// independent returns: `sqrt(1 - (1-eta)^(2(t~-1)))`; the spectrum is
/// `{+mu, -mu}`.
pub fn incremental_eigenvalue_iid(eta: f64, t_tilde: usize) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{eta} is outside (0, 1]"),
        });
    }
    if t_tilde < 1 {
        return Err(Error::InvalidParameter {
            name: "t_tilde",
            reason: "step index must be at least 1".into(),
        });
    }
    Ok((1.0 - (1.0 - eta).powi(2 * (t_tilde as i32 - 1))).sqrt())
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Summary of the stationary closed forms at one parameter point.
#[derive(Debug, Clone)]
pub struct AnalyticsReport {
    pub mean_stationary: f64,
    pub variance_stationary: f64,
    pub turnover_stationary: f64,
    pub pnl_variogram_asymptote: f64,
    pub net_risk_adjusted: f64,
    pub net_risk_adjusted_annualized: f64,
    /// None when costs exceed the profitability bound.
    pub eta_opt: Option<f64>,
    pub theta_max: f64,
    pub mu_plus_inf: f64,
    pub mu_minus_inf: f64,
}

impl AnalyticsReport {
    /// Evaluates every stationary closed form for the stochastic-trend
    /// model at the strategy's own timescale.
    pub fn compute(market: &MarketSpec, strat: &StrategySpec) -> Result<Self> {
        let (mu_plus_inf, mu_minus_inf) = if strat.eta < 1.0 {
            eigen_asymptotics_long(strat.eta)?
        } else {
            (f64::NAN, f64::NAN)
        };
        let eta_opt = match optimal_eta(market, strat.theta) {
            Ok(v) => Some(v),
            Err(Error::NoProfitableEta { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            mean_stationary: mean_stationary_pnl(market, strat)?,
            variance_stationary: variance_stationary_pnl(market, strat)?,
            turnover_stationary: mean_turnover_stationary(market, strat)?,
            pnl_variogram_asymptote: pnl_variogram_asymptote(market, strat)?,
            net_risk_adjusted: net_risk_adjusted_pnl(market, strat, strat.eta, false)?,
            net_risk_adjusted_annualized: net_risk_adjusted_pnl(market, strat, strat.eta, true)?,
            eta_opt,
            theta_max: max_cost_bound(market, strat.eta)?,
            mu_plus_inf,
            mu_minus_inf,
        })
    }
}
