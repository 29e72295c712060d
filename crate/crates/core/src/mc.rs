//! Monte Carlo oracle: simulates both market models and the strategy
//! end to end, producing empirical counterparts of every analytic
//! quantity.
//!
//! Reproducibility contract: each path draws from its own ChaCha8 stream
//! keyed by `(seed, path index)`, aggregation collects per-path samples in
//! index order, and reductions run sequentially over that ordered buffer.
//! Identical configs therefore produce bit-identical statistics regardless
//! of thread count (asserted by tests against the sequential fallback).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec;
use crate::market::{MarketModel, MarketSpec};
use crate::strategy::StrategySpec;

/// Gaussian sampling method baked into this build, recorded in outputs so
/// regression baselines stay traceable.
pub const GAUSSIAN_SAMPLER: &str = "chacha8/ziggurat";

/// Paths-per-work-unit for covariance accumulation.
const COVARIANCE_CHUNK: usize = 1024;
/// Bootstrap resamples behind quantile standard errors.
const BOOTSTRAP_RESAMPLES: usize = 200;
/// Cap on materialized path batches.
const MAX_BATCH_VALUES: usize = 100_000_000;

/// Full simulation setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub market: MarketSpec,
    pub strategy: StrategySpec,
    pub n_paths: usize,
    pub path_length: usize,
    pub seed: u64,
    /// Pair consecutive paths on a shared stream with flipped innovations.
    pub antithetic: bool,
}

impl SimulationConfig {
    pub fn new(
        market: MarketSpec,
        strategy: StrategySpec,
        n_paths: usize,
        path_length: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_paths < 1 {
            return Err(Error::InvalidParameter {
                name: "n_paths",
                reason: "need at least one path".into(),
            });
        }
        if path_length < strategy.size() {
            return Err(Error::InvalidParameter {
                name: "path_length",
                reason: format!(
                    "path length {path_length} is shorter than the strategy window {}",
                    strategy.size()
                ),
            });
        }
        Ok(Self {
            market,
            strategy,
            n_paths,
            path_length,
            seed,
            antithetic: false,
        })
    }

    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    /// Single-step window preceded by the default stationarity burn-in.
    pub fn stationary(
        market: MarketSpec,
        eta: f64,
        theta: f64,
        alpha: f64,
        n_paths: usize,
        seed: u64,
    ) -> Result<Self> {
        let burn = stationary_burn_in(&market, eta);
        let strategy = StrategySpec::new(eta, burn, 1, theta, alpha)?;
        let length = strategy.size();
        Self::new(market, strategy, n_paths, length, seed)
    }
}

/// Default burn-in when stationary statistics are requested: ten times the
/// slowest relaxation timescale, `ceil(10 / min(lambda, eta))`.
pub fn stationary_burn_in(market: &MarketSpec, eta: f64) -> usize {
    (10.0 / market.lambda.min(eta)).ceil() as usize
}

/// Per-path outputs of one strategy evaluation.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    /// Windowed cumulative P&L at the horizon.
    pub cumulative: f64,
    /// Single-step P&L at the window's last step.
    pub incremental: f64,
    /// Turnover sample `theta |s_T - s_(T-1)|^alpha` at the last step.
    pub turnover: f64,
    /// Plain price variation (sum of returns) over the window.
    pub price_variation: f64,
}

/// Streams the returns of one path through a consumer, in step order.
fn for_each_return(config: &SimulationConfig, path_idx: usize, mut emit: impl FnMut(usize, f64)) {
    let (stream, sign) = if config.antithetic {
        ((path_idx / 2) as u64, if path_idx % 2 == 1 { -1.0 } else { 1.0 })
    } else {
        (path_idx as u64, 1.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let beta = config.market.beta();
    match config.market.kind {
        MarketModel::StochasticTrend => {
            let decay = 1.0 - config.market.lambda;
            let mut trend = 0.0;
            for t in 0..config.path_length {
                let eps: f64 = StandardNormal.sample(&mut rng);
                let r = eps + beta * trend;
                if beta != 0.0 {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    trend = decay * trend + xi;
                }
                emit(t, sign * r);
            }
        }
        MarketModel::AutoregressiveTrend => {
            let decay = 1.0 - config.market.lambda;
            let mut weighted_history = 0.0;
            for t in 0..config.path_length {
                let eps: f64 = StandardNormal.sample(&mut rng);
                let r = eps + beta * weighted_history;
                weighted_history = decay * weighted_history + r;
                emit(t, sign * r);
            }
        }
    }
}

/// Runs the strategy on one simulated path without materializing it.
#[doc(hidden)]
pub fn path_sample(config: &SimulationConfig, path_idx: usize) -> PathSample {
    let strat = &config.strategy;
    let p = 1.0 - strat.eta;
    let gamma = strat.gamma();
    let w_lo = strat.t0;
    let w_hi = strat.size() - 1;
    let mut ema = 0.0;
    let mut prev_signal = 0.0;
    let mut out = PathSample {
        cumulative: 0.0,
        incremental: 0.0,
        turnover: 0.0,
        price_variation: 0.0,
    };
    for_each_return(config, path_idx, |t, r| {
        let signal = gamma * ema;
        if t >= w_lo && t <= w_hi {
            let step = r * signal;
            out.cumulative += step;
            out.price_variation += r;
            if t == w_hi {
                out.incremental = step;
                out.turnover = strat.theta * (signal - prev_signal).abs().powf(strat.alpha);
            }
        }
        ema = p * ema + r;
        prev_signal = signal;
    });
    out
}

fn collect_samples(config: &SimulationConfig) -> Vec<PathSample> {
    exec::map_indexed(config.n_paths, |i| path_sample(config, i))
}

/// Sequential reference of [`collect_samples`]; the determinism tests and
/// benchmarks compare against it bit for bit.
#[doc(hidden)]
pub fn collect_samples_seq(config: &SimulationConfig) -> Vec<PathSample> {
    exec::map_indexed_seq(config.n_paths, |i| path_sample(config, i))
}

/// Materialized batch of simulated return paths, row-major.
#[derive(Debug, Clone)]
pub struct PathBatch {
    n_paths: usize,
    length: usize,
    data: Vec<f64>,
}

impl PathBatch {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.data[i * self.length..(i + 1) * self.length]
    }
}

/// Simulates and materializes all paths (bounded by a size guard; the
/// statistics estimators stream instead and have no such limit).
pub fn simulate_market(config: &SimulationConfig) -> Result<PathBatch> {
    let total = config
        .n_paths
        .checked_mul(config.path_length)
        .filter(|&v| v <= MAX_BATCH_VALUES)
        .ok_or_else(|| Error::InvalidParameter {
            name: "n_paths",
            reason: format!(
                "batch of {} x {} values exceeds the materialization cap",
                config.n_paths, config.path_length
            ),
        })?;
    let rows = exec::map_indexed(config.n_paths, |i| {
        let mut row = vec![0.0f64; config.path_length];
        for_each_return(config, i, |t, r| row[t] = r);
        row
    });
    let mut data = Vec::with_capacity(total);
    for row in rows {
        data.extend_from_slice(&row);
    }
    Ok(PathBatch {
        n_paths: config.n_paths,
        length: config.path_length,
        data,
    })
}

/// Zero-mean sample covariance `sum r r^T / n` of simulated paths,
/// accumulated in fixed-size chunks so the reduction order (and thus the
/// result) does not depend on threading.
pub fn sample_covariance(config: &SimulationConfig) -> Result<DMatrix<f64>> {
    let size = config.path_length;
    if size > 2000 {
        return Err(Error::InvalidParameter {
            name: "path_length",
            reason: format!("covariance accumulation at {size} exceeds the 2000-step cap"),
        });
    }
    let n_chunks = config.n_paths.div_ceil(COVARIANCE_CHUNK);
    let partials = exec::map_indexed(n_chunks, |chunk| covariance_chunk(config, chunk));
    Ok(reduce_covariance(config, partials))
}

/// Sequential mirror of [`sample_covariance`] for determinism checks.
#[doc(hidden)]
pub fn sample_covariance_seq(config: &SimulationConfig) -> Result<DMatrix<f64>> {
    let n_chunks = config.n_paths.div_ceil(COVARIANCE_CHUNK);
    let partials = exec::map_indexed_seq(n_chunks, |chunk| covariance_chunk(config, chunk));
    Ok(reduce_covariance(config, partials))
}

/// Lower-triangle outer-product accumulation over one fixed chunk of
/// paths; flat storage keeps the hot loop free of matrix indexing.
fn covariance_chunk(config: &SimulationConfig, chunk: usize) -> Vec<f64> {
    let size = config.path_length;
    let lo = chunk * COVARIANCE_CHUNK;
    let hi = (lo + COVARIANCE_CHUNK).min(config.n_paths);
    let mut local = vec![0.0f64; size * (size + 1) / 2];
    let mut row = vec![0.0f64; size];
    for i in lo..hi {
        for_each_return(config, i, |t, r| row[t] = r);
        let mut idx = 0;
        for j in 0..size {
            let rj = row[j];
            for &rk in &row[..=j] {
                local[idx] += rj * rk;
                idx += 1;
            }
        }
    }
    local
}

fn reduce_covariance(config: &SimulationConfig, partials: Vec<Vec<f64>>) -> DMatrix<f64> {
    let size = config.path_length;
    let mut sum = vec![0.0f64; size * (size + 1) / 2];
    for partial in partials {
        for (acc, v) in sum.iter_mut().zip(partial) {
            *acc += v;
        }
    }
    let scale = 1.0 / config.n_paths as f64;
    let mut cov = DMatrix::<f64>::zeros(size, size);
    let mut idx = 0;
    for j in 0..size {
        for k in 0..=j {
            cov[(j, k)] = sum[idx] * scale;
            cov[(k, j)] = sum[idx] * scale;
            idx += 1;
        }
    }
    cov
}

/// Histogram over the sample range; counts sum to the sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Moments, quantiles and a histogram of one scalar sample, with
/// standard errors where the sample supports them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    pub n: usize,
    pub mean: f64,
    pub mean_se: Option<f64>,
    pub variance: f64,
    pub variance_se: Option<f64>,
    pub skewness: f64,
    pub skewness_se: Option<f64>,
    /// Excess kurtosis (0 for a Gaussian), matching the cumulant ratio.
    pub kurtosis: f64,
    pub kurtosis_se: Option<f64>,
    /// `(level, value, bootstrap standard error)` per requested level.
    pub quantiles: Vec<(f64, f64, Option<f64>)>,
    pub histogram: Histogram,
}

/// Estimation knobs shared by the statistics constructors.
#[derive(Debug, Clone)]
pub struct StatsOptions {
    pub quantile_levels: Vec<f64>,
    pub histogram_bins: usize,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self {
            quantile_levels: vec![0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99],
            histogram_bins: 81,
        }
    }
}

impl EmpiricalStats {
    /// Builds the summary from raw samples. Moment standard errors come
    /// from influence functions of the central-moment plug-ins; quantile
    /// errors from an order-statistic bootstrap seeded by `seed`.
    pub fn from_samples(samples: &[f64], options: &StatsOptions, seed: u64) -> Self {
        let n = samples.len();
        assert!(n >= 1, "empty sample");
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        if n < 2 {
            let histogram = histogram(samples, options.histogram_bins);
            let quantiles = options
                .quantile_levels
                .iter()
                .map(|&q| (q, samples[0], None))
                .collect();
            return Self {
                n,
                mean,
                mean_se: None,
                variance: f64::NAN,
                variance_se: None,
                skewness: f64::NAN,
                skewness_se: None,
                kurtosis: f64::NAN,
                kurtosis_se: None,
                quantiles,
                histogram,
            };
        }
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in samples {
            let c = x - mean;
            let c2 = c * c;
            m2 += c2;
            m3 += c2 * c;
            m4 += c2 * c2;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
        let variance = m2 * nf / (nf - 1.0);
        let skewness = m3 / m2.powf(1.5);
        let kurtosis = m4 / (m2 * m2) - 3.0;

        // influence functions of the moment-ratio estimators
        let (mut skew_if2, mut kurt_if2) = (0.0, 0.0);
        for &x in samples {
            let c = x - mean;
            let c2 = c * c;
            let if_skew =
                (c2 * c - m3 - 3.0 * m2 * c - 1.5 * (m3 / m2) * (c2 - m2)) / m2.powf(1.5);
            let if_kurt = (c2 * c2 - m4 - 4.0 * m3 * c - 2.0 * (m4 / m2) * (c2 - m2)) / (m2 * m2);
            skew_if2 += if_skew * if_skew;
            kurt_if2 += if_kurt * if_kurt;
        }
        let mean_se = (variance / nf).sqrt();
        let variance_se = ((m4 - m2 * m2).max(0.0) / nf).sqrt();
        let skewness_se = skew_if2.sqrt() / nf;
        let kurtosis_se = kurt_if2.sqrt() / nf;

        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
        let interp_quantile = |q: f64| -> f64 {
            let h = (nf - 1.0) * q;
            let lo = h.floor() as usize;
            let w = h - lo as f64;
            if lo + 1 < n {
                sorted[lo] * (1.0 - w) + sorted[lo + 1] * w
            } else {
                sorted[n - 1]
            }
        };
        // Order-statistic bootstrap: a resampled quantile is the original
        // order statistic at a Binomial(n, q) rank, so resampling reduces
        // to drawing ranks.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
        rng.set_stream(u64::MAX);
        let quantiles = options
            .quantile_levels
            .iter()
            .map(|&q| {
                let point = interp_quantile(q);
                if n < 16 {
                    return (q, point, None);
                }
                let sd = (nf * q * (1.0 - q)).sqrt();
                let mut draws = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
                for _ in 0..BOOTSTRAP_RESAMPLES {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let rank = (nf * q + sd * z).round().clamp(0.0, nf - 1.0) as usize;
                    draws.push(sorted[rank]);
                }
                let bm = draws.iter().sum::<f64>() / BOOTSTRAP_RESAMPLES as f64;
                let bv = draws.iter().map(|d| (d - bm) * (d - bm)).sum::<f64>()
                    / (BOOTSTRAP_RESAMPLES - 1) as f64;
                (q, point, Some(bv.sqrt()))
            })
            .collect();

        let histogram = histogram(&sorted, options.histogram_bins);
        Self {
            n,
            mean,
            mean_se: Some(mean_se),
            variance,
            variance_se: Some(variance_se),
            skewness,
            skewness_se: Some(skewness_se),
            kurtosis,
            kurtosis_se: Some(kurtosis_se),
            quantiles,
            histogram,
        }
    }
}

fn histogram(samples: &[f64], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Histogram {
            edges: vec![lo, hi],
            counts: vec![samples.len() as u64],
        };
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Histogram { edges, counts }
}

/// Cumulative and incremental P&L statistics of one simulation.
#[derive(Debug, Clone)]
pub struct PnlStats {
    pub cumulative: EmpiricalStats,
    pub incremental: EmpiricalStats,
    /// Gaussian sampling method used (build metadata).
    pub sampler: &'static str,
}

/// Estimates cumulative-P&L (at the horizon) and incremental-P&L (at the
/// window's last step) statistics across paths.
pub fn estimate_pnl_stats(config: &SimulationConfig, options: &StatsOptions) -> Result<PnlStats> {
    let samples = collect_samples(config);
    let cumulative: Vec<f64> = samples.iter().map(|s| s.cumulative).collect();
    let incremental: Vec<f64> = samples.iter().map(|s| s.incremental).collect();
    Ok(PnlStats {
        cumulative: EmpiricalStats::from_samples(&cumulative, options, config.seed),
        incremental: EmpiricalStats::from_samples(&incremental, options, config.seed.wrapping_add(1)),
        sampler: GAUSSIAN_SAMPLER,
    })
}

/// Estimates the mean turnover `theta |s_T - s_(T-1)|^alpha` at the
/// window's last step.
pub fn estimate_turnover(config: &SimulationConfig, options: &StatsOptions) -> Result<EmpiricalStats> {
    let samples = collect_samples(config);
    let turnover: Vec<f64> = samples.iter().map(|s| s.turnover).collect();
    Ok(EmpiricalStats::from_samples(
        &turnover,
        options,
        config.seed.wrapping_add(2),
    ))
}
