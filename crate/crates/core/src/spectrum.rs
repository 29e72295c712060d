//! Spectrum of the quadratic form: eigenvalues of `M C`, cumulants, and
//! the characteristic function.
//!
//! For a zero-mean Gaussian vector `r` with covariance `C`, the law of
//! `(1/2) r^T M r` depends on `(M, C)` only through the eigenvalues of
//! `M C`. They are real: `M C` is similar to the symmetric matrix
//! `L^T M L`, where `C = L L^T` is the Cholesky factorization.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::market::CovarianceMatrix;
use crate::strategy::PnlQuadForm;

/// Relative threshold below which eigenvalues are treated as exact zeros.
/// Window masking produces blocks of exact zeros that would otherwise leak
/// rounding noise into characteristic-function products.
const ZERO_RELATIVE: f64 = 1e-12;

/// Real eigenvalues of `M C`, sorted ascending.
#[derive(Debug, Clone)]
pub struct QuadFormSpectrum {
    eigenvalues: Vec<f64>,
    nonzero: Vec<f64>,
}

impl QuadFormSpectrum {
    /// Wraps an explicit eigenvalue list (hypothetical or closed-form
    /// spectra); values are sorted and near-zeros dropped from products.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("non-finite eigenvalue"));
        let cutoff = eigenvalues
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs()))
            * ZERO_RELATIVE;
        let nonzero = eigenvalues
            .iter()
            .copied()
            .filter(|mu| mu.abs() > cutoff)
            .collect();
        Self {
            eigenvalues,
            nonzero,
        }
    }

    /// All eigenvalues, ascending (zeros included).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalues that participate in products, ascending.
    pub fn nonzero(&self) -> &[f64] {
        &self.nonzero
    }

    /// Smallest eigenvalue (negative for non-degenerate P&L forms).
    pub fn mu_minus(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue.
    pub fn mu_plus(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `|phi(k)|`: the decay envelope of the characteristic function,
    /// `prod (1 + k^2 mu^2)^(-1/4)`.
    pub fn envelope(&self, k: f64) -> f64 {
        let log_sum: f64 = self
            .nonzero
            .iter()
            .map(|mu| (1.0 + k * k * mu * mu).ln())
            .sum();
        (-0.25 * log_sum).exp()
    }
}

/// First four cumulants of the quadratic form:
/// `kappa_m = (m-1)!/2 sum_j mu_j^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
}

impl CumulantSet {
    /// `kappa3 / kappa2^(3/2)`
    pub fn skewness(&self) -> f64 {
        self.kappa3 / self.kappa2.powf(1.5)
    }

    /// `kappa4 / kappa2^2` (excess kurtosis; 0 for a Gaussian).
    pub fn kurtosis(&self) -> f64 {
        self.kappa4 / (self.kappa2 * self.kappa2)
    }
}

/// Cumulants from eigenvalue power sums.
pub fn cumulants(spectrum: &QuadFormSpectrum) -> CumulantSet {
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for &mu in spectrum.eigenvalues() {
        let mu2 = mu * mu;
        s1 += mu;
        s2 += mu2;
        s3 += mu2 * mu;
        s4 += mu2 * mu2;
    }
    CumulantSet {
        kappa1: 0.5 * s1,
        kappa2: 0.5 * s2,
        kappa3: s3,
        kappa4: 3.0 * s4,
    }
}

/// Eigenvalues of `M C`, computed via the symmetric similar matrix
/// `L^T M L` (`C = L L^T`). With identity covariance the Cholesky step is
/// skipped and `M` itself is decomposed.
pub fn spectrum_of(form: &PnlQuadForm, covariance: &CovarianceMatrix) -> Result<QuadFormSpectrum> {
    if form.size() != covariance.size() {
        return Err(Error::SizeMismatch {
            expected: form.size(),
            got: covariance.size(),
        });
    }
    if covariance.is_identity() {
        return Ok(spectrum_of_symmetric(form.as_matrix().clone()));
    }
    let chol = nalgebra::Cholesky::new(covariance.as_matrix().clone())
        .ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let similar = l.transpose() * form.as_matrix() * &l;
    Ok(spectrum_of_symmetric(similar))
}

/// Eigenvalues of a symmetric matrix, sorted ascending. The input is
/// re-symmetrized first to scrub rounding from matrix products.
pub fn spectrum_of_symmetric(mut matrix: DMatrix<f64>) -> QuadFormSpectrum {
    let n = matrix.nrows();
    for j in 0..n {
        for k in 0..j {
            let avg = 0.5 * (matrix[(j, k)] + matrix[(k, j)]);
            matrix[(j, k)] = avg;
            matrix[(k, j)] = avg;
        }
    }
    let eigenvalues: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    QuadFormSpectrum::from_eigenvalues(eigenvalues)
}

/// Characteristic function `phi(k) = prod_j (1 - i k mu_j)^(-1/2)`.
///
/// Each factor `1 - i k mu` lies in the right half-plane for real `k`, so
/// the principal square root is correct factor by factor and no cumulative
/// branch tracking is needed. Accumulated in log space.
pub fn characteristic_function(spectrum: &QuadFormSpectrum, k: f64) -> Complex64 {
    let mut log_sum = Complex64::new(0.0, 0.0);
    for &mu in spectrum.nonzero() {
        log_sum += Complex64::new(1.0, -k * mu).ln();
    }
    (-0.5 * log_sum).exp()
}

/// `phi` together with its first three derivatives in `k`, used by the
/// truncated-integral corrections in the density inversion.
///
/// With `psi = ln phi`:
///   psi'   = (i/2) sum mu / (1 - i k mu)
///   psi''  = -(1/2) sum mu^2 / (1 - i k mu)^2
///   psi''' = -i sum mu^3 / (1 - i k mu)^3
pub(crate) fn char_fn_derivatives(
    spectrum: &QuadFormSpectrum,
    k: f64,
) -> (Complex64, Complex64, Complex64, Complex64) {
    let phi = characteristic_function(spectrum, k);
    let mut d1 = Complex64::new(0.0, 0.0);
    let mut d2 = Complex64::new(0.0, 0.0);
    let mut d3 = Complex64::new(0.0, 0.0);
    for &mu in spectrum.nonzero() {
        let w = Complex64::new(1.0, -k * mu);
        let w2 = w * w;
        d1 += Complex64::new(0.0, 0.5 * mu) / w;
        d2 -= Complex64::new(0.5 * mu * mu, 0.0) / w2;
        d3 -= Complex64::new(0.0, mu * mu * mu) / (w2 * w);
    }
    let phi1 = phi * d1;
    let phi2 = phi * (d1 * d1 + d2);
    let phi3 = phi * (d1 * d1 * d1 + 3.0 * d1 * d2 + d3);
    (phi, phi1, phi2, phi3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::MarketSpec;
    use crate::strategy::{pnl_quad_form, PnlKind, StrategySpec};
    use approx::assert_relative_eq;

    fn incremental_iid_spectrum(eta: f64, t0: usize) -> QuadFormSpectrum {
        let spec = StrategySpec::costless(eta, t0, 1).unwrap();
        let m = pnl_quad_form(&spec, PnlKind::Incremental);
        let c = CovarianceMatrix::identity(spec.size());
        spectrum_of(&m, &c).unwrap()
    }

    #[test]
    fn incremental_iid_has_two_nonzero_eigenvalues() {
        let eta = 0.01;
        let t_tilde = 200;
        let spectrum = incremental_iid_spectrum(eta, t_tilde - 1);
        assert_eq!(spectrum.nonzero().len(), 2);
        // closed form +-sqrt(1 - (1-eta)^(2(t~-1)))
        let expected = (1.0 - (1.0f64 - eta).powi(2 * (t_tilde as i32 - 1))).sqrt();
        assert_relative_eq!(spectrum.mu_plus(), expected, max_relative = 1e-10);
        assert_relative_eq!(spectrum.mu_minus(), -expected, max_relative = 1e-10);
        assert_relative_eq!(expected, 0.99080, max_relative = 1e-4);
    }

    #[test]
    fn incremental_iid_long_window_limit() {
        let spectrum = incremental_iid_spectrum(0.05, 400);
        assert_relative_eq!(spectrum.mu_plus(), 1.0, max_relative = 1e-8);
        assert_relative_eq!(spectrum.mu_minus(), -1.0, max_relative = 1e-8);
    }

    #[test]
    fn cumulative_iid_spectrum_approaches_long_time_limits() {
        // eta = 0.01, t0 = 200, t = 2000: extremes within 2% of the
        // long-time values 2 gamma / eta and -gamma / (2 p (1 - p^2)).
        let eta = 0.01f64;
        let spec = StrategySpec::costless(eta, 200, 2000).unwrap();
        let m = pnl_quad_form(&spec, PnlKind::Cumulative);
        let c = CovarianceMatrix::identity(spec.size());
        let spectrum = spectrum_of(&m, &c).unwrap();
        let gamma = spec.gamma();
        let p = 1.0 - eta;
        let mu_plus_inf = 2.0 * gamma / eta;
        let mu_minus_inf = -gamma / (2.0 * p * (1.0 - p * p));
        assert_relative_eq!(mu_plus_inf, 28.213, max_relative = 1e-4);
        assert_relative_eq!(mu_minus_inf, -3.580, max_relative = 1e-4);
        assert_relative_eq!(spectrum.mu_plus(), mu_plus_inf, max_relative = 0.02);
        assert_relative_eq!(spectrum.mu_minus(), mu_minus_inf, max_relative = 0.02);
    }

    #[test]
    fn cumulative_iid_eigenvalues_sum_to_zero() {
        let spec = StrategySpec::costless(0.1, 10, 30).unwrap();
        let m = pnl_quad_form(&spec, PnlKind::Cumulative);
        let c = CovarianceMatrix::identity(spec.size());
        let spectrum = spectrum_of(&m, &c).unwrap();
        let sum: f64 = spectrum.eigenvalues().iter().sum();
        assert!(sum.abs() < 1e-10, "trace should vanish, got {sum}");
        assert!(spectrum.mu_minus() < 0.0 && spectrum.mu_plus() > 0.0);
    }

    #[test]
    fn spectrum_is_sorted() {
        let spectrum = QuadFormSpectrum::from_eigenvalues(vec![0.5, -1.0, 3.0, 0.0]);
        assert_eq!(spectrum.eigenvalues(), &[-1.0, 0.0, 0.5, 3.0]);
        assert_eq!(spectrum.nonzero(), &[-1.0, 0.5, 3.0]);
    }

    #[test]
    fn cumulants_two_point() {
        let spectrum = QuadFormSpectrum::from_eigenvalues(vec![1.0, -1.0]);
        let kappa = cumulants(&spectrum);
        assert_eq!(kappa.kappa1, 0.0);
        assert_eq!(kappa.kappa2, 1.0);
        assert_eq!(kappa.kappa3, 0.0);
        assert_eq!(kappa.kappa4, 6.0);
        assert_eq!(kappa.skewness(), 0.0);
        assert_eq!(kappa.kurtosis(), 6.0);
    }

    #[test]
    fn cumulants_single_eigenvalue() {
        let c = 0.7;
        let kappa = cumulants(&QuadFormSpectrum::from_eigenvalues(vec![c]));
        assert_relative_eq!(kappa.kappa1, c / 2.0);
        assert_relative_eq!(kappa.kappa2, c * c / 2.0);
        assert_relative_eq!(kappa.kappa3, c * c * c);
        assert_relative_eq!(kappa.kappa4, 3.0 * c * c * c * c);
    }

    #[test]
    fn cumulants_match_matrix_traces() {
        // power sums of eig(MC) vs (m-1)!/2 tr((MC)^m) by explicit powers
        let market = MarketSpec::stochastic(0.05, 0.2).unwrap();
        let strat = StrategySpec::costless(0.08, 7, 25).unwrap();
        let m = pnl_quad_form(&strat, PnlKind::Cumulative);
        let c = market.covariance(strat.size()).unwrap();
        let spectrum = spectrum_of(&m, &c).unwrap();
        let kappa = cumulants(&spectrum);

        let mc = m.as_matrix() * c.as_matrix();
        let mc2 = &mc * &mc;
        let mc3 = &mc2 * &mc;
        let mc4 = &mc2 * &mc2;
        assert_relative_eq!(kappa.kappa1, 0.5 * mc.trace(), max_relative = 1e-8);
        assert_relative_eq!(kappa.kappa2, 0.5 * mc2.trace(), max_relative = 1e-8);
        assert_relative_eq!(kappa.kappa3, mc3.trace(), max_relative = 1e-8);
        assert_relative_eq!(kappa.kappa4, 3.0 * mc4.trace(), max_relative = 1e-8);
    }

    #[test]
    fn characteristic_function_basics() {
        let spectrum = QuadFormSpectrum::from_eigenvalues(vec![0.8, -0.8]);
        assert_eq!(characteristic_function(&spectrum, 0.0), Complex64::new(1.0, 0.0));
        // two-point symmetric spectrum: phi = (1 + k^2 mu^2)^(-1/2), real
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let k = i as f64 * 0.37;
            let phi = characteristic_function(&spectrum, k);
            let expected = (1.0 + k * k * 0.64).powf(-0.5);
            assert_relative_eq!(phi.re, expected, max_relative = 1e-12);
            assert!(phi.im.abs() < 1e-15);
            assert!(phi.norm() <= prev + 1e-15);
            prev = phi.norm();
        }
    }

    #[test]
    fn characteristic_function_conjugate_symmetry() {
        let spectrum = QuadFormSpectrum::from_eigenvalues(vec![2.0, -0.3, 0.9]);
        for &k in &[0.1, 1.0, 13.7] {
            let plus = characteristic_function(&spectrum, k);
            let minus = characteristic_function(&spectrum, -k);
            assert_relative_eq!(plus.re, minus.re, max_relative = 1e-13);
            assert_relative_eq!(plus.im, -minus.im, max_relative = 1e-13);
        }
    }

    #[test]
    fn envelope_matches_modulus() {
        let spectrum = QuadFormSpectrum::from_eigenvalues(vec![1.5, -0.4, 0.2]);
        for &k in &[0.0, 0.5, 3.0, 40.0] {
            assert_relative_eq!(
                spectrum.envelope(k),
                characteristic_function(&spectrum, k).norm(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let spectrum = QuadFormSpectrum::from_eigenvalues(vec![1.3, -0.6, 0.25]);
        let k = 2.1;
        let (phi, d1, d2, d3) = char_fn_derivatives(&spectrum, k);
        let f = |x: f64| characteristic_function(&spectrum, x);
        // wider steps for the higher orders: h^3 at h = 1e-5 is below the
        // f64 cancellation floor
        let h = 1e-5;
        let fd1 = (f(k + h) - f(k - h)) / (2.0 * h);
        let h = 1e-4;
        let fd2 = (f(k + h) - 2.0 * phi + f(k - h)) / (h * h);
        let h = 1e-3;
        let fd3 = (f(k + 2.0 * h) - 2.0 * f(k + h) + 2.0 * f(k - h) - f(k - 2.0 * h))
            / (2.0 * h * h * h);
        assert_relative_eq!(d1.re, fd1.re, max_relative = 1e-6, epsilon = 1e-9);
        assert_relative_eq!(d1.im, fd1.im, max_relative = 1e-6, epsilon = 1e-9);
        assert_relative_eq!(d2.re, fd2.re, max_relative = 1e-4, epsilon = 1e-7);
        assert_relative_eq!(d2.im, fd2.im, max_relative = 1e-4, epsilon = 1e-7);
        assert_relative_eq!(d3.re, fd3.re, max_relative = 1e-3, epsilon = 1e-5);
        assert_relative_eq!(d3.im, fd3.im, max_relative = 1e-3, epsilon = 1e-5);
    }

    #[test]
    fn spectrum_size_mismatch() {
        let strat = StrategySpec::costless(0.1, 2, 3).unwrap();
        let m = pnl_quad_form(&strat, PnlKind::Cumulative);
        let c = CovarianceMatrix::identity(7);
        assert!(matches!(
            spectrum_of(&m, &c),
            Err(Error::SizeMismatch { .. })
        ));
    }
}
