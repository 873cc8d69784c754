//! Univariate Parzen estimators on the unit interval.
//!
//! Each estimator is an equal-weight mixture of Gaussian kernels truncated to
//! `[0, 1]` plus one uniform component on `[0, 1]`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use rand::Rng;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Both tails beyond this many bandwidths leave the truncated mass at exactly 1.
const KERNEL_CUTOFF_SIGMAS: f64 = 38.7;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// A Gaussian kernel truncated (and renormalised) to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussian {
    pub mu: f64,
    pub sigma: f64,
    mass: f64,
    log_norm: f64,
}

// Beyond this many sigmas the normal tail is below half an ulp of 0.5, so
// dropping it leaves the computed mass bit-for-bit unchanged.
const TAIL_ROUNDS_AWAY: f64 = 8.5;

impl TruncatedGaussian {
    pub fn new(mu: f64, sigma: f64) -> Self {
        Self::with_ln_sigma(mu, sigma, sigma.ln())
    }

    fn with_ln_sigma(mu: f64, sigma: f64, ln_sigma: f64) -> Self {
        let (lo, hi) = (-mu / sigma, (1.0 - mu) / sigma);
        let upper = if hi > TAIL_ROUNDS_AWAY {
            1.0
        } else {
            normal_cdf(hi)
        };
        let lower = if lo < -TAIL_ROUNDS_AWAY {
            0.0
        } else {
            normal_cdf(lo)
        };
        let mass = upper - lower;
        Self {
            mu,
            sigma,
            mass,
            log_norm: ln_sigma + LN_SQRT_2PI + mass.ln(),
        }
    }

    /// Probability mass of the untruncated Gaussian inside `[0, 1]`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let t = (x - self.mu) / self.sigma;
        (-0.5 * t * t - self.log_norm).exp()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lo = -self.mu / self.sigma;
        let cdf_low =
            if lo < -KERNEL_CUTOFF_SIGMAS && (1.0 - self.mu) / self.sigma > KERNEL_CUTOFF_SIGMAS {
                0.0
            } else {
                normal_cdf(lo)
            };
        let p = cdf_low + rng.random::<f64>() * self.mass;
        (self.mu + self.sigma * normal_quantile(p)).clamp(0.0, 1.0)
    }
}

/// Mixture of truncated Gaussian kernels plus a uniform prior component,
/// every component weighted `1 / (N + 1)`.
#[derive(Debug, Clone)]
pub struct ParzenEstimator {
    // sorted by mu, so evaluation can skip kernels that cannot move the sum
    kernels: Vec<TruncatedGaussian>,
    mus: Vec<f64>,
    inv_sigmas: Vec<f64>,
    log_norms: Vec<f64>,
    shared_inv_sigma: Option<f64>,
    reach: f64,
}

// -ln(2^-53): a kernel term below exp(-this) is under half an ulp of the
// prior term and rounds away when added to it.
const NEG_LN_HALF_ULP: f64 = 36.8;

impl ParzenEstimator {
    pub fn new(points: &[f64], bandwidths: &[f64]) -> Result<Self> {
        if points.len() != bandwidths.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} bandwidths",
                points.len(),
                bandwidths.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!(
                "kernel centre {p} is outside [0, 1]"
            )));
        }
        if let Some(h) = bandwidths.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "bandwidth must be positive, got {h}"
            )));
        }
        let mut kernels: Vec<_> = points
            .iter()
            .zip(bandwidths)
            .map(|(&mu, &sigma)| TruncatedGaussian::new(mu, sigma))
            .collect();
        kernels.sort_unstable_by(|a, b| a.mu.total_cmp(&b.mu).then(a.sigma.total_cmp(&b.sigma)));
        Ok(Self::from_sorted(kernels))
    }

    fn from_sorted(kernels: Vec<TruncatedGaussian>) -> Self {
        let reach = kernels
            .iter()
            .map(|k| k.sigma * (2.0 * (NEG_LN_HALF_ULP - k.log_norm).max(0.0)).sqrt())
            .fold(0.0, f64::max);
        let shared_inv_sigma = match kernels.first() {
            Some(first) if kernels.iter().all(|k| k.sigma == first.sigma) => {
                Some(1.0 / first.sigma)
            }
            _ => None,
        };
        Self {
            shared_inv_sigma,
            mus: kernels.iter().map(|k| k.mu).collect(),
            inv_sigmas: kernels.iter().map(|k| 1.0 / k.sigma).collect(),
            log_norms: kernels.iter().map(|k| k.log_norm).collect(),
            kernels,
            reach,
        }
    }

    /// Builds an estimator whose kernels share one bandwidth chosen by Scott's rule.
    pub fn with_scott_bandwidth(points: &[f64], floor: f64) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!(
                "kernel centre {p} is outside [0, 1]"
            )));
        }
        let h = scott_bandwidth(points, floor);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bandwidth must be positive, got {h}"
            )));
        }
        let mut sorted = points.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let ln_h = h.ln();
        Ok(Self::from_sorted(
            sorted
                .into_iter()
                .map(|mu| TruncatedGaussian::with_ln_sigma(mu, h, ln_h))
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let start = self.mus.partition_point(|&m| m < x - self.reach);
        let end = self.mus.partition_point(|&m| m <= x + self.reach);
        let mut sum = 1.0;
        if let Some(inv) = self.shared_inv_sigma {
            for (mu, log_norm) in self.mus[start..end].iter().zip(&self.log_norms[start..end]) {
                let t = (x - mu) * inv;
                sum += (-0.5 * t * t - log_norm).exp();
            }
        } else {
            for i in start..end {
                let t = (x - self.mus[i]) * self.inv_sigmas[i];
                sum += (-0.5 * t * t - self.log_norms[i]).exp();
            }
        }
        sum / (self.kernels.len() + 1) as f64
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    /// Draws from the mixture: a uniformly chosen component, then from that component.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let component = rng.random_range(0..=self.kernels.len());
        match self.kernels.get(component) {
            Some(kernel) => kernel.sample(rng),
            None => rng.random::<f64>(),
        }
    }
}

/// Scott's rule `σ̂ · N^(-1/5)` with the sample standard deviation, floored.
pub fn scott_bandwidth(points: &[f64], floor: f64) -> f64 {
    let n = points.len();
    if n < 2 {
        return floor;
    }
    let mean = points.iter().sum::<f64>() / n as f64;
    let var = points.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var.sqrt() * (n as f64).powf(-0.2)).max(floor)
}

/// Density at `x` of the mixture built from `points` with per-point `bandwidths`.
pub fn parzen_density(points: &[f64], bandwidths: &[f64], x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!(
            "query point {x} is outside [0, 1]"
        )));
    }
    Ok(ParzenEstimator::new(points, bandwidths)?.pdf(x))
}
