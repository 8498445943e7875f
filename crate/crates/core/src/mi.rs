//! Entropy and mutual information of discrete-input, real-valued AWGN channels.
//!
//! Everything here works on the real channel `y = x + n` with `n ~ N(0, sigma2)`.
//! The output density is a Gaussian mixture, so `H(Y)` has no closed form and is
//! integrated numerically with composite Simpson on a uniform grid that is
//! doubled until two successive estimates agree to within `abs_tol` bits.
//!
//! All entropies are in bits.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

/// `p·log₂p` is taken as zero below this density.
const DENSITY_FLOOR: f64 = 1e-300;

/// Initial Simpson spacing, in noise standard deviations.
const INITIAL_SPACING_SIGMAS: f64 = 0.5;

/// Largest starting grid; wider supports are rejected up front.
const MAX_INITIAL_INTERVALS: f64 = (1u64 << 24) as f64;

/// A finite real input alphabet with its probability mass function.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl Constellation {
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("constellation has no points".into()));
        }
        if points.len() != probs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite point {p}")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidParameter(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let c = Self { points, probs };
        if !c.energy().is_finite() {
            return Err(Error::InvalidParameter("average energy is not finite".into()));
        }
        Ok(c)
    }

    /// Uniform prior over `points`.
    pub fn equiprobable(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidParameter("constellation has no points".into()));
        }
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Equiprobable `{+amplitude, -amplitude}`.
    pub fn antipodal(amplitude: f64) -> Result<Self> {
        Self::equiprobable(vec![amplitude, -amplitude])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Average symbol energy `Σ p·x²`.
    pub fn energy(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * x * x)
            .sum()
    }

    /// Number of distinct points carrying nonzero probability.
    pub fn distinct_points(&self) -> usize {
        let mut support: Vec<f64> = self
            .points
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, _)| *x)
            .collect();
        support.sort_by(f64::total_cmp);
        support.dedup();
        support.len()
    }

    /// Same alphabet and prior with every point multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|x| x * s).collect(), self.probs.clone())
    }

    fn min_point(&self) -> f64 {
        self.points.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max_point(&self) -> f64 {
        self.points.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Variance of additive Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma2: f64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        // Subnormal variances overflow 1/(2σ²).
        if !(sigma2.is_finite() && sigma2 >= f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be finite and > 0, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn std_dev(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Per-dimension part of circularly-symmetric complex noise of total
    /// power `sigma2`. A real-valued signal only meets this component, which
    /// is what makes `log₂(1 + snr)` its capacity reference.
    pub fn in_phase(&self) -> Self {
        Self {
            sigma2: self.sigma2 / 2.0,
        }
    }
}

/// Error control for [`mixture_entropy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Stop when successive Simpson estimates differ by less than this (bits).
    pub abs_tol: f64,
    /// Number of grid doublings allowed before giving up.
    pub max_refinements: u32,
    /// Integration support extends this many noise standard deviations past
    /// the extreme points.
    pub tail_sigmas: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_refinements: 24,
            tail_sigmas: 10.0,
        }
    }
}

impl QuadratureConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_refinements < 1 {
            return Err(Error::InvalidParameter("max_refinements must be >= 1".into()));
        }
        if !(self.tail_sigmas.is_finite() && self.tail_sigmas >= 6.0) {
            return Err(Error::InvalidParameter(format!(
                "tail_sigmas must be >= 6, got {}",
                self.tail_sigmas
            )));
        }
        Ok(())
    }
}

/// A numerically integrated information quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiResult {
    pub value_bits: f64,
    /// Magnitude of the last refinement step.
    pub est_error_bits: f64,
    /// Integrand evaluations spent.
    pub evaluations: usize,
}

/// Capacity `log₂(1 + snr)` in bits per channel use.
pub fn capacity(snr: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Domain(format!("snr must be >= 0, got {snr}")));
    }
    Ok(snr.ln_1p() / LN_2)
}

/// Differential entropy of `N(0, sigma2)`: `½·log₂(2πe·sigma2)`.
pub fn noise_entropy(noise: NoiseSpec) -> f64 {
    0.5 * ((2.0 * PI * std::f64::consts::E).log2() + noise.sigma2.log2())
}

/// Gaussian tail probability `P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Output density of the mixture, evaluated in the log domain.
struct MixtureDensity {
    points: Vec<f64>,
    log_weights: Vec<f64>,
    inv_two_sigma2: f64,
    log_norm: f64,
}

impl MixtureDensity {
    /// Density of `y − shift`.
    fn new(c: &Constellation, noise: NoiseSpec, shift: f64) -> Self {
        Self {
            points: c.points.iter().map(|x| x - shift).collect(),
            log_weights: c
                .probs
                .iter()
                .map(|p| if *p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
                .collect(),
            inv_two_sigma2: 0.5 / noise.sigma2,
            log_norm: -0.5 * ((2.0 * PI).ln() + noise.sigma2.ln()),
        }
    }

    fn ln_pdf(&self, y: f64) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for (x, lw) in self.points.iter().zip(&self.log_weights) {
            let d = y - x;
            max = max.max(lw - d * d * self.inv_two_sigma2);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        let sum: f64 = self
            .points
            .iter()
            .zip(&self.log_weights)
            .map(|(x, lw)| {
                let d = y - x;
                (lw - d * d * self.inv_two_sigma2 - max).exp()
            })
            .sum();
        max + sum.ln() + self.log_norm
    }

    /// `-p·log₂p` at `y`.
    fn entropy_integrand(&self, y: f64) -> f64 {
        let ln_p = self.ln_pdf(y);
        let p = ln_p.exp();
        if p < DENSITY_FLOOR {
            0.0
        } else {
            -p * ln_p / LN_2
        }
    }
}

/// Differential entropy `H(Y)` of the output of `y = x + n`, `x ~ c`.
pub fn mixture_entropy(
    c: &Constellation,
    noise: NoiseSpec,
    q: &QuadratureConfig,
) -> Result<MiResult> {
    q.validate()?;
    // Entropy is translation invariant; centring keeps the grid resolvable
    // when sigma is tiny next to the magnitude of the points.
    let (min, max) = (c.min_point(), c.max_point());
    let centre = 0.5 * min + 0.5 * max;
    let density = MixtureDensity::new(c, noise, centre);
    let sigma = noise.std_dev();
    let lo = (min - centre) - q.tail_sigmas * sigma;
    let hi = (max - centre) + q.tail_sigmas * sigma;
    simpson_until_converged(|y| density.entropy_integrand(y), lo, hi, sigma, q)
}

/// Composite Simpson with grid doubling. The first grid has spacing at most
/// `INITIAL_SPACING_SIGMAS·scale`; each refinement reuses previous samples.
fn simpson_until_converged<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    scale: f64,
    q: &QuadratureConfig,
) -> Result<MiResult> {
    let width = hi - lo;
    let min_intervals = (width / (INITIAL_SPACING_SIGMAS * scale)).ceil().max(16.0);
    if !(min_intervals <= MAX_INITIAL_INTERVALS) {
        return Err(Error::InvalidParameter(format!(
            "integration support [{lo}, {hi}] spans too many noise standard deviations"
        )));
    }
    let mut intervals = (min_intervals as usize).next_power_of_two();

    let mut h = width / intervals as f64;
    let ends = f(lo) + f(hi);
    let mut even = 0.0; // interior points at even indices
    let mut odd = 0.0;
    for i in 1..intervals {
        let v = f(lo + i as f64 * h);
        if i % 2 == 0 {
            even += v;
        } else {
            odd += v;
        }
    }
    let mut evaluations = intervals + 1;
    let mut estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    let mut delta = f64::INFINITY;

    for _ in 0..q.max_refinements {
        // Old nodes all become even nodes; the new odd nodes are the midpoints.
        even += odd;
        h *= 0.5;
        intervals *= 2;
        odd = (0..intervals / 2)
            .map(|k| f(lo + (2 * k + 1) as f64 * h))
            .sum();
        evaluations += intervals / 2;
        let refined = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        delta = (refined - estimate).abs();
        estimate = refined;
        if delta < q.abs_tol {
            return Ok(MiResult {
                value_bits: estimate,
                est_error_bits: delta,
                evaluations,
            });
        }
    }
    Err(Error::Convergence {
        best_estimate: estimate,
        last_delta: delta,
        refinements: q.max_refinements,
    })
}

/// `I(X;Y) = H(Y) − H(N)` for the real AWGN channel with input law `c`.
///
/// The raw value is returned unclamped: it may dip below zero by up to
/// `est_error_bits`.
pub fn mi_discrete_awgn(
    c: &Constellation,
    noise: NoiseSpec,
    q: &QuadratureConfig,
) -> Result<MiResult> {
    let h = mixture_entropy(c, noise, q)?;
    Ok(MiResult {
        value_bits: h.value_bits - noise_entropy(noise),
        ..h
    })
}

/// Mutual information of equiprobable BPSK at signal-to-noise ratio `snr`,
/// where `snr` is symbol energy over complex-baseband noise power. Evaluated
/// as `±√snr` against the in-phase part of unit-power noise, so for small
/// `snr` it grows like `snr·log₂e` and it never exceeds `min(1, log₂(1+snr))`.
pub fn mi_binary_antipodal(snr: f64, q: &QuadratureConfig) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Domain(format!("snr must be >= 0, got {snr}")));
    }
    q.validate()?;
    if snr == 0.0 {
        return Ok(0.0);
    }
    let c = Constellation::antipodal(snr.sqrt())?;
    let noise = NoiseSpec::new(1.0)?.in_phase();
    Ok(mi_discrete_awgn(&c, noise, q)?.value_bits)
}
