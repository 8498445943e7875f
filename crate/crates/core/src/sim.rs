//! Seeded Monte Carlo link simulation.
//!
//! Work is split into fixed-size chunks. Chunk `k` draws from a ChaCha8
//! stream selected by `(seed, k)`, so results do not depend on how chunks are
//! scheduled across threads. Integer counts are summed directly; floating
//! sums are reduced in chunk order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mi::{q_function, Constellation, NoiseSpec};
use crate::scheme::{derive, CocktailParams};

const CHUNK: u64 = 1 << 16;

/// Smallest sample count accepted by [`mi_monte_carlo`].
pub const MIN_MI_SAMPLES: u64 = 1000;

/// How the first layer is removed before detecting the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancellationMode {
    /// Subtract the transmitted `x₁`, as an ideal outer code would allow.
    Genie,
    /// Subtract the hard decision `x̂₁`.
    DecisionDirected,
}

impl FromStr for CancellationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "genie" => Ok(Self::Genie),
            "dd" | "decision_directed" | "decision-directed" => Ok(Self::DecisionDirected),
            other => Err(Error::InvalidParameter(format!(
                "unknown cancellation mode {other:?} (expected genie or dd)"
            ))),
        }
    }
}

impl fmt::Display for CancellationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Genie => "genie",
            Self::DecisionDirected => "dd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub num_symbols: u64,
    pub seed: u64,
    pub cancellation_mode: CancellationMode,
}

impl SimConfig {
    pub fn new(num_symbols: u64, seed: u64, cancellation_mode: CancellationMode) -> Result<Self> {
        if num_symbols == 0 {
            return Err(Error::InvalidParameter("num_symbols must be >= 1".into()));
        }
        Ok(Self {
            num_symbols,
            seed,
            cancellation_mode,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub ber_layer1: f64,
    pub ber_layer2: f64,
    /// Sample-mean estimate of `I(X;Y)` from the simulated received values.
    pub mi_sample_total_bits: f64,
    pub errors_layer1: u64,
    pub errors_layer2: u64,
    pub symbols: u64,
    /// Binomial standard error `√(p(1−p)/n)` of `ber_layer1`.
    pub stderr_ber1: f64,
    pub stderr_ber2: f64,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunk_bounds(total: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let chunks = usize::try_from(total.div_ceil(CHUNK)).expect("chunk count fits in usize");
    (0..chunks).into_par_iter().map(move |k| {
        let k = k as u64;
        (k, CHUNK.min(total - k * CHUNK))
    })
}

fn sign(y: f64) -> f64 {
    if y >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `ln` of the likelihood ratio `p(y|x) / Σⱼ pⱼ p(y|xⱼ)`.
struct LogLikelihoodRatio {
    points: Vec<f64>,
    log_weights: Vec<f64>,
    inv_two_sigma2: f64,
}

impl LogLikelihoodRatio {
    fn new(c: &Constellation, noise: NoiseSpec) -> Self {
        Self {
            points: c.points().to_vec(),
            log_weights: c
                .probs()
                .iter()
                .map(|p| if *p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
                .collect(),
            inv_two_sigma2: 0.5 / noise.sigma2(),
        }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let exponent = |m: f64| {
            let d = y - m;
            -d * d * self.inv_two_sigma2
        };
        let own = exponent(x);
        let max = self
            .points
            .iter()
            .zip(&self.log_weights)
            .map(|(m, lw)| lw + exponent(*m))
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self
            .points
            .iter()
            .zip(&self.log_weights)
            .map(|(m, lw)| (lw + exponent(*m) - max).exp())
            .sum();
        own - (max + sum.ln())
    }
}

#[derive(Default, Clone, Copy)]
struct ChunkTally {
    errors1: u64,
    errors2: u64,
    llr_nats: f64,
}

/// Runs `cfg.num_symbols` transmissions of `y = α·x₁ + β·x₂ + n`,
/// `n ~ N(0, noise.sigma2)`, through sign detection and cancellation.
pub fn simulate(params: &CocktailParams, noise: NoiseSpec, cfg: &SimConfig) -> SimReport {
    let (alpha, beta) = (params.alpha(), params.beta());
    let sigma = noise.std_dev();
    let llr = LogLikelihoodRatio::new(&params.constellation(), noise);
    let genie = cfg.cancellation_mode == CancellationMode::Genie;

    let tallies: Vec<ChunkTally> = chunk_bounds(cfg.num_symbols)
        .map(|(k, len)| {
            let mut rng = chunk_rng(cfg.seed, k);
            let mut t = ChunkTally::default();
            for _ in 0..len {
                let x1 = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let x2 = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let n: f64 = rng.sample(StandardNormal);
                let x = alpha * x1 + beta * x2;
                let y = x + sigma * n;

                let x1_hat = sign(y);
                let cancelled = if genie { x1 } else { x1_hat };
                let x2_hat = sign(y - alpha * cancelled);

                t.errors1 += u64::from(x1_hat != x1);
                t.errors2 += u64::from(x2_hat != x2);
                t.llr_nats += llr.eval(x, y);
            }
            t
        })
        .collect();

    let errors_layer1 = tallies.iter().map(|t| t.errors1).sum();
    let errors_layer2 = tallies.iter().map(|t| t.errors2).sum();
    let llr_nats: f64 = tallies.iter().map(|t| t.llr_nats).sum();

    let n = cfg.num_symbols as f64;
    let ber_layer1 = errors_layer1 as f64 / n;
    let ber_layer2 = errors_layer2 as f64 / n;
    SimReport {
        ber_layer1,
        ber_layer2,
        mi_sample_total_bits: llr_nats / n * std::f64::consts::LOG2_E,
        errors_layer1,
        errors_layer2,
        symbols: cfg.num_symbols,
        stderr_ber1: binomial_stderr(ber_layer1, n),
        stderr_ber2: binomial_stderr(ber_layer2, n),
    }
}

fn binomial_stderr(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

/// Sign-detector error rate on the first layer: `½Q(A₁/σ) + ½Q(A₂/σ)`.
pub fn ber_analytic_layer1(params: &CocktailParams, noise: NoiseSpec) -> f64 {
    let d = derive(params, noise);
    let sigma = noise.std_dev();
    0.5 * q_function(d.a1 / sigma) + 0.5 * q_function(d.a2 / sigma)
}

/// Error rate of BPSK with amplitude `beta`: `Q(β/σ)`.
pub fn ber_analytic_layer2_genie(params: &CocktailParams, noise: NoiseSpec) -> f64 {
    q_function(params.beta() / noise.std_dev())
}

/// Sampling estimate of `I(X;Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean_bits: f64,
    /// Standard error of the mean.
    pub std_err_bits: f64,
    pub samples: u64,
}

/// Sample mean of `log₂[p(y|x) / p(y)]` over `n` draws of `(x, y)`.
pub fn mi_monte_carlo(c: &Constellation, noise: NoiseSpec, n: u64, seed: u64) -> Result<f64> {
    mi_monte_carlo_estimate(c, noise, n, seed).map(|e| e.mean_bits)
}

/// As [`mi_monte_carlo`], also reporting the sample standard error.
pub fn mi_monte_carlo_estimate(
    c: &Constellation,
    noise: NoiseSpec,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n < MIN_MI_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_MI_SAMPLES} samples, got {n}"
        )));
    }
    let llr = LogLikelihoodRatio::new(c, noise);
    let sigma = noise.std_dev();
    let mut cdf: Vec<f64> = c
        .probs()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    *cdf.last_mut().expect("constellation is non-empty") = f64::INFINITY;

    let sums: Vec<(f64, f64)> = chunk_bounds(n)
        .map(|(k, len)| {
            let mut rng = chunk_rng(seed, k);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let u: f64 = rng.random();
                let idx = cdf.partition_point(|&c| c <= u);
                let x = c.points()[idx];
                let y = x + sigma * rng.sample::<f64, _>(StandardNormal);
                let v = llr.eval(x, y);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();

    let (s, s2) = sums
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let nf = n as f64;
    let mean = s / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    let log2e = std::f64::consts::LOG2_E;
    Ok(McEstimate {
        mean_bits: mean * log2e,
        std_err_bits: (var / nf).sqrt() * log2e,
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CocktailParams {
        CocktailParams::new(1.0, 0.7).unwrap()
    }

    #[test]
    fn noiseless_link_is_error_free() {
        let noise = NoiseSpec::new(1e-9).unwrap();
        for mode in [CancellationMode::Genie, CancellationMode::DecisionDirected] {
            let cfg = SimConfig::new(10_000, 3, mode).unwrap();
            let r = simulate(&params(), noise, &cfg);
            assert_eq!(r.errors_layer1, 0);
            assert_eq!(r.errors_layer2, 0);
            assert_eq!(r.stderr_ber1, 0.0);
            // Four perfectly resolved points.
            assert!((r.mi_sample_total_bits - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_empty_run() {
        assert!(SimConfig::new(0, 1, CancellationMode::Genie).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("genie".parse::<CancellationMode>().unwrap(), CancellationMode::Genie);
        assert_eq!("dd".parse::<CancellationMode>().unwrap(), CancellationMode::DecisionDirected);
        assert!("soft".parse::<CancellationMode>().is_err());
    }

    #[test]
    fn report_is_reproducible_and_consistent() {
        let noise = NoiseSpec::new(1.0).unwrap();
        let cfg = SimConfig::new(200_001, 42, CancellationMode::DecisionDirected).unwrap();
        let a = simulate(&params(), noise, &cfg);
        let b = simulate(&params(), noise, &cfg);
        assert_eq!(a, b);
        assert_eq!(a.symbols, 200_001);
        assert_eq!(a.errors_layer1, (a.ber_layer1 * a.symbols as f64).round() as u64);
        assert!((0.0..=1.0).contains(&a.ber_layer2));
        let se = (a.ber_layer1 * (1.0 - a.ber_layer1) / a.symbols as f64).sqrt();
        assert_eq!(a.stderr_ber1, se);

        let other_seed = SimConfig { seed: 43, ..cfg };
        assert_ne!(simulate(&params(), noise, &other_seed), a);
    }

    #[test]
    fn independent_of_thread_count() {
        let noise = NoiseSpec::new(0.8).unwrap();
        let cfg = SimConfig::new(300_000, 9, CancellationMode::Genie).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&params(), noise, &cfg))
        };
        assert_eq!(run(1), run(7));
    }

    #[test]
    fn decision_errors_only_add_layer2_errors() {
        let noise = NoiseSpec::new(1.0).unwrap();
        let genie = SimConfig::new(500_000, 5, CancellationMode::Genie).unwrap();
        let dd = SimConfig {
            cancellation_mode: CancellationMode::DecisionDirected,
            ..genie
        };
        let g = simulate(&params(), noise, &genie);
        let d = simulate(&params(), noise, &dd);
        assert_eq!(g.errors_layer1, d.errors_layer1);
        assert!(d.ber_layer2 >= g.ber_layer2);
    }

    #[test]
    fn analytic_ber_limits() {
        let p = params();
        let quiet = NoiseSpec::new(1e-6).unwrap();
        assert!(ber_analytic_layer1(&p, quiet) < 1e-100);

        let unit = NoiseSpec::new(1.0).unwrap();
        let want = 0.5 * q_function(1.7) + 0.5 * q_function(0.3);
        assert!((ber_analytic_layer1(&p, unit) - want).abs() < 1e-16);
        assert!((want - 0.213_327_020_284_795_2).abs() < 1e-12);

        let sigma: f64 = 0.6;
        let noise = NoiseSpec::new(sigma * sigma).unwrap();
        let near = CocktailParams::new(1.0, 1.0 - 1e-9).unwrap();
        let limit = 0.5 * q_function(2.0 / sigma) + 0.25;
        assert!((ber_analytic_layer1(&near, noise) - limit).abs() < 1e-8);
    }

    #[test]
    fn single_point_sample_mi_is_exactly_zero() {
        let c = Constellation::equiprobable(vec![0.3]).unwrap();
        let noise = NoiseSpec::new(1.0).unwrap();
        assert_eq!(mi_monte_carlo(&c, noise, 5000, 1).unwrap(), 0.0);
        assert!(mi_monte_carlo(&c, noise, 999, 1).is_err());
    }

    #[test]
    fn sampling_respects_unequal_priors() {
        // Skewed binary input: I = h(0.9) when the points are far apart.
        let c = Constellation::new(vec![-50.0, 50.0], vec![0.9, 0.1]).unwrap();
        let noise = NoiseSpec::new(1.0).unwrap();
        let est = mi_monte_carlo_estimate(&c, noise, 200_000, 11).unwrap();
        let h = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert!((est.mean_bits - h).abs() < 4.0 * est.std_err_bits + 1e-12);
    }
}
