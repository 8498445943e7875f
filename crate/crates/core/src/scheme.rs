//! Two-layer superposed ("cocktail") BPSK.
//!
//! Two independent BPSK streams share one real channel use,
//! `x = α·x₁ + β·x₂` with `α > β > 0`. Conditioned on whether the bits agree
//! (case I) or differ (case II), the first layer looks like BPSK with
//! amplitude `A₁ = α + β` or `A₂ = α − β`. The receiver detects `x₁`,
//! subtracts `α·x̂₁` and detects `x₂` from `β·x₂ + n`.
//!
//! SNRs are quoted against complex-baseband noise power `σ²`, so that
//! `log₂(1 + γ)` is the capacity reference. The real-valued layered signal is
//! integrated against the in-phase component of that noise (variance `σ²/2`).
//!
//! Two families of rates are produced side by side:
//!
//! * the layered rate `½·I(γ₁) + ½·I(γ₂) + I(γ₃)`, which treats the case
//!   index as known at the layer-1 detector, and
//! * the exact mutual information of the induced four-point constellation,
//!   `I(X;Y)` and `I(X₁;Y)`, where the case index is unknown.
//!
//! The exact rates can never exceed capacity; the layered rate can.

use std::f64::consts::LOG2_E;

use crate::error::{Error, Result};
use crate::mi::{
    capacity, mi_binary_antipodal, mixture_entropy, noise_entropy, Constellation, NoiseSpec,
    QuadratureConfig,
};

/// Layer amplitudes, `alpha > beta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocktailParams {
    alpha: f64,
    beta: f64,
}

impl CocktailParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "amplitudes must be finite, got alpha={alpha}, beta={beta}"
            )));
        }
        if !(beta > 0.0 && alpha > beta) {
            return Err(Error::InvalidParameter(format!(
                "need alpha > beta > 0, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Amplitudes with `beta/alpha = ratio` and unit input energy
    /// `alpha² + beta² = 1`.
    pub fn unit_energy(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ratio beta/alpha must lie in (0, 1), got {ratio}"
            )));
        }
        let alpha = 1.0 / (1.0 + ratio * ratio).sqrt();
        Self::new(alpha, ratio * alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn input_energy(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.beta
    }

    /// Noise power that puts these amplitudes at SNR `snr` (`snr > 0`).
    pub fn noise_for_snr(&self, snr: f64) -> Result<NoiseSpec> {
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::Domain(format!("snr must be finite and > 0, got {snr}")));
        }
        NoiseSpec::new(self.input_energy() / snr)
    }

    /// The four equiprobable received points `{±(α+β), ±(α−β)}`.
    pub fn constellation(&self) -> Constellation {
        let (a1, a2) = (self.alpha + self.beta, self.alpha - self.beta);
        Constellation::equiprobable(vec![a1, -a1, a2, -a2])
            .expect("finite amplitudes form a valid constellation")
    }

    /// Law of `y` given `x₁ = +1`: equal-weight points at `A₁` and `A₂`.
    fn layer1_conditional(&self) -> Constellation {
        Constellation::equiprobable(vec![self.alpha + self.beta, self.alpha - self.beta])
            .expect("finite amplitudes form a valid constellation")
    }
}

/// Amplitudes, energies and SNRs implied by a parameter set and noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// Case I amplitude, `α + β`.
    pub a1: f64,
    /// Case II amplitude, `α − β`.
    pub a2: f64,
    /// Input energy `α² + β²`.
    pub e_in: f64,
    /// Energy spent across both detection steps, `α² + 2β²`.
    pub e_used: f64,
    /// `e_used − e_in`.
    pub g_e: f64,
    /// `e_in/σ²`
    pub gamma: f64,
    /// `a1²/σ²`
    pub gamma1: f64,
    /// `a2²/σ²`
    pub gamma2: f64,
    /// `β²/σ²`
    pub gamma3: f64,
}

pub fn derive(params: &CocktailParams, noise: NoiseSpec) -> DerivedQuantities {
    let CocktailParams { alpha, beta } = *params;
    let s2 = noise.sigma2();
    let a1 = alpha + beta;
    let a2 = alpha - beta;
    let e_in = alpha * alpha + beta * beta;
    let e_used = alpha * alpha + 2.0 * beta * beta;
    DerivedQuantities {
        a1,
        a2,
        e_in,
        e_used,
        g_e: e_used - e_in,
        gamma: e_in / s2,
        gamma1: a1 * a1 / s2,
        gamma2: a2 * a2 / s2,
        gamma3: beta * beta / s2,
    }
}

/// Noise-free channel input `α·x₁ + β·x₂` for antipodal bits `x₁, x₂ ∈ {±1}`.
pub fn layer_symbol(x1: i32, x2: i32, params: &CocktailParams) -> Result<f64> {
    for (name, v) in [("x1", x1), ("x2", x2)] {
        if v != 1 && v != -1 {
            return Err(Error::InvalidParameter(format!("{name} must be +1 or -1, got {v}")));
        }
    }
    Ok(params.alpha * f64::from(x1) + params.beta * f64::from(x2))
}

/// Layered rate, capacity and exact mutual information at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrBreakdown {
    /// `½·I(γ₁) + ½·I(γ₂)`
    pub layer1_bits: f64,
    /// `I(γ₃)`
    pub layer2_bits: f64,
    pub total_bits: f64,
    /// `log₂(1 + γ)`
    pub capacity_bits: f64,
    /// `I(X₁;Y)` with the case index unknown.
    pub exact_layer1_bits: f64,
    /// `I(X;Y)` of the four-point constellation.
    pub exact_total_bits: f64,
    pub snr: f64,
}

impl AdrBreakdown {
    /// Layered rate minus capacity.
    pub fn gap_paper(&self) -> f64 {
        self.total_bits - self.capacity_bits
    }

    /// Exact mutual information minus capacity; never positive beyond
    /// quadrature error.
    pub fn gap_exact(&self) -> f64 {
        self.exact_total_bits - self.capacity_bits
    }
}

pub fn adr_paper(
    params: &CocktailParams,
    noise: NoiseSpec,
    q: &QuadratureConfig,
) -> Result<AdrBreakdown> {
    let d = derive(params, noise);
    let layer1_bits =
        0.5 * mi_binary_antipodal(d.gamma1, q)? + 0.5 * mi_binary_antipodal(d.gamma2, q)?;
    let layer2_bits = mi_binary_antipodal(d.gamma3, q)?;
    let exact = exact_rates(params, noise, q)?;
    Ok(AdrBreakdown {
        layer1_bits,
        layer2_bits,
        total_bits: layer1_bits + layer2_bits,
        capacity_bits: capacity(d.gamma)?,
        exact_layer1_bits: exact.layer1,
        exact_total_bits: exact.total,
        snr: d.gamma,
    })
}

struct ExactRates {
    total: f64,
    layer1: f64,
}

/// `H(Y)` is shared between `I(X;Y) = H(Y) − H(N)` and
/// `I(X₁;Y) = H(Y) − H(Y|X₁)`.
fn exact_rates(
    params: &CocktailParams,
    noise: NoiseSpec,
    q: &QuadratureConfig,
) -> Result<ExactRates> {
    let channel = noise.in_phase();
    let h_y = mixture_entropy(&params.constellation(), channel, q)?.value_bits;
    // Both conditionals (x₁ = ±1) are mirror images, so they share one entropy.
    let h_y_given_x1 = mixture_entropy(&params.layer1_conditional(), channel, q)?.value_bits;
    Ok(ExactRates {
        total: h_y - noise_entropy(channel),
        layer1: h_y - h_y_given_x1,
    })
}

/// Exact `I(X;Y)` of the superposed signal, with no layer decomposition.
pub fn mi_exact_total(
    params: &CocktailParams,
    noise: NoiseSpec,
    q: &QuadratureConfig,
) -> Result<f64> {
    let channel = noise.in_phase();
    let h_y = mixture_entropy(&params.constellation(), channel, q)?.value_bits;
    Ok(h_y - noise_entropy(channel))
}

/// Exact `I(X₁;Y)`: the first layer's information when the second layer is
/// treated as unknown interference.
pub fn mi_exact_layer1(
    params: &CocktailParams,
    noise: NoiseSpec,
    q: &QuadratureConfig,
) -> Result<f64> {
    exact_rates(params, noise, q).map(|r| r.layer1)
}

/// First-order low-SNR excess of the layered rate over capacity,
/// `(β²/σ²)·log₂e`.
pub fn low_snr_gap(params: &CocktailParams, noise: NoiseSpec) -> f64 {
    derive(params, noise).gamma3 * LOG2_E
}

/// First-order low-SNR layer-1 rate, `γ·log₂e`, i.e. the slope of capacity
/// at zero times `γ`.
pub fn low_snr_layer1(params: &CocktailParams, noise: NoiseSpec) -> f64 {
    derive(params, noise).gamma * LOG2_E
}
