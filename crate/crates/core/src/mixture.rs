//! One-dimensional Gaussian mixtures and their heat flow.
//!
//! The heat semigroup maps a mixture Σ wᵢ N(mᵢ, vᵢ) to Σ wᵢ N(mᵢ, vᵢ + t),
//! so the density, its x-derivatives (via probabilists' Hermite
//! polynomials) and its t-derivatives (via ∂ₜ = ½∂ₓ²) are all closed form.
//! Evaluation goes through log-sum-exp so far tails do not underflow.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, MAX_ORDER};

/// Highest x-derivative order available from [`FlowedMixture`].
pub const MAX_X_ORDER: usize = 2 * MAX_ORDER + 2;

/// Highest t-derivative order available from [`FlowedMixture`].
pub const MAX_T_ORDER: usize = MAX_ORDER + 1;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl Component {
    pub fn new(weight: f64, mean: f64, variance: f64) -> Self {
        Self {
            weight,
            mean,
            variance,
        }
    }
}

/// A finite Gaussian mixture on ℝ with normalized weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture", into = "RawMixture")]
pub struct MixtureSpec {
    components: Vec<Component>,
}

#[derive(Serialize, Deserialize)]
struct RawMixture {
    components: Vec<Component>,
}

impl TryFrom<RawMixture> for MixtureSpec {
    type Error = Error;

    // Serialized specs are already normalized; renormalizing would move the
    // last bit and break round trips.
    fn try_from(raw: RawMixture) -> Result<Self> {
        validate_components(&raw.components)?;
        if (weight_sum(&raw.components) - 1.0).abs() <= 1e-12 {
            Ok(Self {
                components: raw.components,
            })
        } else {
            MixtureSpec::new(raw.components)
        }
    }
}

impl From<MixtureSpec> for RawMixture {
    fn from(spec: MixtureSpec) -> Self {
        RawMixture {
            components: spec.components,
        }
    }
}

/// First two moments of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl MixtureSpec {
    /// Validates the components and rescales weights to sum to one.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        validate_components(&components)?;
        let total = weight_sum(&components);
        let components = components
            .into_iter()
            .map(|c| Component {
                weight: c.weight / total,
                ..c
            })
            .collect();
        Ok(Self { components })
    }

    /// N(mean, variance).
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![Component::new(1.0, mean, variance)])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn moments(&self) -> Moments {
        let mean: f64 = self.components.iter().map(|c| c.weight * c.mean).sum();
        let second: f64 = self
            .components
            .iter()
            .map(|c| c.weight * (c.variance + (c.mean - mean).powi(2)))
            .sum();
        Moments {
            mean,
            variance: second,
        }
    }

    pub fn min_variance(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.variance)
            .fold(f64::INFINITY, f64::min)
    }

    /// μ_t for `t >= 0`.
    pub fn flow(&self, t: f64) -> Result<FlowedMixture> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("flow time must be >= 0, got {t}")));
        }
        Ok(FlowedMixture {
            spec: self.clone(),
            t,
        })
    }
}

fn validate_components(components: &[Component]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::InvalidMixture("no components".into()));
    }
    for (index, c) in components.iter().enumerate() {
        let reason = if !(c.weight.is_finite() && c.weight > 0.0) {
            Some(format!(
                "weight must be positive and finite, got {}",
                c.weight
            ))
        } else if !c.mean.is_finite() {
            Some(format!("mean must be finite, got {}", c.mean))
        } else if !(c.variance.is_finite() && c.variance > 0.0) {
            Some(format!(
                "variance must be positive and finite, got {}",
                c.variance
            ))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidComponent { index, reason });
        }
    }
    Ok(())
}

/// Sum of the raw weights, before normalization.
pub fn weight_sum(components: &[Component]) -> f64 {
    components.iter().map(|c| c.weight).sum()
}

/// He₀(z), ..., He_n(z) via He_{k+1} = z He_k − k He_{k−1}.
pub fn hermite_polynomials(z: f64, n: usize) -> Vec<f64> {
    let mut he = Vec::with_capacity(n + 1);
    he.push(1.0);
    if n >= 1 {
        he.push(z);
    }
    for k in 1..n {
        let next = z * he[k] - k as f64 * he[k - 1];
        he.push(next);
    }
    he
}

/// μ_t: the mixture with every component variance shifted by `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowedMixture {
    spec: MixtureSpec,
    t: f64,
}

/// Per-point component data shared by density and derivative evaluation.
#[derive(Debug, Clone)]
pub struct LocalTerms {
    pub log_density: f64,
    /// wᵢ φᵢ(x) / p(x)
    pub responsibilities: Vec<f64>,
    /// (x − mᵢ) / sᵢ
    pub standardized: Vec<f64>,
    /// sᵢ = √(vᵢ + t)
    pub std_devs: Vec<f64>,
}

impl FlowedMixture {
    pub fn spec(&self) -> &MixtureSpec {
        &self.spec
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Component variances at time t.
    pub fn component_variances(&self) -> impl Iterator<Item = f64> + '_ {
        self.spec
            .components
            .iter()
            .map(move |c| c.variance + self.t)
    }

    /// σ_t² = Var(μ₀) + t.
    pub fn total_variance(&self) -> f64 {
        self.spec.moments().variance + self.t
    }

    /// μ_t as a fresh initial mixture (variances vᵢ + t).
    pub fn rebased(&self) -> MixtureSpec {
        MixtureSpec {
            components: self
                .spec
                .components
                .iter()
                .map(|c| Component {
                    variance: c.variance + self.t,
                    ..*c
                })
                .collect(),
        }
    }

    /// Merged intervals [mᵢ − K sᵢ, mᵢ + K sᵢ].
    pub fn support(&self, sigma_multiplier: f64) -> Vec<(f64, f64)> {
        let intervals = self
            .spec
            .components
            .iter()
            .map(|c| {
                let s = (c.variance + self.t).sqrt();
                (c.mean - sigma_multiplier * s, c.mean + sigma_multiplier * s)
            })
            .collect();
        merge_intervals(intervals)
    }

    pub fn min_std_dev(&self) -> f64 {
        (self.spec.min_variance() + self.t).sqrt()
    }

    pub fn local_terms(&self, x: f64) -> LocalTerms {
        let n = self.spec.components.len();
        let mut log_terms = Vec::with_capacity(n);
        let mut standardized = Vec::with_capacity(n);
        let mut std_devs = Vec::with_capacity(n);
        for c in &self.spec.components {
            let s = (c.variance + self.t).sqrt();
            let z = (x - c.mean) / s;
            log_terms.push(c.weight.ln() - 0.5 * z * z - s.ln() - LN_SQRT_2PI);
            standardized.push(z);
            std_devs.push(s);
        }
        let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_terms.iter().map(|l| (l - max).exp()).sum();
        let log_density = max + sum.ln();
        let responsibilities = log_terms.iter().map(|l| (l - log_density).exp()).collect();
        LocalTerms {
            log_density,
            responsibilities,
            standardized,
            std_devs,
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        self.local_terms(x).log_density
    }

    /// p_t(x) = Σ wᵢ φ(x; mᵢ, vᵢ + t).
    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// ∂ₓⁿ p_t / p_t for n = 0..=n_max.
    pub fn x_derivative_ratios(&self, x: f64, n_max: usize) -> Result<Vec<f64>> {
        check_order(n_max, MAX_X_ORDER)?;
        let terms = self.local_terms(x);
        Ok(x_ratios(&terms, n_max))
    }

    /// ∂ₜᵏ p_t / p_t for k = 0..=k_max.
    pub fn t_derivative_ratios(&self, x: f64, k_max: usize) -> Result<Vec<f64>> {
        check_order(k_max, MAX_T_ORDER)?;
        let terms = self.local_terms(x);
        Ok(t_ratios(&terms, k_max))
    }

    /// ∂ₓⁿ p_t(x) from ∂ₓⁿφ(x; m, s²) = (−1)ⁿ s⁻ⁿ He_n((x − m)/s) φ.
    pub fn density_x_derivative(&self, x: f64, n: usize) -> Result<f64> {
        check_order(n, MAX_X_ORDER)?;
        let terms = self.local_terms(x);
        Ok(terms.log_density.exp() * x_ratios(&terms, n)[n])
    }

    /// ∂ₜᵏ p_t(x) = 2⁻ᵏ ∂ₓ²ᵏ p_t(x).
    pub fn density_t_derivative(&self, x: f64, k: usize) -> Result<f64> {
        check_order(k, MAX_T_ORDER)?;
        let terms = self.local_terms(x);
        Ok(terms.log_density.exp() * t_ratios(&terms, k)[k])
    }
}

fn check_order(order: usize, max: usize) -> Result<()> {
    if order > max {
        return Err(Error::OrderTooHigh { order, max });
    }
    Ok(())
}

fn x_ratios(terms: &LocalTerms, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    for ((&r, &z), &s) in terms
        .responsibilities
        .iter()
        .zip(&terms.standardized)
        .zip(&terms.std_devs)
    {
        let he = hermite_polynomials(z, n_max);
        let mut scale = r;
        for (n, h) in he.iter().enumerate() {
            out[n] += scale * h;
            scale *= -1.0 / s;
        }
    }
    out
}

pub(crate) fn t_ratios(terms: &LocalTerms, k_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    for ((&r, &z), &s) in terms
        .responsibilities
        .iter()
        .zip(&terms.standardized)
        .zip(&terms.std_devs)
    {
        let he = hermite_polynomials(z, 2 * k_max);
        let step = 1.0 / (2.0 * s * s);
        let mut scale = r;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot += scale * he[2 * k];
            scale *= step;
        }
    }
    out
}

fn merge_intervals(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (lo, hi) in intervals {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// Gaussian density φ(x; mean, variance).
pub fn gaussian_density(x: f64, mean: f64, variance: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}
