//! Entropy, Fisher information and their time-derivatives along the flow.
//!
//! With the sign convention H(μ) = ∫ p log p, the m-th time derivative is
//! taken under the integral:
//!
//! ```text
//! dᵐ/dtᵐ (p log p) = Σ_{j=0}^{m} C(m, j) ∂ₜʲp · ∂ₜ^{m−j} log p
//! ```
//!
//! where ∂ₜʲp is closed form for a mixture and ∂ₜᵏ log p comes from the
//! inverse Faà di Bruno recursion in [`crate::bell`]. Everything is
//! evaluated as `p · (ratio)` with ratios ∂ₜʲp / p computed from component
//! responsibilities, which keeps the tails finite.

pub mod quadrature;

pub use quadrature::{integrate, integrate_many, Estimate, FixedRule, QuadratureConfig, Support};

use serde::{Deserialize, Serialize};

use crate::bell::{log_derivatives_with, Binomials};
use crate::mixture::{t_ratios, FlowedMixture, MixtureSpec};
use crate::{Error, Result, MAX_ORDER};

// integrand layout for flow_integrand
const ENTROPY: usize = 0;
const FISHER: usize = 1;
const FIRST_DERIVATIVE: usize = 2;

/// Everything needed about μ_t at one time, with error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowFunctionals {
    pub t: f64,
    /// H(μ_t) = ∫ p log p.
    pub entropy: Estimate,
    /// I(μ_t) = ∫ (∂ₓp)² / p.
    pub fisher: Estimate,
    /// y = −2H.
    pub y: f64,
    /// ẏ = I.
    pub y_dot: f64,
    /// dᵐH/dtᵐ for m = 1..=order.
    pub entropy_derivatives: Vec<Estimate>,
}

impl FlowFunctionals {
    pub fn order(&self) -> usize {
        self.entropy_derivatives.len()
    }

    pub fn y_error(&self) -> f64 {
        2.0 * self.entropy.error
    }

    /// (ẏ, ẏ′, ..., ẏ^{(M−1)}) with ẏ = I and ẏ^{(k)} = −2 H^{(k+1)}.
    pub fn y_dot_derivatives(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.order());
        out.push(self.y_dot);
        out.extend(
            self.entropy_derivatives
                .iter()
                .skip(1)
                .map(|e| -2.0 * e.value),
        );
        out
    }

    /// Error estimates matching [`Self::y_dot_derivatives`].
    pub fn y_dot_derivative_errors(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.order());
        out.push(self.fisher.error);
        out.extend(
            self.entropy_derivatives
                .iter()
                .skip(1)
                .map(|e| 2.0 * e.error),
        );
        out
    }

    /// N = e^y.
    pub fn entropy_power(&self) -> f64 {
        self.y.exp()
    }

    /// |dH/dt + I/2|.
    pub fn de_bruijn_residual(&self) -> f64 {
        (self.entropy_derivatives[0].value + 0.5 * self.fisher.value).abs()
    }

    /// Combined error estimate of the two sides of de Bruijn's identity.
    pub fn de_bruijn_tolerance(&self) -> f64 {
        self.entropy_derivatives[0].error + 0.5 * self.fisher.error
    }
}

/// Integration domain for μ_t: union of K-sigma windows around each component.
pub fn flow_support(fm: &FlowedMixture, cfg: &QuadratureConfig) -> Result<Support> {
    Support::new(fm.support(cfg.tail_sigma_multiplier), fm.min_std_dev())
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh {
            order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Fills `out[0] = p log p`, `out[1] = p (∂ₓ log p)²` and
/// `out[1 + m] = dᵐ/dtᵐ (p log p)` for m = 1..=order.
fn flow_integrand(
    fm: &FlowedMixture,
    binom: &Binomials<f64>,
    order: usize,
    x: f64,
    out: &mut [f64],
) {
    let terms = fm.local_terms(x);
    let log_p = terms.log_density;
    let p = log_p.exp();
    out[ENTROPY] = p * log_p;

    let score: f64 = terms
        .responsibilities
        .iter()
        .zip(&terms.standardized)
        .zip(&terms.std_devs)
        .map(|((r, z), s)| -r * z / s)
        .sum();
    out[FISHER] = p * score * score;

    if order == 0 {
        return;
    }
    let q = t_ratios(&terms, order);
    let log_derivs = log_derivatives_with(binom, &q, order);
    for m in 1..=order {
        let mut acc = q[m] * log_p + log_derivs[m - 1];
        for j in 1..m {
            acc += binom.get(m, j) * q[j] * log_derivs[m - j - 1];
        }
        out[FIRST_DERIVATIVE + m - 1] = p * acc;
    }
}

fn integrate_flow(
    fm: &FlowedMixture,
    order: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<Estimate>> {
    check_order(order)?;
    let binom = Binomials::<f64>::new(order.max(1));
    let support = flow_support(fm, cfg)?;
    integrate_many(
        |x, out: &mut [f64]| flow_integrand(fm, &binom, order, x, out),
        FIRST_DERIVATIVE + order,
        &support,
        cfg,
    )
    .map_err(|e| match e {
        Error::Quadrature { component, .. } if component >= FIRST_DERIVATIVE => Error::Evaluation {
            order: component - FIRST_DERIVATIVE + 1,
            source: Box::new(e),
        },
        other => other,
    })
}

/// H(μ_t) = ∫ p_t log p_t dx.
pub fn entropy(fm: &FlowedMixture, cfg: &QuadratureConfig) -> Result<Estimate> {
    let support = flow_support(fm, cfg)?;
    integrate(
        |x| {
            let l = fm.log_density(x);
            l.exp() * l
        },
        &support,
        cfg,
    )
}

/// I(μ_t) = ∫ (∂ₓp_t)² / p_t dx.
pub fn fisher_information(fm: &FlowedMixture, cfg: &QuadratureConfig) -> Result<Estimate> {
    let support = flow_support(fm, cfg)?;
    integrate(
        |x| {
            let r = fm.x_derivative_ratios(x, 1).expect("order 1 is supported");
            fm.log_density(x).exp() * r[1] * r[1]
        },
        &support,
        cfg,
    )
}

/// dᵐH/dtᵐ for m = 1..=order, differentiated under the integral.
pub fn entropy_time_derivatives(
    fm: &FlowedMixture,
    order: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<Estimate>> {
    Ok(integrate_flow(fm, order, cfg)?.split_off(FIRST_DERIVATIVE))
}

/// H, I, y, ẏ and dᵐH/dtᵐ (m ≤ order) from one pass of the quadrature.
pub fn flow_functionals(
    fm: &FlowedMixture,
    order: usize,
    cfg: &QuadratureConfig,
) -> Result<FlowFunctionals> {
    if order == 0 {
        return Err(Error::InvalidConfig("order must be at least 1".into()));
    }
    let mut all = integrate_flow(fm, order, cfg)?;
    let entropy_derivatives = all.split_off(FIRST_DERIVATIVE);
    let (entropy, fisher) = (all[ENTROPY], all[FISHER]);
    Ok(FlowFunctionals {
        t: fm.t(),
        entropy,
        fisher,
        y: -2.0 * entropy.value,
        y_dot: fisher.value,
        entropy_derivatives,
    })
}

/// Fixed quadrature rule valid for every μ_t with t in `[t_lo, t_hi]`.
///
/// The domain is the K-sigma window at `t_hi`, panels are half the smallest
/// standard deviation at `t_lo`.
pub fn sampling_rule(
    spec: &MixtureSpec,
    t_lo: f64,
    t_hi: f64,
    cfg: &QuadratureConfig,
) -> Result<FixedRule> {
    let widest = spec.flow(t_hi)?;
    let narrowest = spec.flow(t_lo)?;
    let support = flow_support(&widest, cfg)?;
    Ok(FixedRule::composite(
        &support,
        0.5 * narrowest.min_std_dev(),
    ))
}

/// H(μ_t) through a fixed rule; smooth in t for a fixed `rule`.
pub fn entropy_with_rule(fm: &FlowedMixture, rule: &FixedRule) -> f64 {
    entropy_with_rule_and_magnitude(fm, rule).0
}

/// [`entropy_with_rule`] plus ∫|p log p|, the scale of its roundoff.
pub fn entropy_with_rule_and_magnitude(fm: &FlowedMixture, rule: &FixedRule) -> (f64, f64) {
    rule.apply_with_magnitude(|x| {
        let l = fm.log_density(x);
        l.exp() * l
    })
}
