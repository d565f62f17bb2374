//! Numerical differentiation in t, kept independent of the analytic
//! pipeline so it can serve as a cross-check.
//!
//! Two methods: a Chebyshev interpolant on second-kind points
//! differentiated through the coefficient recurrence, and central
//! differences with Richardson extrapolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

/// Fraction of the interval cut from each side when evaluating derivatives.
pub const TRUSTED_MARGIN: f64 = 0.2;

/// Coefficient tail (relative to the largest coefficient) below which an
/// interpolant counts as resolved.
pub const TAIL_THRESHOLD: f64 = 1e-12;

/// Largest Chebyshev degree fitted.
pub const MAX_DEGREE: usize = 128;

/// Closed interval [lo, hi] with 0 <= lo < hi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::Domain(format!(
                "interval must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Central part where derivatives are trusted.
    pub fn trusted(&self) -> (f64, f64) {
        let cut = TRUSTED_MARGIN * (self.hi - self.lo);
        (self.lo + cut, self.hi - cut)
    }

    fn to_unit(self, t: f64) -> f64 {
        (t - self.center()) / self.half_width()
    }

    /// Bernstein ellipse parameter ρ for a singularity on the real axis at
    /// `center − distance`.
    pub fn bernstein_rho(&self, singularity: f64) -> f64 {
        let u = ((self.center() - singularity) / self.half_width()).abs();
        if u <= 1.0 {
            1.0
        } else {
            u + (u * u - 1.0).sqrt()
        }
    }
}

/// Picks an interval containing `t` in its trusted region, as wide as the
/// distance to the nearest singularity allows. `singularity` is the
/// closest non-analytic point of the sampled function (below `t`).
pub fn interval_around(t: f64, singularity: f64) -> Result<Interval> {
    if !(t.is_finite() && t > 0.0) || singularity >= t {
        return Err(Error::Domain(format!(
            "need t > 0 above the singularity, got t = {t}, singularity = {singularity}"
        )));
    }
    // widest placement: t sits at 25% of an interval starting near 0
    let lo = 0.02 * t;
    let wide = Interval::new(lo, lo + (t - lo) / 0.25)?;
    if wide.bernstein_rho(singularity) >= 4.5 {
        return Ok(wide);
    }
    // otherwise centre on t with |center − singularity| / h = 3
    let h = ((t - singularity) / 3.0).min(0.98 * t);
    Interval::new(t - h, t + h)
}

/// Degree needed for coefficients to decay below 1e−17 at the given ρ,
/// never below 2m + 8.
pub fn suggested_degree(rho: f64, order: usize) -> usize {
    let floor = 2 * order + 8;
    if rho <= 1.0 {
        return MAX_DEGREE;
    }
    let needed = (39.0 / rho.ln()).ceil() as usize;
    needed.clamp(floor, MAX_DEGREE)
}

/// Chebyshev interpolant of sampled values on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub interval: Interval,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// f(t) = Σ_k c_k T_k(x(t))
    pub coefficients: Vec<f64>,
    /// Absolute noise assumed on each sample.
    pub noise_level: f64,
}

/// A spectral derivative with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// false when the coefficient tail test failed
    pub resolved: bool,
}

fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|j| (j as f64 * PI / n as f64).cos()).collect()
}

/// Coefficients of the interpolant through values at cos(jπ/n).
fn interpolation_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    (0..=n)
        .map(|k| {
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                acc += w * v * ((j * k) as f64 * PI / n as f64).cos();
            }
            let c = 2.0 * acc / n as f64;
            if k == 0 || k == n {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// Coefficients of d/dx Σ c_k T_k(x).
fn derivative_coefficients(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    if n == 0 {
        return vec![0.0];
    }
    let mut b = vec![0.0; n + 2];
    for k in (1..=n).rev() {
        b[k - 1] = b[k + 1] + 2.0 * k as f64 * c[k];
    }
    b[0] *= 0.5;
    b.truncate(n);
    b
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}

fn nth_derivative_at(c: &[f64], order: usize, x: f64) -> f64 {
    let mut d = c.to_vec();
    for _ in 0..order {
        d = derivative_coefficients(&d);
    }
    clenshaw(&d, x)
}

/// Samples `f` at the degree + 1 Chebyshev points of `interval`.
pub fn chebyshev_fit<F>(f: F, interval: Interval, degree: usize) -> Result<SampledCurve>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::InvalidConfig(format!(
            "Chebyshev degree must be in 1..={MAX_DEGREE}, got {degree}"
        )));
    }
    let nodes = chebyshev_points(interval, degree);
    let values = nodes
        .par_iter()
        .map(|&t| match f(t) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(Error::Sample {
                t,
                message: format!("non-finite value {v}"),
            }),
            Err(e) => Err(Error::Sample {
                t,
                message: e.to_string(),
            }),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampledCurve::from_samples(interval, nodes, values))
}

/// The degree + 1 second-kind Chebyshev points of `interval`, from `hi`
/// down to `lo`.
pub fn chebyshev_points(interval: Interval, degree: usize) -> Vec<f64> {
    chebyshev_nodes(degree)
        .into_iter()
        .map(|x| interval.center() + interval.half_width() * x)
        .collect()
}

/// [`chebyshev_fit`], refitted once at twice the degree if the
/// coefficient tail is not resolved.
pub fn chebyshev_fit_adaptive<F>(f: F, interval: Interval, degree: usize) -> Result<SampledCurve>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let curve = chebyshev_fit(&f, interval, degree)?;
    if curve.is_resolved() || 2 * degree > MAX_DEGREE {
        return Ok(curve);
    }
    chebyshev_fit(&f, interval, 2 * degree)
}

impl SampledCurve {
    /// Builds the interpolant from values already sampled at
    /// [`chebyshev_points`]`(interval, values.len() - 1)`.
    pub fn from_node_values(interval: Interval, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.len() > MAX_DEGREE + 1 {
            return Err(Error::InputShape(format!(
                "need 2..={} node values, got {}",
                MAX_DEGREE + 1,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample {v}")));
        }
        let nodes = chebyshev_points(interval, values.len() - 1);
        Ok(Self::from_samples(interval, nodes, values))
    }

    fn from_samples(interval: Interval, nodes: Vec<f64>, values: Vec<f64>) -> Self {
        let coefficients = interpolation_coefficients(&values);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            interval,
            nodes,
            values,
            coefficients,
            noise_level: 8.0 * f64::EPSILON * scale,
        }
    }

    pub fn with_noise_level(mut self, noise_level: f64) -> Self {
        self.noise_level = noise_level;
        self
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        clenshaw(&self.coefficients, self.interval.to_unit(t))
    }

    /// Largest of the last three coefficients relative to the largest one.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max == 0.0 {
            return 0.0;
        }
        let tail = self
            .coefficients
            .iter()
            .rev()
            .take(3)
            .fold(0.0f64, |m, c| m.max(c.abs()));
        tail / max
    }

    pub fn is_resolved(&self) -> bool {
        self.tail_ratio() <= TAIL_THRESHOLD
    }

    /// Number of leading coefficients above the noise level. Later ones
    /// are noise and are dropped before differentiating.
    pub fn kept_len(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|c| c.abs() > self.noise_level)
            .map_or(1, |k| k + 1)
    }
}

/// |T_k^{(m)}(x)|
fn basis_derivative(k: usize, order: usize, x: f64) -> f64 {
    let mut unit = vec![0.0; k + 1];
    unit[k] = 1.0;
    nth_derivative_at(&unit, order, x).abs()
}

/// m-th derivative of the interpolant at `t`, restricted to the trusted
/// central part of the interval. Coefficients after the last one above
/// the curve's noise level are dropped first.
pub fn spectral_derivative(curve: &SampledCurve, order: usize, t: f64) -> Result<SpectralEstimate> {
    let (lo, hi) = curve.interval.trusted();
    if !(t >= lo && t <= hi) {
        return Err(Error::OutsideTrustedRegion { t, lo, hi });
    }
    let n = curve.degree();
    if 2 * order > n {
        return Err(Error::OrderTooHigh { order, max: n / 2 });
    }
    let x = curve.interval.to_unit(t);
    let scale = curve.interval.half_width().powi(-(order as i32));
    let c = &curve.coefficients;
    let kept = curve.kept_len();
    let value = scale * nth_derivative_at(&c[..kept], order, x);

    // a coefficient moves by at most 2× the per-sample noise
    let noise: f64 = 2.0
        * scale
        * curve.noise_level
        * (0..kept)
            .map(|k| basis_derivative(k, order, x))
            .sum::<f64>();
    let truncation = if kept <= n {
        // dropped terms continue the observed geometric decay below the noise level
        let peak = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let last = c[kept - 1].abs();
        let rate = if kept > 1 && peak > 0.0 {
            (last / peak).powf(1.0 / (kept - 1) as f64).min(0.9)
        } else {
            0.9
        };
        scale
            * curve.noise_level
            * (kept..=n)
                .map(|k| rate.powi((k - kept + 1) as i32) * basis_derivative(k, order, x))
                .sum::<f64>()
    } else {
        // unresolved: contribution of the top quarter of the series
        let cut = n - n / 4;
        let mut tail = vec![0.0; n + 1];
        tail[cut..].copy_from_slice(&c[cut..]);
        scale * nth_derivative_at(&tail, order, x).abs()
    };

    Ok(SpectralEstimate {
        value,
        error_estimate: truncation + noise,
        resolved: curve.is_resolved(),
    })
}

/// Derivative estimate with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

fn central_difference<F>(f: &F, order: usize, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=order {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(t + (order as f64 / 2.0 - j as f64) * h)?;
        binom = binom * (order - j) as f64 / (j + 1) as f64;
    }
    Ok(acc / h.powi(order as i32))
}

/// Central differences at h₀, h₀/2, h₀/4 with two Richardson steps.
pub fn richardson_derivative<F>(f: F, order: usize, t: f64, h0: f64) -> Result<RichardsonEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    if order == 0 || order > 4 {
        return Err(Error::OrderTooHigh { order, max: 4 });
    }
    if h0.is_nan() || h0 <= 0.0 || t - order as f64 * h0 <= 0.0 {
        return Err(Error::Domain(format!(
            "need h0 > 0 and t − m·h0 > 0, got t = {t}, h0 = {h0}, m = {order}"
        )));
    }
    let smallest = h0 / 4.0;
    if t + smallest == t || smallest < 1e3 * f64::EPSILON * t.abs().max(1.0) {
        return Err(Error::Accuracy(format!(
            "step {smallest:e} underflows at t = {t}"
        )));
    }
    let d: Vec<f64> = [h0, h0 / 2.0, h0 / 4.0]
        .iter()
        .map(|&h| central_difference(&f, order, t, h))
        .collect::<Result<_>>()?;
    let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
    let r2 = (16.0 * r1[1] - r1[0]) / 15.0;
    let error_estimate = (r2 - r1[1]).abs();
    if !r2.is_finite() || !error_estimate.is_finite() || error_estimate > 1e3 * r2.abs().max(1.0) {
        return Err(Error::Accuracy(format!(
            "Richardson table diverged at t = {t} (levels {d:?})"
        )));
    }
    Ok(RichardsonEstimate {
        value: r2,
        error_estimate,
    })
}
