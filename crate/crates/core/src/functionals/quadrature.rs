//! Adaptive composite Gauss–Legendre quadrature over bounded supports.
//!
//! Each panel is integrated twice: once with the base rule on the whole
//! panel, once with the base rule on each half. The half-panel result is
//! kept and the difference is the panel's error estimate. Panels with the
//! largest error share are bisected until every integrand component meets
//! `max(abs_tol, rel_tol·|I|)` or the panel budget runs out.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nodes per panel of the base rule.
pub const BASE_RULE_POINTS: usize = 20;

/// Estimates below this many ulps of ∫|f| are treated as converged.
const ROUNDOFF_ULPS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    pub tail_sigma_multiplier: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_panels: 4096,
            tail_sigma_multiplier: 12.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.abs_tol) || !positive(self.rel_tol) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive (abs_tol = {}, rel_tol = {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_panels < 8 {
            return Err(Error::InvalidConfig(format!(
                "max_panels must be at least 8, got {}",
                self.max_panels
            )));
        }
        if self.tail_sigma_multiplier.is_nan() || self.tail_sigma_multiplier < 6.0 {
            return Err(Error::InvalidConfig(format!(
                "tail_sigma_multiplier must be at least 6, got {}",
                self.tail_sigma_multiplier
            )));
        }
        Ok(())
    }
}

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integration domain: disjoint intervals plus a length scale used to size
/// the initial panels.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    intervals: Vec<(f64, f64)>,
    resolution: f64,
}

impl Support {
    pub fn new(intervals: Vec<(f64, f64)>, resolution: f64) -> Result<Self> {
        if intervals.is_empty()
            || intervals
                .iter()
                .any(|&(a, b)| !a.is_finite() || !b.is_finite() || a >= b)
        {
            return Err(Error::InvalidConfig(
                "support needs finite intervals with lo < hi".into(),
            ));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "support resolution must be positive, got {resolution}"
            )));
        }
        Ok(Self {
            intervals,
            resolution,
        })
    }

    /// [center − K·spread, center + K·spread] with K from `cfg`.
    pub fn from_hint(center: f64, spread: f64, cfg: &QuadratureConfig) -> Result<Self> {
        let k = cfg.tail_sigma_multiplier;
        Self::new(vec![(center - k * spread, center + k * spread)], spread)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    fn initial_panels(&self, budget: usize) -> Vec<(f64, f64)> {
        let mut panels = Vec::new();
        let per_budget = (budget / (4 * self.intervals.len())).max(1);
        for &(a, b) in &self.intervals {
            let count = (((b - a) / self.resolution).ceil() as usize).clamp(1, per_budget);
            let width = (b - a) / count as f64;
            for i in 0..count {
                let lo = a + i as f64 * width;
                let hi = if i + 1 == count { b } else { lo + width };
                panels.push((lo, hi));
            }
        }
        panels
    }
}

/// n-point Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn base_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(BASE_RULE_POINTS))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

struct PanelResult {
    lo: f64,
    hi: f64,
    // base rule on the whole panel
    coarse: Vec<f64>,
    // base rule on each half
    left: Vec<f64>,
    right: Vec<f64>,
    left_abs: Vec<f64>,
    right_abs: Vec<f64>,
}

impl PanelResult {
    fn fine(&self, c: usize) -> f64 {
        self.left[c] + self.right[c]
    }

    fn error(&self, c: usize) -> f64 {
        (self.fine(c) - self.coarse[c]).abs()
    }

    fn abs_integral(&self, c: usize) -> f64 {
        self.left_abs[c] + self.right_abs[c]
    }
}

fn apply_rule<F>(f: &F, dim: usize, lo: f64, hi: f64, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [f64]),
{
    let (nodes, weights) = base_rule();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut sums = vec![CompensatedSum::default(); dim];
    let mut abs = vec![0.0; dim];
    for (x, w) in nodes.iter().zip(weights) {
        f(mid + half * x, buf);
        for c in 0..dim {
            let v = w * buf[c];
            sums[c].add(v);
            abs[c] += v.abs();
        }
    }
    (
        sums.iter().map(|s| s.value() * half).collect(),
        abs.iter().map(|a| a * half).collect(),
    )
}

fn evaluate_panel<F>(
    f: &F,
    dim: usize,
    lo: f64,
    hi: f64,
    coarse: Option<Vec<f64>>,
    buf: &mut [f64],
) -> PanelResult
where
    F: Fn(f64, &mut [f64]),
{
    let coarse = coarse.unwrap_or_else(|| apply_rule(f, dim, lo, hi, buf).0);
    let mid = 0.5 * (lo + hi);
    let (left, left_abs) = apply_rule(f, dim, lo, mid, buf);
    let (right, right_abs) = apply_rule(f, dim, mid, hi, buf);
    PanelResult {
        lo,
        hi,
        coarse,
        left,
        right,
        left_abs,
        right_abs,
    }
}

/// Integrates a scalar function over `support`.
pub fn integrate<F>(f: F, support: &Support, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    let out = integrate_many(|x, buf: &mut [f64]| buf[0] = f(x), 1, support, cfg)?;
    Ok(out[0])
}

/// Integrates a vector-valued integrand; `f(x, out)` fills `out[..dim]`.
/// Every component must meet its own tolerance.
pub fn integrate_many<F>(
    f: F,
    dim: usize,
    support: &Support,
    cfg: &QuadratureConfig,
) -> Result<Vec<Estimate>>
where
    F: Fn(f64, &mut [f64]),
{
    cfg.validate()?;
    let mut buf = vec![0.0; dim];
    let mut panels: Vec<PanelResult> = support
        .initial_panels(cfg.max_panels)
        .into_iter()
        .map(|(lo, hi)| evaluate_panel(&f, dim, lo, hi, None, &mut buf))
        .collect();

    loop {
        let mut totals = vec![CompensatedSum::default(); dim];
        let mut errors = vec![0.0; dim];
        let mut abs_totals = vec![0.0; dim];
        for p in &panels {
            for c in 0..dim {
                totals[c].add(p.fine(c));
                errors[c] += p.error(c);
                abs_totals[c] += p.abs_integral(c);
            }
        }
        let values: Vec<f64> = totals.iter().map(CompensatedSum::value).collect();
        let tolerances: Vec<f64> = (0..dim)
            .map(|c| {
                cfg.abs_tol
                    .max(cfg.rel_tol * values[c].abs())
                    .max(ROUNDOFF_ULPS * f64::EPSILON * abs_totals[c])
            })
            .collect();
        let estimates = || {
            (0..dim)
                .map(|c| Estimate {
                    value: values[c],
                    error: errors[c] + ROUNDOFF_ULPS * f64::EPSILON * abs_totals[c],
                })
                .collect::<Vec<_>>()
        };
        if (0..dim).all(|c| errors[c] <= tolerances[c]) {
            return Ok(estimates());
        }
        if !errors.iter().chain(&values).all(|v| v.is_finite()) {
            return Err(Error::Quadrature {
                component: 0,
                best: values[0],
                error_estimate: f64::INFINITY,
                panels: panels.len(),
            });
        }

        let share = |p: &PanelResult| {
            (0..dim)
                .map(|c| p.error(c) / tolerances[c])
                .fold(0.0, f64::max)
        };
        let worst = panels.iter().map(share).fold(0.0, f64::max);
        let threshold = worst / 8.0;
        let (split, keep): (Vec<PanelResult>, Vec<PanelResult>) =
            panels.into_iter().partition(|p| share(p) >= threshold);
        if keep.len() + 2 * split.len() > cfg.max_panels {
            let worst_c = (0..dim)
                .max_by(|&a, &b| {
                    (errors[a] / tolerances[a]).total_cmp(&(errors[b] / tolerances[b]))
                })
                .unwrap_or(0);
            return Err(Error::Quadrature {
                component: worst_c,
                best: values[worst_c],
                error_estimate: errors[worst_c],
                panels: keep.len() + split.len(),
            });
        }
        panels = keep;
        for p in split {
            let mid = 0.5 * (p.lo + p.hi);
            panels.push(evaluate_panel(&f, dim, p.lo, mid, Some(p.left), &mut buf));
            panels.push(evaluate_panel(&f, dim, mid, p.hi, Some(p.right), &mut buf));
        }
        panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    }
}

/// Non-adaptive composite Gauss–Legendre rule. The node set does not
/// depend on the integrand, so results vary smoothly with parameters of
/// the integrand; used when sampling functionals for differentiation.
#[derive(Debug, Clone)]
pub struct FixedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FixedRule {
    /// Splits each interval of `support` into panels no wider than
    /// `max_panel_width`.
    pub fn composite(support: &Support, max_panel_width: f64) -> Self {
        let (ref_nodes, ref_weights) = base_rule();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for &(a, b) in support.intervals() {
            let count = ((b - a) / max_panel_width).ceil().max(1.0) as usize;
            let width = (b - a) / count as f64;
            for i in 0..count {
                let mid = a + (i as f64 + 0.5) * width;
                for (x, w) in ref_nodes.iter().zip(ref_weights) {
                    nodes.push(mid + 0.5 * width * x);
                    weights.push(0.5 * width * w);
                }
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.apply_with_magnitude(f).0
    }

    /// Σ wᵢ f(xᵢ) together with Σ wᵢ |f(xᵢ)|.
    pub fn apply_with_magnitude(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let mut sum = CompensatedSum::default();
        let mut magnitude = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = w * f(*x);
            sum.add(v);
            magnitude += v.abs();
        }
        (sum.value(), magnitude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }

    fn standard_support() -> Support {
        Support::from_hint(0.0, 1.0, &QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(BASE_RULE_POINTS);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^38 over [−1, 1] = 2/39
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((v - 2.0 / 39.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_mass_and_second_moment() {
        let cfg = QuadratureConfig::default();
        let r = integrate(phi, &standard_support(), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.error < 1e-11);
        let r = integrate(|x| x * x * phi(x), &standard_support(), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_entropy_integral() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| phi(x) * phi(x).ln(), &standard_support(), &cfg).unwrap();
        let exact = -0.5 * (2.0 * PI).ln() - 0.5;
        assert!((r.value - exact).abs() < 1e-12);
        assert!((exact - (-1.418_938_533_204_672_7)).abs() < 1e-15);
    }

    #[test]
    fn refines_a_sharp_peak() {
        let cfg = QuadratureConfig::default();
        let support = Support::new(vec![(-1.0, 1.0)], 1.0).unwrap();
        let width = 1e-3;
        let r = integrate(|x| width / (PI * (x * x + width * width)), &support, &cfg).unwrap();
        let exact = 2.0 / PI * (1.0 / width).atan();
        assert!((r.value - exact).abs() < 1e-10, "{} vs {}", r.value, exact);
    }

    #[test]
    fn reports_failure_when_budget_is_too_small() {
        let cfg = QuadratureConfig {
            max_panels: 8,
            ..QuadratureConfig::default()
        };
        let support = Support::new(vec![(0.0, 1.0)], 1.0).unwrap();
        let err = integrate(|x| 1.0 / (x + 1e-9).sqrt(), &support, &cfg).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn config_validation() {
        let bad = QuadratureConfig {
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig {
            tail_sigma_multiplier: 3.0,
            ..QuadratureConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig {
            max_panels: 4,
            ..QuadratureConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(Support::new(vec![(1.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn fixed_rule_matches_adaptive() {
        let rule = FixedRule::composite(&standard_support(), 0.5);
        assert_eq!(rule.len(), 48 * BASE_RULE_POINTS);
        assert!((rule.apply(|x| x * x * phi(x)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vector_integrand_meets_each_tolerance() {
        let cfg = QuadratureConfig::default();
        let out = integrate_many(
            |x, buf: &mut [f64]| {
                buf[0] = phi(x);
                buf[1] = 1e6 * x.powi(4) * phi(x);
            },
            2,
            &standard_support(),
            &cfg,
        )
        .unwrap();
        assert!((out[0].value - 1.0).abs() < 1e-12);
        assert!((out[1].value - 3e6).abs() < 3e6 * 1e-10);
    }
}
