//! Complete exponential Bell polynomials and the identities built on them.
//!
//! `B_n(X₁, ..., X_n)` is evaluated through the recurrence
//!
//! ```text
//! B₀ = 1,   B_{n+1} = Σ_{i=0}^{n} C(n, i) B_{n−i} X_{i+1}
//! ```
//!
//! with binomials taken from a big-integer Pascal triangle. Everything is
//! generic over [`Scalar`], which is implemented for `f64` (numeric
//! pipeline) and `BigRational` (exact identity checks). A brute-force
//! set-partition enumeration ([`bell_partition_oracle`]) is kept as an
//! independent reference for tests.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest n accepted by [`bell_partition_oracle`].
pub const PARTITION_ORACLE_GUARD: usize = 12;

/// Field-like scalar the Bell machinery runs on.
pub trait Scalar: Num + Neg<Output = Self> + Clone + PartialOrd + Debug {
    fn from_biguint(n: &BigUint) -> Self;

    /// Slack allowed when a margin is compared against zero.
    fn margin_tolerance() -> Self;

    fn from_u64(n: u64) -> Self {
        Self::from_biguint(&BigUint::from(n))
    }
}

impl Scalar for f64 {
    fn from_biguint(n: &BigUint) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }

    fn margin_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for BigRational {
    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }

    fn margin_tolerance() -> Self {
        BigRational::zero()
    }
}

/// Rows `0..=n` of Pascal's triangle, exact.
pub fn pascal_triangle(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigUint::one()]);
    for r in 1..=n {
        let prev = &rows[r - 1];
        let mut row = Vec::with_capacity(r + 1);
        row.push(BigUint::one());
        for k in 1..r {
            row.push(&prev[k - 1] + &prev[k]);
        }
        row.push(BigUint::one());
        rows.push(row);
    }
    rows
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Binomial coefficients converted once into the scalar type, so hot
/// loops do not touch big integers.
#[derive(Debug, Clone)]
pub struct Binomials<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> Binomials<T> {
    pub fn new(n: usize) -> Self {
        let rows = pascal_triangle(n)
            .iter()
            .map(|row| row.iter().map(T::from_biguint).collect())
            .collect();
        Self { rows }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// C(n, k). Panics if `n` exceeds the table.
    pub fn get(&self, n: usize, k: usize) -> &T {
        &self.rows[n][k]
    }
}

/// Sequence X₁..X_n. Indexing through [`RealSequence::get`] is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealSequence<T> {
    values: Vec<T>,
}

impl<T: Scalar> RealSequence<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// X_k for `1 <= k <= len`.
    pub fn get(&self, k: usize) -> Option<&T> {
        k.checked_sub(1).and_then(|i| self.values.get(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }
}

impl<T: Scalar> From<Vec<T>> for RealSequence<T> {
    fn from(values: Vec<T>) -> Self {
        Self::new(values)
    }
}

/// Y_k = (−1)^k · ẏ^{(k−1)}, built only by [`sign_flip`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignFlippedSequence<T> {
    values: Vec<T>,
}

impl<T: Scalar> SignFlippedSequence<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Y_k for `1 <= k <= len`.
    pub fn get(&self, k: usize) -> Option<&T> {
        k.checked_sub(1).and_then(|i| self.values.get(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// The derivative list this sequence was flipped from.
    pub fn source_derivatives(&self) -> Vec<T> {
        alternate_signs(&self.values)
    }

    pub fn to_sequence(&self) -> RealSequence<T> {
        RealSequence::new(self.values.clone())
    }
}

fn alternate_signs<T: Scalar>(values: &[T]) -> Vec<T> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { -v.clone() } else { v.clone() })
        .collect()
}

fn check_len(len: usize, n: usize, what: &str) -> Result<()> {
    if n > len {
        return Err(Error::InputShape(format!(
            "{what} needs {n} arguments but the sequence has {len}"
        )));
    }
    Ok(())
}

/// `[B₀, B₁, ..., B_{n_max}]` of `seq`.
pub fn bell_complete_all<T: Scalar>(seq: &RealSequence<T>, n_max: usize) -> Result<Vec<T>> {
    check_len(seq.len(), n_max, "bell_complete_all")?;
    let binom = Binomials::new(n_max.saturating_sub(1));
    Ok(bell_complete_with(&binom, seq.as_slice(), n_max))
}

/// Recurrence core. `binom` must cover rows up to `n_max − 1` and `x`
/// must hold at least `n_max` entries.
pub fn bell_complete_with<T: Scalar>(binom: &Binomials<T>, x: &[T], n_max: usize) -> Vec<T> {
    let mut b = Vec::with_capacity(n_max + 1);
    b.push(T::one());
    for n in 0..n_max {
        let mut acc = T::zero();
        for i in 0..=n {
            acc = acc + binom.get(n, i).clone() * b[n - i].clone() * x[i].clone();
        }
        b.push(acc);
    }
    b
}

/// B_n as a sum over all set partitions of {1..n} of Π_blocks X_{|block|}.
///
/// Enumerates restricted growth strings; exponential in `n`, test use only.
pub fn bell_partition_oracle<T: Scalar>(seq: &RealSequence<T>, n: usize) -> Result<T> {
    if n > PARTITION_ORACLE_GUARD {
        return Err(Error::EnumerationGuard {
            n,
            guard: PARTITION_ORACLE_GUARD,
        });
    }
    check_len(seq.len(), n, "bell_partition_oracle")?;
    if n == 0 {
        return Ok(T::one());
    }
    let x = seq.as_slice();
    // rgs[i] is the block of element i; prefix_max[i] = max(rgs[0..=i]).
    // Partitions are tallied by their sorted block sizes and the products
    // formed once per size pattern.
    let mut rgs = vec![0usize; n];
    let mut prefix_max = vec![0usize; n];
    let mut sizes = vec![0usize; n];
    let mut tally: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    loop {
        sizes.iter_mut().for_each(|s| *s = 0);
        for &b in &rgs {
            sizes[b] += 1;
        }
        let mut shape: Vec<usize> = sizes.iter().copied().filter(|&s| s > 0).collect();
        shape.sort_unstable();
        *tally.entry(shape).or_insert(0) += 1;

        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(tally.into_iter().fold(T::zero(), |total, (shape, count)| {
                    let term = shape
                        .iter()
                        .fold(T::one(), |acc, &s| acc * x[s - 1].clone());
                    total + T::from_u64(count) * term
                }));
            }
            if rgs[i] <= prefix_max[i - 1] {
                rgs[i] += 1;
                prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
                for j in i + 1..n {
                    rgs[j] = 0;
                    prefix_max[j] = prefix_max[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// (βX₁, β²X₂, ..., β^nX_n).
pub fn bell_scale<T: Scalar>(seq: &RealSequence<T>, beta: &T) -> RealSequence<T> {
    let mut power = T::one();
    let values = seq
        .as_slice()
        .iter()
        .map(|x| {
            power = power.clone() * beta.clone();
            power.clone() * x.clone()
        })
        .collect();
    RealSequence::new(values)
}

/// Y_k = (−1)^k · derivs[k], where `derivs` is (ẏ, ẏ′, ẏ″, ...).
pub fn sign_flip<T: Scalar>(derivs: &[T]) -> SignFlippedSequence<T> {
    SignFlippedSequence {
        values: alternate_signs(derivs),
    }
}

/// `prefactor · B_m(derivs)`: the m-th derivative of `exp ∘ f` when
/// `prefactor = e^f` and `derivs = (f′, f″, ...)`.
pub fn compose_exp<T: Scalar>(prefactor: T, derivs: &[T], m: usize) -> Result<T> {
    check_len(derivs.len(), m, "compose_exp")?;
    let binom = Binomials::new(m.saturating_sub(1));
    let b = bell_complete_with(&binom, derivs, m);
    Ok(prefactor * b[m].clone())
}

/// d^m/dt^m e^{y(t)} = e^{y} B_m(ẏ, ẏ′, ...).
pub fn faa_di_bruno_exp(y_value: f64, derivs: &[f64], m: usize) -> Result<f64> {
    compose_exp(y_value.exp(), derivs, m)
}

/// Given (p, p′, ..., p^{(n)}) with p > 0, returns ((log p)′, ..., (log p)^{(n)}).
///
/// Inverts Faà di Bruno for the exponential: with p = e^f,
/// f^{(n)} = [p^{(n)} − Σ_{k=1}^{n−1} C(n−1, k) p^{(k)} f^{(n−k)}] / p.
pub fn log_derivatives_from_function_derivatives<T: Scalar>(
    p_derivs: &[T],
    n: usize,
) -> Result<Vec<T>> {
    if p_derivs.is_empty() || n > p_derivs.len() - 1 {
        return Err(Error::InputShape(format!(
            "need {} function derivatives, got {}",
            n + 1,
            p_derivs.len()
        )));
    }
    if p_derivs[0] <= T::zero() {
        return Err(Error::Domain(format!(
            "log-derivatives need p > 0, got {:?}",
            p_derivs[0]
        )));
    }
    let binom = Binomials::new(n.saturating_sub(1));
    Ok(log_derivatives_with(&binom, p_derivs, n))
}

/// Unchecked core of [`log_derivatives_from_function_derivatives`].
pub fn log_derivatives_with<T: Scalar>(binom: &Binomials<T>, p_derivs: &[T], n: usize) -> Vec<T> {
    let p = &p_derivs[0];
    let mut f: Vec<T> = Vec::with_capacity(n);
    for order in 1..=n {
        let mut acc = p_derivs[order].clone();
        for k in 1..order {
            acc = acc
                - binom.get(order - 1, k).clone() * p_derivs[k].clone() * f[order - k - 1].clone();
        }
        f.push(acc / p.clone());
    }
    f
}

/// Outcome of checking "premises ⇒ conclusions" for the Bell sign lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Implication {
    /// Every premise and every conclusion holds.
    Satisfied,
    /// Some premise fails, so nothing is asserted past it.
    Vacuous,
    /// Premises 1..=n hold but conclusion n fails.
    Violated { order: usize },
}

/// Per-order flags and margins from [`lemma1_check`].
///
/// Margins are oriented so that `margin >= 0` means the inequality holds:
/// `premise_margins[n-1] = −B_n(Y)` and
/// `conclusion_margins[n-1] = −(n−1)!(−Y₁)^n − Y_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report<T> {
    pub bell_values: Vec<T>,
    pub premise_holds: Vec<bool>,
    pub conclusion_holds: Vec<bool>,
    pub premise_margins: Vec<T>,
    pub conclusion_margins: Vec<T>,
    pub verdict: Implication,
}

impl<T> Lemma1Report<T> {
    pub fn all_premises_hold(&self) -> bool {
        self.premise_holds.iter().all(|&ok| ok)
    }

    pub fn all_conclusions_hold(&self) -> bool {
        self.conclusion_holds.iter().all(|&ok| ok)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self.verdict, Implication::Violated { .. })
    }
}

/// Checks B_n(Y) ≤ 0 ⇒ Y_n ≤ −(n−1)!(−Y₁)^n for n = 1..=N, with the
/// scalar's default margin tolerance (0 for rationals, 1e−9 for floats).
pub fn lemma1_check<T: Scalar>(y: &SignFlippedSequence<T>, n: usize) -> Result<Lemma1Report<T>> {
    let tol = vec![T::margin_tolerance(); n];
    lemma1_check_with(y, n, &tol, &tol)
}

/// [`lemma1_check`] with explicit per-order slack for premises and
/// conclusions.
pub fn lemma1_check_with<T: Scalar>(
    y: &SignFlippedSequence<T>,
    n: usize,
    premise_tol: &[T],
    conclusion_tol: &[T],
) -> Result<Lemma1Report<T>> {
    check_len(y.len(), n, "lemma1_check")?;
    if premise_tol.len() < n || conclusion_tol.len() < n {
        return Err(Error::InputShape(format!(
            "lemma1_check needs {n} tolerances per side"
        )));
    }
    let ys = y.as_slice();
    let binom = Binomials::new(n.saturating_sub(1));
    let bell = bell_complete_with(&binom, ys, n);

    let mut report = Lemma1Report {
        bell_values: bell[1..].to_vec(),
        premise_holds: Vec::with_capacity(n),
        conclusion_holds: Vec::with_capacity(n),
        premise_margins: Vec::with_capacity(n),
        conclusion_margins: Vec::with_capacity(n),
        verdict: Implication::Satisfied,
    };
    let minus_y1 = if n > 0 { -ys[0].clone() } else { T::zero() };
    let mut power = T::one();
    let mut fact = T::one();
    let mut premises_so_far = true;
    let mut violated = None;
    for k in 1..=n {
        power = power * minus_y1.clone();
        if k > 1 {
            fact = fact * T::from_u64((k - 1) as u64);
        }
        let premise_margin = -bell[k].clone();
        let conclusion_margin = -(fact.clone() * power.clone()) - ys[k - 1].clone();
        let premise_ok = premise_margin >= -premise_tol[k - 1].clone();
        let conclusion_ok = conclusion_margin >= -conclusion_tol[k - 1].clone();
        premises_so_far &= premise_ok;
        if premises_so_far && !conclusion_ok && violated.is_none() {
            violated = Some(k);
        }
        report.premise_holds.push(premise_ok);
        report.conclusion_holds.push(conclusion_ok);
        report.premise_margins.push(premise_margin);
        report.conclusion_margins.push(conclusion_margin);
    }
    report.verdict = match violated {
        Some(order) => Implication::Violated { order },
        None if report.all_premises_hold() && report.all_conclusions_hold() => {
            Implication::Satisfied
        }
        None => Implication::Vacuous,
    };
    Ok(report)
}
