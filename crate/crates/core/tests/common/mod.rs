#![allow(dead_code)]

use std::path::{Path, PathBuf};

use heatflow::bell::{bell_complete_all, RealSequence};
use heatflow::cli::load_mixture_spec;
use heatflow::mixture::MixtureSpec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

/// The five non-Gaussian corpus mixtures.
pub const CORPUS: [&str; 5] = [
    "symmetric_bimodal",
    "asymmetric_bimodal",
    "narrow_satellite",
    "trimodal",
    "close_pair",
];

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.toml"))
}

pub fn corpus() -> Vec<(&'static str, MixtureSpec)> {
    CORPUS
        .iter()
        .map(|&name| {
            (
                name,
                load_mixture_spec(&fixture(name)).expect("corpus fixture loads"),
            )
        })
        .collect()
}

pub fn rational<R: Rng>(rng: &mut R, num_bound: i64, max_den: i64) -> BigRational {
    let n = rng.gen_range(-num_bound..=num_bound);
    let d = rng.gen_range(1..=max_den);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn nonnegative<R: Rng>(rng: &mut R, num_bound: i64, max_den: i64) -> BigRational {
    rational(rng, num_bound, max_den).abs()
}

/// B_1..B_n(Y) ≤ 0, exactly.
pub fn premises_hold(y: &[BigRational]) -> bool {
    let b = bell_complete_all(&RealSequence::new(y.to_vec()), y.len()).expect("length matches");
    b[1..].iter().all(|v| !v.is_positive())
}

/// Y_k = −(k−1)! u_k with u_k uniform over the twelfths in [−1/4, 2],
/// matching the factorial growth the premises force. Roughly 2% of draws
/// meet every premise for n = 6.
pub fn uniform_candidate<R: Rng>(rng: &mut R, n: usize) -> Vec<BigRational> {
    let mut fact = BigInt::from(1);
    (0..n)
        .map(|k| {
            if k > 0 {
                fact *= k;
            }
            let u = BigRational::new(BigInt::from(rng.gen_range(-3..=24)), BigInt::from(12));
            -u * BigRational::from_integer(fact.clone())
        })
        .collect()
}

/// Chooses targets for B₁..B_n (usually ≤ 0, sometimes positive) and solves
/// for Y_k = target_k − B_k(Y₁, ..., Y_{k−1}, 0).
pub fn targeted_candidate<R: Rng>(rng: &mut R, n: usize) -> Vec<BigRational> {
    let mut y: Vec<BigRational> = Vec::with_capacity(n);
    for k in 1..=n {
        let magnitude = nonnegative(rng, 60, 12);
        let target = if rng.gen_bool(0.05) {
            magnitude
        } else {
            -magnitude
        };
        let mut padded = y.clone();
        padded.push(BigRational::zero());
        let b = bell_complete_all(&RealSequence::new(padded), k).expect("length matches");
        y.push(target - &b[k]);
    }
    y
}
