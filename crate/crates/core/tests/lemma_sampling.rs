mod common;

use common::{premises_hold, targeted_candidate, uniform_candidate};
use heatflow::bell::{lemma1_check, sign_flip, RealSequence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(y: &[num_rational::BigRational]) {
    // lemma1_check takes the sign-flipped sequence; flipping twice gives Y back
    let flipped = sign_flip(sign_flip(y).as_slice());
    assert_eq!(flipped.as_slice(), y);
    let r = lemma1_check(&flipped, y.len()).unwrap();
    assert!(r.all_premises_hold());
    assert!(r.all_conclusions_hold(), "counterexample: {y:?}");
}

#[test]
fn targeted_sequences_satisfy_the_conclusion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut accepted = 0;
    let mut rejected = 0;
    while accepted < 500 {
        let y = targeted_candidate(&mut rng, 6);
        if premises_hold(&y) {
            check(&y);
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    assert!(
        rejected > 0,
        "the sampler should also produce positive targets"
    );
}

#[test]
fn uniform_sequences_satisfy_the_conclusion() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut accepted = 0;
    for _ in 0..20_000 {
        let y = uniform_candidate(&mut rng, 6);
        if premises_hold(&y) {
            check(&y);
            accepted += 1;
        }
    }
    println!("{accepted} of 20000 uniform draws met every premise");
    assert!(accepted > 0);
}

#[test]
fn conclusion_is_checked_on_the_given_sequence() {
    // Y₁ = −1, Y₂ = −1 gives B₂ = 0 and equality in the bound
    let y = RealSequence::new(vec![-1.0, -1.0]);
    let r = lemma1_check(&sign_flip(sign_flip(y.as_slice()).as_slice()), 2).unwrap();
    assert_eq!(r.conclusion_margins, vec![0.0, 0.0]);
}
