//! Two-state Markov chain mechanics: multi-step composition, the
//! stationary distribution, and empirical convergence.
//!
//! Run with: cargo run --example chain_evolution

use coopsim::coop::{CoopState, TransitionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    // A pair keeps cooperating with probability 0.7 and starts
    // cooperating with probability 0.2.
    let matrix = TransitionMatrix::from_rates(0.7, 0.2).unwrap();

    println!("k-step cooperation retention from state 1:");
    for k in [1, 2, 5, 10, 50] {
        println!("  after {k:>2} steps: p11 = {:.6}", matrix.n_step(k).p11());
    }

    let (pi1, pi0) = matrix.stationary().unwrap();
    println!("stationary distribution: pi1 = {pi1:.4}, pi0 = {pi0:.4}");

    // Long-run state frequency converges to the stationary distribution.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut state = CoopState::Cooperating;
    let mut cooperating = 0u64;
    let steps = 200_000;
    for _ in 0..steps {
        state = matrix.step(state, rng.gen());
        if state.is_cooperating() {
            cooperating += 1;
        }
    }
    let frequency = cooperating as f64 / steps as f64;
    println!(
        "empirical frequency over {steps} steps: {frequency:.4} \
         (|diff| = {:.4})",
        (frequency - pi1).abs()
    );
}
