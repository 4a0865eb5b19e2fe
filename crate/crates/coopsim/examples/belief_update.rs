//! Bayesian updating of pairwise cooperation beliefs.
//!
//! Run with: cargo run --example belief_update

use coopsim::coop::{ActionAlphabet, PairModel};

fn main() {
    let alphabet = ActionAlphabet::new(["share", "withhold"]).unwrap();
    // A cooperating pair shares data 80% of the time; a non-cooperating
    // pair only 30%.
    let model = PairModel::new(alphabet, 0.6, vec![0.8, 0.2], vec![0.3, 0.7]).unwrap();

    for action in ["share", "withhold"] {
        println!(
            "P({action}) = {:.4}   P(coop | {action}) = {:.4}   P(not | {action}) = {:.4}",
            model.evidence(action).unwrap(),
            model.posterior_coop(action).unwrap(),
            model.posterior_noncoop(action).unwrap(),
        );
    }

    // Feeding each posterior back as the next prior concentrates belief:
    // repeated sharing looks more and more like cooperation.
    let mut model = model;
    println!("\nrepeatedly observing `share`:");
    for step in 1..=5 {
        let posterior = model.posterior_coop("share").unwrap();
        println!("  after observation {step}: P(coop) = {posterior:.4}");
        model = model.with_prior(posterior).unwrap();
    }

    // The posteriors assemble into the pair's transition matrix.
    let matrix = model.transition_matrix().unwrap();
    println!(
        "\ntransition matrix: p11={:.4} p10={:.4} p01={:.4} p00={:.4}",
        matrix.p11(),
        matrix.p10(),
        matrix.p01(),
        matrix.p00()
    );
}
