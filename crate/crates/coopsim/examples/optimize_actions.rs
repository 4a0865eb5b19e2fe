//! Action-set optimization: exhaustive search vs. the genetic algorithm,
//! and the two optimality demands.
//!
//! Run with: cargo run --example optimize_actions

use coopsim::coop::ActionAlphabet;
use coopsim::payoff::{
    brute_force_optimize, check_demands, ga_optimize, GaParams, Mode, PayoffModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    // A random 4-robot, 3-action instance.
    let n = 4;
    let m = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tensor = |lo: f64, hi: f64| -> Vec<Vec<Vec<f64>>> {
        (0..n)
            .map(|_| {
                (0..n - 1)
                    .map(|_| (0..m).map(|_| rng.gen_range(lo..hi)).collect())
                    .collect()
            })
            .collect()
    };
    let beliefs = tensor(0.0, 1.0);
    let payoff_coop = tensor(-5.0, 10.0);
    let payoff_noncoop = tensor(-5.0, 5.0);
    let alphabet = ActionAlphabet::new(["assist", "trade", "ignore"]).unwrap();
    let model = PayoffModel::new(n, alphabet, beliefs, payoff_coop, payoff_noncoop).unwrap();

    for mode in [Mode::Directed, Mode::Symmetric] {
        println!("--- {mode:?} mode ---");
        let brute = brute_force_optimize(&model, mode).unwrap();
        println!(
            "brute force: team payoff {:.4} after {} evaluations",
            brute.team_payoff, brute.evaluations
        );
        for (member, actions) in brute
            .profile
            .to_symbols(model.alphabet())
            .iter()
            .enumerate()
        {
            println!("  member {member}: {actions:?}");
        }

        let ga = ga_optimize(&model, mode, &GaParams::default(), 42).unwrap();
        println!(
            "genetic:     team payoff {:.4} after {} evaluations (gap {:.4})",
            ga.team_payoff,
            ga.evaluations,
            brute.team_payoff - ga.team_payoff
        );

        // Demand check: member-level and team-level optimality. Directed
        // instances satisfy both at once; symmetric instances may leave
        // members wanting a different shared action.
        let report = check_demands(&model, &brute).unwrap();
        println!(
            "demands: member_optimal={:?} team_optimal={} conflicts={}",
            report.member_optimal,
            report.team_optimal,
            report.conflicts.len()
        );
        for conflict in &report.conflicts {
            println!(
                "  member {} would rather play `{}` than `{}` toward member {}",
                conflict.member, conflict.preferred, conflict.assigned, conflict.partner
            );
        }
    }
}
