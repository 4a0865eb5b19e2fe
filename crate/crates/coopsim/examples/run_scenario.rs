//! Full epoch loop: optimize, observe, update beliefs, step cooperation
//! states, re-form teams, accrue benefit.
//!
//! Run with: cargo run --example run_scenario

use std::collections::{BTreeMap, BTreeSet};

use coopsim::coop::{CoopState, PairModelSpec};
use coopsim::org::{CapabilityProfile, CooperativeRobot};
use coopsim::payoff::Mode;
use coopsim::sim::{self, OptimizerConfig, PairEntry, PayoffEntry, PriorUpdate, ScenarioFile};

fn main() {
    let robots: Vec<CooperativeRobot> = [("ant", 0.7, 0.6), ("bee", 0.5, 0.8), ("cat", 0.4, 0.3)]
        .into_iter()
        .map(|(id, organizing, communicating)| {
            CooperativeRobot::new(
                id,
                CapabilityProfile::new(0.5, 0.5, 0.5, communicating, organizing, 0.5).unwrap(),
                BTreeMap::new(),
                BTreeSet::new(),
            )
            .unwrap()
        })
        .collect();

    let alphabet = vec!["share".to_string(), "withhold".to_string()];
    let ids: Vec<String> = robots.iter().map(|r| r.id.clone()).collect();

    // Symmetric mode: one belief model per unordered pair, payoff tables
    // per ordered pair.
    let mut pairs = Vec::new();
    let mut payoffs = Vec::new();
    for i in 0..ids.len() {
        for j in 0..ids.len() {
            if i == j {
                continue;
            }
            if i < j {
                pairs.push(PairEntry {
                    from: ids[i].clone(),
                    to: ids[j].clone(),
                    model: PairModelSpec {
                        alphabet: alphabet.clone(),
                        prior_coop: 0.35 + 0.1 * (i + j) as f64,
                        likelihood_coop: vec![0.75, 0.25],
                        likelihood_noncoop: vec![0.35, 0.65],
                    },
                    initial_state: CoopState::NotCooperating,
                });
            }
            payoffs.push(PayoffEntry {
                from: ids[i].clone(),
                to: ids[j].clone(),
                coop: vec![4.0 + i as f64, 1.0],
                noncoop: vec![-1.5, 0.5],
            });
        }
    }

    let file = ScenarioFile {
        robots,
        alphabet,
        mode: Mode::Symmetric,
        epochs: 30,
        seed: 7,
        prior_update: PriorUpdate::PosteriorFeedback,
        optimizer: OptimizerConfig::Brute,
        pairs,
        payoffs,
    };

    let scenario = file.build().expect("scenario is valid");
    let trajectory = sim::run(&scenario).expect("scenario runs");
    let summary = sim::metrics(&trajectory).expect("nonempty trajectory");

    println!("epoch  density  teams  payoff    cumulative_eu");
    for row in summary.per_epoch.iter().step_by(5) {
        println!(
            "{:>5}  {:>7.3}  {:>5}  {:>8.3}  {:>13.3}",
            row.epoch, row.density, row.team_count, row.team_payoff, row.cumulative_eu
        );
    }
    println!("\n{summary}");

    let last = trajectory.last().unwrap();
    println!("\nfinal team forest:");
    for node in &last.teams {
        let members = node.member_ids().join(", ");
        println!(
            "  [{members}] led by {} (epoch benefit {:.2})",
            node.representative_id(),
            node.benefit()
        );
    }
}
