//! Team formation, membership changes, and goal decomposition.
//!
//! Run with: cargo run --example organize_teams

use std::collections::{BTreeMap, BTreeSet};

use coopsim::org::{
    decompose_goal, form_team, join, leave, CapabilityProfile, LeaveOutcome, RobotRegistry,
    TeamStructure,
};

fn main() {
    let mut registry = RobotRegistry::new();
    let scout = registry
        .create_robot(
            "scout",
            CapabilityProfile::new(0.9, 0.4, 0.9, 0.5, 0.3, 0.6).unwrap(),
            BTreeMap::from([("battery".to_string(), 1.0)]),
            BTreeSet::from(["radio".to_string()]),
        )
        .unwrap();
    let hauler = registry
        .create_robot(
            "hauler",
            CapabilityProfile::new(0.6, 0.9, 0.3, 0.4, 0.4, 0.4).unwrap(),
            BTreeMap::from([("payload".to_string(), 5.0)]),
            BTreeSet::from(["radio".to_string()]),
        )
        .unwrap();
    let coordinator = registry
        .create_robot(
            "coordinator",
            CapabilityProfile::new(0.4, 0.3, 0.5, 0.9, 0.9, 0.8).unwrap(),
            BTreeMap::new(),
            BTreeSet::from(["radio".to_string(), "mesh".to_string()]),
        )
        .unwrap();

    // The leader is the member with the strongest communicating +
    // organizing score.
    let goals: BTreeSet<String> = ["survey", "carry", "map"]
        .into_iter()
        .map(String::from)
        .collect();
    let team = form_team(&[scout.clone(), hauler.clone()], goals, 0, 0).unwrap();
    println!(
        "formed {:?} led by {}",
        team_label(&team),
        team.representative_id()
    );

    let team = join(&team, &coordinator, &registry).unwrap();
    println!(
        "after coordinator joins, the leader is {}",
        team.representative_id()
    );

    // Distribute the goals over the three members.
    let assignment = BTreeMap::from([
        (0usize, BTreeSet::from(["map".to_string()])),
        (1, BTreeSet::from(["survey".to_string()])),
        (2, BTreeSet::from(["carry".to_string()])),
    ]);
    let team = decompose_goal(&team, &assignment).unwrap();
    for child in team.children() {
        println!(
            "  {} -> goals {:?}",
            child.representative_id(),
            child.goals()
        );
    }

    // Every constructed structure passes validation.
    let structure = TeamStructure {
        registry: registry.clone(),
        relations: Vec::new(),
        root: team.clone(),
    };
    println!("violations: {:?}", structure.validate());

    // Members can quit; the departing member's goals return to the leader.
    match leave(&team, "scout", &registry).unwrap() {
        LeaveOutcome::Remaining(team) => {
            println!(
                "after scout leaves: {} members, leader {} holds {:?}",
                team.member_count(),
                team.representative_id(),
                team.children()[0].goals()
            );
        }
        LeaveOutcome::Dissolved => println!("team dissolved"),
    }
}

fn team_label(node: &coopsim::org::OrgNode) -> String {
    format!("team of {}", node.member_count())
}
