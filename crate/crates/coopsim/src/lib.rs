//! Multi-robot team cooperation: organization modeling, belief-driven
//! cooperation dynamics, and action-set optimization.
//!
//! The library is organized in four layers plus a command-line front end:
//!
//! - [`org`] — robots, relations, and recursive team structures with leader
//!   election, join/leave dynamics, and goal decomposition.
//! - [`coop`] — per-pair Bayesian cooperation beliefs and the two-state
//!   Markov chain (transition matrices, stepping, stationary behavior).
//! - [`payoff`] — belief-weighted payoff evaluation and action-set
//!   optimization by exhaustive search or a binary-coded genetic algorithm.
//! - [`sim`] — the epochal evolution loop: optimize actions, observe,
//!   update beliefs, step cooperation states, re-form teams, accrue benefit.
//! - [`cli`] — the `coopsim` binary: `simulate`, `optimize`, `validate`,
//!   and `metrics` subcommands over JSON scenario/problem files.
//!
//! Everything is deterministic for a fixed seed: random draws come from
//! counter-derived ChaCha streams, collections iterate in sorted order, and
//! serialized output is byte-stable across runs.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example organize_teams    # team formation, join/leave, goals
//! cargo run --example belief_update     # Bayesian posteriors and evidence
//! cargo run --example chain_evolution   # transition matrices and stepping
//! cargo run --example optimize_actions  # brute force vs. genetic algorithm
//! cargo run --example run_scenario      # full epoch loop with metrics
//! ```

pub mod cli;
pub mod coop;
pub mod org;
pub mod payoff;
pub mod sim;
