//! Epochal evolution of team cooperation.
//!
//! A [`Scenario`] bundles robots, per-pair belief models, payoff tables,
//! and policies. [`run`] advances it epoch by epoch: optimize the joint
//! action profile, compute posteriors for the chosen actions, build
//! per-pair transition matrices, step every pair's cooperation state,
//! re-form teams as connected components of the cooperation graph, and
//! accrue each team's benefit from the realized (post-step) payoffs.
//! Optionally the posteriors feed back into the next epoch's priors.
//!
//! Randomness is counter-based: every `(pair, epoch)` gets its own ChaCha
//! stream derived from the master seed, so trajectories replay exactly
//! and adding a pair never perturbs another pair's draws.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coop::{
    aggregate_transition, ActionAlphabet, CoopError, CoopState, PairModel, PairModelSpec,
    TransitionMatrix,
};
use crate::org::{assemble_team, CooperativeRobot, OrgNode};
use crate::payoff::{
    brute_force_optimize, ga_optimize, partner_of_slot, GaParams, Mode, OptimizationResult,
    PayoffError, PayoffModel, PayoffTensor,
};

/// Errors from scenario validation and simulation runs.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    InvalidScenario(Vec<String>),
    #[error("invalid cooperation graph: {0}")]
    InvalidGraph(String),
    #[error("epoch {epoch}, pair {from}->{to}: {source}")]
    PairAt {
        epoch: u64,
        from: String,
        to: String,
        #[source]
        source: CoopError,
    },
    #[error("epoch {epoch}: optimizer: {source}")]
    OptimizerAt {
        epoch: u64,
        #[source]
        source: PayoffError,
    },
    #[error("epoch {epoch}: {source}")]
    ModelAt {
        epoch: u64,
        #[source]
        source: PayoffError,
    },
    #[error("trajectory is empty")]
    EmptyTrajectory,
}

/// How pair priors evolve across epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorUpdate {
    /// Priors stay as configured in the scenario.
    #[default]
    Fixed,
    /// Each epoch's posterior for the chosen action becomes the next
    /// epoch's prior.
    PosteriorFeedback,
}

/// Which optimizer drives action selection each epoch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OptimizerConfig {
    #[default]
    Brute,
    Ga {
        #[serde(default)]
        params: GaParams,
    },
}

/// One pair's belief model plus its starting cooperation state.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSetup {
    pub model: PairModel,
    pub initial_state: CoopState,
}

/// Raw JSON form of a scenario, with robots and pairs addressed by id.
/// Validate with [`ScenarioFile::validate`], then [`ScenarioFile::build`]
/// into a runnable [`Scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub robots: Vec<CooperativeRobot>,
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub mode: Mode,
    pub epochs: u64,
    pub seed: u64,
    #[serde(default)]
    pub prior_update: PriorUpdate,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub pairs: Vec<PairEntry>,
    #[serde(default)]
    pub payoffs: Vec<PayoffEntry>,
}

/// Belief model for one pair of robots. In directed mode every ordered
/// pair needs an entry; in symmetric mode every unordered pair needs
/// exactly one (either orientation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub from: String,
    pub to: String,
    pub model: PairModelSpec,
    #[serde(default)]
    pub initial_state: CoopState,
}

/// Payoff tables for one ordered pair: `coop[a]` is the payoff to `from`
/// when it takes action `a` toward `to` and the pair cooperates;
/// `noncoop[a]` when it does not. Both modes need all ordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffEntry {
    pub from: String,
    pub to: String,
    pub coop: Vec<f64>,
    pub noncoop: Vec<f64>,
}

fn pair_key(mode: Mode, i: usize, j: usize) -> (usize, usize) {
    match mode {
        Mode::Directed => (i, j),
        Mode::Symmetric => (i.min(j), i.max(j)),
    }
}

/// Every pair key a scenario of `n` robots must cover.
fn expected_pair_keys(n: usize, mode: Mode) -> BTreeSet<(usize, usize)> {
    let mut keys = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                keys.insert(pair_key(mode, i, j));
            }
        }
    }
    keys
}

impl ScenarioFile {
    /// Itemized list of everything wrong with the file; empty means the
    /// scenario is runnable.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();

        if self.epochs == 0 {
            issues.push("epochs must be at least 1".to_string());
        }
        if self.robots.is_empty() {
            issues.push("scenario needs at least one robot".to_string());
        }

        let mut index = BTreeMap::new();
        for (i, robot) in self.robots.iter().enumerate() {
            if let Err(e) = robot.validate() {
                issues.push(format!("robot `{}`: {e}", robot.id));
            }
            if index.insert(robot.id.clone(), i).is_some() {
                issues.push(format!("duplicate robot id `{}`", robot.id));
            }
        }

        let alphabet = match ActionAlphabet::new(self.alphabet.clone()) {
            Ok(a) => Some(a),
            Err(e) => {
                issues.push(format!("alphabet: {e}"));
                None
            }
        };

        if let OptimizerConfig::Ga { params } = &self.optimizer {
            if let Err(e) = params.validate() {
                issues.push(e.to_string());
            }
        }

        let n = self.robots.len();
        let mut seen_pairs = BTreeSet::new();
        for entry in &self.pairs {
            let label = format!("pair {}->{}", entry.from, entry.to);
            let (Some(&i), Some(&j)) = (index.get(&entry.from), index.get(&entry.to)) else {
                issues.push(format!("{label}: unknown robot id"));
                continue;
            };
            if i == j {
                issues.push(format!("{label}: a robot cannot pair with itself"));
                continue;
            }
            if !seen_pairs.insert(pair_key(self.mode, i, j)) {
                issues.push(format!("{label}: duplicate pair model"));
            }
            if let Some(alphabet) = &alphabet {
                if entry.model.alphabet != alphabet.symbols() {
                    issues.push(format!(
                        "{label}: model alphabet differs from the scenario alphabet"
                    ));
                }
            }
            if let Err(e) = PairModel::try_from(entry.model.clone()) {
                issues.push(format!("{label}: {e}"));
            }
        }
        for (i, j) in expected_pair_keys(n, self.mode) {
            if !seen_pairs.contains(&(i, j)) {
                issues.push(format!(
                    "missing pair model for {}->{}",
                    self.robots[i].id, self.robots[j].id
                ));
            }
        }

        let m = self.alphabet.len();
        let mut seen_payoffs = BTreeSet::new();
        for entry in &self.payoffs {
            let label = format!("payoff {}->{}", entry.from, entry.to);
            let (Some(&i), Some(&j)) = (index.get(&entry.from), index.get(&entry.to)) else {
                issues.push(format!("{label}: unknown robot id"));
                continue;
            };
            if i == j {
                issues.push(format!("{label}: a robot cannot pay itself"));
                continue;
            }
            if !seen_payoffs.insert((i, j)) {
                issues.push(format!("{label}: duplicate payoff entry"));
            }
            for (name, table) in [("coop", &entry.coop), ("noncoop", &entry.noncoop)] {
                if table.len() != m {
                    issues.push(format!(
                        "{label}: {name} table has {} entries, alphabet has {m}",
                        table.len()
                    ));
                }
                for &u in table {
                    if !u.is_finite() {
                        issues.push(format!("{label}: {name} payoff {u} is not finite"));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !seen_payoffs.contains(&(i, j)) {
                    issues.push(format!(
                        "missing payoff tables for {}->{}",
                        self.robots[i].id, self.robots[j].id
                    ));
                }
            }
        }

        issues
    }

    /// Validate and index the file into a runnable scenario.
    pub fn build(&self) -> Result<Scenario, SimError> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(SimError::InvalidScenario(issues));
        }

        let n = self.robots.len();
        let m = self.alphabet.len();
        let index: BTreeMap<&str, usize> = self
            .robots
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.as_str(), i))
            .collect();

        let mut pairs = BTreeMap::new();
        for entry in &self.pairs {
            let i = index[entry.from.as_str()];
            let j = index[entry.to.as_str()];
            pairs.insert(
                pair_key(self.mode, i, j),
                PairSetup {
                    model: PairModel::try_from(entry.model.clone())
                        .expect("validated by ScenarioFile::validate"),
                    initial_state: entry.initial_state,
                },
            );
        }

        let mut payoff_coop = vec![vec![vec![0.0; m]; n.saturating_sub(1)]; n];
        let mut payoff_noncoop = payoff_coop.clone();
        for entry in &self.payoffs {
            let i = index[entry.from.as_str()];
            let j = index[entry.to.as_str()];
            let slot = crate::payoff::slot_of_partner(i, j);
            payoff_coop[i][slot] = entry.coop.clone();
            payoff_noncoop[i][slot] = entry.noncoop.clone();
        }

        Ok(Scenario {
            robots: self.robots.clone(),
            alphabet: ActionAlphabet::new(self.alphabet.clone())
                .expect("validated by ScenarioFile::validate"),
            mode: self.mode,
            epochs: self.epochs,
            seed: self.seed,
            prior_update: self.prior_update,
            optimizer: self.optimizer.clone(),
            pairs,
            payoff_coop,
            payoff_noncoop,
        })
    }
}

/// A validated, index-addressed scenario ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    robots: Vec<CooperativeRobot>,
    alphabet: ActionAlphabet,
    mode: Mode,
    epochs: u64,
    seed: u64,
    prior_update: PriorUpdate,
    optimizer: OptimizerConfig,
    pairs: BTreeMap<(usize, usize), PairSetup>,
    payoff_coop: Vec<Vec<Vec<f64>>>,
    payoff_noncoop: Vec<Vec<Vec<f64>>>,
}

impl Scenario {
    pub fn robots(&self) -> &[CooperativeRobot] {
        &self.robots
    }

    pub fn alphabet(&self) -> &ActionAlphabet {
        &self.alphabet
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn epochs(&self) -> u64 {
        self.epochs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn prior_update(&self) -> PriorUpdate {
        self.prior_update
    }

    pub fn optimizer(&self) -> &OptimizerConfig {
        &self.optimizer
    }

    pub fn pair_setups(&self) -> &BTreeMap<(usize, usize), PairSetup> {
        &self.pairs
    }

    /// `(coop, noncoop)` payoff tensors indexed `[member][slot][action]`.
    pub fn payoff_tables(&self) -> (&PayoffTensor, &PayoffTensor) {
        (&self.payoff_coop, &self.payoff_noncoop)
    }

    /// Override the master seed (CLI flag).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Override the epoch count (CLI flag). Zero is rejected upstream.
    pub fn with_epochs(mut self, epochs: u64) -> Self {
        self.epochs = epochs;
        self
    }
}

/// Per-pair cooperation states for one instant, keyed by robot index:
/// ordered pairs in directed mode, `i < j` pairs in symmetric mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CoopGraph {
    n: usize,
    mode: Mode,
    states: BTreeMap<(usize, usize), CoopState>,
}

impl CoopGraph {
    pub fn new(
        n: usize,
        mode: Mode,
        states: BTreeMap<(usize, usize), CoopState>,
    ) -> Result<Self, SimError> {
        let expected = expected_pair_keys(n, mode);
        for &(i, j) in states.keys() {
            if !expected.contains(&(i, j)) {
                return Err(SimError::InvalidGraph(format!(
                    "unexpected pair key ({i}, {j})"
                )));
            }
        }
        for &(i, j) in &expected {
            if !states.contains_key(&(i, j)) {
                return Err(SimError::InvalidGraph(format!(
                    "missing pair key ({i}, {j})"
                )));
            }
        }
        Ok(CoopGraph { n, mode, states })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn states(&self) -> &BTreeMap<(usize, usize), CoopState> {
        &self.states
    }

    pub fn state(&self, i: usize, j: usize) -> CoopState {
        self.states[&pair_key(self.mode, i, j)]
    }

    /// Fraction of tracked pairs currently cooperating.
    pub fn density(&self) -> f64 {
        if self.states.is_empty() {
            return 0.0;
        }
        let cooperating = self.states.values().filter(|s| s.is_cooperating()).count();
        cooperating as f64 / self.states.len() as f64
    }

    /// Undirected cooperation edges: a symmetric pair cooperates when its
    /// state is 1; a directed pair needs both orientations at 1.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let connected = match self.mode {
                    Mode::Symmetric => self.states[&(i, j)].is_cooperating(),
                    Mode::Directed => {
                        self.states[&(i, j)].is_cooperating()
                            && self.states[&(j, i)].is_cooperating()
                    }
                };
                if connected {
                    edges.push((i, j));
                }
            }
        }
        edges
    }
}

/// Group robots into teams: one team per connected component of the
/// cooperation graph, singletons as bare leaves. Teams carry no goals
/// (tasks arrive separately); leaders follow the organization-model rule;
/// members are ordered by id after the leader.
pub fn reform_teams(graph: &CoopGraph, robots: &[CooperativeRobot]) -> Vec<OrgNode> {
    assert_eq!(
        graph.n(),
        robots.len(),
        "graph and robot list must cover the same robots"
    );
    let n = robots.len();
    let mut adjacency = vec![Vec::new(); n];
    for (i, j) in graph.undirected_edges() {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }

    let mut seen = vec![false; n];
    let mut forest = Vec::new();
    let mut position = 0u32;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            component.push(v);
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }

        if component.len() == 1 {
            forest.push(OrgNode::leaf(robots[component[0]].id.clone()));
        } else {
            let mut members: Vec<CooperativeRobot> =
                component.iter().map(|&i| robots[i].clone()).collect();
            members.sort_by(|a, b| a.id.cmp(&b.id));
            let team = assemble_team(
                &members,
                BTreeSet::new(),
                0,
                position,
                format!("team-{position}"),
            )
            .expect("component members are valid and nonempty");
            forest.push(team);
        }
        position += 1;
    }
    forest
}

/// Posterior for one pair's chosen action this epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPosterior {
    pub from: String,
    pub to: String,
    pub action: String,
    pub posterior_coop: f64,
}

/// Transition matrix for one pair this epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTransition {
    pub from: String,
    pub to: String,
    pub matrix: TransitionMatrix,
}

/// Cooperation state of one pair after stepping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub from: String,
    pub to: String,
    pub state: CoopState,
}

/// Benefit accrued by one forest element this epoch. `team` is the team
/// id, or the robot id for a singleton leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamBenefit {
    pub team: String,
    pub eu: f64,
}

/// Everything that happened in one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    /// Chosen action symbols, one vector of `n - 1` symbols per member.
    pub profile: Vec<Vec<String>>,
    pub posteriors: Vec<PairPosterior>,
    pub transitions: Vec<PairTransition>,
    /// Element-wise mean of the per-pair matrices: the society-level
    /// synthesis of this epoch's cooperation tendencies.
    pub aggregate_transition: TransitionMatrix,
    /// Post-step cooperation states.
    pub states: Vec<PairState>,
    /// Team forest after re-formation, with realized benefits attached.
    pub teams: Vec<OrgNode>,
    /// Expected payoffs of the chosen profile, per member and summed.
    pub member_payoffs: Vec<f64>,
    pub team_payoff: f64,
    /// Realized benefit per forest element and in total.
    pub team_eu: Vec<TeamBenefit>,
    pub epoch_eu: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_PAIR_STEP: u64 = 1;
const STREAM_OPTIMIZER: u64 = 2;

/// Independent stream seed for `(master, stream, a, b)`.
fn derive_seed(master: u64, stream: u64, a: u64, b: u64) -> u64 {
    let mut acc = splitmix64(master ^ stream);
    acc = splitmix64(acc ^ a);
    splitmix64(acc ^ b)
}

fn pack_pair(i: usize, j: usize) -> u64 {
    ((i as u64) << 32) | j as u64
}

/// Run the scenario to completion, one record per epoch. Identical
/// scenario and seed yield an element-wise identical trajectory.
pub fn run(scenario: &Scenario) -> Result<Vec<EpochRecord>, SimError> {
    let n = scenario.robots.len();
    let m = scenario.alphabet.len();
    let mode = scenario.mode;
    let robot_id = |i: usize| scenario.robots[i].id.clone();

    let mut models: BTreeMap<(usize, usize), PairModel> = scenario
        .pairs
        .iter()
        .map(|(&key, setup)| (key, setup.model.clone()))
        .collect();
    let mut states: BTreeMap<(usize, usize), CoopState> = scenario
        .pairs
        .iter()
        .map(|(&key, setup)| (key, setup.initial_state))
        .collect();

    let mut records = Vec::with_capacity(scenario.epochs as usize);
    for epoch in 0..scenario.epochs {
        // Optimize the joint action profile under current beliefs. The
        // belief for an action is its cooperation posterior; actions no
        // hypothesis can produce keep the prior.
        let mut beliefs = vec![vec![vec![0.0; m]; n.saturating_sub(1)]; n];
        for (i, member) in beliefs.iter_mut().enumerate() {
            for (slot, row) in member.iter_mut().enumerate() {
                let j = partner_of_slot(i, slot);
                let model = &models[&pair_key(mode, i, j)];
                for (a, belief) in row.iter_mut().enumerate() {
                    *belief = match model.posterior_coop(scenario.alphabet.symbol(a)) {
                        Ok(p) => p,
                        Err(CoopError::UndefinedPosterior(_)) => model.prior_coop(),
                        Err(e) => {
                            return Err(SimError::PairAt {
                                epoch,
                                from: robot_id(i),
                                to: robot_id(j),
                                source: e,
                            })
                        }
                    };
                }
            }
        }
        let payoff_model = PayoffModel::new(
            n,
            scenario.alphabet.clone(),
            beliefs,
            scenario.payoff_coop.clone(),
            scenario.payoff_noncoop.clone(),
        )
        .map_err(|source| SimError::ModelAt { epoch, source })?;

        let result: OptimizationResult = match &scenario.optimizer {
            OptimizerConfig::Brute => brute_force_optimize(&payoff_model, mode),
            OptimizerConfig::Ga { params } => ga_optimize(
                &payoff_model,
                mode,
                params,
                derive_seed(scenario.seed, STREAM_OPTIMIZER, epoch, 0),
            ),
        }
        .map_err(|source| SimError::OptimizerAt { epoch, source })?;

        // Posterior of each pair's chosen action; undefined posteriors
        // leave the prior untouched.
        let mut posteriors = Vec::with_capacity(models.len());
        let mut posterior_values: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(i, j), model) in &models {
            let action = scenario
                .alphabet
                .symbol(result.profile.action(i, j))
                .to_string();
            let posterior = match model.posterior_coop(&action) {
                Ok(p) => p,
                Err(CoopError::UndefinedPosterior(_)) => model.prior_coop(),
                Err(e) => {
                    return Err(SimError::PairAt {
                        epoch,
                        from: robot_id(i),
                        to: robot_id(j),
                        source: e,
                    })
                }
            };
            posterior_values.insert((i, j), posterior);
            posteriors.push(PairPosterior {
                from: robot_id(i),
                to: robot_id(j),
                action,
                posterior_coop: posterior,
            });
        }

        // Build transition matrices and step every pair's state with its
        // own (pair, epoch)-derived stream.
        let mut transitions = Vec::with_capacity(models.len());
        let mut matrices = Vec::with_capacity(models.len());
        for (&(i, j), model) in &models {
            let matrix = model
                .transition_matrix()
                .map_err(|source| SimError::PairAt {
                    epoch,
                    from: robot_id(i),
                    to: robot_id(j),
                    source,
                })?;
            matrices.push(matrix);
            transitions.push(PairTransition {
                from: robot_id(i),
                to: robot_id(j),
                matrix,
            });
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                scenario.seed,
                STREAM_PAIR_STEP,
                epoch,
                pack_pair(i, j),
            ));
            let draw: f64 = rng.gen();
            let state = states.get_mut(&(i, j)).expect("state per pair");
            *state = matrix.step(*state, draw);
        }
        let aggregate = aggregate_transition(&matrices).map_err(|source| SimError::PairAt {
            epoch,
            from: "*".to_string(),
            to: "*".to_string(),
            source,
        })?;

        // Re-form teams from the post-step graph.
        let graph = CoopGraph::new(n, mode, states.clone())?;
        let forest = reform_teams(&graph, &scenario.robots);

        // Realized payoff per member: the payoff tables evaluated at the
        // stepped cooperation states.
        let mut realized = BTreeMap::new();
        let mut epoch_eu = 0.0;
        for i in 0..n {
            let mut total = 0.0;
            for slot in 0..n.saturating_sub(1) {
                let j = partner_of_slot(i, slot);
                let action = result.profile.action(i, j);
                let cooperating = states[&pair_key(mode, i, j)].is_cooperating();
                total += if cooperating {
                    scenario.payoff_coop[i][slot][action]
                } else {
                    scenario.payoff_noncoop[i][slot][action]
                };
            }
            realized.insert(robot_id(i), total);
            epoch_eu += total;
        }
        let forest: Vec<OrgNode> = forest
            .iter()
            .map(|node| node.with_benefits(&|id| realized[id]))
            .collect();
        let team_eu = forest
            .iter()
            .map(|node| TeamBenefit {
                team: match node {
                    OrgNode::Team { id, .. } => id.clone(),
                    OrgNode::Leaf { robot_id, .. } => robot_id.clone(),
                },
                eu: node.benefit(),
            })
            .collect();

        // Posterior feedback: this epoch's posteriors become next epoch's
        // priors.
        if scenario.prior_update == PriorUpdate::PosteriorFeedback {
            for (key, model) in models.iter_mut() {
                let posterior = posterior_values[key];
                *model = model
                    .with_prior(posterior)
                    .map_err(|source| SimError::PairAt {
                        epoch,
                        from: robot_id(key.0),
                        to: robot_id(key.1),
                        source,
                    })?;
            }
        }

        records.push(EpochRecord {
            epoch,
            profile: result.profile.to_symbols(&scenario.alphabet),
            posteriors,
            transitions,
            aggregate_transition: aggregate,
            states: states
                .iter()
                .map(|(&(i, j), &state)| PairState {
                    from: robot_id(i),
                    to: robot_id(j),
                    state,
                })
                .collect(),
            teams: forest,
            member_payoffs: result.member_payoffs.clone(),
            team_payoff: result.team_payoff,
            team_eu,
            epoch_eu,
        });
    }

    Ok(records)
}

/// Per-epoch summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u64,
    /// Fraction of tracked pairs in the cooperating state.
    pub density: f64,
    pub team_count: usize,
    pub mean_team_size: f64,
    pub team_payoff: f64,
    pub epoch_eu: f64,
    pub cumulative_eu: f64,
}

/// Trajectory-level summary: per-epoch rows plus aggregate means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_epoch: Vec<EpochMetrics>,
    pub mean_density: f64,
    pub mean_team_count: f64,
    pub mean_team_size: f64,
    pub mean_team_payoff: f64,
    pub total_eu: f64,
}

impl Metrics {
    /// CSV header written by [`Metrics::to_csv`].
    pub const CSV_HEADER: &'static str =
        "epoch,density,team_count,mean_team_size,team_payoff,epoch_eu,cumulative_eu";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.per_epoch {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.epoch,
                row.density,
                row.team_count,
                row.mean_team_size,
                row.team_payoff,
                row.epoch_eu,
                row.cumulative_eu
            ));
        }
        out
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epochs={} mean_density={:.4} mean_team_count={:.2} mean_team_size={:.2} \
             mean_team_payoff={:.4} total_eu={:.4}",
            self.per_epoch.len(),
            self.mean_density,
            self.mean_team_count,
            self.mean_team_size,
            self.mean_team_payoff,
            self.total_eu
        )
    }
}

/// Summarize a trajectory into per-epoch and aggregate metrics.
pub fn metrics(trajectory: &[EpochRecord]) -> Result<Metrics, SimError> {
    if trajectory.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    let mut per_epoch = Vec::with_capacity(trajectory.len());
    let mut cumulative_eu = 0.0;
    for record in trajectory {
        let pairs = record.states.len();
        let cooperating = record
            .states
            .iter()
            .filter(|s| s.state.is_cooperating())
            .count();
        let density = if pairs == 0 {
            0.0
        } else {
            cooperating as f64 / pairs as f64
        };
        let team_count = record.teams.len();
        let member_total: usize = record.teams.iter().map(OrgNode::member_count).sum();
        let mean_team_size = if team_count == 0 {
            0.0
        } else {
            member_total as f64 / team_count as f64
        };
        cumulative_eu += record.epoch_eu;
        per_epoch.push(EpochMetrics {
            epoch: record.epoch,
            density,
            team_count,
            mean_team_size,
            team_payoff: record.team_payoff,
            epoch_eu: record.epoch_eu,
            cumulative_eu,
        });
    }

    let count = per_epoch.len() as f64;
    let mean = |f: fn(&EpochMetrics) -> f64| per_epoch.iter().map(f).sum::<f64>() / count;
    Ok(Metrics {
        mean_density: mean(|r| r.density),
        mean_team_count: mean(|r| r.team_count as f64),
        mean_team_size: mean(|r| r.mean_team_size),
        mean_team_payoff: mean(|r| r.team_payoff),
        total_eu: cumulative_eu,
        per_epoch,
    })
}
