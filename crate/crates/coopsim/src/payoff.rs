//! Belief-weighted payoff evaluation and action-set optimization.
//!
//! Each member of an `n`-robot team picks one action toward each of its
//! `n - 1` partners. A [`PayoffModel`] scores a member's action vector by
//! weighing the cooperate/not payoff tables with the belief that each pair
//! cooperates:
//!
//! ```text
//! C_i(A_i) = sum_j P_ij(c1|a_ij) u_ij(c1, a_ij)
//!          + sum_j P_ij(c0|a_ij) u_ij(c0, a_ij)
//! ```
//!
//! The best joint profile is found either by exhaustive search
//! ([`brute_force_optimize`], the oracle) or by a binary-coded genetic
//! algorithm ([`ga_optimize`]). In directed mode `a_ij` and `a_ji` are
//! independent choices; in symmetric mode they are constrained equal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coop::ActionAlphabet;

/// Default cap on the enumerated search space for brute force.
pub const DEFAULT_BRUTE_CAP: u64 = 1_000_000;

/// Table indexed `[member][partner slot][action]`.
pub type PayoffTensor = Vec<Vec<Vec<f64>>>;

/// Errors from payoff evaluation and optimization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PayoffError {
    #[error("team size must be at least 1")]
    EmptyModel,
    #[error("member index {index} out of range for team of {n}")]
    InvalidMember { index: usize, n: usize },
    #[error("action vector owned by member {owner}, expected member {expected}")]
    WrongOwner { owner: usize, expected: usize },
    #[error("action vector for member {owner} has {len} entries, expected {expected}")]
    MismatchedVector {
        owner: usize,
        len: usize,
        expected: usize,
    },
    #[error("action index {action} out of range for alphabet of {m}")]
    InvalidAction { action: usize, m: usize },
    #[error("profile has {len} vectors, expected {n}")]
    MismatchedProfile { len: usize, n: usize },
    #[error("symmetric profile disagrees on pair ({i}, {j}): a_ij = {a_ij}, a_ji = {a_ji}")]
    AsymmetricPair {
        i: usize,
        j: usize,
        a_ij: usize,
        a_ji: usize,
    },
    #[error("{table} table is malformed: {reason}")]
    MalformedTable { table: &'static str, reason: String },
    #[error("search space of {space} profiles exceeds cap {cap}")]
    TooLarge { space: u128, cap: u64 },
    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),
    #[error("alphabet: {0}")]
    Alphabet(#[from] crate::coop::CoopError),
}

/// Whether `a_ij` and `a_ji` are independent choices or constrained equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Directed,
    Symmetric,
}

/// Partner robot addressed by slot `slot` of member `owner`'s action
/// vector: slots run over the other members in index order.
pub fn partner_of_slot(owner: usize, slot: usize) -> usize {
    if slot < owner {
        slot
    } else {
        slot + 1
    }
}

/// Inverse of [`partner_of_slot`].
pub fn slot_of_partner(owner: usize, partner: usize) -> usize {
    debug_assert_ne!(owner, partner);
    if partner < owner {
        partner
    } else {
        partner - 1
    }
}

/// One member's chosen action toward each of its `n - 1` partners, as
/// alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionVector {
    pub owner: usize,
    pub actions: Vec<usize>,
}

/// One action vector per member, with the symmetric constraint enforced
/// when the mode requires it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointProfile {
    mode: Mode,
    vectors: Vec<ActionVector>,
}

impl JointProfile {
    pub fn new(mode: Mode, vectors: Vec<ActionVector>) -> Result<Self, PayoffError> {
        let n = vectors.len();
        if n == 0 {
            return Err(PayoffError::EmptyModel);
        }
        for (i, vector) in vectors.iter().enumerate() {
            if vector.owner != i {
                return Err(PayoffError::WrongOwner {
                    owner: vector.owner,
                    expected: i,
                });
            }
            if vector.actions.len() != n - 1 {
                return Err(PayoffError::MismatchedVector {
                    owner: i,
                    len: vector.actions.len(),
                    expected: n - 1,
                });
            }
        }
        if mode == Mode::Symmetric {
            for i in 0..n {
                for j in (i + 1)..n {
                    let a_ij = vectors[i].actions[slot_of_partner(i, j)];
                    let a_ji = vectors[j].actions[slot_of_partner(j, i)];
                    if a_ij != a_ji {
                        return Err(PayoffError::AsymmetricPair { i, j, a_ij, a_ji });
                    }
                }
            }
        }
        Ok(JointProfile { mode, vectors })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn vectors(&self) -> &[ActionVector] {
        &self.vectors
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// Action index chosen by `owner` toward `partner`.
    pub fn action(&self, owner: usize, partner: usize) -> usize {
        self.vectors[owner].actions[slot_of_partner(owner, partner)]
    }

    /// Render each member's vector as action symbols.
    pub fn to_symbols(&self, alphabet: &ActionAlphabet) -> Vec<Vec<String>> {
        self.vectors
            .iter()
            .map(|v| {
                v.actions
                    .iter()
                    .map(|&a| alphabet.symbol(a).to_string())
                    .collect()
            })
            .collect()
    }
}

fn check_table_shape(
    table: &'static str,
    data: &[Vec<Vec<f64>>],
    n: usize,
    m: usize,
) -> Result<(), PayoffError> {
    if data.len() != n {
        return Err(PayoffError::MalformedTable {
            table,
            reason: format!("{} member rows, expected {n}", data.len()),
        });
    }
    for (i, member) in data.iter().enumerate() {
        if member.len() != n - 1 {
            return Err(PayoffError::MalformedTable {
                table,
                reason: format!(
                    "member {i} has {} partner slots, expected {}",
                    member.len(),
                    n - 1
                ),
            });
        }
        for (slot, actions) in member.iter().enumerate() {
            if actions.len() != m {
                return Err(PayoffError::MalformedTable {
                    table,
                    reason: format!(
                        "member {i} slot {slot} has {} action entries, expected {m}",
                        actions.len()
                    ),
                });
            }
        }
    }
    Ok(())
}

/// The full decision model: beliefs `P_ij(c1|a)` and payoff tables
/// `u_ij(c, a)`, indexed by `[member][partner slot][action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffModel {
    n: usize,
    alphabet: ActionAlphabet,
    beliefs: Vec<Vec<Vec<f64>>>,
    payoff_coop: Vec<Vec<Vec<f64>>>,
    payoff_noncoop: Vec<Vec<Vec<f64>>>,
}

impl PayoffModel {
    pub fn new(
        n: usize,
        alphabet: ActionAlphabet,
        beliefs: Vec<Vec<Vec<f64>>>,
        payoff_coop: Vec<Vec<Vec<f64>>>,
        payoff_noncoop: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, PayoffError> {
        if n == 0 {
            return Err(PayoffError::EmptyModel);
        }
        let m = alphabet.len();
        check_table_shape("beliefs", &beliefs, n, m)?;
        check_table_shape("payoff_coop", &payoff_coop, n, m)?;
        check_table_shape("payoff_noncoop", &payoff_noncoop, n, m)?;
        for (i, member) in beliefs.iter().enumerate() {
            for (slot, actions) in member.iter().enumerate() {
                for (a, &b) in actions.iter().enumerate() {
                    if !(0.0..=1.0).contains(&b) || b.is_nan() {
                        return Err(PayoffError::MalformedTable {
                            table: "beliefs",
                            reason: format!(
                                "belief {b} for member {i} slot {slot} action {a} outside [0,1]"
                            ),
                        });
                    }
                }
            }
        }
        for (table, data) in [
            ("payoff_coop", &payoff_coop),
            ("payoff_noncoop", &payoff_noncoop),
        ] {
            for (i, member) in data.iter().enumerate() {
                for (slot, actions) in member.iter().enumerate() {
                    for (a, &u) in actions.iter().enumerate() {
                        if !u.is_finite() {
                            return Err(PayoffError::MalformedTable {
                                table,
                                reason: format!(
                                    "payoff {u} for member {i} slot {slot} action {a} \
                                     is not finite"
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(PayoffModel {
            n,
            alphabet,
            beliefs,
            payoff_coop,
            payoff_noncoop,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &ActionAlphabet {
        &self.alphabet
    }

    pub fn belief(&self, owner: usize, slot: usize, action: usize) -> f64 {
        self.beliefs[owner][slot][action]
    }

    pub fn payoff(&self, owner: usize, slot: usize, cooperating: bool, action: usize) -> f64 {
        if cooperating {
            self.payoff_coop[owner][slot][action]
        } else {
            self.payoff_noncoop[owner][slot][action]
        }
    }

    /// Belief-weighted expected payoff of one pair coordinate.
    pub fn expected_pair_payoff(&self, owner: usize, slot: usize, action: usize) -> f64 {
        let b = self.beliefs[owner][slot][action];
        b * self.payoff_coop[owner][slot][action]
            + (1.0 - b) * self.payoff_noncoop[owner][slot][action]
    }

    /// Member payoff `C_i(A_i)`: the cooperative and non-cooperative sums
    /// are accumulated separately, in partner-slot order, then added.
    pub fn member_payoff(&self, member: usize, vector: &ActionVector) -> Result<f64, PayoffError> {
        if member >= self.n {
            return Err(PayoffError::InvalidMember {
                index: member,
                n: self.n,
            });
        }
        if vector.owner != member {
            return Err(PayoffError::WrongOwner {
                owner: vector.owner,
                expected: member,
            });
        }
        if vector.actions.len() != self.n - 1 {
            return Err(PayoffError::MismatchedVector {
                owner: member,
                len: vector.actions.len(),
                expected: self.n - 1,
            });
        }
        let m = self.m();
        let mut coop_sum = 0.0;
        let mut noncoop_sum = 0.0;
        for (slot, &action) in vector.actions.iter().enumerate() {
            if action >= m {
                return Err(PayoffError::InvalidAction { action, m });
            }
            let b = self.beliefs[member][slot][action];
            coop_sum += b * self.payoff_coop[member][slot][action];
            noncoop_sum += (1.0 - b) * self.payoff_noncoop[member][slot][action];
        }
        Ok(coop_sum + noncoop_sum)
    }

    /// Team payoff: the exact sum of member payoffs in member order.
    pub fn team_payoff(&self, profile: &JointProfile) -> Result<f64, PayoffError> {
        if profile.vectors.len() != self.n {
            return Err(PayoffError::MismatchedProfile {
                len: profile.vectors.len(),
                n: self.n,
            });
        }
        let mut total = 0.0;
        for (i, vector) in profile.vectors.iter().enumerate() {
            total += self.member_payoff(i, vector)?;
        }
        Ok(total)
    }

    /// Per-member payoffs in member order.
    pub fn member_payoffs(&self, profile: &JointProfile) -> Result<Vec<f64>, PayoffError> {
        profile
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| self.member_payoff(i, v))
            .collect()
    }
}

/// Standalone optimization problem as stored on disk: tables indexed
/// `[member][partner slot][action]`, where slot `p` of member `i`
/// addresses partner `p` when `p < i` and partner `p + 1` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub mode: Mode,
    pub beliefs: Vec<Vec<Vec<f64>>>,
    pub payoff_coop: Vec<Vec<Vec<f64>>>,
    pub payoff_noncoop: Vec<Vec<Vec<f64>>>,
}

impl ProblemFile {
    /// Itemized list of everything wrong with the file; empty means the
    /// problem is solvable.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.n == 0 {
            issues.push("team size n must be at least 1".to_string());
        }
        let alphabet = match ActionAlphabet::new(self.alphabet.clone()) {
            Ok(a) => Some(a),
            Err(e) => {
                issues.push(format!("alphabet: {e}"));
                None
            }
        };
        let (Some(alphabet), true) = (alphabet, self.n >= 1) else {
            return issues;
        };
        let mut shapes_ok = true;
        for (table, data) in [
            ("beliefs", &self.beliefs),
            ("payoff_coop", &self.payoff_coop),
            ("payoff_noncoop", &self.payoff_noncoop),
        ] {
            if let Err(e) = check_table_shape(table, data, self.n, alphabet.len()) {
                issues.push(e.to_string());
                shapes_ok = false;
            }
        }
        if shapes_ok {
            if let Err(e) = self.build() {
                issues.push(e.to_string());
            }
        }
        issues
    }

    pub fn build(&self) -> Result<(PayoffModel, Mode), PayoffError> {
        let alphabet = ActionAlphabet::new(self.alphabet.clone())?;
        let model = PayoffModel::new(
            self.n,
            alphabet,
            self.beliefs.clone(),
            self.payoff_coop.clone(),
            self.payoff_noncoop.clone(),
        )?;
        Ok((model, self.mode))
    }
}

// ---------------------------------------------------------------------------
// Binary genome coding
// ---------------------------------------------------------------------------

/// Bits needed to address one of `m` actions. Zero when the choice is
/// forced.
pub(crate) fn bits_per_coord(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    }
}

/// Free coordinates of the search space, in genome order: every
/// `(owner, slot)` in directed mode, every pair `(i, j)` with `i < j` in
/// symmetric mode.
pub(crate) fn free_coords(n: usize, mode: Mode) -> Vec<(usize, usize)> {
    match mode {
        Mode::Directed => (0..n)
            .flat_map(|owner| (0..n.saturating_sub(1)).map(move |slot| (owner, slot)))
            .collect(),
        Mode::Symmetric => (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect(),
    }
}

/// Decode a genome into a profile. Each coordinate reads its bits
/// MSB-first; values at or beyond `m` wrap via modulo, so every genome is
/// feasible.
pub(crate) fn decode_genome(bits: &[bool], n: usize, m: usize, mode: Mode) -> JointProfile {
    let coords = free_coords(n, mode);
    let width = bits_per_coord(m);
    debug_assert_eq!(bits.len(), coords.len() * width);
    let mut vectors: Vec<ActionVector> = (0..n)
        .map(|owner| ActionVector {
            owner,
            actions: vec![0; n - 1],
        })
        .collect();
    for (k, &(a, b)) in coords.iter().enumerate() {
        let mut value = 0usize;
        for &bit in &bits[k * width..(k + 1) * width] {
            value = (value << 1) | usize::from(bit);
        }
        let action = if m <= 1 { 0 } else { value % m };
        match mode {
            Mode::Directed => vectors[a].actions[b] = action,
            Mode::Symmetric => {
                vectors[a].actions[slot_of_partner(a, b)] = action;
                vectors[b].actions[slot_of_partner(b, a)] = action;
            }
        }
    }
    JointProfile::new(mode, vectors).expect("decoded genomes are always feasible")
}

/// Canonical genome of a profile: each coordinate's action index encoded
/// MSB-first. The canonical encoding is the smallest genome that decodes
/// to the profile.
pub(crate) fn encode_profile(profile: &JointProfile, m: usize) -> Vec<bool> {
    let coords = free_coords(profile.n(), profile.mode());
    let width = bits_per_coord(m);
    let mut bits = Vec::with_capacity(coords.len() * width);
    for &(a, b) in &coords {
        let action = match profile.mode() {
            Mode::Directed => profile.vectors[a].actions[b],
            Mode::Symmetric => profile.action(a, b),
        };
        for shift in (0..width).rev() {
            bits.push((action >> shift) & 1 == 1);
        }
    }
    bits
}

fn pow_saturating(base: u128, exp: u32) -> u128 {
    base.checked_pow(exp).unwrap_or(u128::MAX)
}

/// Size of the enumerated search space: per-member in directed mode
/// (members decompose), joint over pairs in symmetric mode.
pub fn search_space(n: usize, m: usize, mode: Mode) -> u128 {
    match mode {
        Mode::Directed => pow_saturating(m as u128, (n - 1) as u32),
        Mode::Symmetric => pow_saturating(m as u128, (n * (n - 1) / 2) as u32),
    }
}

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

/// How a result was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Ga,
}

/// Outcome of an optimization run. The team payoff is always the exact
/// member-order sum of the member payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub method: Method,
    pub profile: JointProfile,
    pub member_payoffs: Vec<f64>,
    pub team_payoff: f64,
    pub evaluations: u64,
    pub seed: Option<u64>,
    pub genome: Vec<bool>,
}

/// Serializable rendering of an [`OptimizationResult`] with action symbols
/// and the genome as a bit string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultReport {
    pub method: Method,
    pub mode: Mode,
    pub team_payoff: f64,
    pub member_payoffs: Vec<f64>,
    pub profile: Vec<Vec<String>>,
    pub genome: String,
    pub evaluations: u64,
    pub seed: Option<u64>,
}

impl OptimizationResult {
    pub fn report(&self, alphabet: &ActionAlphabet) -> ResultReport {
        ResultReport {
            method: self.method,
            mode: self.profile.mode(),
            team_payoff: self.team_payoff,
            member_payoffs: self.member_payoffs.clone(),
            profile: self.profile.to_symbols(alphabet),
            genome: self
                .genome
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect(),
            evaluations: self.evaluations,
            seed: self.seed,
        }
    }
}

/// Odometer over `digits` base-`m` digits in lexicographic order (first
/// digit most significant). Yields `false` when the sequence is exhausted.
fn next_assignment(digits: &mut [usize], m: usize) -> bool {
    for digit in digits.iter_mut().rev() {
        *digit += 1;
        if *digit < m {
            return true;
        }
        *digit = 0;
    }
    false
}

fn finish_result(
    model: &PayoffModel,
    method: Method,
    profile: JointProfile,
    evaluations: u64,
    seed: Option<u64>,
    genome: Vec<bool>,
) -> Result<OptimizationResult, PayoffError> {
    let member_payoffs = model.member_payoffs(&profile)?;
    let team_payoff = model.team_payoff(&profile)?;
    Ok(OptimizationResult {
        method,
        profile,
        member_payoffs,
        team_payoff,
        evaluations,
        seed,
        genome,
    })
}

/// Exhaustively find the team-payoff-optimal profile. Ties go to the
/// lexicographically smallest genome. In directed mode each member's
/// vector is enumerated independently (member payoffs decompose); in
/// symmetric mode every joint pair assignment is enumerated.
pub fn brute_force_optimize(
    model: &PayoffModel,
    mode: Mode,
) -> Result<OptimizationResult, PayoffError> {
    brute_force_optimize_capped(model, mode, DEFAULT_BRUTE_CAP)
}

pub fn brute_force_optimize_capped(
    model: &PayoffModel,
    mode: Mode,
    cap: u64,
) -> Result<OptimizationResult, PayoffError> {
    let n = model.n();
    let m = model.m();
    let space = search_space(n, m, mode);
    if space > cap as u128 {
        return Err(PayoffError::TooLarge { space, cap });
    }

    let mut evaluations = 0u64;
    let profile = match mode {
        Mode::Directed => {
            let mut vectors = Vec::with_capacity(n);
            for member in 0..n {
                let mut digits = vec![0usize; n - 1];
                let mut best: Option<(f64, Vec<usize>)> = None;
                loop {
                    let candidate = ActionVector {
                        owner: member,
                        actions: digits.clone(),
                    };
                    let payoff = model.member_payoff(member, &candidate)?;
                    evaluations += 1;
                    // Strict improvement only: the first optimum found in
                    // lexicographic order wins ties.
                    if best.as_ref().is_none_or(|(b, _)| payoff > *b) {
                        best = Some((payoff, digits.clone()));
                    }
                    if !next_assignment(&mut digits, m) {
                        break;
                    }
                }
                let (_, actions) = best.expect("at least one assignment enumerated");
                vectors.push(ActionVector {
                    owner: member,
                    actions,
                });
            }
            JointProfile::new(mode, vectors)?
        }
        Mode::Symmetric => {
            let coords = free_coords(n, mode);
            let mut digits = vec![0usize; coords.len()];
            let mut best: Option<(f64, Vec<usize>)> = None;
            loop {
                let profile = symmetric_profile(n, &coords, &digits);
                let payoff = model.team_payoff(&profile)?;
                evaluations += 1;
                if best.as_ref().is_none_or(|(b, _)| payoff > *b) {
                    best = Some((payoff, digits.clone()));
                }
                if !next_assignment(&mut digits, m) {
                    break;
                }
            }
            let (_, digits) = best.expect("at least one assignment enumerated");
            symmetric_profile(n, &coords, &digits)
        }
    };

    let genome = encode_profile(&profile, m);
    finish_result(model, Method::Brute, profile, evaluations, None, genome)
}

fn symmetric_profile(n: usize, coords: &[(usize, usize)], digits: &[usize]) -> JointProfile {
    let mut vectors: Vec<ActionVector> = (0..n)
        .map(|owner| ActionVector {
            owner,
            actions: vec![0; n - 1],
        })
        .collect();
    for (&(i, j), &action) in coords.iter().zip(digits) {
        vectors[i].actions[slot_of_partner(i, j)] = action;
        vectors[j].actions[slot_of_partner(j, i)] = action;
    }
    JointProfile::new(Mode::Symmetric, vectors).expect("pair assignments are symmetric")
}

/// Genetic-algorithm parameters. The defaults suit the desk-scale
/// instances this library targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / genome length`.
    pub mutation_rate: Option<f64>,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 32,
            generations: 200,
            tournament: 2,
            crossover_rate: 0.9,
            mutation_rate: None,
            elitism: 1,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), PayoffError> {
        if self.population < 2 {
            return Err(PayoffError::InvalidParams(format!(
                "population {} is below 2",
                self.population
            )));
        }
        if self.tournament == 0 || self.tournament > self.population {
            return Err(PayoffError::InvalidParams(format!(
                "tournament size {} must be in 1..=population",
                self.tournament
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || self.crossover_rate.is_nan() {
            return Err(PayoffError::InvalidParams(format!(
                "crossover rate {} outside [0,1]",
                self.crossover_rate
            )));
        }
        if let Some(rate) = self.mutation_rate {
            if !(0.0..=1.0).contains(&rate) || rate.is_nan() {
                return Err(PayoffError::InvalidParams(format!(
                    "mutation rate {rate} outside [0,1]"
                )));
            }
        }
        if self.elitism >= self.population {
            return Err(PayoffError::InvalidParams(format!(
                "elitism {} must be below population {}",
                self.elitism, self.population
            )));
        }
        Ok(())
    }
}

/// Generational GA over binary genomes: tournament selection, one-point
/// crossover, per-bit mutation, elitism. Fitness is the team payoff, every
/// genome decodes to a feasible profile, and the result is a pure function
/// of `(model, mode, params, seed)`.
pub fn ga_optimize(
    model: &PayoffModel,
    mode: Mode,
    params: &GaParams,
    seed: u64,
) -> Result<OptimizationResult, PayoffError> {
    params.validate()?;
    let n = model.n();
    let m = model.m();
    let coords = free_coords(n, mode);
    let genome_len = coords.len() * bits_per_coord(m);

    if genome_len == 0 {
        // The search space has a single profile; nothing to evolve.
        let profile = decode_genome(&[], n, m, mode);
        return finish_result(model, Method::Ga, profile, 1, Some(seed), Vec::new());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mutation_rate = params.mutation_rate.unwrap_or(1.0 / genome_len as f64);

    let evaluate = |genome: &[bool]| -> Result<f64, PayoffError> {
        let profile = decode_genome(genome, n, m, mode);
        model.team_payoff(&profile)
    };

    let mut population: Vec<Vec<bool>> = (0..params.population)
        .map(|_| (0..genome_len).map(|_| rng.gen::<bool>()).collect())
        .collect();
    let mut fitness = Vec::with_capacity(params.population);
    for genome in &population {
        fitness.push(evaluate(genome)?);
    }
    let mut evaluations = params.population as u64;

    let mut best_genome = population[0].clone();
    let mut best_fitness = fitness[0];
    fn note_best(genome: &[bool], fit: f64, best_genome: &mut Vec<bool>, best_fitness: &mut f64) {
        if fit > *best_fitness || (fit == *best_fitness && genome < best_genome.as_slice()) {
            best_genome.clear();
            best_genome.extend_from_slice(genome);
            *best_fitness = fit;
        }
    }
    for (genome, &fit) in population.iter().zip(&fitness) {
        note_best(genome, fit, &mut best_genome, &mut best_fitness);
    }

    fn beats(a: usize, b: usize, fitness: &[f64], population: &[Vec<bool>]) -> bool {
        fitness[a] > fitness[b] || (fitness[a] == fitness[b] && population[a] < population[b])
    }

    for _ in 0..params.generations {
        // Elites carry over unchanged, ranked by fitness then genome.
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| {
            fitness[b]
                .total_cmp(&fitness[a])
                .then_with(|| population[a].cmp(&population[b]))
        });
        let mut next: Vec<Vec<bool>> = Vec::with_capacity(params.population);
        let mut next_fitness: Vec<f64> = Vec::with_capacity(params.population);
        for &i in order.iter().take(params.elitism) {
            next.push(population[i].clone());
            next_fitness.push(fitness[i]);
        }

        while next.len() < params.population {
            let mut pick = || {
                let mut best = rng.gen_range(0..population.len());
                for _ in 1..params.tournament {
                    let challenger = rng.gen_range(0..population.len());
                    if beats(challenger, best, &fitness, &population) {
                        best = challenger;
                    }
                }
                best
            };
            let p1 = pick();
            let p2 = pick();
            let (mut c1, mut c2) = if genome_len >= 2 && rng.gen::<f64>() < params.crossover_rate {
                let point = rng.gen_range(1..genome_len);
                let mut c1 = population[p1][..point].to_vec();
                c1.extend_from_slice(&population[p2][point..]);
                let mut c2 = population[p2][..point].to_vec();
                c2.extend_from_slice(&population[p1][point..]);
                (c1, c2)
            } else {
                (population[p1].clone(), population[p2].clone())
            };
            for child in [&mut c1, &mut c2] {
                for bit in child.iter_mut() {
                    if rng.gen::<f64>() < mutation_rate {
                        *bit = !*bit;
                    }
                }
            }
            for child in [c1, c2] {
                if next.len() < params.population {
                    let fit = evaluate(&child)?;
                    evaluations += 1;
                    note_best(&child, fit, &mut best_genome, &mut best_fitness);
                    next.push(child);
                    next_fitness.push(fit);
                }
            }
        }

        population = next;
        fitness = next_fitness;
    }

    let profile = decode_genome(&best_genome, n, m, mode);
    finish_result(
        model,
        Method::Ga,
        profile,
        evaluations,
        Some(seed),
        best_genome,
    )
}

// ---------------------------------------------------------------------------
// Demand checking
// ---------------------------------------------------------------------------

/// A pair where a member would unilaterally prefer a different action than
/// the profile assigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandConflict {
    pub member: usize,
    pub partner: usize,
    pub preferred: String,
    pub assigned: String,
}

/// Whether a result meets the two optimality demands: each member's vector
/// maximizes its own payoff, and the profile maximizes the team payoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandReport {
    pub member_optimal: Vec<bool>,
    pub team_optimal: bool,
    /// Populated in symmetric mode only, where the two demands can
    /// genuinely disagree; conflicts are reported, not resolved.
    pub conflicts: Vec<DemandConflict>,
}

/// Check both optimality demands for a result. In directed mode member
/// payoffs decompose per coordinate, so a team-optimal profile satisfies
/// both demands at once; in symmetric mode the shared pair actions can
/// pull members apart and each disagreement is listed.
pub fn check_demands(
    model: &PayoffModel,
    result: &OptimizationResult,
) -> Result<DemandReport, PayoffError> {
    check_demands_capped(model, result, DEFAULT_BRUTE_CAP)
}

pub fn check_demands_capped(
    model: &PayoffModel,
    result: &OptimizationResult,
    cap: u64,
) -> Result<DemandReport, PayoffError> {
    let n = model.n();
    let mode = result.profile.mode();
    let alphabet = model.alphabet();

    // Member payoffs are separable per partner slot, so the best reachable
    // vector is the per-slot argmax (ties to the smallest action index).
    let mut member_optimal = Vec::with_capacity(n);
    let mut conflicts = Vec::new();
    for (i, vector) in result.profile.vectors().iter().enumerate() {
        let mut best_actions = Vec::with_capacity(vector.actions.len());
        for slot in 0..vector.actions.len() {
            let best = (0..model.m())
                .max_by(|&a, &b| {
                    model
                        .expected_pair_payoff(i, slot, a)
                        .total_cmp(&model.expected_pair_payoff(i, slot, b))
                        .then(b.cmp(&a))
                })
                .expect("alphabet is nonempty");
            best_actions.push(best);
        }
        let best_vector = ActionVector {
            owner: i,
            actions: best_actions,
        };
        let actual = model.member_payoff(i, vector)?;
        let best = model.member_payoff(i, &best_vector)?;
        member_optimal.push(actual == best);

        if mode == Mode::Symmetric {
            for (slot, (&assigned, &preferred)) in
                vector.actions.iter().zip(&best_vector.actions).enumerate()
            {
                let assigned_value = model.expected_pair_payoff(i, slot, assigned);
                let preferred_value = model.expected_pair_payoff(i, slot, preferred);
                if assigned_value < preferred_value {
                    conflicts.push(DemandConflict {
                        member: i,
                        partner: partner_of_slot(i, slot),
                        preferred: alphabet.symbol(preferred).to_string(),
                        assigned: alphabet.symbol(assigned).to_string(),
                    });
                }
            }
        }
    }

    let optimum = brute_force_optimize_capped(model, mode, cap)?;
    let team_optimal = result.team_payoff == optimum.team_payoff;

    Ok(DemandReport {
        member_optimal,
        team_optimal,
        conflicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet(m: usize) -> ActionAlphabet {
        ActionAlphabet::new((0..m).map(|i| format!("a{i}"))).unwrap()
    }

    /// Uniform-tables model builder: one belief and payoff pair repeated
    /// for every coordinate.
    fn simple_model(n: usize, m: usize, belief: f64, u1: f64, u0: f64) -> PayoffModel {
        let beliefs = vec![vec![vec![belief; m]; n - 1]; n];
        let coop = vec![vec![vec![u1; m]; n - 1]; n];
        let noncoop = vec![vec![vec![u0; m]; n - 1]; n];
        PayoffModel::new(n, alphabet(m), beliefs, coop, noncoop).unwrap()
    }

    fn random_tensor(
        rng: &mut ChaCha8Rng,
        n: usize,
        m: usize,
        lo: f64,
        hi: f64,
    ) -> Vec<Vec<Vec<f64>>> {
        (0..n)
            .map(|_| {
                (0..n - 1)
                    .map(|_| (0..m).map(|_| rng.gen_range(lo..hi)).collect())
                    .collect()
            })
            .collect()
    }

    fn random_model(n: usize, m: usize, seed: u64) -> PayoffModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beliefs = random_tensor(&mut rng, n, m, 0.0, 1.0);
        let coop = random_tensor(&mut rng, n, m, -10.0, 10.0);
        let noncoop = random_tensor(&mut rng, n, m, -10.0, 10.0);
        PayoffModel::new(n, alphabet(m), beliefs, coop, noncoop).unwrap()
    }

    #[test]
    fn member_payoff_worked_example() {
        // 0.7 * 10 + 0.3 * (-2) = 6.4
        let model = simple_model(2, 1, 0.7, 10.0, -2.0);
        let v = ActionVector {
            owner: 0,
            actions: vec![0],
        };
        let payoff = model.member_payoff(0, &v).unwrap();
        assert!((payoff - 6.4).abs() < 1e-12);
    }

    #[test]
    fn member_payoff_all_zero_tables() {
        let model = simple_model(3, 2, 0.4, 0.0, 0.0);
        let v = ActionVector {
            owner: 1,
            actions: vec![0, 1],
        };
        assert_eq!(model.member_payoff(1, &v).unwrap(), 0.0);
    }

    #[test]
    fn member_payoff_certainty_collapses_to_coop_sum() {
        let model = simple_model(3, 2, 1.0, 4.0, -100.0);
        let v = ActionVector {
            owner: 0,
            actions: vec![0, 1],
        };
        assert_eq!(model.member_payoff(0, &v).unwrap(), 8.0);
    }

    #[test]
    fn member_payoff_rejects_bad_member_and_vector() {
        let model = simple_model(2, 2, 0.5, 1.0, 0.0);
        let v = ActionVector {
            owner: 5,
            actions: vec![0],
        };
        assert!(matches!(
            model.member_payoff(5, &v),
            Err(PayoffError::InvalidMember { .. })
        ));
        let bad = ActionVector {
            owner: 0,
            actions: vec![0, 1],
        };
        assert!(matches!(
            model.member_payoff(0, &bad),
            Err(PayoffError::MismatchedVector { .. })
        ));
    }

    #[test]
    fn team_payoff_sums_members() {
        // Each member: 0.7 * 10 + 0.3 * (-2) = 6.4; team = 12.8
        let model = simple_model(2, 1, 0.7, 10.0, -2.0);
        let profile = JointProfile::new(
            Mode::Directed,
            vec![
                ActionVector {
                    owner: 0,
                    actions: vec![0],
                },
                ActionVector {
                    owner: 1,
                    actions: vec![0],
                },
            ],
        )
        .unwrap();
        assert!((model.team_payoff(&profile).unwrap() - 12.8).abs() < 1e-12);
    }

    #[test]
    fn team_payoff_single_member_is_zero() {
        let model =
            PayoffModel::new(1, alphabet(2), vec![vec![]], vec![vec![]], vec![vec![]]).unwrap();
        let profile = JointProfile::new(
            Mode::Directed,
            vec![ActionVector {
                owner: 0,
                actions: vec![],
            }],
        )
        .unwrap();
        assert_eq!(model.team_payoff(&profile).unwrap(), 0.0);
    }

    #[test]
    fn brute_force_single_action_space() {
        let model = simple_model(3, 1, 0.5, 2.0, 1.0);
        let result = brute_force_optimize(&model, Mode::Directed).unwrap();
        assert_eq!(result.evaluations, 3);
        assert!(result.genome.is_empty());
        for v in result.profile.vectors() {
            assert_eq!(v.actions, vec![0, 0]);
        }
    }

    #[test]
    fn brute_force_dominating_action() {
        // u(c1,a)=1, u(c1,b)=5, u(c0,.)=0, beliefs 0.5: action b dominates
        // and the team payoff is 2 * (0.5 * 5) = 5.
        let n = 2;
        let beliefs = vec![vec![vec![0.5, 0.5]]; n];
        let coop = vec![vec![vec![1.0, 5.0]]; n];
        let noncoop = vec![vec![vec![0.0, 0.0]]; n];
        let model = PayoffModel::new(n, alphabet(2), beliefs, coop, noncoop).unwrap();
        let result = brute_force_optimize(&model, Mode::Directed).unwrap();
        assert!((result.team_payoff - 5.0).abs() < 1e-12);
        for v in result.profile.vectors() {
            assert_eq!(v.actions, vec![1]);
        }
    }

    #[test]
    fn brute_force_matches_coordinate_argmax_on_random_instances() {
        for seed in 0..20u64 {
            let n = 2 + (seed as usize % 3);
            let m = 2 + (seed as usize / 7 % 3);
            let model = random_model(n, m, 1000 + seed);
            let brute = brute_force_optimize(&model, Mode::Directed).unwrap();
            for (i, v) in brute.profile.vectors().iter().enumerate() {
                for (slot, &action) in v.actions.iter().enumerate() {
                    let chosen = model.expected_pair_payoff(i, slot, action);
                    for other in 0..m {
                        assert!(
                            chosen >= model.expected_pair_payoff(i, slot, other),
                            "coordinate ({i},{slot}) not argmax"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_tie_break_prefers_smallest_genome() {
        // All payoffs identical: every profile ties, so the all-zeros
        // genome must win.
        let model = simple_model(3, 2, 0.5, 1.0, 1.0);
        for mode in [Mode::Directed, Mode::Symmetric] {
            let result = brute_force_optimize(&model, mode).unwrap();
            assert!(result.genome.iter().all(|&b| !b));
        }
    }

    #[test]
    fn brute_force_rejects_oversized_space() {
        let model = simple_model(12, 6, 0.5, 1.0, 0.0);
        let result = brute_force_optimize(&model, Mode::Symmetric);
        assert!(matches!(result, Err(PayoffError::TooLarge { .. })));
    }

    #[test]
    fn ga_single_profile_short_circuits() {
        let model = simple_model(3, 1, 0.5, 2.0, 1.0);
        let result = ga_optimize(&model, Mode::Directed, &GaParams::default(), 9).unwrap();
        assert_eq!(result.evaluations, 1);
        assert_eq!(result.method, Method::Ga);
    }

    #[test]
    fn ga_is_deterministic_for_fixed_seed() {
        let model = random_model(3, 3, 99);
        let params = GaParams::default();
        let a = ga_optimize(&model, Mode::Directed, &params, 1234).unwrap();
        let b = ga_optimize(&model, Mode::Directed, &params, 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ga_never_beats_brute_force() {
        for seed in 0..10 {
            let model = random_model(3, 3, 400 + seed);
            for mode in [Mode::Directed, Mode::Symmetric] {
                let brute = brute_force_optimize(&model, mode).unwrap();
                let ga = ga_optimize(&model, mode, &GaParams::default(), seed).unwrap();
                assert!(ga.team_payoff <= brute.team_payoff);
            }
        }
    }

    #[test]
    fn ga_rejects_invalid_params() {
        let model = simple_model(2, 2, 0.5, 1.0, 0.0);
        let params = GaParams {
            population: 1,
            ..GaParams::default()
        };
        assert!(matches!(
            ga_optimize(&model, Mode::Directed, &params, 0),
            Err(PayoffError::InvalidParams(_))
        ));
    }

    #[test]
    fn result_team_payoff_is_exact_member_sum() {
        let model = random_model(4, 3, 5);
        let result = brute_force_optimize(&model, Mode::Directed).unwrap();
        let recomputed: f64 = result
            .profile
            .vectors()
            .iter()
            .enumerate()
            .fold(0.0, |acc, (i, v)| acc + model.member_payoff(i, v).unwrap());
        assert_eq!(result.team_payoff, recomputed);
    }

    #[test]
    fn scaling_payoffs_preserves_the_optimum_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let beliefs = random_tensor(&mut rng, 3, 3, 0.0, 1.0);
        let coop = random_tensor(&mut rng, 3, 3, -10.0, 10.0);
        let noncoop = random_tensor(&mut rng, 3, 3, -10.0, 10.0);
        let model = PayoffModel::new(
            3,
            alphabet(3),
            beliefs.clone(),
            coop.clone(),
            noncoop.clone(),
        )
        .unwrap();
        let base = brute_force_optimize(&model, Mode::Directed).unwrap();
        for k in [0.5, 3.0, 100.0] {
            let scale = |t: &Vec<Vec<Vec<f64>>>| -> Vec<Vec<Vec<f64>>> {
                t.iter()
                    .map(|m| {
                        m.iter()
                            .map(|s| s.iter().map(|&u| u * k).collect())
                            .collect()
                    })
                    .collect()
            };
            let scaled = PayoffModel::new(
                3,
                alphabet(3),
                beliefs.clone(),
                scale(&coop),
                scale(&noncoop),
            )
            .unwrap();
            let result = brute_force_optimize(&scaled, Mode::Directed).unwrap();
            assert_eq!(result.profile, base.profile, "k = {k}");
        }
    }

    #[test]
    fn check_demands_directed_brute_satisfies_both() {
        for seed in 0..5 {
            let model = random_model(3, 3, 600 + seed);
            let result = brute_force_optimize(&model, Mode::Directed).unwrap();
            let report = check_demands(&model, &result).unwrap();
            assert!(report.member_optimal.iter().all(|&ok| ok));
            assert!(report.team_optimal);
            assert!(report.conflicts.is_empty());
        }
    }

    #[test]
    fn check_demands_symmetric_reports_conflict() {
        // Two members share one action. Member 0 prefers a0 (5 vs 0);
        // member 1 prefers a1 (6 vs 0); the team optimum picks a1,
        // leaving exactly one conflict for member 0.
        // Enumeration: profile a0 -> 5 + 0 = 5; profile a1 -> 0 + 6 = 6.
        let beliefs = vec![vec![vec![1.0, 1.0]]; 2];
        let coop = vec![vec![vec![5.0, 0.0]], vec![vec![0.0, 6.0]]];
        let noncoop = vec![vec![vec![0.0, 0.0]]; 2];
        let model = PayoffModel::new(2, alphabet(2), beliefs, coop, noncoop).unwrap();
        let result = brute_force_optimize(&model, Mode::Symmetric).unwrap();
        assert!((result.team_payoff - 6.0).abs() < 1e-12);

        let report = check_demands(&model, &result).unwrap();
        assert!(report.team_optimal);
        assert_eq!(report.member_optimal, vec![false, true]);
        assert_eq!(report.conflicts.len(), 1);
        let conflict = &report.conflicts[0];
        assert_eq!((conflict.member, conflict.partner), (0, 1));
        assert_eq!(conflict.preferred, "a0");
        assert_eq!(conflict.assigned, "a1");
    }

    #[test]
    fn check_demands_single_member_vacuous() {
        let model =
            PayoffModel::new(1, alphabet(2), vec![vec![]], vec![vec![]], vec![vec![]]).unwrap();
        let result = brute_force_optimize(&model, Mode::Directed).unwrap();
        let report = check_demands(&model, &result).unwrap();
        assert_eq!(report.member_optimal, vec![true]);
        assert!(report.team_optimal);
        assert!(report.conflicts.is_empty());
    }

    #[test]
    fn genome_coding_round_trip_and_modulo() {
        // m = 3 needs 2 bits; the out-of-range value 3 wraps to action 0.
        assert_eq!(bits_per_coord(1), 0);
        assert_eq!(bits_per_coord(2), 1);
        assert_eq!(bits_per_coord(3), 2);
        assert_eq!(bits_per_coord(4), 2);
        assert_eq!(bits_per_coord(5), 3);

        let wrapped = decode_genome(&[true, true, false, false], 2, 3, Mode::Directed);
        assert_eq!(wrapped.vectors()[0].actions, vec![0]); // 0b11 = 3 % 3 = 0
        assert_eq!(wrapped.vectors()[1].actions, vec![0]);

        let profile = JointProfile::new(
            Mode::Directed,
            vec![
                ActionVector {
                    owner: 0,
                    actions: vec![2],
                },
                ActionVector {
                    owner: 1,
                    actions: vec![1],
                },
            ],
        )
        .unwrap();
        let bits = encode_profile(&profile, 3);
        assert_eq!(bits, vec![true, false, false, true]);
        assert_eq!(decode_genome(&bits, 2, 3, Mode::Directed), profile);
    }

    #[test]
    fn symmetric_profile_constraint_enforced() {
        let bad = JointProfile::new(
            Mode::Symmetric,
            vec![
                ActionVector {
                    owner: 0,
                    actions: vec![0],
                },
                ActionVector {
                    owner: 1,
                    actions: vec![1],
                },
            ],
        );
        assert!(matches!(bad, Err(PayoffError::AsymmetricPair { .. })));
    }

    #[test]
    fn search_space_sizes() {
        assert_eq!(search_space(4, 3, Mode::Directed), 27); // 3^(4-1)
        assert_eq!(search_space(4, 3, Mode::Symmetric), 729); // 3^6
        assert_eq!(search_space(1, 5, Mode::Directed), 1);
    }

    #[test]
    fn report_renders_symbols_and_bits() {
        let model = simple_model(2, 2, 0.5, 1.0, 0.0);
        let result = brute_force_optimize(&model, Mode::Directed).unwrap();
        let report = result.report(model.alphabet());
        assert_eq!(report.profile.len(), 2);
        assert_eq!(report.genome.len(), result.genome.len());
        assert!(report.genome.chars().all(|c| c == '0' || c == '1'));
    }
}
