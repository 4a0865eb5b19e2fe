//! Pairwise cooperation beliefs and their Markov-chain evolution.
//!
//! Any two entities are always in one of two states: cooperating or not.
//! A [`PairModel`] holds the prior belief that a pair cooperates together
//! with per-action likelihood tables under each hypothesis. Observing an
//! action yields Bayesian posteriors, and the posteriors assemble into a
//! 2x2 row-stochastic [`TransitionMatrix`] that drives the per-epoch
//! evolution of the pair's state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for algebraic identities on probabilities (normalization,
/// row-stochasticity, Chapman-Kolmogorov).
pub const PROB_TOL: f64 = 1e-12;

/// Errors from belief and transition-matrix operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoopError {
    #[error("action alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate action symbol `{0}`")]
    DuplicateAction(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("{what} is {value}, outside [0,1]")]
    InvalidProbability { what: String, value: f64 },
    #[error("likelihood table for {hypothesis} has {len} entries, alphabet has {expected}")]
    MisalignedLikelihoods {
        hypothesis: &'static str,
        len: usize,
        expected: usize,
    },
    #[error("likelihood table for {hypothesis} sums to {sum}, expected 1")]
    UnnormalizedLikelihoods { hypothesis: &'static str, sum: f64 },
    #[error("action `{0}` has zero evidence under both hypotheses")]
    UndefinedPosterior(String),
    #[error("every action has zero evidence; transition matrix is undefined")]
    DegenerateModel,
    #[error("cannot aggregate an empty list of transition matrices")]
    EmptyAggregate,
    #[error("both states are absorbing; the stationary distribution is not unique")]
    NonErgodic,
    #[error("transition row [{a}, {b}] sums to {sum}, expected 1")]
    UnstochasticRow { a: f64, b: f64, sum: f64 },
    #[error("cooperation state must be 0 or 1, got {0}")]
    InvalidState(u8),
}

/// Binary cooperation state of a pair: cooperating (1) or not (0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum CoopState {
    #[default]
    NotCooperating,
    Cooperating,
}

impl CoopState {
    pub fn is_cooperating(self) -> bool {
        self == CoopState::Cooperating
    }

    pub fn as_bit(self) -> u8 {
        match self {
            CoopState::Cooperating => 1,
            CoopState::NotCooperating => 0,
        }
    }

    pub fn from_bit(bit: u8) -> Result<Self, CoopError> {
        match bit {
            0 => Ok(CoopState::NotCooperating),
            1 => Ok(CoopState::Cooperating),
            other => Err(CoopError::InvalidState(other)),
        }
    }
}

impl From<CoopState> for u8 {
    fn from(state: CoopState) -> u8 {
        state.as_bit()
    }
}

impl TryFrom<u8> for CoopState {
    type Error = CoopError;

    fn try_from(bit: u8) -> Result<Self, CoopError> {
        CoopState::from_bit(bit)
    }
}

/// Ordered set of distinct action symbols available to a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ActionAlphabet {
    symbols: Vec<String>,
}

impl ActionAlphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, CoopError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(CoopError::EmptyAlphabet);
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(CoopError::DuplicateAction(s.clone()));
            }
        }
        Ok(ActionAlphabet { symbols })
    }

    /// Number of actions, `m`.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false: an alphabet holds at least one symbol.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(String::as_str)
    }
}

impl TryFrom<Vec<String>> for ActionAlphabet {
    type Error = CoopError;

    fn try_from(symbols: Vec<String>) -> Result<Self, CoopError> {
        ActionAlphabet::new(symbols)
    }
}

impl From<ActionAlphabet> for Vec<String> {
    fn from(alphabet: ActionAlphabet) -> Vec<String> {
        alphabet.symbols
    }
}

/// Raw JSON form of a [`PairModel`], validated on conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModelSpec {
    pub alphabet: Vec<String>,
    pub prior_coop: f64,
    pub likelihood_coop: Vec<f64>,
    pub likelihood_noncoop: Vec<f64>,
}

/// Belief state for one pair: prior probability of cooperation plus the
/// per-action likelihood tables under the cooperating and non-cooperating
/// hypotheses. Likelihood tables are aligned to the alphabet and each sums
/// to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairModelSpec", into = "PairModelSpec")]
pub struct PairModel {
    alphabet: ActionAlphabet,
    prior_coop: f64,
    likelihood_coop: Vec<f64>,
    likelihood_noncoop: Vec<f64>,
}

fn check_probability(what: &str, value: f64) -> Result<(), CoopError> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(CoopError::InvalidProbability {
            what: what.to_string(),
            value,
        });
    }
    Ok(())
}

fn check_likelihoods(
    hypothesis: &'static str,
    table: &[f64],
    expected: usize,
) -> Result<(), CoopError> {
    if table.len() != expected {
        return Err(CoopError::MisalignedLikelihoods {
            hypothesis,
            len: table.len(),
            expected,
        });
    }
    for (i, &p) in table.iter().enumerate() {
        check_probability(&format!("{hypothesis} likelihood[{i}]"), p)?;
    }
    let sum: f64 = table.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(CoopError::UnnormalizedLikelihoods { hypothesis, sum });
    }
    Ok(())
}

impl PairModel {
    pub fn new(
        alphabet: ActionAlphabet,
        prior_coop: f64,
        likelihood_coop: Vec<f64>,
        likelihood_noncoop: Vec<f64>,
    ) -> Result<Self, CoopError> {
        check_probability("prior_coop", prior_coop)?;
        check_likelihoods("cooperating", &likelihood_coop, alphabet.len())?;
        check_likelihoods("non-cooperating", &likelihood_noncoop, alphabet.len())?;
        Ok(PairModel {
            alphabet,
            prior_coop,
            likelihood_coop,
            likelihood_noncoop,
        })
    }

    pub fn alphabet(&self) -> &ActionAlphabet {
        &self.alphabet
    }

    /// Prior probability that the pair cooperates.
    pub fn prior_coop(&self) -> f64 {
        self.prior_coop
    }

    /// Implied complement of the cooperation prior.
    pub fn prior_noncoop(&self) -> f64 {
        1.0 - self.prior_coop
    }

    pub fn likelihood_coop(&self, action: &str) -> Result<f64, CoopError> {
        Ok(self.likelihood_coop[self.index(action)?])
    }

    pub fn likelihood_noncoop(&self, action: &str) -> Result<f64, CoopError> {
        Ok(self.likelihood_noncoop[self.index(action)?])
    }

    /// Same likelihood tables, new prior. Used when posteriors feed back
    /// into the next epoch's prior.
    pub fn with_prior(&self, prior_coop: f64) -> Result<Self, CoopError> {
        check_probability("prior_coop", prior_coop)?;
        Ok(PairModel {
            prior_coop,
            ..self.clone()
        })
    }

    fn index(&self, action: &str) -> Result<usize, CoopError> {
        self.alphabet
            .index_of(action)
            .ok_or_else(|| CoopError::UnknownAction(action.to_string()))
    }

    fn evidence_at(&self, idx: usize) -> f64 {
        self.likelihood_coop[idx] * self.prior_coop
            + self.likelihood_noncoop[idx] * (1.0 - self.prior_coop)
    }

    /// Total probability of observing `action` under both hypotheses.
    pub fn evidence(&self, action: &str) -> Result<f64, CoopError> {
        Ok(self.evidence_at(self.index(action)?))
    }

    /// Posterior probability of cooperation given an observed action.
    pub fn posterior_coop(&self, action: &str) -> Result<f64, CoopError> {
        let idx = self.index(action)?;
        let evidence = self.evidence_at(idx);
        if evidence == 0.0 {
            return Err(CoopError::UndefinedPosterior(action.to_string()));
        }
        Ok(self.likelihood_coop[idx] * self.prior_coop / evidence)
    }

    /// Posterior probability of non-cooperation given an observed action.
    pub fn posterior_noncoop(&self, action: &str) -> Result<f64, CoopError> {
        let idx = self.index(action)?;
        let evidence = self.evidence_at(idx);
        if evidence == 0.0 {
            return Err(CoopError::UndefinedPosterior(action.to_string()));
        }
        Ok(self.likelihood_noncoop[idx] * (1.0 - self.prior_coop) / evidence)
    }

    /// Transition matrix for this pair:
    ///
    /// ```text
    /// p11 = sum_a P(a|c1) * P(c1|a)      p10 = 1 - p11
    /// p01 = sum_a P(a|c0) * P(c0|a)      p00 = 1 - p01
    /// ```
    ///
    /// Each free entry is an expectation of a posterior under that
    /// hypothesis's action distribution, so it lies in `[0,1]` and the rows
    /// are stochastic by construction. Actions with zero evidence
    /// contribute zero to both sums and are skipped; if every action is
    /// degenerate the matrix is undefined.
    pub fn transition_matrix(&self) -> Result<TransitionMatrix, CoopError> {
        let mut p11 = 0.0;
        let mut p01 = 0.0;
        let mut informative = false;
        for idx in 0..self.alphabet.len() {
            let evidence = self.evidence_at(idx);
            if evidence == 0.0 {
                continue;
            }
            informative = true;
            let posterior_coop = self.likelihood_coop[idx] * self.prior_coop / evidence;
            let posterior_noncoop =
                self.likelihood_noncoop[idx] * (1.0 - self.prior_coop) / evidence;
            p11 += self.likelihood_coop[idx] * posterior_coop;
            p01 += self.likelihood_noncoop[idx] * posterior_noncoop;
        }
        if !informative {
            return Err(CoopError::DegenerateModel);
        }
        TransitionMatrix::from_rates(p11.clamp(0.0, 1.0), p01.clamp(0.0, 1.0))
    }
}

impl TryFrom<PairModelSpec> for PairModel {
    type Error = CoopError;

    fn try_from(spec: PairModelSpec) -> Result<Self, CoopError> {
        PairModel::new(
            ActionAlphabet::new(spec.alphabet)?,
            spec.prior_coop,
            spec.likelihood_coop,
            spec.likelihood_noncoop,
        )
    }
}

impl From<PairModel> for PairModelSpec {
    fn from(model: PairModel) -> PairModelSpec {
        PairModelSpec {
            alphabet: model.alphabet.into(),
            prior_coop: model.prior_coop,
            likelihood_coop: model.likelihood_coop,
            likelihood_noncoop: model.likelihood_noncoop,
        }
    }
}

/// Raw JSON form of a [`TransitionMatrix`], validated on conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrixSpec {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

/// Row-stochastic 2x2 matrix over {cooperate, not cooperate}.
///
/// Row 1 is the cooperating state: `p11` stays, `p10` breaks off.
/// Row 0 is the non-cooperating state: `p01` starts cooperating, `p00`
/// stays apart. Each row sums to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransitionMatrixSpec", into = "TransitionMatrixSpec")]
pub struct TransitionMatrix {
    p11: f64,
    p10: f64,
    p01: f64,
    p00: f64,
}

impl TransitionMatrix {
    pub fn new(p11: f64, p10: f64, p01: f64, p00: f64) -> Result<Self, CoopError> {
        for (what, value) in [("p11", p11), ("p10", p10), ("p01", p01), ("p00", p00)] {
            check_probability(what, value)?;
        }
        for (a, b) in [(p11, p10), (p01, p00)] {
            let sum = a + b;
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(CoopError::UnstochasticRow { a, b, sum });
            }
        }
        Ok(TransitionMatrix { p11, p10, p01, p00 })
    }

    /// Build from the two free entries; the complements are implied.
    pub fn from_rates(stay_coop: f64, become_coop: f64) -> Result<Self, CoopError> {
        check_probability("p11", stay_coop)?;
        check_probability("p01", become_coop)?;
        Ok(TransitionMatrix {
            p11: stay_coop,
            p10: 1.0 - stay_coop,
            p01: become_coop,
            p00: 1.0 - become_coop,
        })
    }

    pub fn identity() -> Self {
        TransitionMatrix {
            p11: 1.0,
            p10: 0.0,
            p01: 0.0,
            p00: 1.0,
        }
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    pub fn p10(&self) -> f64 {
        self.p10
    }

    pub fn p01(&self) -> f64 {
        self.p01
    }

    pub fn p00(&self) -> f64 {
        self.p00
    }

    /// Matrix product `self * other`: first transition by `self`, then by
    /// `other`.
    pub fn compose(&self, other: &TransitionMatrix) -> TransitionMatrix {
        TransitionMatrix {
            p11: (self.p11 * other.p11 + self.p10 * other.p01).clamp(0.0, 1.0),
            p10: (self.p11 * other.p10 + self.p10 * other.p00).clamp(0.0, 1.0),
            p01: (self.p01 * other.p11 + self.p00 * other.p01).clamp(0.0, 1.0),
            p00: (self.p01 * other.p10 + self.p00 * other.p00).clamp(0.0, 1.0),
        }
    }

    /// `k`-step composition of the chain (`k = 0` yields the identity).
    pub fn n_step(&self, k: u32) -> TransitionMatrix {
        let mut result = TransitionMatrix::identity();
        let mut base = *self;
        let mut exp = k;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.compose(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.compose(&base);
            }
        }
        result
    }

    /// Long-run distribution `(pi1, pi0)` satisfying `pi * P = pi`.
    /// Undefined when both states are absorbing.
    pub fn stationary(&self) -> Result<(f64, f64), CoopError> {
        if self.p10 == 0.0 && self.p01 == 0.0 {
            return Err(CoopError::NonErgodic);
        }
        let pi1 = self.p01 / (self.p01 + self.p10);
        Ok((pi1, 1.0 - pi1))
    }

    /// Advance one state by a uniform draw in `[0,1)`. The threshold is
    /// half-open: a transition probability of 0 never fires and 1 always
    /// fires.
    pub fn step(&self, state: CoopState, draw: f64) -> CoopState {
        let threshold = match state {
            CoopState::Cooperating => self.p11,
            CoopState::NotCooperating => self.p01,
        };
        if draw < threshold {
            CoopState::Cooperating
        } else {
            CoopState::NotCooperating
        }
    }
}

impl TryFrom<TransitionMatrixSpec> for TransitionMatrix {
    type Error = CoopError;

    fn try_from(spec: TransitionMatrixSpec) -> Result<Self, CoopError> {
        TransitionMatrix::new(spec.p11, spec.p10, spec.p01, spec.p00)
    }
}

impl From<TransitionMatrix> for TransitionMatrixSpec {
    fn from(m: TransitionMatrix) -> TransitionMatrixSpec {
        TransitionMatrixSpec {
            p11: m.p11,
            p10: m.p10,
            p01: m.p01,
            p00: m.p00,
        }
    }
}

/// Element-wise mean of the given matrices, one per pair relationship.
pub fn aggregate_transition(matrices: &[TransitionMatrix]) -> Result<TransitionMatrix, CoopError> {
    if matrices.is_empty() {
        return Err(CoopError::EmptyAggregate);
    }
    let len = matrices.len() as f64;
    let mean = |f: fn(&TransitionMatrix) -> f64| {
        (matrices.iter().map(f).sum::<f64>() / len).clamp(0.0, 1.0)
    };
    TransitionMatrix::new(
        mean(|m| m.p11),
        mean(|m| m.p10),
        mean(|m| m.p01),
        mean(|m| m.p00),
    )
}
