//! Belief states, influence graphs and the two update functions.
//!
//! An influence graph `I` is an `n × n` matrix where `I[i][j]` is the
//! influence of agent `i` on agent `j`. One time step moves every agent `i`
//! towards each agent `j` proportionally to `I[j][i]` and to the difference
//! of their beliefs, then averages over all agents:
//!
//! ```text
//! B_i' = B_i + (1/n) · Σ_j f(i,j) · I[j][i] · (B_j − B_i)
//! ```
//!
//! where `f(i,j) = 1` for the regular update and `f(i,j) = 1 − |B_j − B_i|`
//! under confirmation bias.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on step outputs before they are snapped back into `[0, 1]`.
const RANGE_SLACK: f64 = 1e-12;

/// Beliefs of all agents at one time step, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefState {
    values: Vec<f64>,
}

impl BeliefState {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSize("a belief state needs at least one agent".into()));
        }
        for (agent, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidBelief { agent, value });
            }
        }
        Ok(Self { values })
    }

    /// Consensus state where all `n` agents hold `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of agents.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, agent: usize) -> f64 {
        self.values[agent]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max − min`, the opinion gap between the extreme agents.
    pub fn gap(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    /// True when every agent holds 0 or 1.
    pub fn all_extreme(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

impl AsRef<[f64]> for BeliefState {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Weighted directed influence between agents; the diagonal is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    n: usize,
    weights: Vec<f64>,
}

impl InfluenceGraph {
    /// Graph on `n` agents with no influence at all.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("an influence graph needs at least one agent".into()));
        }
        Ok(Self { n, weights: vec![0.0; n * n] })
    }

    /// Builds a graph from `weight(i, j)`, called for every `i != j`.
    pub fn from_fn(n: usize, mut weight: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut graph = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    graph.set(i, j, weight(i, j))?;
                }
            }
        }
        Ok(graph)
    }

    /// Builds a graph from a square matrix. The diagonal must be zero.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut graph = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape { expected: n, found: row.len() });
            }
            for (j, &value) in row.iter().enumerate() {
                if i == j {
                    if value != 0.0 {
                        return Err(Error::InvalidWeight { from: i, to: j, value });
                    }
                } else {
                    graph.set(i, j, value)?;
                }
            }
        }
        Ok(graph)
    }

    /// Builds a graph from `(from, to, weight)` triples; unspecified entries are 0.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut graph = Self::zeros(n)?;
        for &(from, to, value) in edges {
            if from >= n || to >= n {
                return Err(Error::Shape { expected: n, found: from.max(to) + 1 });
            }
            if from == to {
                return Err(Error::InvalidWeight { from, to, value });
            }
            graph.set(from, to, value)?;
        }
        Ok(graph)
    }

    fn set(&mut self, from: usize, to: usize, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidWeight { from, to, value });
        }
        self.weights[from * self.n + to] = value;
        Ok(())
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Influence of agent `from` on agent `to`.
    #[inline]
    pub fn influence(&self, from: usize, to: usize) -> f64 {
        self.weights[from * self.n + to]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Total influence agent `i` exerts on others.
    pub fn out_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.influence(i, j)).sum()
    }

    /// Total influence agent `i` receives from others.
    pub fn in_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.influence(j, i)).sum()
    }

    /// All `(from, to)` pairs with strictly positive influence, row-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(move |(k, &w)| (k / n, k % n, w))
    }

    fn check_dims(&self, beliefs: &BeliefState) -> Result<()> {
        if beliefs.len() != self.n {
            return Err(Error::Shape { expected: self.n, found: beliefs.len() });
        }
        Ok(())
    }
}

/// Which update function advances the beliefs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateKind {
    Regular,
    ConfirmationBias,
}

impl UpdateKind {
    /// Multiplier applied to the influence of a `other` belief on a `own` belief.
    #[inline]
    pub fn factor(self, own: f64, other: f64) -> f64 {
        match self {
            UpdateKind::Regular => 1.0,
            UpdateKind::ConfirmationBias => 1.0 - (other - own).abs(),
        }
    }
}

/// Initial belief configuration families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialBeliefs {
    /// Equally spaced over `[0, 1]`.
    Uniform,
    /// Two groups with moderately different beliefs.
    Mild,
    /// Two groups close to 0 and to 1.
    Extreme,
    /// Three groups of similar size.
    Tripolar,
}

/// Builds one of the standard initial belief configurations for `n` agents.
///
/// With `n = 1` the uniform configuration degenerates to `(0)`.
pub fn gen_initial_beliefs(kind: InitialBeliefs, n: usize) -> Result<BeliefState> {
    if n == 0 {
        return Err(Error::InvalidSize("at least one agent is required".into()));
    }
    let nf = n as f64;
    let half = n.div_ceil(2);
    let values: Vec<f64> = match kind {
        InitialBeliefs::Uniform if n == 1 => vec![0.0],
        InitialBeliefs::Uniform => (0..n).map(|i| i as f64 / (nf - 1.0)).collect(),
        InitialBeliefs::Mild => (0..n)
            .map(|i| {
                let base = 0.8 * i as f64 / nf;
                if i < half {
                    base
                } else {
                    base + 0.2
                }
            })
            .collect(),
        InitialBeliefs::Extreme => (0..n)
            .map(|i| {
                let base = 0.4 * i as f64 / nf;
                if i < half {
                    base
                } else {
                    base + 0.6
                }
            })
            .collect(),
        InitialBeliefs::Tripolar => {
            if n < 3 {
                return Err(Error::InvalidSize(format!(
                    "tripolar configuration needs at least 3 agents, got {n}"
                )));
            }
            let low = n / 3;
            let high = (2 * n).div_ceil(3);
            (0..n)
                .map(|i| {
                    let base = 0.6 * i as f64 / nf;
                    if i < low {
                        base
                    } else if i < high {
                        base + 0.2
                    } else {
                        base + 0.4
                    }
                })
                .collect()
        }
    };
    BeliefState::new(values)
}

fn snap(value: f64) -> f64 {
    debug_assert!((-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&value), "belief {value} escaped [0, 1]");
    value.clamp(0.0, 1.0)
}

/// Advances `beliefs` by one step of the given update function.
pub fn step(beliefs: &BeliefState, graph: &InfluenceGraph, kind: UpdateKind) -> Result<BeliefState> {
    graph.check_dims(beliefs)?;
    let b = beliefs.values();
    let n = b.len();
    let nf = n as f64;
    let values = (0..n)
        .map(|i| {
            let own = b[i];
            let mut acc = 0.0;
            for (j, &other) in b.iter().enumerate() {
                acc += kind.factor(own, other) * graph.influence(j, i) * (other - own);
            }
            snap(own + acc / nf)
        })
        .collect();
    Ok(BeliefState { values })
}

/// One step of the regular (bias-free) update.
pub fn regular_step(beliefs: &BeliefState, graph: &InfluenceGraph) -> Result<BeliefState> {
    step(beliefs, graph, UpdateKind::Regular)
}

/// One step of the confirmation-bias update.
pub fn confirmation_bias_step(beliefs: &BeliefState, graph: &InfluenceGraph) -> Result<BeliefState> {
    step(beliefs, graph, UpdateKind::ConfirmationBias)
}

/// Pairwise view of a single step.
///
/// `pairwise[i][j]` is agent `i`'s belief after being influenced by `j`
/// alone, and `factors[i][j]` the confirmation-bias factor used for that pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StepBreakdown {
    pub pairwise: Vec<Vec<f64>>,
    pub factors: Vec<Vec<f64>>,
}

impl StepBreakdown {
    /// Averages each row of `pairwise`; equals the step output up to rounding.
    pub fn row_means(&self) -> Vec<f64> {
        self.pairwise.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect()
    }
}

pub fn step_breakdown(
    beliefs: &BeliefState,
    graph: &InfluenceGraph,
    kind: UpdateKind,
) -> Result<StepBreakdown> {
    graph.check_dims(beliefs)?;
    let b = beliefs.values();
    let n = b.len();
    let mut pairwise = vec![vec![0.0; n]; n];
    let mut factors = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let f = kind.factor(b[i], b[j]);
            factors[i][j] = f;
            pairwise[i][j] = b[i] + f * graph.influence(j, i) * (b[j] - b[i]);
        }
    }
    Ok(StepBreakdown { pairwise, factors })
}

/// Why a simulation stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxSteps,
    GapBelowTolerance,
}

/// Time-ordered belief states of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    states: Vec<BeliefState>,
    update_kind: UpdateKind,
    steps_taken: usize,
    stop_reason: StopReason,
}

impl SimulationTrace {
    /// Wraps externally produced states; nothing checks that they follow an update.
    pub fn from_states(states: Vec<BeliefState>, update_kind: UpdateKind) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidSize("a trace needs at least one state".into()));
        };
        let n = first.len();
        if let Some(bad) = states.iter().find(|s| s.len() != n) {
            return Err(Error::Shape { expected: n, found: bad.len() });
        }
        let steps_taken = states.len() - 1;
        Ok(Self { states, update_kind, steps_taken, stop_reason: StopReason::MaxSteps })
    }

    pub fn states(&self) -> &[BeliefState] {
        &self.states
    }

    pub fn state(&self, t: usize) -> &BeliefState {
        &self.states[t]
    }

    pub fn initial(&self) -> &BeliefState {
        &self.states[0]
    }

    pub fn last(&self) -> &BeliefState {
        self.states.last().expect("trace is never empty")
    }

    /// Number of states, `steps_taken + 1`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.states[0].len()
    }

    pub fn update_kind(&self) -> UpdateKind {
        self.update_kind
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    /// Largest deviation between each recorded state and a fresh step from its
    /// predecessor under `graph`.
    pub fn replay_error(&self, graph: &InfluenceGraph) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for pair in self.states.windows(2) {
            let next = step(&pair[0], graph, self.update_kind)?;
            for (a, b) in next.values().iter().zip(pair[1].values()) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

/// Simulates up to `max_steps` updates from `initial`.
///
/// When `stop_gap` is set the run also stops right after the first step whose
/// state has `max − min < stop_gap`.
pub fn run(
    initial: &BeliefState,
    graph: &InfluenceGraph,
    kind: UpdateKind,
    max_steps: usize,
    stop_gap: Option<f64>,
) -> Result<SimulationTrace> {
    graph.check_dims(initial)?;
    if let Some(gap) = stop_gap {
        if !(gap > 0.0) {
            return Err(Error::Parameter(format!("stop_gap must be positive, got {gap}")));
        }
    }
    let mut states = Vec::with_capacity(max_steps.min(1 << 16) + 1);
    states.push(initial.clone());
    let mut stop_reason = StopReason::MaxSteps;
    for _ in 0..max_steps {
        let next = step(states.last().expect("non-empty"), graph, kind)?;
        let done = stop_gap.is_some_and(|tol| next.gap() < tol);
        states.push(next);
        if done {
            stop_reason = StopReason::GapBelowTolerance;
            break;
        }
    }
    let steps_taken = states.len() - 1;
    Ok(SimulationTrace { states, update_kind: kind, steps_taken, stop_reason })
}
