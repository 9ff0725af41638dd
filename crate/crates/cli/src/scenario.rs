//! Scenario files: JSON in, validated simulation inputs out.
//!
//! ```json
//! {
//!   "n": 3,
//!   "beliefs": {"kind": "uniform"},
//!   "influence": {"kind": "clique", "c": 0.5},
//!   "update": "regular",
//!   "steps": 10,
//!   "stop_gap": 0.01,
//!   "polarization": {"bins": 5, "alpha": 1.6, "k": 1000}
//! }
//! ```
//!
//! `stop_gap` and `polarization` are optional. Explicit configurations use
//! `{"kind": "explicit", "values": [...]}` and
//! `{"kind": "explicit", "matrix": [[...], ...]}`.

use std::fmt;

use polarsim::{
    gen_influence, gen_initial_beliefs, BeliefState, BinSpec, ErParams, InfluenceGraph, InfluenceKind,
    InitialBeliefs, UpdateKind,
};
use serde::Deserialize;

/// A scenario that failed to parse or validate, located by field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub path: String,
    pub message: String,
}

impl ScenarioError {
    fn at(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n: usize,
    beliefs: RawBeliefs,
    influence: RawInfluence,
    update: UpdateKind,
    steps: usize,
    #[serde(default)]
    stop_gap: Option<f64>,
    #[serde(default)]
    polarization: RawPolarization,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeliefs {
    kind: BeliefKind,
    #[serde(default)]
    values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BeliefKind {
    Uniform,
    Mild,
    Extreme,
    Tripolar,
    Explicit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInfluence {
    kind: GraphKind,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Clique,
    Circular,
    Disconnected,
    Unrelenting,
    Faint,
    Explicit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolarization {
    #[serde(default = "default_bins")]
    bins: usize,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_scale")]
    k: f64,
}

fn default_bins() -> usize {
    5
}

fn default_alpha() -> f64 {
    ErParams::default().alpha
}

fn default_scale() -> f64 {
    ErParams::default().scale
}

impl Default for RawPolarization {
    fn default() -> Self {
        Self { bins: default_bins(), alpha: default_alpha(), k: default_scale() }
    }
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub n: usize,
    pub initial: BeliefState,
    pub graph_kind: GraphKind,
    /// Constant of the clique or circular family.
    pub constant: Option<f64>,
    pub graph: InfluenceGraph,
    pub update: UpdateKind,
    pub steps: usize,
    pub stop_gap: Option<f64>,
    pub bins: BinSpec,
    pub er: ErParams,
}

impl Scenario {
    /// The same scenario on a different clique or circular constant.
    pub fn with_constant(&self, c: f64) -> Result<Self, ScenarioError> {
        let kind = match self.graph_kind {
            GraphKind::Clique => InfluenceKind::Clique(c),
            GraphKind::Circular => InfluenceKind::Circular(c),
            _ => {
                return Err(ScenarioError::at(
                    "influence.kind",
                    "only clique and circular graphs have a constant to vary",
                ))
            }
        };
        let graph = gen_influence(kind, self.n).map_err(|e| ScenarioError::at("influence.c", e))?;
        Ok(Self { constant: Some(c), graph, ..self.clone() })
    }

    pub fn with_steps(&self, steps: usize) -> Self {
        Self { steps, ..self.clone() }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        ScenarioError::at(path, e.into_inner())
    })?;
    validate(raw)
}

fn validate(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    let n = raw.n;
    if n == 0 {
        return Err(ScenarioError::at("n", "at least one agent is required"));
    }
    let initial = beliefs(&raw.beliefs, n)?;
    let (graph, constant) = influence(&raw.influence, n)?;
    if let Some(gap) = raw.stop_gap {
        if gap <= 0.0 {
            return Err(ScenarioError::at("stop_gap", format!("must be positive, got {gap}")));
        }
    }
    let p = &raw.polarization;
    let bins = BinSpec::equal_width(p.bins).map_err(|e| ScenarioError::at("polarization.bins", e))?;
    if p.k <= 0.0 || !p.k.is_finite() {
        return Err(ScenarioError::at("polarization.k", format!("must be positive, got {}", p.k)));
    }
    let er = ErParams::new(p.k, p.alpha).map_err(|e| ScenarioError::at("polarization.alpha", e))?;
    Ok(Scenario {
        n,
        initial,
        graph_kind: raw.influence.kind,
        constant,
        graph,
        update: raw.update,
        steps: raw.steps,
        stop_gap: raw.stop_gap,
        bins,
        er,
    })
}

fn beliefs(raw: &RawBeliefs, n: usize) -> Result<BeliefState, ScenarioError> {
    let family = match raw.kind {
        BeliefKind::Uniform => InitialBeliefs::Uniform,
        BeliefKind::Mild => InitialBeliefs::Mild,
        BeliefKind::Extreme => InitialBeliefs::Extreme,
        BeliefKind::Tripolar => InitialBeliefs::Tripolar,
        BeliefKind::Explicit => {
            let values = raw
                .values
                .as_ref()
                .ok_or_else(|| ScenarioError::at("beliefs.values", "required for explicit beliefs"))?;
            if values.len() != n {
                return Err(ScenarioError::at(
                    "beliefs.values",
                    format!("expected {n} values, found {}", values.len()),
                ));
            }
            if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                return Err(ScenarioError::at(
                    format!("beliefs.values[{i}]"),
                    format!("{v} is outside [0, 1]"),
                ));
            }
            return BeliefState::new(values.clone()).map_err(|e| ScenarioError::at("beliefs.values", e));
        }
    };
    if raw.values.is_some() {
        return Err(ScenarioError::at("beliefs.values", "only allowed for explicit beliefs"));
    }
    gen_initial_beliefs(family, n).map_err(|e| ScenarioError::at("beliefs.kind", e))
}

fn influence(raw: &RawInfluence, n: usize) -> Result<(InfluenceGraph, Option<f64>), ScenarioError> {
    if raw.kind != GraphKind::Explicit && raw.matrix.is_some() {
        return Err(ScenarioError::at("influence.matrix", "only allowed for explicit influence"));
    }
    let needs_constant = matches!(raw.kind, GraphKind::Clique | GraphKind::Circular);
    if !needs_constant && raw.c.is_some() {
        return Err(ScenarioError::at("influence.c", "only allowed for clique and circular influence"));
    }
    let constant = if needs_constant {
        let c = raw.c.ok_or_else(|| ScenarioError::at("influence.c", "required for this kind"))?;
        if !(c > 0.0 && c <= 1.0) {
            return Err(ScenarioError::at("influence.c", format!("{c} is outside (0, 1]")));
        }
        Some(c)
    } else {
        None
    };
    let kind = match raw.kind {
        GraphKind::Clique => InfluenceKind::Clique(constant.unwrap_or_default()),
        GraphKind::Circular => InfluenceKind::Circular(constant.unwrap_or_default()),
        GraphKind::Disconnected => InfluenceKind::Disconnected,
        GraphKind::Unrelenting => InfluenceKind::Unrelenting,
        GraphKind::Faint => InfluenceKind::Faint,
        GraphKind::Explicit => return explicit_matrix(raw.matrix.as_deref(), n).map(|g| (g, None)),
    };
    let graph = gen_influence(kind, n).map_err(|e| ScenarioError::at("influence.kind", e))?;
    Ok((graph, constant))
}

fn explicit_matrix(matrix: Option<&[Vec<f64>]>, n: usize) -> Result<InfluenceGraph, ScenarioError> {
    let rows =
        matrix.ok_or_else(|| ScenarioError::at("influence.matrix", "required for explicit influence"))?;
    if rows.len() != n {
        return Err(ScenarioError::at(
            "influence.matrix",
            format!("expected {n} rows, found {}", rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ScenarioError::at(
                format!("influence.matrix[{i}]"),
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        for (j, &w) in row.iter().enumerate() {
            let path = || format!("influence.matrix[{i}][{j}]");
            if i == j && w != 0.0 {
                return Err(ScenarioError::at(path(), "agents cannot influence themselves"));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(ScenarioError::at(path(), format!("{w} is outside [0, 1]")));
            }
        }
    }
    InfluenceGraph::from_rows(rows).map_err(|e| ScenarioError::at("influence.matrix", e))
}
