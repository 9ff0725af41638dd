//! Checkers that test convergence properties against recorded traces.
//!
//! Every checker returns a [`CheckReport`] naming the first violated
//! inequality, or an error when its precondition does not hold for the
//! given trace or graph.

use serde::Serialize;

use crate::analysis::{extremes, f_min};
use crate::error::{Error, Result};
use crate::graphs::{classify, GraphClassReport, InfluencePath};
use crate::model::{confirmation_bias_step, BeliefState, InfluenceGraph, SimulationTrace, UpdateKind};

/// Slack on single-step comparisons.
pub const STEP_SLACK: f64 = 1e-12;
/// Slack on quantities accumulated over many steps.
pub const PRODUCT_SLACK: f64 = 1e-9;

/// Where a checked inequality `lhs ≤ rhs` (or equality) first failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub t: usize,
    pub agent: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs` for inequalities, `−|lhs − rhs|` for equalities.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub first_violation: Option<Violation>,
}

impl CheckReport {
    fn from_violation(name: &'static str, first_violation: Option<Violation>) -> Self {
        Self { name, passed: first_violation.is_none(), first_violation }
    }
}

fn le(t: usize, agent: usize, lhs: f64, rhs: f64, slack: f64) -> Option<Violation> {
    (lhs > rhs + slack).then_some(Violation { t, agent, lhs, rhs, slack: rhs - lhs })
}

fn eq(t: usize, agent: usize, lhs: f64, rhs: f64, tol: f64) -> Option<Violation> {
    let diff = (lhs - rhs).abs();
    (diff > tol).then_some(Violation { t, agent, lhs, rhs, slack: -diff })
}

fn require_clique(report: &GraphClassReport) -> Result<f64> {
    report.clique_constant.ok_or_else(|| Error::Precondition("the influence graph is not a clique".into()))
}

fn require_regular(trace: &SimulationTrace) -> Result<()> {
    match trace.update_kind() {
        UpdateKind::Regular => Ok(()),
        UpdateKind::ConfirmationBias => {
            Err(Error::Precondition("the trace was not produced by the regular update".into()))
        }
    }
}

/// Every belief at `t + 1` lies within `[min_t, max_t]`.
pub fn check_belief_bounds(trace: &SimulationTrace) -> Result<CheckReport> {
    if trace.len() < 2 {
        return Err(Error::Parameter("belief bounds need at least two states".into()));
    }
    let violation = trace.states().windows(2).enumerate().find_map(|(t, pair)| {
        let (lo, hi) = (pair[0].min(), pair[0].max());
        pair[1]
            .values()
            .iter()
            .enumerate()
            .find_map(|(i, &b)| le(t, i, b, hi, STEP_SLACK).or_else(|| le(t, i, lo, b, STEP_SLACK)))
    });
    Ok(CheckReport::from_violation("belief_bounds", violation))
}

/// On cliques, `B_i ≥ B_j` at `t` implies `B_i ≥ B_j` at `t + 1`.
pub fn check_order_preservation(trace: &SimulationTrace, report: &GraphClassReport) -> Result<CheckReport> {
    require_clique(report)?;
    require_regular(trace)?;
    let violation = trace.states().windows(2).enumerate().find_map(|(t, pair)| {
        let (now, next) = (pair[0].values(), pair[1].values());
        (0..now.len()).find_map(|i| {
            (0..now.len())
                .filter(|&j| j != i && now[i] >= now[j])
                .find_map(|j| le(t, i, next[j], next[i], STEP_SLACK))
        })
    });
    Ok(CheckReport::from_violation("order_preservation", violation))
}

/// On balanced graphs the regular update keeps the sum of beliefs constant.
pub fn check_conservation(trace: &SimulationTrace, report: &GraphClassReport) -> Result<CheckReport> {
    if !report.balanced {
        return Err(Error::Precondition("the influence graph is not balanced".into()));
    }
    require_regular(trace)?;
    let initial = trace.initial().sum();
    let tol = trace.n() as f64 * STEP_SLACK;
    let violation = trace.states().iter().enumerate().find_map(|(t, s)| eq(t, 0, s.sum(), initial, tol));
    Ok(CheckReport::from_violation("conservation", violation))
}

/// On a `C`-clique the gap at `t` equals `(1 − C)^t` times the initial gap.
pub fn check_geometric_gap(trace: &SimulationTrace, report: &GraphClassReport) -> Result<CheckReport> {
    let c = require_clique(report)?;
    require_regular(trace)?;
    let initial = trace.initial().gap();
    let violation = trace.states().iter().enumerate().find_map(|(t, s)| {
        let expected = (1.0 - c).powi(t as i32) * initial;
        eq(t, 0, s.gap(), expected, PRODUCT_SLACK)
    });
    Ok(CheckReport::from_violation("geometric_gap", violation))
}

/// Path bound and one-step contraction along an influence path `i ⇝ j`.
///
/// Checks `B_j(t + |p|) ≤ max_t + C·f^|p| / n^|p| · (B_i(t) − max_t)` and,
/// with `γ = max_t − B_j(t + |p|)`, `B_j(t + |p| + 1) ≤ max_t − γ / n`.
/// `f` is 1 for the regular update and `1 − (max_t − min_t)` under
/// confirmation bias.
pub fn check_path_bound(
    trace: &SimulationTrace,
    graph: &InfluenceGraph,
    path: &InfluencePath,
    t: usize,
) -> Result<CheckReport> {
    if graph.n() != trace.n() {
        return Err(Error::Shape { expected: graph.n(), found: trace.n() });
    }
    let size = path.size();
    if t + size + 1 >= trace.len() {
        return Err(Error::Parameter(format!(
            "trace of length {} does not contain step {}",
            trace.len(),
            t + size + 1
        )));
    }
    if !classify(graph).strongly_connected {
        return Err(Error::Precondition("the influence graph is not strongly connected".into()));
    }
    let now = trace.state(t);
    let max_t = now.max();
    let factor = match trace.update_kind() {
        UpdateKind::Regular => 1.0,
        UpdateKind::ConfirmationBias => f_min(now),
    };
    let n = graph.n() as f64;
    let weight = path.product_influence() * (factor / n).powi(size as i32);

    let (source, target) = (path.source(), path.target());
    let reached = trace.state(t + size).get(target);
    let bound = max_t + weight * (now.get(source) - max_t);
    let gamma = (max_t - reached).max(0.0);
    let after = trace.state(t + size + 1).get(target);

    let violation = le(t + size, target, reached, bound, STEP_SLACK)
        .or_else(|| le(t + size + 1, target, after, max_t - gamma / n, STEP_SLACK));
    Ok(CheckReport::from_violation("path_bound", violation))
}

/// All-extreme states are exact fixed points of the confirmation-bias update.
pub fn check_cb_fixedpoint(beliefs: &BeliefState, graph: &InfluenceGraph) -> Result<CheckReport> {
    if !beliefs.all_extreme() {
        return Err(Error::Precondition("not every belief is 0 or 1".into()));
    }
    let next = confirmation_bias_step(beliefs, graph)?;
    let violation = beliefs
        .values()
        .iter()
        .zip(next.values())
        .enumerate()
        .find_map(|(i, (&b, &b1))| eq(0, i, b1, b, 0.0));
    Ok(CheckReport::from_violation("cb_fixedpoint", violation))
}

/// The maximum never increases and the minimum never decreases.
pub fn check_extreme_monotonicity(trace: &SimulationTrace) -> CheckReport {
    let e = extremes(trace);
    let violation = (1..trace.len()).find_map(|t| {
        le(t, e.argmax[t], e.max[t], e.max[t - 1], STEP_SLACK)
            .or_else(|| le(t, e.argmin[t], e.min[t - 1], e.min[t], STEP_SLACK))
    });
    CheckReport::from_violation("extreme_monotonicity", violation)
}
