//! Convergence prediction.
//!
//! Covers extreme-belief series, the clique convergence-time bound, consensus
//! values for balanced graphs, the SCC condensation of an influence graph and
//! limit beliefs through the row-stochastic update matrix.

use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{classify, support_digraph};
use crate::model::{BeliefState, InfluenceGraph, SimulationTrace};

/// Tolerance on update-matrix row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Per-step maximum and minimum beliefs of a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremeSeries {
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    /// Lowest-index maximal agent at each step.
    pub argmax: Vec<usize>,
    /// Lowest-index minimal agent at each step.
    pub argmin: Vec<usize>,
}

impl ExtremeSeries {
    /// Final maximum, an estimate of the limit of the maximum belief.
    pub fn upper_estimate(&self) -> f64 {
        *self.max.last().expect("series is never empty")
    }

    /// Final minimum, an estimate of the limit of the minimum belief.
    pub fn lower_estimate(&self) -> f64 {
        *self.min.last().expect("series is never empty")
    }

    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.max.iter().zip(&self.min).map(|(hi, lo)| hi - lo)
    }
}

pub fn extremes(trace: &SimulationTrace) -> ExtremeSeries {
    let len = trace.len();
    let mut series = ExtremeSeries {
        max: Vec::with_capacity(len),
        min: Vec::with_capacity(len),
        argmax: Vec::with_capacity(len),
        argmin: Vec::with_capacity(len),
    };
    for state in trace.states() {
        let v = state.values();
        let (mut hi, mut lo) = (0, 0);
        for (i, &b) in v.iter().enumerate() {
            if b > v[hi] {
                hi = i;
            }
            if b < v[lo] {
                lo = i;
            }
        }
        series.max.push(v[hi]);
        series.min.push(v[lo]);
        series.argmax.push(hi);
        series.argmin.push(lo);
    }
    series
}

/// Step bound for reaching a target opinion gap, plus diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceBound {
    /// Any step `t > t_eps` has gap below `eps_target`.
    pub t_eps: f64,
    pub clique_constant: f64,
    pub eps_target: f64,
    /// Per-window contraction of the maximum, computed from an observed run.
    pub epsilon_contraction: Option<f64>,
    /// Smallest confirmation-bias factor at the initial state.
    pub f_min: Option<f64>,
}

/// Time after which a `C`-clique started at `initial` has gap below `eps`.
///
/// `T = 1` when `C = 1`; otherwise `T = log_{1−C}(eps / gap₀)`, floored at 0.
pub fn clique_convergence_bound(c: f64, initial: &BeliefState, eps: f64) -> Result<ConvergenceBound> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps must be positive, got {eps}")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Parameter(format!("clique constant must be in (0, 1], got {c}")));
    }
    let gap = initial.gap();
    let t_eps = if c == 1.0 {
        1.0
    } else if gap <= 0.0 {
        0.0
    } else {
        ((eps / gap).ln() / (1.0 - c).ln()).max(0.0)
    };
    Ok(ConvergenceBound {
        t_eps,
        clique_constant: c,
        eps_target: eps,
        epsilon_contraction: None,
        f_min: None,
    })
}

/// Smallest confirmation-bias factor `1 − |B_j − B_i|` over all pairs.
pub fn f_min(beliefs: &BeliefState) -> f64 {
    1.0 - beliefs.gap()
}

/// `(I_min · f / n)^(n−1) · (U − L)`: how much the maximum must drop every
/// `n − 1` steps on a strongly connected graph, with `f = 1` for the regular
/// update and `f = f_min` under confirmation bias.
///
/// `U − L` is not observable at finite time; pass the final extremes of a
/// finished run. The value is a diagnostic and vanishes once consensus is
/// reached.
pub fn epsilon_contraction(graph: &InfluenceGraph, factor_floor: f64, upper: f64, lower: f64) -> Option<f64> {
    let min_influence = classify(graph).min_positive_influence?;
    let n = graph.n() as f64;
    Some((min_influence * factor_floor / n).powf(n - 1.0) * (upper - lower))
}

/// Consensus value predicted in closed form, when one is known.
///
/// Balanced and weakly connected graphs (cliques included) converge to the
/// mean initial belief. Other graphs may still converge; use
/// [`limit_beliefs`] for them.
pub fn predict_consensus(graph: &InfluenceGraph, initial: &BeliefState) -> Result<Option<f64>> {
    if graph.n() != initial.len() {
        return Err(Error::Shape { expected: graph.n(), found: initial.len() });
    }
    let report = classify(graph);
    Ok((report.balanced && report.weakly_connected).then(|| initial.mean()))
}

/// Strongly connected components and their condensation DAG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    /// Components with members ascending, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
    /// Influence edges between components, `(from, to)` by component index.
    pub condensation_edges: Vec<(usize, usize)>,
    /// Components no other component influences.
    pub source_components: Vec<usize>,
}

impl SccDecomposition {
    /// Index of the component holding `agent`.
    pub fn component_of(&self, agent: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(&agent))
    }
}

pub fn scc_condense(graph: &InfluenceGraph) -> SccDecomposition {
    let support = support_digraph(graph);
    let mut components: Vec<Vec<usize>> = tarjan_scc(&support)
        .into_iter()
        .map(|c| {
            let mut members: Vec<usize> = c.into_iter().map(|ix| ix.index()).collect();
            members.sort_unstable();
            members
        })
        .collect();
    components.sort_unstable_by_key(|c| c[0]);

    let mut owner = vec![0; graph.n()];
    for (k, c) in components.iter().enumerate() {
        for &a in c {
            owner[a] = k;
        }
    }
    let edges: BTreeSet<(usize, usize)> =
        graph.edges().map(|(from, to, _)| (owner[from], owner[to])).filter(|(a, b)| a != b).collect();
    let source_components =
        (0..components.len()).filter(|&k| !edges.iter().any(|&(_, to)| to == k)).collect();

    SccDecomposition { components, condensation_edges: edges.into_iter().collect(), source_components }
}

/// Row-stochastic matrix `M` with one regular step equal to `B' = M · B`.
///
/// `M[i][j] = I[j][i] / n` for `j ≠ i` and `M[i][i] = 1 − Σ_{j≠i} I[j][i] / n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpdateMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl UpdateMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n)
    }

    /// `M · v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match the matrix");
        self.rows().map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum()).collect()
    }
}

pub fn build_update_matrix(graph: &InfluenceGraph) -> UpdateMatrix {
    let n = graph.n();
    let nf = n as f64;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let mut received = 0.0;
        for j in (0..n).filter(|&j| j != i) {
            let real = graph.influence(j, i) / nf;
            entries[i * n + j] = real;
            received += real;
        }
        entries[i * n + i] = 1.0 - received;
    }
    UpdateMatrix { n, entries }
}

/// Outcome of [`limit_beliefs`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub limits: Vec<f64>,
    pub iterations: usize,
    /// Largest per-agent change in the last iteration.
    pub residual: f64,
    /// Residual and tail estimate fell below the tolerance before `max_iter` ran out.
    pub converged: bool,
    /// All limits lie within `n · tol` of each other.
    pub consensus: bool,
}

const ROUNDING_FLOOR: f64 = 4.0 * f64::EPSILON;
const RATIO_WINDOW: usize = 16;

/// Remaining distance to the limit, taking the slowest recent contraction
/// ratio as the rate.
fn tail_estimate(recent: &VecDeque<f64>) -> f64 {
    if recent.len() < 2 {
        return f64::INFINITY;
    }
    let q = recent.iter().zip(recent.iter().skip(1)).map(|(prev, cur)| cur / prev).fold(0.0, f64::max);
    let last = recent[recent.len() - 1];
    if q < 1.0 {
        last * q / (1.0 - q)
    } else {
        f64::INFINITY
    }
}

/// Estimates `lim M^t · B₀` by power iteration.
///
/// Iteration stops once the per-agent change is below `tol` and the
/// geometric tail estimate of the remaining change is below `tol` too.
pub fn limit_beliefs(
    graph: &InfluenceGraph,
    initial: &BeliefState,
    tol: f64,
    max_iter: usize,
) -> Result<LimitReport> {
    if graph.n() != initial.len() {
        return Err(Error::Shape { expected: graph.n(), found: initial.len() });
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    let m = build_update_matrix(graph);
    let mut current = initial.values().to_vec();
    let mut residual = f64::INFINITY;
    let mut settled = false;
    let mut recent = VecDeque::with_capacity(RATIO_WINDOW + 1);
    let mut iterations = 0;
    while iterations < max_iter {
        let next = m.apply(&current);
        residual = next.iter().zip(&current).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        current = next;
        iterations += 1;
        if recent.len() > RATIO_WINDOW {
            recent.pop_front();
        }
        recent.push_back(residual);
        settled = residual < tol && (residual <= ROUNDING_FLOOR || tail_estimate(&recent) < tol);
        if settled {
            break;
        }
    }
    for v in &mut current {
        *v = v.clamp(0.0, 1.0);
    }
    let hi = current.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = current.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LimitReport {
        consensus: hi - lo <= current.len() as f64 * tol,
        converged: settled,
        limits: current,
        iterations,
        residual,
    })
}
