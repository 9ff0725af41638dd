//! Influence graph families and structural classification.

use petgraph::algo::{connected_components, tarjan_scc};
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InfluenceGraph;

/// Tolerance on per-agent in/out sums when deciding balance.
pub const BALANCE_TOL: f64 = 1e-9;

/// The standard influence graph families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfluenceKind {
    /// Every agent influences every other with the same weight.
    Clique(f64),
    /// Agent `i` influences only `(i + 1) mod n`.
    Circular(f64),
    /// Two groups with internal influence 0.5 and none across.
    Disconnected,
    /// Agents `0` and `n − 1` push hard on everyone and listen to no one.
    Unrelenting,
    /// Two groups with internal influence 0.5 and 0.1 across.
    Faint,
}

fn check_constant(c: f64) -> Result<()> {
    if c > 0.0 && c <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("influence constant must be in (0, 1], got {c}")))
    }
}

/// Builds the influence graph of the given family on `n` agents.
pub fn gen_influence(kind: InfluenceKind, n: usize) -> Result<InfluenceGraph> {
    if n == 0 {
        return Err(Error::Parameter("at least one agent is required".into()));
    }
    let half = n.div_ceil(2);
    match kind {
        InfluenceKind::Clique(c) => {
            check_constant(c)?;
            InfluenceGraph::from_fn(n, |_, _| c)
        }
        InfluenceKind::Circular(c) => {
            check_constant(c)?;
            InfluenceGraph::from_fn(n, |i, j| if (i + 1) % n == j { c } else { 0.0 })
        }
        InfluenceKind::Disconnected => {
            InfluenceGraph::from_fn(n, |i, j| if (i < half) == (j < half) { 0.5 } else { 0.0 })
        }
        InfluenceKind::Unrelenting => {
            if n < 3 {
                return Err(Error::Parameter(format!(
                    "unrelenting influencers need at least 3 agents, got {n}"
                )));
            }
            let last = n - 1;
            InfluenceGraph::from_fn(n, |i, j| {
                if j == 0 || j == last {
                    0.0
                } else if i == 0 || i == last {
                    0.6
                } else {
                    0.1
                }
            })
        }
        // group boundary is `≤ ⌈n/2⌉`, one agent further than Disconnected
        InfluenceKind::Faint => {
            InfluenceGraph::from_fn(n, |i, j| if (i <= half) == (j <= half) { 0.5 } else { 0.1 })
        }
    }
}

/// Structural properties of an influence graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphClassReport {
    pub strongly_connected: bool,
    pub weakly_connected: bool,
    pub balanced: bool,
    /// Common off-diagonal weight when the graph is a clique.
    pub clique_constant: Option<f64>,
    pub min_positive_influence: Option<f64>,
}

pub(crate) fn support_digraph(graph: &InfluenceGraph) -> DiGraph<(), ()> {
    let mut g = DiGraph::with_capacity(graph.n(), 0);
    let nodes: Vec<_> = (0..graph.n()).map(|_| g.add_node(())).collect();
    for (from, to, _) in graph.edges() {
        g.add_edge(nodes[from], nodes[to], ());
    }
    g
}

/// True when every agent's outgoing influence matches its incoming influence.
pub fn is_balanced(graph: &InfluenceGraph) -> bool {
    (0..graph.n()).all(|i| (graph.out_sum(i) - graph.in_sum(i)).abs() <= BALANCE_TOL)
}

pub fn classify(graph: &InfluenceGraph) -> GraphClassReport {
    let n = graph.n();
    let support = support_digraph(graph);
    let strongly_connected = tarjan_scc(&support).len() == 1;
    let weakly_connected = connected_components(&support) == 1;

    let mut off_diagonal = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| graph.influence(i, j));
    let clique_constant =
        off_diagonal.next().and_then(|c| (c > 0.0 && off_diagonal.all(|w| w == c)).then_some(c));

    let min_positive_influence = graph.edges().map(|(_, _, w)| w).reduce(f64::min);

    GraphClassReport {
        strongly_connected,
        weakly_connected,
        balanced: is_balanced(graph),
        clique_constant,
        min_positive_influence,
    }
}

/// A sequence of distinct agents, each directly influencing the next.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluencePath {
    agents: Vec<usize>,
    product_influence: f64,
}

impl InfluencePath {
    pub fn agents(&self) -> &[usize] {
        &self.agents
    }

    pub fn source(&self) -> usize {
        self.agents[0]
    }

    pub fn target(&self) -> usize {
        *self.agents.last().expect("paths have at least two agents")
    }

    /// Product of the direct influences along the path.
    pub fn product_influence(&self) -> f64 {
        self.product_influence
    }

    /// Number of edges.
    pub fn size(&self) -> usize {
        self.agents.len() - 1
    }
}

/// Validates `agents` as an influence path in `graph` and computes its product influence.
pub fn product_influence(graph: &InfluenceGraph, agents: &[usize]) -> Result<InfluencePath> {
    if agents.len() < 2 {
        return Err(Error::InvalidPath("a path needs at least two agents".into()));
    }
    if let Some(&a) = agents.iter().find(|&&a| a >= graph.n()) {
        return Err(Error::InvalidPath(format!("agent {a} does not exist")));
    }
    for (k, a) in agents.iter().enumerate() {
        if agents[..k].contains(a) {
            return Err(Error::InvalidPath(format!("agent {a} appears twice")));
        }
    }
    let mut product = 1.0;
    for pair in agents.windows(2) {
        let w = graph.influence(pair[0], pair[1]);
        if w <= 0.0 {
            return Err(Error::NotAPath { from: pair[0], to: pair[1] });
        }
        product *= w;
    }
    Ok(InfluencePath { agents: agents.to_vec(), product_influence: product })
}

/// Shortest (fewest edges) influence path from `from` to `to`, if any.
pub fn shortest_path(graph: &InfluenceGraph, from: usize, to: usize) -> Option<InfluencePath> {
    let n = graph.n();
    if from >= n || to >= n || from == to {
        return None;
    }
    let mut parent = vec![usize::MAX; n];
    parent[from] = from;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for (v, p) in parent.iter_mut().enumerate() {
            if *p == usize::MAX && graph.influence(u, v) > 0.0 {
                *p = u;
                queue.push_back(v);
            }
        }
    }
    if parent[to] == usize::MAX {
        return None;
    }
    let mut agents = vec![to];
    while *agents.last().unwrap() != from {
        agents.push(parent[*agents.last().unwrap()]);
    }
    agents.reverse();
    product_influence(graph, &agents).ok()
}

/// Random graph generators used by the property and acceptance tests.
///
/// These are test utilities, not model objects.
pub mod random {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use crate::model::InfluenceGraph;

    fn add_cycle(weights: &mut [Vec<f64>], cycle: &[usize], w: f64) {
        for k in 0..cycle.len() {
            let (a, b) = (cycle[k], cycle[(k + 1) % cycle.len()]);
            weights[a][b] += w;
        }
    }

    fn rescale_into_unit(weights: &mut [Vec<f64>]) {
        let max = weights.iter().flatten().copied().fold(0.0, f64::max);
        if max > 1.0 {
            weights.iter_mut().flatten().for_each(|w| *w /= max);
        }
    }

    /// Balanced graph built by superposing `cycles` random directed cycles
    /// (length 2 to `n`) with weights in `(0, 1]`.
    ///
    /// If the superposition exceeds 1 anywhere, the whole matrix is scaled
    /// down by its largest entry, which keeps it balanced.
    pub fn circulation<R: Rng + ?Sized>(rng: &mut R, n: usize, cycles: usize) -> InfluenceGraph {
        let mut weights = vec![vec![0.0; n]; n];
        let mut agents: Vec<usize> = (0..n).collect();
        if n >= 2 {
            for _ in 0..cycles {
                agents.shuffle(rng);
                let len = rng.random_range(2..=n);
                let w = 1.0 - rng.random::<f64>();
                add_cycle(&mut weights, &agents[..len], w);
            }
        }
        rescale_into_unit(&mut weights);
        InfluenceGraph::from_rows(&weights).expect("circulation weights are in [0, 1]")
    }

    /// Balanced graph guaranteed to be weakly (hence strongly) connected: a
    /// Hamiltonian cycle plus `extra_cycles` random cycles.
    pub fn connected_circulation<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        extra_cycles: usize,
    ) -> InfluenceGraph {
        let mut weights = circulation(rng, n, extra_cycles).to_rows();
        if n >= 2 {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let w = 0.5 + 0.5 * rng.random::<f64>();
            add_cycle(&mut weights, &order, w);
        }
        rescale_into_unit(&mut weights);
        InfluenceGraph::from_rows(&weights).expect("circulation weights are in [0, 1]")
    }

    /// Each off-diagonal edge present with probability `density`, weight
    /// uniform in `[min_weight, 1]`.
    pub fn graph<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64, min_weight: f64) -> InfluenceGraph {
        InfluenceGraph::from_fn(n, |_, _| {
            if rng.random::<f64>() < density {
                rng.random_range(min_weight..=1.0)
            } else {
                0.0
            }
        })
        .expect("weights are in [0, 1]")
    }

    /// Random graph with a Hamiltonian cycle added so it is strongly connected.
    pub fn strongly_connected<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        density: f64,
        min_weight: f64,
    ) -> InfluenceGraph {
        let mut weights = graph(rng, n, density, min_weight).to_rows();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for k in 0..n {
            let (a, b) = (order[k], order[(k + 1) % n]);
            if a != b && weights[a][b] == 0.0 {
                weights[a][b] = rng.random_range(min_weight..=1.0);
            }
        }
        InfluenceGraph::from_rows(&weights).expect("weights are in [0, 1]")
    }

    /// Uniform random beliefs.
    pub fn beliefs<R: Rng + ?Sized>(rng: &mut R, n: usize) -> crate::model::BeliefState {
        crate::model::BeliefState::new((0..n).map(|_| rng.random::<f64>()).collect())
            .expect("uniform samples are in [0, 1)")
    }
}
