//! Scenario execution: simulation, analysis and trace checks.

use std::path::{Path, PathBuf};

use polarsim::analysis::{epsilon_contraction, f_min};
use polarsim::graphs::shortest_path;
use polarsim::verify::{
    check_belief_bounds, check_cb_fixedpoint, check_conservation, check_extreme_monotonicity,
    check_geometric_gap, check_order_preservation, check_path_bound, CheckReport,
};
use polarsim::{
    classify, clique_convergence_bound, extremes, limit_beliefs, polarization_series, predict_consensus, run,
    scc_condense, ConvergenceBound, GraphClassReport, LimitReport, SccDecomposition, SimulationTrace,
    StopReason, UpdateKind,
};
use serde::Serialize;

use crate::output;
use crate::scenario::Scenario;
use crate::CliError;

const LIMIT_TOL: f64 = 1e-12;
const LIMIT_MAX_ITER: usize = 100_000;
/// Gap target of the clique bound when the scenario sets no `stop_gap`.
pub const DEFAULT_EPS: f64 = 1e-2;
const PATH_WINDOW: usize = 50;

/// Simulation result and its polarization series.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub trace: SimulationTrace,
    pub rho: Vec<f64>,
}

pub fn simulate(s: &Scenario) -> Result<Outcome, CliError> {
    let trace = run(&s.initial, &s.graph, s.update, s.steps, s.stop_gap)?;
    let rho = polarization_series(&trace, &s.bins, s.er);
    Ok(Outcome { trace, rho })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps_taken: usize,
    pub stopped_by: StopReason,
    pub final_gap: f64,
    pub final_rho: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub graph: GraphClassReport,
    pub predicted_consensus: Option<f64>,
    pub limit: LimitReport,
    pub convergence_bound: Option<ConvergenceBound>,
    pub scc: SccDecomposition,
    pub run: RunSummary,
}

pub fn analyze(s: &Scenario, outcome: &Outcome) -> Result<Analysis, CliError> {
    let graph = classify(&s.graph);
    let e = extremes(&outcome.trace);
    let factor = match s.update {
        UpdateKind::Regular => 1.0,
        UpdateKind::ConfirmationBias => f_min(&s.initial),
    };
    let convergence_bound = match graph.clique_constant {
        Some(c) => {
            let mut bound = clique_convergence_bound(c, &s.initial, s.stop_gap.unwrap_or(DEFAULT_EPS))?;
            bound.epsilon_contraction =
                epsilon_contraction(&s.graph, factor, e.upper_estimate(), e.lower_estimate());
            bound.f_min = (s.update == UpdateKind::ConfirmationBias).then_some(factor);
            Some(bound)
        }
        None => None,
    };
    let last = outcome.trace.last();
    Ok(Analysis {
        predicted_consensus: predict_consensus(&s.graph, &s.initial)?,
        limit: limit_beliefs(&s.graph, &s.initial, LIMIT_TOL, LIMIT_MAX_ITER)?,
        convergence_bound,
        scc: scc_condense(&s.graph),
        run: RunSummary {
            steps_taken: outcome.trace.steps_taken(),
            stopped_by: outcome.trace.stop_reason(),
            final_gap: last.gap(),
            final_rho: outcome.rho.last().copied().unwrap_or(0.0),
        },
        graph,
    })
}

pub fn analysis_json(analysis: &Analysis) -> String {
    let mut text = serde_json::to_string_pretty(analysis).expect("analysis serializes");
    text.push('\n');
    text
}

/// Files written by [`run_scenario`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub files: Vec<PathBuf>,
}

/// Simulates `s` and writes every artifact into `out_dir`.
pub fn run_scenario(s: &Scenario, out_dir: &Path) -> Result<Manifest, CliError> {
    write_artifacts(s, &simulate(s)?, out_dir)
}

pub fn write_artifacts(s: &Scenario, outcome: &Outcome, out_dir: &Path) -> Result<Manifest, CliError> {
    let analysis = analyze(s, outcome)?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let artifacts: [(&str, Vec<u8>); 5] = [
        ("beliefs.csv", output::beliefs_csv(&outcome.trace).map_err(io(out_dir))?),
        ("polarization.csv", output::series_csv("rho", &outcome.rho).map_err(io(out_dir))?),
        ("analysis.json", analysis_json(&analysis).into_bytes()),
        ("beliefs.svg", output::beliefs_svg(&outcome.trace).into_bytes()),
        ("polarization.svg", output::polarization_svg(&outcome.rho).into_bytes()),
    ];
    let mut files = Vec::with_capacity(artifacts.len());
    for (name, bytes) in artifacts {
        let path = out_dir.join(name);
        output::write_atomic(&path, &bytes).map_err(io(&path))?;
        files.push(path);
    }
    Ok(Manifest { files })
}

/// Result of one checker, or the reason it does not apply.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Ran(CheckReport),
    Skipped { name: &'static str, reason: String },
}

/// Runs every checker that applies to the scenario's graph and update rule.
pub fn check(s: &Scenario, outcome: &Outcome) -> Result<Vec<CheckOutcome>, CliError> {
    let trace = &outcome.trace;
    let report = classify(&s.graph);
    let mut results = Vec::new();
    let mut record = |name: &'static str, r: polarsim::Result<CheckReport>| -> Result<(), CliError> {
        match r {
            Ok(report) => results.push(CheckOutcome::Ran(report)),
            Err(polarsim::Error::Precondition(reason) | polarsim::Error::Parameter(reason)) => {
                results.push(CheckOutcome::Skipped { name, reason })
            }
            Err(e) => return Err(e.into()),
        }
        Ok(())
    };
    record("belief_bounds", check_belief_bounds(trace))?;
    record("extreme_monotonicity", Ok(check_extreme_monotonicity(trace)))?;
    record("order_preservation", check_order_preservation(trace, &report))?;
    record("conservation", check_conservation(trace, &report))?;
    record("geometric_gap", check_geometric_gap(trace, &report))?;
    record("path_bound", path_bounds(s, trace, &report))?;
    let fixed = if s.update == UpdateKind::ConfirmationBias {
        check_cb_fixedpoint(&s.initial, &s.graph)
    } else {
        Err(polarsim::Error::Precondition("the scenario uses the regular update".into()))
    };
    record("cb_fixedpoint", fixed)?;
    Ok(results)
}

/// Path bound from every agent to its successor and to the agent halfway
/// around, over the first steps of the trace.
fn path_bounds(
    s: &Scenario,
    trace: &SimulationTrace,
    report: &GraphClassReport,
) -> polarsim::Result<CheckReport> {
    if !report.strongly_connected || s.n < 2 {
        return Err(polarsim::Error::Precondition("the influence graph is not strongly connected".into()));
    }
    let mut last = None;
    for from in 0..s.n {
        let mut targets = vec![(from + 1) % s.n, (from + s.n / 2) % s.n];
        targets.dedup();
        for to in targets.into_iter().filter(|&to| to != from) {
            let path = shortest_path(&s.graph, from, to).expect("strongly connected");
            let horizon = trace.len().saturating_sub(path.size() + 1).min(PATH_WINDOW);
            for t in 0..horizon {
                let r = check_path_bound(trace, &s.graph, &path, t)?;
                if !r.passed {
                    return Ok(r);
                }
                last = Some(r);
            }
        }
    }
    last.ok_or_else(|| polarsim::Error::Parameter("the trace is too short for any path".into()))
}
