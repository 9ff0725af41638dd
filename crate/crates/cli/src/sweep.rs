//! Parameter grids over the graph constant and the step budget.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::pipeline::{simulate, write_artifacts};
use crate::scenario::Scenario;
use crate::{output, CliError};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c: Option<f64>,
    pub steps: usize,
    pub dir: PathBuf,
    pub steps_taken: usize,
    pub final_gap: f64,
    pub final_rho: f64,
}

fn cell_name(c: Option<f64>, steps: usize) -> String {
    match c {
        Some(c) => format!("c{c}_steps{steps}"),
        None => format!("steps{steps}"),
    }
}

/// Runs every `(c, steps)` combination in parallel, each into its own
/// subdirectory of `out_dir`, and writes `summary.csv` in grid order.
///
/// An empty `constants` list keeps the scenario's graph.
pub fn sweep(
    base: &Scenario,
    constants: &[f64],
    steps: &[usize],
    out_dir: &Path,
) -> Result<Vec<SweepRow>, CliError> {
    let cs: Vec<Option<f64>> =
        if constants.is_empty() { vec![None] } else { constants.iter().copied().map(Some).collect() };
    let budgets = if steps.is_empty() { vec![base.steps] } else { steps.to_vec() };
    let grid: Vec<(Option<f64>, usize)> =
        cs.iter().flat_map(|&c| budgets.iter().map(move |&s| (c, s))).collect();

    let rows = grid
        .par_iter()
        .map(|&(c, steps)| {
            let scenario = match c {
                Some(c) => base.with_constant(c)?,
                None => base.clone(),
            }
            .with_steps(steps);
            let dir = out_dir.join(cell_name(c, steps));
            let outcome = simulate(&scenario)?;
            write_artifacts(&scenario, &outcome, &dir)?;
            Ok(SweepRow {
                c,
                steps,
                dir,
                steps_taken: outcome.trace.steps_taken(),
                final_gap: outcome.trace.last().gap(),
                final_rho: outcome.rho.last().copied().unwrap_or(0.0),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |source| CliError::Io { path: out_dir.join("summary.csv"), source };
    w.write_record(["c", "steps", "steps_taken", "final_gap", "final_rho"]).map_err(|e| io(e.into()))?;
    for r in &rows {
        w.write_record([
            r.c.map(|c| c.to_string()).unwrap_or_default(),
            r.steps.to_string(),
            r.steps_taken.to_string(),
            r.final_gap.to_string(),
            r.final_rho.to_string(),
        ])
        .map_err(|e| io(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| io(e.into_error()))?;
    output::write_atomic(&out_dir.join("summary.csv"), &bytes).map_err(io)?;
    Ok(rows)
}
