//! Discrete-time opinion dynamics with authority and confirmation bias.
//!
//! Agents hold beliefs in `[0, 1]` about a single proposition and update them
//! every step by averaging the pull of everyone who influences them. The
//! crate provides
//!
//! - the regular and confirmation-bias update functions ([`model`]),
//! - the Esteban-Ray polarization measure over binned beliefs ([`polarization`]),
//! - generators and classification for influence graphs ([`graphs`]),
//! - convergence prediction through extreme beliefs, the clique time bound,
//!   SCC condensation and the row-stochastic update matrix ([`analysis`]),
//! - checkers that replay recorded traces against the convergence
//!   properties of the model ([`verify`]).
//!
//! ```
//! use polarsim::{gen_influence, gen_initial_beliefs, run, InfluenceKind, InitialBeliefs, UpdateKind};
//!
//! let beliefs = gen_initial_beliefs(InitialBeliefs::Uniform, 100)?;
//! let graph = gen_influence(InfluenceKind::Clique(0.5), 100)?;
//! let trace = run(&beliefs, &graph, UpdateKind::Regular, 1_000, Some(1e-2))?;
//! assert_eq!(trace.steps_taken(), 7);
//! # Ok::<(), polarsim::Error>(())
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod error;
pub mod graphs;
pub mod model;
pub mod polarization;
pub mod verify;

pub use analysis::{
    build_update_matrix, clique_convergence_bound, extremes, limit_beliefs, predict_consensus, scc_condense,
    ConvergenceBound, ExtremeSeries, LimitReport, SccDecomposition, UpdateMatrix,
};
pub use error::{Error, Result};
pub use graphs::{
    classify, gen_influence, product_influence, GraphClassReport, InfluenceKind, InfluencePath,
};
pub use model::{
    confirmation_bias_step, gen_initial_beliefs, regular_step, run, step, step_breakdown, BeliefState,
    InfluenceGraph, InitialBeliefs, SimulationTrace, StepBreakdown, StopReason, UpdateKind,
};
pub use polarization::{discretize, er_measure, polarization_series, BinSpec, Distribution, ErParams};

// Runs the guide's and the README's code listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/updates.md")]
    mod updates {}
    #[doc = include_str!("../../../book/src/polarization.md")]
    mod polarization {}
    #[doc = include_str!("../../../book/src/influence-graphs.md")]
    mod influence_graphs {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/confirmation-bias.md")]
    mod confirmation_bias {}
    #[doc = include_str!("../../../book/src/checkers.md")]
    mod checkers {}
}
