//! Esteban-Ray polarization of a belief state.
//!
//! Beliefs are first binned into a discrete distribution `(π, y)`, where `π_i`
//! is the fraction of agents in bin `i` and `y_i` its representative value.
//! The measure is then
//!
//! ```text
//! ρ(π, y) = K · Σ_i Σ_j π_i^(1+α) · π_j · |y_i − y_j|
//! ```
//!
//! Empty bins are dropped so that every weight is strictly positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BeliefState, SimulationTrace};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Partition of `[0, 1]` into `k` bins with one representative value each.
///
/// Bin `i` is `[edges[i], edges[i+1])`, except the last one which also
/// contains 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSpec {
    edges: Vec<f64>,
    representatives: Vec<f64>,
}

impl BinSpec {
    pub fn new(edges: Vec<f64>, representatives: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Parameter("at least one bin is required".into()));
        }
        if edges[0] != 0.0 || *edges.last().unwrap() != 1.0 {
            return Err(Error::Parameter("bin edges must start at 0 and end at 1".into()));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Parameter("bin edges must be strictly increasing".into()));
        }
        if representatives.len() != edges.len() - 1 {
            return Err(Error::Shape { expected: edges.len() - 1, found: representatives.len() });
        }
        let k = representatives.len();
        for (i, &y) in representatives.iter().enumerate() {
            let inside = if i + 1 == k {
                edges[i] <= y && y <= edges[i + 1]
            } else {
                edges[i] <= y && y < edges[i + 1]
            };
            if !inside {
                return Err(Error::Parameter(format!("representative {y} lies outside bin {i}")));
            }
        }
        Ok(Self { edges, representatives })
    }

    /// `k` equal-width bins represented by their midpoints.
    pub fn equal_width(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("bin count must be positive".into()));
        }
        let kf = k as f64;
        let edges: Vec<f64> = (0..=k).map(|i| i as f64 / kf).collect();
        let representatives = edges.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        Self::new(edges, representatives)
    }

    /// Number of bins.
    pub fn k(&self) -> usize {
        self.representatives.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn representatives(&self) -> &[f64] {
        &self.representatives
    }

    /// Index of the bin holding `value` (assumed in `[0, 1]`).
    pub fn bin_of(&self, value: f64) -> usize {
        // number of edges ≤ value, minus the leading 0 edge
        let above = self.edges.partition_point(|&e| e <= value);
        above.saturating_sub(1).min(self.k() - 1)
    }
}

/// Discrete distribution with strictly positive weights summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSize("a distribution needs at least one entry".into()));
        }
        if weights.len() != values.len() {
            return Err(Error::Shape { expected: weights.len(), found: values.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Parameter(format!("weights must be positive, found {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Parameter(format!("weights must sum to 1, found {total}")));
        }
        Ok(Self { weights, values })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Scale `K` and sensitivity exponent `α` of the Esteban-Ray measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub scale: f64,
    pub alpha: f64,
}

impl ErParams {
    pub fn new(scale: f64, alpha: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Parameter(format!("K must be positive, got {scale}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { scale, alpha })
    }
}

impl Default for ErParams {
    /// `K = 1000`, `α = 1.6`.
    fn default() -> Self {
        Self { scale: 1000.0, alpha: 1.6 }
    }
}

/// Bins the agents' beliefs and drops empty bins.
pub fn discretize(beliefs: &BeliefState, bins: &BinSpec) -> Distribution {
    let mut counts = vec![0usize; bins.k()];
    for &b in beliefs.values() {
        counts[bins.bin_of(b)] += 1;
    }
    let n = beliefs.len() as f64;
    let (weights, values) = counts
        .iter()
        .zip(bins.representatives())
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &y)| (c as f64 / n, y))
        .unzip();
    Distribution { weights, values }
}

/// The raw double sum `K · Σ_i Σ_j w_i^(1+α) · w_j · |y_i − y_j|` without
/// requiring the weights to be normalized.
pub fn er_double_sum(weights: &[f64], values: &[f64], params: ErParams) -> f64 {
    let exponent = 1.0 + params.alpha;
    let mut total = 0.0;
    for (wi, yi) in weights.iter().zip(values) {
        let wi_pow = wi.powf(exponent);
        for (wj, yj) in weights.iter().zip(values) {
            total += wi_pow * wj * (yi - yj).abs();
        }
    }
    params.scale * total
}

/// Esteban-Ray polarization of a distribution.
pub fn er_measure(dist: &Distribution, params: ErParams) -> f64 {
    er_double_sum(&dist.weights, &dist.values, params)
}

/// Polarization of a single belief state.
pub fn polarization(beliefs: &BeliefState, bins: &BinSpec, params: ErParams) -> f64 {
    er_measure(&discretize(beliefs, bins), params)
}

/// Polarization at every time step of a trace.
pub fn polarization_series(trace: &SimulationTrace, bins: &BinSpec, params: ErParams) -> Vec<f64> {
    trace.states().iter().map(|s| polarization(s, bins, params)).collect()
}
