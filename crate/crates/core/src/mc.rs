//! Replicate bookkeeping shared by the Monte Carlo estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::pairwise_sum;
use crate::spectral::Sense;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Skip hypothesis checks and the moment-order cap.
    pub force: bool,
}

impl McConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        McConfig {
            replicates,
            seed,
            force: false,
        }
    }

    pub fn forced(mut self) -> Self {
        self.force = true;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::param("replicates", "need at least 2 replicates for a standard error"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    /// Sample standard deviation over `√replicates`.
    pub stderr: f64,
    pub replicates: usize,
    pub p: usize,
    pub sense: Option<Sense>,
    pub t: f64,
    pub x: Vec<f64>,
    pub n_steps: usize,
    pub seed: u64,
}

impl MomentEstimate {
    /// `|self − other| ≤ k·√(se₁² + se₂²) + slack`.
    pub fn agrees_with(&self, other: &MomentEstimate, k: f64, slack: f64) -> bool {
        (self.value - other.value).abs() <= k * self.stderr.hypot(other.stderr) + slack
    }
}

/// Evaluates `f(0), …, f(n-1)` in parallel; the output order is the index order.
pub fn replicate_values<F>(n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Fallible variant of [`replicate_values`].
pub fn try_replicate_values<F>(n: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Mean and standard error with fixed-order pairwise sums.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    if values.iter().all(|v| *v == values[0]) {
        return (values[0], 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Sizes the global worker pool. Later calls are no-ops.
pub fn init_thread_pool(threads: Option<usize>) {
    let n = threads.or_else(|| std::env::var("PAMKIT_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
