//! Monte Carlo Feynman-Kac moments.
//!
//! For `p` independent copies `X¹..Xᵖ` the replicate value is
//! `Π_j u₀(X^j_{t_j} + x_j) · exp(E)` with
//! `E = ½ Σ_j H^{jj} + Σ_{j<k} H^{jk}` (Stratonovich) or
//! `E = Σ_{j<k} H^{jk}` (Skorohod). Copy `j` of replicate `r` reads stream
//! `r·p + j`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{CrossPlan, DiagPolicy, HamiltonianEvaluator};
use crate::mc::{mean_stderr, McConfig, MomentEstimate};
use crate::model::{InitialCondition, LevyProcessSpec, NoiseSpec};
use crate::pathsim::{sample_path, PathSample, TimeGrid};
use crate::quad::pairwise_sum;
use crate::spectral::{check_hypothesis_i, check_hypothesis_ii, holder_exponents, HypothesisReport, Sense};

/// Default cap on the moment order.
pub const MAX_ORDER: usize = 6;

/// A space-time point `(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offset {
    pub t: f64,
    pub x: Vec<f64>,
}

impl Offset {
    pub fn new(t: f64, x: Vec<f64>) -> Self {
        Offset { t, x }
    }
}

fn require(report: HypothesisReport, what: &str) -> Result<()> {
    if report.holds {
        Ok(())
    } else {
        Err(Error::HypothesisViolated {
            hypothesis: report.hypothesis.to_string(),
            detail: format!(
                "{what} needs it; {} (pass force to override)",
                report.criterion.unwrap_or_else(|| "the spectral integral diverges".into())
            ),
        })
    }
}

/// Everything that is fixed across replicates.
struct Setup {
    evaluator: Option<HamiltonianEvaluator>,
    grid: TimeGrid,
    steps: Vec<usize>,
    /// `plans[j][k]` for `j < k`.
    plans: Vec<Vec<Option<CrossPlan>>>,
    need_paths: bool,
}

fn steps_for(t: f64, h: f64) -> Result<usize> {
    let s = t / h;
    let n = s.round();
    if !(t > 0.0) || (s - n).abs() > 1e-9 * s.max(1.0) {
        return Err(Error::param(
            "offsets",
            format!("time {t} is not a positive multiple of the step {h}"),
        ));
    }
    Ok(n as usize)
}

fn setup(
    sense: Sense,
    offsets: &[Offset],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
) -> Result<Setup> {
    let d = process.dim();
    if noise.kernel().dim() != d || offsets.iter().any(|o| o.x.len() != d) {
        return Err(Error::param("x", "points, process and kernel must share the dimension"));
    }
    let h = grid.step();
    let steps: Vec<usize> = offsets.iter().map(|o| steps_for(o.t, h)).collect::<Result<_>>()?;
    let n_max = *steps.iter().max().expect("at least one offset");
    let path_grid = if n_max == grid.n_steps() {
        *grid
    } else {
        TimeGrid::with_step(h, n_max)?
    };
    let p = offsets.len();
    let has_exponent = sense == Sense::Stratonovich || p > 1;
    let u0_constant = u0.as_constant();
    let evaluator = if has_exponent && u0_constant != Some(0.0) {
        Some(HamiltonianEvaluator::new(
            process,
            noise.kernel(),
            noise.beta0(),
            &path_grid,
            DiagPolicy::Analytic,
        )?)
    } else {
        None
    };
    let mut plans = vec![vec![None; p]; p];
    if let Some(ev) = &evaluator {
        for j in 0..p {
            for k in j + 1..p {
                plans[j][k] = Some(ev.cross_plan(steps[j], &offsets[j].x, steps[k], &offsets[k].x)?);
            }
        }
    }
    let need_paths = u0_constant.is_none() || (evaluator.is_some() && !noise.kernel().is_constant());
    Ok(Setup {
        evaluator,
        grid: path_grid,
        steps,
        plans,
        need_paths,
    })
}

fn replicate_value(setup: &Setup, sense: Sense, offsets: &[Offset], u0: &InitialCondition, paths: &[PathSample]) -> f64 {
    let p = offsets.len();
    let mut prefactor = 1.0;
    for j in 0..p {
        let end = paths[j].point(setup.steps[j]);
        let y: Vec<f64> = end.iter().zip(&offsets[j].x).map(|(a, b)| a + b).collect();
        prefactor *= u0.eval(&y);
    }
    if prefactor == 0.0 {
        return 0.0;
    }
    let Some(ev) = &setup.evaluator else {
        return prefactor;
    };
    let mut terms = Vec::with_capacity(p * (p + 1) / 2);
    if sense == Sense::Stratonovich {
        for (path, steps) in paths.iter().zip(&setup.steps) {
            terms.push(0.5 * ev.self_value(path, *steps).value);
        }
    }
    for j in 0..p {
        for k in j + 1..p {
            let plan = setup.plans[j][k].as_ref().expect("plan for every pair");
            terms.push(ev.cross_value(&paths[j], &paths[k], plan).value);
        }
    }
    prefactor * pairwise_sum(&terms).exp()
}

fn sample_copies(setup: &Setup, process: &LevyProcessSpec, seed: u64, streams: &[u64]) -> Vec<PathSample> {
    if setup.need_paths {
        streams.iter().map(|s| sample_path(process, &setup.grid, seed, *s)).collect()
    } else {
        vec![PathSample::frozen(setup.grid, process.dim()); streams.len()]
    }
}

fn check_order(p: usize, mc: &McConfig) -> Result<()> {
    if p == 0 {
        return Err(Error::param("p", "moment order must be at least 1"));
    }
    if p > MAX_ORDER && !mc.force {
        return Err(Error::param("p", format!("moment order above {MAX_ORDER} needs force")));
    }
    Ok(())
}

/// Replicate values with copy `j` drawn from stream `r·p + streams[j]`.
/// Copies are processed in stream order, so permuting offsets together with
/// their streams leaves every value unchanged.
#[allow(clippy::too_many_arguments)]
pub(crate) fn replicates_with_streams(
    sense: Sense,
    offsets: &[Offset],
    streams: &[usize],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    mc.validate()?;
    check_order(offsets.len(), mc)?;
    let mut order: Vec<usize> = (0..offsets.len()).collect();
    order.sort_by_key(|&j| streams[j]);
    let offsets: Vec<Offset> = order.iter().map(|&j| offsets[j].clone()).collect();
    let lanes: Vec<u64> = order.iter().map(|&j| streams[j] as u64).collect();
    let setup = setup(sense, &offsets, u0, process, noise, grid)?;
    let p = offsets.len() as u64;
    Ok((0..mc.replicates)
        .into_par_iter()
        .map(|r| {
            let streams: Vec<u64> = lanes.iter().map(|s| r as u64 * p + s).collect();
            let paths = sample_copies(&setup, process, mc.seed, &streams);
            replicate_value(&setup, sense, &offsets, u0, &paths)
        })
        .collect())
}

/// Raw replicate values of the mixed moment, in replicate order.
pub fn mixed_moment_replicates(
    sense: Sense,
    offsets: &[Offset],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    let streams: Vec<usize> = (0..offsets.len()).collect();
    replicates_with_streams(sense, offsets, &streams, u0, process, noise, grid, mc)
}

fn estimate(sense: Sense, offsets: &[Offset], grid: &TimeGrid, mc: &McConfig, values: &[f64]) -> MomentEstimate {
    let (value, stderr) = mean_stderr(values);
    MomentEstimate {
        value,
        stderr,
        replicates: values.len(),
        p: offsets.len(),
        sense: Some(sense),
        t: offsets[0].t,
        x: offsets[0].x.clone(),
        n_steps: grid.n_steps(),
        seed: mc.seed,
    }
}

/// `E Π_j u(t_j, x_j)`. Every `t_j` must be a multiple of the grid step.
/// Both senses require hypothesis (I).
pub fn mixed_moment(
    sense: Sense,
    offsets: &[Offset],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<MomentEstimate> {
    if offsets.is_empty() {
        return Err(Error::param("offsets", "need at least one point"));
    }
    if !mc.force {
        require(check_hypothesis_i(process, noise)?, "the mixed moment")?;
    }
    let values = mixed_moment_replicates(sense, offsets, u0, process, noise, grid, mc)?;
    Ok(estimate(sense, offsets, grid, mc, &values))
}

fn same_point(p: usize, t: f64, x: &[f64]) -> Vec<Offset> {
    vec![Offset::new(t, x.to_vec()); p]
}

/// `E u(t,x)^p` for the Stratonovich solution; requires hypothesis (I).
#[allow(clippy::too_many_arguments)]
pub fn moment_stratonovich(
    p: usize,
    t: f64,
    x: &[f64],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<MomentEstimate> {
    if !mc.force {
        require(check_hypothesis_i(process, noise)?, "the Stratonovich moment")?;
    }
    let offsets = same_point(p, t, x);
    let values = mixed_moment_replicates(Sense::Stratonovich, &offsets, u0, process, noise, grid, mc)?;
    Ok(estimate(Sense::Stratonovich, &offsets, grid, mc, &values))
}

/// `E u(t,x)^p` for the Skorohod solution; requires hypothesis (II).
#[allow(clippy::too_many_arguments)]
pub fn moment_skorohod(
    p: usize,
    t: f64,
    x: &[f64],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<MomentEstimate> {
    if !mc.force {
        require(check_hypothesis_ii(process, noise)?, "the Skorohod moment")?;
    }
    let offsets = same_point(p, t, x);
    let values = mixed_moment_replicates(Sense::Skorohod, &offsets, u0, process, noise, grid, mc)?;
    Ok(estimate(Sense::Skorohod, &offsets, grid, mc, &values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Space,
    Time,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Space => "space",
            Axis::Time => "time",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" => Ok(Axis::Space),
            "time" => Ok(Axis::Time),
            _ => Err(Error::Config(format!("unknown axis '{s}' (expected space|time)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderScanConfig {
    pub sense: Sense,
    pub axis: Axis,
    /// Base point `(t, x)`; the second point is `(t, x + lag e₁)` or `(t − lag, x)`.
    pub base: Offset,
    pub lags: Vec<f64>,
}

impl HolderScanConfig {
    /// Lags `2^{-first}, …, 2^{-(first+count-1)}`.
    pub fn dyadic(sense: Sense, axis: Axis, base: Offset, first: i32, count: usize) -> Self {
        let lags = (0..count).map(|i| 2f64.powi(-(first + i as i32))).collect();
        HolderScanConfig { sense, axis, base, lags }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderScan {
    pub sense: Sense,
    pub axis: Axis,
    pub lags: Vec<f64>,
    /// `E|u(a) − u(b)|²` per lag.
    pub increment_second_moments: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Log-log slope; `None` when every increment vanishes.
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    /// `fitted_slope / 2`.
    pub holder_estimate: Option<f64>,
    /// Admissible supremum from the spectral hypotheses.
    pub theoretical_sup: Option<f64>,
    /// The two-sigma band of the estimate lies strictly above the supremum.
    pub exceeds_theory: bool,
}

/// OLS slope and its standard error.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, se)
}

/// Second moments of increments along one axis from
/// `M(a,a) + M(b,b) − 2M(a,b)`, all on the same replicate paths.
pub fn holder_scan(
    config: &HolderScanConfig,
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<HolderScan> {
    mc.validate()?;
    if config.lags.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} lags given, need at least 4",
            config.lags.len()
        )));
    }
    if !mc.force {
        require(check_hypothesis_i(process, noise)?, "the increment moments")?;
    }
    let sense = config.sense;
    let a = config.base.clone();
    let mut setups = Vec::new();
    let mut diag_a = None;
    for &lag in &config.lags {
        let b = match config.axis {
            Axis::Space => {
                let mut x = a.x.clone();
                x[0] += lag;
                Offset::new(a.t, x)
            }
            Axis::Time => Offset::new(a.t - lag, a.x.clone()),
        };
        if !(b.t > 0.0) {
            return Err(Error::param("lags", format!("time lag {lag} reaches t = 0")));
        }
        let aa = vec![a.clone(), a.clone()];
        let bb = vec![b.clone(), b.clone()];
        let ab = vec![a.clone(), b.clone()];
        if diag_a.is_none() {
            diag_a = Some(setup(sense, &aa, u0, process, noise, grid)?);
        }
        setups.push((
            setup(sense, &bb, u0, process, noise, grid)?,
            setup(sense, &ab, u0, process, noise, grid)?,
            bb,
            ab,
        ));
    }
    let diag_a = diag_a.expect("at least one lag");
    let aa = vec![a.clone(), a.clone()];
    let path_grid = setups
        .iter()
        .map(|s| s.0.grid)
        .chain([diag_a.grid])
        .max_by_key(|g| g.n_steps())
        .expect("grids");
    let need_paths = diag_a.need_paths || setups.iter().any(|s| s.0.need_paths || s.1.need_paths);
    let per_replicate: Vec<Vec<f64>> = (0..mc.replicates)
        .into_par_iter()
        .map(|r| {
            let streams = [2 * r as u64, 2 * r as u64 + 1];
            let paths: Vec<PathSample> = if need_paths {
                streams.iter().map(|s| sample_path(process, &path_grid, mc.seed, *s)).collect()
            } else {
                vec![PathSample::frozen(path_grid, process.dim()); 2]
            };
            let m_aa = replicate_value(&diag_a, sense, &aa, u0, &paths);
            setups
                .iter()
                .map(|(s_bb, s_ab, bb, ab)| {
                    m_aa + replicate_value(s_bb, sense, bb, u0, &paths) - 2.0 * replicate_value(s_ab, sense, ab, u0, &paths)
                })
                .collect()
        })
        .collect();
    let mut means = Vec::new();
    let mut stderrs = Vec::new();
    for i in 0..config.lags.len() {
        let column: Vec<f64> = per_replicate.iter().map(|v| v[i]).collect();
        let (m, s) = mean_stderr(&column);
        means.push(m);
        stderrs.push(s);
    }
    let theoretical_sup = holder_exponents(process, noise, sense).ok().map(|h| match config.axis {
        Axis::Space => h.spatial_sup,
        Axis::Time => h.temporal_sup,
    });
    let mut scan = HolderScan {
        sense,
        axis: config.axis,
        lags: config.lags.clone(),
        increment_second_moments: means.clone(),
        stderrs,
        fitted_slope: None,
        slope_stderr: None,
        holder_estimate: None,
        theoretical_sup,
        exceeds_theory: false,
    };
    if means.iter().all(|m| *m == 0.0) {
        return Ok(scan);
    }
    let usable: Vec<(f64, f64)> = config
        .lags
        .iter()
        .zip(&means)
        .filter(|(_, m)| **m > 0.0)
        .map(|(l, m)| (*l, *m))
        .collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "only {} lags have a positive increment moment",
            usable.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    let (slope, se) = loglog_fit(&xs, &ys);
    scan.fitted_slope = Some(slope);
    scan.slope_stderr = Some(se);
    scan.holder_estimate = Some(slope / 2.0);
    if let Some(sup) = theoretical_sup {
        scan.exceeds_theory = slope / 2.0 - se > sup;
    }
    Ok(scan)
}
