//! The double time integral `H = ∫₀ᵗ∫₀ᵗ |r−s|^{-β₀} γ(X_r − Y_s) dr ds`.
//!
//! Paths are frozen at the left node of each grid cell and the temporal
//! factor is integrated exactly over every cell pair, which gives a Toeplitz
//! weight `w_k` depending only on the lag `k` between cells.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_li;

use crate::error::{Error, Result};
use crate::mc::{mean_stderr, try_replicate_values, McConfig, MomentEstimate};
use crate::model::{CovarianceKernel, KernelFamily, LevyProcessSpec};
use crate::pathsim::{sample_path, PathSample, TimeGrid};
use crate::quad::tanh_sinh;
use crate::spectral::{check_hypothesis_i, expected_gamma_shifted, mu_integral};

/// Lags at or beyond this use the binomial series for the second difference.
const SERIES_LAG: usize = 8;

fn check_beta0(beta0: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta0) {
        return Err(Error::Domain(format!("beta0 must lie in [0, 1) (got {beta0})")));
    }
    Ok(())
}

/// `2 t^{2-β₀} / ((1-β₀)(2-β₀))`, the integral of `|r-s|^{-β₀}` over `[0,t]²`.
pub fn total_weight(t: f64, beta0: f64) -> f64 {
    2.0 * t.powf(2.0 - beta0) / ((1.0 - beta0) * (2.0 - beta0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellWeights {
    pub grid: TimeGrid,
    pub beta0: f64,
    /// `w_k` for `k = 0..n_steps`.
    pub weights: Vec<f64>,
}

impl CellWeights {
    pub fn lag(&self, k: usize) -> f64 {
        self.weights
            .get(k)
            .copied()
            .unwrap_or_else(|| cell_weight(self.grid.step(), self.beta0, k))
    }

    /// Sum over all `n²` cell pairs.
    pub fn total(&self) -> f64 {
        let n = self.grid.n_steps();
        let mut parts = vec![n as f64 * self.weights[0]];
        for k in 1..n {
            parts.push(2.0 * (n - k) as f64 * self.weights[k]);
        }
        crate::quad::pairwise_sum(&parts)
    }
}

/// `∫∫ |r-s|^{-β₀}` over a pair of cells of width `h` that are `k` cells apart.
pub fn cell_weight(h: f64, beta0: f64, k: usize) -> f64 {
    let q = 2.0 - beta0;
    let norm = h.powf(q) / ((1.0 - beta0) * q);
    if k == 0 {
        return 2.0 * norm;
    }
    let kf = k as f64;
    let second_difference = if k < SERIES_LAG {
        (kf + 1.0).powf(q) - 2.0 * kf.powf(q) + (kf - 1.0).powf(q)
    } else {
        // (k+1)^q + (k-1)^q - 2k^q = 2 Σ_{m≥1} C(q, 2m) k^{q-2m}
        let mut sum = 0.0;
        let mut binom = 1.0;
        let inv_k2 = 1.0 / (kf * kf);
        let mut power = kf.powf(q);
        for m in 1..40 {
            let j = 2 * m;
            binom *= (q - (j - 2) as f64) * (q - (j - 1) as f64) / ((j - 1) as f64 * j as f64);
            power *= inv_k2;
            let term = binom * power;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        2.0 * sum
    };
    norm * second_difference
}

pub fn cell_weights(grid: &TimeGrid, beta0: f64) -> Result<CellWeights> {
    check_beta0(beta0)?;
    let h = grid.step();
    let weights = (0..=grid.n_steps()).map(|k| cell_weight(h, beta0, k)).collect();
    Ok(CellWeights {
        grid: *grid,
        beta0,
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagPolicy {
    /// Omit cell pairs whose left-node displacement is singular.
    Drop,
    /// Replace deterministic singular cells by their expected value.
    #[default]
    Analytic,
}

impl fmt::Display for DiagPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagPolicy::Drop => "drop",
            DiagPolicy::Analytic => "analytic",
        })
    }
}

impl FromStr for DiagPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(DiagPolicy::Drop),
            "analytic" => Ok(DiagPolicy::Analytic),
            _ => Err(Error::Config(format!("unknown diag policy '{s}' (expected drop|analytic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `Y = X`.
    #[serde(rename = "self")]
    SelfPath,
    /// `Y` an independent copy of `X`.
    Cross,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::SelfPath => "self",
            Mode::Cross => "cross",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self" => Ok(Mode::SelfPath),
            "cross" => Ok(Mode::Cross),
            _ => Err(Error::Config(format!("unknown mode '{s}' (expected self|cross)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianValue {
    pub value: f64,
    /// False when a random cell pair hit the singular set.
    pub finite: bool,
    pub grid: TimeGrid,
    pub policy: DiagPolicy,
    pub kernel: CovarianceKernel,
    pub beta0: f64,
}

/// Precomputed weights and singular-cell patches for one
/// (process, kernel, β₀, grid, policy) configuration.
#[derive(Debug, Clone)]
pub struct HamiltonianEvaluator {
    process: LevyProcessSpec,
    kernel: CovarianceKernel,
    weights: CellWeights,
    policy: DiagPolicy,
    /// `E γ(X_h)` when `γ(0) = ∞` and the policy is analytic.
    diag_patch: Option<f64>,
}

/// Offsets for one cross pair: the cells of `X` and `Y` are compared at
/// lag `|shift_steps − a + b|`, and `dx` is added to every displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossPlan {
    pub steps_a: usize,
    pub steps_b: usize,
    pub dx: Vec<f64>,
    /// Replacement for the deterministic cell `(0, 0)` when `γ(dx) = ∞`.
    origin_patch: Option<f64>,
}

impl HamiltonianEvaluator {
    pub fn new(process: &LevyProcessSpec, kernel: &CovarianceKernel, beta0: f64, grid: &TimeGrid, policy: DiagPolicy) -> Result<Self> {
        if process.dim() != kernel.dim() {
            return Err(Error::param("kernel", "kernel and process dimensions differ"));
        }
        let weights = cell_weights(grid, beta0)?;
        let zero = vec![0.0; kernel.dim()];
        let diag_patch = if policy == DiagPolicy::Analytic && !kernel.eval(&zero).is_finite() {
            Some(expected_gamma_shifted(process, kernel, grid.step(), &zero)?)
        } else {
            None
        };
        Ok(HamiltonianEvaluator {
            process: *process,
            kernel: kernel.clone(),
            weights,
            policy,
            diag_patch,
        })
    }

    pub fn weights(&self) -> &CellWeights {
        &self.weights
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.weights.grid
    }

    fn wrap(&self, value: f64, finite: bool) -> HamiltonianValue {
        HamiltonianValue {
            value,
            finite,
            grid: self.weights.grid,
            policy: self.policy,
            kernel: self.kernel.clone(),
            beta0: self.weights.beta0,
        }
    }

    #[inline]
    fn gamma(&self, a: &[f64], b: &[f64], dx: &[f64], buf: &mut [f64]) -> f64 {
        if a.len() == 1 {
            return self.kernel.eval_1d(a[0] - b[0] + dx[0]);
        }
        for j in 0..a.len() {
            buf[j] = a[j] - b[j] + dx[j];
        }
        self.kernel.eval(buf)
    }

    /// Self Hamiltonian of the first `steps` cells of `x`.
    pub fn self_value(&self, x: &PathSample, steps: usize) -> HamiltonianValue {
        let d = x.dim;
        let zero = vec![0.0; d];
        let mut buf = vec![0.0; d];
        let mut finite = true;
        let g0 = self.kernel.eval(&zero);
        let diag_cell = if g0.is_finite() {
            Some(g0)
        } else {
            match self.policy {
                DiagPolicy::Drop => None,
                DiagPolicy::Analytic => self.diag_patch,
            }
        };
        let mut lags = Vec::with_capacity(steps);
        lags.push(diag_cell.map_or(0.0, |g| steps as f64 * self.weights.lag(0) * g));
        for k in 1..steps {
            let mut s = 0.0;
            for a in 0..steps - k {
                let g = self.gamma(x.point(a + k), x.point(a), &zero, &mut buf);
                if g.is_finite() {
                    s += g;
                } else {
                    finite = false;
                    if self.policy == DiagPolicy::Analytic {
                        s = f64::INFINITY;
                    }
                }
            }
            lags.push(2.0 * self.weights.lag(k) * s);
        }
        self.wrap(crate::quad::pairwise_sum(&lags), finite)
    }

    /// Plan for pairing the first `steps_a` cells of one path (shifted by
    /// `x_a`) with the first `steps_b` cells of another (shifted by `x_b`).
    pub fn cross_plan(&self, steps_a: usize, x_a: &[f64], steps_b: usize, x_b: &[f64]) -> Result<CrossPlan> {
        let dx: Vec<f64> = x_a.iter().zip(x_b).map(|(a, b)| a - b).collect();
        if dx.len() != self.kernel.dim() {
            return Err(Error::param("x", "spatial offsets must match the dimension"));
        }
        let origin_patch = if self.policy == DiagPolicy::Analytic && !self.kernel.eval(&dx).is_finite() {
            Some(expected_gamma_shifted(&self.process, &self.kernel, self.weights.grid.step(), &dx)?)
        } else {
            None
        };
        Ok(CrossPlan {
            steps_a,
            steps_b,
            dx,
            origin_patch,
        })
    }

    /// `Σ_{a,b} w_{|n_a − n_b − a + b|} γ(X_a − Y_b + dx)`.
    pub fn cross_value(&self, x: &PathSample, y: &PathSample, plan: &CrossPlan) -> HamiltonianValue {
        let d = x.dim;
        let mut buf = vec![0.0; d];
        let mut finite = true;
        let shift = plan.steps_a as isize - plan.steps_b as isize;
        let mut rows = Vec::with_capacity(plan.steps_a);
        for a in 0..plan.steps_a {
            let xa = x.point(a);
            let mut s = 0.0;
            for b in 0..plan.steps_b {
                let lag = (shift - a as isize + b as isize).unsigned_abs();
                let mut g = self.gamma(xa, y.point(b), &plan.dx, &mut buf);
                if !g.is_finite() {
                    if a == 0 && b == 0 && plan.origin_patch.is_some() {
                        g = plan.origin_patch.unwrap_or(0.0);
                    } else {
                        finite = false;
                        g = match self.policy {
                            DiagPolicy::Drop => 0.0,
                            DiagPolicy::Analytic => f64::INFINITY,
                        };
                    }
                }
                s += self.weights.lag(lag) * g;
            }
            rows.push(s);
        }
        self.wrap(crate::quad::pairwise_sum(&rows), finite)
    }
}

/// Hamiltonian of two paths on the same grid. Passing the same path twice
/// gives the self Hamiltonian.
pub fn hamiltonian(
    process: &LevyProcessSpec,
    path_a: &PathSample,
    path_b: &PathSample,
    kernel: &CovarianceKernel,
    beta0: f64,
    policy: DiagPolicy,
) -> Result<HamiltonianValue> {
    if path_a.grid != path_b.grid || path_a.dim != path_b.dim {
        return Err(Error::GridMismatch);
    }
    let ev = HamiltonianEvaluator::new(process, kernel, beta0, &path_a.grid, policy)?;
    let n = path_a.grid.n_steps();
    if std::ptr::eq(path_a, path_b) || path_a == path_b {
        return Ok(ev.self_value(path_a, n));
    }
    let zero = vec![0.0; path_a.dim];
    let plan = ev.cross_plan(n, &zero, n, &zero)?;
    Ok(ev.cross_value(path_a, path_b, &plan))
}

/// `T(ψ) = 2∫₀ᵗ (t−u) u^{-β₀} e^{-uψ} du`.
fn self_time_factor(t: f64, beta0: f64, psi: f64) -> f64 {
    let x = t * psi;
    let q = 2.0 - beta0;
    if x < 2.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 0..80 {
            let nf = n as f64;
            let c = term / ((nf + 1.0 - beta0) * (nf + 2.0 - beta0));
            sum += c;
            if c.abs() < 1e-17 * sum.abs() {
                break;
            }
            term *= -x / (nf + 1.0);
        }
        2.0 * t.powf(q) * sum
    } else {
        let a = 1.0 - beta0;
        2.0 * (t * psi.powf(-a) * gamma_li(a, x) - psi.powf(-q) * gamma_li(q, x))
    }
}

/// `C(ψ) = ∫₀ᵗ∫₀ᵗ |r−s|^{-β₀} e^{-(r+s)ψ} dr ds`.
fn cross_time_factor(t: f64, beta0: f64, psi: f64) -> f64 {
    let x = t * psi;
    if x > 40.0 {
        return psi.powf(beta0 - 2.0) * gamma_li(1.0 - beta0, x);
    }
    let f = |u: f64| {
        let damp = if psi == 0.0 {
            2.0 * (t - u)
        } else {
            -(-2.0 * (t - u) * psi).exp_m1() / psi
        };
        u.powf(-beta0) * (-u * psi).exp() * damp
    };
    tanh_sinh(&f, 0.0, t, 1e-300, 1e-13).value
}

/// `E H` by quadrature: `(2π)^{-d} ∫ T(Ψ(ξ)) μ(dξ)` (self) or with the
/// cross factor `C`.
pub fn expected_hamiltonian(process: &LevyProcessSpec, kernel: &CovarianceKernel, beta0: f64, t: f64, mode: Mode) -> Result<f64> {
    check_beta0(beta0)?;
    if !(t >= 0.0) {
        return Err(Error::param("t", "time must be nonnegative"));
    }
    if process.dim() != kernel.dim() {
        return Err(Error::param("kernel", "kernel and process dimensions differ"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if let KernelFamily::ConstantTest { level } = kernel.family() {
        return Ok(level * total_weight(t, beta0));
    }
    let p = *process;
    let alpha = p.alpha();
    let q = match mode {
        Mode::SelfPath => mu_integral(
            kernel,
            &move |r| self_time_factor(t, beta0, p.psi_radial(r)),
            Some(-alpha * (1.0 - beta0)),
        )?,
        Mode::Cross => mu_integral(
            kernel,
            &move |r| cross_time_factor(t, beta0, p.psi_radial(r)),
            Some(alpha * (beta0 - 2.0)),
        )?,
    };
    if !q.converged {
        let noise = crate::model::NoiseSpec::new(beta0, kernel.clone())?;
        let report = check_hypothesis_i(process, &noise)?;
        return Err(Error::Divergence(format!(
            "E H ({mode}) is infinite for {process} with {kernel}, beta0 = {beta0}: hypothesis (I) holds = {}, {}",
            report.holds,
            report
                .criterion
                .unwrap_or_else(|| format!("fitted tail exponent {:.3}", q.tail_exponent))
        )));
    }
    Ok(q.value / (2.0 * PI).powi(kernel.dim() as i32))
}

/// Per-replicate Hamiltonians. Self replicate `r` uses stream `r`; cross
/// replicate `r` pairs streams `2r` and `2r + 1`.
pub fn hamiltonian_samples(
    process: &LevyProcessSpec,
    kernel: &CovarianceKernel,
    beta0: f64,
    grid: &TimeGrid,
    mode: Mode,
    policy: DiagPolicy,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    let ev = HamiltonianEvaluator::new(process, kernel, beta0, grid, policy)?;
    let n = grid.n_steps();
    let d = process.dim();
    if kernel.is_constant() {
        // Path independent; skip sampling.
        let frozen = PathSample::frozen(*grid, d);
        let v = match mode {
            Mode::SelfPath => ev.self_value(&frozen, n).value,
            Mode::Cross => {
                ev.cross_value(&frozen, &frozen, &ev.cross_plan(n, &vec![0.0; d], n, &vec![0.0; d])?)
                    .value
            }
        };
        return Ok(vec![v; mc.replicates]);
    }
    let zero = vec![0.0; d];
    let plan = ev.cross_plan(n, &zero, n, &zero)?;
    try_replicate_values(mc.replicates, |r| {
        let r = r as u64;
        let h = match mode {
            Mode::SelfPath => ev.self_value(&sample_path(process, grid, mc.seed, r), n),
            Mode::Cross => {
                let x = sample_path(process, grid, mc.seed, 2 * r);
                let y = sample_path(process, grid, mc.seed, 2 * r + 1);
                ev.cross_value(&x, &y, &plan)
            }
        };
        Ok(h.value)
    })
}

/// Monte Carlo `E Hⁿ`; `n = 0` gives exactly 1.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian_moment(
    process: &LevyProcessSpec,
    kernel: &CovarianceKernel,
    beta0: f64,
    grid: &TimeGrid,
    n: u32,
    mode: Mode,
    policy: DiagPolicy,
    mc: &McConfig,
) -> Result<MomentEstimate> {
    mc.validate()?;
    if n > 6 && !mc.force {
        return Err(Error::param("n", "moment order above 6 needs force"));
    }
    let values = if n == 0 {
        vec![1.0; mc.replicates]
    } else {
        hamiltonian_samples(process, kernel, beta0, grid, mode, policy, mc)?
            .into_iter()
            .map(|h| h.powi(n as i32))
            .collect()
    };
    let (value, stderr) = mean_stderr(&values);
    Ok(MomentEstimate {
        value,
        stderr,
        replicates: mc.replicates,
        p: n as usize,
        sense: None,
        t: grid.horizon(),
        x: vec![0.0; process.dim()],
        n_steps: grid.n_steps(),
        seed: mc.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_kronrod;
    use proptest::prelude::*;

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    #[test]
    fn weight_examples() {
        let w = cell_weights(&grid(1.0, 10), 0.5).unwrap();
        assert!((w.lag(0) - 2.0 * 0.1f64.powf(1.5) / 0.75).abs() < 1e-15);
        assert!((w.lag(0) - 0.084327).abs() < 1e-6);
        let w0 = cell_weights(&grid(1.0, 10), 0.0).unwrap();
        for k in 0..10 {
            assert!((w0.lag(k) - 0.01).abs() < 1e-15, "lag {k}");
        }
        assert!((cell_weights(&grid(1.0, 64), 0.5).unwrap().total() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_weight_matches_quadrature() {
        // ∫₀ʰ∫₀ʰ |r-s|^{-1/2} = 2∫₀ʰ (h-u) u^{-1/2} du
        let h: f64 = 0.1;
        let q = tanh_sinh(&|u: f64| 2.0 * (h - u) * u.powf(-0.5), 0.0, h, 1e-15, 1e-14).value;
        assert!((cell_weight(h, 0.5, 0) - q).abs() < 1e-12);
    }

    #[test]
    fn off_diagonal_weight_matches_quadrature() {
        let h: f64 = 0.25;
        for (beta0, k) in [(0.3, 1usize), (0.7, 3), (0.5, 8), (0.5, 40)] {
            // lag u = (k + θ - φ) h, density of θ - φ is the triangle on [-1, 1]
            let f = |s: f64| (1.0 - s.abs()) * ((k as f64 + s) * h).abs().powf(-beta0) * h * h;
            let q = gauss_kronrod(&f, -1.0, 0.0, 1e-16, 1e-13, 200).value + gauss_kronrod(&f, 0.0, 1.0, 1e-16, 1e-13, 200).value;
            let w = cell_weight(h, beta0, k);
            assert!((w - q).abs() < 1e-10 * q, "beta0 {beta0} k {k}: {w} vs {q}");
        }
    }

    #[test]
    fn series_and_direct_weights_agree_at_switch() {
        for beta0 in [0.1, 0.5, 0.9] {
            let q = 2.0 - beta0;
            let k = SERIES_LAG as f64;
            let direct = ((k + 1.0).powf(q) - 2.0 * k.powf(q) + (k - 1.0).powf(q)) / ((1.0 - beta0) * q);
            assert!((cell_weight(1.0, beta0, SERIES_LAG) - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(cell_weights(&grid(1.0, 4), 1.0).is_err());
        assert!(cell_weights(&grid(1.0, 4), -0.1).is_err());
    }

    #[test]
    fn constant_kernel_hamiltonian() {
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::constant(1.0, 1).unwrap();
        let g = grid(1.0, 32);
        let x = sample_path(&bm, &g, 1, 0);
        let y = sample_path(&bm, &g, 1, 1);
        let s = hamiltonian(&bm, &x, &x, &k, 0.5, DiagPolicy::Analytic).unwrap();
        let c = hamiltonian(&bm, &x, &y, &k, 0.5, DiagPolicy::Analytic).unwrap();
        assert!((s.value - 8.0 / 3.0).abs() < 1e-12);
        assert!((c.value - 8.0 / 3.0).abs() < 1e-12);
        assert!((s.value - 2.66667).abs() < 1e-5);
    }

    #[test]
    fn frozen_path_with_gaussian_kernel() {
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::ornstein_uhlenbeck(1.0, 2.0, 1).unwrap();
        let x = PathSample::frozen(grid(1.0, 50), 1);
        let h = hamiltonian(&bm, &x, &x, &k, 0.5, DiagPolicy::Analytic).unwrap();
        assert!((h.value - 8.0 / 3.0).abs() < 1e-12);
        assert!(h.finite);
    }

    #[test]
    fn frozen_path_with_riesz_is_flagged() {
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::riesz(0.5, 1).unwrap();
        let x = PathSample::frozen(grid(1.0, 8), 1);
        let a = hamiltonian(&bm, &x, &x, &k, 0.5, DiagPolicy::Analytic).unwrap();
        assert!(!a.finite);
        assert!(a.value.is_infinite());
        let d = hamiltonian(&bm, &x, &x, &k, 0.5, DiagPolicy::Drop).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn drop_and_analytic_differ_only_on_the_diagonal() {
        let p = LevyProcessSpec::stable(1.5, 1).unwrap();
        let k = CovarianceKernel::riesz(0.5, 1).unwrap();
        let g = grid(1.0, 64);
        let x = sample_path(&p, &g, 3, 0);
        let a = hamiltonian(&p, &x, &x, &k, 0.5, DiagPolicy::Analytic).unwrap();
        let d = hamiltonian(&p, &x, &x, &k, 0.5, DiagPolicy::Drop).unwrap();
        let patch = expected_gamma_shifted(&p, &k, g.step(), &[0.0]).unwrap();
        let diag = 64.0 * cell_weight(g.step(), 0.5, 0) * patch;
        assert!((a.value - d.value - diag).abs() < 1e-10 * a.value);
        assert!(a.finite && d.finite);
    }

    #[test]
    fn grid_mismatch() {
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::gaussian(1);
        let x = sample_path(&bm, &grid(1.0, 8), 1, 0);
        let y = sample_path(&bm, &grid(1.0, 16), 1, 1);
        assert_eq!(
            hamiltonian(&bm, &x, &y, &k, 0.0, DiagPolicy::Analytic).unwrap_err(),
            Error::GridMismatch
        );
    }

    #[test]
    fn cross_is_symmetric_in_the_pair() {
        let p = LevyProcessSpec::stable(1.2, 2).unwrap();
        let k = CovarianceKernel::cauchy(1.0, 2).unwrap();
        let g = grid(1.0, 20);
        let x = sample_path(&p, &g, 5, 0);
        let y = sample_path(&p, &g, 5, 1);
        let a = hamiltonian(&p, &x, &y, &k, 0.3, DiagPolicy::Analytic).unwrap().value;
        let b = hamiltonian(&p, &y, &x, &k, 0.3, DiagPolicy::Analytic).unwrap().value;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn expected_hamiltonian_examples() {
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::gaussian(1);
        let s = expected_hamiltonian(&bm, &k, 0.0, 1.0, Mode::SelfPath).unwrap();
        let exact_s = 2.0 * (3f64.sqrt() - 1.0) - 2.0 / 3.0;
        assert!((s - exact_s).abs() < 1e-8, "{s} vs {exact_s}");
        let c = expected_hamiltonian(&bm, &k, 0.0, 1.0, Mode::Cross).unwrap();
        let exact_c = (5f64.powf(1.5) - 2.0 * 3f64.powf(1.5) + 1.0) / 3.0;
        assert!((c - exact_c).abs() < 1e-8, "{c} vs {exact_c}");
        assert_eq!(expected_hamiltonian(&bm, &k, 0.5, 0.0, Mode::SelfPath).unwrap(), 0.0);
    }

    #[test]
    fn expected_hamiltonian_matches_time_quadrature_of_expected_gamma() {
        // E H_self = 2∫₀ᵗ (t-u) u^{-β₀} E γ(X_u) du with E γ(X_u) = (1+2u)^{-1/2}
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::gaussian(1);
        let beta0: f64 = 0.5;
        let f = |u: f64| 2.0 * (1.0 - u) * u.powf(-beta0) / (1.0 + 2.0 * u).sqrt();
        let oracle = tanh_sinh(&f, 0.0, 1.0, 1e-15, 1e-13).value;
        let s = expected_hamiltonian(&bm, &k, beta0, 1.0, Mode::SelfPath).unwrap();
        assert!((s - oracle).abs() < 1e-8 * oracle, "{s} vs {oracle}");
        // cross: E γ(X_r - Y_s) = (1 + 2(r+s))^{-1/2}
        let g = |r: f64| {
            let inner = |s: f64| (r - s).abs().powf(-beta0) / (1.0 + 2.0 * (r + s)).sqrt();
            tanh_sinh(&inner, 0.0, r, 1e-15, 1e-12).value + tanh_sinh(&inner, r, 1.0, 1e-15, 1e-12).value
        };
        let oracle_c = gauss_kronrod(&g, 0.0, 1.0, 1e-12, 1e-10, 200).value;
        let c = expected_hamiltonian(&bm, &k, beta0, 1.0, Mode::Cross).unwrap();
        assert!((c - oracle_c).abs() < 1e-6 * oracle_c, "{c} vs {oracle_c}");
    }

    #[test]
    fn time_factor_branches_agree() {
        for beta0 in [0.0, 0.3, 0.75] {
            for psi in [1.99, 2.0, 2.01] {
                let series = self_time_factor(1.0, beta0, psi - 1e-9);
                let closed = self_time_factor(1.0, beta0, psi + 1e-9);
                assert!((series - closed).abs() < 1e-7 * closed, "beta0 {beta0}: {series} vs {closed}");
            }
            let below = cross_time_factor(1.0, beta0, 40.0 - 1e-9);
            let above = cross_time_factor(1.0, beta0, 40.0 + 1e-9);
            assert!((below - above).abs() < 1e-8 * above);
        }
    }

    #[test]
    fn riesz_expectation_diverges_beyond_hypothesis_one() {
        let p = LevyProcessSpec::stable(1.5, 1).unwrap();
        let ok = CovarianceKernel::riesz(0.6, 1).unwrap();
        assert!(expected_hamiltonian(&p, &ok, 0.5, 1.0, Mode::SelfPath).unwrap().is_finite());
        let bad = CovarianceKernel::riesz(0.9, 1).unwrap();
        assert!(matches!(
            expected_hamiltonian(&p, &bad, 0.5, 1.0, Mode::SelfPath),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn constant_kernel_moments_are_exact() {
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::constant(1.0, 1).unwrap();
        let mc = McConfig::new(16, 1);
        let g = grid(1.0, 16);
        let m2 = hamiltonian_moment(&bm, &k, 0.5, &g, 2, Mode::SelfPath, DiagPolicy::Analytic, &mc).unwrap();
        assert!((m2.value - 64.0 / 9.0).abs() < 1e-12);
        assert_eq!(m2.stderr, 0.0);
        let m0 = hamiltonian_moment(&bm, &k, 0.5, &g, 0, Mode::Cross, DiagPolicy::Analytic, &mc).unwrap();
        assert_eq!(m0.value, 1.0);
        assert!((expected_hamiltonian(&bm, &k, 0.5, 1.0, Mode::Cross).unwrap() - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn first_moment_matches_quadrature() {
        let bm = LevyProcessSpec::brownian(1);
        let k = CovarianceKernel::gaussian(1);
        let mc = McConfig::new(2000, 17);
        let g = grid(1.0, 128);
        for mode in [Mode::SelfPath, Mode::Cross] {
            let m = hamiltonian_moment(&bm, &k, 0.0, &g, 1, mode, DiagPolicy::Analytic, &mc).unwrap();
            let e = expected_hamiltonian(&bm, &k, 0.0, 1.0, mode).unwrap();
            // O(h) left-node bias allowance
            assert!(
                (m.value - e).abs() < 3.0 * m.stderr + 0.02 * e,
                "{mode}: {} ± {} vs {e}",
                m.value,
                m.stderr
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn weights_are_positive_decreasing_and_sum_exactly(beta0 in 0.0f64..0.95, n in 1usize..200, t in 0.1f64..5.0) {
            let w = cell_weights(&grid(t, n), beta0).unwrap();
            for k in 0..n {
                prop_assert!(w.lag(k) > 0.0);
                if k >= 2 {
                    prop_assert!(w.lag(k) <= w.lag(k - 1) * (1.0 + 1e-12));
                }
            }
            let exact = total_weight(t, beta0);
            prop_assert!((w.total() - exact).abs() <= 1e-12 * exact);
        }

        #[test]
        fn hamiltonian_is_nonnegative(seed in 0u64..1000, alpha in 0.5f64..2.0, beta in 0.1f64..0.9) {
            let p = LevyProcessSpec::stable(alpha, 1).unwrap();
            let k = CovarianceKernel::riesz(beta, 1).unwrap();
            let g = grid(1.0, 16);
            let x = sample_path(&p, &g, seed, 0);
            let y = sample_path(&p, &g, seed, 1);
            prop_assert!(hamiltonian(&p, &x, &x, &k, 0.5, DiagPolicy::Drop).unwrap().value >= 0.0);
            prop_assert!(hamiltonian(&p, &x, &y, &k, 0.5, DiagPolicy::Drop).unwrap().value >= 0.0);
        }
    }
}
