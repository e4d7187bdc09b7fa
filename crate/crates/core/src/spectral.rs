//! Integrals against the spectral measure `μ(dξ) = ĝ(ξ) dξ` and the
//! integrability hypotheses built from them.
//!
//! Every integrand used here depends on `ξ` only through `|ξ|`, so integrals
//! reduce to one radial dimension via
//! [`CovarianceKernel::radial_spectral_mass`]. The radial line is cut into
//! `[0, 1]` and dyadic annuli `[2^k, 2^{k+1}]`. Divergence is declared from a
//! log-log fit of the annulus masses over `|ξ| ∈ [2^4, 2^14]`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CovarianceKernel, KernelFamily, LevyProcessSpec, NoiseSpec};
use crate::quad::{gauss_kronrod, pairwise_sum, tanh_sinh};
use crate::special::spherical_plane_wave;

/// Annuli `[2^k, 2^{k+1}]` with `FIT_FIRST <= k < FIT_END` enter the slope fit.
const FIT_FIRST: usize = 4;
const FIT_END: usize = 14;
/// Outermost annulus examined before extrapolating the tail.
const MAX_ANNULUS: usize = 64;
/// Annuli contributing less than this fraction of the running total end the sum.
const NEGLIGIBLE: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuIntegral {
    /// Integral value, `+∞` when divergent.
    pub value: f64,
    pub converged: bool,
    /// Fitted exponent `p` of the radial integrand `~ r^p` over the fit window.
    pub tail_exponent: f64,
}

/// Integrates `f(|ξ|)` against `μ`.
///
/// `tail_order_hint` is the known exponent `q` with `f(r) ~ r^q` at infinity;
/// it is only used to extrapolate slowly converging tails.
pub fn mu_integral(kernel: &CovarianceKernel, integrand: &dyn Fn(f64) -> f64, tail_order_hint: Option<f64>) -> Result<MuIntegral> {
    if kernel.is_constant() {
        return Err(Error::UnsupportedKernel("constant_test has an atomic spectral measure".into()));
    }
    let radial = |r: f64| -> f64 {
        let a = kernel.radial_spectral_mass(r).unwrap_or(f64::NAN);
        if a == 0.0 {
            0.0
        } else {
            integrand(r) * a
        }
    };
    let inner = tanh_sinh(&radial, 0.0, 1.0, 1e-300, 1e-12).value;
    let ln2 = std::f64::consts::LN_2;
    let annulus = |k: usize| -> f64 {
        // r = e^s flattens power laws
        let g = |s: f64| {
            let r = s.exp();
            radial(r) * r
        };
        gauss_kronrod(&g, k as f64 * ln2, (k + 1) as f64 * ln2, 1e-300, 1e-11, 64).value
    };

    let mut masses: Vec<f64> = (0..FIT_END).map(annulus).collect();
    let total_of = |m: &[f64]| inner + pairwise_sum(m);
    let window = &masses[FIT_FIRST..FIT_END];
    let cutoff_in_window = window.iter().any(|m| !(*m > 0.0)) || window[window.len() - 1] < NEGLIGIBLE * total_of(&masses);
    let slope = if cutoff_in_window {
        f64::NEG_INFINITY
    } else {
        log2_slope(window, FIT_FIRST)
    };
    let tail_exponent = slope - 1.0;

    if slope >= 0.0 {
        // Looks divergent over the window; only an exponential cutoff further
        // out can rescue it.
        for k in FIT_END..=MAX_ANNULUS {
            let m = annulus(k);
            masses.push(m);
            if m < NEGLIGIBLE * total_of(&masses) {
                return Ok(MuIntegral {
                    value: total_of(&masses),
                    converged: true,
                    tail_exponent,
                });
            }
        }
        return Ok(MuIntegral {
            value: f64::INFINITY,
            converged: false,
            tail_exponent,
        });
    }

    if !cutoff_in_window {
        for k in FIT_END..=MAX_ANNULUS {
            let m = annulus(k);
            masses.push(m);
            if !(m > 0.0) || m < NEGLIGIBLE * total_of(&masses) {
                return Ok(MuIntegral {
                    value: total_of(&masses),
                    converged: true,
                    tail_exponent,
                });
            }
        }
        // Geometric tail beyond the last annulus.
        let ratio = match (tail_order_hint, kernel.radial_mass_exponent()) {
            (Some(q), Some(s)) => 2f64.powf(q + s + 1.0),
            _ => {
                let n = masses.len();
                2f64.powf(log2_slope(&masses[n - 10..], n - 10))
            }
        };
        if ratio < 1.0 {
            masses.push(masses[masses.len() - 1] * ratio / (1.0 - ratio));
        }
    }
    Ok(MuIntegral {
        value: total_of(&masses),
        converged: true,
        tail_exponent,
    })
}

/// Least-squares slope of `log2 m_k` against `k`.
fn log2_slope(masses: &[f64], first: usize) -> f64 {
    let n = masses.len() as f64;
    let xs: Vec<f64> = (0..masses.len()).map(|i| (first + i) as f64).collect();
    let ys: Vec<f64> = masses.iter().map(|m| m.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    I,
    II,
    S1,
    T1,
    S2,
    T2,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::I => "I",
            Hypothesis::II => "II",
            Hypothesis::S1 => "S1",
            Hypothesis::T1 => "T1",
            Hypothesis::S2 => "S2",
            Hypothesis::T2 => "T2",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub hypothesis: Hypothesis,
    pub holds: bool,
    pub method: Method,
    pub integral_value: Option<f64>,
    pub tail_exponent: Option<f64>,
    /// Supremum of the admissible exponent (closed-form cases).
    pub admissible_exponent: Option<f64>,
    /// Analytic criterion used, e.g. `beta < alpha(1-beta0)`.
    pub criterion: Option<String>,
    /// Verdict of the quadrature alone, when it was run.
    pub quadrature_verdict: Option<bool>,
    /// Closed-form criterion within 0.05 of its threshold.
    pub near_boundary: bool,
}

const BOUNDARY_BAND: f64 = 0.05;

fn check_dims(process: &LevyProcessSpec, noise: &NoiseSpec) -> Result<()> {
    if process.dim() != noise.kernel().dim() {
        return Err(Error::param(
            "dim",
            format!(
                "process dimension {} differs from kernel dimension {}",
                process.dim(),
                noise.kernel().dim()
            ),
        ));
    }
    Ok(())
}

/// Whether the closed-form criteria apply (power-law kernel, stable-type Ψ).
fn power_law(process: &LevyProcessSpec, kernel: &CovarianceKernel) -> Option<(f64, f64)> {
    kernel.homogeneity().map(|b| (process.alpha(), b))
}

/// Integrand, its tail order, and the closed-form data
/// `(quantity compared, threshold, criterion text)` for each hypothesis at
/// the exponent `e` (ignored for I and II).
struct Condition {
    integrand: Box<dyn Fn(f64) -> f64>,
    tail_order: f64,
}

fn condition(process: &LevyProcessSpec, beta0: f64, hyp: Hypothesis, e: f64) -> Condition {
    let p = *process;
    let alpha = p.alpha();
    let s = 1.0 - beta0;
    match hyp {
        Hypothesis::I => Condition {
            integrand: Box::new(move |r| 1.0 / (1.0 + p.psi_radial(r).powf(s))),
            tail_order: -alpha * s,
        },
        Hypothesis::II => Condition {
            integrand: Box::new(move |r| 1.0 / (1.0 + p.psi_radial(r))),
            tail_order: -alpha,
        },
        Hypothesis::S1 => Condition {
            integrand: Box::new(move |r| r.powf(2.0 * e) / (1.0 + p.psi_radial(r).powf(s))),
            tail_order: 2.0 * e - alpha * s,
        },
        Hypothesis::T1 => Condition {
            integrand: Box::new(move |r| {
                let psi = p.psi_radial(r);
                psi.powf(e) / (1.0 + psi.powf(s))
            }),
            tail_order: alpha * e - alpha * s,
        },
        Hypothesis::S2 => Condition {
            integrand: Box::new(move |r| r.powf(2.0 * e) / (1.0 + p.psi_radial(r))),
            tail_order: 2.0 * e - alpha,
        },
        Hypothesis::T2 => Condition {
            integrand: Box::new(move |r| {
                let psi = p.psi_radial(r);
                psi.powf(e) / (1.0 + psi)
            }),
            tail_order: alpha * e - alpha,
        },
    }
}

/// Closed form `(lhs, threshold, text)`: the condition holds iff `lhs < threshold`.
fn closed_form(alpha: f64, beta: f64, beta0: f64, hyp: Hypothesis, e: f64) -> (f64, f64, String) {
    match hyp {
        Hypothesis::I => (beta, alpha * (1.0 - beta0), "beta < alpha(1-beta0)".into()),
        Hypothesis::II => (beta, alpha, "beta < alpha".into()),
        Hypothesis::S1 => (e, 0.5 * (alpha * (1.0 - beta0) - beta), "alpha1 < [alpha(1-beta0)-beta]/2".into()),
        Hypothesis::T1 => (e, (1.0 - beta0) - beta / alpha, "alpha2 < (1-beta0) - beta/alpha".into()),
        Hypothesis::S2 => (e, 0.5 * (alpha - beta), "alpha1 < (alpha-beta)/2".into()),
        Hypothesis::T2 => (e, 1.0 - beta / alpha, "alpha2 < 1 - beta/alpha".into()),
    }
}

/// Checks one hypothesis. `exponent` is the candidate `α₁`/`α₂` for the
/// regularity conditions (S1, T1, S2, T2); it is ignored for I and II.
///
/// The regularity conditions are checked through their sufficient integral
/// forms `∫ |ξ|^{2α₁}/(1+Ψ^{1-β₀}) dμ`, `∫ Ψ^{α₂}/(1+Ψ^{1-β₀}) dμ`,
/// `∫ |ξ|^{2α₁}/(1+Ψ) dμ` and `∫ Ψ^{α₂}/(1+Ψ) dμ`.
pub fn check_hypothesis(process: &LevyProcessSpec, noise: &NoiseSpec, hyp: Hypothesis, exponent: f64) -> Result<HypothesisReport> {
    check_dims(process, noise)?;
    let kernel = noise.kernel();
    let beta0 = noise.beta0();

    if kernel.is_constant() {
        // μ is a point mass of size (2π)^d·level at the origin.
        let level = match kernel.family() {
            KernelFamily::ConstantTest { level } => *level,
            _ => unreachable!(),
        };
        let mass = (2.0 * PI).powi(kernel.dim() as i32) * level;
        let at_origin = match hyp {
            Hypothesis::I | Hypothesis::II => 1.0,
            _ => 0.0,
        };
        return Ok(HypothesisReport {
            hypothesis: hyp,
            holds: true,
            method: Method::ClosedForm,
            integral_value: Some(mass * at_origin),
            tail_exponent: None,
            admissible_exponent: None,
            criterion: Some("spectral measure is a finite point mass".into()),
            quadrature_verdict: None,
            near_boundary: false,
        });
    }

    let cond = condition(process, beta0, hyp, exponent);
    let q = mu_integral(kernel, &*cond.integrand, Some(cond.tail_order))?;
    let mut report = HypothesisReport {
        hypothesis: hyp,
        holds: q.converged,
        method: Method::Quadrature,
        integral_value: q.converged.then_some(q.value),
        tail_exponent: Some(q.tail_exponent),
        admissible_exponent: None,
        criterion: None,
        quadrature_verdict: Some(q.converged),
        near_boundary: false,
    };
    if let Some((alpha, beta)) = power_law(process, kernel) {
        let (lhs, threshold, text) = closed_form(alpha, beta, beta0, hyp, exponent);
        report.method = Method::ClosedForm;
        report.holds = lhs < threshold;
        report.criterion = Some(text);
        report.near_boundary = (lhs - threshold).abs() <= BOUNDARY_BAND;
        report.admissible_exponent = match hyp {
            Hypothesis::I | Hypothesis::II => None,
            _ => Some(threshold),
        };
    }
    Ok(report)
}

/// Hypothesis (I): `∫ (1 + Ψ^{1-β₀})^{-1} dμ < ∞`.
pub fn check_hypothesis_i(process: &LevyProcessSpec, noise: &NoiseSpec) -> Result<HypothesisReport> {
    check_hypothesis(process, noise, Hypothesis::I, 0.0)
}

/// Hypothesis (II): `∫ (1 + Ψ)^{-1} dμ < ∞`.
pub fn check_hypothesis_ii(process: &LevyProcessSpec, noise: &NoiseSpec) -> Result<HypothesisReport> {
    check_hypothesis(process, noise, Hypothesis::II, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Stratonovich,
    Skorohod,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Stratonovich => "stratonovich",
            Sense::Skorohod => "skorohod",
        })
    }
}

impl std::str::FromStr for Sense {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stratonovich" | "strat" => Ok(Sense::Stratonovich),
            "skorohod" | "skor" => Ok(Sense::Skorohod),
            other => Err(Error::Config(format!("unknown sense '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderExponents {
    pub sense: Sense,
    /// Supremum of admissible spatial Hölder exponents.
    pub spatial_sup: f64,
    /// Supremum of admissible temporal Hölder exponents.
    pub temporal_sup: f64,
    pub method: Method,
}

/// Grid step for the quadrature sweep over candidate exponents.
const SWEEP_STEP: f64 = 0.01;

/// Admissible Hölder exponents for the solution.
///
/// Stratonovich: `θ₁ < α₁`, `θ₂ < α₂/2` with (S1), (T1). Skorohod: `θ₁ < α₁`,
/// `θ₂ < [α₂ ∧ (1-β₀)]/2` with (S2), (T2).
pub fn holder_exponents(process: &LevyProcessSpec, noise: &NoiseSpec, sense: Sense) -> Result<HolderExponents> {
    check_dims(process, noise)?;
    let prerequisite = match sense {
        Sense::Stratonovich => check_hypothesis_i(process, noise)?,
        Sense::Skorohod => check_hypothesis_ii(process, noise)?,
    };
    if !prerequisite.holds {
        return Err(Error::HypothesisViolated {
            hypothesis: prerequisite.hypothesis.to_string(),
            detail: format!(
                "Hölder exponents need hypothesis ({}) for {sense} solutions",
                prerequisite.hypothesis
            ),
        });
    }
    let beta0 = noise.beta0();
    let (hs, ht) = match sense {
        Sense::Stratonovich => (Hypothesis::S1, Hypothesis::T1),
        Sense::Skorohod => (Hypothesis::S2, Hypothesis::T2),
    };
    let kernel = noise.kernel();
    let temporal = |a2: f64| match sense {
        Sense::Stratonovich => a2 / 2.0,
        Sense::Skorohod => a2.min(1.0 - beta0) / 2.0,
    };
    if let Some((alpha, beta)) = power_law(process, kernel) {
        let (_, s_thr, _) = closed_form(alpha, beta, beta0, hs, 0.0);
        let (_, t_thr, _) = closed_form(alpha, beta, beta0, ht, 0.0);
        return Ok(HolderExponents {
            sense,
            spatial_sup: s_thr.min(1.0),
            temporal_sup: temporal(t_thr.min(1.0)),
            method: Method::ClosedForm,
        });
    }
    if kernel.is_constant() {
        // The solution does not depend on x; any exponent is admissible.
        return Ok(HolderExponents {
            sense,
            spatial_sup: 1.0,
            temporal_sup: temporal(1.0),
            method: Method::ClosedForm,
        });
    }
    // (T2) asks for α₂ < 1; the others allow α ≤ 1.
    let top_t = if ht == Hypothesis::T2 { 1.0 - SWEEP_STEP } else { 1.0 };
    let s_sup = sweep(process, noise, hs, 1.0)?;
    let t_sup = sweep(process, noise, ht, top_t)?;
    Ok(HolderExponents {
        sense,
        spatial_sup: s_sup,
        temporal_sup: temporal(t_sup),
        method: Method::Quadrature,
    })
}

/// Largest exponent on the grid `SWEEP_STEP, 2·SWEEP_STEP, …, top` for which
/// the condition converges (it is monotone in the exponent). Zero if none.
fn sweep(process: &LevyProcessSpec, noise: &NoiseSpec, hyp: Hypothesis, top: f64) -> Result<f64> {
    let n = (top / SWEEP_STEP).round() as usize;
    let holds = |i: usize| -> Result<bool> {
        let e = i as f64 * SWEEP_STEP;
        let cond = condition(process, noise.beta0(), hyp, e);
        Ok(mu_integral(noise.kernel(), &*cond.integrand, Some(cond.tail_order))?.converged)
    };
    if holds(n)? {
        return Ok(n as f64 * SWEEP_STEP);
    }
    if !holds(1)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (1usize, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo as f64 * SWEEP_STEP)
}

/// `E γ(X_t) = (2π)^{-d} ∫ e^{-tΨ} dμ`.
pub fn expected_gamma(process: &LevyProcessSpec, kernel: &CovarianceKernel, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("expected_gamma needs t > 0 (got {t})")));
    }
    if let crate::model::KernelFamily::ConstantTest { level } = kernel.family() {
        return Ok(*level);
    }
    let p = *process;
    let q = mu_integral(kernel, &move |r| (-t * p.psi_radial(r)).exp(), None)?;
    if !q.converged {
        return Err(Error::Divergence(format!(
            "∫ e^{{-tΨ}} dμ diverges for {kernel} at t = {t} (fitted tail exponent {:.3})",
            q.tail_exponent
        )));
    }
    Ok(q.value / (2.0 * PI).powi(kernel.dim() as i32))
}

/// `E γ(X_t + a)`.
///
/// One dimension: computed in x-space as `∫ γ(y + a) q_t(y) dy`. Radial
/// kernels in d = 2, 3: `(2π)^{-d} ∫ e^{-tΨ} cos(ξ·a) dμ` reduced radially.
/// Product kernels in d > 1 factorize only for Gaussian processes.
pub fn expected_gamma_shifted(process: &LevyProcessSpec, kernel: &CovarianceKernel, t: f64, a: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("expected_gamma needs t > 0 (got {t})")));
    }
    let d = kernel.dim();
    if a.len() != d || process.dim() != d {
        return Err(Error::param("a", "shift, process and kernel must share the dimension"));
    }
    if let KernelFamily::ConstantTest { level } = kernel.family() {
        return Ok(*level);
    }
    let norm_a = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_a == 0.0 {
        return expected_gamma(process, kernel, t);
    }
    if d == 1 {
        return Ok(shifted_1d(process, t, a[0], &|x| kernel.eval_1d(x)));
    }
    match kernel.family() {
        KernelFamily::FractionalProduct { betas } => {
            let var = process
                .gaussian_variance(t)
                .ok_or_else(|| Error::Unsupported("shifted product-kernel expectations need a Gaussian process when d > 1".into()))?;
            let mut prod = 1.0;
            for (b, ai) in betas.iter().zip(a) {
                prod *= gaussian_shifted_1d(var, *ai, &|x: f64| x.abs().powf(-b));
            }
            Ok(prod)
        }
        KernelFamily::Cauchy { c } => {
            let var = process
                .gaussian_variance(t)
                .ok_or_else(|| Error::Unsupported("shifted product-kernel expectations need a Gaussian process when d > 1".into()))?;
            let mut prod = 1.0;
            for ai in a {
                prod *= gaussian_shifted_1d(var, *ai, &|x: f64| 1.0 / (x * x + c));
            }
            Ok(prod)
        }
        _ => {
            if d > 3 {
                return Err(Error::Unsupported("shifted expectations need d <= 3".into()));
            }
            let p = *process;
            let area = crate::special::unit_sphere_area(d);
            let f = move |r: f64| (-t * p.psi_radial(r)).exp() * spherical_plane_wave(d, r * norm_a) / area;
            let r_max = (45.0 / (t * p.scale())).powf(1.0 / p.alpha());
            let radial = |r: f64| {
                let m = kernel.radial_spectral_mass(r).unwrap_or(0.0);
                if m == 0.0 {
                    0.0
                } else {
                    f(r) * m
                }
            };
            let width = (PI / norm_a).max(r_max / 4000.0);
            let mut total = tanh_sinh(&radial, 0.0, width.min(r_max), 1e-300, 1e-12).value;
            let mut lo = width;
            let mut parts = Vec::new();
            while lo < r_max {
                let hi = (lo + width).min(r_max);
                parts.push(gauss_kronrod(&radial, lo, hi, 1e-300, 1e-11, 40).value);
                lo = hi;
            }
            total += pairwise_sum(&parts);
            Ok(total / (2.0 * PI).powi(d as i32))
        }
    }
}

/// `∫ g(y + a) q_t(y) dy` in one dimension, split at the singular point
/// `y = -a`, the density peak `y = 0`, and a few scales around both.
fn shifted_1d(process: &LevyProcessSpec, t: f64, a: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let q = |y: f64| process.transition_density(t, &[y]).unwrap_or(0.0);
    let f = |y: f64| {
        let v = g(y + a);
        if v.is_finite() {
            v * q(y)
        } else {
            0.0
        }
    };
    let scale = (process.scale() * t).powf(1.0 / process.alpha());
    let reach = 40.0 * scale + 2.0 * a.abs();
    let mut points = vec![-reach, reach, 0.0, -a];
    for k in [0.25, 1.0, 4.0] {
        points.extend([-a - k * scale, -a + k * scale, -k * scale, k * scale]);
    }
    points.retain(|p| p.abs() <= reach);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut parts = Vec::new();
    for w in points.windows(2) {
        // tanh-sinh copes with the integrable singularity at either end
        parts.push(tanh_sinh(&f, w[0], w[1], 1e-300, 1e-11).value);
    }
    // Tails beyond ±reach: y = reach/s maps to s ∈ (0, 1].
    let right = |s: f64| f(reach / s) * reach / (s * s);
    let left = |s: f64| f(-reach / s) * reach / (s * s);
    parts.push(tanh_sinh(&right, 0.0, 1.0, 1e-300, 1e-10).value);
    parts.push(tanh_sinh(&left, 0.0, 1.0, 1e-300, 1e-10).value);
    pairwise_sum(&parts)
}

/// `E g(Z + a)` for `Z ~ N(0, var)`.
fn gaussian_shifted_1d(var: f64, a: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let bm = LevyProcessSpec::brownian(1);
    // Brownian motion at time var has variance var.
    shifted_1d(&bm, var, a, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CovarianceKernel as K;

    fn stable(alpha: f64, d: usize) -> LevyProcessSpec {
        LevyProcessSpec::stable(alpha, d).unwrap()
    }

    #[test]
    fn mu_total_mass_ou_kernel() {
        // (2π)^{-1} μ(R) = γ(0) = 1, so μ(R) = 2π
        let k = K::ornstein_uhlenbeck(1.0, 1.0, 1).unwrap();
        let m = mu_integral(&k, &|_| 1.0, None).unwrap();
        assert!(m.converged);
        assert!((m.value - 2.0 * PI).abs() < 1e-8, "{m:?}");
    }

    #[test]
    fn mu_riesz_total_mass_diverges() {
        let k = K::riesz(0.5, 1).unwrap();
        let m = mu_integral(&k, &|_| 1.0, None).unwrap();
        assert!(!m.converged);
        assert!((m.tail_exponent + 0.5).abs() < 1e-6);
    }

    #[test]
    fn mu_riesz_against_resolvent() {
        let k = K::riesz(0.5, 1).unwrap();
        let m = mu_integral(&k, &|r| 1.0 / (1.0 + r * r), Some(-2.0)).unwrap();
        assert!(m.converged);
        assert!((m.tail_exponent + 2.5).abs() < 1e-3);
        // oracle: 2 √(2π) ∫_0^∞ r^{-1/2} / (1 + r²) dr = 2 √(2π) π/√2
        let oracle = 2.0 * (2.0 * PI).sqrt() * PI / 2f64.sqrt();
        assert!((m.value - oracle).abs() < 1e-8 * oracle, "{} vs {oracle}", m.value);
    }

    #[test]
    fn mu_constant_kernel_is_unsupported() {
        let k = K::constant(1.0, 1).unwrap();
        assert!(matches!(mu_integral(&k, &|_| 1.0, None), Err(Error::UnsupportedKernel(_))));
    }

    #[test]
    fn hypothesis_examples() {
        let n = NoiseSpec::new(0.25, K::riesz(0.5, 1).unwrap()).unwrap();
        let r = check_hypothesis_i(&stable(1.5, 1), &n).unwrap();
        assert!(r.holds && r.method == Method::ClosedForm);
        assert_eq!(r.quadrature_verdict, Some(true));

        let n = NoiseSpec::new(0.5, K::riesz(1.0, 2).unwrap()).unwrap();
        let r = check_hypothesis_i(&stable(2.0, 2), &n).unwrap();
        assert!(!r.holds && r.near_boundary);

        for b0 in [0.0, 0.5, 0.9] {
            let n = NoiseSpec::new(b0, K::ornstein_uhlenbeck(1.0, 1.0, 1).unwrap()).unwrap();
            let r = check_hypothesis_i(&LevyProcessSpec::brownian(1), &n).unwrap();
            assert!(r.holds && r.method == Method::Quadrature);
        }

        let n = NoiseSpec::new(0.5, K::riesz(1.4, 2).unwrap()).unwrap();
        assert!(check_hypothesis_ii(&stable(1.5, 2), &n).unwrap().holds);
        let n = NoiseSpec::new(0.5, K::riesz(1.6, 2).unwrap()).unwrap();
        let r = check_hypothesis_ii(&stable(1.5, 2), &n).unwrap();
        assert!(!r.holds);
        assert_eq!(r.quadrature_verdict, Some(false));

        let n = NoiseSpec::new(0.5, K::cauchy(1.0, 1).unwrap()).unwrap();
        assert!(check_hypothesis_ii(&LevyProcessSpec::brownian(1), &n).unwrap().holds);
    }

    #[test]
    fn fractional_product_quadrature_matches_closed_form() {
        let n = NoiseSpec::new(0.25, K::fractional_product(vec![0.3, 0.4]).unwrap()).unwrap();
        let r = check_hypothesis_i(&stable(1.5, 2), &n).unwrap();
        assert!(r.holds);
        assert_eq!(r.quadrature_verdict, Some(true));
        let n = NoiseSpec::new(0.5, K::fractional_product(vec![0.5, 0.6]).unwrap()).unwrap();
        let r = check_hypothesis_i(&stable(1.5, 2), &n).unwrap();
        assert!(!r.holds);
        assert_eq!(r.quadrature_verdict, Some(false));
    }

    #[test]
    fn holder_examples() {
        let n = NoiseSpec::new(0.5, K::riesz(0.5, 1).unwrap()).unwrap();
        let h = holder_exponents(&stable(2.0, 1), &n, Sense::Stratonovich).unwrap();
        assert!((h.spatial_sup - 0.25).abs() < 1e-14);
        let h = holder_exponents(&stable(2.0, 1), &n, Sense::Skorohod).unwrap();
        assert!((h.spatial_sup - 0.75).abs() < 1e-14);
        assert!((h.temporal_sup - 0.25).abs() < 1e-14);

        let n = NoiseSpec::new(0.5, K::riesz(1.5, 2).unwrap()).unwrap();
        let e = holder_exponents(&stable(2.0, 2), &n, Sense::Stratonovich).unwrap_err();
        assert!(matches!(e, Error::HypothesisViolated { .. }));
    }

    #[test]
    fn stratonovich_spatial_sup_below_one_minus_beta0() {
        for &b0 in &[0.1, 0.4, 0.7] {
            for &beta in &[0.05, 0.3] {
                let n = NoiseSpec::new(b0, K::riesz(beta, 1).unwrap()).unwrap();
                for &alpha in &[0.8, 1.5, 2.0] {
                    if let Ok(h) = holder_exponents(&stable(alpha, 1), &n, Sense::Stratonovich) {
                        assert!(h.spatial_sup < 1.0 - b0);
                    }
                }
            }
        }
    }

    #[test]
    fn holder_sweep_recovers_closed_form() {
        // The sweep is only used for non-power-law kernels, but on a power
        // law it must land one grid step below the closed-form threshold.
        let n = NoiseSpec::new(0.5, K::riesz(0.5, 1).unwrap()).unwrap();
        let p = stable(2.0, 1);
        let s = sweep(&p, &n, Hypothesis::S2, 1.0).unwrap();
        assert!((s - 0.75).abs() <= 0.0201, "{s}");
        let t = sweep(&p, &n, Hypothesis::T1, 1.0).unwrap();
        assert!((t - 0.25).abs() <= 0.0201, "{t}");
    }

    #[test]
    fn holder_sweep_for_finite_measure() {
        let n = NoiseSpec::new(0.5, K::gaussian(1)).unwrap();
        let h = holder_exponents(&LevyProcessSpec::brownian(1), &n, Sense::Skorohod).unwrap();
        assert_eq!(h.method, Method::Quadrature);
        assert!((h.spatial_sup - 1.0).abs() < 1e-12);
        assert!((h.temporal_sup - 0.25).abs() < 1e-12);
    }

    #[test]
    fn expected_gamma_gaussian_closed_form() {
        let v = expected_gamma(&LevyProcessSpec::brownian(1), &K::gaussian(1), 1.0).unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn expected_gamma_riesz_matches_x_space() {
        // E|X_t|^{-β} for X_t ~ N(0, t): 2^{-β/2} t^{-β/2} Γ((1-β)/2)/Γ(1/2)
        let t: f64 = 0.3;
        let b: f64 = 0.5;
        let oracle = 2f64.powf(-b / 2.0) * t.powf(-b / 2.0) * crate::special::gamma((1.0 - b) / 2.0) / PI.sqrt();
        let v = expected_gamma(&LevyProcessSpec::brownian(1), &K::riesz(b, 1).unwrap(), t).unwrap();
        assert!((v - oracle).abs() < 1e-8 * oracle, "{v} vs {oracle}");
    }

    #[test]
    fn shifted_expectation_agrees_between_routes() {
        let bm = LevyProcessSpec::brownian(1);
        let k = K::gaussian(1);
        // E e^{-(Z+a)²}, Z ~ N(0,t): (1+2t)^{-1/2} e^{-a²/(1+2t)}
        for &(t, a) in &[(1.0, 0.5), (0.2, 1.0)] {
            let v = expected_gamma_shifted(&bm, &k, t, &[a]).unwrap();
            let oracle: f64 = (1.0 + 2.0 * t).powf(-0.5) * (-a * a / (1.0 + 2.0 * t)).exp();
            assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
        }
        // x-space route at a → 0 against the Fourier route at a = 0
        let p = stable(1.5, 1);
        let k = K::riesz(0.4, 1).unwrap();
        let f = expected_gamma(&p, &k, 0.5).unwrap();
        let x = shifted_1d(&p, 0.5, 0.0, &|y| k.eval_1d(y));
        assert!((f - x).abs() < 1e-7 * f, "{f} vs {x}");
        // radial Fourier route in d = 2 against the Gaussian closed form
        let bm2 = LevyProcessSpec::brownian(2);
        let v = expected_gamma_shifted(&bm2, &K::gaussian(2), 0.5, &[0.6, 0.0]).unwrap();
        let oracle = (1.0f64 + 1.0).powf(-1.0) * (-0.36f64 / 2.0).exp();
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn shifted_expectation_never_exceeds_centered() {
        let p = stable(1.5, 1);
        for k in [K::riesz(0.5, 1).unwrap(), K::cauchy(1.0, 1).unwrap()] {
            let c = expected_gamma(&p, &k, 0.4).unwrap();
            for a in [0.25, 0.5, 1.0, 3.0] {
                assert!(expected_gamma_shifted(&p, &k, 0.4, &[a]).unwrap() <= c * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn expected_gamma_decays_in_time() {
        let k = K::cauchy(1.0, 1).unwrap();
        let bm = LevyProcessSpec::brownian(1);
        let mut prev = f64::INFINITY;
        for t in [0.1, 1.0, 10.0, 100.0, 1000.0] {
            let v = expected_gamma(&bm, &k, t).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.1);
    }
}
