//! Chaos contributions `n!‖f_n‖²` to the second moment of the Skorohod
//! solution. With constant initial data `c` they equal `c² E[H_crossⁿ]/n!`,
//! so all terms at one configuration come from a single pool of cross
//! Hamiltonians.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{expected_hamiltonian, hamiltonian_samples, DiagPolicy, Mode};
use crate::mc::{mean_stderr, McConfig};
use crate::model::{InitialCondition, KernelFamily, LevyFamily, LevyProcessSpec, NoiseSpec};
use crate::pathsim::TimeGrid;
use crate::quad::{gauss_kronrod, gauss_legendre, pairwise_sum};
use crate::special::factorial;
use crate::spectral::check_hypothesis_ii;

/// Largest order estimated by Monte Carlo without `force`.
pub const MAX_MC_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChaosMethod {
    McCrossMoment,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosTerm {
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub method: ChaosMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosPartialSum {
    pub terms: Vec<ChaosTerm>,
    /// `Σ_{n≤m} term(n)` for `m = 0..=N`.
    pub partial_sums: Vec<f64>,
    /// Standard errors of the partial sums over the shared replicate pool.
    pub partial_sum_stderrs: Vec<f64>,
    /// `term(N)/term(N−1)`.
    pub tail_diagnostic: Option<f64>,
    /// The ratio is at least 1.
    pub tail_flagged: bool,
}

fn check_order(n: usize, noise: &NoiseSpec, mc: &McConfig) -> Result<()> {
    if n > MAX_MC_ORDER && !mc.force && !noise.kernel().is_constant() {
        return Err(Error::param("n", format!("chaos orders above {MAX_MC_ORDER} need force")));
    }
    Ok(())
}

/// Per-replicate `c² Hⁿ/n!` for `n = 0..=max_n`.
fn pool_terms(max_n: usize, c: f64, process: &LevyProcessSpec, noise: &NoiseSpec, grid: &TimeGrid, mc: &McConfig) -> Result<Vec<Vec<f64>>> {
    let pool = if max_n == 0 {
        vec![0.0; mc.replicates]
    } else {
        hamiltonian_samples(process, noise.kernel(), noise.beta0(), grid, Mode::Cross, DiagPolicy::Analytic, mc)?
    };
    let c2 = c * c;
    Ok(pool
        .par_iter()
        .map(|h| {
            let mut out = Vec::with_capacity(max_n + 1);
            let mut term = c2;
            out.push(term);
            for n in 1..=max_n {
                term *= h / n as f64;
                out.push(term);
            }
            out
        })
        .collect())
}

fn grid_for(t: f64, grid: &TimeGrid) -> Result<()> {
    if (grid.horizon() - t).abs() > 1e-12 * t.max(1.0) {
        return Err(Error::param(
            "grid",
            format!("grid horizon {} differs from t = {t}", grid.horizon()),
        ));
    }
    Ok(())
}

/// Chaos term of order `n` at `(t, x)`. Constant initial data use the
/// cross-moment identity; otherwise the quadrature route (`n ≤ 2`).
#[allow(clippy::too_many_arguments)]
pub fn chaos_term(
    n: usize,
    t: f64,
    x: &[f64],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<ChaosTerm> {
    let Some(c) = u0.as_constant() else {
        return chaos_term_quadrature(n, t, x, u0, process, noise);
    };
    mc.validate()?;
    grid_for(t, grid)?;
    check_order(n, noise, mc)?;
    if n == 0 {
        return Ok(ChaosTerm {
            n,
            value: c * c,
            stderr: 0.0,
            method: ChaosMethod::McCrossMoment,
        });
    }
    let pool = pool_terms(n, c, process, noise, grid, mc)?;
    let column: Vec<f64> = pool.iter().map(|v| v[n]).collect();
    let (value, stderr) = mean_stderr(&column);
    Ok(ChaosTerm {
        n,
        value,
        stderr,
        method: ChaosMethod::McCrossMoment,
    })
}

/// Terms `0..=N` and their running sums; requires hypothesis (II).
#[allow(clippy::too_many_arguments)]
pub fn chaos_partial_sum(
    big_n: usize,
    t: f64,
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    mc: &McConfig,
) -> Result<ChaosPartialSum> {
    mc.validate()?;
    grid_for(t, grid)?;
    let c = u0
        .as_constant()
        .ok_or_else(|| Error::Unsupported("chaos partial sums need a constant initial condition".into()))?;
    if !mc.force {
        let report = check_hypothesis_ii(process, noise)?;
        if !report.holds {
            return Err(Error::HypothesisViolated {
                hypothesis: "II".into(),
                detail: format!(
                    "the chaos series needs it; {}",
                    report.criterion.unwrap_or_else(|| "the spectral integral diverges".into())
                ),
            });
        }
    }
    check_order(big_n, noise, mc)?;
    let pool = pool_terms(big_n, c, process, noise, grid, mc)?;
    let mut terms = Vec::with_capacity(big_n + 1);
    let mut partial_sums = Vec::with_capacity(big_n + 1);
    let mut partial_sum_stderrs = Vec::with_capacity(big_n + 1);
    for m in 0..=big_n {
        let column: Vec<f64> = pool.iter().map(|v| v[m]).collect();
        let (value, stderr) = mean_stderr(&column);
        terms.push(ChaosTerm {
            n: m,
            value,
            stderr,
            method: ChaosMethod::McCrossMoment,
        });
        // replicate-wise partial sums keep the sequence monotone per replicate
        let sums: Vec<f64> = pool.iter().map(|v| pairwise_sum(&v[..=m])).collect();
        let (s, se) = mean_stderr(&sums);
        partial_sums.push(s);
        partial_sum_stderrs.push(se);
    }
    let tail_diagnostic = (big_n >= 1).then(|| terms[big_n].value / terms[big_n - 1].value);
    let tail_flagged = tail_diagnostic.is_some_and(|r| r >= 1.0);
    Ok(ChaosPartialSum {
        terms,
        partial_sums,
        partial_sum_stderrs,
        tail_diagnostic,
        tail_flagged,
    })
}

/// `Q_t u₀(x) = E u₀(x + X_t)`.
pub fn semigroup_value(t: f64, x: &[f64], u0: &InitialCondition, process: &LevyProcessSpec) -> Result<f64> {
    match u0 {
        InitialCondition::Constant { value } => Ok(*value),
        InitialCondition::Tabulated { x0, dx, values } => {
            if !(t > 0.0) {
                return Ok(u0.eval(x));
            }
            // u₀ varies along the first coordinate only, whose marginal is
            // the one-dimensional law with the same exponent.
            let p1 = match process.family() {
                LevyFamily::Brownian => LevyProcessSpec::brownian(1),
                LevyFamily::SymmetricStable { alpha } => LevyProcessSpec::stable(alpha, 1)?,
            };
            let q = |y: f64| p1.transition_density(t, &[y]).unwrap_or(0.0);
            let lo = x0 - x[0];
            let hi = x0 + dx * (values.len() - 1) as f64 - x[0];
            let mass = |a: f64, b: f64| -> f64 {
                // ∫_a^b q, split at 0 where the stable density peaks
                let mut pts = vec![a, b];
                if a < 0.0 && b > 0.0 {
                    pts.insert(1, 0.0);
                }
                pts.windows(2).map(|w| gauss_kronrod(&q, w[0], w[1], 1e-14, 1e-12, 400).value).sum()
            };
            let below = if lo <= 0.0 { 0.5 - mass(lo, 0.0) } else { 0.5 + mass(0.0, lo) };
            let above = if hi >= 0.0 { 0.5 - mass(0.0, hi) } else { 0.5 + mass(hi, 0.0) };
            let mut pts: Vec<f64> = (0..values.len()).map(|i| lo + i as f64 * dx).collect();
            if lo < 0.0 && hi > 0.0 {
                pts.push(0.0);
                pts.sort_by(f64::total_cmp);
            }
            let f = |y: f64| u0.eval(&[x[0] + y]) * q(y);
            let middle: f64 = pts.windows(2).map(|w| gauss_kronrod(&f, w[0], w[1], 1e-14, 1e-12, 400).value).sum();
            Ok(values[0] * below + values[values.len() - 1] * above + middle)
        }
    }
}

/// Independent quadrature route for `n ≤ 2`.
///
/// `n = 0` is `(Q_t u₀(x))²`; `n = 1` is `c² E H_cross`; `n = 2` is
/// `c² E[H_cross²]/2`, available for Gaussian processes with a Gaussian
/// kernel and `β₀ = 0`.
pub fn chaos_term_quadrature(
    n: usize,
    t: f64,
    x: &[f64],
    u0: &InitialCondition,
    process: &LevyProcessSpec,
    noise: &NoiseSpec,
) -> Result<ChaosTerm> {
    let term = |value| {
        Ok(ChaosTerm {
            n,
            value,
            stderr: 0.0,
            method: ChaosMethod::Quadrature,
        })
    };
    if n == 0 {
        let q = semigroup_value(t, x, u0, process)?;
        return term(q * q);
    }
    let c = u0
        .as_constant()
        .ok_or_else(|| Error::Unsupported("chaos terms of order ≥ 1 with non-constant initial data are not implemented".into()))?;
    match n {
        1 => term(c * c * expected_hamiltonian(process, noise.kernel(), noise.beta0(), t, Mode::Cross)?),
        2 => term(c * c * 0.5 * gaussian_second_cross_moment(process, noise, t)?),
        _ => Err(Error::Unsupported("quadrature chaos terms are implemented for n ≤ 2".into())),
    }
}

/// `E[H_cross²]` for a Gaussian process and `γ(z) = e^{-c|z|²}`, `β₀ = 0`:
/// `∫_{[0,t]⁴} det(I + 2cΣ)^{-d/2}` with `Σ` the covariance of
/// `(X_{r₁} − Y_{s₁}, X_{r₂} − Y_{s₂})` per coordinate.
fn gaussian_second_cross_moment(process: &LevyProcessSpec, noise: &NoiseSpec, t: f64) -> Result<f64> {
    let var_rate = process
        .gaussian_variance(1.0)
        .ok_or_else(|| Error::Unsupported("second-order chaos quadrature needs a Gaussian process".into()))?;
    let c = match noise.kernel().family() {
        KernelFamily::OrnsteinUhlenbeck { c, alpha } if *alpha == 2.0 => *c,
        _ => return Err(Error::Unsupported("second-order chaos quadrature needs a Gaussian kernel".into())),
    };
    if noise.beta0() != 0.0 {
        return Err(Error::Unsupported("second-order chaos quadrature needs beta0 = 0".into()));
    }
    let d = process.dim() as f64;
    let integrand = |r1: f64, r2: f64, s1: f64, s2: f64| {
        let a = var_rate * (r1 + s1);
        let b = var_rate * (r2 + s2);
        let m = var_rate * (r1.min(r2) + s1.min(s2));
        let det = (1.0 + 2.0 * c * a) * (1.0 + 2.0 * c * b) - 4.0 * c * c * m * m;
        det.powf(-d / 2.0)
    };
    // Ordered regions r₁ < r₂ and s₁ ≶ s₂ are smooth; the rest follow by symmetry.
    let (xs, ws) = gauss_legendre(20);
    let nodes: Vec<(f64, f64)> = xs.iter().zip(&ws).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    let mut parts = Vec::new();
    for &(u2, wu2) in &nodes {
        let r2 = t * u2;
        for &(u1, wu1) in &nodes {
            let r1 = r2 * u1;
            let jr = t * r2 * wu2 * wu1;
            let mut acc = 0.0;
            for &(v2, wv2) in &nodes {
                let s_hi = t * v2;
                for &(v1, wv1) in &nodes {
                    let s_lo = s_hi * v1;
                    let js = t * s_hi * wv2 * wv1;
                    acc += js * (integrand(r1, r2, s_lo, s_hi) + integrand(r1, r2, s_hi, s_lo));
                }
            }
            parts.push(jr * acc);
        }
    }
    Ok(2.0 * pairwise_sum(&parts))
}

/// `c^n / n!` partial sums, the exact series for a constant Hamiltonian.
pub fn exponential_partial_sums(c: f64, big_n: usize) -> Vec<f64> {
    let mut s = 0.0;
    (0..=big_n)
        .map(|n| {
            s += c.powi(n as i32) / factorial(n);
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::hamiltonian_moment;
    use crate::model::CovarianceKernel;

    const ONE: InitialCondition = InitialCondition::Constant { value: 1.0 };

    fn gauss_noise() -> NoiseSpec {
        NoiseSpec::new(0.0, CovarianceKernel::gaussian(1)).unwrap()
    }

    #[test]
    fn zeroth_term_is_one() {
        let bm = LevyProcessSpec::brownian(1);
        let g = TimeGrid::new(1.0, 8).unwrap();
        let t = chaos_term(0, 1.0, &[0.0], &ONE, &bm, &gauss_noise(), &g, &McConfig::new(4, 1)).unwrap();
        assert_eq!(t.value, 1.0);
        assert_eq!(t.stderr, 0.0);
    }

    #[test]
    fn constant_kernel_terms_and_sums() {
        let bm = LevyProcessSpec::brownian(1);
        let noise = NoiseSpec::new(0.5, CovarianceKernel::constant(1.0, 1).unwrap()).unwrap();
        let g = TimeGrid::new(1.0, 16).unwrap();
        let mc = McConfig::new(4, 1);
        let t2 = chaos_term(2, 1.0, &[0.0], &ONE, &bm, &noise, &g, &mc).unwrap();
        assert!((t2.value - 32.0 / 9.0).abs() < 1e-12);
        let s = chaos_partial_sum(20, 1.0, &ONE, &bm, &noise, &g, &mc).unwrap();
        let last = *s.partial_sums.last().unwrap();
        assert!((last - (8.0f64 / 3.0).exp()).abs() < 1e-3);
        let exact = exponential_partial_sums(8.0 / 3.0, 20);
        for (a, b) in s.partial_sums.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-11 * b);
        }
        assert!(!s.tail_flagged);
    }

    #[test]
    fn partial_sums_are_nondecreasing() {
        let bm = LevyProcessSpec::brownian(1);
        let g = TimeGrid::new(0.5, 32).unwrap();
        let s = chaos_partial_sum(6, 0.5, &ONE, &bm, &gauss_noise(), &g, &McConfig::new(300, 2)).unwrap();
        assert!(s.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(s.terms.iter().all(|t| t.value >= 0.0));
    }

    #[test]
    fn first_term_matches_cross_expectation() {
        let bm = LevyProcessSpec::brownian(1);
        let g = TimeGrid::new(1.0, 128).unwrap();
        let mc = McConfig::new(3000, 5);
        let t1 = chaos_term(1, 1.0, &[0.0], &ONE, &bm, &gauss_noise(), &g, &mc).unwrap();
        let q = chaos_term_quadrature(1, 1.0, &[0.0], &ONE, &bm, &gauss_noise()).unwrap();
        assert!((q.value - (5f64.powf(1.5) - 2.0 * 3f64.powf(1.5) + 1.0) / 3.0).abs() < 1e-8);
        assert!((q.value - 0.59597).abs() < 1e-4);
        assert!(
            (t1.value - q.value).abs() < 3.0 * t1.stderr + 0.01 * q.value,
            "{} ± {} vs {}",
            t1.value,
            t1.stderr,
            q.value
        );
    }

    #[test]
    fn second_term_quadrature_matches_monte_carlo() {
        let bm = LevyProcessSpec::brownian(1);
        let t = 0.5;
        let g = TimeGrid::new(t, 64).unwrap();
        let mc = McConfig::new(4000, 6);
        let q = chaos_term_quadrature(2, t, &[0.0], &ONE, &bm, &gauss_noise()).unwrap();
        let m = chaos_term(2, t, &[0.0], &ONE, &bm, &gauss_noise(), &g, &mc).unwrap();
        assert!(
            (m.value - q.value).abs() < 3.0 * m.stderr + 0.02 * q.value,
            "{} ± {} vs {}",
            m.value,
            m.stderr,
            q.value
        );
    }

    #[test]
    fn second_cross_moment_small_time_limit() {
        // as t → 0, H ≈ t² γ(0) so E H² ≈ t⁴
        let bm = LevyProcessSpec::brownian(1);
        let t: f64 = 1e-3;
        let v = gaussian_second_cross_moment(&bm, &gauss_noise(), t).unwrap();
        assert!((v / t.powi(4) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn semigroup_of_tabulated_data() {
        let bm = LevyProcessSpec::brownian(1);
        // u₀ = 0 left of -1, 1 right of 1, linear in between; mean of a
        // symmetric law sees the midpoint value 1/2 at x = 0
        let u0 = InitialCondition::tabulated(-1.0, 0.5, vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let v = semigroup_value(1.0, &[0.0], &u0, &bm).unwrap();
        assert!((v - 0.5).abs() < 1e-10);
        let p = LevyProcessSpec::stable(0.8, 1).unwrap();
        let v = semigroup_value(0.5, &[0.0], &u0, &p).unwrap();
        assert!((v - 0.5).abs() < 1e-8, "{v}");
        // far right the datum is 1 up to tail mass
        let far = semigroup_value(0.01, &[50.0], &u0, &bm).unwrap();
        assert!((far - 1.0).abs() < 1e-10);
        let q = chaos_term(
            0,
            1.0,
            &[0.0],
            &u0,
            &bm,
            &gauss_noise(),
            &TimeGrid::new(1.0, 4).unwrap(),
            &McConfig::new(4, 1),
        )
        .unwrap();
        assert_eq!(q.method, ChaosMethod::Quadrature);
        assert!((q.value - 0.25).abs() < 1e-9);
    }

    #[test]
    fn non_constant_data_beyond_order_zero_is_unsupported() {
        let bm = LevyProcessSpec::brownian(1);
        let u0 = InitialCondition::tabulated(0.0, 1.0, vec![1.0, 2.0]).unwrap();
        let r = chaos_term(
            1,
            1.0,
            &[0.0],
            &u0,
            &bm,
            &gauss_noise(),
            &TimeGrid::new(1.0, 4).unwrap(),
            &McConfig::new(4, 1),
        );
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn geometric_decay_at_small_time() {
        let bm = LevyProcessSpec::brownian(1);
        let t = 0.25;
        let g = TimeGrid::new(t, 32).unwrap();
        let mc = McConfig::new(2000, 8);
        let s = chaos_partial_sum(6, t, &ONE, &bm, &gauss_noise(), &g, &mc).unwrap();
        let eh = hamiltonian_moment(&bm, gauss_noise().kernel(), 0.0, &g, 1, Mode::Cross, DiagPolicy::Analytic, &mc).unwrap();
        assert!(eh.value < 1.0);
        for n in 2..6 {
            let ratio = s.terms[n + 1].value / s.terms[n].value;
            assert!(ratio <= eh.value * (1.0 + 3.0 * eh.stderr / eh.value), "n = {n}: {ratio}");
        }
    }

    #[test]
    fn hypothesis_two_is_enforced() {
        let p = LevyProcessSpec::stable(1.0, 1).unwrap();
        let noise = NoiseSpec::new(0.25, CovarianceKernel::fractional_product(vec![0.9]).unwrap()).unwrap();
        // (II) is β < α
        assert!(chaos_partial_sum(2, 1.0, &ONE, &p, &noise, &TimeGrid::new(1.0, 4).unwrap(), &McConfig::new(4, 1)).is_ok());
        let q = LevyProcessSpec::stable(0.5, 1).unwrap();
        let r = chaos_partial_sum(2, 1.0, &ONE, &q, &noise, &TimeGrid::new(1.0, 4).unwrap(), &McConfig::new(4, 1));
        assert!(matches!(r, Err(Error::HypothesisViolated { .. })));
    }
}
