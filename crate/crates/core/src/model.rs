//! Covariance kernels, symmetric Lévy processes, noise and initial data.
//!
//! Fourier convention: `f̂(ξ) = ∫ e^{-iξ·x} f(x) dx`, so the spectral
//! density `ĝ` of a kernel `γ` satisfies `∫ γ φ = (2π)^{-d} ∫ φ̂ ĝ`.
//!
//! Spectral constants (all analytic, checked against the Parseval identity
//! in the tests below):
//!
//! | kernel                    | `ĝ(ξ)`                                                       |
//! |---------------------------|--------------------------------------------------------------|
//! | `|x|^{-β}`                | `π^{d/2} 2^{d-β} Γ((d-β)/2)/Γ(β/2) · |ξ|^{β-d}`             |
//! | `∏ |x_j|^{-β_j}`          | `∏ √π 2^{1-β_j} Γ((1-β_j)/2)/Γ(β_j/2) · |ξ_j|^{β_j-1}`       |
//! | `∏ (x_j² + c)^{-1}`       | `∏ (π/√c) e^{-√c |ξ_j|}`                                     |
//! | `(|x|² + c)^{-(d+1)/2}`   | `π^{(d+1)/2} / (Γ((d+1)/2) √c) · e^{-√c |ξ|}`                |
//! | `e^{-c|x|^a}`             | `(2π)^d p_{a,c}(ξ)`, `p` the density with exponent `c|·|^a`  |
//!
//! Every process in scope has `Ψ(ξ) = κ|ξ|^α`: Brownian motion is `κ = 1/2,
//! α = 2` and the isotropic stable process is `κ = 1`. Note that stable with
//! `α = 2` is Brownian motion run at twice the speed.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod, tanh_sinh};
use crate::special::{gamma, ln_gamma, riesz_constant, sphere_monomial_integral, spherical_plane_wave, unit_sphere_area};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    Riesz { beta: f64 },
    FractionalProduct { betas: Vec<f64> },
    Cauchy { c: f64 },
    Poisson { c: f64 },
    OrnsteinUhlenbeck { c: f64, alpha: f64 },
    ConstantTest { level: f64 },
}

/// Spatial covariance `γ` of the noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceKernel {
    family: KernelFamily,
    dim: usize,
}

impl CovarianceKernel {
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be positive"));
        }
        match &family {
            KernelFamily::Riesz { beta } => {
                if !(*beta > 0.0 && *beta < dim as f64) {
                    return Err(Error::param("beta", format!("riesz requires 0 < beta < d = {dim}")));
                }
            }
            KernelFamily::FractionalProduct { betas } => {
                if betas.len() != dim {
                    return Err(Error::param("betas", format!("need one exponent per coordinate (d = {dim})")));
                }
                if betas.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
                    return Err(Error::param("betas", "fractional_product requires each beta_j in (0,1)"));
                }
            }
            KernelFamily::Cauchy { c } | KernelFamily::Poisson { c } => {
                if !(*c > 0.0) {
                    return Err(Error::param("c", "c must be positive"));
                }
            }
            KernelFamily::OrnsteinUhlenbeck { c, alpha } => {
                if !(*c > 0.0) {
                    return Err(Error::param("c", "c must be positive"));
                }
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return Err(Error::param("alpha", "ornstein_uhlenbeck requires alpha in (0,2]"));
                }
            }
            KernelFamily::ConstantTest { level } => {
                if !(*level > 0.0) {
                    return Err(Error::param("level", "constant_test requires level > 0"));
                }
            }
        }
        Ok(CovarianceKernel { family, dim })
    }

    pub fn riesz(beta: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Riesz { beta }, dim)
    }

    pub fn fractional_product(betas: Vec<f64>) -> Result<Self> {
        let d = betas.len();
        Self::new(KernelFamily::FractionalProduct { betas }, d)
    }

    pub fn cauchy(c: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Cauchy { c }, dim)
    }

    pub fn poisson(c: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Poisson { c }, dim)
    }

    pub fn ornstein_uhlenbeck(c: f64, alpha: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::OrnsteinUhlenbeck { c, alpha }, dim)
    }

    /// `e^{-|x|^2}`, the OU kernel with `c = 1, α = 2`.
    pub fn gaussian(dim: usize) -> Self {
        Self::ornstein_uhlenbeck(1.0, 2.0, dim).expect("valid parameters")
    }

    pub fn constant(level: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::ConstantTest { level }, dim)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when `γ` is infinite somewhere (origin or coordinate hyperplanes).
    pub fn has_singular_set(&self) -> bool {
        matches!(self.family, KernelFamily::Riesz { .. } | KernelFamily::FractionalProduct { .. })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, KernelFamily::ConstantTest { .. })
    }

    /// True when the spectral measure has finite total mass (`γ(0) < ∞`).
    pub fn has_finite_spectral_mass(&self) -> bool {
        matches!(
            self.family,
            KernelFamily::Cauchy { .. } | KernelFamily::Poisson { .. } | KernelFamily::OrnsteinUhlenbeck { .. }
        )
    }

    /// Sum of the homogeneity exponents for the power-law families
    /// (`β` for Riesz, `Σ β_j` for the fractional product).
    pub fn homogeneity(&self) -> Option<f64> {
        match &self.family {
            KernelFamily::Riesz { beta } => Some(*beta),
            KernelFamily::FractionalProduct { betas } => Some(betas.iter().sum()),
            _ => None,
        }
    }

    /// `γ(x)`, `+∞` on the singular set.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.family {
            KernelFamily::Riesz { beta } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    f64::INFINITY
                } else {
                    r2.powf(-0.5 * beta)
                }
            }
            KernelFamily::FractionalProduct { betas } => {
                let mut p = 1.0;
                for (xi, b) in x.iter().zip(betas) {
                    let a = xi.abs();
                    if a == 0.0 {
                        return f64::INFINITY;
                    }
                    p *= a.powf(-b);
                }
                p
            }
            KernelFamily::Cauchy { c } => x.iter().map(|v| 1.0 / (v * v + c)).product(),
            KernelFamily::Poisson { c } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (r2 + c).powf(-0.5 * (self.dim as f64 + 1.0))
            }
            KernelFamily::OrnsteinUhlenbeck { c, alpha } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if *alpha == 2.0 {
                    (-c * r2).exp()
                } else {
                    (-c * r2.powf(0.5 * alpha)).exp()
                }
            }
            KernelFamily::ConstantTest { level } => *level,
        }
    }

    /// One-dimensional fast path used in the Hamiltonian inner loops.
    #[inline]
    pub fn eval_1d(&self, x: f64) -> f64 {
        match &self.family {
            KernelFamily::Riesz { beta } => {
                let a = x.abs();
                if a == 0.0 {
                    f64::INFINITY
                } else {
                    a.powf(-beta)
                }
            }
            KernelFamily::FractionalProduct { betas } => {
                let a = x.abs();
                if a == 0.0 {
                    f64::INFINITY
                } else {
                    a.powf(-betas[0])
                }
            }
            KernelFamily::Cauchy { c } => 1.0 / (x * x + c),
            KernelFamily::Poisson { c } => 1.0 / (x * x + c),
            KernelFamily::OrnsteinUhlenbeck { c, alpha } => {
                if *alpha == 2.0 {
                    (-c * x * x).exp()
                } else {
                    (-c * x.abs().powf(*alpha)).exp()
                }
            }
            KernelFamily::ConstantTest { level } => *level,
        }
    }

    /// Spectral density `ĝ(ξ)`; the constant kernel has an atomic spectral
    /// measure and is rejected.
    pub fn spectral_density(&self, xi: &[f64]) -> Result<f64> {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let df = self.dim as f64;
        Ok(match &self.family {
            KernelFamily::Riesz { beta } => riesz_constant(self.dim, *beta) * r.powf(beta - df),
            KernelFamily::FractionalProduct { betas } => xi
                .iter()
                .zip(betas)
                .map(|(x, b)| riesz_constant(1, *b) * x.abs().powf(b - 1.0))
                .product(),
            KernelFamily::Cauchy { c } => {
                let sc = c.sqrt();
                xi.iter().map(|x| PI / sc * (-sc * x.abs()).exp()).product()
            }
            KernelFamily::Poisson { c } => {
                let sc = c.sqrt();
                poisson_constant(self.dim) / sc * (-sc * r).exp()
            }
            KernelFamily::OrnsteinUhlenbeck { c, alpha } => (2.0 * PI).powf(df) * stable_density_radial(*alpha, *c, r, self.dim)?,
            KernelFamily::ConstantTest { .. } => {
                return Err(Error::UnsupportedKernel("constant_test has an atomic spectral measure".into()))
            }
        })
    }

    /// `r^{d-1} ∫_{S^{d-1}} ĝ(rω) dω`, the radial density of `μ`.
    ///
    /// `∫ f(|ξ|) μ(dξ) = ∫_0^∞ f(r) radial_spectral_mass(r) dr`.
    pub fn radial_spectral_mass(&self, r: f64) -> Result<f64> {
        let d = self.dim;
        let df = d as f64;
        if r == 0.0 {
            return Ok(match &self.family {
                KernelFamily::Riesz { beta } if *beta < 1.0 && d == 1 => f64::INFINITY,
                KernelFamily::FractionalProduct { betas } if betas.iter().sum::<f64>() < 1.0 => f64::INFINITY,
                _ if d == 1 => 2.0 * self.spectral_density(&[0.0])?,
                _ => 0.0,
            });
        }
        match &self.family {
            KernelFamily::Riesz { .. } | KernelFamily::Poisson { .. } | KernelFamily::OrnsteinUhlenbeck { .. } => {
                let mut xi = vec![0.0; d];
                xi[0] = r;
                Ok(unit_sphere_area(d) * r.powf(df - 1.0) * self.spectral_density(&xi)?)
            }
            KernelFamily::FractionalProduct { betas } => {
                let beta: f64 = betas.iter().sum();
                let c: f64 = betas.iter().map(|b| riesz_constant(1, *b)).product();
                Ok(c * sphere_monomial_integral(betas) * r.powf(beta - 1.0))
            }
            KernelFamily::Cauchy { c } => {
                let sc = c.sqrt();
                let amp = (PI / sc).powi(d as i32);
                match d {
                    1 => Ok(2.0 * amp * (-sc * r).exp()),
                    2 => {
                        // 4 quadrants, each ∫_0^{π/2} e^{-√c r (cos θ + sin θ)} dθ
                        let f = |th: f64| (-sc * r * (th.cos() + th.sin())).exp();
                        let q = gauss_kronrod(&f, 0.0, PI / 2.0, 1e-300, 1e-12, 200);
                        Ok(4.0 * amp * r * q.value)
                    }
                    3 => {
                        // positive octant in spherical coordinates, times 8
                        let outer = |th: f64| {
                            let st = th.sin();
                            let ct = th.cos();
                            let inner = |ph: f64| (-sc * r * (st * ph.cos() + st * ph.sin() + ct)).exp();
                            st * gauss_kronrod(&inner, 0.0, PI / 2.0, 1e-300, 1e-11, 100).value
                        };
                        let q = gauss_kronrod(&outer, 0.0, PI / 2.0, 1e-300, 1e-10, 100);
                        Ok(8.0 * amp * r * r * q.value)
                    }
                    _ => Err(Error::Unsupported("cauchy spectral mass for d > 3".into())),
                }
            }
            KernelFamily::ConstantTest { .. } => Err(Error::UnsupportedKernel("constant_test has an atomic spectral measure".into())),
        }
    }

    /// Asymptotic exponent `s` of `radial_spectral_mass(r) ~ r^s`, when the
    /// kernel is a power law.
    pub fn radial_mass_exponent(&self) -> Option<f64> {
        self.homogeneity().map(|b| b - 1.0)
    }
}

fn poisson_constant(d: usize) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    PI.powf(h) / gamma(h)
}

impl fmt::Display for CovarianceKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::Riesz { beta } => write!(f, "riesz:beta={beta}"),
            KernelFamily::FractionalProduct { betas } => {
                write!(f, "fractional:")?;
                for (i, b) in betas.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "beta{}={b}", i + 1)?;
                }
                Ok(())
            }
            KernelFamily::Cauchy { c } => write!(f, "cauchy:c={c}"),
            KernelFamily::Poisson { c } => write!(f, "poisson:c={c}"),
            KernelFamily::OrnsteinUhlenbeck { c, alpha } => write!(f, "ou:c={c},alpha={alpha}"),
            KernelFamily::ConstantTest { level } => write!(f, "constant:level={level}"),
        }
    }
}

/// Splits `family:key=value,key=value` into its family name and pairs.
fn split_spec(spec: &str) -> Result<(String, Vec<(String, f64)>)> {
    let spec = spec.trim();
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, r),
        None => (spec, ""),
    };
    let mut params = Vec::new();
    for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in '{item}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("'{}' is not a number", v.trim())))?;
        params.push((k.trim().to_ascii_lowercase(), v));
    }
    Ok((name.trim().to_ascii_lowercase(), params))
}

fn take(params: &[(String, f64)], key: &str) -> Option<f64> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

fn require(params: &[(String, f64)], key: &str, family: &str) -> Result<f64> {
    take(params, key).ok_or_else(|| Error::Config(format!("{family} needs parameter '{key}'")))
}

fn reject_unknown(params: &[(String, f64)], allowed: &[&str], family: &str) -> Result<()> {
    for (k, _) in params {
        let ok = allowed.iter().any(|a| {
            if let Some(prefix) = a.strip_suffix('*') {
                k.starts_with(prefix)
            } else {
                a == k
            }
        });
        if !ok {
            return Err(Error::Config(format!("unknown parameter '{k}' for {family}")));
        }
    }
    Ok(())
}

/// Parses a kernel spec such as `riesz:beta=0.5` or `ou:c=1,alpha=2`.
pub fn parse_kernel(spec: &str, dim: usize) -> Result<CovarianceKernel> {
    let (name, p) = split_spec(spec)?;
    let family = match name.as_str() {
        "riesz" => {
            reject_unknown(&p, &["beta"], "riesz")?;
            KernelFamily::Riesz {
                beta: require(&p, "beta", "riesz")?,
            }
        }
        "fractional" | "fractional_product" => {
            reject_unknown(&p, &["beta", "beta*"], "fractional")?;
            let betas = if let Some(b) = take(&p, "beta") {
                vec![b; dim]
            } else {
                (1..=dim)
                    .map(|j| require(&p, &format!("beta{j}"), "fractional"))
                    .collect::<Result<Vec<_>>>()?
            };
            KernelFamily::FractionalProduct { betas }
        }
        "cauchy" => {
            reject_unknown(&p, &["c"], "cauchy")?;
            KernelFamily::Cauchy {
                c: take(&p, "c").unwrap_or(1.0),
            }
        }
        "poisson" => {
            reject_unknown(&p, &["c"], "poisson")?;
            KernelFamily::Poisson {
                c: take(&p, "c").unwrap_or(1.0),
            }
        }
        "ou" | "ornstein_uhlenbeck" | "gaussian" => {
            reject_unknown(&p, &["c", "alpha"], "ou")?;
            let default_alpha = if name == "gaussian" { 2.0 } else { 1.0 };
            KernelFamily::OrnsteinUhlenbeck {
                c: take(&p, "c").unwrap_or(1.0),
                alpha: take(&p, "alpha").unwrap_or(default_alpha),
            }
        }
        "constant" | "constant_test" => {
            reject_unknown(&p, &["level"], "constant")?;
            KernelFamily::ConstantTest {
                level: take(&p, "level").unwrap_or(1.0),
            }
        }
        other => return Err(Error::Config(format!("unknown kernel family '{other}'"))),
    };
    CovarianceKernel::new(family, dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LevyFamily {
    Brownian,
    SymmetricStable { alpha: f64 },
}

/// Symmetric (isotropic) Lévy process with exponent `Ψ(ξ) = κ|ξ|^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyProcessSpec {
    family: LevyFamily,
    dim: usize,
}

impl LevyProcessSpec {
    pub fn brownian(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        LevyProcessSpec {
            family: LevyFamily::Brownian,
            dim,
        }
    }

    pub fn stable(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::param("alpha", "symmetric_stable requires alpha in (0,2]"));
        }
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be positive"));
        }
        Ok(LevyProcessSpec {
            family: LevyFamily::SymmetricStable { alpha },
            dim,
        })
    }

    pub fn family(&self) -> LevyFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stability index `α` (2 for Brownian motion).
    pub fn alpha(&self) -> f64 {
        match self.family {
            LevyFamily::Brownian => 2.0,
            LevyFamily::SymmetricStable { alpha } => alpha,
        }
    }

    /// Scale `κ` in `Ψ(ξ) = κ|ξ|^α`.
    pub fn scale(&self) -> f64 {
        match self.family {
            LevyFamily::Brownian => 0.5,
            LevyFamily::SymmetricStable { .. } => 1.0,
        }
    }

    /// Ψ as a function of `|ξ|`.
    #[inline]
    pub fn psi_radial(&self, r: f64) -> f64 {
        match self.family {
            LevyFamily::Brownian => 0.5 * r * r,
            LevyFamily::SymmetricStable { alpha } => {
                if alpha == 2.0 {
                    r * r
                } else {
                    r.powf(alpha)
                }
            }
        }
    }

    pub fn levy_exponent(&self, xi: &[f64]) -> f64 {
        self.psi_radial(xi.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `q_t(x)`, the transition density.
    pub fn transition_density(&self, t: f64, x: &[f64]) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("transition density needs t > 0 (got {t})")));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        stable_density_radial(self.alpha(), self.scale() * t, r, self.dim)
    }

    /// True when `X_t` is Gaussian.
    pub fn is_gaussian(&self) -> bool {
        self.alpha() == 2.0
    }

    /// Per-coordinate variance of `X_t` for the Gaussian cases.
    pub fn gaussian_variance(&self, t: f64) -> Option<f64> {
        self.is_gaussian().then(|| 2.0 * self.scale() * t)
    }
}

impl fmt::Display for LevyProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            LevyFamily::Brownian => write!(f, "brownian"),
            LevyFamily::SymmetricStable { alpha } => write!(f, "stable:alpha={alpha}"),
        }
    }
}

/// Parses `brownian` or `stable:alpha=1.5`.
pub fn parse_process(spec: &str, dim: usize) -> Result<LevyProcessSpec> {
    let (name, p) = split_spec(spec)?;
    match name.as_str() {
        "brownian" | "bm" => {
            reject_unknown(&p, &[], "brownian")?;
            if dim == 0 {
                return Err(Error::param("dim", "dimension must be positive"));
            }
            Ok(LevyProcessSpec::brownian(dim))
        }
        "stable" | "symmetric_stable" => {
            reject_unknown(&p, &["alpha"], "stable")?;
            LevyProcessSpec::stable(require(&p, "alpha", "stable")?, dim)
        }
        other => Err(Error::Config(format!("unknown process family '{other}'"))),
    }
}

/// Temporal exponent `β₀` paired with a spatial kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    beta0: f64,
    kernel: CovarianceKernel,
}

impl NoiseSpec {
    /// `β₀ = 0` (time-independent noise) is accepted alongside `(0, 1)`.
    pub fn new(beta0: f64, kernel: CovarianceKernel) -> Result<Self> {
        if !(0.0..1.0).contains(&beta0) {
            return Err(Error::param("beta0", "beta0 must lie in [0,1)"));
        }
        Ok(NoiseSpec { beta0, kernel })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn kernel(&self) -> &CovarianceKernel {
        &self.kernel
    }
}

/// Bounded continuous initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum InitialCondition {
    Constant {
        value: f64,
    },
    /// Samples on a uniform grid along the first coordinate, linearly
    /// interpolated and held constant beyond the ends.
    Tabulated {
        x0: f64,
        dx: f64,
        values: Vec<f64>,
    },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Constant { value: 1.0 }
    }
}

impl InitialCondition {
    pub fn constant(value: f64) -> Self {
        InitialCondition::Constant { value }
    }

    pub fn tabulated(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !(dx > 0.0) {
            return Err(Error::param("u0", "tabulated data needs samples and a positive spacing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("u0", "initial condition must be bounded"));
        }
        Ok(InitialCondition::Tabulated { x0, dx, values })
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            InitialCondition::Constant { value } => value.abs(),
            InitialCondition::Tabulated { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            InitialCondition::Constant { value } => Some(*value),
            InitialCondition::Tabulated { .. } => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            InitialCondition::Constant { value } => *value,
            InitialCondition::Tabulated { x0, dx, values } => {
                let s = (x[0] - x0) / dx;
                if s <= 0.0 {
                    return values[0];
                }
                let last = values.len() - 1;
                if s >= last as f64 {
                    return values[last];
                }
                let i = s.floor() as usize;
                let w = s - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Constant { value } => write!(f, "constant:value={value}"),
            InitialCondition::Tabulated { x0, dx, values } => {
                write!(f, "tabulated:x0={x0},dx={dx}")?;
                for (i, v) in values.iter().enumerate() {
                    write!(f, ",v{i}={v}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `constant:value=1` or `tabulated:x0=-1,dx=0.5,v0=..,v1=..`.
pub fn parse_initial(spec: &str) -> Result<InitialCondition> {
    let (name, p) = split_spec(spec)?;
    match name.as_str() {
        "constant" | "one" => {
            reject_unknown(&p, &["value"], "constant")?;
            Ok(InitialCondition::constant(take(&p, "value").unwrap_or(1.0)))
        }
        "zero" => Ok(InitialCondition::constant(0.0)),
        "tabulated" => {
            reject_unknown(&p, &["x0", "dx", "v*"], "tabulated")?;
            let mut vals: Vec<(usize, f64)> = p
                .iter()
                .filter_map(|(k, v)| k.strip_prefix('v').and_then(|i| i.parse().ok()).map(|i| (i, *v)))
                .collect();
            vals.sort_by_key(|(i, _)| *i);
            if vals.iter().enumerate().any(|(j, (i, _))| j != *i) {
                return Err(Error::Config("tabulated samples must be v0, v1, ... without gaps".into()));
            }
            InitialCondition::tabulated(
                require(&p, "x0", "tabulated")?,
                require(&p, "dx", "tabulated")?,
                vals.into_iter().map(|(_, v)| v).collect(),
            )
        }
        other => Err(Error::Config(format!("unknown initial condition '{other}'"))),
    }
}

// ---------------------------------------------------------------------------
// Isotropic stable densities.

/// Density at radius `r` of the isotropic law on `R^d` whose characteristic
/// function is `exp(-s|ξ|^α)`.
pub fn stable_density_radial(alpha: f64, s: f64, r: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    if alpha == 2.0 {
        return Ok((4.0 * PI * s).powf(-df / 2.0) * (-r * r / (4.0 * s)).exp());
    }
    if alpha == 1.0 {
        let h = (df + 1.0) / 2.0;
        return Ok((ln_gamma(h) - h * PI.ln()).exp() * s / (s * s + r * r).powf(h));
    }
    if d > 3 {
        return Err(Error::Unsupported("stable densities by Fourier inversion need d <= 3".into()));
    }
    let scale = s.powf(1.0 / alpha);
    let y = r / scale;
    let q1 = stable_unit_density(alpha, y, d);
    Ok(q1 / scale.powf(df))
}

/// Sums a series whose terms are `coef_k · exp(lmag_k)` with `|coef_k| ≤ 1`. Stops when terms fall below `1e-18` of the sum (convergent case)
/// or start growing (asymptotic case). Accepts the result only when the
/// truncation and cancellation errors are below `1e-12` relative.
fn sum_series(term: impl Fn(usize) -> (f64, f64), first: usize) -> Option<f64> {
    let mut sum: f64 = 0.0;
    let mut prev = f64::INFINITY;
    let mut largest: f64 = 0.0;
    for k in first..first + 600 {
        let (lmag, coef) = term(k);
        let mag = lmag.exp();
        if k == first && mag == 0.0 {
            // leading term underflows
            return Some(0.0);
        }
        if mag > prev && k > first + 1 {
            let err = prev + 1e-16 * largest;
            return (sum > 0.0 && err < 1e-12 * sum).then_some(sum);
        }
        sum += coef * mag;
        largest = largest.max(mag);
        if mag < 1e-18 * sum.abs() {
            return (sum > 0.0 && 1e-16 * largest < 1e-12 * sum).then_some(sum);
        }
        prev = mag;
    }
    None
}

/// Large-argument expansion of the unit isotropic density (convergent for
/// α < 1, asymptotic for α > 1):
/// `π^{-d/2-1} Σ_k (-1)^{k+1}/k! Γ(αk/2+1) Γ((αk+d)/2) sin(πkα/2) 2^{αk} y^{-αk-d}`.
fn stable_large_series(alpha: f64, y: f64, d: usize) -> Option<f64> {
    let df = d as f64;
    let ly = y.ln();
    let pre = -(df / 2.0 + 1.0) * PI.ln();
    sum_series(
        |k| {
            let kf = k as f64;
            let s = (PI * kf * alpha / 2.0).sin();
            let lmag = pre + ln_gamma(alpha * kf / 2.0 + 1.0) + ln_gamma((alpha * kf + df) / 2.0) - ln_gamma(kf + 1.0)
                + alpha * kf * 2f64.ln()
                - (alpha * kf + df) * ly;
            (lmag, if k % 2 == 1 { s } else { -s })
        },
        1,
    )
}

/// Small-argument expansion (convergent for α > 1, asymptotic for α < 1):
/// `2π^{d/2}/((2π)^d α) Σ_k (-1)^k Γ((2k+d)/α)/(k! Γ(k+d/2)) (y/2)^{2k}`.
fn stable_small_series(alpha: f64, y: f64, d: usize) -> Option<f64> {
    let df = d as f64;
    let pre = (2.0 * PI.powf(df / 2.0) / ((2.0 * PI).powf(df) * alpha)).ln();
    let lh = if y > 0.0 { (y / 2.0).ln() } else { f64::NEG_INFINITY };
    sum_series(
        |k| {
            let kf = k as f64;
            let lmag = pre + ln_gamma((2.0 * kf + df) / alpha) - ln_gamma(kf + 1.0) - ln_gamma(kf + df / 2.0)
                + if k == 0 { 0.0 } else { 2.0 * kf * lh };
            (lmag, if k % 2 == 0 { 1.0 } else { -1.0 })
        },
        0,
    )
}

/// Unit-scale isotropic density at radius `y` for the exponent `|ξ|^α`.
fn stable_unit_density(alpha: f64, y: f64, d: usize) -> f64 {
    let y = y.abs();
    if y > 0.0 {
        if let Some(v) = stable_large_series(alpha, y, d) {
            return v;
        }
    }
    if let Some(v) = stable_small_series(alpha, y, d) {
        return v;
    }
    let inv = 1.0 / alpha;
    if d == 1 {
        // q_1(y) = 1/(π α) ∫_0^∞ e^{-u} u^{1/α-1} cos(y u^{1/α}) du
        let f = |u: f64| (-u).exp() * u.powf(inv - 1.0) * (y * u.powf(inv)).cos();
        oscillatory_u_integral(&f, alpha, y, inv) / (PI * alpha)
    } else {
        // (2π)^{-d} ∫ e^{-ρ^α} ρ^{d-1} P_d(ρ y) dρ with u = ρ^α
        let df = d as f64;
        let f = |u: f64| {
            let rho = u.powf(inv);
            (-u).exp() * inv * u.powf(df * inv - 1.0) * spherical_plane_wave(d, rho * y)
        };
        oscillatory_u_integral(&f, alpha, y, df * inv) / (2.0 * PI).powf(df)
    }
}

/// `∫_0^∞ f(u) du` for integrands `e^{-u} u^{p-1} × (oscillation with phase
/// y u^{1/α})`, split at the half periods of the phase.
fn oscillatory_u_integral(f: &dyn Fn(f64) -> f64, alpha: f64, y: f64, p: f64) -> f64 {
    let u_max = 50.0 + 2.0 * p;
    let mut breaks = vec![0.0];
    if y > 0.0 {
        let mut k = 1.0;
        loop {
            let u = (k * PI / y).powf(alpha);
            if u >= u_max || breaks.len() > 20_000 {
                break;
            }
            breaks.push(u);
            k += 1.0;
        }
    }
    if breaks.len() == 1 {
        breaks.push(u_max.min(1.0));
    }
    if *breaks.last().unwrap() < u_max {
        breaks.push(u_max);
    }
    let mut total = 0.0;
    for (i, w) in breaks.windows(2).enumerate() {
        let q = if i == 0 {
            tanh_sinh(f, w[0], w[1], 1e-15, 1e-13)
        } else {
            gauss_kronrod(f, w[0], w[1], 1e-16, 1e-12, 50)
        };
        total += q.value;
    }
    total
}
