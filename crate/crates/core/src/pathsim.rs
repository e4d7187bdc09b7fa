//! Lévy paths on uniform time grids.
//!
//! Each path is a pure function of `(seed, stream_id, grid)`: the generator is
//! ChaCha8 keyed by `seed` with its stream counter set to `stream_id`, so
//! replicates can be produced in any order on any number of threads.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LevyFamily, LevyProcessSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::param("t", "horizon must be positive and finite"));
        }
        if n_steps == 0 {
            return Err(Error::param("n_steps", "need at least one step"));
        }
        Ok(TimeGrid { horizon, n_steps })
    }

    /// Grid with step `h` and `n_steps` steps.
    pub fn with_step(h: f64, n_steps: usize) -> Result<Self> {
        Self::new(h * n_steps as f64, n_steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// `t_i = i h`; the last node is exactly the horizon.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.horizon
        } else {
            i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.node(i)).collect()
    }
}

/// Path values `X_{t_0}, …, X_{t_n}` stored row-major (`(n+1) × d`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub grid: TimeGrid,
    pub dim: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream_id: u64,
}

impl PathSample {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn endpoint(&self) -> &[f64] {
        self.point(self.grid.n_steps())
    }

    /// The constant path `X ≡ 0`, for tests of the Hamiltonian plumbing.
    pub fn frozen(grid: TimeGrid, dim: usize) -> Self {
        PathSample {
            grid,
            dim,
            values: vec![0.0; (grid.n_steps() + 1) * dim],
            seed: 0,
            stream_id: 0,
        }
    }
}

fn rng_for(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Symmetric α-stable variate with characteristic function `e^{-|ξ|^α}`
/// (Chambers-Mallows-Stuck).
fn symmetric_stable_1d(rng: &mut ChaCha8Rng, alpha: f64) -> f64 {
    if alpha == 2.0 {
        let z: f64 = rng.sample(StandardNormal);
        return std::f64::consts::SQRT_2 * z;
    }
    let v = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Positive stable variate with Laplace transform `e^{-λ^a}`, `0 < a < 1`
/// (Kanter's representation).
fn positive_stable(rng: &mut ChaCha8Rng, a: f64) -> f64 {
    let u = PI * rng.random::<f64>();
    let w: f64 = rng.sample(Exp1);
    let left = (a * u).sin() / u.sin().powf(1.0 / a);
    let right = (((1.0 - a) * u).sin() / w).powf((1.0 - a) / a);
    left * right
}

/// Samples `X` on `grid`. Brownian increments are `N(0, h I)`; stable
/// increments are `h^{1/α}` times a unit isotropic stable vector, built in
/// d > 1 as `√A · N(0, 2I)` with `A` positive `(α/2)`-stable.
pub fn sample_path(process: &LevyProcessSpec, grid: &TimeGrid, seed: u64, stream_id: u64) -> PathSample {
    let d = process.dim();
    let n = grid.n_steps();
    let h = grid.step();
    let mut rng = rng_for(seed, stream_id);
    let mut values = vec![0.0; (n + 1) * d];
    let mut inc = vec![0.0; d];
    match process.family() {
        LevyFamily::Brownian => {
            let s = h.sqrt();
            for i in 1..=n {
                for v in inc.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = s * z;
                }
                advance(&mut values, &inc, i, d);
            }
        }
        LevyFamily::SymmetricStable { alpha } => {
            let s = h.powf(1.0 / alpha);
            for i in 1..=n {
                if d == 1 {
                    inc[0] = s * symmetric_stable_1d(&mut rng, alpha);
                } else {
                    let scale = if alpha == 2.0 {
                        s
                    } else {
                        s * positive_stable(&mut rng, alpha / 2.0).sqrt()
                    };
                    for v in inc.iter_mut() {
                        let z: f64 = rng.sample(StandardNormal);
                        *v = scale * std::f64::consts::SQRT_2 * z;
                    }
                }
                advance(&mut values, &inc, i, d);
            }
        }
    }
    PathSample {
        grid: *grid,
        dim: d,
        values,
        seed,
        stream_id,
    }
}

#[inline]
fn advance(values: &mut [f64], inc: &[f64], i: usize, d: usize) {
    for j in 0..d {
        values[i * d + j] = values[(i - 1) * d + j] + inc[j];
    }
}

/// Two independent paths from distinct streams.
pub fn path_pair(process: &LevyProcessSpec, grid: &TimeGrid, seed: u64, stream_ids: (u64, u64)) -> Result<(PathSample, PathSample)> {
    if stream_ids.0 == stream_ids.1 {
        return Err(Error::param("stream_ids", "the two paths need distinct streams"));
    }
    Ok((
        sample_path(process, grid, seed, stream_ids.0),
        sample_path(process, grid, seed, stream_ids.1),
    ))
}

/// Writes `stream_id,t,x_1..x_d` rows for each path.
pub fn write_paths_csv<W: Write>(out: &mut W, paths: &[PathSample]) -> Result<()> {
    let d = paths.first().map_or(1, |p| p.dim);
    write!(out, "stream_id,t")?;
    for j in 1..=d {
        write!(out, ",x_{j}")?;
    }
    writeln!(out)?;
    for p in paths {
        for i in 0..=p.grid.n_steps() {
            write!(out, "{},{}", p.stream_id, crate::fmt_f64(p.grid.node(i)))?;
            for v in p.point(i) {
                write!(out, ",{}", crate::fmt_f64(*v))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut dmax: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        dmax = dmax.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    dmax
}
