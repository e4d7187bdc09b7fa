//! Special functions not covered by `statrs`.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Surface area of the unit sphere `S^{d-1}` in `R^d` (2 for d = 1).
pub fn unit_sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Bessel function of the first kind, order zero.
///
/// Rational approximations with absolute error below 1e-8.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let num = 57_568_490_574.0
            + y * (-13_362_590_354.0 + y * (651_619_640.7 + y * (-11_214_424.18 + y * (77_392.330_17 + y * (-184.905_245_6)))));
        let den = 57_568_490_411.0 + y * (1_029_532_985.0 + y * (9_494_680.718 + y * (59_272.648_53 + y * (267.853_271_2 + y))));
        num / den
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - std::f64::consts::FRAC_PI_4;
        let p = 1.0 + y * (-0.109_862_862_7e-2 + y * (0.273_451_040_7e-4 + y * (-0.207_337_063_9e-5 + y * 0.209_388_721_1e-6)));
        let q =
            -0.156_249_999_5e-1 + y * (0.143_048_876_5e-3 + y * (-0.691_114_765_1e-5 + y * (0.762_109_516_1e-6 - y * 0.934_935_152e-7)));
        (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p - z * xx.sin() * q)
    }
}

/// Angular average of `exp(i xi . x)` over the sphere, times the sphere area:
/// `int_{S^{d-1}} e^{i rho r omega_1} d omega` as a function of `z = rho r`.
pub fn spherical_plane_wave(d: usize, z: f64) -> f64 {
    match d {
        1 => 2.0 * z.cos(),
        2 => 2.0 * PI * bessel_j0(z),
        3 => {
            if z.abs() < 1e-6 {
                4.0 * PI * (1.0 - z * z / 6.0)
            } else {
                4.0 * PI * z.sin() / z
            }
        }
        _ => panic!("plane-wave average only implemented for d <= 3"),
    }
}

/// `int_{S^{d-1}} prod_j |omega_j|^{a_j - 1} d omega = 2 prod Gamma(a_j/2) / Gamma(sum a_j / 2)`.
pub fn sphere_monomial_integral(exponents: &[f64]) -> f64 {
    let num: f64 = exponents.iter().map(|a| ln_gamma(a / 2.0)).sum();
    let total: f64 = exponents.iter().sum();
    2.0 * (num - ln_gamma(total / 2.0)).exp()
}

/// Fourier constant of the Riesz kernel: the transform of `|x|^{-beta}` in
/// `R^d` is `riesz_constant(d, beta) * |xi|^{beta-d}`.
pub fn riesz_constant(d: usize, beta: f64) -> f64 {
    let df = d as f64;
    PI.powf(df / 2.0) * 2f64.powf(df - beta) * gamma((df - beta) / 2.0) / gamma(beta / 2.0)
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}
