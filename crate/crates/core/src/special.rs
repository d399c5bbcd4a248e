//! Special functions used by the covariance formulas.
//!
//! Gamma, erf and the fractional-order Bessel evaluations are delegated to
//! `puruspe`; the half-integer orders that dominate the radial transforms in
//! dimensions 1 and 3 get closed trigonometric forms.

pub use puruspe::{erf, erfc, gamma, ln_gamma};

/// Bessel function of the first kind `J_ν(x)` for real order `ν ≥ -1/2` and
/// `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= -0.5);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let c = (2.0 / (std::f64::consts::PI * x)).sqrt();
    if nu == -0.5 {
        return c * x.cos();
    }
    if nu == 0.5 {
        return c * x.sin();
    }
    if nu == 1.5 {
        return c * (x.sin() / x - x.cos());
    }
    if nu == 2.5 {
        return c * ((3.0 / (x * x) - 1.0) * x.sin() - 3.0 * x.cos() / x);
    }
    puruspe::Jnu_Ynu(nu, x).0
}

/// Modified Bessel function of the second kind `K_ν(x)`, any real order
/// (`K_{-ν} = K_ν`), `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    let nu = nu.abs();
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x > 705.0 {
        // K underflows; the asymptotic prefactor keeps covariances finite
        return 0.0;
    }
    if nu == 0.5 {
        return (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
    }
    puruspe::Inu_Knu(nu, x).1
}

/// Approximate `k`-th positive zero of `J_ν` (McMahon's expansion).
///
/// Only used to place quadrature panel boundaries, so a few digits suffice.
pub fn bessel_j_zero(nu: f64, k: usize) -> f64 {
    let b = (k as f64 + 0.5 * nu - 0.25) * std::f64::consts::PI;
    let mu = 4.0 * nu * nu;
    let b8 = 8.0 * b;
    b - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
}

/// `lim_{z→0} z^ν K_ν(z) = 2^{ν-1} Γ(ν)` for `ν > 0`; used to evaluate
/// Matérn-type covariances at zero lag.
pub fn zero_lag_bessel_limit(nu: f64) -> f64 {
    2f64.powf(nu - 1.0) * gamma(nu)
}
