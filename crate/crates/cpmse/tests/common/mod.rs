//! Shared oracle helpers for the integration tests.
//!
//! For a dielectric half-space (`θ = 0`, `ε₀ = μ₀ = μ₁ = 1`) the expansion
//! can be resummed analytically in a transverse-momentum basis: at fixed
//! polar angle `c = κ/q` of the (wavenumber, momentum) plane the surface
//! kernel squares to a scalar `Λ(c)`, and every order reduces to a single
//! integral over `c ∈ [0, 1]`. With `w(c) = √(1 + (ε-1)c²)`,
//!
//! ```text
//! Λ(c)  = (w - 1)(ε - w) / (2 (1 + ε) w)
//! κ₀(ε) = 3 (ε - 1) / (16 π (ε + 1))
//! δU₀   = -κ₀
//! δU₁   = -κ₀ ∫ (1 - c²)² / w dc
//! δU₂   = -κ₀ ∫ Λ dc
//! δU₃   = -κ₀ ∫ Λ (1 - c²)² / w dc
//! δU₄   = -κ₀ ∫ Λ² dc
//! ```
//!
//! These forms never touch the production kernel/quadrature code path: they
//! are the independent yardstick the high-dimensional machinery is measured
//! against.
#![allow(dead_code)]

/// Composite Simpson on [0, 1]; `n` must be even.
pub fn simpson(f: &dyn Fn(f64) -> f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn w(eps: f64, c: f64) -> f64 {
    (1.0 + (eps - 1.0) * c * c).sqrt()
}

fn lambda(eps: f64, c: f64) -> f64 {
    let w = w(eps, c);
    (w - 1.0) * (eps - w) / (2.0 * (1.0 + eps) * w)
}

fn kappa0(eps: f64) -> f64 {
    3.0 * (eps - 1.0) / (16.0 * std::f64::consts::PI * (eps + 1.0))
}

/// Exact per-order plate contributions `δU_0 .. δU_4` (units ħcα = 1, d = 1).
pub fn plate_orders(eps: f64) -> [f64; 5] {
    let n = 200_000;
    let k0 = kappa0(eps);
    let odd_weight = |c: f64| {
        let s2 = 1.0 - c * c;
        s2 * s2 / w(eps, c)
    };
    [
        -k0,
        -k0 * simpson(&odd_weight, n),
        -k0 * simpson(&|c| lambda(eps, c), n),
        -k0 * simpson(&|c| lambda(eps, c) * odd_weight(c), n),
        -k0 * simpson(&|c| lambda(eps, c) * lambda(eps, c), n),
    ]
}

/// Exact plate amplitude from the resummed reflection coefficients.
pub fn plate_exact_upsilon(eps: f64) -> f64 {
    let f = |c: f64| {
        let w = w(eps, c);
        (2.0 - c * c) * (eps - w) / (eps + w) - c * c * (1.0 - w) / (1.0 + w)
    };
    3.0 / (16.0 * std::f64::consts::PI) * simpson(&f, 200_000)
}
