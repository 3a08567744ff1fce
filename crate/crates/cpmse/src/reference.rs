//! Exact closed-form baselines: the sharp perfectly conducting (PEC) wedge,
//! the planar dielectric half-space, the proximity estimate built from it,
//! and the reduced-PEC predictor.
//!
//! All amplitudes are the dimensionless `Υ` in `U = -Υ ħcα / d⁴` at the
//! stated reference distance. The single normalization anchor of the whole
//! crate is `Υ_plate^PEC = 3/(8π)`: it is simultaneously the planar limit of
//! the sharp-wedge closed form and the perfect-conductor limit of the planar
//! dielectric integral, and the dielectric plate values are only consistent
//! with this anchor.

use crate::geometry::{d_perp, sharp_frame, WedgeConfig};
use crate::quadrature::IntegrationSpec;
use crate::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Planar PEC amplitude `3/(8π)`, the crate-wide normalization anchor.
pub const PEC_PLATE_UPSILON: f64 = 3.0 / (8.0 * PI);

/// Angular range (radians) to the bounding face below which the sharp-wedge
/// amplitude is reported as a flagged infinity instead of overflowing.
pub const WALL_PROXIMITY_CUTOFF: f64 = 1e-6;

/// Dimensionless amplitude of the sharp PEC wedge at particle polar
/// coordinates `(d, φ)` about its apex, in units of that `d`.
///
/// With `p = π/(π + 2θ)` and `σ = sin(p(θ - φ + π/2))`:
/// `Υ = [135 p⁴/σ⁴ - 90 (p² - 1) p²/σ² - p⁴ - 10 p² + 11] / (360 π)`.
/// Valid for `-π/2 < θ ≤ π/2` (convex and concave); diverges against the
/// bounding face `φ → π/2 + θ`.
pub fn pec_wedge_upsilon(theta: f64, phi: f64) -> Result<f64> {
    if !(-std::f64::consts::FRAC_PI_2 < theta && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::Config(format!(
            "theta = {theta} outside (-pi/2, pi/2]"
        )));
    }
    let wall = std::f64::consts::FRAC_PI_2 + theta;
    if !(0.0..wall).contains(&phi) {
        return Err(Error::Config(format!("phi = {phi} outside [0, pi/2 + theta)")));
    }
    if wall - phi < WALL_PROXIMITY_CUTOFF {
        return Ok(f64::INFINITY);
    }
    let p = PI / (PI + 2.0 * theta);
    let p2 = p * p;
    let s = (p * (theta - phi + std::f64::consts::FRAC_PI_2)).sin();
    let s2 = s * s;
    Ok(
        (135.0 * p2 * p2 / (s2 * s2) - 90.0 * (p2 - 1.0) * p2 / s2 - p2 * p2 - 10.0 * p2
            + 11.0)
            / (360.0 * PI),
    )
}

/// Planar dielectric amplitude with an integration error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateAmplitude {
    pub epsilon1: f64,
    pub upsilon: f64,
    pub quad_error: f64,
}

/// `Υ_plate(ε₁)` for a half-space of permittivity `ε₁` in vacuum
/// (`ε₀ = μ₀ = μ₁ = 1`).
///
/// The double integral over imaginary wavenumber and transverse momentum
/// reduces exactly, in polar coordinates, to a single integral: with
/// `w(c) = √(1 + (ε₁ - 1) c²)`,
///
/// ```text
/// Υ_plate = 3/(16π) ∫₀¹ dc [ (2 - c²)·(ε₁ - w)/(ε₁ + w) - c²·(1 - w)/(1 + w) ]
/// ```
///
/// evaluated here on geometrically graded Gauss-Legendre panels (the second
/// reflection factor develops a `c ~ ε₁^{-1/2}` boundary layer). The
/// equivalence with the literal 2-dimensional form is regression-tested.
/// Results are memoized per `(ε₁, rel_tol)`.
pub fn plate_upsilon(epsilon1: f64, spec: &IntegrationSpec) -> Result<PlateAmplitude> {
    if !(epsilon1 >= 1.0 && epsilon1.is_finite()) {
        return Err(Error::Config(format!("epsilon1 = {epsilon1} must be >= 1")));
    }
    static CACHE: Mutex<Option<HashMap<(u64, u64), PlateAmplitude>>> = Mutex::new(None);
    let key = (epsilon1.to_bits(), spec.rel_tol.to_bits());
    if let Some(hit) = CACHE
        .lock()
        .expect("plate cache poisoned")
        .get_or_insert_with(HashMap::new)
        .get(&key)
    {
        return Ok(*hit);
    }

    let integrand = |c: f64| {
        let w = (1.0 + (epsilon1 - 1.0) * c * c).sqrt();
        (2.0 - c * c) * (epsilon1 - w) / (epsilon1 + w) - c * c * (1.0 - w) / (1.0 + w)
    };
    let coarse = graded_panels(&integrand, 10);
    let fine = graded_panels(&integrand, 24);
    let upsilon = 3.0 / (16.0 * PI) * fine;
    let quad_error = (3.0 / (16.0 * PI) * (fine - coarse)).abs().max(1e-14);
    let amplitude = PlateAmplitude {
        epsilon1,
        upsilon,
        quad_error,
    };
    CACHE
        .lock()
        .expect("plate cache poisoned")
        .get_or_insert_with(HashMap::new)
        .insert(key, amplitude);
    Ok(amplitude)
}

/// Composite Gauss-Legendre over [0, 1] with panel edges geometrically
/// refined toward 0.
fn graded_panels(f: &dyn Fn(f64) -> f64, order: usize) -> f64 {
    let mut edges = vec![0.0];
    let mut e = 1e-8;
    while e < 1.0 {
        edges.push(e);
        e *= 4.0;
    }
    edges.push(1.0);
    let rule = gauss_legendre(order);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for &(node, weight) in &rule {
            total += weight * half * f(mid + half * node);
        }
    }
    total
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2.0 * k as f64 - 1.0) * x * p1 - (k as f64 - 1.0) * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2.0 * k as f64 - 1.0) * x * p1 - (k as f64 - 1.0) * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Proximity estimate: the planar amplitude transported to the shortest
/// particle-surface distance, `Υ_plate(ε₁)·(d/d⊥)⁴`, in units of `d`.
pub fn pfa_upsilon(cfg: &WedgeConfig, epsilon1: f64, spec: &IntegrationSpec) -> Result<f64> {
    cfg.validate()?;
    let plate = plate_upsilon(epsilon1, spec)?;
    let ratio = cfg.distance / d_perp(cfg);
    Ok(plate.upsilon * ratio.powi(4))
}

/// Reduced-PEC predictor: the sharp PEC wedge amplitude evaluated at the
/// sharp-frame coordinates `(d_s, φ_s)`, scaled by the plate reduction
/// factor `Υ_plate(ε₁)/Υ_plate^PEC` and re-expressed in units of `d`.
pub fn reduced_pec_upsilon(cfg: &WedgeConfig, epsilon1: f64, spec: &IntegrationSpec) -> Result<f64> {
    cfg.validate()?;
    let frame = sharp_frame(cfg);
    let pec = pec_wedge_upsilon(cfg.theta, frame.phi_s)?;
    let plate = plate_upsilon(epsilon1, spec)?;
    let ratio = cfg.distance / frame.d_s;
    Ok(plate.upsilon / PEC_PLATE_UPSILON * pec * ratio.powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> IntegrationSpec {
        IntegrationSpec::for_dimension(3, 1)
    }

    #[test]
    fn pec_plate_limit_is_exact() {
        let v = pec_wedge_upsilon(0.0, 0.0).unwrap();
        assert!((v - PEC_PLATE_UPSILON).abs() < 1e-14);
        assert!((v - 0.1193662).abs() < 1e-7);
    }

    #[test]
    fn pec_wedge_on_axis_value() {
        // At phi = 0 the sine factor is exactly 1 and
        // Y = (44 p^4 + 80 p^2 + 11)/(360 pi).
        let v = pec_wedge_upsilon(0.75, 0.0).unwrap();
        let p = PI / (PI + 1.5);
        assert!((p - 0.676834).abs() < 1e-5);
        let direct = (44.0 * p.powi(4) + 80.0 * p * p + 11.0) / (360.0 * PI);
        assert!((v - direct).abs() < 1e-15);
        assert!((v - 0.050295).abs() < 1e-6);
    }

    #[test]
    fn pec_wedge_wall_limit_recovers_plate() {
        for &theta in &[0.75, -0.75, 0.3] {
            let phi = std::f64::consts::FRAC_PI_2 + theta - 0.01;
            let v = pec_wedge_upsilon(theta, phi).unwrap();
            // Perpendicular distance to the face for the sharp wedge.
            let dp = (std::f64::consts::FRAC_PI_2 + theta - phi).sin();
            let ratio = v * dp.powi(4) / PEC_PLATE_UPSILON;
            assert!(
                (ratio - 1.0).abs() < 0.01,
                "theta {theta}: wall ratio {ratio}"
            );
        }
    }

    #[test]
    fn pec_wedge_is_continuous_through_theta_zero() {
        for &phi in &[0.0, 0.5, 1.2] {
            let above = pec_wedge_upsilon(1e-9, phi).unwrap();
            let below = pec_wedge_upsilon(-1e-9, phi).unwrap();
            let plate = PEC_PLATE_UPSILON / phi.cos().powi(4);
            assert!((above - plate).abs() < 1e-7);
            assert!((below - plate).abs() < 1e-7);
        }
    }

    #[test]
    fn pec_wedge_wall_guard() {
        let theta = 0.4;
        let phi = std::f64::consts::FRAC_PI_2 + theta - 1e-9;
        assert!(pec_wedge_upsilon(theta, phi).unwrap().is_infinite());
        assert!(pec_wedge_upsilon(1.7, 0.0).is_err());
    }

    #[test]
    fn plate_amplitudes_match_published_values() {
        let s = spec();
        for &(eps, expect) in &[(100.0, 0.1056), (10.0, 0.0783), (3.0, 0.0456)] {
            let amp = plate_upsilon(eps, &s).unwrap();
            assert!(
                (amp.upsilon - expect).abs() < 5e-4,
                "eps {eps}: {} vs {expect}",
                amp.upsilon
            );
        }
    }

    #[test]
    fn plate_limits() {
        let s = spec();
        let pec = plate_upsilon(1e8, &s).unwrap();
        assert!((pec.upsilon - PEC_PLATE_UPSILON).abs() < 1e-3 * PEC_PLATE_UPSILON);
        let none = plate_upsilon(1.0, &s).unwrap();
        assert!(none.upsilon.abs() < 1e-12);
    }

    #[test]
    fn plate_is_monotone_in_epsilon() {
        let s = spec();
        let values: Vec<f64> = [1.5, 3.0, 10.0, 30.0, 100.0, 1e4]
            .iter()
            .map(|&e| plate_upsilon(e, &s).unwrap().upsilon)
            .collect();
        for pair in values.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        for v in values {
            assert!(v > 0.0 && v < PEC_PLATE_UPSILON);
        }
    }

    #[test]
    fn pfa_examples() {
        let s = spec();
        // theta = 0, R = 0: d_perp = d cos(phi).
        let flat = WedgeConfig::new(0.0, 0.0, 1.0, 0.7).unwrap();
        let v = pfa_upsilon(&flat, 10.0, &s).unwrap();
        let plate = plate_upsilon(10.0, &s).unwrap().upsilon;
        assert!((v - plate / 0.7f64.cos().powi(4)).abs() < 1e-12);

        // phi = 0: d_perp = d for any theta, R.
        let cfg = WedgeConfig::new(0.75, 0.1, 1.0, 0.0).unwrap();
        assert!((pfa_upsilon(&cfg, 10.0, &s).unwrap() - plate).abs() < 1e-12);

        // Brute-force minimum distance agreement at a generic angle.
        let cfg = WedgeConfig::new(0.75, 0.1, 1.0, 1.4).unwrap();
        let r0 = cfg.particle();
        let mut best = f64::INFINITY;
        for i in 0..200_000 {
            let t = -3.0 + 6.0 * (i as f64 + 0.5) / 200_000.0;
            let p = crate::geometry::surface_point(&cfg, t, 0.0).position;
            best = best.min(crate::linalg::norm(crate::linalg::sub(r0, p)));
        }
        let v = pfa_upsilon(&cfg, 10.0, &s).unwrap();
        assert!((v - plate / best.powi(4)).abs() < 1e-4 * v);
    }

    #[test]
    fn reduced_pec_limits() {
        let s = spec();
        // Strong contrast, sharp edge: the predictor approaches the PEC
        // wedge amplitude itself.
        let cfg = WedgeConfig::new(0.75, 0.0, 1.0, 0.4).unwrap();
        let v = reduced_pec_upsilon(&cfg, 1e8, &s).unwrap();
        let pec = pec_wedge_upsilon(0.75, 0.4).unwrap();
        assert!((v / pec - 1.0).abs() < 2e-3);

        // Plate chain: theta = 0, R = 0 gives plate/cos^4(phi).
        let flat = WedgeConfig::new(0.0, 0.0, 1.0, 0.9).unwrap();
        let v = reduced_pec_upsilon(&flat, 10.0, &s).unwrap();
        let plate = plate_upsilon(10.0, &s).unwrap().upsilon;
        assert!((v - plate / 0.9f64.cos().powi(4)).abs() < 1e-12);
    }
}
