//! Parametrization of the smoothed dielectric wedge (and a closed-sphere
//! test fixture), together with the coordinate maps between the smooth-tip
//! and sharp-tip frames.
//!
//! Conventions: the cross-section lives in the x-y plane with the edge along
//! z. The smooth tip sits at the origin and the wedge symmetry axis is +x,
//! pointing into the vacuum region. The edge arc of signed radius `R` spans
//! chart arc length `|t| ≤ |R·θ|`; the two planar faces continue tangentially
//! from the arc endpoints. The particle sits at `r₀ = d·(cos φ, sin φ, 0)`,
//! with `(d, φ)` measured from the smooth tip. A concave wedge has `θ < 0`
//! and `R < 0`; the same formulas cover both signs.
//!
//! The chart is `(t, z)`: arc length perpendicular to the edge and the
//! Cartesian edge coordinate, so the area element is exactly `dt·dz`
//! (jacobian ≡ 1) and surface integrals are pure chart-space integrals.

use crate::linalg::{add, scale, Vec3};
use crate::{Error, Result};

/// Smoothed-wedge configuration: half-opening angle `θ` of the vacuum region
/// beyond π/2, signed smoothing radius `R`, particle distance `d` from the
/// smooth tip and particle polar angle `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeConfig {
    pub theta: f64,
    /// Signed radius of the smoothing arc; same sign as `theta`. Zero is
    /// allowed only for sharp-wedge reference evaluations.
    pub smoothing_radius: f64,
    /// Distance of the particle from the smooth tip; must be positive.
    pub distance: f64,
    /// Polar angle of the particle, `0 ≤ φ < π/2 + θ`.
    pub phi: f64,
}

impl WedgeConfig {
    pub fn new(theta: f64, smoothing_radius: f64, distance: f64, phi: f64) -> Result<Self> {
        let cfg = WedgeConfig {
            theta,
            smoothing_radius,
            distance,
            phi,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let WedgeConfig {
            theta,
            smoothing_radius: r,
            distance: d,
            phi,
        } = *self;
        if !(theta.is_finite() && r.is_finite() && d.is_finite() && phi.is_finite()) {
            return Err(Error::Config("non-finite wedge parameter".into()));
        }
        if !(-std::f64::consts::FRAC_PI_2 < theta && theta <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config(format!(
                "theta = {theta} outside (-pi/2, pi/2]"
            )));
        }
        if theta != 0.0 && r != 0.0 && r.signum() != theta.signum() {
            return Err(Error::Config(format!(
                "smoothing radius sign {} must match theta sign {}",
                r.signum(),
                theta.signum()
            )));
        }
        if d <= 0.0 {
            return Err(Error::Config(format!("distance = {d} must be positive")));
        }
        if (r * theta.sin()).abs() > d {
            return Err(Error::Config(
                "smoothing radius too large for the particle distance".into(),
            ));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2 + theta).contains(&phi) {
            return Err(Error::Config(format!(
                "phi = {phi} outside [0, pi/2 + theta)"
            )));
        }
        if d_perp_unchecked(self) <= 0.0 {
            return Err(Error::Config(
                "particle does not lie strictly outside the body".into(),
            ));
        }
        Ok(())
    }

    /// Particle position `r₀ = d·(cos φ, sin φ, 0)`.
    pub fn particle(&self) -> Vec3 {
        [
            self.distance * self.phi.cos(),
            self.distance * self.phi.sin(),
            0.0,
        ]
    }
}

/// A surface point with its outward normal, orthonormal tangent frame and
/// chart data. The frame satisfies `normal = tangent_perp × tangent_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub position: Vec3,
    pub normal: Vec3,
    /// Tangent in the cross-section plane (along increasing `t`).
    pub tangent_perp: Vec3,
    /// Tangent along the edge.
    pub tangent_z: Vec3,
    /// Chart coordinates of the sample.
    pub chart: (f64, f64),
    /// Area element per unit chart area.
    pub jacobian: f64,
}

/// Particle coordinates relative to the sharp wedge obtained by extending
/// the faces: polar coordinates `(d_s, φ_s)` about the sharp apex, the
/// oriented tip offset `δ` and the shortest normal distance `d⊥`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpFrameCoords {
    pub d_s: f64,
    pub phi_s: f64,
    pub delta: f64,
    pub d_perp: f64,
}

/// Evaluates the wedge surface at chart coordinates `(t, z)`.
///
/// `|t| ≤ |R·θ|` lies on the smoothing arc (center `(-R, 0)`, radius `R`);
/// beyond that the planar faces continue tangentially, mirrored in `y` for
/// `t < 0`. The outward normal is continuous across the junctions.
pub fn surface_point(cfg: &WedgeConfig, t: f64, z: f64) -> SurfaceSample {
    let r = cfg.smoothing_radius;
    let theta = cfg.theta;
    let arc_reach = (r * theta).abs();

    let (position, normal, tangent_perp) = if t.abs() <= arc_reach && r != 0.0 {
        let ang = t / r;
        let (sin_a, cos_a) = ang.sin_cos();
        (
            [r * (cos_a - 1.0), r * sin_a, z],
            [cos_a, sin_a, 0.0],
            [-sin_a, cos_a, 0.0],
        )
    } else {
        let side = if t >= 0.0 { 1.0 } else { -1.0 };
        let (sin_th, cos_th) = theta.sin_cos();
        let endpoint = [r * (cos_th - 1.0), side * r * sin_th];
        let face_dir = [-sin_th, side * cos_th];
        let excess = t.abs() - arc_reach;
        (
            [
                endpoint[0] + excess * face_dir[0],
                endpoint[1] + excess * face_dir[1],
                z,
            ],
            [cos_th, side * sin_th, 0.0],
            [side * face_dir[0], side * face_dir[1], 0.0],
        )
    };

    SurfaceSample {
        position,
        normal,
        tangent_perp,
        tangent_z: [0.0, 0.0, 1.0],
        chart: (t, z),
        jacobian: 1.0,
    }
}

fn d_perp_unchecked(cfg: &WedgeConfig) -> f64 {
    let WedgeConfig {
        theta,
        smoothing_radius: r,
        distance: d,
        phi,
    } = *cfg;
    let phi_star = theta + (r / d * theta.sin()).asin();
    if phi < phi_star {
        (d * d + r * r + 2.0 * d * r * phi.cos()).sqrt() - r
    } else {
        d * (theta - phi).cos() + r * (theta.cos() - 1.0)
    }
}

/// Shortest normal distance of the particle from the smooth wedge surface.
///
/// Piecewise: for `φ` below the branch angle `φ* = θ + arcsin((R/d) sin θ)`
/// the foot of the normal is on the arc, otherwise on the upper face. Both
/// branches agree at `φ*`.
pub fn d_perp(cfg: &WedgeConfig) -> f64 {
    d_perp_unchecked(cfg)
}

/// Particle coordinates relative to the sharp wedge (`R → 0` frame).
///
/// The sharp apex sits at `(δ, 0)` with `δ = R(1/cos θ - 1)`; `(d_s, φ_s)`
/// are plain polar coordinates of the particle about that apex, using the
/// quadrant-aware arc tangent.
pub fn sharp_frame(cfg: &WedgeConfig) -> SharpFrameCoords {
    let WedgeConfig {
        theta,
        smoothing_radius: r,
        distance: d,
        phi,
    } = *cfg;
    let delta = r * (1.0 / theta.cos() - 1.0);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let x = d * cos_phi - delta;
    let y = d * sin_phi;
    SharpFrameCoords {
        d_s: (x * x + y * y).sqrt(),
        phi_s: y.atan2(x),
        delta,
        d_perp: d_perp(cfg),
    }
}

/// A point on a sphere of the given radius and center, used as the closed
/// surface for extinction-identity null tests (the truncated wedge is open).
///
/// Chart: `(azimuth, polar)` with the area element `radius² sin(polar)`.
pub fn sphere_point(radius: f64, center: Vec3, azimuth: f64, polar: f64) -> Result<SurfaceSample> {
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::Config(format!(
            "sphere radius = {radius} must be positive"
        )));
    }
    let (sin_p, cos_p) = polar.sin_cos();
    let (sin_a, cos_a) = azimuth.sin_cos();
    let normal = [sin_p * cos_a, sin_p * sin_a, cos_p];
    // d/d(polar) and normalized d/d(azimuth); normal = tangent_perp × tangent_z.
    let tangent_perp = [cos_p * cos_a, cos_p * sin_a, -sin_p];
    let tangent_z = [-sin_a, cos_a, 0.0];
    Ok(SurfaceSample {
        position: add(center, scale(normal, radius)),
        normal,
        tangent_perp,
        tangent_z,
        chart: (azimuth, polar),
        jacobian: radius * radius * sin_p,
    })
}
