//! Equation of motion of a magnetic microrobot under linear drag, gravity
//! and a magnetic gradient force, integrated in closed form over each step.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::BifurcationGeometry;
use crate::hemodynamics::CarreauModel;
use crate::Vec3;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Path length covered per integration step, m.
pub const STEP_LENGTH: f64 = 1e-5;

/// Speed used for the step size when particle and fluid are both at rest, m/s.
pub const FALLBACK_SPEED: f64 = 1e-3;

/// Bisection tolerance for locating wall crossings, m.
pub const COLLISION_TOLERANCE: f64 = 1e-9;

/// Allowed penetration of the offset surface from rounding, m.
pub const WALL_SLACK: f64 = 1e-12;

/// Magnetization M(|B|) as a piecewise-linear table, clamped at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationCurve {
    field: Vec<f64>,
    magnetization: Vec<f64>,
}

impl MagnetizationCurve {
    pub fn new(field: Vec<f64>, magnetization: Vec<f64>) -> Result<Self> {
        if field.is_empty() || field.len() != magnetization.len() {
            return Err(domain("magnetization curve needs matching, non-empty B and M columns"));
        }
        if field.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("magnetization curve B values must be strictly increasing"));
        }
        if magnetization.iter().any(|&m| !(m >= 0.0)) || magnetization.windows(2).any(|w| w[1] < w[0]) {
            return Err(domain("magnetization curve M values must be non-negative and non-decreasing"));
        }
        Ok(Self { field, magnetization })
    }

    /// Reads a two-column CSV (B in T, M in A/m). A non-numeric first row is
    /// taken as a header.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader =
            csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
        let (mut b, mut m) = (Vec::new(), Vec::new());
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
            match (rec.len(), parse(0), parse(1)) {
                (2, Some(x), Some(y)) => {
                    b.push(x);
                    m.push(y);
                }
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        message: format!("row {}: expected two numbers", i + 1),
                    })
                }
            }
        }
        Self::new(b, m).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    /// M at field magnitude `b` (T).
    pub fn eval(&self, b: f64) -> f64 {
        let (xs, ys) = (&self.field, &self.magnetization);
        if b <= xs[0] {
            return ys[0];
        }
        if b >= xs[xs.len() - 1] {
            return ys[ys.len() - 1];
        }
        let i = xs.partition_point(|&x| x <= b) - 1;
        let t = (b - xs[i]) / (xs[i + 1] - xs[i]);
        ys[i] + t * (ys[i + 1] - ys[i])
    }
}

/// How the robot's magnetization is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Magnetization {
    /// Fixed at saturation, A/m.
    Saturated(f64),
    Curve(MagnetizationCurve),
}

/// A spherical magnetic microrobot.
#[derive(Debug, Clone, PartialEq)]
pub struct Microrobot {
    /// m
    pub diameter: f64,
    /// kg/m³
    pub density: f64,
    pub magnetization: Magnetization,
}

impl Microrobot {
    pub const DEFAULT_DENSITY: f64 = 5200.0;
    pub const DEFAULT_SATURATION: f64 = 5e5;

    /// Robot with the default density and saturation magnetization.
    pub fn new(diameter: f64) -> Result<Self> {
        let r = Self {
            diameter,
            density: Self::DEFAULT_DENSITY,
            magnetization: Magnetization::Saturated(Self::DEFAULT_SATURATION),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diameter > 0.0) || !self.diameter.is_finite() {
            return Err(domain(format!("robot diameter must be positive, got {}", self.diameter)));
        }
        if !(self.density > 0.0) {
            return Err(domain(format!("robot density must be positive, got {}", self.density)));
        }
        if let Magnetization::Saturated(m) = self.magnetization {
            if !(m >= 0.0) {
                return Err(domain(format!("magnetization must be non-negative, got {m}")));
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.diameter.powi(3) / 6.0
    }

    pub fn mass(&self) -> f64 {
        self.density * self.volume()
    }

    /// Active magnetization (A/m). Curve mode needs the field magnitude in T.
    pub fn magnetization_at(&self, field: Option<f64>) -> Result<f64> {
        match (&self.magnetization, field) {
            (Magnetization::Saturated(m), _) => Ok(*m),
            (Magnetization::Curve(c), Some(b)) => Ok(c.eval(b.abs())),
            (Magnetization::Curve(_), None) => {
                Err(Error::Config("a magnetization curve requires a field magnitude".into()))
            }
        }
    }
}

/// Stokes relaxation time ρ_p·d²/(18η), s.
pub fn relaxation_time(robot: &Microrobot, eta: f64) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(domain(format!("viscosity must be positive, got {eta}")));
    }
    Ok(robot.density * robot.diameter * robot.diameter / (18.0 * eta))
}

/// Terminal velocity in still fluid with no magnetic force, m/s.
pub fn settling_velocity(robot: &Microrobot, fluid_density: f64, eta: f64) -> Result<f64> {
    if !(fluid_density >= 0.0) {
        return Err(domain(format!("fluid density must be non-negative, got {fluid_density}")));
    }
    let tau = relaxation_time(robot, eta)?;
    Ok(tau * STANDARD_GRAVITY * (robot.density - fluid_density) / robot.density)
}

/// Which viscosity enters the relaxation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViscosityConvention {
    /// Carreau viscosity at the local shear rate.
    #[default]
    Local,
    /// η∞.
    HighShear,
    /// η₀.
    LowShear,
}

/// Robot, rheology and body force bundled for the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleModel {
    pub robot: Microrobot,
    pub carreau: CarreauModel,
    pub convention: ViscosityConvention,
    /// Gravity vector, m/s².
    pub gravity: Vec3,
    /// kg/m³
    pub fluid_density: f64,
}

impl ParticleModel {
    pub fn new(robot: Microrobot, fluid_density: f64, gravity_on: bool) -> Self {
        let gravity = if gravity_on { Vec3::new(0.0, 0.0, -STANDARD_GRAVITY) } else { Vec3::zeros() };
        Self { robot, carreau: CarreauModel::default(), convention: ViscosityConvention::Local, gravity, fluid_density }
    }

    pub fn viscosity(&self, shear_rate: f64) -> Result<f64> {
        match self.convention {
            ViscosityConvention::Local => self.carreau.apparent_viscosity(shear_rate),
            ViscosityConvention::HighShear => Ok(self.carreau.eta_inf),
            ViscosityConvention::LowShear => Ok(self.carreau.eta_0),
        }
    }

    pub fn relaxation_time(&self, shear_rate: f64) -> Result<f64> {
        relaxation_time(&self.robot, self.viscosity(shear_rate)?)
    }

    /// Net buoyancy-corrected gravity acceleration, m/s².
    pub fn gravity_acceleration(&self) -> Vec3 {
        self.gravity * ((self.robot.density - self.fluid_density) / self.robot.density)
    }

    /// Acceleration per unit gradient, (m/s²)/(T/m): V·M/m = M/ρ_p.
    pub fn magnetic_gain(&self, magnetization: f64) -> f64 {
        magnetization / self.robot.density
    }

    /// Total non-drag acceleration for a gradient `grad_b`.
    pub fn acceleration(&self, grad_b: &Vec3, magnetization: f64) -> Vec3 {
        self.gravity_acceleration() + grad_b * self.magnetic_gain(magnetization)
    }
}

/// Kinematic state of one microrobot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub time: f64,
    pub collision_count: u32,
}

impl ParticleState {
    pub fn new(position: Vec3, velocity: Vec3) -> Self {
        Self { position, velocity, time: 0.0, collision_count: 0 }
    }
}

/// `1 − e^(−x)` without cancellation.
fn one_minus_exp(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `x − 1 + e^(−x)` without cancellation.
pub(crate) fn phi(x: f64) -> f64 {
    if x < 1e-3 {
        // x²/2 − x³/6 + x⁴/24 − x⁵/120
        x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)))
    } else {
        x - one_minus_exp(x)
    }
}

/// Velocity after `dt` with frozen fluid velocity and acceleration `accel`.
pub fn step_velocity(state: &ParticleState, u_f: &Vec3, tau: f64, accel: &Vec3, dt: f64) -> Vec3 {
    let decay = (-dt / tau).exp();
    u_f + (state.velocity - u_f) * decay + accel * (tau * one_minus_exp(dt / tau))
}

/// Position after `dt` with frozen fluid velocity and acceleration `accel`.
pub fn step_position(state: &ParticleState, u_f: &Vec3, tau: f64, accel: &Vec3, dt: f64) -> Vec3 {
    let x = dt / tau;
    state.position + u_f * dt + (state.velocity - u_f) * (tau * one_minus_exp(x)) + accel * (tau * tau * phi(x))
}

/// Step size giving a fixed path increment per step, s.
pub fn time_step(u_p: &Vec3, u_f: &Vec3) -> f64 {
    let speed = u_p.norm() + u_f.norm();
    if speed > 0.0 && speed.is_finite() {
        STEP_LENGTH / speed
    } else {
        STEP_LENGTH / FALLBACK_SPEED
    }
}

/// Returns a step that ended inside the wall to the offset surface and
/// reflects the normal velocity component.
///
/// The end point is projected along the wall normal, which keeps the
/// tangential part of the step. Where the projection does not land on the
/// surface (near the apex), the particle stops at the crossing point located
/// by bisection. `before` must satisfy the wall constraint; if `after` does
/// too it is returned unchanged.
pub fn resolve_collision(
    before: &ParticleState,
    after: &ParticleState,
    geometry: &BifurcationGeometry,
    r_p: f64,
    cor: f64,
) -> ParticleState {
    let clearance = |p: &Vec3| geometry.wall_distance(p).distance - r_p;
    if clearance(&after.position) >= 0.0 {
        return *after;
    }
    let hit = geometry.wall_distance(&after.position);
    let projected = after.position + hit.normal * (r_p - hit.distance);
    let (position, normal) = if clearance(&projected) >= -WALL_SLACK {
        (projected, hit.normal)
    } else {
        let a = before.position;
        let seg = after.position - a;
        let len = seg.norm();
        let (mut lo, mut hi) = (0.0, 1.0);
        while (hi - lo) * len > COLLISION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if clearance(&(a + seg * mid)) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (a + seg * lo, geometry.wall_distance(&(a + seg * hi)).normal)
    };
    let mut out = *after;
    out.position = position;
    out.velocity = reflect(&after.velocity, &normal, cor);
    out.collision_count += 1;
    out
}

/// Reflects the component of `v` directed against the inward normal `n`.
pub fn reflect(v: &Vec3, n: &Vec3, cor: f64) -> Vec3 {
    let vn = v.dot(n);
    if vn < 0.0 {
        v - n * ((1.0 + cor) * vn)
    } else {
        *v
    }
}
