//! Blood rheology and steady flow fields over the bifurcation.

mod analytic;
mod grid;

pub use analytic::AnalyticBifurcationFlow;
pub use grid::{load_grid_field, write_grid_field, GridField, GridSpec};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Vec3;

/// Blood density, kg/m³.
pub const BLOOD_DENSITY: f64 = 1060.0;

/// Power-law exponent that keeps the inlet profile fully developed along the
/// main vessel.
pub const PROFILE_EXPONENT: f64 = 0.89;

/// Shear-thinning Carreau viscosity law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarreauModel {
    /// Low-shear limit, Pa·s.
    pub eta_0: f64,
    /// High-shear limit, Pa·s.
    pub eta_inf: f64,
    /// Time constant, s.
    pub lambda: f64,
    pub n: f64,
}

impl Default for CarreauModel {
    fn default() -> Self {
        Self { eta_0: 0.056, eta_inf: 0.00345, lambda: 3.313, n: 0.3568 }
    }
}

impl CarreauModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_0 > self.eta_inf && self.eta_inf > 0.0) {
            return Err(domain("Carreau model needs eta_0 > eta_inf > 0"));
        }
        if !(self.lambda > 0.0) || !(self.n > 0.0 && self.n < 1.0) {
            return Err(domain("Carreau model needs lambda > 0 and 0 < n < 1"));
        }
        Ok(())
    }

    /// Apparent viscosity (Pa·s) at shear rate `gamma_dot` (1/s).
    pub fn apparent_viscosity(&self, gamma_dot: f64) -> Result<f64> {
        if !(gamma_dot >= 0.0) {
            return Err(domain(format!("shear rate must be non-negative, got {gamma_dot}")));
        }
        if gamma_dot.is_infinite() {
            return Ok(self.eta_inf);
        }
        let lg = self.lambda * gamma_dot;
        let factor = (1.0 + lg * lg).powf((self.n - 1.0) / 2.0);
        Ok(self.eta_inf + (self.eta_0 - self.eta_inf) * factor)
    }
}

/// Fully developed power-law profile `u_max·[1 − (r/R)^((n+1)/n)]`.
pub fn inlet_profile(u_max: f64, r: f64, radius: f64, n_profile: f64) -> Result<f64> {
    if !(r >= 0.0) || r > radius {
        return Err(domain(format!("radial position {r} outside [0, {radius}]")));
    }
    Ok(profile_value(u_max, r / radius, n_profile))
}

/// Volumetric flux of the power-law profile over a disk of radius `radius`.
pub fn profile_flux(u_max: f64, radius: f64, n_profile: f64) -> f64 {
    u_max * std::f64::consts::PI * radius * radius * (n_profile + 1.0) / (3.0 * n_profile + 1.0)
}

/// Profile at normalized radius `xi = r/R`; zero outside the vessel.
pub(crate) fn profile_value(u_max: f64, xi: f64, n_profile: f64) -> f64 {
    if xi >= 1.0 {
        return 0.0;
    }
    let m = (n_profile + 1.0) / n_profile;
    u_max * (1.0 - xi.powf(m))
}

/// `|du/dr|` of the profile at normalized radius `xi`; zero outside.
pub(crate) fn profile_shear(u_max: f64, xi: f64, radius: f64, n_profile: f64) -> f64 {
    if xi > 1.0 {
        return 0.0;
    }
    let m = (n_profile + 1.0) / n_profile;
    u_max * m * xi.powf(m - 1.0) / radius
}

/// Velocity and shear rate at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub velocity: Vec3,
    pub shear_rate: f64,
}

/// Steady, immutable blood-velocity field.
pub trait FlowField: Send + Sync {
    fn sample(&self, p: &Vec3) -> Result<FlowSample>;

    fn velocity(&self, p: &Vec3) -> Result<Vec3> {
        Ok(self.sample(p)?.velocity)
    }

    fn shear_rate(&self, p: &Vec3) -> Result<f64> {
        Ok(self.sample(p)?.shear_rate)
    }

    /// kg/m³.
    fn fluid_density(&self) -> f64 {
        BLOOD_DENSITY
    }

    fn profile_exponent(&self) -> f64 {
        PROFILE_EXPONENT
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn carreau_limits_and_midpoint() {
        let c = CarreauModel::default();
        assert_relative_eq!(c.apparent_viscosity(0.0).unwrap(), 0.056);
        assert_relative_eq!(c.apparent_viscosity(f64::INFINITY).unwrap(), 0.00345);
        assert_relative_eq!(c.apparent_viscosity(1e12).unwrap(), 0.00345, epsilon = 1e-6);
        // 0.00345 + 0.05255·(1 + 3.313²)^(−0.3216)
        assert_relative_eq!(c.apparent_viscosity(1.0).unwrap(), 0.0271, epsilon = 5e-5);
        assert!(c.apparent_viscosity(-1.0).is_err());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn profile_examples() {
        let r = 1e-3;
        assert_relative_eq!(inlet_profile(0.45, 0.0, r, 0.89).unwrap(), 0.45);
        assert_relative_eq!(inlet_profile(0.45, r, r, 0.89).unwrap(), 0.0);
        assert_relative_eq!(inlet_profile(1.0, r / 2.0, r, 0.89).unwrap(), 0.7705, epsilon = 1e-4);
        assert!(inlet_profile(1.0, 1.1 * r, r, 0.89).is_err());
    }

    #[test]
    fn profile_shear_matches_finite_difference() {
        let (u, big_r, n) = (0.5, 1e-3, 0.89);
        for xi in [0.1, 0.4, 0.8, 0.99] {
            let h = 1e-9;
            let fd = (profile_value(u, xi - h / big_r, n) - profile_value(u, xi + h / big_r, n)) / (2.0 * h);
            assert_relative_eq!(profile_shear(u, xi, big_r, n), fd, max_relative = 1e-5);
        }
    }
}
