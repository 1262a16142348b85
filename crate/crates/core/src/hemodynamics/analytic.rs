use crate::error::{domain, Result};
use crate::geometry::{BifurcationGeometry, Branch};
use crate::Vec3;

use super::{profile_flux, profile_shear, profile_value, FlowField, FlowSample, BLOOD_DENSITY};

/// Composite analytic flow over a bifurcation.
///
/// Upstream of the blending zone the main vessel carries the power-law
/// profile along +x. Downstream of it each branch carries the same profile
/// shape about its own axis, scaled so that each branch takes half the inlet
/// flux. Inside the zone (one main diameter either side of the split plane)
/// the velocity is a linear blend of the two.
#[derive(Debug, Clone)]
pub struct AnalyticBifurcationFlow {
    geometry: BifurcationGeometry,
    u_max: f64,
    u_branch_max: [f64; 2],
    n_profile: f64,
    density: f64,
    blend_half_width: f64,
    side_half_width: f64,
}

impl AnalyticBifurcationFlow {
    pub fn new(geometry: &BifurcationGeometry, u_max: f64, n_profile: f64) -> Result<Self> {
        if !(u_max >= 0.0) || !u_max.is_finite() {
            return Err(domain(format!("centerline velocity must be non-negative, got {u_max}")));
        }
        if !(n_profile > 0.0) {
            return Err(domain(format!("profile exponent must be positive, got {n_profile}")));
        }
        let big_r = geometry.main_radius();
        let q_branch = profile_flux(u_max, big_r, n_profile) / 2.0;
        let branch_u = |b: Branch| {
            let rb = geometry.branch_radius(b);
            q_branch / profile_flux(1.0, rb, n_profile)
        };
        Ok(Self {
            geometry: geometry.clone(),
            u_max,
            u_branch_max: [branch_u(Branch::Desired), branch_u(Branch::Other)],
            n_profile,
            density: BLOOD_DENSITY,
            blend_half_width: geometry.dims().d_main,
            side_half_width: 0.25 * big_r,
        })
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn geometry(&self) -> &BifurcationGeometry {
        &self.geometry
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn branch_u_max(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Desired => self.u_branch_max[0],
            Branch::Other => self.u_branch_max[1],
        }
    }

    /// Weight of the branch field, 0 upstream of the blending zone, 1 past it.
    fn blend_weight(&self, x: f64) -> f64 {
        let l = self.geometry.l_main();
        let w = self.blend_half_width;
        ((x - (l - w)) / (2.0 * w)).clamp(0.0, 1.0)
    }

    fn main_part(&self, p: &Vec3) -> (Vec3, f64) {
        let big_r = self.geometry.main_radius();
        let xi = p.y.hypot(p.z) / big_r;
        let u = profile_value(self.u_max, xi, self.n_profile);
        let g = profile_shear(self.u_max, xi.min(1.0), big_r, self.n_profile);
        (Vec3::x() * u, if xi <= 1.0 { g } else { 0.0 })
    }

    fn branch_part(&self, p: &Vec3, branch: Branch) -> (Vec3, f64) {
        let axis = self.geometry.branch_axis(branch);
        let rb = self.geometry.branch_radius(branch);
        let rel = p - self.geometry.split_point();
        let s = rel.dot(&axis);
        let xi = (rel - axis * s).norm() / rb;
        let um = self.branch_u_max(branch);
        let u = profile_value(um, xi, self.n_profile);
        let g = if xi <= 1.0 { profile_shear(um, xi, rb, self.n_profile) } else { 0.0 };
        (axis * u, g)
    }
}

impl FlowField for AnalyticBifurcationFlow {
    fn sample(&self, p: &Vec3) -> Result<FlowSample> {
        let w = self.blend_weight(p.x);
        let (mut velocity, mut shear) = (Vec3::zeros(), 0.0);
        if w < 1.0 {
            let (u, g) = self.main_part(p);
            velocity += u * (1.0 - w);
            shear += g * (1.0 - w);
        }
        if w > 0.0 {
            // Side weight: desired branch above the symmetry plane, other below,
            // linear across a narrow band so the field stays continuous at y = 0.
            let sigma = (0.5 + p.y / (2.0 * self.side_half_width)).clamp(0.0, 1.0);
            for (branch, weight) in [(Branch::Desired, sigma), (Branch::Other, 1.0 - sigma)] {
                if weight > 0.0 {
                    let (u, g) = self.branch_part(p, branch);
                    velocity += u * (w * weight);
                    shear += g * (w * weight);
                }
            }
        }
        Ok(FlowSample { velocity, shear_rate: shear })
    }

    fn fluid_density(&self) -> f64 {
        self.density
    }

    fn profile_exponent(&self) -> f64 {
        self.n_profile
    }
}
