//! Idealized planar Y-bifurcation.
//!
//! The main vessel is a cylinder along +x from the inlet plane `x = 0` to the
//! flow-split plane `x = L`. Two straight daughter cylinders leave the split
//! point `S = (L, 0, 0)` at `±branch_half_angle`; the desired branch opens
//! toward +y. The vessel wall is the boundary of the union of the three
//! cylinders, with a sharp apex wedge where the daughter walls meet.
//!
//! Wall distance is the largest per-vessel depth, which is exact away from the
//! junction and a lower bound (conservative for the wall constraint) inside it.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::Vec3;

const MM: f64 = 1e-3;

/// Branch diameter from Murray's law for a symmetric split, `D₁³ = 2·D₂³`.
pub fn murray_branch_diameter(d_main: f64) -> Result<f64> {
    if !(d_main > 0.0) || !d_main.is_finite() {
        return Err(domain(format!("main diameter must be positive, got {d_main}")));
    }
    Ok(d_main * 2f64.powf(-1.0 / 3.0))
}

/// Cerebral artery presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArteryPreset {
    #[serde(rename = "ACA")]
    Aca,
    #[serde(rename = "MCA")]
    Mca,
    #[serde(rename = "PCA")]
    Pca,
}

impl ArteryPreset {
    pub const ALL: [ArteryPreset; 3] = [ArteryPreset::Aca, ArteryPreset::Mca, ArteryPreset::Pca];

    /// `(D₁, D₂ = D₃, L)` in millimetres.
    pub fn dimensions_mm(self) -> (f64, f64, f64) {
        match self {
            ArteryPreset::Aca => (2.00, 1.59, 20.0),
            ArteryPreset::Mca => (2.40, 1.90, 30.0),
            ArteryPreset::Pca => (1.80, 1.27, 10.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArteryPreset::Aca => "ACA",
            ArteryPreset::Mca => "MCA",
            ArteryPreset::Pca => "PCA",
        }
    }
}

impl fmt::Display for ArteryPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArteryPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ACA" => Ok(ArteryPreset::Aca),
            "MCA" => Ok(ArteryPreset::Mca),
            "PCA" => Ok(ArteryPreset::Pca),
            other => Err(Error::Config(format!("unknown artery preset `{other}`"))),
        }
    }
}

/// A preset artery, optionally with every diameter widened by a fixed amount.
///
/// Displayed as `ACA` or `ACA+0.2` (millimetres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArteryModel {
    pub preset: ArteryPreset,
    pub widen_mm: f64,
}

impl ArteryModel {
    pub fn preset(preset: ArteryPreset) -> Self {
        Self { preset, widen_mm: 0.0 }
    }

    pub fn widened(preset: ArteryPreset, widen_mm: f64) -> Self {
        Self { preset, widen_mm }
    }

    /// Main artery diameter, mm.
    pub fn main_diameter_mm(&self) -> f64 {
        self.preset.dimensions_mm().0 + self.widen_mm
    }

    pub fn geometry(&self) -> Result<BifurcationGeometry> {
        let (d1, d2, l) = self.preset.dimensions_mm();
        let w = self.widen_mm;
        BifurcationGeometry::new(GeometryDims {
            d_main: (d1 + w) * MM,
            d_branch_desired: (d2 + w) * MM,
            d_branch_other: (d2 + w) * MM,
            l_main: l * MM,
            branch_half_angle: FRAC_PI_4,
            l_branch: 4.0 * (d1 + w) * MM,
        })
    }
}

impl fmt::Display for ArteryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.widen_mm == 0.0 {
            write!(f, "{}", self.preset)
        } else {
            write!(f, "{}{:+}", self.preset, self.widen_mm)
        }
    }
}

impl FromStr for ArteryModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.find(['+', '-']) {
            None => Ok(ArteryModel::preset(s.parse()?)),
            Some(i) => {
                let preset = s[..i].parse()?;
                let widen_mm = s[i..].parse::<f64>().map_err(|_| Error::Config(format!("bad artery label `{s}`")))?;
                Ok(ArteryModel::widened(preset, widen_mm))
            }
        }
    }
}

/// Raw dimensions, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryDims {
    pub d_main: f64,
    pub d_branch_desired: f64,
    pub d_branch_other: f64,
    pub l_main: f64,
    pub branch_half_angle: f64,
    pub l_branch: f64,
}

/// Which daughter vessel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Opens toward +y.
    Desired,
    Other,
}

/// Symmetric-axis Y-bifurcation in the XY plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationGeometry {
    dims: GeometryDims,
    /// x-offset of the apex tip from the split plane (in the z = 0 plane).
    apex_offset: f64,
}

/// Result of a wall query: distance to the nearest wall (negative outside)
/// and the inward unit normal there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallQuery {
    pub distance: f64,
    pub normal: Vec3,
}

impl BifurcationGeometry {
    pub fn new(dims: GeometryDims) -> Result<Self> {
        let lengths = [
            ("d_main", dims.d_main),
            ("d_branch_desired", dims.d_branch_desired),
            ("d_branch_other", dims.d_branch_other),
            ("l_main", dims.l_main),
            ("l_branch", dims.l_branch),
        ];
        for (name, v) in lengths {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        let a = dims.branch_half_angle;
        if !(a > 0.0 && a < std::f64::consts::FRAC_PI_2) {
            return Err(domain(format!("branch half-angle must lie in (0, 90) degrees, got {} rad", a)));
        }
        let r2 = dims.d_branch_desired / 2.0;
        let r3 = dims.d_branch_other / 2.0;
        // Inner walls cross where h·sinθ − r2 = −(h·sinθ − r3).
        let apex_offset = (r2 + r3) / (2.0 * a.sin());
        Ok(Self { dims, apex_offset })
    }

    /// Anatomical preset with the default 45° half-angle and `l_branch = 4·D₁`.
    pub fn preset(preset: ArteryPreset) -> Self {
        ArteryModel::preset(preset).geometry().expect("preset dimensions are valid")
    }

    /// Explicit geometry with Murray branches, e.g. the 5 mm in-vitro phantom.
    pub fn with_murray_branches(d_main: f64, l_main: f64, branch_half_angle: f64) -> Result<Self> {
        let d_branch = murray_branch_diameter(d_main)?;
        Self::new(GeometryDims {
            d_main,
            d_branch_desired: d_branch,
            d_branch_other: d_branch,
            l_main,
            branch_half_angle,
            l_branch: 4.0 * d_main,
        })
    }

    pub fn dims(&self) -> &GeometryDims {
        &self.dims
    }

    pub fn main_radius(&self) -> f64 {
        self.dims.d_main / 2.0
    }

    pub fn branch_radius(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Desired => self.dims.d_branch_desired / 2.0,
            Branch::Other => self.dims.d_branch_other / 2.0,
        }
    }

    pub fn l_main(&self) -> f64 {
        self.dims.l_main
    }

    pub fn l_branch(&self) -> f64 {
        self.dims.l_branch
    }

    pub fn branch_half_angle(&self) -> f64 {
        self.dims.branch_half_angle
    }

    pub fn split_point(&self) -> Vec3 {
        Vec3::new(self.dims.l_main, 0.0, 0.0)
    }

    pub fn apex_offset(&self) -> f64 {
        self.apex_offset
    }

    /// Unit axis direction of a branch.
    pub fn branch_axis(&self, branch: Branch) -> Vec3 {
        let (s, c) = self.dims.branch_half_angle.sin_cos();
        match branch {
            Branch::Desired => Vec3::new(c, s, 0.0),
            Branch::Other => Vec3::new(c, -s, 0.0),
        }
    }

    /// In-plane unit normal of a branch axis pointing away from the apex.
    pub fn branch_outer_normal(&self, branch: Branch) -> Vec3 {
        let (s, c) = self.dims.branch_half_angle.sin_cos();
        match branch {
            Branch::Desired => Vec3::new(-s, c, 0.0),
            Branch::Other => Vec3::new(-s, -c, 0.0),
        }
    }

    /// Branch on the side of the symmetry plane where `p` lies (ties go to
    /// the desired branch).
    pub fn side(&self, p: &Vec3) -> Branch {
        if p.y >= 0.0 {
            Branch::Desired
        } else {
            Branch::Other
        }
    }

    /// Distance along a branch axis from the split point.
    pub fn branch_progress(&self, p: &Vec3, branch: Branch) -> f64 {
        (p - self.split_point()).dot(&self.branch_axis(branch))
    }

    /// Outlet-plane center of a branch.
    pub fn outlet_center(&self, branch: Branch) -> Vec3 {
        self.split_point() + self.branch_axis(branch) * self.dims.l_branch
    }

    /// If `p` has passed one of the branch outlet planes, which one.
    pub fn outlet_reached(&self, p: &Vec3) -> Option<Branch> {
        let side = self.side(p);
        (self.branch_progress(p, side) >= self.dims.l_branch).then_some(side)
    }

    /// Local vessel radius at axial station x (main radius before the split,
    /// desired-branch radius after it).
    pub fn local_radius(&self, x: f64, branch: Branch) -> f64 {
        if x <= self.dims.l_main {
            self.main_radius()
        } else {
            self.branch_radius(branch)
        }
    }

    /// Distance to the nearest wall and the inward normal there. Negative
    /// outside the vessel network.
    pub fn wall_distance(&self, p: &Vec3) -> WallQuery {
        let main = self.main_depth(p);
        let desired = self.branch_depth(p, Branch::Desired);
        let other = self.branch_depth(p, Branch::Other);
        let mut best = main;
        // Ties prefer the main vessel, then the desired branch.
        if desired.distance > best.distance {
            best = desired;
        }
        if other.distance > best.distance {
            best = other;
        }
        best
    }

    fn main_depth(&self, p: &Vec3) -> WallQuery {
        let radial = Vec3::new(0.0, p.y, p.z);
        let rho = radial.norm();
        let r_hat = if rho > 0.0 { radial / rho } else { Vec3::y() };
        let cap_x = self.dims.l_main + self.apex_offset;
        capped_cylinder_depth(rho, self.main_radius(), cap_x - p.x, r_hat, -Vec3::x())
    }

    fn branch_depth(&self, p: &Vec3, branch: Branch) -> WallQuery {
        let axis = self.branch_axis(branch);
        let rel = p - self.split_point();
        let s = rel.dot(&axis);
        let radial = rel - axis * s;
        let rho = radial.norm();
        let r_hat = if rho > 0.0 {
            radial / rho
        } else {
            let up = Vec3::y() - axis * axis.y;
            up / up.norm()
        };
        capped_cylinder_depth(rho, self.branch_radius(branch), s, r_hat, axis)
    }

    /// Entrance positions 1..=5 at the inlet: top wall, mid top-centre,
    /// centre, mid bottom-centre, bottom wall.
    pub fn entrance_positions(&self, r_p: f64) -> Result<[Vec3; 5]> {
        let big_r = self.main_radius();
        if !(r_p >= 0.0) || r_p >= big_r {
            return Err(domain(format!("microrobot radius {r_p} m must be below the main-vessel radius {big_r} m")));
        }
        let h = big_r - r_p;
        Ok([h, h / 2.0, 0.0, -h / 2.0, -h].map(|y| Vec3::new(0.0, y, 0.0)))
    }

    /// Intermediate targets `k_up` diameters upstream and `k_down` diameters
    /// downstream of the split plane, plus the desired outlet.
    pub fn place_targets(&self, d_p: f64, upstream_k: u8, downstream_k: u8) -> Result<TargetPlan> {
        for (name, k) in [("upstream", upstream_k), ("downstream", downstream_k)] {
            if !(1..=4).contains(&k) {
                return Err(domain(format!("{name} target offset must be 1..=4 diameters, got {k}")));
            }
        }
        if !(d_p > 0.0) {
            return Err(domain(format!("microrobot diameter must be positive, got {d_p}")));
        }
        let r_p = d_p / 2.0;
        let l = self.dims.l_main;
        if !(l - 4.0 * d_p > 0.0) {
            return Err(domain(format!(
                "main vessel ({l} m) is too short for targets four diameters ({d_p} m) upstream"
            )));
        }
        let big_r = self.main_radius();
        let r_branch = self.branch_radius(Branch::Desired);
        if r_p >= big_r || r_p >= r_branch {
            return Err(domain(format!(
                "microrobot radius {r_p} m does not fit the vessels (main {big_r} m, branch {r_branch} m)"
            )));
        }

        let upstream_point = Vec3::new(l - upstream_k as f64 * d_p, (big_r - r_p) / 2.0, 0.0);

        // Station x = L + k·d_p on the desired-branch axis, shifted toward the
        // outer wall by half the free radius, measured normal to the axis.
        let (s, c) = self.dims.branch_half_angle.sin_cos();
        let dx = downstream_k as f64 * d_p;
        let axis_y = dx * s / c;
        let downstream_point = Vec3::new(l + dx, axis_y + (r_branch - r_p) / (2.0 * c), 0.0);

        let plan = TargetPlan {
            upstream_k,
            downstream_k,
            upstream_point,
            downstream_point,
            final_point: self.outlet_center(Branch::Desired),
        };
        for (name, t) in [("upstream", plan.upstream_point), ("downstream", plan.downstream_point)] {
            if self.wall_distance(&t).distance < r_p {
                return Err(domain(format!("{name} target falls outside the vessel interior")));
            }
        }
        Ok(plan)
    }
}

/// Depth inside a cylinder capped on one side, in local (radial, axial)
/// coordinates. `axial` is the signed distance to the cap plane (positive
/// on the open side). Outside the cylinder the result is minus the exact
/// distance to it.
fn capped_cylinder_depth(rho: f64, radius: f64, axial: f64, r_hat: Vec3, cap_inward: Vec3) -> WallQuery {
    let lateral = radius - rho;
    if lateral >= 0.0 && axial >= 0.0 {
        if lateral <= axial {
            WallQuery { distance: lateral, normal: -r_hat }
        } else {
            WallQuery { distance: axial, normal: cap_inward }
        }
    } else {
        let qr = (-lateral).max(0.0);
        let qa = (-axial).max(0.0);
        let dist = qr.hypot(qa);
        let inward = -r_hat * qr + cap_inward * qa;
        WallQuery { distance: -dist, normal: inward / dist }
    }
}

/// Intermediate targets and the final outlet point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPlan {
    pub upstream_k: u8,
    pub downstream_k: u8,
    pub upstream_point: Vec3,
    pub downstream_point: Vec3,
    pub final_point: Vec3,
}

/// Navigation regions delimited by the intermediate targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    G1,
    G2,
    G3,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::G1, Region::G2, Region::G3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::G1 => "G1",
            Region::G2 => "G2",
            Region::G3 => "G3",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Region of a position, by axial station relative to the target stations.
pub fn classify_region(p: &Vec3, plan: &TargetPlan) -> Region {
    if p.x < plan.upstream_point.x {
        Region::G1
    } else if p.x < plan.downstream_point.x {
        Region::G2
    } else {
        Region::G3
    }
}

/// Explicit geometry as read from a config file (mm and degrees).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub d_main_mm: f64,
    #[serde(default)]
    pub d_branch_mm: Option<f64>,
    #[serde(default)]
    pub d_branch_other_mm: Option<f64>,
    pub l_main_mm: f64,
    #[serde(default = "default_half_angle_deg")]
    pub branch_half_angle_deg: f64,
    #[serde(default)]
    pub l_branch_mm: Option<f64>,
}

fn default_half_angle_deg() -> f64 {
    45.0
}

impl GeometryConfig {
    pub fn build(&self) -> Result<BifurcationGeometry> {
        let d_main = self.d_main_mm * MM;
        let d_branch = match self.d_branch_mm {
            Some(d) => d * MM,
            None => murray_branch_diameter(d_main)?,
        };
        let d_other = self.d_branch_other_mm.map(|d| d * MM).unwrap_or(d_branch);
        BifurcationGeometry::new(GeometryDims {
            d_main,
            d_branch_desired: d_branch,
            d_branch_other: d_other,
            l_main: self.l_main_mm * MM,
            branch_half_angle: self.branch_half_angle_deg.to_radians(),
            l_branch: self.l_branch_mm.map(|l| l * MM).unwrap_or(4.0 * d_main),
        })
    }

    pub fn load(path: &Path) -> Result<BifurcationGeometry> {
        let text = std::fs::read_to_string(path)?;
        let cfg: GeometryConfig =
            toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.build()
    }
}
