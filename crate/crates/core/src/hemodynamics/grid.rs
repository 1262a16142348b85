//! Structured-grid velocity fields imported from external CFD runs.
//!
//! File layout (whitespace separated, `#` starts a comment line):
//!
//! ```text
//! MAGNAV-GRID 1
//! dims <nx> <ny> <nz>
//! origin <ox> <oy> <oz>
//! spacing <dx> <dy> <dz>
//! units m m/s
//! <mask> <ux> <uy> <uz>      # nx·ny·nz records, x fastest, then y, then z
//! ```
//!
//! `mask` is 1 for nodes inside the fluid and 0 otherwise. Spacing must be
//! equal on all three axes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::Vec3;

use super::{FlowField, FlowSample, BLOOD_DENSITY, PROFILE_EXPONENT};

const MAGIC: &str = "MAGNAV-GRID 1";

/// Grid lattice description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub origin: Vec3,
    pub spacing: f64,
}

impl GridSpec {
    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }
}

/// Velocity samples on a uniform lattice with a fluid mask.
#[derive(Debug, Clone)]
pub struct GridField {
    spec: GridSpec,
    velocity: Vec<Vec3>,
    mask: Vec<bool>,
    density: f64,
    n_profile: f64,
}

impl GridField {
    pub fn new(spec: GridSpec, velocity: Vec<Vec3>, mask: Vec<bool>) -> Result<Self> {
        if spec.dims.iter().any(|&n| n < 2) {
            return Err(Error::Field(format!("grid needs at least 2 nodes per axis, got {:?}", spec.dims)));
        }
        if !(spec.spacing > 0.0) || !spec.spacing.is_finite() {
            return Err(Error::Field(format!("grid spacing must be positive, got {}", spec.spacing)));
        }
        let n = spec.node_count();
        if velocity.len() != n || mask.len() != n {
            return Err(Error::Field(format!(
                "expected {n} nodes, got {} velocities and {} mask flags",
                velocity.len(),
                mask.len()
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::Field("grid mask is empty".into()));
        }
        Ok(Self { spec, velocity, mask, density: BLOOD_DENSITY, n_profile: PROFILE_EXPONENT })
    }

    /// Samples `field` at every node; nodes where `inside` is false are masked out.
    pub fn from_fn(spec: GridSpec, mut field: impl FnMut(&Vec3) -> Option<Vec3>) -> Result<Self> {
        let n = spec.node_count();
        let mut velocity = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        for k in 0..spec.dims[2] {
            for j in 0..spec.dims[1] {
                for i in 0..spec.dims[0] {
                    match field(&spec.node_position(i, j, k)) {
                        Some(u) => {
                            velocity.push(u);
                            mask.push(true);
                        }
                        None => {
                            velocity.push(Vec3::zeros());
                            mask.push(false);
                        }
                    }
                }
            }
        }
        Self::new(spec, velocity, mask)
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Trilinear interpolation; masked-out corners count as zero velocity.
    pub fn interpolate(&self, p: &Vec3) -> Result<Vec3> {
        let s = &self.spec;
        let local = (p - s.origin) / s.spacing;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let t = local[a];
            let last = (s.dims[a] - 1) as f64;
            if !(t >= 0.0 && t <= last) {
                return Err(Error::Field(format!("point {:?} lies outside the grid", p.as_slice())));
            }
            let i = (t.floor() as usize).min(s.dims[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = Vec3::zeros();
        let mut any_inside = false;
        for corner in 0..8 {
            let off = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            for a in 0..3 {
                w *= if off[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            let idx = s.index(base[0] + off[0], base[1] + off[1], base[2] + off[2]);
            if self.mask[idx] {
                any_inside = true;
                acc += self.velocity[idx] * w;
            }
        }
        if !any_inside {
            return Err(Error::Field(format!("point {:?} lies outside the fluid mask", p.as_slice())));
        }
        Ok(acc)
    }

    /// Velocity gradient `J[i][j] = ∂u_i/∂x_j` by central differences over one
    /// grid spacing, falling back to one-sided differences at the mask edge.
    fn velocity_gradient(&self, p: &Vec3, u0: &Vec3) -> [[f64; 3]; 3] {
        let h = self.spec.spacing;
        let mut jac = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut e = Vec3::zeros();
            e[j] = h;
            let fwd = self.interpolate(&(p + e)).ok();
            let bwd = self.interpolate(&(p - e)).ok();
            let col = match (fwd, bwd) {
                (Some(f), Some(b)) => (f - b) / (2.0 * h),
                (Some(f), None) => (f - u0) / h,
                (None, Some(b)) => (u0 - b) / h,
                (None, None) => Vec3::zeros(),
            };
            for i in 0..3 {
                jac[i][j] = col[i];
            }
        }
        jac
    }
}

impl FlowField for GridField {
    fn sample(&self, p: &Vec3) -> Result<FlowSample> {
        let velocity = self.interpolate(p)?;
        let jac = self.velocity_gradient(p, &velocity);
        // γ̇ = sqrt(2 D:D) with D the symmetric part of J.
        let mut dd = 0.0;
        for (i, row) in jac.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let d = 0.5 * (v + jac[j][i]);
                dd += d * d;
            }
        }
        Ok(FlowSample { velocity, shear_rate: (2.0 * dd).sqrt() })
    }

    fn fluid_density(&self) -> f64 {
        self.density
    }

    fn profile_exponent(&self) -> f64 {
        self.n_profile
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), message: message.into() }
}

/// Reads a grid field file.
pub fn load_grid_field(path: &Path) -> Result<GridField> {
    let text = std::fs::read_to_string(path)?;
    parse_grid_field(&text, path)
}

fn parse_grid_field(text: &str, path: &Path) -> Result<GridField> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut header = |key: &str| -> Result<(usize, Vec<String>)> {
        let (no, line) = lines.next().ok_or_else(|| parse_err(path, format!("missing `{key}` line")))?;
        let mut it = line.split_whitespace();
        if it.next() != Some(key) {
            return Err(parse_err(path, format!("line {no}: expected `{key}`")));
        }
        Ok((no, it.map(str::to_owned).collect()))
    };

    let (no, magic) = header("MAGNAV-GRID")?;
    if magic != ["1"] {
        return Err(parse_err(path, format!("line {no}: unsupported header, expected `{MAGIC}`")));
    }
    let nums = |no: usize, v: Vec<String>, n: usize| -> Result<Vec<f64>> {
        if v.len() != n {
            return Err(parse_err(path, format!("line {no}: expected {n} values")));
        }
        v.iter()
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(path, format!("line {no}: bad number `{s}`"))))
            .collect()
    };
    let (no, d) = header("dims")?;
    let dims = nums(no, d, 3)?;
    if dims.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
        return Err(parse_err(path, format!("line {no}: dims must be positive integers")));
    }
    let dims = [dims[0] as usize, dims[1] as usize, dims[2] as usize];
    let (no, o) = header("origin")?;
    let o = nums(no, o, 3)?;
    let (no, sp) = header("spacing")?;
    let sp = nums(no, sp, 3)?;
    if sp.iter().any(|&v| !(v > 0.0)) {
        return Err(parse_err(path, format!("line {no}: spacing must be positive")));
    }
    if sp.iter().any(|&v| ((v - sp[0]) / sp[0]).abs() > 1e-9) {
        return Err(Error::Field(format!("non-uniform grid spacing {sp:?} in {}", path.display())));
    }
    let (no, units) = header("units")?;
    if units != ["m", "m/s"] {
        return Err(parse_err(path, format!("line {no}: units must be `m m/s`")));
    }

    let spec = GridSpec { dims, origin: Vec3::new(o[0], o[1], o[2]), spacing: sp[0] };
    let n = spec.node_count();
    let mut velocity = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for (no, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(parse_err(path, format!("line {no}: expected `mask ux uy uz`")));
        }
        let inside = match f[0] {
            "1" => true,
            "0" => false,
            other => return Err(parse_err(path, format!("line {no}: mask flag must be 0 or 1, got `{other}`"))),
        };
        let mut u = Vec3::zeros();
        for a in 0..3 {
            u[a] = f[a + 1].parse().map_err(|_| parse_err(path, format!("line {no}: bad number `{}`", f[a + 1])))?;
        }
        mask.push(inside);
        velocity.push(u);
    }
    if velocity.len() != n {
        return Err(parse_err(path, format!("expected {n} node records, found {}", velocity.len())));
    }
    GridField::new(spec, velocity, mask)
}

/// Writes a grid field in the format read by [`load_grid_field`].
pub fn write_grid_field(path: &Path, field: &GridField) -> Result<()> {
    let s = &field.spec;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dims {} {} {}", s.dims[0], s.dims[1], s.dims[2]);
    let _ = writeln!(out, "origin {} {} {}", s.origin.x, s.origin.y, s.origin.z);
    let _ = writeln!(out, "spacing {} {} {}", s.spacing, s.spacing, s.spacing);
    let _ = writeln!(out, "units m m/s");
    for (u, m) in field.velocity.iter().zip(&field.mask) {
        let _ = writeln!(out, "{} {} {} {}", u8::from(*m), u.x, u.y, u.z);
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cube(n: usize, h: f64) -> GridSpec {
        GridSpec { dims: [n, n, n], origin: Vec3::new(-0.5, -0.5, -0.5) * (h * (n - 1) as f64), spacing: h }
    }

    #[test]
    fn uniform_field_has_zero_shear() {
        let field = GridField::from_fn(cube(5, 0.1), |_| Some(Vec3::new(0.3, 0.0, 0.0))).unwrap();
        let s = field.sample(&Vec3::new(0.01, -0.07, 0.12)).unwrap();
        assert_relative_eq!(s.velocity, Vec3::new(0.3, 0.0, 0.0), epsilon = 1e-15);
        assert!(s.shear_rate.abs() < 1e-12);
    }

    #[test]
    fn trilinear_functions_are_reproduced() {
        let f = |p: &Vec3| Vec3::new(1.0 + 2.0 * p.x * p.y * p.z - p.z, p.x * p.y, 3.0 * p.y * p.z + p.x);
        let field = GridField::from_fn(cube(6, 0.2), |p| Some(f(p))).unwrap();
        for p in [Vec3::new(0.13, -0.21, 0.07), Vec3::new(-0.49, 0.49, 0.0), Vec3::new(0.31, 0.02, -0.4)] {
            assert_relative_eq!(field.interpolate(&p).unwrap(), f(&p), epsilon = 1e-13);
        }
        assert!(field.interpolate(&Vec3::new(0.6, 0.0, 0.0)).is_err());
    }

    #[test]
    fn shear_of_linear_couette_flow() {
        let field = GridField::from_fn(cube(6, 0.1), |p| Some(Vec3::new(4.0 * p.y, 0.0, 0.0))).unwrap();
        assert_relative_eq!(field.shear_rate(&Vec3::new(0.05, 0.02, -0.1)).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn masked_cells() {
        let field = GridField::from_fn(cube(3, 1.0), |p| (p.x < 0.5).then(Vec3::x)).unwrap();
        // Half of the corners are inside at x = 0.5.
        assert_relative_eq!(field.interpolate(&Vec3::new(0.5, 0.0, 0.0)).unwrap().x, 0.5);
        assert!(GridField::from_fn(cube(3, 1.0), |_| None).is_err());
    }

    #[test]
    fn file_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.grid");
        let field = GridField::from_fn(cube(3, 0.5), |p| Some(Vec3::new(p.x, 2.0 * p.y, 0.25))).unwrap();
        write_grid_field(&path, &field).unwrap();
        let back = load_grid_field(&path).unwrap();
        let q = Vec3::new(0.1, 0.2, -0.3);
        assert_eq!(back.interpolate(&q).unwrap(), field.interpolate(&q).unwrap());

        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        std::fs::write(&path, truncated).unwrap();
        assert!(matches!(load_grid_field(&path), Err(Error::Parse { .. })));

        let skewed = text.replacen("spacing 0.5 0.5 0.5", "spacing 0.5 0.25 0.5", 1);
        std::fs::write(&path, skewed).unwrap();
        assert!(matches!(load_grid_field(&path), Err(Error::Field(_))));

        let empty = text.lines().map(|l| if l.starts_with("1 ") { l.replacen('1', "0", 1) } else { l.to_owned() });
        std::fs::write(&path, empty.collect::<Vec<_>>().join("\n")).unwrap();
        assert!(matches!(load_grid_field(&path), Err(Error::Field(_))));
    }
}
