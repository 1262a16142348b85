//! Built-in oracle suite: each check compares a model routine with an
//! independent evaluation.

use std::fmt;

use crate::control::required_gradient;
use crate::dynamics::{
    reflect, relaxation_time, resolve_collision, settling_velocity, step_position, step_velocity, time_step,
    Microrobot, ParticleModel, ParticleState, ViscosityConvention, FALLBACK_SPEED,
};
use crate::geometry::{ArteryPreset, BifurcationGeometry};
use crate::hemodynamics::{
    inlet_profile, load_grid_field, profile_flux, write_grid_field, CarreauModel, GridField, GridSpec, BLOOD_DENSITY,
    PROFILE_EXPONENT,
};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error against its tolerance.
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:<24} {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let n = self.checks.iter().filter(|c| c.passed).count();
        write!(f, "{n}/{} checks passed", self.checks.len())
    }
}

fn check(name: &'static str, worst: f64, tol: f64, unit: &str) -> CheckResult {
    CheckResult {
        name,
        passed: worst.is_finite() && worst <= tol,
        detail: format!("max error {worst:.3e} {unit} (tol {tol:e})"),
    }
}

fn failed(name: &'static str, e: impl fmt::Display) -> CheckResult {
    CheckResult { name, passed: false, detail: format!("error: {e}") }
}

/// Carreau viscosity against the closed form over six decades of shear.
pub fn check_carreau(model: &CarreauModel) -> CheckResult {
    let reference = CarreauModel::default();
    let mut worst: f64 = 0.0;
    for k in -30..=30 {
        let g = 10f64.powf(k as f64 / 10.0);
        let expect = reference.eta_inf
            + (reference.eta_0 - reference.eta_inf)
                * (1.0 + (reference.lambda * g).powi(2)).powf((reference.n - 1.0) / 2.0);
        match model.apparent_viscosity(g) {
            Ok(v) => worst = worst.max((v - expect).abs()),
            Err(e) => return failed("carreau", e),
        }
    }
    check("carreau", worst, 1e-12, "Pa·s")
}

/// Profile flux by composite Simpson quadrature against the closed form.
pub fn check_profile_flux() -> CheckResult {
    let (u_max, radius, n) = (0.45, 1e-3, PROFILE_EXPONENT);
    let m = 200_000;
    let h = radius / m as f64;
    let mut sum = 0.0;
    for i in 0..=m {
        let r = i as f64 * h;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        match inlet_profile(u_max, r, radius, n) {
            Ok(u) => sum += w * u * r,
            Err(e) => return failed("profile-flux", e),
        }
    }
    let numeric = 2.0 * std::f64::consts::PI * sum * h / 3.0;
    let closed = u_max * std::f64::consts::PI * radius * radius * (n + 1.0) / (3.0 * n + 1.0);
    let worst = ((profile_flux(u_max, radius, n) - closed).abs() / closed).max((numeric - closed).abs() / closed);
    check("profile-flux", worst, 1e-9, "relative")
}

fn rk4(x0: Vec3, u0: Vec3, u_f: Vec3, tau: f64, a: Vec3, dt: f64, n: usize) -> (Vec3, Vec3) {
    let h = dt / n as f64;
    let f = |u: Vec3| (u_f - u) / tau + a;
    let (mut x, mut u) = (x0, u0);
    for _ in 0..n {
        let k1 = f(u);
        let k2 = f(u + k1 * (h / 2.0));
        let k3 = f(u + k2 * (h / 2.0));
        let k4 = f(u + k3 * h);
        x += (u * 6.0 + (k1 + k2 + k3) * h) * (h / 6.0);
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    (x, u)
}

/// Closed-form velocity and position updates against fine RK4.
pub fn check_integrator() -> CheckResult {
    let cases = [
        (Vec3::new(0.1, -0.05, 0.02), Vec3::new(0.4, 0.0, 0.0), 0.02, Vec3::new(1.0, 3.0, -2.0), 0.005),
        (Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.3, 0.1, 0.0), 1e-3, Vec3::new(-4.0, 0.5, 0.0), 2e-3),
        (Vec3::new(0.5, 0.2, -0.1), Vec3::zeros(), 0.08, Vec3::new(0.0, 0.0, -7.8), 1e-4),
        (Vec3::new(-0.2, 0.3, 0.0), Vec3::new(0.6, -0.1, 0.0), 5e-4, Vec3::new(2.0, -9.0, 1.0), 1e-3),
    ];
    let mut worst: f64 = 0.0;
    for (u0, u_f, tau, a, dt) in cases {
        let s = ParticleState::new(Vec3::new(1e-3, -2e-4, 5e-5), u0);
        let (x_ref, u_ref) = rk4(s.position, u0, u_f, tau, a, dt, 2000);
        let x = step_position(&s, &u_f, tau, &a, dt);
        let u = step_velocity(&s, &u_f, tau, &a, dt);
        worst = worst.max((x - x_ref).norm() / (x_ref - s.position).norm());
        worst = worst.max((u - u_ref).norm() / u_ref.norm());
    }
    check("integrator-rk4", worst, 1e-6, "relative")
}

/// Terminal velocity of a sphere released in still fluid.
pub fn check_settling() -> CheckResult {
    let run = || -> crate::Result<f64> {
        let robot = Microrobot::new(500e-6)?;
        let eta = CarreauModel::default().eta_inf;
        let expect = settling_velocity(&robot, BLOOD_DENSITY, eta)?;
        let closed = relaxation_time(&robot, eta)? * 9.81 * (robot.density - BLOOD_DENSITY) / robot.density;
        let mut model = ParticleModel::new(robot, BLOOD_DENSITY, true);
        model.convention = ViscosityConvention::HighShear;
        let tau = model.relaxation_time(0.0)?;
        let accel = model.acceleration(&Vec3::zeros(), 0.0);
        let mut s = ParticleState::new(Vec3::zeros(), Vec3::zeros());
        while s.time < 20.0 * tau {
            let dt = time_step(&s.velocity, &Vec3::zeros());
            s.velocity = step_velocity(&s, &Vec3::zeros(), tau, &accel, dt);
            s.time += dt;
        }
        Ok(((-s.velocity.z - closed).abs() / closed).max((expect - closed).abs() / closed))
    };
    match run() {
        Ok(w) => check("settling-velocity", w, 1e-3, "relative"),
        Err(e) => failed("settling-velocity", e),
    }
}

/// Commanded gradient followed by one closed-form step lands on the target.
pub fn check_inverse_identity() -> CheckResult {
    let run = || -> crate::Result<f64> {
        let mut worst: f64 = 0.0;
        for (d, gravity) in [(500e-6, true), (100e-6, true), (50e-6, false), (1000e-6, true)] {
            let model = ParticleModel::new(Microrobot::new(d)?, BLOOD_DENSITY, gravity);
            let m = 5e5;
            let tau = model.relaxation_time(200.0)?;
            let s = ParticleState::new(Vec3::new(2e-3, 1e-4, -5e-5), Vec3::new(0.35, -0.02, 0.01));
            for (u_f, target) in [
                (Vec3::new(0.4, 0.0, 0.0), Vec3::new(4e-3, 4e-4, 0.0)),
                (Vec3::new(0.2, 0.05, 0.0), Vec3::new(2.5e-3, -3e-4, 1e-4)),
                (Vec3::zeros(), Vec3::new(2.2e-3, 2e-4, 0.0)),
            ] {
                let cmd = required_gradient(&s, &u_f, tau, &model, m, &target)?;
                let dist = (target - s.position).norm();
                let t = if u_f.norm() > 0.0 { dist / u_f.norm() } else { dist / s.velocity.norm().max(FALLBACK_SPEED) };
                let a = model.acceleration(&cmd.grad_b, m);
                worst = worst.max((step_position(&s, &u_f, tau, &a, t) - target).norm());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => check("gradient-inverse", w, 1e-9, "m"),
        Err(e) => failed("gradient-inverse", e),
    }
}

/// Elastic reflection preserves speed, including a resolved wall hit.
pub fn check_collision() -> CheckResult {
    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let th = k as f64 * 0.1;
        let n = Vec3::new(th.cos(), th.sin() * 0.6, th.sin() * 0.8);
        let v = Vec3::new(0.3 * (1.3 * th).sin(), -0.2 + 0.01 * k as f64, 0.15 * th.cos());
        worst = worst.max((reflect(&v, &n, 1.0).norm() - v.norm()).abs());
    }
    let g = BifurcationGeometry::preset(ArteryPreset::Aca);
    let r_p = 100e-6;
    let before = ParticleState::new(Vec3::new(5e-3, 0.85e-3, 0.0), Vec3::new(0.2, 0.3, 0.05));
    let mut after = before;
    after.position = Vec3::new(5.1e-3, 1.2e-3, 0.0);
    after.velocity = Vec3::new(0.2, 0.3, 0.05);
    let hit = resolve_collision(&before, &after, &g, r_p, 1.0);
    if hit.collision_count != 1 || g.wall_distance(&hit.position).distance - r_p < -1e-12 {
        return failed("collision-elastic", "wall hit not resolved");
    }
    worst = worst.max((hit.velocity.norm() - after.velocity.norm()).abs());
    check("collision-elastic", worst, 1e-12, "m/s")
}

/// Grid field written and read back reproduces velocities exactly.
pub fn check_grid_round_trip() -> CheckResult {
    let run = || -> crate::Result<f64> {
        let spec = GridSpec { dims: [6, 5, 4], origin: Vec3::new(-1e-3, -1e-3, -5e-4), spacing: 4e-4 };
        let field = GridField::from_fn(spec, |p| {
            (p.y.abs() < 8e-4)
                .then(|| Vec3::new(0.4 * (1.0 - (p.y / 1e-3).powi(2)), 0.01 * p.x / 1e-3, 1.0 / 3.0 * 1e-2))
        })?;
        let path = std::env::temp_dir().join(format!("magnav-validate-{}.grid", std::process::id()));
        write_grid_field(&path, &field)?;
        let back = load_grid_field(&path);
        let _ = std::fs::remove_file(&path);
        let back = back?;
        let mut worst: f64 = 0.0;
        for p in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(3e-4, -2e-4, 1e-4), Vec3::new(-7e-4, 5e-4, -3e-4)] {
            worst = worst.max((field.interpolate(&p)? - back.interpolate(&p)?).norm());
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => check("grid-round-trip", w, 0.0, "m/s"),
        Err(e) => failed("grid-round-trip", e),
    }
}

/// Runs every check; `carreau` is the model under test for the viscosity check.
pub fn run_validation(carreau: &CarreauModel) -> ValidationReport {
    ValidationReport {
        checks: vec![
            check_carreau(carreau),
            check_profile_flux(),
            check_integrator(),
            check_settling(),
            check_inverse_identity(),
            check_collision(),
            check_grid_round_trip(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_every_check() {
        let r = run_validation(&CarreauModel::default());
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 7);
    }

    #[test]
    fn perturbed_carreau_fails() {
        let tampered = CarreauModel { eta_inf: 0.00345 * 1.1, ..CarreauModel::default() };
        assert!(!check_carreau(&tampered).passed);
    }
}
