//! Gradient commands: waypoint guidance, constant per-region replay, and the
//! closed simulation loop.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    phi, resolve_collision, step_position, step_velocity, time_step, Microrobot, ParticleModel, ParticleState,
    FALLBACK_SPEED,
};
use crate::error::{domain, Result};
use crate::geometry::{classify_region, BifurcationGeometry, Branch, Region, TargetPlan};
use crate::hemodynamics::FlowField;
use crate::Vec3;

/// A magnetic field gradient with its direction angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCommand {
    /// T/m
    pub grad_b: Vec3,
    pub magnitude: f64,
    /// Angle of the in-plane projection from +x, radians in (−π, π].
    pub azimuth: f64,
    /// Angle from +z, radians in [0, π].
    pub polar: f64,
}

impl GradientCommand {
    pub fn new(grad_b: Vec3) -> Self {
        let magnitude = grad_b.norm();
        let azimuth = grad_b.y.atan2(grad_b.x);
        let polar =
            if magnitude > 0.0 { (grad_b.z / magnitude).clamp(-1.0, 1.0).acos() } else { 0.5 * std::f64::consts::PI };
        Self { grad_b, magnitude, azimuth, polar }
    }
}

/// How the gradient is chosen at each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControllerMode {
    /// Recompute the waypoint-reaching gradient every step.
    Dynamic,
    /// Fixed lateral magnitude per region toward the desired branch.
    Constant { g: [f64; 3], gravity_compensation: bool },
}

impl ControllerMode {
    pub fn constant(g1: f64, g2: f64, g3: f64) -> Result<Self> {
        let g = [g1, g2, g3];
        if g.iter().any(|v| !(*v >= 0.0)) {
            return Err(domain(format!("constant gradients must be non-negative, got {g:?}")));
        }
        Ok(Self::Constant { g, gravity_compensation: true })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Dynamic => "dynamic",
            Self::Constant { .. } => "constant",
        }
    }
}

/// Force on the robot, N.
pub fn magnetic_force(robot: &Microrobot, grad_b: &Vec3, field: Option<f64>) -> Result<Vec3> {
    Ok(grad_b * (robot.volume() * robot.magnetization_at(field)?))
}

/// Gradient that carries the particle onto `target` after the estimated
/// flight time `|d|/|u_f|`, assuming frozen fluid velocity.
pub fn required_gradient(
    state: &ParticleState,
    u_f: &Vec3,
    tau: f64,
    model: &ParticleModel,
    magnetization: f64,
    target: &Vec3,
) -> Result<GradientCommand> {
    let d = target - state.position;
    let dist = d.norm();
    if !(dist > 0.0) {
        return Err(domain("target coincides with the particle position"));
    }
    let gain = model.magnetic_gain(magnetization);
    if !(gain > 0.0) {
        return Err(domain("zero magnetization cannot produce a gradient force"));
    }
    let speed = u_f.norm();
    let t = if speed > 0.0 { dist / speed } else { dist / state.velocity.norm().max(FALLBACK_SPEED) };
    let x = t / tau;
    let coast = (state.velocity - u_f) * (-tau * (-x).exp_m1());
    let accel = (d - u_f * t - coast) / (tau * tau * phi(x));
    Ok(GradientCommand::new((accel - model.gravity_acceleration()) / gain))
}

/// Waypoint for a navigation stage.
pub fn waypoint(stage: Region, plan: &TargetPlan) -> Vec3 {
    match stage {
        Region::G1 => plan.upstream_point,
        Region::G2 => plan.downstream_point,
        Region::G3 => plan.final_point,
    }
}

/// Waypoint for the region containing `state`.
pub fn next_waypoint(state: &ParticleState, plan: &TargetPlan) -> Vec3 {
    waypoint(classify_region(&state.position, plan), plan)
}

/// Navigation stage after visiting `position`. Stages never go backwards; a
/// waypoint also counts as reached once the particle is within `capture`
/// of it.
pub fn advance_stage(stage: Region, position: &Vec3, plan: &TargetPlan, capture: f64) -> Region {
    let mut stage = stage.max(classify_region(position, plan));
    while stage != Region::G3 && (waypoint(stage, plan) - position).norm() < capture {
        stage = Region::ALL[stage.index() + 1];
    }
    stage
}

/// Gradient holding a stationary particle against gravity, T/m.
pub fn gravity_hold(model: &ParticleModel, magnetization: f64) -> Vec3 {
    let gain = model.magnetic_gain(magnetization);
    if gain > 0.0 {
        -model.gravity_acceleration() / gain
    } else {
        Vec3::zeros()
    }
}

/// Constant-mode gradient for `region`: lateral +y at the configured
/// magnitude plus the optional gravity hold.
pub fn constant_gradient(
    region: Region,
    mode: &ControllerMode,
    model: &ParticleModel,
    magnetization: f64,
) -> GradientCommand {
    match mode {
        ControllerMode::Dynamic => GradientCommand::new(Vec3::zeros()),
        ControllerMode::Constant { g, gravity_compensation } => {
            let mut v = Vec3::new(0.0, g[region.index()], 0.0);
            if *gravity_compensation {
                v += gravity_hold(model, magnetization);
            }
            GradientCommand::new(v)
        }
    }
}

/// Loop settings shared by every trajectory of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSettings {
    pub cor: f64,
    pub max_steps: u64,
    /// Field magnitude for curve magnetization, T.
    pub field_magnitude: Option<f64>,
    /// Optional cap on the commanded gradient magnitude, T/m.
    pub gradient_cap: Option<f64>,
    pub record_path: bool,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self { cor: 1.0, max_steps: 1_000_000, field_magnitude: None, gradient_cap: None, record_path: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Desired,
    Other,
    Stalled,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Self::Desired => "desired",
            Self::Other => "other",
            Self::Stalled => "stalled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "desired" => Some(Self::Desired),
            "other" => Some(Self::Other),
            "stalled" => Some(Self::Stalled),
            _ => None,
        }
    }
}

/// One integration step of a recorded path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub grad_b: Vec3,
    pub region: Region,
    pub collided: bool,
}

/// Gradient statistics over one region of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    /// Circular mean of the azimuth, radians.
    pub azimuth: f64,
}

impl RegionSummary {
    fn from_samples(mags: &mut [f64], sin: f64, cos: f64) -> Option<Self> {
        if mags.is_empty() {
            return None;
        }
        mags.sort_by(f64::total_cmp);
        let n = mags.len();
        let median = if n % 2 == 1 { mags[n / 2] } else { 0.5 * (mags[n / 2 - 1] + mags[n / 2]) };
        Some(Self {
            count: n,
            mean: mags.iter().sum::<f64>() / n as f64,
            median,
            max: mags[n - 1],
            azimuth: sin.atan2(cos),
        })
    }
}

/// Result of one simulated transit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub outcome: Outcome,
    pub collisions: u32,
    pub steps: u64,
    pub transit_time: f64,
    pub final_state: ParticleState,
    pub regions: [Option<RegionSummary>; 3],
    /// Smallest wall clearance minus the robot radius seen along the path, m.
    pub min_clearance: f64,
    pub error: Option<String>,
    pub samples: Vec<TrajectorySample>,
}

impl TrajectoryRecord {
    pub fn region(&self, region: Region) -> Option<&RegionSummary> {
        self.regions[region.index()].as_ref()
    }
}

/// Integrates one microrobot from `start` until it leaves through a branch
/// outlet or the step cap is reached.
pub fn run_trajectory(
    geometry: &BifurcationGeometry,
    flow: &dyn FlowField,
    model: &ParticleModel,
    start: Vec3,
    plan: &TargetPlan,
    mode: &ControllerMode,
    settings: &SimulationSettings,
) -> TrajectoryRecord {
    let r_p = model.robot.radius();
    let mut mags: [Vec<f64>; 3] = Default::default();
    let mut trig = [(0.0, 0.0); 3];
    let mut samples = Vec::new();
    let mut min_clearance = geometry.wall_distance(&start).distance - r_p;
    let mut error = None;
    let mut outcome = Outcome::Stalled;
    let mut steps = 0;

    let mut state = match flow.velocity(&start) {
        Ok(u) => ParticleState::new(start, u),
        Err(e) => {
            error = Some(e.to_string());
            ParticleState::new(start, Vec3::zeros())
        }
    };
    let mut stage = Region::G1;

    while error.is_none() && steps < settings.max_steps {
        if let Some(branch) = geometry.outlet_reached(&state.position) {
            outcome = if branch == Branch::Desired { Outcome::Desired } else { Outcome::Other };
            break;
        }
        match advance(geometry, flow, model, plan, mode, settings, &state, &mut stage) {
            Ok((next, cmd)) => {
                let k = stage.index();
                mags[k].push(cmd.magnitude);
                trig[k].0 += cmd.azimuth.sin();
                trig[k].1 += cmd.azimuth.cos();
                min_clearance = min_clearance.min(geometry.wall_distance(&next.position).distance - r_p);
                if settings.record_path {
                    samples.push(TrajectorySample {
                        time: state.time,
                        position: state.position,
                        velocity: state.velocity,
                        grad_b: cmd.grad_b,
                        region: stage,
                        collided: next.collision_count > state.collision_count,
                    });
                }
                state = next;
                steps += 1;
            }
            Err(e) => error = Some(e.to_string()),
        }
    }

    let regions = std::array::from_fn(|k| RegionSummary::from_samples(&mut mags[k], trig[k].0, trig[k].1));
    TrajectoryRecord {
        outcome,
        collisions: state.collision_count,
        steps,
        transit_time: state.time,
        final_state: state,
        regions,
        min_clearance,
        error,
        samples,
    }
}

#[allow(clippy::too_many_arguments)]
fn advance(
    geometry: &BifurcationGeometry,
    flow: &dyn FlowField,
    model: &ParticleModel,
    plan: &TargetPlan,
    mode: &ControllerMode,
    settings: &SimulationSettings,
    state: &ParticleState,
    stage: &mut Region,
) -> Result<(ParticleState, GradientCommand)> {
    let sample = flow.sample(&state.position)?;
    let u_f = sample.velocity;
    let tau = model.relaxation_time(sample.shear_rate)?;
    let magnetization = model.robot.magnetization_at(settings.field_magnitude)?;
    *stage = advance_stage(*stage, &state.position, plan, model.robot.radius());

    let mut cmd = match mode {
        ControllerMode::Dynamic => {
            let target = waypoint(*stage, plan);
            let captured = *stage == Region::G3 && (target - state.position).norm() < model.robot.radius();
            if captured && u_f.norm() > FALLBACK_SPEED {
                // Inside the outlet capture zone: coast out with gravity held.
                GradientCommand::new(gravity_hold(model, magnetization))
            } else if captured {
                // Still fluid: push through the outlet plane.
                let beyond = target + geometry.branch_axis(Branch::Desired) * (4.0 * model.robot.radius());
                required_gradient(state, &u_f, tau, model, magnetization, &beyond)?
            } else {
                required_gradient(state, &u_f, tau, model, magnetization, &target)?
            }
        }
        ControllerMode::Constant { .. } => constant_gradient(*stage, mode, model, magnetization),
    };
    if let Some(cap) = settings.gradient_cap {
        if cmd.magnitude > cap {
            cmd = GradientCommand::new(cmd.grad_b * (cap / cmd.magnitude));
        }
    }

    let accel = model.acceleration(&cmd.grad_b, magnetization);
    let dt = time_step(&state.velocity, &u_f);
    let moved = ParticleState {
        position: step_position(state, &u_f, tau, &accel, dt),
        velocity: step_velocity(state, &u_f, tau, &accel, dt),
        time: state.time + dt,
        collision_count: state.collision_count,
    };
    Ok((resolve_collision(state, &moved, geometry, model.robot.radius(), settings.cor), cmd))
}
