//! Run configuration read from TOML, with defaults for the reference setup.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::control::{ControllerMode, SimulationSettings};
use crate::dynamics::{Magnetization, MagnetizationCurve, Microrobot, ViscosityConvention};
use crate::error::{Error, Result};
use crate::geometry::ArteryModel;
use crate::hemodynamics::{load_grid_field, CarreauModel, BLOOD_DENSITY, PROFILE_EXPONENT};
use crate::sweep::{FlowSource, RunSettings, ScenarioSpec};

/// `analytic` or `grid:<path>`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FlowSpec {
    #[default]
    Analytic,
    Grid(PathBuf),
}

impl FromStr for FlowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            _ => match s.strip_prefix("grid:") {
                Some(p) if !p.is_empty() => Ok(Self::Grid(PathBuf::from(p))),
                _ => Err(Error::Config(format!("flow must be `analytic` or `grid:<path>`, got `{s}`"))),
            },
        }
    }
}

impl std::fmt::Display for FlowSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Analytic => f.write_str("analytic"),
            Self::Grid(p) => write!(f, "grid:{}", p.display()),
        }
    }
}

impl Serialize for FlowSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FlowSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BloodConfig {
    /// kg/m³
    pub density: f64,
    pub carreau: CarreauModel,
    pub profile_exponent: f64,
}

impl Default for BloodConfig {
    fn default() -> Self {
        Self { density: BLOOD_DENSITY, carreau: CarreauModel::default(), profile_exponent: PROFILE_EXPONENT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    /// kg/m³
    pub density: f64,
    /// A/m
    pub saturation: f64,
    /// Two-column CSV of |B| (T) and M (A/m); overrides `saturation`.
    pub magnetization_curve: Option<PathBuf>,
    /// Applied field magnitude for the curve, T.
    pub field_magnitude: Option<f64>,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            density: Microrobot::DEFAULT_DENSITY,
            saturation: Microrobot::DEFAULT_SATURATION,
            magnetization_curve: None,
            field_magnitude: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    #[default]
    Dynamic,
    Constant,
}

impl FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dynamic" => Ok(Self::Dynamic),
            "constant" => Ok(Self::Constant),
            _ => Err(Error::Config(format!("mode must be dynamic or constant, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub mode: ModeKind,
    /// Constant-mode G1, G2, G3 in T/m; ignored when a fit file is given.
    pub constant_gradients: Option<[f64; 3]>,
    pub gravity_compensation: bool,
    pub viscosity: ViscosityConvention,
    pub cor: f64,
    pub max_steps: u64,
    /// T/m
    pub gradient_cap: Option<f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let sim = SimulationSettings::default();
        Self {
            mode: ModeKind::Dynamic,
            constant_gradients: None,
            gravity_compensation: true,
            viscosity: ViscosityConvention::default(),
            cor: sim.cor,
            max_steps: sim.max_steps,
            gradient_cap: None,
        }
    }
}

/// Single-trajectory scenario used by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub diameter_um: f64,
    pub artery: String,
    /// m/s
    pub u_max: f64,
    pub entrance: u8,
    pub upstream_k: u8,
    pub downstream_k: u8,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self { diameter_um: 500.0, artery: "ACA".into(), u_max: 0.45, entrance: 3, upstream_k: 2, downstream_k: 2 }
    }
}

impl ScenarioConfig {
    pub fn spec(&self) -> Result<ScenarioSpec> {
        let artery: ArteryModel = self.artery.parse()?;
        if !(self.diameter_um > 0.0) || !(self.u_max >= 0.0) {
            return Err(Error::Config("scenario diameter must be positive and velocity non-negative".into()));
        }
        if !(1..=5).contains(&self.entrance) {
            return Err(Error::Config(format!("entrance must be 1..=5, got {}", self.entrance)));
        }
        for k in [self.upstream_k, self.downstream_k] {
            if !(1..=4).contains(&k) {
                return Err(Error::Config(format!("target offsets must be 1..=4, got {k}")));
            }
        }
        let radius_um = artery.main_diameter_mm() * 500.0;
        if self.diameter_um / 2.0 >= radius_um {
            return Err(Error::Config(format!(
                "robot radius {} um does not fit in the {} main artery (radius {} um)",
                self.diameter_um / 2.0,
                artery,
                radius_um
            )));
        }
        Ok(ScenarioSpec {
            index: 0,
            diameter: self.diameter_um * 1e-6,
            artery,
            u_max: self.u_max,
            entrance: self.entrance,
            upstream_k: self.upstream_k,
            downstream_k: self.downstream_k,
        })
    }
}

/// Everything a command needs besides its own flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub flow: FlowSpec,
    pub gravity: bool,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub blood: BloodConfig,
    pub robot: RobotConfig,
    pub controller: ControllerConfig,
    pub scenario: ScenarioConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            flow: FlowSpec::Analytic,
            gravity: true,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out_dir: PathBuf::from("out"),
            blood: BloodConfig::default(),
            robot: RobotConfig::default(),
            controller: ControllerConfig::default(),
            scenario: ScenarioConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Checks cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        self.blood.carreau.validate().map_err(|e| Error::Config(format!("blood.carreau: {e}")))?;
        if !(self.blood.density > 0.0) || !(self.blood.profile_exponent > 0.0) {
            return Err(Error::Config("blood density and profile exponent must be positive".into()));
        }
        if !(self.robot.density > 0.0) || !(self.robot.saturation > 0.0) {
            return Err(Error::Config("robot density and saturation must be positive".into()));
        }
        if self.robot.magnetization_curve.is_some() && self.robot.field_magnitude.is_none() {
            return Err(Error::Config("robot.magnetization_curve requires robot.field_magnitude".into()));
        }
        if !(0.0..=1.0).contains(&self.controller.cor) {
            return Err(Error::Config(format!("controller.cor must be in [0, 1], got {}", self.controller.cor)));
        }
        if self.controller.max_steps == 0 {
            return Err(Error::Config("controller.max_steps must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let Some(g) = self.controller.constant_gradients {
            if g.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Config("controller.constant_gradients must be non-negative".into()));
            }
        }
        self.scenario.spec()?;
        Ok(())
    }

    /// Physics settings for sweeps and single runs; loads external files.
    pub fn run_settings(&self) -> Result<RunSettings> {
        self.validate()?;
        let magnetization = match &self.robot.magnetization_curve {
            Some(p) => Magnetization::Curve(MagnetizationCurve::load(p)?),
            None => Magnetization::Saturated(self.robot.saturation),
        };
        let flow = match &self.flow {
            FlowSpec::Analytic => FlowSource::Analytic,
            FlowSpec::Grid(p) => FlowSource::Grid(Arc::new(load_grid_field(p)?.with_density(self.blood.density))),
        };
        Ok(RunSettings {
            gravity: self.gravity,
            carreau: self.blood.carreau,
            convention: self.controller.viscosity,
            robot_density: self.robot.density,
            magnetization,
            fluid_density: self.blood.density,
            profile_exponent: self.blood.profile_exponent,
            flow,
            simulation: SimulationSettings {
                cor: self.controller.cor,
                max_steps: self.controller.max_steps,
                field_magnitude: self.robot.field_magnitude,
                gradient_cap: self.controller.gradient_cap,
                record_path: false,
            },
        })
    }

    /// Constant-mode controller from the configured gradients.
    pub fn constant_mode(&self) -> Result<ControllerMode> {
        let [g1, g2, g3] = self
            .controller
            .constant_gradients
            .ok_or_else(|| Error::Config("constant mode needs controller.constant_gradients or a fit file".into()))?;
        Ok(ControllerMode::Constant { g: [g1, g2, g3], gravity_compensation: self.controller.gravity_compensation })
    }
}
