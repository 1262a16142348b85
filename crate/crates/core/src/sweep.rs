//! Full-factorial scenario grids, parallel execution and the results table.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{
    run_trajectory, ControllerMode, Outcome, RegionSummary, SimulationSettings, TrajectoryRecord, TrajectorySample,
};
use crate::dynamics::{Magnetization, Microrobot, ParticleModel, ViscosityConvention};
use crate::error::{Error, Result};
use crate::geometry::{ArteryModel, ArteryPreset, BifurcationGeometry, Region};
use crate::hemodynamics::{
    AnalyticBifurcationFlow, CarreauModel, FlowField, GridField, BLOOD_DENSITY, PROFILE_EXPONENT,
};

const UM: f64 = 1e-6;

/// Factor levels of a full-factorial design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignLevels {
    pub diameters_um: Vec<f64>,
    /// Artery labels such as `ACA` or `MCA+0.2`.
    pub arteries: Vec<String>,
    pub velocities: Vec<f64>,
    #[serde(default = "all_entrances")]
    pub entrances: Vec<u8>,
    #[serde(default = "all_offsets")]
    pub upstream_k: Vec<u8>,
    #[serde(default = "all_offsets")]
    pub downstream_k: Vec<u8>,
}

fn all_entrances() -> Vec<u8> {
    vec![1, 2, 3, 4, 5]
}

fn all_offsets() -> Vec<u8> {
    vec![1, 2, 3, 4]
}

impl DesignLevels {
    /// The main study: five diameters, three arteries, five velocities.
    pub fn table2() -> Self {
        Self {
            diameters_um: vec![50.0, 100.0, 250.0, 500.0, 1000.0],
            arteries: ArteryPreset::ALL.iter().map(|p| p.to_string()).collect(),
            velocities: vec![0.25, 0.35, 0.45, 0.55, 0.65],
            entrances: all_entrances(),
            upstream_k: all_offsets(),
            downstream_k: all_offsets(),
        }
    }

    /// The robustness study: unseen diameters and velocities, arteries
    /// widened by 0.2 mm.
    pub fn table4() -> Self {
        Self {
            diameters_um: vec![75.0, 175.0, 375.0, 650.0, 850.0],
            arteries: ArteryPreset::ALL.iter().map(|p| ArteryModel::widened(*p, 0.2).to_string()).collect(),
            velocities: vec![0.30, 0.40, 0.50, 0.60, 0.70],
            entrances: all_entrances(),
            upstream_k: all_offsets(),
            downstream_k: all_offsets(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    /// `table2`, `table4` or `custom:<path>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "table2" => Ok(Self::table2()),
            "table4" => Ok(Self::table4()),
            _ => match name.strip_prefix("custom:") {
                Some(path) => Self::load(Path::new(path)),
                None => {
                    Err(Error::Config(format!("unknown design `{name}`, expected table2, table4 or custom:<file>")))
                }
            },
        }
    }

    pub fn count(&self) -> usize {
        self.diameters_um.len()
            * self.arteries.len()
            * self.velocities.len()
            * self.entrances.len()
            * self.upstream_k.len()
            * self.downstream_k.len()
    }
}

/// One point of the design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub index: usize,
    /// m
    pub diameter: f64,
    pub artery: ArteryModel,
    /// m/s
    pub u_max: f64,
    /// 1 (top wall) ..= 5 (bottom wall).
    pub entrance: u8,
    pub upstream_k: u8,
    pub downstream_k: u8,
}

impl ScenarioSpec {
    pub fn diameter_um(&self) -> f64 {
        (self.diameter / UM * 1e6).round() / 1e6
    }

    /// Factor levels without the index, for matching two grids.
    fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}",
            self.diameter_um(),
            self.artery,
            self.u_max,
            self.entrance,
            self.upstream_k,
            self.downstream_k
        )
    }
}

fn check_levels<T: PartialEq + std::fmt::Debug>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("factor `{name}` has no levels")));
    }
    for (i, a) in v.iter().enumerate() {
        if v[..i].contains(a) {
            return Err(Error::Config(format!("factor `{name}` repeats level {a:?}")));
        }
    }
    Ok(())
}

/// Cartesian product in lexicographic order: diameter, artery, velocity,
/// entrance, upstream offset, downstream offset.
pub fn factorial_grid(levels: &DesignLevels) -> Result<Vec<ScenarioSpec>> {
    check_levels("diameters_um", &levels.diameters_um)?;
    check_levels("arteries", &levels.arteries)?;
    check_levels("velocities", &levels.velocities)?;
    check_levels("entrances", &levels.entrances)?;
    check_levels("upstream_k", &levels.upstream_k)?;
    check_levels("downstream_k", &levels.downstream_k)?;
    if levels.diameters_um.iter().any(|d| !(*d > 0.0)) || levels.velocities.iter().any(|u| !(*u >= 0.0)) {
        return Err(Error::Config("diameters must be positive and velocities non-negative".into()));
    }
    if levels.entrances.iter().any(|e| !(1..=5).contains(e)) {
        return Err(Error::Config("entrance positions must be 1..=5".into()));
    }
    if levels.upstream_k.iter().chain(&levels.downstream_k).any(|k| !(1..=4).contains(k)) {
        return Err(Error::Config("target offsets must be 1..=4 diameters".into()));
    }
    let arteries = levels.arteries.iter().map(|a| a.parse()).collect::<Result<Vec<ArteryModel>>>()?;

    let mut out = Vec::with_capacity(levels.count());
    for &d in &levels.diameters_um {
        for &artery in &arteries {
            for &u_max in &levels.velocities {
                for &entrance in &levels.entrances {
                    for &upstream_k in &levels.upstream_k {
                        for &downstream_k in &levels.downstream_k {
                            out.push(ScenarioSpec {
                                index: out.len(),
                                diameter: d * UM,
                                artery,
                                u_max,
                                entrance,
                                upstream_k,
                                downstream_k,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Where scenario flow fields come from.
#[derive(Debug, Clone)]
pub enum FlowSource {
    /// Analytic bifurcation flow built per artery and velocity.
    Analytic,
    /// One imported field shared by every scenario; the scenario velocity is
    /// ignored.
    Grid(Arc<GridField>),
}

/// Physics shared by every scenario of a run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub gravity: bool,
    pub carreau: CarreauModel,
    pub convention: ViscosityConvention,
    pub robot_density: f64,
    pub magnetization: Magnetization,
    pub fluid_density: f64,
    pub profile_exponent: f64,
    pub flow: FlowSource,
    pub simulation: SimulationSettings,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            gravity: true,
            carreau: CarreauModel::default(),
            convention: ViscosityConvention::Local,
            robot_density: Microrobot::DEFAULT_DENSITY,
            magnetization: Magnetization::Saturated(Microrobot::DEFAULT_SATURATION),
            fluid_density: BLOOD_DENSITY,
            profile_exponent: PROFILE_EXPONENT,
            flow: FlowSource::Analytic,
            simulation: SimulationSettings::default(),
        }
    }
}

impl RunSettings {
    pub fn particle_model(&self, diameter: f64) -> Result<ParticleModel> {
        let mut robot = Microrobot::new(diameter)?;
        robot.density = self.robot_density;
        robot.magnetization = self.magnetization.clone();
        robot.validate()?;
        let mut model = ParticleModel::new(robot, self.fluid_density, self.gravity);
        model.carreau = self.carreau;
        model.convention = self.convention;
        Ok(model)
    }

    pub fn flow_field(&self, geometry: &BifurcationGeometry, u_max: f64) -> Result<Box<dyn FlowField>> {
        Ok(match &self.flow {
            FlowSource::Analytic => Box::new(
                AnalyticBifurcationFlow::new(geometry, u_max, self.profile_exponent)?.with_density(self.fluid_density),
            ),
            FlowSource::Grid(g) => Box::new(GridArc(Arc::clone(g))),
        })
    }
}

struct GridArc(Arc<GridField>);

impl FlowField for GridArc {
    fn sample(&self, p: &crate::Vec3) -> Result<crate::hemodynamics::FlowSample> {
        self.0.sample(p)
    }

    fn fluid_density(&self) -> f64 {
        self.0.fluid_density()
    }

    fn profile_exponent(&self) -> f64 {
        self.0.profile_exponent()
    }
}

/// Outcome and gradient statistics of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub mode: String,
    pub outcome: Outcome,
    pub collisions: u32,
    pub steps: u64,
    /// s
    pub transit_time: f64,
    /// Smallest wall clearance minus the robot radius, m.
    pub min_clearance: f64,
    pub regions: [Option<RegionSummary>; 3],
    pub error: Option<String>,
}

impl ScenarioResult {
    pub fn region(&self, region: Region) -> Option<&RegionSummary> {
        self.regions[region.index()].as_ref()
    }
}

/// Simulates one scenario and returns the full trajectory record.
pub fn simulate_scenario(
    spec: &ScenarioSpec,
    mode: &ControllerMode,
    settings: &RunSettings,
    record_path: bool,
) -> Result<TrajectoryRecord> {
    let geometry = spec.artery.geometry()?;
    let flow = settings.flow_field(&geometry, spec.u_max)?;
    let model = settings.particle_model(spec.diameter)?;
    let plan = geometry.place_targets(spec.diameter, spec.upstream_k, spec.downstream_k)?;
    let start = geometry.entrance_positions(model.robot.radius())?[usize::from(spec.entrance) - 1];
    let sim = SimulationSettings { record_path, ..settings.simulation };
    Ok(run_trajectory(&geometry, flow.as_ref(), &model, start, &plan, mode, &sim))
}

impl ScenarioResult {
    pub fn from_record(spec: &ScenarioSpec, mode: &ControllerMode, rec: &TrajectoryRecord) -> Self {
        Self {
            spec: *spec,
            mode: mode.name().to_owned(),
            outcome: rec.outcome,
            collisions: rec.collisions,
            steps: rec.steps,
            transit_time: rec.transit_time,
            min_clearance: rec.min_clearance,
            regions: rec.regions,
            error: rec.error.clone(),
        }
    }
}

/// Runs one scenario. Setup failures are recorded as a stalled outcome.
pub fn run_scenario(spec: &ScenarioSpec, mode: &ControllerMode, settings: &RunSettings) -> ScenarioResult {
    match simulate_scenario(spec, mode, settings, false) {
        Ok(rec) => ScenarioResult::from_record(spec, mode, &rec),
        Err(e) => ScenarioResult {
            spec: *spec,
            mode: mode.name().to_owned(),
            outcome: Outcome::Stalled,
            collisions: 0,
            steps: 0,
            transit_time: 0.0,
            min_clearance: 0.0,
            regions: [None; 3],
            error: Some(e.to_string()),
        },
    }
}

/// Runs every scenario on `workers` threads. Results come back in grid order.
pub fn run_sweep(
    grid: &[ScenarioSpec],
    mode: &(dyn Fn(&ScenarioSpec) -> ControllerMode + Sync),
    settings: &RunSettings,
    workers: usize,
) -> Result<Vec<ScenarioResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(|s| run_scenario(s, &mode(s), settings)).collect()))
}

/// Fraction of results that reached the desired branch.
pub fn navigation_success(results: &[ScenarioResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(crate::error::domain("no results to score"));
    }
    let ok = results.iter().filter(|r| r.outcome == Outcome::Desired).count();
    Ok(ok as f64 / results.len() as f64)
}

/// Checks that two result sets describe the same scenarios in the same order.
pub fn ensure_same_grid(a: &[ScenarioResult], b: &[ScenarioResult]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} scenarios", a.len(), b.len())));
    }
    for (x, y) in a.iter().zip(b) {
        if x.spec.key() != y.spec.key() {
            return Err(Error::GridMismatch(format!(
                "scenario {} differs: {} vs {}",
                x.spec.index,
                x.spec.key(),
                y.spec.key()
            )));
        }
    }
    Ok(())
}

const UNITS_LINE: &str = "# units: diameter_um um; u_max m/s; transit_time s; min_clearance m; \
g*_mean g*_median g*_max T/m; g*_azimuth rad (circular mean); g*_samples steps";

const FIXED_COLUMNS: [&str; 13] = [
    "index",
    "diameter_um",
    "artery",
    "u_max",
    "entrance",
    "upstream_k",
    "downstream_k",
    "mode",
    "outcome",
    "collisions",
    "steps",
    "transit_time",
    "min_clearance",
];

const REGION_FIELDS: [&str; 5] = ["mean", "median", "max", "azimuth", "samples"];

fn header() -> Vec<String> {
    let mut h: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for r in 1..=3 {
        for f in REGION_FIELDS {
            h.push(format!("g{r}_{f}"));
        }
    }
    h.push("error".into());
    h
}

/// Writes the results table: one units comment line, then CSV with header.
pub fn write_results_csv(path: &Path, results: &[ScenarioResult]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{UNITS_LINE}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header())?;
    for r in results {
        let s = &r.spec;
        let mut row = vec![
            s.index.to_string(),
            s.diameter_um().to_string(),
            s.artery.to_string(),
            s.u_max.to_string(),
            s.entrance.to_string(),
            s.upstream_k.to_string(),
            s.downstream_k.to_string(),
            r.mode.clone(),
            r.outcome.name().to_owned(),
            r.collisions.to_string(),
            r.steps.to_string(),
            r.transit_time.to_string(),
            r.min_clearance.to_string(),
        ];
        for reg in &r.regions {
            match reg {
                Some(g) => {
                    row.extend([g.mean, g.median, g.max, g.azimuth].map(|v| v.to_string()));
                    row.push(g.count.to_string());
                }
                None => row.extend(std::iter::repeat_n(String::new(), 5)),
            }
        }
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_results_csv`].
pub fn read_results_csv(path: &Path) -> Result<Vec<ScenarioResult>> {
    let perr = |msg: String| Error::Parse { path: path.to_path_buf(), message: msg };
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let expected = header();
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if got != expected {
        return Err(perr("unexpected column layout".into()));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| perr(format!("row {}: bad number in `{}`", line + 1, expected[i])))
        };
        let int = |i: usize| -> Result<u64> {
            field(i).parse().map_err(|_| perr(format!("row {}: bad integer in `{}`", line + 1, expected[i])))
        };
        let spec = ScenarioSpec {
            index: int(0)? as usize,
            diameter: num(1)? * UM,
            artery: field(2).parse()?,
            u_max: num(3)?,
            entrance: int(4)? as u8,
            upstream_k: int(5)? as u8,
            downstream_k: int(6)? as u8,
        };
        let outcome = Outcome::parse(field(8)).ok_or_else(|| perr(format!("row {}: bad outcome", line + 1)))?;
        let mut regions = [None; 3];
        for (k, slot) in regions.iter_mut().enumerate() {
            let base = FIXED_COLUMNS.len() + k * REGION_FIELDS.len();
            if !field(base).is_empty() {
                *slot = Some(RegionSummary {
                    mean: num(base)?,
                    median: num(base + 1)?,
                    max: num(base + 2)?,
                    azimuth: num(base + 3)?,
                    count: int(base + 4)? as usize,
                });
            }
        }
        let err = field(expected.len() - 1);
        out.push(ScenarioResult {
            spec,
            mode: field(7).to_owned(),
            outcome,
            collisions: int(9)? as u32,
            steps: int(10)?,
            transit_time: num(11)?,
            min_clearance: num(12)?,
            regions,
            error: (!err.is_empty()).then(|| err.to_owned()),
        });
    }
    Ok(out)
}

/// Writes trajectory samples: time, position, velocity, gradient, region.
pub fn write_trajectory_csv(path: &Path, samples: &[TrajectorySample]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "# units: t s; x y z m; vx vy vz m/s; gx gy gz T/m")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["t", "x", "y", "z", "vx", "vy", "vz", "gx", "gy", "gz", "region", "collided"])?;
    for s in samples {
        let mut row: Vec<String> = [s.time]
            .iter()
            .chain(s.position.iter())
            .chain(s.velocity.iter())
            .chain(s.grad_b.iter())
            .map(|v| v.to_string())
            .collect();
        row.push(s.region.to_string());
        row.push(u8::from(s.collided).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One-line description of a result, for logs and the simulate command.
pub fn summary_line(r: &ScenarioResult) -> String {
    let mut s = format!(
        "{} d={}um {} u={} entry={} -{}D+{}D: {} collisions={} t={:.4}s",
        r.mode,
        r.spec.diameter_um(),
        r.spec.artery,
        r.spec.u_max,
        r.spec.entrance,
        r.spec.upstream_k,
        r.spec.downstream_k,
        r.outcome.name(),
        r.collisions,
        r.transit_time
    );
    for region in Region::ALL {
        match r.region(region) {
            Some(g) => {
                let _ = write!(s, " | {region} mean={:.4} median={:.4} max={:.4} T/m", g.mean, g.median, g.max);
            }
            None => {
                let _ = write!(s, " | {region} -");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> DesignLevels {
        DesignLevels {
            diameters_um: vec![500.0],
            arteries: vec!["ACA".into()],
            velocities: vec![0.45],
            entrances: vec![3],
            upstream_k: vec![2],
            downstream_k: vec![2],
        }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(factorial_grid(&DesignLevels::table2()).unwrap().len(), 6000);
        assert_eq!(factorial_grid(&DesignLevels::table4()).unwrap().len(), 6000);
        assert_eq!(factorial_grid(&tiny()).unwrap().len(), 1);
        let mut empty = tiny();
        empty.velocities.clear();
        assert!(factorial_grid(&empty).is_err());
        let mut dup = tiny();
        dup.entrances = vec![3, 3];
        assert!(factorial_grid(&dup).is_err());
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let g = factorial_grid(&DesignLevels::table2()).unwrap();
        assert_eq!(g[0].downstream_k, 1);
        assert_eq!(g[1].downstream_k, 2);
        assert_eq!(g[4].upstream_k, 2);
        assert_eq!(g[16].entrance, 2);
        assert_eq!(g[1200].diameter_um(), 100.0);
        assert!(g.iter().enumerate().all(|(i, s)| s.index == i));
        let keys: std::collections::HashSet<String> = g.iter().map(|s| s.key()).collect();
        assert_eq!(keys.len(), g.len());
    }

    #[test]
    fn table4_arteries_are_widened() {
        let g = factorial_grid(&DesignLevels::table4()).unwrap();
        assert_eq!(g[0].artery.to_string(), "ACA+0.2");
        assert!((g[0].artery.geometry().unwrap().dims().d_main - 2.2e-3).abs() < 1e-15);
        assert!((g[0].artery.main_diameter_mm() - 2.2).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_and_success() {
        let grid = factorial_grid(&tiny()).unwrap();
        let results = run_sweep(&grid, &|_| ControllerMode::Dynamic, &RunSettings::default(), 2).unwrap();
        assert_eq!(results[0].outcome, Outcome::Desired);
        assert_eq!(navigation_success(&results).unwrap(), 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_results_csv(&path, &results).unwrap();
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back, results);
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("# units"));
        assert!(navigation_success(&[]).is_err());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let grid = factorial_grid(&tiny()).unwrap();
        let r = run_sweep(&grid, &|_| ControllerMode::Dynamic, &RunSettings::default(), 1).unwrap();
        let mut other = r.clone();
        other[0].spec.u_max = 0.5;
        assert!(matches!(ensure_same_grid(&r, &other), Err(Error::GridMismatch(_))));
        assert!(ensure_same_grid(&r, &r).is_ok());
    }

    fn synthetic(outcome: Outcome) -> ScenarioResult {
        ScenarioResult {
            spec: factorial_grid(&tiny()).unwrap()[0],
            mode: "dynamic".into(),
            outcome,
            collisions: 0,
            steps: 1,
            transit_time: 0.0,
            min_clearance: 0.0,
            regions: [None; 3],
            error: None,
        }
    }

    #[test]
    fn success_examples() {
        let mut rs = vec![synthetic(Outcome::Desired); 5676];
        rs.extend(vec![synthetic(Outcome::Other); 324]);
        assert!((navigation_success(&rs).unwrap() - 0.946).abs() < 1e-12);
        let half = [synthetic(Outcome::Desired), synthetic(Outcome::Stalled)];
        assert_eq!(navigation_success(&half).unwrap(), 0.5);
    }

    proptest::proptest! {
        #[test]
        fn grid_cardinality_is_product_of_levels(
            nd in 1usize..4, na in 1usize..4, nu in 1usize..4, ne in 1usize..6, nup in 1usize..5, ndn in 1usize..5,
        ) {
            let levels = DesignLevels {
                diameters_um: (0..nd).map(|i| 50.0 * (i + 1) as f64).collect(),
                arteries: ["ACA", "MCA", "PCA"][..na].iter().map(|s| s.to_string()).collect(),
                velocities: (0..nu).map(|i| 0.25 + 0.1 * i as f64).collect(),
                entrances: (1..=ne as u8).collect(),
                upstream_k: (1..=nup as u8).collect(),
                downstream_k: (1..=ndn as u8).collect(),
            };
            let g = factorial_grid(&levels).unwrap();
            proptest::prop_assert_eq!(g.len(), nd * na * nu * ne * nup * ndn);
            let keys: std::collections::HashSet<String> = g.iter().map(|s| s.key()).collect();
            proptest::prop_assert_eq!(keys.len(), g.len());
        }

        #[test]
        fn success_counts_only_desired(outcomes in proptest::collection::vec(0u8..3, 1..200)) {
            let rs: Vec<ScenarioResult> = outcomes
                .iter()
                .map(|o| synthetic([Outcome::Desired, Outcome::Other, Outcome::Stalled][usize::from(*o)]))
                .collect();
            let s = navigation_success(&rs).unwrap();
            let failures = outcomes.iter().filter(|o| **o != 0).count();
            proptest::prop_assert!((0.0..=1.0).contains(&s));
            proptest::prop_assert!((s - (1.0 - failures as f64 / rs.len() as f64)).abs() < 1e-12);
        }
    }
}
