//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    diameter_medians, fit_predictive_equations, gradient_maps, grouped_boxplots, median_ratio_table, replay_comparison,
    write_boxplots_csv, write_gradient_maps, write_median_ratio_csv, write_replay_csv, Factor, FitBasis, FitModel,
};
use crate::config::{FlowSpec, ModeKind, RunConfig};
use crate::control::{ControllerMode, Outcome};
use crate::error::{Error, Result};
use crate::geometry::{ArteryModel, Region};
use crate::sweep::{
    factorial_grid, navigation_success, read_results_csv, run_sweep, simulate_scenario, summary_line,
    write_results_csv, write_trajectory_csv, DesignLevels, RunSettings, ScenarioResult, ScenarioSpec,
};
use crate::validate::run_validation;

#[derive(Debug, Parser)]
#[command(name = "magnav", version, about = "Magnetic microrobot navigation through cerebral artery bifurcations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for generated files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub gravity: Option<Switch>,
    /// `analytic` or `grid:<path>`.
    #[arg(long, global = true)]
    pub flow: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trajectory and dump it.
    Simulate(SimulateArgs),
    /// Run a full-factorial sweep.
    Sweep(SweepArgs),
    /// Gradient maps, boxplots and median-ratio table from a results file.
    Analyze(AnalyzeArgs),
    /// Fit predictive gradient equations against diameter.
    Fit(FitArgs),
    /// Replay a design with constant gradients from a fit.
    Replay(ReplayArgs),
    /// Run the built-in oracle suite.
    Validate,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// `dynamic` or `constant`; defaults to the config.
    #[arg(long)]
    pub mode: Option<String>,
    /// Fit file supplying constant-mode gradients per diameter.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Constant-mode G1,G2,G3 in T/m.
    #[arg(long, value_delimiter = ',')]
    pub constant: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub diameter_um: Option<f64>,
    #[arg(long)]
    pub artery: Option<String>,
    #[arg(long)]
    pub u_max: Option<f64>,
    #[arg(long)]
    pub entrance: Option<u8>,
    #[arg(long)]
    pub upstream_k: Option<u8>,
    #[arg(long)]
    pub downstream_k: Option<u8>,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Trajectory CSV path; defaults to `<out-dir>/trajectory.csv`.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `table2`, `table4` or `custom:<file>`.
    #[arg(long, default_value = "table2")]
    pub design: String,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Results CSV; defaults to `<out-dir>/results.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub maps: bool,
    #[arg(long)]
    pub boxplots: bool,
    #[arg(long)]
    pub table3: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "inv")]
    pub basis: String,
    /// Defaults to `<out-dir>/fit.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long, default_value = "table2")]
    pub design: String,
    /// Existing dynamic results for the same design; computed when absent.
    #[arg(long)]
    pub dynamic: Option<PathBuf>,
}

/// Exit status for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Applies global flag overrides on top of the config file.
pub fn resolve_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &global.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(w) = global.workers {
        cfg.workers = w;
    }
    if let Some(g) = global.gravity {
        cfg.gravity = g == Switch::On;
    }
    if let Some(f) = &global.flow {
        cfg.flow = f.parse::<FlowSpec>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<i32> {
    let mut cfg = resolve_config(&cli.global)?;
    match &cli.command {
        Command::Validate => {
            let report = run_validation(&cfg.blood.carreau);
            println!("{report}");
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Simulate(a) => simulate(&mut cfg, a),
        Command::Sweep(a) => sweep(&cfg, a),
        Command::Analyze(a) => analyze(&cfg, a),
        Command::Fit(a) => fit(&cfg, a),
        Command::Replay(a) => replay(&cfg, a),
    }
}

fn out_path(cfg: &RunConfig, explicit: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    let path = explicit.clone().unwrap_or_else(|| cfg.out_dir.join(name));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(path)
}

/// Controller chooser for a run: dynamic, or constant from a fit file,
/// explicit gradients or the config.
type ModeProvider = Box<dyn Fn(&ScenarioSpec) -> ControllerMode + Sync>;

fn mode_provider(cfg: &RunConfig, a: &ModeArgs) -> Result<ModeProvider> {
    let kind = match &a.mode {
        Some(m) => m.parse()?,
        None => cfg.controller.mode,
    };
    if kind == ModeKind::Dynamic {
        return Ok(Box::new(|_| ControllerMode::Dynamic));
    }
    let compensation = cfg.controller.gravity_compensation;
    if let Some(p) = &a.fit {
        let fit = FitModel::load(p)?;
        // Validate once so the closure cannot fail.
        fit.controller(100.0)?;
        return Ok(Box::new(move |s| match fit.controller(s.diameter_um()) {
            Ok(ControllerMode::Constant { g, .. }) => {
                ControllerMode::Constant { g, gravity_compensation: compensation }
            }
            _ => ControllerMode::Constant { g: [0.0; 3], gravity_compensation: compensation },
        }));
    }
    let g = match &a.constant {
        Some(v) => {
            let &[g1, g2, g3] = v.as_slice() else {
                return Err(Error::Config(format!("--constant takes G1,G2,G3, got {} values", v.len())));
            };
            let g = [g1, g2, g3];
            if g.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::Config("--constant gradients must be non-negative".into()));
            }
            g
        }
        None => match cfg.constant_mode()? {
            ControllerMode::Constant { g, .. } => g,
            ControllerMode::Dynamic => unreachable!("constant_mode returns a constant controller"),
        },
    };
    Ok(Box::new(move |_| ControllerMode::Constant { g, gravity_compensation: compensation }))
}

fn simulate(cfg: &mut RunConfig, a: &SimulateArgs) -> Result<i32> {
    let sc = &mut cfg.scenario;
    if let Some(v) = a.diameter_um {
        sc.diameter_um = v;
    }
    if let Some(v) = &a.artery {
        sc.artery = v.clone();
    }
    if let Some(v) = a.u_max {
        sc.u_max = v;
    }
    if let Some(v) = a.entrance {
        sc.entrance = v;
    }
    if let Some(v) = a.upstream_k {
        sc.upstream_k = v;
    }
    if let Some(v) = a.downstream_k {
        sc.downstream_k = v;
    }
    let spec = cfg.scenario.spec()?;
    let settings = cfg.run_settings()?;
    let mode = mode_provider(cfg, &a.mode)?(&spec);
    let rec = simulate_scenario(&spec, &mode, &settings, true)?;
    let path = out_path(cfg, &a.trajectory, "trajectory.csv")?;
    write_trajectory_csv(&path, &rec.samples)?;
    println!("{}", summary_line(&ScenarioResult::from_record(&spec, &mode, &rec)));
    if let Some(e) = &rec.error {
        eprintln!("simulation error: {e}");
    }
    println!("trajectory written to {}", path.display());
    Ok(if rec.outcome == Outcome::Stalled { 1 } else { 0 })
}

fn sweep(cfg: &RunConfig, a: &SweepArgs) -> Result<i32> {
    let grid = factorial_grid(&DesignLevels::from_name(&a.design)?)?;
    let settings = cfg.run_settings()?;
    let mode = mode_provider(cfg, &a.mode)?;
    let results = run_sweep(&grid, mode.as_ref(), &settings, cfg.workers)?;
    let path = out_path(cfg, &a.out, "results.csv")?;
    write_results_csv(&path, &results)?;
    report_sweep(&results, &path)?;
    Ok(0)
}

fn report_sweep(results: &[ScenarioResult], path: &Path) -> Result<()> {
    let count = |o: Outcome| results.iter().filter(|r| r.outcome == o).count();
    println!(
        "{} scenarios: success {:.4} (desired {}, other {}, stalled {})",
        results.len(),
        navigation_success(results)?,
        count(Outcome::Desired),
        count(Outcome::Other),
        count(Outcome::Stalled)
    );
    println!("results written to {}", path.display());
    Ok(())
}

fn analyze(cfg: &RunConfig, a: &AnalyzeArgs) -> Result<i32> {
    let results = read_results_csv(&a.input)?;
    if results.is_empty() {
        return Err(Error::Config(format!("{} has no results", a.input.display())));
    }
    let all = !(a.maps || a.boxplots || a.table3);
    std::fs::create_dir_all(&cfg.out_dir)?;
    if all || a.maps {
        let dir = cfg.out_dir.join("maps");
        std::fs::create_dir_all(&dir)?;
        let mut combos: Vec<(ArteryModel, f64)> = Vec::new();
        for r in &results {
            let c = (r.spec.artery, r.spec.u_max);
            if !combos.contains(&c) {
                combos.push(c);
            }
        }
        let mut files = 0;
        for (artery, u) in combos {
            files += write_gradient_maps(&dir, &artery, u, &gradient_maps(&results, &artery, u))?.len();
        }
        println!("{files} map files written to {}", dir.display());
    }
    if all || a.boxplots {
        for f in
            [Factor::Diameter, Factor::Artery, Factor::Velocity, Factor::Entrance, Factor::Upstream, Factor::Downstream]
        {
            let path = cfg.out_dir.join(format!("boxplots_{}.csv", f.name()));
            write_boxplots_csv(&path, &grouped_boxplots(&results, &[f]))?;
        }
        println!("boxplot statistics written to {}", cfg.out_dir.display());
    }
    if all || a.table3 {
        let rows = median_ratio_table(&results);
        let path = cfg.out_dir.join("median_ratios.csv");
        write_median_ratio_csv(&path, &rows)?;
        println!("{:>14} {:>8} {:>8} {:>10} {:>10} {:>10}", "factor", "min", "max", "G1 ratio", "G2 ratio", "G3 ratio");
        for r in &rows {
            println!(
                "{:>14} {:>8} {:>8} {:>10.4} {:>10.4} {:>10.4}",
                r.factor, r.min_level, r.max_level, r.ratio[0], r.ratio[1], r.ratio[2]
            );
        }
        println!("median ratios written to {}", path.display());
    }
    Ok(0)
}

fn fit(cfg: &RunConfig, a: &FitArgs) -> Result<i32> {
    let basis: FitBasis = a.basis.parse()?;
    let results = read_results_csv(&a.input)?;
    let model = fit_predictive_equations(&diameter_medians(&results), basis)?;
    let path = out_path(cfg, &a.out, "fit.json")?;
    model.save(&path)?;
    let x = match basis {
        FitBasis::Inv => "(1/d)",
        FitBasis::Poly => "d",
    };
    for region in Region::ALL {
        let c = model.coefficients[region.index()];
        println!(
            "{region} = {:.6} + {:.6}·{x} + {:.6}·{x}²   (d in mm, rss {:.3e})",
            c[0],
            c[1],
            c[2],
            model.rss[region.index()]
        );
    }
    println!("fit written to {}", path.display());
    Ok(0)
}

fn replay(cfg: &RunConfig, a: &ReplayArgs) -> Result<i32> {
    let fit = FitModel::load(&a.fit)?;
    let grid = factorial_grid(&DesignLevels::from_name(&a.design)?)?;
    let settings: RunSettings = cfg.run_settings()?;
    let dynamic = match &a.dynamic {
        Some(p) => read_results_csv(p)?,
        None => {
            let d = run_sweep(&grid, &|_| ControllerMode::Dynamic, &settings, cfg.workers)?;
            let path = out_path(cfg, &None, "dynamic_results.csv")?;
            write_results_csv(&path, &d)?;
            d
        }
    };
    let modes = ModeArgs { mode: Some("constant".into()), fit: Some(a.fit.clone()), constant: None };
    let mode = mode_provider(cfg, &modes)?;
    let constant = run_sweep(&grid, mode.as_ref(), &settings, cfg.workers)?;
    let report = replay_comparison(&dynamic, &constant, &fit)?;
    write_results_csv(&out_path(cfg, &None, "constant_results.csv")?, &constant)?;
    write_replay_csv(&out_path(cfg, &None, "replay.csv")?, &report)?;
    std::fs::write(out_path(cfg, &None, "replay_report.txt")?, format!("{report}\n"))?;
    println!("{report}");
    Ok(0)
}
