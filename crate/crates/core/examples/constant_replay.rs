// Replaces per-step gradients with constant per-region values from a fit
// and compares navigation success.

use magnav::analysis::{diameter_medians, fit_predictive_equations, replay_comparison, FitBasis};
use magnav::control::ControllerMode;
use magnav::sweep::{factorial_grid, run_sweep, DesignLevels, RunSettings, ScenarioSpec};

pub fn run() -> magnav::Result<()> {
    let levels = DesignLevels {
        arteries: vec!["ACA".into()],
        velocities: vec![0.25, 0.45, 0.65],
        entrances: vec![1, 3, 5],
        ..DesignLevels::table2()
    };
    let grid = factorial_grid(&levels)?;
    let settings = RunSettings::default();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());

    let dynamic = run_sweep(&grid, &|_| ControllerMode::Dynamic, &settings, workers)?;
    let fit = fit_predictive_equations(&diameter_medians(&dynamic), FitBasis::Inv)?;
    let constant = run_sweep(
        &grid,
        &|s: &ScenarioSpec| fit.controller(s.diameter_um()).expect("fit yields finite gradients"),
        &settings,
        workers,
    )?;

    let report = replay_comparison(&dynamic, &constant, &fit)?;
    println!("{report}");
    println!("failures at the two smallest diameters: {:.0}%", 100.0 * report.failure_share_smallest(2));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
