// A reduced full-factorial sweep on all cores, written as a results table.

use magnav::control::{ControllerMode, Outcome};
use magnav::sweep::{
    factorial_grid, navigation_success, read_results_csv, run_sweep, write_results_csv, DesignLevels, RunSettings,
};

pub fn run() -> magnav::Result<()> {
    let levels = DesignLevels {
        diameters_um: vec![100.0, 500.0],
        arteries: vec!["ACA".into(), "MCA".into()],
        velocities: vec![0.25, 0.65],
        entrances: vec![1, 3, 5],
        upstream_k: vec![1, 4],
        downstream_k: vec![1, 4],
    };
    let grid = factorial_grid(&levels)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let results = run_sweep(&grid, &|_| ControllerMode::Dynamic, &RunSettings::default(), workers)?;

    let path = std::env::temp_dir().join("magnav-examples").join("sweep_results.csv");
    std::fs::create_dir_all(path.parent().unwrap())?;
    write_results_csv(&path, &results)?;
    assert_eq!(read_results_csv(&path)?, results);

    let collided = results.iter().filter(|r| r.collisions > 0).count();
    println!("{} scenarios on {workers} workers", results.len());
    println!("navigation success {:.3}", navigation_success(&results)?);
    println!("trajectories with wall contact: {collided}");
    for r in results.iter().filter(|r| r.outcome != Outcome::Desired) {
        println!("missed: {:?}", r.spec);
    }
    println!("results written to {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
