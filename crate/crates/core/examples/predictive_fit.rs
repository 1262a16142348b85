// Predictive equations for G1-G3 against diameter, in both bases.

use magnav::analysis::{diameter_medians, fit_predictive_equations, FitBasis};
use magnav::control::ControllerMode;
use magnav::geometry::Region;
use magnav::sweep::{factorial_grid, run_sweep, DesignLevels, RunSettings};

pub fn run() -> magnav::Result<()> {
    // Centre entrance, all arteries, velocities and target pairs.
    let levels = DesignLevels { entrances: vec![3], velocities: vec![0.25, 0.45, 0.65], ..DesignLevels::table2() };
    let grid = factorial_grid(&levels)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let results = run_sweep(&grid, &|_| ControllerMode::Dynamic, &RunSettings::default(), workers)?;
    let points = diameter_medians(&results);

    println!("{:>8} {:>9} {:>9} {:>9}", "d [um]", "G1", "G2", "G3");
    for p in &points {
        println!("{:>8} {:>9.4} {:>9.4} {:>9.4}", p.diameter_um, p.medians[0], p.medians[1], p.medians[2]);
    }

    for basis in [FitBasis::Inv, FitBasis::Poly] {
        let fit = fit_predictive_equations(&points, basis)?;
        println!("\nbasis {basis:?}");
        for region in Region::ALL {
            let c = fit.coefficients[region.index()];
            println!("  {region}: {:+.5} {:+.5} x {:+.5} x^2   rss {:.2e}", c[0], c[1], c[2], fit.rss[region.index()]);
        }
        let unseen: Vec<String> = [75.0, 175.0, 375.0, 650.0, 850.0]
            .iter()
            .map(|d| format!("{d}:{:.3}", fit.predict(Region::G2, *d)))
            .collect();
        println!("  G2 at unseen diameters {}", unseen.join(" "));
    }

    let fit = fit_predictive_equations(&points, FitBasis::Inv)?;
    let path = std::env::temp_dir().join("magnav-examples").join("fit.json");
    std::fs::create_dir_all(path.parent().unwrap())?;
    fit.save(&path)?;
    println!("\nfit written to {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
