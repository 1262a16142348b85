// One robot through the anterior cerebral artery with per-step gradients.
//
// Run with `cargo run --example reference_trajectory`.

use magnav::control::ControllerMode;
use magnav::geometry::{ArteryModel, ArteryPreset, Region};
use magnav::sweep::{simulate_scenario, summary_line, write_trajectory_csv, RunSettings, ScenarioResult, ScenarioSpec};

pub fn run() -> magnav::Result<()> {
    let spec = ScenarioSpec {
        index: 0,
        diameter: 500e-6,
        artery: ArteryModel::preset(ArteryPreset::Aca),
        u_max: 0.45,
        entrance: 3,
        upstream_k: 2,
        downstream_k: 2,
    };
    let mode = ControllerMode::Dynamic;
    let record = simulate_scenario(&spec, &mode, &RunSettings::default(), true)?;
    println!("{}", summary_line(&ScenarioResult::from_record(&spec, &mode, &record)));

    for region in Region::ALL {
        if let Some(g) = record.region(region) {
            println!(
                "{region}: {} steps, mean {:.3} T/m, peak {:.3} T/m, azimuth {:.1} deg",
                g.count,
                g.mean,
                g.max,
                g.azimuth.to_degrees()
            );
        }
    }

    let dir = std::env::temp_dir().join("magnav-examples");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("reference_trajectory.csv");
    write_trajectory_csv(&path, &record.samples)?;
    println!("{} samples written to {}", record.samples.len(), path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
