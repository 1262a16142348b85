// Navigating through an imported structured-grid velocity field.
//
// The analytic flow is sampled onto a lattice, written in the grid text
// format, read back and used in place of the analytic field.

use std::sync::Arc;

use magnav::control::ControllerMode;
use magnav::geometry::{ArteryModel, ArteryPreset, Branch};
use magnav::hemodynamics::{
    load_grid_field, write_grid_field, AnalyticBifurcationFlow, FlowField, GridField, GridSpec,
};
use magnav::sweep::{run_scenario, summary_line, FlowSource, RunSettings, ScenarioSpec};
use magnav::Vec3;

pub fn run() -> magnav::Result<()> {
    let artery = ArteryModel::preset(ArteryPreset::Aca);
    let geometry = artery.geometry()?;
    let analytic = AnalyticBifurcationFlow::new(&geometry, 0.45, magnav::hemodynamics::PROFILE_EXPONENT)?;

    // Bounding box of the vessel with one spacing of margin.
    let h = 2e-4;
    let reach = geometry.outlet_center(Branch::Desired) + Vec3::repeat(geometry.main_radius() + h);
    let origin = Vec3::new(-h, -reach.y, -(geometry.main_radius() + h));
    let nodes = |extent: f64| (extent / h).ceil() as usize + 1;
    let dims = [nodes(reach.x - origin.x), nodes(2.0 * reach.y), nodes(-2.0 * origin.z)];
    let spec = GridSpec { dims, origin, spacing: h };
    let field = GridField::from_fn(spec, |p| {
        (geometry.wall_distance(p).distance >= 0.0).then(|| analytic.velocity(p).unwrap_or_else(|_| Vec3::zeros()))
    })?;

    let path = std::env::temp_dir().join("magnav-examples").join("aca_045.grid");
    std::fs::create_dir_all(path.parent().unwrap())?;
    write_grid_field(&path, &field)?;
    let imported = load_grid_field(&path)?;
    println!("grid {:?} nodes, {:.1} MB on disk", imported.spec().dims, std::fs::metadata(&path)?.len() as f64 / 1e6);

    let probe = Vec3::new(10e-3, 2e-4, 1e-4);
    println!("analytic {:.4?}  grid {:.4?}", analytic.velocity(&probe)?, imported.velocity(&probe)?);

    let settings = RunSettings { flow: FlowSource::Grid(Arc::new(imported)), ..RunSettings::default() };
    let spec =
        ScenarioSpec { index: 0, diameter: 250e-6, artery, u_max: 0.45, entrance: 3, upstream_k: 2, downstream_k: 2 };
    println!("{}", summary_line(&run_scenario(&spec, &ControllerMode::Dynamic, &settings)));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
