// Gradient maps over target placements for the posterior cerebral artery.
//
// Each map is a 4x4 table of mean G2 over upstream (rows) and downstream
// (columns) target offsets, one per entrance position.

use magnav::analysis::{gradient_maps, write_gradient_maps};
use magnav::control::ControllerMode;
use magnav::geometry::{ArteryModel, ArteryPreset};
use magnav::sweep::{factorial_grid, run_sweep, DesignLevels, RunSettings};

pub fn run() -> magnav::Result<()> {
    let artery = ArteryModel::preset(ArteryPreset::Pca);
    let u_max = 0.45;
    let levels = DesignLevels {
        diameters_um: vec![1000.0],
        arteries: vec![artery.to_string()],
        velocities: vec![u_max],
        ..DesignLevels::table2()
    };
    let grid = factorial_grid(&levels)?;
    let results = run_sweep(&grid, &|_| ControllerMode::Dynamic, &RunSettings::default(), 4)?;
    let maps = gradient_maps(&results, &artery, u_max);

    for map in &maps {
        println!("d = {} um, entrance {}: mean G2 [T/m]", map.diameter_um, map.entrance);
        for (i, row) in map.cells.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.and_then(|c| c.gradient[1]).map_or("     -".into(), |g| format!("{g:6.3}")))
                .collect();
            println!("  -{}D  {}", i + 1, cells.join(" "));
        }
        if let Some((up, dn, g2)) = map.lowest_g2() {
            println!("  lowest G2 {g2:.3} T/m at -{up}D+{dn}D");
        }
        let near: Vec<f64> = map.cells[0][..2].iter().filter_map(|c| c.and_then(|c| c.gradient[1])).collect();
        println!("  upstream target at -1D: G2 from {:.3} T/m", near.iter().copied().fold(f64::INFINITY, f64::min));
    }

    let dir = std::env::temp_dir().join("magnav-examples").join("maps");
    std::fs::create_dir_all(&dir)?;
    for p in write_gradient_maps(&dir, &artery, u_max, &maps)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
