use std::collections::BTreeMap;

use magnav::analysis::{
    diameter_medians, fit_predictive_equations, gradient_maps, grouped_boxplots, median_ratio_table, Factor, FitBasis,
};
use magnav::control::ControllerMode;
use magnav::geometry::{ArteryModel, ArteryPreset, Region};
use magnav::sweep::{
    factorial_grid, read_results_csv, run_sweep, write_results_csv, DesignLevels, RunSettings, ScenarioResult,
};

fn sweep(levels: DesignLevels) -> Vec<ScenarioResult> {
    let grid = factorial_grid(&levels).unwrap();
    run_sweep(&grid, &|_| ControllerMode::Dynamic, &RunSettings::default(), 4).unwrap()
}

fn centre_design() -> Vec<ScenarioResult> {
    sweep(DesignLevels { entrances: vec![3], velocities: vec![0.25, 0.45, 0.65], ..DesignLevels::table2() })
}

#[test]
fn maps_match_bruteforce_recomputation_from_csv() {
    let results = sweep(DesignLevels {
        diameters_um: vec![100.0, 1000.0],
        arteries: vec!["PCA".into()],
        velocities: vec![0.45],
        entrances: vec![1, 5],
        ..DesignLevels::table2()
    });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_results_csv(&path, &results).unwrap();

    // Independent scan of the raw text.
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut sums: BTreeMap<(String, String, String, String), (f64, usize)> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let key = (
            f[col("diameter_um")].into(),
            f[col("entrance")].into(),
            f[col("upstream_k")].into(),
            f[col("downstream_k")].into(),
        );
        let v: f64 = f[col("g2_mean")].parse().unwrap();
        let e = sums.entry(key).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }

    let back = read_results_csv(&path).unwrap();
    let maps = gradient_maps(&back, &ArteryModel::preset(ArteryPreset::Pca), 0.45);
    assert_eq!(maps.len(), 4);
    for m in &maps {
        for (i, row) in m.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let key = (m.diameter_um.to_string(), m.entrance.to_string(), (i + 1).to_string(), (j + 1).to_string());
                let (s, n) = sums[&key];
                let got = cell.unwrap().gradient[1].unwrap();
                assert!((got - s / n as f64).abs() <= 1e-15 * got.abs(), "{key:?}");
            }
        }
    }
}

#[test]
fn pca_large_robot_near_upstream_target_needs_moderate_g2() {
    let results = sweep(DesignLevels {
        diameters_um: vec![1000.0],
        arteries: vec!["PCA".into()],
        velocities: vec![0.45],
        ..DesignLevels::table2()
    });
    for m in gradient_maps(&results, &ArteryModel::preset(ArteryPreset::Pca), 0.45) {
        let lowest = m.cells[0][..2].iter().map(|c| c.unwrap().gradient[1].unwrap()).fold(f64::INFINITY, f64::min);
        assert!((0.4..=0.6).contains(&lowest), "entrance {}: {lowest}", m.entrance);
    }
}

#[test]
fn diameter_dominates_and_medians_decrease() {
    let results = centre_design();
    let table = median_ratio_table(&results);
    let spread = |r: f64| r.max(1.0 / r);
    let g2 = Region::G2.index();
    let diameter = spread(table[0].ratio[g2]);
    assert_eq!(table[0].factor, "diameter_um");
    for row in &table[1..] {
        assert!(diameter > 2.0 * spread(row.ratio[g2]), "{} ratio {:?}", row.factor, row.ratio);
    }

    // Table entries agree with boxplot medians of the same groups.
    let groups = grouped_boxplots(&results, &[Factor::Diameter]);
    let first = groups.first().unwrap().magnitude[g2].as_ref().unwrap().median;
    let last = groups.last().unwrap().magnitude[g2].as_ref().unwrap().median;
    assert_eq!(first, table[0].at_min[g2]);
    assert_eq!(last, table[0].at_max[g2]);
}

#[test]
fn median_g2_decreases_with_diameter_over_full_design() {
    let results = sweep(DesignLevels::table2());
    let medians: Vec<f64> = diameter_medians(&results).iter().map(|p| p.medians[Region::G2.index()]).collect();
    assert_eq!(medians.len(), 5);
    assert!(medians.windows(2).all(|w| w[0] > w[1]), "{medians:?}");
}

#[test]
fn inverse_basis_predictions_stay_positive() {
    let results = centre_design();
    let fit = fit_predictive_equations(&diameter_medians(&results), FitBasis::Inv).unwrap();
    for k in 0..=950 {
        let d = 50.0 + k as f64;
        for region in Region::ALL {
            assert!(fit.predict(region, d) > 0.0, "{region} at {d} um");
        }
    }
}

#[test]
fn commanded_azimuths_cluster_near_right_angle_in_g2() {
    let results = centre_design();
    let stats = grouped_boxplots(&results, &[]);
    let az = stats[0].azimuth_deg[Region::G2.index()].as_ref().unwrap();
    assert!(az.q1 >= 0.0 && az.q3 <= 180.0);
    assert!((45.0..=135.0).contains(&az.median), "{}", az.median);
}
