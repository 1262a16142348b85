//! Aggregation of sweep results: boxplots, gradient maps, median ratios,
//! predictive equations and replay comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::control::{ControllerMode, Outcome};
use crate::error::{domain, Error, Result};
use crate::geometry::{ArteryModel, Region};
use crate::sweep::{ensure_same_grid, navigation_success, ScenarioResult};

/// Sample quantile with linear interpolation between order statistics:
/// position `h = (n − 1)·p` on the sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median of unsorted data; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(quantile_sorted(&v, 0.5))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Sorted ascending.
    pub outliers: Vec<f64>,
}

impl BoxplotStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Five-number summary with Tukey whiskers at 1.5·IQR.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(domain("boxplot of an empty sample"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(domain("boxplot sample contains non-finite values"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&v, 0.25);
    let q3 = quantile_sorted(&v, 0.75);
    let fence = 1.5 * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - fence, q3 + fence);
    let inside = v.iter().copied().filter(|x| (lo_fence..=hi_fence).contains(x));
    let whisker_low = inside.clone().fold(f64::INFINITY, f64::min);
    let whisker_high = inside.fold(f64::NEG_INFINITY, f64::max);
    Ok(BoxplotStats {
        count: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        median: quantile_sorted(&v, 0.5),
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers: v.iter().copied().filter(|x| *x < lo_fence || *x > hi_fence).collect(),
    })
}

/// Scenario factors usable as grouping keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Diameter,
    Artery,
    Velocity,
    Entrance,
    Upstream,
    Downstream,
}

impl Factor {
    pub const ALL: [Factor; 6] =
        [Self::Diameter, Self::Artery, Self::Velocity, Self::Entrance, Self::Upstream, Self::Downstream];

    pub fn name(self) -> &'static str {
        match self {
            Self::Diameter => "diameter_um",
            Self::Artery => "artery",
            Self::Velocity => "u_max",
            Self::Entrance => "entrance",
            Self::Upstream => "upstream_k",
            Self::Downstream => "downstream_k",
        }
    }

    /// Numeric level; arteries map to their main diameter in mm.
    pub fn level(self, r: &ScenarioResult) -> f64 {
        let s = &r.spec;
        match self {
            Self::Diameter => s.diameter_um(),
            Self::Artery => s.artery.main_diameter_mm(),
            Self::Velocity => s.u_max,
            Self::Entrance => f64::from(s.entrance),
            Self::Upstream => f64::from(s.upstream_k),
            Self::Downstream => f64::from(s.downstream_k),
        }
    }

    pub fn label(self, r: &ScenarioResult) -> String {
        match self {
            Self::Artery => r.spec.artery.to_string(),
            _ => self.level(r).to_string(),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().split('_').next() == Some(s))
            .ok_or_else(|| Error::Config(format!("unknown factor `{s}`")))
    }
}

/// Per-scenario region mean magnitudes, T/m.
fn region_means(results: &[&ScenarioResult], region: Region) -> Vec<f64> {
    results.iter().filter_map(|r| r.region(region).map(|g| g.mean)).collect()
}

/// Per-scenario region azimuths folded to [0°, 180°].
fn region_angles(results: &[&ScenarioResult], region: Region) -> Vec<f64> {
    results.iter().filter_map(|r| r.region(region).map(|g| g.azimuth.abs().to_degrees())).collect()
}

/// Boxplot statistics of one group of scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGradientStats {
    pub key: Vec<(Factor, String)>,
    pub magnitude: [Option<BoxplotStats>; 3],
    pub azimuth_deg: [Option<BoxplotStats>; 3],
}

/// Groups results by `factors` (in level order) and summarizes each region.
pub fn grouped_boxplots(results: &[ScenarioResult], factors: &[Factor]) -> Vec<RegionGradientStats> {
    type Group<'a> = (Vec<(Factor, String)>, Vec<&'a ScenarioResult>);
    let mut groups: BTreeMap<Vec<OrdF64>, Group> = BTreeMap::new();
    for r in results {
        let k = factors.iter().map(|f| OrdF64(f.level(r))).collect();
        groups.entry(k).or_insert_with(|| (factors.iter().map(|f| (*f, f.label(r))).collect(), Vec::new())).1.push(r);
    }
    groups
        .into_values()
        .map(|(key, rs)| RegionGradientStats {
            key,
            magnitude: Region::ALL.map(|g| boxplot_stats(&region_means(&rs, g)).ok()),
            azimuth_deg: Region::ALL.map(|g| boxplot_stats(&region_angles(&rs, g)).ok()),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per group, region and quantity (`magnitude` in T/m, `azimuth` in degrees).
pub fn write_boxplots_csv(path: &Path, stats: &[RegionGradientStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let factors: Vec<Factor> = stats.first().map(|s| s.key.iter().map(|k| k.0).collect()).unwrap_or_default();
    let mut header: Vec<String> = factors.iter().map(|f| f.name().to_owned()).collect();
    header.extend(
        ["region", "quantity", "count", "mean", "median", "q1", "q3", "whisker_low", "whisker_high", "outliers"]
            .map(String::from),
    );
    w.write_record(&header)?;
    for s in stats {
        for region in Region::ALL {
            for (quantity, b) in [("magnitude", &s.magnitude), ("azimuth", &s.azimuth_deg)] {
                let Some(b) = &b[region.index()] else { continue };
                let mut row: Vec<String> = s.key.iter().map(|k| k.1.clone()).collect();
                row.push(region.to_string());
                row.push(quantity.into());
                row.push(b.count.to_string());
                row.extend([b.mean, b.median, b.q1, b.q3, b.whisker_low, b.whisker_high].map(|x| x.to_string()));
                row.push(b.outliers.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"));
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Mean gradients and collisions of one (upstream, downstream) target pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCell {
    pub count: usize,
    /// Mean of the per-scenario region means, T/m.
    pub gradient: [Option<f64>; 3],
    pub collisions: f64,
}

/// 4×4 table over target offsets for one diameter and entrance position.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMap {
    pub diameter_um: f64,
    pub entrance: u8,
    /// Indexed `[upstream_k − 1][downstream_k − 1]`.
    pub cells: [[Option<MapCell>; 4]; 4],
}

impl GradientMap {
    /// Target pair with the lowest mean G2, as `(upstream_k, downstream_k, G2)`.
    pub fn lowest_g2(&self) -> Option<(u8, u8, f64)> {
        let mut best: Option<(u8, u8, f64)> = None;
        for (i, row) in self.cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if let Some(g2) = c.and_then(|c| c.gradient[1]) {
                    if best.is_none_or(|b| g2 < b.2) {
                        best = Some((i as u8 + 1, j as u8 + 1, g2));
                    }
                }
            }
        }
        best
    }
}

/// Gradient maps for one artery and inlet velocity, ordered by diameter then
/// entrance position.
pub fn gradient_maps(results: &[ScenarioResult], artery: &ArteryModel, u_max: f64) -> Vec<GradientMap> {
    let mut acc: BTreeMap<(OrdF64, u8), [[Vec<&ScenarioResult>; 4]; 4]> = BTreeMap::new();
    for r in results.iter().filter(|r| r.spec.artery == *artery && r.spec.u_max == u_max) {
        let s = &r.spec;
        let cells = acc.entry((OrdF64(s.diameter_um()), s.entrance)).or_default();
        cells[usize::from(s.upstream_k) - 1][usize::from(s.downstream_k) - 1].push(r);
    }
    acc.into_iter()
        .map(|((d, entrance), cells)| GradientMap {
            diameter_um: d.0,
            entrance,
            cells: cells.map(|row| {
                row.map(|rs| {
                    (!rs.is_empty()).then(|| {
                        let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
                        MapCell {
                            count: rs.len(),
                            gradient: Region::ALL.map(|g| mean(region_means(&rs, g))),
                            collisions: rs.iter().map(|r| f64::from(r.collisions)).sum::<f64>() / rs.len() as f64,
                        }
                    })
                })
            }),
        })
        .collect()
}

/// Writes `map_<artery>_<u_max>_<g1|g2|g3|collisions>.csv` into `dir` and
/// returns the paths. Missing cells are empty fields.
pub fn write_gradient_maps(
    dir: &Path,
    artery: &ArteryModel,
    u_max: f64,
    maps: &[GradientMap],
) -> Result<Vec<std::path::PathBuf>> {
    let mut paths = Vec::new();
    type Layer = (&'static str, fn(&MapCell) -> Option<f64>);
    let layers: [Layer; 4] = [
        ("g1", |c| c.gradient[0]),
        ("g2", |c| c.gradient[1]),
        ("g3", |c| c.gradient[2]),
        ("collisions", |c| Some(c.collisions)),
    ];
    for (name, get) in &layers {
        let path = dir.join(format!("map_{artery}_{u_max}_{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["diameter_um", "entrance", "upstream_k", "dn1", "dn2", "dn3", "dn4"])?;
        for m in maps {
            for (i, row) in m.cells.iter().enumerate() {
                let mut rec = vec![m.diameter_um.to_string(), m.entrance.to_string(), (i + 1).to_string()];
                rec.extend(row.iter().map(|c| opt(c.as_ref().and_then(*get))));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// Medians at a factor's extreme levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianRatioRow {
    pub factor: String,
    pub min_level: f64,
    pub max_level: f64,
    /// T/m; NaN where a region was never visited.
    pub at_min: [f64; 3],
    pub at_max: [f64; 3],
    /// `at_min / at_max`; 1 for single-level factors.
    pub ratio: [f64; 3],
}

/// Median region gradients at the smallest and largest level of diameter,
/// velocity, entrance and upstream offset.
pub fn median_ratio_table(results: &[ScenarioResult]) -> Vec<MedianRatioRow> {
    [Factor::Diameter, Factor::Velocity, Factor::Entrance, Factor::Upstream]
        .into_iter()
        .filter_map(|f| {
            let levels: Vec<f64> = results.iter().map(|r| f.level(r)).collect();
            let lo = levels.iter().copied().reduce(f64::min)?;
            let hi = levels.iter().copied().reduce(f64::max)?;
            let medians = |level: f64| {
                let rs: Vec<&ScenarioResult> = results.iter().filter(|r| f.level(r) == level).collect();
                Region::ALL.map(|g| median(&region_means(&rs, g)).unwrap_or(f64::NAN))
            };
            let (at_min, at_max) = (medians(lo), medians(hi));
            let ratio = if lo == hi { [1.0; 3] } else { [0, 1, 2].map(|i| at_min[i] / at_max[i]) };
            Some(MedianRatioRow { factor: f.name().to_owned(), min_level: lo, max_level: hi, at_min, at_max, ratio })
        })
        .collect()
}

pub fn write_median_ratio_csv(path: &Path, rows: &[MedianRatioRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "factor",
        "min_level",
        "max_level",
        "g1_min",
        "g2_min",
        "g3_min",
        "g1_max",
        "g2_max",
        "g3_max",
        "g1_ratio",
        "g2_ratio",
        "g3_ratio",
    ])?;
    for r in rows {
        let mut rec = vec![r.factor.clone(), r.min_level.to_string(), r.max_level.to_string()];
        rec.extend(r.at_min.iter().chain(&r.at_max).chain(&r.ratio).map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Regressor of the predictive equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitBasis {
    /// `{1, 1/d, 1/d²}`, d in mm.
    #[default]
    Inv,
    /// `{1, d, d²}`, d in mm.
    Poly,
}

impl FitBasis {
    pub fn regressor(self, diameter_um: f64) -> f64 {
        let d_mm = diameter_um * 1e-3;
        match self {
            Self::Inv => 1.0 / d_mm,
            Self::Poly => d_mm,
        }
    }
}

impl std::str::FromStr for FitBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inv" => Ok(Self::Inv),
            "poly" => Ok(Self::Poly),
            _ => Err(Error::Config(format!("unknown fit basis `{s}`, expected inv or poly"))),
        }
    }
}

/// Least-squares coefficients `(c0, c1, c2)` of `y ≈ c0 + c1·x + c2·x²`.
pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Result<[f64; 3]> {
    if xs.len() != ys.len() {
        return Err(domain("fit inputs differ in length"));
    }
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 distinct regressor values, got {}", distinct.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite fit data".into()));
    }
    let a = DMatrix::from_fn(xs.len(), 3, |i, j| xs[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.iter().filter(|s| **s > smax * 1e-12).count() < 3 {
        return Err(Error::Fit("design matrix is rank deficient".into()));
    }
    let c = svd.solve(&b, smax * 1e-12).map_err(|e| Error::Fit(e.to_owned()))?;
    Ok([c[0], c[1], c[2]])
}

/// Per-region quadratic predictive equations in the chosen regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub basis: FitBasis,
    /// `coefficients[region] = [c0, c1, c2]`, T/m.
    pub coefficients: [[f64; 3]; 3],
    /// Residual sum of squares per region, (T/m)².
    pub rss: [f64; 3],
    /// Fitted points: diameter in μm and region medians in T/m.
    pub points: Vec<FitPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub diameter_um: f64,
    pub medians: [f64; 3],
}

impl FitModel {
    pub fn predict(&self, region: Region, diameter_um: f64) -> f64 {
        let x = self.basis.regressor(diameter_um);
        let c = self.coefficients[region.index()];
        c[0] + c[1] * x + c[2] * x * x
    }

    pub fn predict_all(&self, diameter_um: f64) -> [f64; 3] {
        Region::ALL.map(|g| self.predict(g, diameter_um))
    }

    /// Constant-mode controller for a diameter; negative predictions clamp to 0.
    pub fn controller(&self, diameter_um: f64) -> Result<ControllerMode> {
        let [g1, g2, g3] = self.predict_all(diameter_um).map(|g| g.max(0.0));
        ControllerMode::constant(g1, g2, g3)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }
}

/// Median region gradients for every diameter present, ascending.
pub fn diameter_medians(results: &[ScenarioResult]) -> Vec<FitPoint> {
    grouped_boxplots(results, &[Factor::Diameter])
        .into_iter()
        .map(|s| FitPoint {
            diameter_um: s.key[0].1.parse().unwrap_or(f64::NAN),
            medians: s.magnitude.map(|b| b.map_or(f64::NAN, |b| b.median)),
        })
        .collect()
}

/// Fits each region's medians against diameter.
pub fn fit_predictive_equations(points: &[FitPoint], basis: FitBasis) -> Result<FitModel> {
    let xs: Vec<f64> = points.iter().map(|p| basis.regressor(p.diameter_um)).collect();
    let mut coefficients = [[0.0; 3]; 3];
    let mut rss = [0.0; 3];
    for region in Region::ALL {
        let k = region.index();
        let ys: Vec<f64> = points.iter().map(|p| p.medians[k]).collect();
        let c = fit_quadratic(&xs, &ys).map_err(|e| Error::Fit(format!("{region}: {e}")))?;
        coefficients[k] = c;
        rss[k] = xs.iter().zip(&ys).map(|(x, y)| (y - (c[0] + c[1] * x + c[2] * x * x)).powi(2)).sum();
    }
    Ok(FitModel { basis, coefficients, rss, points: points.to_vec() })
}

/// Dynamic medians versus equation predictions at one diameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayRow {
    pub diameter_um: f64,
    pub dynamic_median: [f64; 3],
    pub predicted: [f64; 3],
    /// `|dynamic − predicted| / dynamic`.
    pub relative_difference: [f64; 3],
    pub scenarios: usize,
    pub constant_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub dynamic_success: f64,
    pub constant_success: f64,
    pub rows: Vec<ReplayRow>,
    /// Mean over diameters of the relative differences.
    pub mean_relative_difference: [f64; 3],
}

impl ReplayReport {
    pub fn constant_failures(&self) -> usize {
        self.rows.iter().map(|r| r.constant_failures).sum()
    }

    /// Share of constant-mode failures at the `n` smallest diameters.
    pub fn failure_share_smallest(&self, n: usize) -> f64 {
        let total = self.constant_failures();
        if total == 0 {
            return 0.0;
        }
        self.rows.iter().take(n).map(|r| r.constant_failures).sum::<usize>() as f64 / total as f64
    }
}

/// Compares a dynamic sweep with its constant-mode replay over the same grid.
pub fn replay_comparison(
    dynamic: &[ScenarioResult],
    constant: &[ScenarioResult],
    fit: &FitModel,
) -> Result<ReplayReport> {
    ensure_same_grid(dynamic, constant)?;
    let medians = diameter_medians(dynamic);
    let rows: Vec<ReplayRow> = medians
        .iter()
        .map(|p| {
            let predicted = fit.predict_all(p.diameter_um);
            let in_group = |r: &&ScenarioResult| r.spec.diameter_um() == p.diameter_um;
            ReplayRow {
                diameter_um: p.diameter_um,
                dynamic_median: p.medians,
                predicted,
                relative_difference: [0, 1, 2].map(|k| ((p.medians[k] - predicted[k]) / p.medians[k]).abs()),
                scenarios: dynamic.iter().filter(in_group).count(),
                constant_failures: constant.iter().filter(in_group).filter(|r| r.outcome != Outcome::Desired).count(),
            }
        })
        .collect();
    let n = rows.len().max(1) as f64;
    let mean_relative_difference = [0, 1, 2].map(|k| rows.iter().map(|r| r.relative_difference[k]).sum::<f64>() / n);
    Ok(ReplayReport {
        dynamic_success: navigation_success(dynamic)?,
        constant_success: navigation_success(constant)?,
        rows,
        mean_relative_difference,
    })
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dynamic success  {:.4}", self.dynamic_success)?;
        writeln!(f, "constant success {:.4}", self.constant_success)?;
        writeln!(f, "constant failures {}", self.constant_failures())?;
        writeln!(
            f,
            "{:>10} {:>30} {:>30} {:>24} {:>8}",
            "d [um]", "dynamic median G1/G2/G3", "predicted G1/G2/G3", "difference %", "failed"
        )?;
        for r in &self.rows {
            let tri = |v: [f64; 3]| format!("{:.4}/{:.4}/{:.4}", v[0], v[1], v[2]);
            let pct = r.relative_difference.map(|x| x * 100.0);
            writeln!(
                f,
                "{:>10} {:>30} {:>30} {:>24} {:>8}",
                r.diameter_um,
                tri(r.dynamic_median),
                tri(r.predicted),
                format!("{:.1}/{:.1}/{:.1}", pct[0], pct[1], pct[2]),
                r.constant_failures
            )?;
        }
        let m = self.mean_relative_difference.map(|x| x * 100.0);
        write!(f, "mean difference % G1 {:.1} G2 {:.1} G3 {:.1}", m[0], m[1], m[2])
    }
}

pub fn write_replay_csv(path: &Path, report: &ReplayReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "diameter_um",
        "scenarios",
        "constant_failures",
        "g1_dynamic",
        "g2_dynamic",
        "g3_dynamic",
        "g1_predicted",
        "g2_predicted",
        "g3_predicted",
        "g1_rel_diff",
        "g2_rel_diff",
        "g3_rel_diff",
    ])?;
    for r in &report.rows {
        let mut rec = vec![r.diameter_um.to_string(), r.scenarios.to_string(), r.constant_failures.to_string()];
        rec.extend(r.dynamic_median.iter().chain(&r.predicted).chain(&r.relative_difference).map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::RegionSummary;
    use crate::geometry::ArteryPreset;
    use crate::sweep::ScenarioSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn result(d_um: f64, entrance: u8, up: u8, dn: u8, g: [f64; 3], outcome: Outcome) -> ScenarioResult {
        let region = |m: f64| Some(RegionSummary { count: 10, mean: m, median: m, max: m, azimuth: -1.2 });
        ScenarioResult {
            spec: ScenarioSpec {
                index: 0,
                diameter: d_um * 1e-6,
                artery: ArteryModel::preset(ArteryPreset::Pca),
                u_max: 0.45,
                entrance,
                upstream_k: up,
                downstream_k: dn,
            },
            mode: "dynamic".into(),
            outcome,
            collisions: 1,
            steps: 100,
            transit_time: 0.01,
            min_clearance: 0.0,
            regions: g.map(region),
            error: None,
        }
    }

    #[test]
    fn boxplot_examples() {
        let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((b.median, b.q1, b.q3), (3.0, 2.0, 4.0));
        assert!(b.outliers.is_empty());
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 5.0));
        let c = boxplot_stats(&[0.7; 6]).unwrap();
        assert_eq!((c.median, c.q1, c.q3, c.whisker_low, c.whisker_high, c.iqr()), (0.7, 0.7, 0.7, 0.7, 0.7, 0.0));
        let o = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(o.outliers, vec![100.0]);
        assert_eq!(o.whisker_high, 4.0);
        assert!(boxplot_stats(&[]).is_err());
        // h = 3·0.25 = 0.75 between 1 and 2
        assert_relative_eq!(boxplot_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap().q1, 1.75);
    }

    proptest! {
        #[test]
        fn boxplot_is_order_invariant_and_ordered(mut v in prop::collection::vec(-1e3f64..1e3, 1..40), seed in any::<u64>()) {
            let a = boxplot_stats(&v).unwrap();
            let n = v.len();
            for i in 0..n {
                v.swap(i, (seed as usize).wrapping_mul(i + 7) % n);
            }
            let b = boxplot_stats(&v).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.q1 <= a.median && a.median <= a.q3);
            prop_assert!(a.whisker_low >= a.q1 - 1.5 * a.iqr() && a.whisker_high <= a.q3 + 1.5 * a.iqr());
            prop_assert_eq!(a.count, n);
            let inside = v.iter().filter(|x| **x >= a.whisker_low && **x <= a.whisker_high).count();
            prop_assert_eq!(inside + a.outliers.len(), n);
        }

        #[test]
        fn fit_residual_is_orthogonal(ys in prop::collection::vec(0.0f64..5.0, 5)) {
            let xs = [20.0, 10.0, 4.0, 2.0, 1.0];
            let c = fit_quadratic(&xs, &ys).unwrap();
            let r: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (c[0] + c[1] * x + c[2] * x * x)).collect();
            let scale: f64 = ys.iter().map(|y| y.abs()).sum::<f64>().max(1.0);
            for j in 0..3 {
                let col: Vec<f64> = xs.iter().map(|x: &f64| x.powi(j)).collect();
                let dot: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
                let norm: f64 = col.iter().map(|a| a.abs()).sum();
                prop_assert!(dot.abs() < 1e-9 * norm * scale, "column {} dot {}", j, dot);
            }
        }
    }

    #[test]
    fn fit_recovers_exact_span_and_constants() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x + 4.0 * x * x).collect();
        let c = fit_quadratic(&xs, &ys).unwrap();
        for (got, want) in c.iter().zip([2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-9, "{c:?}");
        }
        let k = fit_quadratic(&xs, &[0.3; 5]).unwrap();
        assert!((k[0] - 0.3).abs() < 1e-12 && k[1].abs() < 1e-12 && k[2].abs() < 1e-12);
        assert!(matches!(fit_quadratic(&[1.0, 1.0, 2.0, 2.0], &[1.0; 4]), Err(Error::Fit(_))));
    }

    #[test]
    fn fit_model_predicts_and_round_trips() {
        let points: Vec<FitPoint> = [50.0, 100.0, 250.0, 500.0, 1000.0]
            .into_iter()
            .map(|d| {
                let x = 1000.0 / d;
                FitPoint { diameter_um: d, medians: [0.1 + 0.01 * x, 0.2 + 0.05 * x + 0.002 * x * x, 0.1] }
            })
            .collect();
        let fit = fit_predictive_equations(&points, FitBasis::Inv).unwrap();
        assert_relative_eq!(
            fit.predict(Region::G2, 75.0),
            0.2 + 0.05 * (1000.0 / 75.0) + 0.002 * (1000.0f64 / 75.0).powi(2),
            max_relative = 1e-9
        );
        assert!(fit.rss.iter().all(|r| *r < 1e-20));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fit.json");
        fit.save(&p).unwrap();
        assert_eq!(FitModel::load(&p).unwrap(), fit);
        match fit.controller(100.0).unwrap() {
            ControllerMode::Constant { g, gravity_compensation } => {
                assert!(gravity_compensation);
                assert_relative_eq!(g[0], 0.2, max_relative = 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn maps_have_empty_cells_and_average_duplicates() {
        let a = result(1000.0, 3, 1, 2, [0.1, 0.5, 0.2], Outcome::Desired);
        let maps = gradient_maps(std::slice::from_ref(&a), &a.spec.artery, 0.45);
        assert_eq!(maps.len(), 1);
        let filled = maps[0].cells.iter().flatten().filter(|c| c.is_some()).count();
        assert_eq!(filled, 1);
        assert_eq!(maps[0].cells[0][1].unwrap().gradient[1], Some(0.5));
        let dup = gradient_maps(&[a.clone(), a.clone()], &a.spec.artery, 0.45);
        assert_eq!(dup[0].cells[0][1].unwrap().gradient, maps[0].cells[0][1].unwrap().gradient);
        assert_eq!(dup[0].lowest_g2(), Some((1, 2, 0.5)));
        assert!(gradient_maps(std::slice::from_ref(&a), &a.spec.artery, 0.55).is_empty());

        let dir = tempfile::tempdir().unwrap();
        let paths = write_gradient_maps(dir.path(), &a.spec.artery, 0.45, &maps).unwrap();
        assert_eq!(paths.len(), 4);
        let text = std::fs::read_to_string(&paths[1]).unwrap();
        assert!(text.contains("1000,3,1,,0.5,,"), "{text}");
    }

    #[test]
    fn median_ratios_and_groups() {
        let rs = vec![
            result(50.0, 1, 1, 1, [1.0, 4.0, 2.0], Outcome::Desired),
            result(50.0, 5, 1, 1, [3.0, 6.0, 2.0], Outcome::Desired),
            result(1000.0, 1, 1, 1, [0.1, 0.2, 0.1], Outcome::Desired),
            result(1000.0, 5, 1, 1, [0.3, 0.4, 0.1], Outcome::Desired),
        ];
        let table = median_ratio_table(&rs);
        let d = &table[0];
        assert_eq!(d.factor, "diameter_um");
        assert_relative_eq!(d.ratio[1], 5.0 / 0.3);
        let v = table.iter().find(|r| r.factor == "u_max").unwrap();
        assert_eq!(v.ratio, [1.0; 3]);
        let groups = grouped_boxplots(&rs, &[Factor::Diameter]);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].magnitude[1].as_ref().unwrap().median, d.at_min[1]);
        assert_relative_eq!(groups[0].azimuth_deg[0].as_ref().unwrap().median, 1.2f64.to_degrees());
    }

    #[test]
    fn replay_of_identical_inputs() {
        let mut rs = Vec::new();
        for (i, d) in [50.0, 100.0, 500.0].into_iter().enumerate() {
            let g = 1.0 / (i as f64 + 1.0);
            rs.push(result(d, 3, 1, 1, [g, 2.0 * g, g], Outcome::Desired));
        }
        let fit = fit_predictive_equations(&diameter_medians(&rs), FitBasis::Inv).unwrap();
        let rep = replay_comparison(&rs, &rs, &fit).unwrap();
        assert_eq!(rep.dynamic_success, rep.constant_success);
        assert!(rep.mean_relative_difference.iter().all(|x| *x < 1e-9));
        assert_eq!(rep.constant_failures(), 0);
        let mut short = rs.clone();
        short.pop();
        assert!(matches!(replay_comparison(&rs, &short, &fit), Err(Error::GridMismatch(_))));
        let mut failed = rs.clone();
        failed[0].outcome = Outcome::Other;
        let rep = replay_comparison(&rs, &failed, &fit).unwrap();
        assert_eq!(rep.failure_share_smallest(2), 1.0);
        assert_relative_eq!(rep.constant_success, 2.0 / 3.0);
    }
}
