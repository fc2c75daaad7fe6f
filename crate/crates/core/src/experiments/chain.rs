use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{config_error, family_directions, ExperimentConfig, ExperimentReport, Needs, Outcome, Table};
use crate::error::Result;
use crate::frostman::{circle_frostman, AngularCells};
use crate::io::render_series_svg;
use crate::maximal::direction_sweep;
use crate::testsets::{generate, neighborhood};
use crate::tube_measures::pipeline_measure;

/// Largest tolerated fraction of directions whose measure cannot be lifted.
const MAX_LIFT_FAILURES: f64 = 0.1;
/// Lower bound for `σ^δ(E^δ)` and `|K(δ)|`, relative to the coarsest scale.
const STABILITY: f64 = 0.1;

/// Runs the lower-bound argument as a computation, one scale at a time:
/// pipeline measures give the mass floor `m`, the sweep of `M^δ χ_{K(δ)}`
/// gives the level set `E^δ = {value > m/2}`, and `σ^δ` is the Frostman
/// measure on it.
pub fn exp_lower_bound_chain(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(&[Needs::Directions]).map_err(config_error)?;
    let dirs = family_directions(cfg);
    if dirs.is_empty() {
        return Err(crate::Error::Config("recipe declares no segment directions".into()));
    }
    let n = cfg.directions();
    let mut report = ExperimentReport::new("chain", cfg);
    let mut table = Table::new(
        "chain",
        &["delta", "directions", "lift_failures", "m", "threshold", "area", "level_cells", "sigma_level", "q"],
    );
    let mut sweep = Table::new("chain_sweep", &["delta", "angle", "value", "in_level_set"]);
    let mut worst_failures: f64 = 0.0;
    for &delta in &cfg.deltas {
        let g = cfg.grid_for(&cfg.recipe, delta);
        let k = neighborhood(&generate(&cfg.recipe, &g)?, delta)?;
        let masses: Vec<Option<f64>> =
            dirs.par_iter().map(|&e| pipeline_measure(&cfg.recipe, &k, e, delta, cfg.s).ok().map(|mu| mu.mass())).collect();
        let failures = masses.iter().filter(|m| m.is_none()).count();
        worst_failures = worst_failures.max(failures as f64 / dirs.len() as f64);
        let m = masses.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let m = if m.is_finite() { m } else { 0.0 };
        let threshold = m / 2.0;
        let results = direction_sweep(&k, delta, cfg.s, n)?;
        let level: Vec<usize> = results.iter().enumerate().filter(|(_, r)| r.value > threshold).map(|(i, _)| i).collect();
        for (i, r) in results.iter().enumerate() {
            let inside = if level.binary_search(&i).is_ok() { 1.0 } else { 0.0 };
            sweep.push(vec![delta, r.angle, r.value, inside]);
        }
        let sigma_level = if level.is_empty() {
            0.0
        } else {
            circle_frostman(&AngularCells::new(n, level.iter().copied()), cfg.t)?.total()
        };
        let area = k.area();
        let q = if area > 0.0 { threshold * threshold * sigma_level / area } else { 0.0 };
        table.push(vec![
            delta,
            dirs.len() as f64,
            failures as f64,
            m,
            threshold,
            area,
            level.len() as f64,
            sigma_level,
            q,
        ]);
    }
    report.flag(
        "chain.lift_failures",
        worst_failures <= MAX_LIFT_FAILURES,
        worst_failures,
        MAX_LIFT_FAILURES,
        "largest per-delta fraction of sampled directions whose measure failed to lift".into(),
    );
    let sigma = table.column("sigma_level");
    let area = table.column("area");
    let sigma_ratio = sigma.iter().fold(f64::INFINITY, |a, &b| a.min(b)) / sigma[0];
    report.flag(
        "chain.sigma_stable",
        sigma[0] > 0.0 && sigma_ratio >= STABILITY,
        if sigma[0] > 0.0 { sigma_ratio } else { 0.0 },
        STABILITY,
        "smallest sigma(E^delta) relative to the first scale".into(),
    );
    let area_ratio = area.iter().fold(f64::INFINITY, |a, &b| a.min(b)) / area[0];
    report.flag(
        "chain.area_bounded_below",
        area[0] > 0.0 && area_ratio >= STABILITY,
        if area[0] > 0.0 { area_ratio } else { 0.0 },
        STABILITY,
        "smallest |K(delta)| relative to the first scale".into(),
    );
    report.notes.push(format!(
        "level threshold is m/2; sigma^delta has growth exponent 1 - t = {} on {n} cells of width pi/{n}",
        1.0 - cfg.t
    ));
    report.notes.push(
        "direction sets are expected to have dimension above 1 - s; sigma(E^delta), |K(delta)| and m are reported separately".into(),
    );
    let deltas = table.column("delta");
    let series = vec![
        ("sigma(E^delta)".to_string(), deltas.iter().zip(&sigma).map(|(d, v)| ((1.0 / d).log2(), *v)).collect()),
        ("|K(delta)|".to_string(), deltas.iter().zip(&area).map(|(d, v)| ((1.0 / d).log2(), *v)).collect()),
    ];
    report.tables = vec![table, sweep];
    let mut figures = BTreeMap::new();
    figures.insert("chain.svg".into(), render_series_svg("lower-bound chain", "log2(1/delta)", "value", &series));
    Ok(Outcome { report, figures })
}
