use std::collections::BTreeMap;

use super::{build_sigma, config_error, spread, ExperimentConfig, ExperimentReport, NamedFit, Needs, Outcome, Table};
use crate::error::Result;
use crate::fit::log_log;
use crate::frostman::CircleMeasure;
use crate::io::render_series_svg;
use crate::maximal::direction_sweep;
use crate::testsets::generate;

/// `sup_λ λ² σ({k : values[k] >= λ})`, with direction `k` weighted by cell
/// `k` of `sigma`. The supremum is attained at one of the values, so it is
/// exact. Returns the supremum and the maximizing level.
pub fn sup_level_ratio(values: &[f64], sigma: &CircleMeasure) -> (f64, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut best = (0.0, 0.0);
    let mut mass = 0.0;
    for (pos, &k) in order.iter().enumerate() {
        mass += sigma.masses()[k];
        let v = values[k];
        // level v includes every later direction with the same value
        if v <= 0.0 || order.get(pos + 1).is_some_and(|&n| values[n] == v) {
            continue;
        }
        let q = v * v * mass;
        if q > best.0 {
            best = (q, v);
        }
    }
    best
}

/// Weak-type ratio `λ² σ({M^δ χ_B >= λ}) / |B|` over δ and λ.
pub fn exp_weak_type(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(&[Needs::Lambdas, Needs::Directions, Needs::Sigma]).map_err(config_error)?;
    let n = cfg.directions();
    let sigma = build_sigma(cfg, cfg.sigma.as_ref().unwrap(), n)?;
    let mut report = ExperimentReport::new("weaktype", cfg);
    let mut sweep = Table::new("weaktype_sweep", &["delta", "angle", "value", "mass", "binding_length"]);
    let mut levels = Table::new("weaktype_levels", &["delta", "lambda", "sigma_level", "q"]);
    let mut summary = Table::new("weaktype_summary", &["delta", "area", "sup_q", "argmax_lambda", "sigma_total"]);
    let mut curves = Vec::new();
    for &delta in &cfg.deltas {
        let b = generate(&cfg.recipe, &cfg.grid_for(&cfg.recipe, delta))?;
        let area = b.area();
        let results = direction_sweep(&b, delta, cfg.s, n)?;
        let values: Vec<f64> = results.iter().map(|r| r.value).collect();
        for r in &results {
            sweep.push(vec![delta, r.angle, r.value, r.mass, r.binding_length]);
        }
        let mut curve = Vec::new();
        for &lambda in &cfg.lambdas {
            let level: f64 = values.iter().enumerate().filter(|(_, v)| **v >= lambda).map(|(k, _)| sigma.masses()[k]).sum();
            let q = if area > 0.0 { lambda * lambda * level / area } else { 0.0 };
            levels.push(vec![delta, lambda, level, q]);
            curve.push((lambda, q));
        }
        curves.push((format!("delta = {delta}"), curve));
        let (sup, at) = sup_level_ratio(&values, &sigma);
        let sup_q = if area > 0.0 { sup / area } else { 0.0 };
        summary.push(vec![delta, area, sup_q, at, sigma.total()]);
    }
    let sup: Vec<f64> = summary.column("sup_q");
    let deltas = summary.column("delta");
    let points: Vec<(f64, f64)> = deltas.iter().zip(&sup).map(|(d, q)| (1.0 / d, *q)).collect();
    if let Some(fit) = log_log(&points) {
        report.flag(
            "weak_type.delta_uniformity",
            fit.slope.abs() <= 0.1,
            fit.slope,
            0.1,
            "log-log slope of sup Q against 1/delta; |slope| <= 0.1".into(),
        );
        report.fits.push(NamedFit { name: "sup_q_vs_inverse_delta".into(), fit });
    } else if sup.iter().all(|q| *q == 0.0) {
        report.flag("weak_type.delta_uniformity", true, 0.0, 0.1, "all ratios vanish".into());
    }
    let sp = spread(&sup);
    report.flag("weak_type.spread", sp <= 1.2, sp, 1.2, "max/min of sup Q across delta".into());
    report.notes.push(format!(
        "sigma has growth exponent 1 - t = {} on {n} direction cells of width pi/{n}",
        1.0 - cfg.t
    ));
    report.tables = vec![summary, levels, sweep];
    let mut figures = BTreeMap::new();
    figures.insert("weaktype.svg".into(), render_series_svg("weak-type ratio", "lambda", "Q", &curves));
    Ok(Outcome { report, figures })
}
