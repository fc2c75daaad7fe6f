use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{config_error, family_directions, spread, ExperimentConfig, ExperimentReport, NamedFit, Needs, Outcome, Table};
use crate::error::Result;
use crate::fit::upper_envelope_slope;
use crate::io::render_series_svg;
use crate::testsets::{generate, neighborhood};
use crate::tube_measures::{correlation, pipeline_measure};

/// `count` distinct unordered index pairs out of `n`, in a seeded random
/// order. All pairs when fewer exist.
pub fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    all.shuffle(&mut rng);
    all.truncate(count);
    all
}

/// Correlation `∫ μ^e μ^ξ` of pipeline measures against the angle gap.
pub fn exp_correlation(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(&[Needs::Pairs]).map_err(config_error)?;
    let dirs = family_directions(cfg);
    if dirs.len() < 2 {
        return Err(crate::Error::Config("recipe declares fewer than two segment directions".into()));
    }
    let pairs = sample_pairs(dirs.len(), cfg.pairs.unwrap(), cfg.seed);
    let mut report = ExperimentReport::new("correlation", cfg);
    let mut table = Table::new("correlation_pairs", &["delta", "angle_a", "angle_b", "gap", "correlation", "ratio"]);
    let mut summary = Table::new("correlation_summary", &["delta", "pairs", "excluded", "max_ratio", "envelope_slope"]);
    let mut scatter = Vec::new();
    let mut slopes_ok = true;
    let mut excluded_total = 0usize;
    for &delta in &cfg.deltas {
        let g = cfg.grid_for(&cfg.recipe, delta);
        let k = neighborhood(&generate(&cfg.recipe, &g)?, delta)?;
        let measures: Vec<Option<_>> =
            dirs.par_iter().map(|&e| pipeline_measure(&cfg.recipe, &k, e, delta, cfg.s).ok()).collect();
        let excluded = measures.iter().filter(|m| m.is_none()).count();
        excluded_total += excluded;
        let mut points = Vec::new();
        let mut max_ratio: f64 = 0.0;
        let mut used = 0;
        for &(i, j) in &pairs {
            let (Some(a), Some(b)) = (&measures[i], &measures[j]) else { continue };
            let c = correlation(a, b);
            let gap = dirs[i].chord_distance(dirs[j]);
            let ratio = c * (gap + delta).powf(1.0 - cfg.s);
            max_ratio = max_ratio.max(ratio);
            table.push(vec![delta, dirs[i].angle(), dirs[j].angle(), gap, c, ratio]);
            points.push((gap, c));
            used += 1;
        }
        let fit = upper_envelope_slope(&points, 8);
        let slope = fit.as_ref().map_or(f64::NAN, |f| f.slope);
        if let Some(fit) = fit {
            slopes_ok &= fit.slope >= cfg.s - 1.0 - 0.1;
            report.fits.push(NamedFit { name: format!("envelope_delta_{delta}"), fit });
        }
        summary.push(vec![delta, used as f64, excluded as f64, max_ratio, slope]);
        scatter.push((format!("delta = {delta}"), points.iter().map(|p| (p.0.ln(), p.1.max(1e-300).ln())).collect()));
    }
    let maxima = summary.column("max_ratio");
    let sp = spread(&maxima);
    report.flag(
        "correlation.bounded_ratio",
        sp <= 2.0,
        sp,
        2.0,
        "spread of per-delta max of correlation·(gap+delta)^(1-s)".into(),
    );
    let worst = summary.column("envelope_slope").into_iter().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    report.flag(
        "correlation.envelope_slope",
        slopes_ok,
        worst,
        cfg.s - 1.0 - 0.1,
        "smallest per-delta upper-envelope slope of log correlation against log gap".into(),
    );
    report.notes.push(format!("{excluded_total} direction measures failed to lift and were excluded"));
    report.tables = vec![summary, table];
    let mut figures = BTreeMap::new();
    figures.insert(
        "correlation.svg".into(),
        render_series_svg("correlation against angle gap", "ln gap", "ln correlation", &scatter),
    );
    Ok(Outcome { report, figures })
}
