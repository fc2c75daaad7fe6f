use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{build_sigma, config_error, family_directions, ExperimentConfig, ExperimentReport, Needs, Outcome, Table};
use crate::error::Result;
use crate::frostman::{growth_ratio, riesz_integral, CompactGridSet1D, DYADIC_SLACK};
use crate::io::render_heat_strip_svg;
use crate::maximal::direction_sweep;
use crate::testsets::generate;
use crate::tube_measures::{pipeline_frostman, FROSTMAN_REFINEMENT};

/// Relative duality gap below which an LP optimum counts as certified.
const GAP_TOL: f64 = 1e-9;

/// `M^δ χ_B` on the direction sweep at every scale.
pub fn run_maximal(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(&[Needs::Directions]).map_err(config_error)?;
    let n = cfg.directions();
    let mut report = ExperimentReport::new("maximal", cfg);
    let mut table =
        Table::new("maximal_sweep", &["delta", "angle", "value", "mass", "binding_length", "iterations", "duality_gap"]);
    let mut strips = Vec::new();
    let mut worst_gap: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for &delta in &cfg.deltas {
        let b = generate(&cfg.recipe, &cfg.grid_for(&cfg.recipe, delta))?;
        let results = direction_sweep(&b, delta, cfg.s, n)?;
        for r in &results {
            worst_gap = worst_gap.max(r.duality_gap.abs() / r.value.max(1.0));
            largest = largest.max(r.value);
            table.push(vec![delta, r.angle, r.value, r.mass, r.binding_length, r.iterations as f64, r.duality_gap]);
        }
        strips.push((format!("delta = {delta}"), results.iter().map(|r| r.value).collect()));
    }
    report.flag(
        "maximal.certified",
        worst_gap <= GAP_TOL,
        worst_gap,
        GAP_TOL,
        "largest relative LP duality gap over the sweep".into(),
    );
    report.flag(
        "maximal.bounded",
        largest <= 1.0 + GAP_TOL,
        largest,
        1.0,
        "largest value; indicator inputs never exceed 1".into(),
    );
    report.tables = vec![table];
    let mut figures = BTreeMap::new();
    figures.insert("maximal.svg".into(), render_heat_strip_svg("maximal function over directions", &strips));
    Ok(Outcome { report, figures })
}

/// Frostman measures on the projections of the recipe's segment families,
/// plus the direction measure when one is configured.
pub fn run_frostman(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(&[]).map_err(config_error)?;
    let dirs = family_directions(cfg);
    if dirs.is_empty() {
        return Err(crate::Error::Config("recipe declares no segment directions".into()));
    }
    let mut report = ExperimentReport::new("frostman", cfg);
    let mut summary = Table::new("frostman_summary", &["delta", "angle", "cells", "mass", "content", "growth_ratio"]);
    let mut cells = Table::new("frostman_cells", &["delta", "angle", "index", "mass"]);
    let mut worst: f64 = 0.0;
    let mut ratio = f64::INFINITY;
    for &delta in &cfg.deltas {
        let rows: Vec<_> = dirs
            .par_iter()
            .map(|&e| {
                let mu = pipeline_frostman(&cfg.recipe, e, delta, cfg.s)?;
                let fine = delta / FROSTMAN_REFINEMENT as f64;
                let set = CompactGridSet1D::new(fine, mu.support().map(|(j, _)| j));
                Ok((e, crate::frostman::grid_content(&set, cfg.s), growth_ratio(&mu, cfg.s), mu))
            })
            .collect::<Result<_>>()?;
        for (e, content, growth, mu) in rows {
            worst = worst.max(growth);
            ratio = ratio.min(mu.total_mass() / content);
            let support: Vec<_> = mu.support().collect();
            summary.push(vec![delta, e.angle(), support.len() as f64, mu.total_mass(), content, growth]);
            for (j, m) in support {
                cells.push(vec![delta, e.angle(), j as f64, m]);
            }
        }
    }
    report.flag(
        "frostman.growth",
        worst <= DYADIC_SLACK,
        worst,
        DYADIC_SLACK,
        "largest growth ratio over grid intervals".into(),
    );
    report.notes.push(format!("smallest mass / content ratio: {ratio}"));
    report.tables = vec![summary, cells];
    if let Some(spec) = &cfg.sigma {
        cfg.validate(&[Needs::Directions]).map_err(config_error)?;
        let sigma = build_sigma(cfg, spec, cfg.directions())?;
        let ball = sigma.grid_ball_ratio();
        report.flag(
            "frostman.sigma_growth",
            ball <= 1.0 + 1e-9,
            ball,
            1.0,
            "largest sigma(B(e, r)) / r^(1-t) over grid balls".into(),
        );
        let riesz = riesz_integral(&sigma, cfg.s);
        report.notes.push(format!("riesz integral at exponent s: {}", riesz.value));
        let mut t = Table::new("frostman_sigma", &["index", "mass"]);
        for (i, m) in sigma.masses().iter().enumerate() {
            t.push(vec![i as f64, *m]);
        }
        report.tables.push(t);
    }
    Ok(Outcome { report, figures: BTreeMap::new() })
}
