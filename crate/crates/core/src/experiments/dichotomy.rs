use std::collections::BTreeMap;

use super::{config_error, ExperimentConfig, ExperimentReport, Needs, Outcome, Table};
use crate::error::Result;
use crate::io::render_series_svg;
use crate::testsets::{generate, neighborhood, SetRecipe};

/// `|K(δ)|` across δ for a Perron tree and for the configured set.
pub fn exp_dichotomy(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(&[Needs::PerronDepth]).map_err(config_error)?;
    let perron = SetRecipe::PerronTree { depth: cfg.perron_depth.unwrap() };
    let mut report = ExperimentReport::new("dichotomy", cfg);
    let mut table = Table::new("dichotomy", &["delta", "perron_area", "multiline_area"]);
    let mut deltas = cfg.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    for &delta in &deltas {
        let p = neighborhood(&generate(&perron, &cfg.grid_for(&perron, delta))?, delta)?.area();
        let m = neighborhood(&generate(&cfg.recipe, &cfg.grid_for(&cfg.recipe, delta))?, delta)?.area();
        table.push(vec![delta, p, m]);
    }
    let p = table.column("perron_area");
    let m = table.column("multiline_area");
    let drop = 1.0 - p[p.len() - 1] / p[0];
    report.flag(
        "dichotomy.perron_decrease",
        drop >= 0.3,
        drop,
        0.3,
        "relative decrease of the Perron tree's |K(delta)| from the largest to the smallest delta".into(),
    );
    let strictly = p.windows(2).all(|w| w[1] < w[0]);
    report.flag(
        "dichotomy.perron_monotone",
        strictly,
        if strictly { 1.0 } else { 0.0 },
        1.0,
        "Perron tree |K(delta)| strictly decreasing as delta shrinks".into(),
    );
    let limit = m[m.len() - 1];
    let dev = m.iter().map(|a| (a - limit).abs() / limit).fold(0.0, f64::max);
    report.flag(
        "dichotomy.multiline_stable",
        limit > 0.0 && dev <= 0.1,
        dev,
        0.1,
        "largest relative deviation of the multi-line set's |K(delta)| from its smallest-delta value".into(),
    );
    let series = vec![
        ("Perron tree".to_string(), deltas.iter().zip(&p).map(|(d, a)| ((1.0 / d).log2(), *a)).collect()),
        ("multi-line set".to_string(), deltas.iter().zip(&m).map(|(d, a)| ((1.0 / d).log2(), *a)).collect()),
    ];
    report.tables = vec![table];
    let mut figures = BTreeMap::new();
    figures.insert("dichotomy.svg".into(), render_series_svg("area of K(delta)", "log2(1/delta)", "area", &series));
    Ok(Outcome { report, figures })
}
