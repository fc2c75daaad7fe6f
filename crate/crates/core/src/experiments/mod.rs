//! End-to-end experiments. Each returns a report plus the files it wants
//! written; the caller owns the output directory.

mod chain;
mod config;
mod correlation;
mod dichotomy;
mod tools;
mod weak_type;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

pub use chain::exp_lower_bound_chain;
pub use config::{ConfigError, Domain, ExperimentConfig, Needs, SigmaSpec, MAX_CELLS_PER_SIDE};
pub use correlation::{exp_correlation, sample_pairs};
pub use dichotomy::exp_dichotomy;
pub use tools::{run_frostman, run_maximal};
pub use weak_type::{exp_weak_type, sup_level_ratio};

use crate::error::Result;
use crate::frostman::{circle_frostman, AngularCells, CircleMeasure};
use crate::geometry::Direction;
use crate::io::{fmt_f64, sha256_hex};
use crate::testsets::cantor_intervals;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let k = self.columns.iter().position(|c| c == name).expect("known column");
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flag {
    /// Name of the criterion this flag checks.
    pub criterion: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedFit {
    pub name: String,
    #[serde(flatten)]
    pub fit: crate::fit::LineFit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config_hash: String,
    pub passed: bool,
    pub flags: Vec<Flag>,
    pub fits: Vec<NamedFit>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn new(experiment: &str, cfg: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            config_hash: config_hash(cfg),
            passed: true,
            flags: Vec::new(),
            fits: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn flag(&mut self, criterion: &str, passed: bool, value: f64, threshold: f64, detail: String) {
        self.passed &= passed;
        self.flags.push(Flag { criterion: criterion.into(), passed, value, threshold, detail });
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// A finished run: the report and the figure files, keyed by file name.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub figures: BTreeMap<String, String>,
}

impl Outcome {
    /// Every output file: one CSV per table, the figures and `report.json`.
    pub fn files(&self) -> BTreeMap<String, Vec<u8>> {
        let mut files = BTreeMap::new();
        for t in &self.report.tables {
            files.insert(format!("{}.csv", t.name), t.to_csv().into_bytes());
        }
        for (name, svg) in &self.figures {
            files.insert(name.clone(), svg.clone().into_bytes());
        }
        files.insert("report.json".into(), crate::io::to_json(&self.report).into_bytes());
        files
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(serde_json::to_string(cfg).expect("serializable").as_bytes())
}

/// Measure on `n` direction cells as described by the spec.
pub fn build_sigma(cfg: &ExperimentConfig, spec: &SigmaSpec, n: usize) -> Result<CircleMeasure> {
    let arcs = match spec {
        SigmaSpec::Full => AngularCells::full(n),
        SigmaSpec::Declared => match cfg.recipe.declared_directions() {
            None => AngularCells::full(n),
            Some(dirs) => {
                let cells = AngularCells::full(n);
                AngularCells::new(n, dirs.iter().map(|d| cells.cell_of(*d)))
            }
        },
        SigmaSpec::Cantor { ratio, depth } => {
            let stage = cantor_intervals(*ratio, *depth);
            let w = 1.0 / n as f64;
            AngularCells::new(
                n,
                (0..n).filter(|&i| {
                    let (a, b) = (i as f64 * w, (i + 1) as f64 * w);
                    stage.iter().any(|iv| iv.lo < b && a < iv.hi)
                }),
            )
        }
    };
    circle_frostman(&arcs, cfg.t)
}

/// Directions where the recipe has segment families, or the uniform sweep
/// when it has them everywhere.
pub fn family_directions(cfg: &ExperimentConfig) -> Vec<Direction> {
    match cfg.recipe.declared_directions() {
        Some(d) => d,
        None => crate::maximal::sweep_directions(cfg.directions().max(2)),
    }
}

fn config_error(e: ConfigError) -> crate::Error {
    crate::Error::Config(e.to_string())
}

/// Max over min of a list of positive values.
fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else if max <= 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}
