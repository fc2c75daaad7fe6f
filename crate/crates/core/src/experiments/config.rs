use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::geometry::{GridSpec, Point};
use crate::testsets::SetRecipe;

/// Largest raster side, in cells, an experiment may request.
pub const MAX_CELLS_PER_SIDE: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub origin: Point,
    pub side: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { origin: Point::new(-0.5, -0.5), side: 2.0 }
    }
}

/// Measure on direction space used to weigh level sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSpec {
    /// Frostman measure on all directions.
    Full,
    /// Frostman measure on the cells holding the recipe's declared directions.
    Declared,
    /// Frostman measure on the directions `πx` with `x` in a Cantor stage.
    Cantor { ratio: f64, depth: u32 },
}

fn default_cells_per_delta() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub recipe: SetRecipe,
    pub s: f64,
    pub t: f64,
    pub deltas: Vec<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perron_depth: Option<u32>,
    #[serde(default)]
    pub domain: Domain,
    #[serde(default = "default_cells_per_delta")]
    pub cells_per_delta: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Which keys an experiment needs beyond the common ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Lambdas,
    Directions,
    Sigma,
    Pairs,
    PerronDepth,
}

#[derive(Debug, thiserror::Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn validate(&self, needs: &[Needs]) -> Result<(), ConfigError> {
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(bad("s", format!("must lie in (0, 1], got {}", self.s)));
        }
        if !(self.t >= 0.0) {
            return Err(bad("t", format!("must be >= 0, got {}", self.t)));
        }
        if self.t >= self.s {
            return Err(bad("t", format!("requires t < s, got t = {} and s = {}", self.t, self.s)));
        }
        if self.deltas.is_empty() {
            return Err(bad("deltas", "needs at least one scale"));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
            return Err(bad("deltas", format!("every scale must lie in (0, 1], got {d}")));
        }
        if self.cells_per_delta < 4 {
            return Err(bad("cells_per_delta", format!("must be >= 4 so that h <= delta/4, got {}", self.cells_per_delta)));
        }
        if !(self.domain.side > 0.0) {
            return Err(bad("domain.side", format!("must be positive, got {}", self.domain.side)));
        }
        for need in needs {
            match need {
                Needs::Lambdas => {
                    if self.lambdas.is_empty() {
                        return Err(bad("lambdas", "required by this experiment"));
                    }
                    if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0)) {
                        return Err(bad("lambdas", format!("levels must be positive, got {l}")));
                    }
                }
                Needs::Directions => match self.directions {
                    None => return Err(bad("directions", "required by this experiment")),
                    Some(n) if n < 2 => return Err(bad("directions", format!("needs at least 2, got {n}"))),
                    _ => {}
                },
                Needs::Sigma => {
                    if self.sigma.is_none() {
                        return Err(bad("sigma", "required by this experiment"));
                    }
                }
                Needs::Pairs => match self.pairs {
                    None => return Err(bad("pairs", "required by this experiment")),
                    Some(0) => return Err(bad("pairs", "needs at least one pair")),
                    _ => {}
                },
                Needs::PerronDepth => match self.perron_depth {
                    None => return Err(bad("perron_depth", "required by this experiment")),
                    Some(d) if d > 12 => return Err(bad("perron_depth", format!("must be <= 12, got {d}"))),
                    _ => {}
                },
            }
        }
        for &d in &self.deltas {
            let g = self.grid_for(&self.recipe, d);
            if g.cells_per_side > MAX_CELLS_PER_SIDE {
                return Err(bad(
                    "deltas",
                    format!("scale {d} needs {} cells per side, above the limit {MAX_CELLS_PER_SIDE}", g.cells_per_side),
                ));
            }
        }
        Ok(())
    }

    /// Raster for a recipe at scale `δ`: `h = δ / cells_per_delta`, refined
    /// further when the recipe has smaller features.
    pub fn grid_for(&self, recipe: &SetRecipe, delta: f64) -> GridSpec {
        let mut h = delta / self.cells_per_delta as f64;
        if let Some(f) = recipe.min_feature() {
            h = h.min(f);
        }
        let n = (self.domain.side / h * (1.0 - 1e-12)).ceil() as usize;
        GridSpec::new(self.domain.origin, self.domain.side, n.max(1))
    }

    pub fn directions(&self) -> usize {
        self.directions.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        serde_json::from_str(
            r#"{"recipe":{"kind":"disc","radius":0.5},"s":0.5,"t":0.0,"deltas":[0.125],"seed":1}"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_and_validation() {
        let c = base();
        assert_eq!(c.cells_per_delta, 8);
        assert_eq!(c.domain, Domain::default());
        c.validate(&[]).unwrap();
        let g = c.grid_for(&c.recipe, 0.125);
        assert_eq!(g.cells_per_side, 128);
        assert!(c.validate(&[Needs::Lambdas]).is_err());
    }

    #[test]
    fn t_must_be_below_s() {
        let mut c = base();
        c.t = 0.5;
        let err = c.validate(&[]).unwrap_err();
        assert_eq!(err.key, "t");
        assert!(err.to_string().contains("t < s"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let r = serde_json::from_str::<ExperimentConfig>(
            r#"{"recipe":{"kind":"disc","radius":0.5},"s":0.5,"t":0.0,"deltas":[0.125],"seed":1,"colour":3}"#,
        );
        assert!(r.unwrap_err().to_string().contains("colour"));
        // scientific parameters have no defaults
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"recipe":{"kind":"disc","radius":0.5},"t":0.0,"deltas":[0.125],"seed":1}"#).is_err());
    }
}
