//! JSON experiment configuration: progression shape, function recipes, and
//! experiment parameters.  Schema version 1.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use ulab_core::counting::ProgressionConfig;
use ulab_core::field::{random_one_bounded, FieldConfig, GroupFunction, RandomKind};
use ulab_core::pet::SymbolicProgression;

pub const SCHEMA_VERSION: u32 = 1;

pub fn default_primes() -> Vec<u64> {
    vec![3, 5, 7]
}

fn schema_version_default() -> u32 {
    SCHEMA_VERSION
}

fn theorem_mode_default() -> bool {
    true
}

/// Top-level configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version_default")]
    pub schema_version: u32,
    pub progression: ProgressionSpec,
    /// One recipe per slot `f_0, ..., f_l`; may be empty for subcommands
    /// that do not evaluate functions.
    #[serde(default)]
    pub functions: Vec<FunctionRecipe>,
    #[serde(default)]
    pub norm: Option<NormSpec>,
    #[serde(default)]
    pub experiment: Option<ExperimentParams>,
}

/// A multidimensional polynomial progression over integer data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgressionSpec {
    #[serde(default = "default_primes")]
    pub primes: Vec<u64>,
    pub dimension: usize,
    pub vectors: Vec<Vec<i64>>,
    /// Coefficient lists, constant term first.
    pub polys: Vec<Vec<i64>>,
    #[serde(default)]
    pub eta: Option<Vec<usize>>,
    #[serde(default = "theorem_mode_default")]
    pub theorem_mode: bool,
}

impl ProgressionSpec {
    /// The worked deg-2 two-direction progression used as the default for
    /// every verification suite.
    pub fn reference() -> Self {
        Self {
            primes: default_primes(),
            dimension: 2,
            vectors: vec![vec![1, 0], vec![0, 1]],
            polys: vec![vec![0, 0, 1], vec![0, 1, 1]],
            eta: None,
            theorem_mode: true,
        }
    }

    pub fn field(&self, p: u64) -> Result<FieldConfig> {
        Ok(FieldConfig::new(p, self.dimension)?)
    }

    pub fn build(&self, p: u64) -> Result<ProgressionConfig> {
        let cfg = self.field(p)?;
        Ok(ProgressionConfig::from_int_vectors(
            &cfg,
            &self.vectors,
            self.polys.clone(),
            self.eta.clone(),
            self.theorem_mode,
        )?)
    }

    pub fn symbolic(&self) -> Result<SymbolicProgression> {
        Ok(SymbolicProgression::new(
            self.dimension,
            self.vectors.clone(),
            self.polys.clone(),
            self.eta.clone(),
        )?)
    }

    /// Largest polynomial degree (in `n`) across the members.
    pub fn max_degree(&self) -> usize {
        self.polys
            .iter()
            .filter_map(|q| q.iter().rposition(|&c| c != 0))
            .max()
            .unwrap_or(0)
    }
}

/// How to build one slot function.  Random kinds carry a mandatory seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionRecipe {
    Constant {
        #[serde(default)]
        re: Option<f64>,
        #[serde(default)]
        im: Option<f64>,
    },
    UnitPhase {
        seed: u64,
    },
    Disk {
        seed: u64,
    },
    Indicator {
        seed: u64,
        density: f64,
    },
    /// `x -> ep(<frequency, x>)`.
    Character {
        frequency: Vec<i64>,
    },
}

impl FunctionRecipe {
    /// Instantiate on a concrete group, mixing `seed_offset` into the
    /// recipe seed so trials re-randomize deterministically.
    pub fn build(&self, cfg: &FieldConfig, seed_offset: u64) -> Result<GroupFunction> {
        match self {
            FunctionRecipe::Constant { re, im } => Ok(GroupFunction::constant(
                cfg,
                Complex64::new(re.unwrap_or(1.0), im.unwrap_or(0.0)),
            )),
            FunctionRecipe::UnitPhase { seed } => Ok(random_one_bounded(
                cfg,
                &RandomKind::UnitPhase,
                mix_seed(*seed, seed_offset),
            )?),
            FunctionRecipe::Disk { seed } => Ok(random_one_bounded(
                cfg,
                &RandomKind::Disk,
                mix_seed(*seed, seed_offset),
            )?),
            FunctionRecipe::Indicator { seed, density } => Ok(random_one_bounded(
                cfg,
                &RandomKind::Indicator { density: *density },
                mix_seed(*seed, seed_offset),
            )?),
            FunctionRecipe::Character { frequency } => character(cfg, frequency),
        }
    }
}

/// `x -> ep(<u, x>)` for an integer frequency vector `u`.
pub fn character(cfg: &FieldConfig, frequency: &[i64]) -> Result<GroupFunction> {
    if frequency.len() != cfg.dimension() {
        bail!(
            "frequency vector has {} entries, expected {}",
            frequency.len(),
            cfg.dimension()
        );
    }
    let p = cfg.p() as i64;
    let values = (0..cfg.order())
        .map(|i| {
            let point = cfg.point_of(i);
            let dot: i64 = point
                .coords()
                .iter()
                .zip(frequency)
                .map(|(&x, &u)| (x as i64 % p) * (u.rem_euclid(p)))
                .sum();
            cfg.ep(dot)
        })
        .collect();
    Ok(GroupFunction::new(cfg, values, 1.0)?)
}

/// Splitmix-style deterministic seed mixing.
pub fn mix_seed(base: u64, offset: u64) -> u64 {
    let mut z = base
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(offset)
        .wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Box-norm request for the `norm` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    /// Integer generators; each row spans one direction subgroup.
    #[serde(default)]
    pub directions: Vec<Vec<i64>>,
    /// Optional degree-`s` norm along a single direction.
    #[serde(default)]
    pub gowers: Option<GowersSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GowersSpec {
    pub direction: Vec<i64>,
    pub s: usize,
}

/// Knobs shared by the experiment runners; unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub recipes: Option<usize>,
    #[serde(default)]
    pub densities: Option<Vec<f64>>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub exhaustive: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| anyhow!("config schema error: {e}"))?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {})",
                cfg.schema_version,
                SCHEMA_VERSION
            );
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.progression.primes.is_empty() {
            bail!("config schema error: progression.primes must be nonempty");
        }
        Ok(())
    }

    /// Build every slot function on the given group; pattern averaging
    /// needs one recipe per slot (the shifted slots plus the base slot).
    pub fn build_functions(&self, cfg: &FieldConfig, seed_offset: u64) -> Result<Vec<GroupFunction>> {
        if self.functions.len() != self.progression.polys.len() + 1 {
            bail!(
                "config schema error: {} function recipes for {} slots",
                self.functions.len(),
                self.progression.polys.len() + 1
            );
        }
        self.functions
            .iter()
            .map(|r| r.build(cfg, seed_offset))
            .collect()
    }
}

/// Set-membership input for the `search` subcommand: explicit coordinate
/// tuples or a reproducible density recipe.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Points(Vec<Vec<u64>>),
    Recipe { density: f64, seed: u64 },
}

impl SetSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow!("set schema error: {e}"))
    }

    /// Resolve to point indices on the group.
    pub fn indices(&self, cfg: &FieldConfig) -> Result<Vec<usize>> {
        match self {
            SetSpec::Points(rows) => {
                let mut out = Vec::with_capacity(rows.len());
                for row in rows {
                    let point = ulab_core::field::FpPoint::new(cfg, row.clone())?;
                    out.push(cfg.index_of(&point));
                }
                out.sort_unstable();
                out.dedup();
                Ok(out)
            }
            SetSpec::Recipe { density, seed } => {
                if !(0.0..=1.0).contains(density) {
                    bail!("set schema error: density {density} outside [0, 1]");
                }
                Ok(seeded_subset(cfg.order(), *density, *seed))
            }
        }
    }
}

/// Deterministic pseudo-random subset of `{0, ..., order-1}`.
pub fn seeded_subset(order: usize, density: f64, seed: u64) -> Vec<usize> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..order).filter(|_| rng.gen::<f64>() < density).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_json() -> String {
        r#"{
            "progression": {
                "primes": [3, 5],
                "dimension": 2,
                "vectors": [[1, 0], [0, 1]],
                "polys": [[0, 0, 1], [0, 1, 1]]
            },
            "functions": [
                {"kind": "constant"},
                {"kind": "unit_phase", "seed": 1},
                {"kind": "indicator", "seed": 2, "density": 0.5}
            ]
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_builds_the_reference_progression() {
        let cfg = ExperimentConfig::from_json(&reference_json()).unwrap();
        assert_eq!(cfg.schema_version, SCHEMA_VERSION);
        let pc = cfg.progression.build(5).unwrap();
        assert_eq!(pc.len(), 2);
        assert!(pc.theorem_mode());
        let field = cfg.progression.field(5).unwrap();
        let fs = cfg.build_functions(&field, 0).unwrap();
        assert_eq!(fs.len(), 3);
        assert!(fs.iter().all(|f| f.sup_bound() <= 1.0 + 1e-9));
        assert_eq!(cfg.progression.max_degree(), 2);
    }

    #[test]
    fn random_kinds_require_a_seed() {
        let text = r#"{
            "progression": {"dimension": 1, "vectors": [[1]], "polys": [[0, 1]]},
            "functions": [{"kind": "constant"}, {"kind": "unit_phase"}]
        }"#;
        let err = ExperimentConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("schema error"), "{err}");
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn unknown_fields_and_bad_shapes_are_rejected() {
        let text = r#"{
            "progression": {"dimension": 1, "vectors": [[1]], "polys": [[0, 1]], "extra": 3}
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        // a partial recipe list parses (norm runs need only one function)
        // but cannot populate pattern slots
        let text = r#"{
            "progression": {"dimension": 1, "vectors": [[1]], "polys": [[0, 1]]},
            "functions": [{"kind": "constant"}]
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let cfg = FieldConfig::new(3, 1).unwrap();
        let err = config.build_functions(&cfg, 0).unwrap_err().to_string();
        assert!(err.contains("1 function recipes for 2 slots"), "{err}");
    }

    #[test]
    fn character_recipes_average_to_zero_for_nonzero_frequency() {
        let cfg = FieldConfig::new(5, 2).unwrap();
        let f = character(&cfg, &[1, -1]).unwrap();
        assert!(f.mean().norm() < 1e-12);
        assert!((f.value(0).re - 1.0).abs() < 1e-12);
        let g = character(&cfg, &[0, 0]).unwrap();
        assert!((g.mean().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seed_mixing_separates_trials() {
        let a = mix_seed(7, 0);
        let b = mix_seed(7, 1);
        let c = mix_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_seed(7, 0));
    }

    #[test]
    fn set_specs_resolve_points_and_recipes() {
        let cfg = FieldConfig::new(3, 2).unwrap();
        let explicit = SetSpec::from_json("[[0, 0], [1, 2], [1, 2]]").unwrap();
        let idx = explicit.indices(&cfg).unwrap();
        assert_eq!(idx.len(), 2);
        let recipe = SetSpec::from_json(r#"{"density": 0.5, "seed": 3}"#).unwrap();
        let idx = recipe.indices(&cfg).unwrap();
        assert!(idx.iter().all(|&i| i < 9));
        let again = recipe.indices(&cfg).unwrap();
        assert_eq!(idx, again);
        let bad = SetSpec::from_json(r#"{"density": 1.5, "seed": 3}"#).unwrap();
        assert!(bad.indices(&cfg).is_err());
    }
}
