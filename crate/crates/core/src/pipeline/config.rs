use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::CgOptions;
use crate::microstructure::{GeometryBounds, TransverseIsotropicMaterial};

/// Environment variable that may set the output directory.
pub const OUT_DIR_ENV: &str = "RVE_UQ_OUT";

/// Experiment definition. Every field has a default, so `{}` is a valid file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fiber: TransverseIsotropicMaterial,
    pub matrix: TransverseIsotropicMaterial,
    pub bounds: GeometryBounds,
    pub n_runs: usize,
    pub seed: u64,
    /// Voxels per axis.
    pub resolution: [usize; 3],
    pub solver: SolverConfig,
    pub n_components: usize,
    pub pce_max_degree: u32,
    /// Degree increases without LOO improvement before the degree search stops.
    pub pce_patience: u32,
    pub n_samples: usize,
    /// Seed of the surrogate sampling design; defaults to `seed + 1`.
    pub sample_seed: Option<u64>,
    /// Replaces the composite by a single material in every run.
    pub homogeneous_material: Option<TransverseIsotropicMaterial>,
    /// Largest tolerated fraction of failed runs.
    pub max_failure_fraction: f64,
    /// Worker threads for batch runs; defaults to the available parallelism.
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let cg = CgOptions::default();
        Self {
            rel_tol: cg.rel_tol,
            max_iter: cg.max_iter,
        }
    }
}

impl From<SolverConfig> for CgOptions {
    fn from(s: SolverConfig) -> Self {
        CgOptions {
            rel_tol: s.rel_tol,
            max_iter: s.max_iter,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            fiber: TransverseIsotropicMaterial::GLASS_FIBER,
            matrix: TransverseIsotropicMaterial::POLYMER_MATRIX,
            bounds: GeometryBounds::default(),
            n_runs: 200,
            seed: 20_190_101,
            resolution: [16, 16, 16],
            solver: SolverConfig::default(),
            n_components: 4,
            pce_max_degree: 6,
            pce_patience: 2,
            n_samples: 10_000,
            sample_seed: None,
            homogeneous_material: None,
            max_failure_fraction: 0.1,
            workers: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (dim, b) in self.bounds.as_array().iter().enumerate() {
            if !(b.min < b.max) {
                return Err(Error::DegenerateInterval {
                    dim,
                    min: b.min,
                    max: b.max,
                });
            }
        }
        if self.resolution.iter().any(|&n| n < 8) {
            return Err(Error::InvalidArgument(format!(
                "resolution {:?} must be at least 8 per axis",
                self.resolution
            )));
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidArgument("n_runs must be positive".into()));
        }
        if self.n_components == 0 || self.n_components > crate::pca::FLAT_LEN {
            return Err(Error::InvalidArgument(format!(
                "n_components = {} must lie in 1..={}",
                self.n_components,
                crate::pca::FLAT_LEN
            )));
        }
        if !(0.0..=1.0).contains(&self.max_failure_fraction) {
            return Err(Error::InvalidArgument("max_failure_fraction must lie in [0, 1]".into()));
        }
        self.fiber.validate()?;
        self.matrix.validate()?;
        Ok(())
    }

    pub fn sample_seed(&self) -> u64 {
        self.sample_seed.unwrap_or(self.seed.wrapping_add(1))
    }

    /// Output directory: explicit override, then the environment, then the config.
    pub fn resolve_output_dir(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => self.output_dir.clone(),
        }
    }
}


#[cfg(test)]
mod schema_tests {
    use super::*;
    use serde_json::Value;

    const SCHEMA: &str = include_str!("../../../../schema/experiment.schema.json");

    #[test]
    fn schema_lists_every_key_with_its_default() {
        let schema: Value = serde_json::from_str(SCHEMA).unwrap();
        let props = schema["properties"].as_object().unwrap();
        let default = serde_json::to_value(ExperimentConfig::default()).unwrap();
        let default = default.as_object().unwrap();
        let mut keys: Vec<_> = props.keys().collect();
        let mut expected: Vec<_> = default.keys().collect();
        keys.sort();
        expected.sort();
        assert_eq!(keys, expected);
        for (key, value) in default {
            let listed = match key.as_str() {
                "bounds" => {
                    let b = props["bounds"]["properties"].as_object().unwrap();
                    Value::Object(b.iter().map(|(k, v)| (k.clone(), v["default"].clone())).collect())
                }
                "solver" => {
                    let s = props["solver"]["properties"].as_object().unwrap();
                    Value::Object(s.iter().map(|(k, v)| (k.clone(), v["default"].clone())).collect())
                }
                _ => props[key]["default"].clone(),
            };
            let parse = |v: &Value| serde_json::from_value::<ExperimentConfig>(
                serde_json::json!({ key.clone(): v.clone() }),
            )
            .unwrap();
            assert_eq!(parse(&listed), parse(value), "{key}");
        }
    }
}
