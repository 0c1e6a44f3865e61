use std::path::Path;

use gridformer::fields::ShapeSpec;
use gridformer::metrics::EvalConfig;
use gridformer::model::ModelConfig;
use gridformer::training::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Shape as written in a config file, tagged by `kind`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    /// Overlapping sphere and cube.
    #[default]
    ToyScene,
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    Box {
        center: [f64; 3],
        half_extents: [f64; 3],
    },
    Torus {
        center: [f64; 3],
        major: f64,
        minor: f64,
    },
    Union {
        parts: Vec<ShapeConfig>,
    },
}

impl ShapeConfig {
    pub fn to_spec(&self) -> ShapeSpec {
        match self {
            ShapeConfig::ToyScene => ShapeSpec::toy_scene(),
            &ShapeConfig::Sphere { center, radius } => ShapeSpec::Sphere { center, radius },
            &ShapeConfig::Box { center, half_extents } => ShapeSpec::Box { center, half_extents },
            &ShapeConfig::Torus { center, major, minor } => ShapeSpec::Torus { center, major, minor },
            ShapeConfig::Union { parts } => ShapeSpec::Union(parts.iter().map(Self::to_spec).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub n_points: usize,
    /// Gaussian noise added to surface samples.
    pub sigma: f64,
    pub n_queries: usize,
    pub seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            n_points: 3000,
            sigma: 0.005,
            n_queries: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshingConfig {
    pub tau: f64,
    pub mise_initial_res: usize,
    pub mise_steps: u32,
    /// Sample the full final lattice instead of refining adaptively.
    pub dense: bool,
}

impl Default for MeshingConfig {
    fn default() -> Self {
        Self {
            tau: 0.5,
            mise_initial_res: 32,
            mise_steps: 2,
            dense: false,
        }
    }
}

/// Everything a run depends on. Model initialization uses `train.seed`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub shape: ShapeConfig,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub meshing: MeshingConfig,
    pub eval: EvalConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Sets every seed in the config to `seed`.
    pub fn set_seed(&mut self, seed: u64) {
        self.data.seed = seed;
        self.train.seed = seed;
        self.eval.seed = seed;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.shape
            .to_spec()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.model.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.data.n_points == 0 || self.data.n_queries == 0 {
            return bad("data.n_points and data.n_queries must be positive".into());
        }
        if !self.data.sigma.is_finite() || self.data.sigma < 0.0 {
            return bad(format!(
                "data.sigma must be finite and non-negative, got {}",
                self.data.sigma
            ));
        }
        if !self.meshing.tau.is_finite() {
            return bad("meshing.tau must be finite".into());
        }
        if self.meshing.mise_initial_res < 2 {
            return bad("meshing.mise_initial_res must be at least 2".into());
        }
        if self.meshing.mise_steps > 6 {
            return bad("meshing.mise_steps above 6 is not supported".into());
        }
        if self.eval.n_surface_samples == 0 || self.eval.n_iou_queries == 0 {
            return bad("eval sample counts must be positive".into());
        }
        if self.eval.fscore_threshold.is_nan() || self.eval.fscore_threshold <= 0.0 {
            return bad("eval.fscore_threshold must be positive".into());
        }
        Ok(())
    }
}
