use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tensor_hw::verify::{BlockSource, DominanceConfig};

use crate::CliError;

/// Version of the configuration layout this build reads.
pub const SCHEMA_VERSION: u32 = 1;

fn default_stem() -> String {
    "report".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    /// Report directory; `--out` overrides it.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_stem")]
    pub stem: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, stem: default_stem() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    /// `X_{i_1} * .. * X_{i_m}`.
    Product,
    /// `X_i * A_ij * X_j` with the configured block matrix.
    Coupling,
}

fn default_order() -> usize {
    2
}
fn default_k() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingConfig {
    pub kernel: KernelChoice,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    pub theta_grid: Vec<f64>,
    pub trials: usize,
}

/// Everything one run needs; the dominance section sits at top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub dominance: DominanceConfig,
    /// Not echoed into reports, so output location never changes their bytes.
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
    #[serde(default)]
    pub decoupling: Option<DecouplingConfig>,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if let Some(BlockSource::Fixtures(paths)) = &mut cfg.dominance.block {
            for p in paths.iter_mut() {
                if p.is_relative() {
                    *p = base_dir.join(&*p);
                }
            }
        }
        if let Some(dir) = &mut cfg.output.dir {
            if dir.is_relative() {
                *dir = base_dir.join(&*dir);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.dominance.master_seed = seed;
        }
        if let Some(trials) = o.trials {
            self.dominance.trials = trials;
            if let Some(d) = &mut self.decoupling {
                d.trials = trials;
            }
        }
        if let Some(out) = &o.out {
            self.output.dir = Some(out.clone());
        }
    }

    /// Schema checks plus parsing of every referenced fixture.
    pub fn validate(&self) -> Result<(), CliError> {
        self.dominance.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(BlockSource::Fixtures(paths)) = &self.dominance.block {
            let n = self.dominance.ensemble.n;
            if paths.len() != n * n {
                return Err(CliError::Config(format!("block fixtures: need {} paths, got {}", n * n, paths.len())));
            }
            for p in paths {
                tensor_hw::tensor::fixture::read_fixture::<f64>(p)
                    .map_err(|e| CliError::Config(format!("fixture {}: {e}", p.display())))?;
            }
        }
        if let Some(d) = &self.decoupling {
            if d.theta_grid.is_empty() || d.trials == 0 {
                return Err(CliError::Config("decoupling needs a theta grid and trials > 0".into()));
            }
            if d.kernel == KernelChoice::Coupling && (d.order != 2 || self.dominance.block.is_none()) {
                return Err(CliError::Config("coupling kernel needs order 2 and a block matrix".into()));
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
