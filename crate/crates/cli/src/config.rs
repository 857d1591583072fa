use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use segkit::acwe::AcweParams;
use segkit::edge::{EdgeOperator, EdgeParams};
use serde::{Deserialize, Serialize};

/// Segmentation method for a case.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Chanvese,
    Prewitt,
    Sobel,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Chanvese => "chanvese",
            Method::Prewitt => "prewitt",
            Method::Sobel => "sobel",
        }
    }

    /// The gradient operator for the baseline methods.
    pub fn operator(self) -> Option<EdgeOperator> {
        match self {
            Method::Chanvese => None,
            Method::Prewitt => Some(EdgeOperator::Prewitt),
            Method::Sobel => Some(EdgeOperator::Sobel),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskFormat {
    #[default]
    Pgm,
    Png,
}

impl MaskFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MaskFormat::Pgm => "pgm",
            MaskFormat::Png => "png",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Base directory for relative input paths given on the command line.
    pub input: Option<PathBuf>,
    /// Directory all artifacts are written to.
    pub output: PathBuf,
    pub mask_format: MaskFormat,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            input: None,
            output: PathBuf::from("out"),
            mask_format: MaskFormat::Pgm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub acwe: AcweParams,
    pub edge: EdgeParams,
    pub io: IoConfig,
    /// Worker threads for batch runs.
    pub parallelism: usize,
    /// Overrides the seed of phantom specs when set.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            acwe: AcweParams::default(),
            edge: EdgeParams::default(),
            io: IoConfig::default(),
            parallelism: 1,
            seed: None,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Defaults, then the optional config file, then flags.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(out) = &overrides.out {
            cfg.io.output = out.clone();
        }
        if let Some(seed) = overrides.seed {
            cfg.seed = Some(seed);
        }
        if let Some(jobs) = overrides.jobs {
            cfg.parallelism = jobs;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.parallelism == 0 {
            bail!("parallelism must be at least 1");
        }
        if self.io.output.as_os_str().is_empty() {
            bail!("io.output must not be empty");
        }
        self.acwe.validate()?;
        self.edge.validate()?;
        Ok(())
    }

    /// Resolves a user-supplied input path against `io.input`.
    pub fn input_path(&self, p: &Path) -> PathBuf {
        match &self.io.input {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Edge parameters with the operator taken from `method`.
    pub fn edge_for(&self, method: Method) -> EdgeParams {
        let mut params = self.edge;
        if let Some(op) = method.operator() {
            params.operator = op;
        }
        params
    }
}
