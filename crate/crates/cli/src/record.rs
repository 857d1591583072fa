use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use segkit::acwe::RunStats;
use segkit::metrics::SegReport;
use segkit::BoundingBox;
use serde::{Deserialize, Serialize};

use crate::config::Method;

/// Bounding-box file: the box plus an optional detector confidence that is
/// carried through to the reports untouched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BboxFile {
    #[serde(flatten)]
    pub bbox: BoundingBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl BboxFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading bbox {}", path.display()))?;
        let b: BboxFile =
            serde_json::from_str(&text).with_context(|| format!("parsing bbox {}", path.display()))?;
        if let Some(c) = b.confidence {
            if !c.is_finite() {
                bail!("confidence in {} must be finite", path.display());
            }
        }
        Ok(b)
    }
}

/// Outcome of one segmentation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRecord {
    pub case_id: String,
    pub image: String,
    /// The box actually used, in the image's own frame.
    pub bbox: BoundingBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SegReport>,
    /// Level-set statistics; only the Chan-Vese method has them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<RunStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl CaseRecord {
    pub const SUFFIX: &'static str = ".record.json";

    pub fn validate(&self) -> Result<()> {
        if self.case_id.is_empty() {
            bail!("case id must not be empty");
        }
        if self.truth.is_some() != self.report.is_some() {
            bail!(
                "case {}: report must be present exactly when a truth mask is",
                self.case_id
            );
        }
        Ok(())
    }

    /// Artifact file stem, `<case>.<method>`.
    pub fn stem(case_id: &str, method: Method) -> String {
        format!("{case_id}.{}", method.as_str())
    }

    /// Reads every `*.record.json` under `dir`, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Vec<CaseRecord>> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("listing {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with(Self::SUFFIX) && !n.starts_with('.'))
            })
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let r: CaseRecord =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                r.validate().with_context(|| format!("in {}", p.display()))?;
                Ok(r)
            })
            .collect()
    }
}

/// One entry of a batch manifest. Relative paths are taken from the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestCase {
    pub id: String,
    pub image: PathBuf,
    pub bbox: PathBuf,
    #[serde(default)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Methods to run on every case; `--method` replaces this list.
    #[serde(default)]
    pub methods: Vec<Method>,
    pub cases: Vec<ManifestCase>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let mut m: Manifest =
            serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for c in &mut m.cases {
            c.image = base.join(&c.image);
            c.bbox = base.join(&c.bbox);
            c.truth = c.truth.as_ref().map(|t| base.join(t));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cases.is_empty() {
            bail!("manifest lists no cases");
        }
        let mut seen = BTreeSet::new();
        for c in &self.cases {
            if c.id.is_empty() || c.id.contains(['/', '\\']) {
                bail!("bad case id {:?}", c.id);
            }
            if !seen.insert(c.id.as_str()) {
                bail!("duplicate case id {:?}", c.id);
            }
        }
        Ok(())
    }
}
