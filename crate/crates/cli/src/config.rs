//! Run configuration: TOML file, then environment, then flags (flags win).

use std::fs;
use std::path::{Path, PathBuf};

use disaster_corr::corpus::DEFAULT_NULL_THRESHOLD;
use disaster_corr::stats::{Method, DEFAULT_SIGNIFICANCE};
use serde::Deserialize;

use crate::AppError;

/// Environment variable naming the corpus directory.
pub const CORPUS_ENV: &str = "DCORR_CORPUS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KendallVariant {
    #[default]
    TauA,
    TauB,
}

impl KendallVariant {
    pub fn method(self) -> Method {
        match self {
            Self::TauA => Method::KendallTauA,
            Self::TauB => Method::KendallTauB,
        }
    }
}

impl std::str::FromStr for KendallVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('_', "-").as_str() {
            "tau-a" | "a" => Ok(Self::TauA),
            "tau-b" | "b" => Ok(Self::TauB),
            _ => Err(format!(
                "unknown kendall variant `{s}` (expected tau-a or tau-b)"
            )),
        }
    }
}

/// Contents of a config file. Every field is optional; relative paths are
/// taken relative to the file's directory.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub sources: Sources,
    pub corpus: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub null_threshold: Option<f64>,
    pub methods: Option<Vec<String>>,
    pub significance: Option<f64>,
    pub kendall: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Sources {
    pub region: Option<PathBuf>,
    #[serde(rename = "type")]
    pub types: Option<PathBuf>,
    pub anomaly: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| AppError::Usage(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        rebase(&mut cfg.sources.region);
        rebase(&mut cfg.sources.types);
        rebase(&mut cfg.sources.anomaly);
        rebase(&mut cfg.corpus);
        rebase(&mut cfg.output);
        Ok(cfg)
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub region: Option<PathBuf>,
    pub types: Option<PathBuf>,
    pub anomaly: Option<PathBuf>,
    pub corpus: PathBuf,
    pub output: PathBuf,
    pub null_threshold: f64,
    pub methods: Vec<Method>,
    pub significance: f64,
    pub kendall: KendallVariant,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            region: None,
            types: None,
            anomaly: None,
            corpus: PathBuf::from("corpus"),
            output: PathBuf::from("out"),
            null_threshold: DEFAULT_NULL_THRESHOLD,
            methods: vec![Method::Pearson],
            significance: DEFAULT_SIGNIFICANCE,
            kendall: KendallVariant::TauA,
        }
    }
}

/// Values given on the command line or through the environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub region: Option<PathBuf>,
    pub types: Option<PathBuf>,
    pub anomaly: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub null_threshold: Option<f64>,
    pub methods: Option<Vec<String>>,
    pub significance: Option<f64>,
    pub kendall: Option<String>,
}

/// Parses a method name; plain `kendall` picks the configured variant.
pub fn parse_method(name: &str, kendall: KendallVariant) -> Result<Method, AppError> {
    if name.trim().eq_ignore_ascii_case("kendall") {
        return Ok(kendall.method());
    }
    name.parse::<Method>().map_err(AppError::Usage)
}

impl RunConfig {
    pub fn resolve(file: Option<FileConfig>, over: Overrides) -> Result<Self, AppError> {
        let file = file.unwrap_or_default();
        let d = Self::default();
        let kendall = match over.kendall.or(file.kendall) {
            Some(k) => k.parse().map_err(AppError::Usage)?,
            None => d.kendall,
        };
        let methods = match over.methods.or(file.methods) {
            Some(names) => names
                .iter()
                .map(|n| parse_method(n, kendall))
                .collect::<Result<Vec<_>, _>>()?,
            None => d.methods,
        };
        let cfg = Self {
            region: over.region.or(file.sources.region),
            types: over.types.or(file.sources.types),
            anomaly: over.anomaly.or(file.sources.anomaly),
            corpus: over.corpus.or(file.corpus).unwrap_or(d.corpus),
            output: over.output.or(file.output).unwrap_or(d.output),
            null_threshold: over
                .null_threshold
                .or(file.null_threshold)
                .unwrap_or(d.null_threshold),
            methods,
            significance: over
                .significance
                .or(file.significance)
                .unwrap_or(d.significance),
            kendall,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), AppError> {
        if !(0.0..=1.0).contains(&self.null_threshold) {
            return Err(AppError::Usage(format!(
                "null threshold must be in [0, 1], got {}",
                self.null_threshold
            )));
        }
        if !(self.significance > 0.0 && self.significance <= 1.0) {
            return Err(AppError::Usage(format!(
                "significance threshold must be in (0, 1], got {}",
                self.significance
            )));
        }
        if self.methods.is_empty() {
            return Err(AppError::Usage("no correlation method configured".into()));
        }
        for p in [&self.corpus, &self.output] {
            if p.as_os_str().is_empty() {
                return Err(AppError::Usage("empty directory path".into()));
            }
        }
        Ok(())
    }
}
