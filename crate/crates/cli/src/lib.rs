//! Report driver behind the `finslerc` binary.

pub mod json;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use finsler_core::classify::Tolerances;
use finsler_core::fd::{FDConfig, FdError};
use finsler_core::metric::{MetricError, MetricSpec};
use finsler_core::sample::{SampleError, Sampler};
use finsler_core::tensor::TangentPoint;
use serde::Deserialize;
use thiserror::Error;

pub use report::{emit_report, run, Report};

/// Exit status when every invariant and theorem check is clean.
pub const EXIT_OK: i32 = 0;
/// Exit status for invariant violations or other engine bugs.
pub const EXIT_ENGINE_BUG: i32 = 1;
/// Exit status for unusable configuration or metric input.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("metric {path}: {source}")]
    Metric {
        path: String,
        #[source]
        source: MetricError,
    },
    #[error("points: {0}")]
    Points(String),
    #[error("checks: unknown check `{0}` (expected tensors, axioms, classify, theorems, oracle or all)")]
    UnknownCheck(String),
    #[error("format: unknown format `{0}` (expected json or text)")]
    UnknownFormat(String),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("point {index}: {message}")]
    Point { index: usize, message: String },
    #[error(transparent)]
    Oracle(#[from] FdError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Checks {
    pub tensors: bool,
    pub axioms: bool,
    pub classify: bool,
    pub theorems: bool,
    pub oracle: bool,
}

impl Checks {
    pub const NAMES: [&'static str; 5] = ["tensors", "axioms", "classify", "theorems", "oracle"];

    pub fn all() -> Self {
        Checks {
            tensors: true,
            axioms: true,
            classify: true,
            theorems: true,
            oracle: true,
        }
    }

    /// Parses `all` or a comma-separated subset; an empty string selects nothing.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = Checks::default();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "all" => c = Checks::all(),
                "tensors" => c.tensors = true,
                "axioms" => c.axioms = true,
                "classify" => c.classify = true,
                "theorems" => c.theorems = true,
                "oracle" => c.oracle = true,
                other => return Err(CliError::UnknownCheck(other.to_string())),
            }
        }
        Ok(c)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let flags = [self.tensors, self.axioms, self.classify, self.theorems, self.oracle];
        Self::NAMES.iter().zip(flags).filter(|(_, on)| *on).map(|(n, _)| *n).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.names().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(CliError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointSource {
    File(PathBuf),
    Random(Sampler),
}

impl PointSource {
    /// `random:seed=S,count=C[,box=B]` or a path to a JSON list of
    /// `{"x": [...], "y": [...]}` objects.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let Some(rest) = text.strip_prefix("random:") else {
            return Ok(PointSource::File(PathBuf::from(text)));
        };
        let (mut seed, mut count, mut half_width) = (None, None, Sampler::DEFAULT_HALF_WIDTH);
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Points(format!("expected key=value, got `{item}`")))?;
            let bad = || CliError::Points(format!("bad value for `{key}`: `{value}`"));
            match key.trim() {
                "seed" => seed = Some(value.trim().parse::<u64>().map_err(|_| bad())?),
                "count" => count = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
                "box" => half_width = value.trim().parse::<f64>().map_err(|_| bad())?,
                other => return Err(CliError::Points(format!("unknown key `{other}`"))),
            }
        }
        let seed = seed.ok_or_else(|| CliError::Points("random sampler needs seed=".into()))?;
        let count = count.ok_or_else(|| CliError::Points("random sampler needs count=".into()))?;
        if count == 0 {
            return Err(SampleError::EmptySample.into());
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(SampleError::BadBox(half_width).into());
        }
        Ok(PointSource::Random(Sampler::new(seed, count).with_half_width(half_width)))
    }

    pub fn describe(&self) -> String {
        match self {
            PointSource::File(p) => format!("file:{}", p.display()),
            PointSource::Random(s) => format!("random:seed={},count={},box={}", s.seed, s.count, s.half_width),
        }
    }

    pub fn load(&self, spec: &MetricSpec) -> Result<Vec<TangentPoint<f64>>, CliError> {
        match self {
            PointSource::Random(s) => Ok(s.sample(spec)?),
            PointSource::File(path) => {
                let text = read(path)?;
                let raw: Vec<RawPoint> =
                    serde_json::from_str(&text).map_err(|e| CliError::Points(format!("{}: {e}", path.display())))?;
                if raw.is_empty() {
                    return Err(SampleError::EmptySample.into());
                }
                raw.into_iter()
                    .enumerate()
                    .map(|(index, p)| {
                        if p.x.len() != spec.dim() || p.y.len() != spec.dim() {
                            return Err(CliError::Point {
                                index,
                                message: format!("expected {} coordinates in x and y", spec.dim()),
                            });
                        }
                        TangentPoint::new(p.x, p.y).map_err(|e| CliError::Point { index, message: e.to_string() })
                    })
                    .collect()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub metric: PathBuf,
    pub points: PointSource,
    pub checks: Checks,
    pub tolerances: Tolerances,
    pub fd: FDConfig,
    /// Relative error above which the oracle flags an engine bug.
    pub oracle_tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub const DEFAULT_ORACLE_TOL: f64 = 1e-5;

    pub fn new(metric: impl Into<PathBuf>, points: PointSource) -> Self {
        RunConfig {
            metric: metric.into(),
            points,
            checks: Checks::all(),
            tolerances: Tolerances::default(),
            fd: FDConfig::default(),
            oracle_tol: Self::DEFAULT_ORACLE_TOL,
            format: Format::Json,
            out: None,
        }
    }

    /// Overrides the classification tolerance.
    pub fn with_tol(mut self, tol: f64) -> Result<Self, CliError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::BadTolerance(tol));
        }
        self.tolerances.classify = tol;
        Ok(self)
    }

    pub fn load_metric(&self) -> Result<(MetricSpec, serde_json::Value), CliError> {
        let text = read(&self.metric)?;
        let path = self.metric.display().to_string();
        let spec = MetricSpec::from_json(&text).map_err(|source| CliError::Metric { path: path.clone(), source })?;
        let value = serde_json::from_str(&text).map_err(|e| CliError::Metric {
            path,
            source: MetricError::Json(e.to_string()),
        })?;
        Ok((spec, value))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_parse() {
        assert_eq!(Checks::parse("all").unwrap(), Checks::all());
        assert!(Checks::parse("").unwrap().is_empty());
        let c = Checks::parse("axioms, theorems").unwrap();
        assert_eq!(c.names(), vec!["axioms", "theorems"]);
        assert!(matches!(Checks::parse("axioms,bogus"), Err(CliError::UnknownCheck(s)) if s == "bogus"));
    }

    #[test]
    fn random_points_parse() {
        let PointSource::Random(s) = PointSource::parse("random:seed=7,count=3,box=0.25").unwrap() else {
            panic!("expected sampler");
        };
        assert_eq!((s.seed, s.count, s.half_width), (7, 3, 0.25));
        assert_eq!(PointSource::parse("pts.json").unwrap(), PointSource::File("pts.json".into()));
        assert!(PointSource::parse("random:seed=1").is_err());
        assert!(PointSource::parse("random:seed=1,count=0").is_err());
        assert!(PointSource::parse("random:seed=x,count=2").is_err());
        assert!(PointSource::parse("random:seed=1,count=2,box=-1").is_err());
    }

    #[test]
    fn tolerance_override() {
        let cfg = RunConfig::new("m.json", PointSource::parse("random:seed=1,count=1").unwrap());
        assert_eq!(cfg.clone().with_tol(1e-6).unwrap().tolerances.classify, 1e-6);
        assert!(cfg.with_tol(0.0).is_err());
    }
}
