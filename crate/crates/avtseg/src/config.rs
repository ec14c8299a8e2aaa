//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys for the pipeline:
//!
//! | key                  | value                                        |
//! |----------------------|----------------------------------------------|
//! | `coarse_patch`       | `n` or `nx,ny,nz`                            |
//! | `coarse_stride`      | `n` or `nx,ny,nz`                            |
//! | `fine_patch`         | `n` or `nx,ny,nz`                            |
//! | `coarse_threshold`   | probability in (0, 1)                        |
//! | `fine_threshold`     | probability in (0, 1)                        |
//! | `d_min`              | `auto` or voxels                             |
//! | `min_component_size` | voxels, 0 disables                           |
//! | `coarse_predictor`   | `window:lo,hi[,softness]`, `prob:path`, `oracle:path,noise_sd,seed` |
//! | `fine_predictor`     | as above                                     |
//! | `source_tag`         | `K`, `R`, `D` or `unknown`                   |
//! | `connectivity_2d`    | 4 or 8                                       |
//! | `connectivity_3d`    | 6 or 26                                      |

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use avtseg_core::morphology::{Connectivity2d, Connectivity3d};
use avtseg_core::phantom::PhantomSpec;
use avtseg_core::pipeline::PipelineConfig;
use avtseg_core::predictor::PredictorSpec;
use avtseg_core::volume::{Index3, SourceTag, VolumeKind};

use crate::nifti::{self, KindHint};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {0:?} given more than once")]
    Duplicate(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("loading predictor volume {path}: {source}")]
    Predictor {
        path: PathBuf,
        #[source]
        source: nifti::NiftiError,
    },
    #[error(transparent)]
    Engine(#[from] avtseg_core::Error),
}

pub type Result<T, E = ConfigError> = std::result::Result<T, E>;

/// Parses `key = value` lines, preserving order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: n + 1,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: n + 1,
                text: raw.to_string(),
            });
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(ConfigError::Duplicate(k.to_string()));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Parses a single `key=value` override as given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Syntax {
            line: 0,
            text: s.to_string(),
        }),
    }
}

fn bad(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e| bad(key, value, e))
}

fn triple(key: &str, value: &str) -> Result<Index3> {
    let parts: Vec<usize> = value.split(',').map(|p| number(key, p)).collect::<Result<_>>()?;
    match parts[..] {
        [n] => Ok([n; 3]),
        [x, y, z] => Ok([x, y, z]),
        _ => Err(bad(key, value, "expected one or three integers")),
    }
}

fn format_triple(t: Index3) -> String {
    if t[0] == t[1] && t[1] == t[2] {
        t[0].to_string()
    } else {
        format!("{},{},{}", t[0], t[1], t[2])
    }
}

/// Where a predictor reads from, before any volume is loaded.
#[derive(Clone, Debug, PartialEq)]
pub enum PredictorSource {
    Window { lo: f64, hi: f64, softness: f64 },
    Prob(PathBuf),
    Oracle { path: PathBuf, noise_sd: f64, seed: u64 },
}

impl PredictorSource {
    pub fn parse(key: &str, value: &str) -> Result<Self> {
        let (scheme, rest) = value
            .split_once(':')
            .ok_or_else(|| bad(key, value, "expected window:, prob: or oracle:"))?;
        match scheme.trim() {
            "window" => {
                let nums: Vec<f64> = rest.split(',').map(|p| number(key, p)).collect::<Result<_>>()?;
                let (lo, hi, softness) = match nums[..] {
                    [lo, hi] => (lo, hi, 0.0),
                    [lo, hi, s] => (lo, hi, s),
                    _ => return Err(bad(key, value, "window takes lo,hi[,softness]")),
                };
                avtseg_core::predictor::WindowBand::new(lo, hi, softness).map_err(|e| bad(key, value, e))?;
                Ok(Self::Window { lo, hi, softness })
            }
            "prob" if !rest.trim().is_empty() => Ok(Self::Prob(PathBuf::from(rest.trim()))),
            "oracle" => {
                let parts: Vec<&str> = rest.rsplitn(3, ',').collect();
                let [seed, noise, path] = parts[..] else {
                    return Err(bad(key, value, "oracle takes path,noise_sd,seed"));
                };
                let noise_sd: f64 = number(key, noise)?;
                if !(noise_sd.is_finite() && noise_sd >= 0.0) {
                    return Err(bad(key, value, "noise_sd must be >= 0"));
                }
                Ok(Self::Oracle {
                    path: PathBuf::from(path.trim()),
                    noise_sd,
                    seed: number(key, seed)?,
                })
            }
            _ => Err(bad(key, value, "expected window:, prob: or oracle:")),
        }
    }

    pub fn load(&self) -> Result<PredictorSpec> {
        let read = |path: &PathBuf, hint| {
            nifti::read_volume_file(path, hint)
                .map(|(v, _)| v)
                .map_err(|source| ConfigError::Predictor {
                    path: path.clone(),
                    source,
                })
        };
        Ok(match self {
            Self::Window { lo, hi, softness } => PredictorSpec::window(*lo, *hi, *softness)?,
            Self::Prob(path) => PredictorSpec::prob_file(Arc::new(read(path, KindHint::Probability)?))?,
            Self::Oracle { path, noise_sd, seed } => {
                let reference = read(path, KindHint::Hu)?;
                let reference = match reference.kind() {
                    VolumeKind::Label => reference,
                    _ => reference.with_kind(VolumeKind::Label)?,
                };
                PredictorSpec::oracle(Arc::new(reference), *noise_sd, *seed)?
            }
        })
    }
}

impl fmt::Display for PredictorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Window { lo, hi, softness } => write!(f, "window:{lo},{hi},{softness}"),
            Self::Prob(p) => write!(f, "prob:{}", p.display()),
            Self::Oracle { path, noise_sd, seed } => write!(f, "oracle:{},{noise_sd},{seed}", path.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ValueSource {
    Default,
    File,
    Flag,
}

impl ValueSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Default => "default",
            Self::File => "file",
            Self::Flag => "flag",
        }
    }
}

/// Every pipeline setting, parsed, without predictor volumes loaded.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSettings {
    pub coarse_patch: Index3,
    pub coarse_stride: Index3,
    pub fine_patch: Index3,
    pub coarse_threshold: f64,
    pub fine_threshold: f64,
    pub d_min: Option<f64>,
    pub min_component_size: usize,
    pub coarse_predictor: PredictorSource,
    pub fine_predictor: PredictorSource,
    pub source_tag: SourceTag,
    pub connectivity_2d: Connectivity2d,
    pub connectivity_3d: Connectivity3d,
    pub sources: BTreeMap<&'static str, ValueSource>,
}

pub const PIPELINE_KEYS: [&str; 12] = [
    "coarse_patch",
    "coarse_stride",
    "fine_patch",
    "coarse_threshold",
    "fine_threshold",
    "d_min",
    "min_component_size",
    "coarse_predictor",
    "fine_predictor",
    "source_tag",
    "connectivity_2d",
    "connectivity_3d",
];

impl Default for PipelineSettings {
    fn default() -> Self {
        let d = PipelineConfig::default();
        let window = |p: &PredictorSpec| match p {
            PredictorSpec::Window(b) => PredictorSource::Window {
                lo: b.lo,
                hi: b.hi,
                softness: b.softness,
            },
            _ => unreachable!("default predictors are windows"),
        };
        Self {
            coarse_patch: d.coarse_patch,
            coarse_stride: d.coarse_stride,
            fine_patch: d.fine_patch,
            coarse_threshold: d.coarse_threshold,
            fine_threshold: d.fine_threshold,
            d_min: d.d_min,
            min_component_size: d.min_component_size,
            coarse_predictor: window(&d.coarse_predictor),
            fine_predictor: window(&d.fine_predictor),
            source_tag: d.source_tag,
            connectivity_2d: d.connectivity_2d,
            connectivity_3d: d.connectivity_3d,
            sources: PIPELINE_KEYS.iter().map(|&k| (k, ValueSource::Default)).collect(),
        }
    }
}

impl PipelineSettings {
    /// Defaults, then the file's pairs, then the flag overrides.
    pub fn resolve(file: &[(String, String)], flags: &[(String, String)]) -> Result<Self> {
        let mut s = Self::default();
        for (k, v) in file {
            s.set(k, v, ValueSource::File)?;
        }
        for (k, v) in flags {
            s.set(k, v, ValueSource::Flag)?;
        }
        s.to_config_unloaded()?.validate()?;
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str, source: ValueSource) -> Result<()> {
        let canonical = PIPELINE_KEYS
            .iter()
            .copied()
            .find(|&k| k == key)
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        match canonical {
            "coarse_patch" => self.coarse_patch = triple(key, value)?,
            "coarse_stride" => self.coarse_stride = triple(key, value)?,
            "fine_patch" => self.fine_patch = triple(key, value)?,
            "coarse_threshold" => self.coarse_threshold = number(key, value)?,
            "fine_threshold" => self.fine_threshold = number(key, value)?,
            "d_min" => {
                self.d_min = match value {
                    "auto" => None,
                    _ => Some(number(key, value)?),
                }
            }
            "min_component_size" => self.min_component_size = number(key, value)?,
            "coarse_predictor" => self.coarse_predictor = PredictorSource::parse(key, value)?,
            "fine_predictor" => self.fine_predictor = PredictorSource::parse(key, value)?,
            "source_tag" => self.source_tag = value.parse().map_err(|_| bad(key, value, "expected K, R, D or unknown"))?,
            "connectivity_2d" => {
                self.connectivity_2d = Connectivity2d::from_count(number(key, value)?)
                    .ok_or_else(|| bad(key, value, "expected 4 or 8"))?
            }
            "connectivity_3d" => {
                self.connectivity_3d = Connectivity3d::from_count(number(key, value)?)
                    .ok_or_else(|| bad(key, value, "expected 6 or 26"))?
            }
            _ => unreachable!(),
        }
        self.sources.insert(canonical, source);
        Ok(())
    }

    pub fn value_text(&self, key: &str) -> String {
        match key {
            "coarse_patch" => format_triple(self.coarse_patch),
            "coarse_stride" => format_triple(self.coarse_stride),
            "fine_patch" => format_triple(self.fine_patch),
            "coarse_threshold" => self.coarse_threshold.to_string(),
            "fine_threshold" => self.fine_threshold.to_string(),
            "d_min" => self.d_min.map_or_else(|| "auto".to_string(), |d| d.to_string()),
            "min_component_size" => self.min_component_size.to_string(),
            "coarse_predictor" => self.coarse_predictor.to_string(),
            "fine_predictor" => self.fine_predictor.to_string(),
            "source_tag" => self.source_tag.to_string(),
            "connectivity_2d" => self.connectivity_2d.count().to_string(),
            "connectivity_3d" => self.connectivity_3d.count().to_string(),
            _ => String::new(),
        }
    }

    /// The settings as a config file that parses back to the same values.
    pub fn echo(&self) -> String {
        PIPELINE_KEYS
            .iter()
            .map(|k| format!("{k} = {}\n", self.value_text(k)))
            .collect()
    }

    fn build(&self, coarse: PredictorSpec, fine: PredictorSpec) -> PipelineConfig {
        PipelineConfig {
            coarse_patch: self.coarse_patch,
            coarse_stride: self.coarse_stride,
            fine_patch: self.fine_patch,
            coarse_threshold: self.coarse_threshold,
            fine_threshold: self.fine_threshold,
            d_min: self.d_min,
            min_component_size: self.min_component_size,
            coarse_predictor: coarse,
            fine_predictor: fine,
            source_tag: self.source_tag,
            connectivity_2d: self.connectivity_2d,
            connectivity_3d: self.connectivity_3d,
        }
    }

    /// Full configuration with predictor volumes read from disk.
    pub fn to_config(&self) -> Result<PipelineConfig> {
        Ok(self.build(self.coarse_predictor.load()?, self.fine_predictor.load()?))
    }

    /// Configuration for stages that never call a predictor; both
    /// predictors are left at their defaults.
    pub fn to_config_unloaded(&self) -> Result<PipelineConfig> {
        let d = PipelineConfig::default();
        Ok(self.build(d.coarse_predictor, d.fine_predictor))
    }
}

pub const PHANTOM_KEYS: [&str; 11] = [
    "dims",
    "spacing",
    "seed",
    "trunk_radius",
    "branch_count",
    "branch_radius_ratio",
    "trunk_drift",
    "lumen_hu",
    "background_hu",
    "noise_sd",
    "source_style",
];

/// Phantom spec from `key = value` pairs over the defaults.
pub fn phantom_spec(pairs: &[(String, String)]) -> Result<PhantomSpec> {
    let mut spec = PhantomSpec::default();
    for (key, value) in pairs {
        let (key, value) = (key.as_str(), value.as_str());
        match key {
            "dims" => spec.dims = triple(key, value)?,
            "spacing" => {
                let parts: Vec<f64> = value.split(',').map(|p| number(key, p)).collect::<Result<_>>()?;
                spec.spacing = match parts[..] {
                    [s] => [s; 3],
                    [x, y, z] => [x, y, z],
                    _ => return Err(bad(key, value, "expected one or three numbers")),
                };
            }
            "seed" => spec.seed = number(key, value)?,
            "trunk_radius" => spec.trunk_radius = number(key, value)?,
            "branch_count" => spec.branch_count = number(key, value)?,
            "branch_radius_ratio" => spec.branch_radius_ratio = number(key, value)?,
            "trunk_drift" => spec.trunk_drift = number(key, value)?,
            "lumen_hu" => spec.lumen_hu = number(key, value)?,
            "background_hu" => spec.background_hu = number(key, value)?,
            "noise_sd" => spec.noise_sd = number(key, value)?,
            "source_style" => spec.source_style = value.parse().map_err(|_| bad(key, value, "expected K, R, D or unknown"))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
    }
    spec.validate()?;
    Ok(spec)
}
