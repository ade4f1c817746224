//! Run configuration: TOML file values overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eigenthemes::synth::SynthConfig;
use eigenthemes::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Maximum candidate-list size; `inf` disables truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limit(pub usize);

impl Limit {
    pub const UNLIMITED: Limit = Limit(usize::MAX);
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Limit::UNLIMITED {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Limit {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "inf" | "infinity" | "none" => Ok(Limit::UNLIMITED),
            n => match n.parse::<usize>() {
                Ok(0) => Err("candidate limit must be at least 1".into()),
                Ok(v) => Ok(Limit(v)),
                Err(_) => Err(format!("expected a positive integer or \"inf\", got {n:?}")),
            },
        }
    }
}

impl Serialize for Limit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if *self == Limit::UNLIMITED {
            s.serialize_str("inf")
        } else {
            s.serialize_u64(self.0 as u64)
        }
    }
}

impl<'de> Deserialize<'de> for Limit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Limit::from_str(&n.to_string()),
            Raw::S(s) => Limit::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Settings shared by `link` and `mutilate`. Every field is optional so a
/// file and the command line can each supply a subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub catalog: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub entities: Option<PathBuf>,
    pub words: Option<PathBuf>,
    pub descriptions: Option<PathBuf>,
    pub method: Option<String>,
    pub k: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<Limit>,
    pub delta: Option<f64>,
    pub weighting: Option<String>,
    pub window: Option<usize>,
    pub scaling: Option<String>,
    pub aliases: Option<bool>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<String>>,
    pub fractions: Option<Vec<f64>>,
    pub repeats: Option<usize>,
}

impl RunFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Parses a synth configuration given either as a TOML file path or as a
/// `key=value` list separated by commas, spaces or newlines.
pub fn parse_synth_config(spec: &str) -> Result<SynthConfig> {
    let path = Path::new(spec);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?
    } else {
        let mut lines = Vec::new();
        for item in spec.split([',', ' ', '\n', '\t']).filter(|s| !s.trim().is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {item:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            // Bare words (e.g. `distractors=orthogonal`) become TOML strings.
            let probe = format!("v = {value}");
            if toml::from_str::<toml::Table>(&probe).is_ok() {
                lines.push(format!("{key} = {value}"));
            } else {
                lines.push(format!("{key} = {}", toml::Value::String(value.to_owned())));
            }
        }
        lines.join("\n")
    };
    let cfg: SynthConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("synth config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 2,
        Error::Parse { .. }
        | Error::Format(_)
        | Error::Integrity(_)
        | Error::Data(_)
        | Error::Dimension { .. } => 3,
        Error::Config(_) | Error::Domain(_) => 4,
        Error::Numerical(_) | Error::EmptyDocument | Error::UndefinedInput(_) => 1,
    }
}
