//! Experiment configuration: a TOML document, overridden key by key from flags.

use crate::error::CliError;
use fraclat::lattice::BoxKind;
use fraclat::mourre::PotentialFamily;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Half,
    Periodic,
}

impl From<KindName> for BoxKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Half => BoxKind::Half,
            KindName::Periodic => BoxKind::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Spectral,
    Circulant,
    Reflection,
}

impl From<MethodName> for fraclat::fractional::PowerMethod {
    fn from(m: MethodName) -> Self {
        use fraclat::fractional::PowerMethod;
        match m {
            MethodName::Spectral => PowerMethod::Spectral,
            MethodName::Circulant => PowerMethod::Circulant,
            MethodName::Reflection => PowerMethod::Reflection,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionName {
    Series,
    Definitional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    // A struct variant, so unknown keys are rejected here too.
    Zero {},
    InverseBracket { amplitude: f64, power: f64 },
    Alternating { amplitude: f64 },
    CornerWell { strength: f64 },
}

impl From<PotentialSpec> for PotentialFamily {
    fn from(p: PotentialSpec) -> Self {
        match p {
            PotentialSpec::Zero {} => PotentialFamily::Zero,
            PotentialSpec::InverseBracket { amplitude, power } => PotentialFamily::InverseBracket { amplitude, power },
            PotentialSpec::Alternating { amplitude } => PotentialFamily::Alternating { amplitude },
            PotentialSpec::CornerWell { strength } => PotentialFamily::CornerWell { strength },
        }
    }
}

impl std::str::FromStr for PotentialSpec {
    type Err = String;

    /// `family[:p1[:p2]]`, e.g. `corner-well:-2` or `inverse-bracket:1:1.5`.
    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.split(':');
        let family = parts.next().unwrap_or_default();
        let params: Vec<f64> = parts
            .map(|p| p.parse::<f64>().map_err(|e| format!("potential parameter `{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(format!("potential `{family}` takes {n} parameter(s), got {}", params.len()))
            }
        };
        match family {
            "zero" => arity(0).map(|_| Self::Zero {}),
            "inverse-bracket" => arity(2).map(|_| Self::InverseBracket {
                amplitude: params[0],
                power: params[1],
            }),
            "alternating" => arity(1).map(|_| Self::Alternating { amplitude: params[0] }),
            "corner-well" => arity(1).map(|_| Self::CornerWell { strength: params[0] }),
            other => Err(format!(
                "unknown potential family `{other}` (expected zero|inverse-bracket|alternating|corner-well)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl std::str::FromStr for PathSpec {
    type Err = String;

    /// `start:end:step`.
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(':')
            .map(|p| p.parse::<f64>().map_err(|e| format!("path component `{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [start, end, step] => Ok(Self { start, end, step }),
            _ => Err(format!("path needs start:end:step, got `{s}`")),
        }
    }
}

/// Every key the runner understands. Keys a command does not use are ignored;
/// unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub r: Option<Vec<f64>>,
    pub extents: Option<Vec<usize>>,
    pub kind: Option<KindName>,
    pub method: Option<MethodName>,
    pub construction: Option<ConstructionName>,
    pub window: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub epsilon: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub etas: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub velocities: Option<Vec<f64>>,
    pub horizons: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub ladder: Option<Vec<usize>>,
    pub h_max: Option<usize>,
    pub block: Option<usize>,
    pub ring: Option<usize>,
    pub path: Option<PathSpec>,
    pub potential: Option<PotentialSpec>,
    pub table: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub keep_going: Option<bool>,
}

/// A parsed document plus where its keys came from, for error messages.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    pub path: Option<PathBuf>,
    text: String,
    overridden: BTreeSet<&'static str>,
}

impl ConfigSource {
    /// Line of `key = ...` in the file, unless a flag replaced it.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        if self.overridden.contains(key) {
            return None;
        }
        self.text.lines().position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.trim_end() == format!("[{key}]")
        })
        .map(|i| i + 1)
    }

    pub fn error(&self, key: &'static str, message: impl Into<String>) -> CliError {
        let message = message.into();
        let origin = if self.overridden.contains(key) { format!(" (from --{})", key.replace('_', "-")) } else { String::new() };
        CliError::Config {
            file: self.path.clone(),
            line: self.line_of(key),
            message: format!("`{key}`{origin}: {message}"),
        }
    }
}

/// Parses a TOML document; syntax and type errors carry the offending line.
pub fn parse_config(text: &str, path: Option<PathBuf>) -> Result<(ExperimentConfig, ConfigSource), CliError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config {
        file: path.clone(),
        line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
        message: e.message().to_string(),
    })?;
    Ok((
        cfg,
        ConfigSource {
            path,
            text: text.to_string(),
            overridden: BTreeSet::new(),
        },
    ))
}

macro_rules! apply {
    ($cfg:ident, $src:ident, $ov:ident; $($key:ident),* $(,)?) => {
        $(
            if $ov.$key.is_some() {
                $cfg.$key = $ov.$key.clone();
                $src.overridden.insert(stringify!($key));
            }
        )*
    };
}

/// Replaces every key that a flag sets.
pub fn merge(cfg: &mut ExperimentConfig, src: &mut ConfigSource, ov: &ExperimentConfig) {
    apply!(cfg, src, ov;
        command, r, extents, kind, method, construction, window, s, epsilon, lambdas, etas, times,
        velocities, horizons, t_max, ladder, h_max, block, ring, path, potential, table, output, seed,
        threads, keep_going,
    );
}

fn all_positive(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite() && *x > 0.0)
}

/// Checks that do not depend on the command.
pub fn validate(cfg: &ExperimentConfig, src: &ConfigSource) -> Result<(), CliError> {
    if let Some(r) = &cfg.r {
        if r.is_empty() || r.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(src.error("r", "components must be finite and nonzero"));
        }
    }
    if let Some(e) = &cfg.extents {
        if e.is_empty() || e.iter().any(|&x| x < 2) {
            return Err(src.error("extents", "every extent must be at least 2"));
        }
        if let Some(r) = &cfg.r {
            if r.len() != e.len() && r.len() != 1 {
                return Err(src.error("r", format!("{} components for a {}-dimensional box", r.len(), e.len())));
            }
        }
    }
    if let Some(w) = &cfg.window {
        if w.len() != 2 || !(w[0] < w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(src.error("window", "needs two finite values a < b"));
        }
    }
    if let Some(s) = cfg.s {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(src.error("s", "weight exponent must be finite and >= 0"));
        }
    }
    if let Some(eps) = cfg.epsilon {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(src.error("epsilon", "must be finite and positive"));
        }
    }
    for (key, v) in [("etas", &cfg.etas), ("times", &cfg.times), ("horizons", &cfg.horizons)] {
        if let Some(v) = v {
            if v.is_empty() || !all_positive(v) {
                return Err(src.error(key, "needs at least one value, all finite and positive"));
            }
        }
    }
    if let Some(v) = &cfg.velocities {
        if v.is_empty() || v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(src.error("velocities", "needs at least one finite value >= 0"));
        }
    }
    if let Some(v) = &cfg.lambdas {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(src.error("lambdas", "needs at least one finite value"));
        }
    }
    if let Some(t) = cfg.t_max {
        if !(t > 0.0) || !t.is_finite() {
            return Err(src.error("t_max", "must be finite and positive"));
        }
    }
    if let Some(l) = &cfg.ladder {
        if l.is_empty() || l.iter().any(|&x| x < 2) || l.windows(2).any(|w| w[1] <= w[0]) {
            return Err(src.error("ladder", "needs increasing sizes, each at least 2"));
        }
    }
    if let Some(h) = cfg.h_max {
        if h < 2 {
            return Err(src.error("h_max", "must be at least 2"));
        }
    }
    if let Some(b) = cfg.block {
        if b < 2 {
            return Err(src.error("block", "must be at least 2"));
        }
    }
    if let Some(p) = cfg.path {
        if !(p.step > 0.0) || !(p.start < p.end) || !p.start.is_finite() || !p.end.is_finite() {
            return Err(src.error("path", "needs finite start < end and a positive step"));
        }
    }
    if cfg.threads == Some(0) {
        return Err(src.error("threads", "must be at least 1"));
    }
    Ok(())
}
