//! Run configuration: a `key = value` file merged with command-line flags,
//! flags winning.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use linkshroud::perturb::{InterClusterForm, Mechanism};
use linkshroud::privacy::{PriorModel, Scorer};
use linkshroud::{PerturbParams, VertexId};

use crate::error::{CliError, Result};

pub const KEYS: &[&str] = &[
    "manifest",
    "out",
    "k",
    "m",
    "theta",
    "seed",
    "mechanism",
    "metric",
    "samples",
    "l",
    "threads",
    "inter-cluster-form",
    "query",
    "prior",
    "f",
    "targets",
    "epsilon",
    "damping",
    "lazy",
    "sybil-scenario",
    "eval",
];

const PATH_KEYS: &[&str] = &["manifest", "out", "sybil-scenario"];

/// Raw settings before validation.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment. Relative paths are
/// taken relative to the file's directory.
pub fn parse_kv(text: &str, base: &Path) -> Result<Settings> {
    let mut values = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected key = value", i + 1)));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key {key:?}", i + 1)));
        }
        let mut value = value.trim().to_string();
        if PATH_KEYS.contains(&key.as_str()) && Path::new(&value).is_relative() {
            value = base.join(&value).to_string_lossy().into_owned();
        }
        values.insert(key, value);
    }
    Ok(Settings { values })
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        parse_kv(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key));
        self.values.insert(key.to_string(), value.into());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| CliError::Config(format!("{key} = {s:?}: {e}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(s) = self.get(key) else { return Ok(None) };
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse().map_err(|e| CliError::Config(format!("{key}: {x:?}: {e}"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let params = PerturbParams {
            k: self.parse("k", 2)?,
            m: self.parse("m", 2)?,
            theta: self.parse("theta", 0.8)?,
            seed: self.parse("seed", 0)?,
            inter_form: self.parse("inter-cluster-form", InterClusterForm::DegreeProduct)?,
        };
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let mechanisms: Vec<Mechanism> = self.list("mechanism")?.unwrap_or_else(|| vec![Mechanism::Selective]);
        if mechanisms.is_empty() {
            return Err(CliError::Config("no mechanism selected".into()));
        }
        let query = match self.get("query") {
            None => None,
            Some(s) => {
                let parts: Vec<&str> = s.split(',').map(str::trim).collect();
                let bad = || CliError::Config(format!("query = {s:?}: expected u,v,t"));
                let [u, v, t] = parts.as_slice() else { return Err(bad()) };
                Some(Query {
                    u: u.parse().map_err(|_| bad())?,
                    v: v.parse().map_err(|_| bad())?,
                    t: t.parse().map_err(|_| bad())?,
                })
            }
        };
        let f: f64 = self.parse("f", 0.1)?;
        if !(0.0..=1.0).contains(&f) {
            return Err(CliError::Config(format!("f = {f} outside [0, 1]")));
        }
        let epsilon: f64 = self.parse("epsilon", 0.05)?;
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(CliError::Config(format!("epsilon = {epsilon} outside (0, 0.5)")));
        }
        let damping: f64 = self.parse("damping", 0.85)?;
        if !(damping > 0.0 && damping < 1.0) {
            return Err(CliError::Config(format!("damping = {damping} outside (0, 1)")));
        }
        let l: Vec<usize> = self.list("l")?.unwrap_or_else(|| vec![1]);
        if l.is_empty() || l.contains(&0) {
            return Err(CliError::Config("l values must be positive".into()));
        }
        let samples: usize = self.parse("samples", 1000)?;
        let threads: Option<usize> = self.get("threads").map(|_| self.parse("threads", 1)).transpose()?;
        if threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        Ok(RunConfig {
            manifest: self.path("manifest"),
            out: self.path("out"),
            params,
            mechanisms,
            metrics: self.list("metric")?.unwrap_or_default(),
            evals: self.list("eval")?.unwrap_or_else(|| vec![Eval::Attack, Eval::Sampling]),
            samples,
            l,
            threads,
            query,
            prior: self.parse("prior", Prior(PriorModel::WorstCase))?.0,
            f,
            targets: self.list("targets")?,
            epsilon,
            damping,
            lazy: self.parse("lazy", false)?,
            sybil_scenario: self.path("sybil-scenario"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub u: VertexId,
    pub v: VertexId,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    AntiInference,
    Indistinguishability,
    AntiAggregation,
    UtilityDistance,
    Modularity,
    Pagerank,
    Structure,
    Spectral,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "anti-inference" => Metric::AntiInference,
            "indistinguishability" => Metric::Indistinguishability,
            "anti-aggregation" => Metric::AntiAggregation,
            "ud" | "utility-distance" => Metric::UtilityDistance,
            "modularity" => Metric::Modularity,
            "pagerank" => Metric::Pagerank,
            "structure" => Metric::Structure,
            "spectral" => Metric::Spectral,
            other => return Err(format!("unknown metric {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Eval {
    Attack,
    Sampling,
    Sybil,
}

impl FromStr for Eval {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "attack" => Eval::Attack,
            "sampling" => Eval::Sampling,
            "sybil" => Eval::Sybil,
            other => return Err(format!("unknown evaluation {other:?}")),
        })
    }
}

struct Prior(PriorModel);

impl FromStr for Prior {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(Prior(match s {
            "worst-case" => PriorModel::WorstCase,
            "common-neighbors" => PriorModel::LinkPrediction(Scorer::CommonNeighbors),
            "jaccard" => PriorModel::LinkPrediction(Scorer::Jaccard),
            "adamic-adar" => PriorModel::LinkPrediction(Scorer::AdamicAdar),
            other => match other.strip_prefix("fixed:").map(str::parse::<f64>) {
                Some(Ok(p)) if p > 0.0 && p < 1.0 => PriorModel::Fixed(p),
                _ => return Err(format!("unknown prior {other:?}")),
            },
        }))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub params: PerturbParams,
    pub mechanisms: Vec<Mechanism>,
    pub metrics: Vec<Metric>,
    pub evals: Vec<Eval>,
    pub samples: usize,
    pub l: Vec<usize>,
    pub threads: Option<usize>,
    pub query: Option<Query>,
    pub prior: PriorModel,
    pub f: f64,
    pub targets: Option<Vec<VertexId>>,
    pub epsilon: f64,
    pub damping: f64,
    pub lazy: bool,
    pub sybil_scenario: Option<PathBuf>,
}

impl RunConfig {
    pub fn manifest(&self) -> Result<&Path> {
        self.manifest.as_deref().ok_or_else(|| CliError::Config("manifest is required".into()))
    }

    pub fn out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| CliError::Config("out is required".into()))
    }
}

/// Sybil scenario file: `honest` (edge list, defaults to the last
/// snapshot), `sybil` region size, `g` attack edges, `w` walk length, `r`
/// routes per node, `verifiers`, `seeds` repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct SybilConfig {
    pub honest: Option<PathBuf>,
    pub sybil: usize,
    pub g: usize,
    pub w: Vec<usize>,
    pub r: usize,
    pub verifiers: usize,
    pub seeds: usize,
}

impl SybilConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("sybil scenario {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("sybil scenario line {}: expected key = value", i + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |key: &str, default: usize| -> Result<usize> {
            map.get(key).map_or(Ok(default), |s| {
                s.parse().map_err(|e| CliError::Config(format!("sybil scenario {key} = {s:?}: {e}")))
            })
        };
        for key in map.keys() {
            if !["honest", "sybil", "regions", "g", "w", "r", "verifiers", "seeds"].contains(&key.as_str()) {
                return Err(CliError::Config(format!("sybil scenario: unknown key {key:?}")));
            }
        }
        let w = match map.get("w") {
            None => vec![10],
            Some(s) => s
                .split(',')
                .map(|x| x.trim().parse().map_err(|e| CliError::Config(format!("sybil scenario w = {s:?}: {e}"))))
                .collect::<Result<Vec<usize>>>()?,
        };
        let cfg = SybilConfig {
            honest: map.get("honest").map(|h| base.join(h)),
            sybil: num("sybil", num("regions", 50)?)?,
            g: num("g", 10)?,
            w,
            r: num("r", 10)?,
            verifiers: num("verifiers", 20)?,
            seeds: num("seeds", 1)?,
        };
        if cfg.w.is_empty() || cfg.w.contains(&0) || cfg.g == 0 || cfg.r == 0 || cfg.seeds == 0 || cfg.verifiers == 0 {
            return Err(CliError::Config("sybil scenario values must be positive".into()));
        }
        Ok(cfg)
    }
}
