//! Experiment configuration: a sectioned `key = value` text format whose keys
//! are exactly the command-line flag names.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::hamiltonian::{DiagPolicy, Mode};
use crate::mc::McConfig;
use crate::model::{parse_initial, parse_kernel, parse_process, CovarianceKernel, InitialCondition, LevyProcessSpec, NoiseSpec};
use crate::moments::Axis;
use crate::pathsim::TimeGrid;
use crate::spectral::Sense;

/// `(section, key, default, help)`. The order here is the echo order.
pub const KEYS: &[(&str, &str, &str, &str)] = &[
    ("model", "dim", "1", "spatial dimension"),
    ("model", "process", "brownian", "Lévy process, e.g. stable:alpha=1.5"),
    ("model", "kernel", "gaussian", "spatial covariance, e.g. riesz:beta=0.5"),
    ("model", "beta0", "0.5", "temporal exponent in [0,1)"),
    ("model", "u0", "constant:value=1", "initial condition"),
    ("grid", "t", "1", "comma-separated times"),
    ("grid", "x", "0", "points separated by ';', coordinates by ','"),
    ("grid", "steps", "128", "time steps per grid"),
    ("mc", "replicates", "1000", "Monte Carlo replicates"),
    ("mc", "seed", "1", "base seed"),
    ("mc", "force", "false", "skip hypothesis checks and order caps"),
    ("hamiltonian", "mode", "self", "self|cross"),
    ("hamiltonian", "policy", "analytic", "diagonal policy: analytic|drop"),
    ("hamiltonian", "order", "1", "Monte Carlo moment order of H"),
    ("hamiltonian", "dump", "false", "write the replicate values of H"),
    ("moments", "sense", "skorohod", "stratonovich|skorohod"),
    ("moments", "p", "1", "comma-separated moment orders"),
    ("chaos", "terms", "6", "highest chaos order N"),
    ("holder", "axis", "space", "space|time"),
    ("holder", "first-lag", "1", "largest lag is 2^-first-lag"),
    ("holder", "lags", "6", "number of dyadic lags"),
    ("paths", "count", "4", "number of sampled paths"),
    ("output", "out", "pamkit-out", "artifact directory (not echoed)"),
];

/// Keys left out of the artifact echo.
const NOT_ECHOED: &[&str] = &["out"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub process: LevyProcessSpec,
    pub kernel: CovarianceKernel,
    pub beta0: f64,
    pub u0: InitialCondition,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub steps: usize,
    pub replicates: usize,
    pub seed: u64,
    pub force: bool,
    pub mode: Mode,
    pub policy: DiagPolicy,
    pub order: u32,
    pub dump: bool,
    pub sense: Sense,
    pub p: Vec<usize>,
    pub terms: usize,
    pub axis: Axis,
    pub first_lag: i32,
    pub lags: usize,
    pub path_count: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ConfigBuilder::new().build().expect("defaults are valid")
    }
}

/// Raw `key → value` strings, validated by [`ConfigBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    values: BTreeMap<&'static str, String>,
}

fn key_entry(key: &str) -> Result<&'static (&'static str, &'static str, &'static str, &'static str)> {
    KEYS.iter()
        .find(|k| k.1 == key)
        .ok_or_else(|| Error::Config(format!("unknown key '{key}'")))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", v.trim())))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let out: Vec<T> = v.split(',').map(|s| parse_num(key, s)).collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(out)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected true|false, got '{other}'"))),
    }
}

fn join<T: std::fmt::Display>(v: &[T], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl ConfigBuilder {
    pub fn new() -> Self {
        ConfigBuilder::default()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let entry = key_entry(key)?;
        self.values.insert(entry.1, value.trim().to_string());
        Ok(())
    }

    /// Applies a config file. Keys must sit in their own section; keys before
    /// any section header are accepted as is.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !KEYS.iter().any(|k| k.0 == name) {
                    return Err(Error::Config(format!("line {}: unknown section [{name}]", lineno + 1)));
                }
                section = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let k = k.trim();
            let entry = key_entry(k)?;
            if let Some(s) = &section {
                if s != entry.0 {
                    return Err(Error::Config(format!(
                        "line {}: key '{k}' belongs in [{}], not [{s}]",
                        lineno + 1,
                        entry.0
                    )));
                }
            }
            self.set(k, v)?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| key_entry(key).expect("known key").2)
    }

    pub fn build(&self) -> Result<ExperimentConfig> {
        let dim: usize = parse_num("dim", self.get("dim"))?;
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be positive"));
        }
        let process = parse_process(self.get("process"), dim)?;
        let kernel = parse_kernel(self.get("kernel"), dim)?;
        let beta0: f64 = parse_num("beta0", self.get("beta0"))?;
        NoiseSpec::new(beta0, kernel.clone())?;
        let u0 = parse_initial(self.get("u0"))?;
        let times: Vec<f64> = parse_list("t", self.get("t"))?;
        if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::param("t", "times must be positive and finite"));
        }
        let points: Vec<Vec<f64>> = self.get("x").split(';').map(|p| parse_list::<f64>("x", p)).collect::<Result<_>>()?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::param("x", format!("every point needs {dim} coordinates")));
        }
        let steps: usize = parse_num("steps", self.get("steps"))?;
        if steps == 0 {
            return Err(Error::param("steps", "need at least one time step"));
        }
        let replicates: usize = parse_num("replicates", self.get("replicates"))?;
        if replicates < 2 {
            return Err(Error::param("replicates", "need at least 2 replicates"));
        }
        let p: Vec<usize> = parse_list("p", self.get("p"))?;
        if p.contains(&0) {
            return Err(Error::param("p", "moment orders start at 1"));
        }
        let lags: usize = parse_num("lags", self.get("lags"))?;
        Ok(ExperimentConfig {
            dim,
            process,
            kernel,
            beta0,
            u0,
            times,
            points,
            steps,
            replicates,
            seed: parse_num("seed", self.get("seed"))?,
            force: parse_bool("force", self.get("force"))?,
            mode: self.get("mode").parse()?,
            policy: self.get("policy").parse()?,
            order: parse_num("order", self.get("order"))?,
            dump: parse_bool("dump", self.get("dump"))?,
            sense: self.get("sense").parse()?,
            p,
            terms: parse_num("terms", self.get("terms"))?,
            axis: self.get("axis").parse()?,
            first_lag: parse_num("first-lag", self.get("first-lag"))?,
            lags,
            path_count: parse_num("count", self.get("count"))?,
            out: PathBuf::from(self.get("out")),
        })
    }
}

/// Parses a config file on top of the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut b = ConfigBuilder::new();
    b.apply_text(text)?;
    b.build()
}

/// Parses `(flag, value)` pairs on top of the defaults.
pub fn parse_flags<'a>(flags: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<ExperimentConfig> {
    let mut b = ConfigBuilder::new();
    for (k, v) in flags {
        b.set(k.trim_start_matches("--"), v)?;
    }
    b.build()
}

impl ExperimentConfig {
    /// Canonical value of every key, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, &'static str, String)> {
        KEYS.iter()
            .map(|(section, key, _, _)| {
                let v = match *key {
                    "dim" => self.dim.to_string(),
                    "process" => self.process.to_string(),
                    "kernel" => self.kernel.to_string(),
                    "beta0" => self.beta0.to_string(),
                    "u0" => self.u0.to_string(),
                    "t" => join(&self.times, ","),
                    "x" => self.points.iter().map(|p| join(p, ",")).collect::<Vec<_>>().join(";"),
                    "steps" => self.steps.to_string(),
                    "replicates" => self.replicates.to_string(),
                    "seed" => self.seed.to_string(),
                    "force" => self.force.to_string(),
                    "mode" => self.mode.to_string(),
                    "policy" => self.policy.to_string(),
                    "order" => self.order.to_string(),
                    "dump" => self.dump.to_string(),
                    "sense" => self.sense.to_string(),
                    "p" => join(&self.p, ","),
                    "terms" => self.terms.to_string(),
                    "axis" => self.axis.to_string(),
                    "first-lag" => self.first_lag.to_string(),
                    "lags" => self.lags.to_string(),
                    "count" => self.path_count.to_string(),
                    "out" => self.out.display().to_string(),
                    other => unreachable!("key {other} has no field"),
                };
                (*section, *key, v)
            })
            .collect()
    }

    /// Sectioned config text; with `echo` the output directory is omitted.
    pub fn to_text(&self, echo: bool) -> String {
        let mut out = String::new();
        let mut current = "";
        for (section, key, v) in self.entries() {
            if echo && NOT_ECHOED.contains(&key) {
                continue;
            }
            if section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{section}]\n"));
                current = section;
            }
            out.push_str(&format!("{key} = {v}\n"));
        }
        out
    }

    /// The echo block written at the top of CSV artifacts.
    pub fn csv_header(&self) -> String {
        self.to_text(true)
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| format!("# {l}\n"))
            .collect()
    }

    /// Recovers a config from the leading `# ` block of a CSV artifact.
    pub fn from_csv_echo(text: &str) -> Result<Self> {
        let body: String = text.lines().map_while(|l| l.strip_prefix("# ")).map(|l| format!("{l}\n")).collect();
        parse_config(&body)
    }

    /// The echo as a JSON object of sections.
    pub fn to_json(&self) -> Value {
        let mut sections: Map<String, Value> = Map::new();
        for (section, key, v) in self.entries() {
            if NOT_ECHOED.contains(&key) {
                continue;
            }
            sections
                .entry(section.to_string())
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("object")
                .insert(key.to_string(), Value::String(v));
        }
        Value::Object(sections)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Config("config echo must be an object".into()))?;
        let mut b = ConfigBuilder::new();
        for (section, keys) in obj {
            let keys = keys
                .as_object()
                .ok_or_else(|| Error::Config(format!("section {section} must be an object")))?;
            for (k, val) in keys {
                let s = val.as_str().ok_or_else(|| Error::Config(format!("{k} must be a string")))?;
                b.set(k, s)?;
            }
        }
        b.build()
    }

    pub fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.beta0, self.kernel.clone())
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            replicates: self.replicates,
            seed: self.seed,
            force: self.force,
        }
    }

    pub fn grid(&self, t: f64) -> Result<TimeGrid> {
        TimeGrid::new(t, self.steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::KernelFamily;

    #[test]
    fn flag_examples() {
        let c = parse_flags([
            ("--kernel", "riesz:beta=0.5"),
            ("--process", "stable:alpha=1.5"),
            ("--beta0", "0.25"),
        ])
        .unwrap();
        assert_eq!(c.kernel.family(), &KernelFamily::Riesz { beta: 0.5 });
        assert_eq!(c.beta0, 0.25);
        let e = parse_flags([("--kernel", "riesz:beta=1.5"), ("--dim", "1")]).unwrap_err();
        assert!(e.to_string().contains("beta"), "{e}");
        let e = parse_flags([("--beta0", "1.0")]).unwrap_err();
        assert!(e.to_string().contains("beta0"), "{e}");
        assert!(parse_flags([("--kernel", "nope")]).is_err());
        assert!(parse_flags([("--bogus", "1")]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = parse_flags([
            ("dim", "2"),
            ("kernel", "fractional:beta1=0.3,beta2=0.7"),
            ("process", "stable:alpha=1.25"),
            ("t", "0.5,1,0.1"),
            ("x", "0,0;1.5,-2"),
            ("p", "1,2,3"),
            ("u0", "tabulated:x0=-1,dx=0.5,v0=1,v1=2,v2=0.5"),
            ("seed", "18446744073709551615"),
        ])
        .unwrap();
        assert_eq!(parse_config(&c.to_text(false)).unwrap(), c);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
        let echo = format!("{}t,value\n1,2\n", c.csv_header());
        assert_eq!(ExperimentConfig::from_csv_echo(&echo).unwrap(), c);
    }

    #[test]
    fn sections_are_enforced() {
        assert!(parse_config("[model]\nkernel = cauchy:c=2\n[mc]\nseed = 4\n").is_ok());
        assert!(parse_config("[mc]\nkernel = cauchy\n").is_err());
        assert!(parse_config("[nowhere]\n").is_err());
        assert!(parse_config("kernel cauchy\n").is_err());
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(parse_flags([("replicates", "1")]).is_err());
        assert!(parse_flags([("t", "0")]).is_err());
        assert!(parse_flags([("x", "0,1")]).is_err());
        assert!(parse_flags([("p", "0")]).is_err());
        assert!(parse_flags([("steps", "0")]).is_err());
        assert!(parse_flags([("force", "maybe")]).is_err());
    }
}
