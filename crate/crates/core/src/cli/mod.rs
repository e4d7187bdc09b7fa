//! The `pamkit` command line: flags and config files share one key set, each
//! subcommand writes CSV or JSON artifacts with the resolved config echoed
//! at the top.

pub mod config;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Arg, ArgAction, ArgMatches};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chaos::chaos_partial_sum;
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::hamiltonian::{expected_hamiltonian, hamiltonian_moment, hamiltonian_samples};
use crate::moments::{holder_scan, moment_skorohod, moment_stratonovich, HolderScanConfig, Offset};
use crate::oracles::oracle_suite;
use crate::pathsim::{sample_path, write_paths_csv};
use crate::spectral::{check_hypothesis_i, check_hypothesis_ii, holder_exponents, Sense};

pub use config::{parse_config, parse_flags, ConfigBuilder, ExperimentConfig, KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;
pub const EXIT_INSUFFICIENT_DATA: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Hypotheses,
    ExpectedHamiltonian,
    Moments,
    Chaos,
    Holder,
    OracleSuite,
    Paths,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Hypotheses,
        Command::ExpectedHamiltonian,
        Command::Moments,
        Command::Chaos,
        Command::Holder,
        Command::OracleSuite,
        Command::Paths,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Hypotheses => "hypotheses",
            Command::ExpectedHamiltonian => "expected-hamiltonian",
            Command::Moments => "moments",
            Command::Chaos => "chaos",
            Command::Holder => "holder",
            Command::OracleSuite => "oracle-suite",
            Command::Paths => "paths",
        }
    }

    fn about(self) -> &'static str {
        match self {
            Command::Hypotheses => "integrability hypotheses and Hölder brackets (JSON)",
            Command::ExpectedHamiltonian => "analytic E[H] plus a Monte Carlo moment of H (JSON)",
            Command::Moments => "Feynman-Kac moment estimates (CSV)",
            Command::Chaos => "truncated chaos series for the second moment (CSV)",
            Command::Holder => "increment second moments over dyadic lags (CSV + JSON)",
            Command::OracleSuite => "closed-form bounds against quadrature (JSON)",
            Command::Paths => "sampled Lévy paths (CSV)",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand '{s}'")))
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::HypothesisViolated { .. } => EXIT_HYPOTHESIS,
        Error::Divergence(_) => EXIT_DIVERGENCE,
        Error::InsufficientData(_) => EXIT_INSUFFICIENT_DATA,
        Error::Io(_) | Error::CheckFailed(_) => EXIT_FAILURE,
        _ => EXIT_CONFIG,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn write_json(cfg: &ExperimentConfig, name: &str, command: Command, body: Value) -> Result<PathBuf> {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), Value::String(command.name().into()));
    doc.insert("config".into(), cfg.to_json());
    if let Value::Object(m) = body {
        doc.extend(m);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
    text.push('\n');
    write_file(&cfg.out, name, &text)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn fmt_point(x: &[f64]) -> String {
    x.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn point_header(dim: usize) -> String {
    if dim == 1 {
        "x".into()
    } else {
        (1..=dim).map(|i| format!("x_{i}")).collect::<Vec<_>>().join(",")
    }
}

/// Runs one subcommand and returns the artifacts written. A hypotheses
/// report in which (I) or (II) fails is still written before the
/// hypothesis error is returned.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    match command {
        Command::Hypotheses => run_hypotheses(cfg),
        Command::ExpectedHamiltonian => run_expected_hamiltonian(cfg),
        Command::Moments => run_moments(cfg),
        Command::Chaos => run_chaos(cfg),
        Command::Holder => run_holder(cfg),
        Command::OracleSuite => run_oracles(cfg),
        Command::Paths => run_paths(cfg),
    }
}

fn run_hypotheses(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let noise = cfg.noise()?;
    let i = check_hypothesis_i(&cfg.process, &noise)?;
    let ii = check_hypothesis_ii(&cfg.process, &noise)?;
    let mut holder = serde_json::Map::new();
    for sense in [Sense::Stratonovich, Sense::Skorohod] {
        let v = match holder_exponents(&cfg.process, &noise, sense) {
            Ok(h) => to_value(&h),
            Err(e) => json!({ "error": e.to_string() }),
        };
        holder.insert(sense.to_string(), v);
    }
    let (hi, hii) = (i.holds, ii.holds);
    let path = write_json(
        cfg,
        "hypotheses.json",
        Command::Hypotheses,
        json!({ "I": hi, "II": hii, "reports": [to_value(&i), to_value(&ii)], "holder": holder }),
    )?;
    if !hi || !hii {
        let which = if !hi { "I" } else { "II" };
        return Err(Error::HypothesisViolated {
            hypothesis: which.into(),
            detail: format!("report written to {}", path.display()),
        });
    }
    Ok(vec![path])
}

fn run_expected_hamiltonian(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mc = cfg.mc();
    let mut results = Vec::new();
    let mut dump = format!("{}t,stream_id,value\n", cfg.csv_header());
    for &t in &cfg.times {
        let expected = expected_hamiltonian(&cfg.process, &cfg.kernel, cfg.beta0, t, cfg.mode)?;
        let grid = cfg.grid(t)?;
        let est = hamiltonian_moment(&cfg.process, &cfg.kernel, cfg.beta0, &grid, cfg.order, cfg.mode, cfg.policy, &mc)?;
        if cfg.dump {
            let values = hamiltonian_samples(&cfg.process, &cfg.kernel, cfg.beta0, &grid, cfg.mode, cfg.policy, &mc)?;
            for (r, v) in values.iter().enumerate() {
                dump.push_str(&format!("{},{r},{}\n", fmt_f64(t), fmt_f64(*v)));
            }
        }
        results.push(json!({
            "t": t,
            "mode": cfg.mode.to_string(),
            "expected": expected,
            "mc_order": cfg.order,
            "mc_value": est.value,
            "mc_stderr": est.stderr,
        }));
    }
    let mut out = vec![write_json(
        cfg,
        "expected_hamiltonian.json",
        Command::ExpectedHamiltonian,
        json!({ "results": results }),
    )?];
    if cfg.dump {
        out.push(write_file(&cfg.out, "hamiltonian_samples.csv", &dump)?);
    }
    Ok(out)
}

fn run_moments(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let noise = cfg.noise()?;
    let mc = cfg.mc();
    let mut csv = format!(
        "{}sense,p,t,{},n_steps,replicates,value,stderr,seed\n",
        cfg.csv_header(),
        point_header(cfg.dim)
    );
    for &t in &cfg.times {
        let grid = cfg.grid(t)?;
        for x in &cfg.points {
            for &p in &cfg.p {
                let est = match cfg.sense {
                    Sense::Stratonovich => moment_stratonovich(p, t, x, &cfg.u0, &cfg.process, &noise, &grid, &mc)?,
                    Sense::Skorohod => moment_skorohod(p, t, x, &cfg.u0, &cfg.process, &noise, &grid, &mc)?,
                };
                csv.push_str(&format!(
                    "{},{p},{},{},{},{},{},{},{}\n",
                    cfg.sense,
                    fmt_f64(t),
                    fmt_point(x),
                    est.n_steps,
                    est.replicates,
                    fmt_f64(est.value),
                    fmt_f64(est.stderr),
                    est.seed
                ));
            }
        }
    }
    Ok(vec![write_file(&cfg.out, "moments.csv", &csv)?])
}

fn run_chaos(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let noise = cfg.noise()?;
    let mc = cfg.mc();
    let mut csv = format!("{}t,n,term,stderr,partial_sum\n", cfg.csv_header());
    for &t in &cfg.times {
        let s = chaos_partial_sum(cfg.terms, t, &cfg.u0, &cfg.process, &noise, &cfg.grid(t)?, &mc)?;
        for (term, sum) in s.terms.iter().zip(&s.partial_sums) {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(t),
                term.n,
                fmt_f64(term.value),
                fmt_f64(term.stderr),
                fmt_f64(*sum)
            ));
        }
    }
    Ok(vec![write_file(&cfg.out, "chaos.csv", &csv)?])
}

fn run_holder(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let noise = cfg.noise()?;
    let base = Offset::new(cfg.times[0], cfg.points[0].clone());
    let scan_cfg = HolderScanConfig::dyadic(cfg.sense, cfg.axis, base, cfg.first_lag, cfg.lags);
    let scan = holder_scan(&scan_cfg, &cfg.u0, &cfg.process, &noise, &cfg.grid(cfg.times[0])?, &cfg.mc())?;
    let mut csv = format!("{}axis,lag,second_moment,stderr\n", cfg.csv_header());
    for ((lag, m), s) in scan.lags.iter().zip(&scan.increment_second_moments).zip(&scan.stderrs) {
        csv.push_str(&format!("{},{},{},{}\n", scan.axis, fmt_f64(*lag), fmt_f64(*m), fmt_f64(*s)));
    }
    let table = write_file(&cfg.out, "holder.csv", &csv)?;
    let summary = write_json(
        cfg,
        "holder.json",
        Command::Holder,
        json!({
            "sense": scan.sense.to_string(),
            "axis": scan.axis.to_string(),
            "fitted_slope": scan.fitted_slope,
            "slope_stderr": scan.slope_stderr,
            "holder_estimate": scan.holder_estimate,
            "theoretical_sup": scan.theoretical_sup,
            "exceeds_theory": scan.exceeds_theory,
        }),
    )?;
    Ok(vec![table, summary])
}

fn run_oracles(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let checks = oracle_suite(cfg.seed)?;
    let failed = checks.iter().filter(|c| !c.satisfied).count();
    let path = write_json(
        cfg,
        "oracle_suite.json",
        Command::OracleSuite,
        json!({ "passed": checks.len() - failed, "failed": failed, "all_passed": failed == 0, "checks": to_value(&checks) }),
    )?;
    if failed > 0 {
        return Err(Error::CheckFailed(format!("{failed} oracle checks failed; see {}", path.display())));
    }
    Ok(vec![path])
}

fn run_paths(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let grid = cfg.grid(cfg.times[0])?;
    let paths: Vec<_> = (0..cfg.path_count as u64)
        .map(|s| sample_path(&cfg.process, &grid, cfg.seed, s))
        .collect();
    let mut buf = cfg.csv_header().into_bytes();
    write_paths_csv(&mut buf, &paths).map_err(|e| Error::Io(e.to_string()))?;
    let text = String::from_utf8(buf).expect("csv is utf-8");
    Ok(vec![write_file(&cfg.out, "paths.csv", &text)?])
}

/// The clap command tree; every config key is a `--key value` flag on each
/// subcommand.
pub fn command() -> clap::Command {
    let mut shared: Vec<Arg> = vec![
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("config file; flags override it"),
        Arg::new("threads")
            .long("threads")
            .value_name("N")
            .env("PAMKIT_THREADS")
            .value_parser(clap::value_parser!(usize))
            .help("worker threads"),
    ];
    for (section, key, default, help) in KEYS {
        let mut arg = Arg::new(*key)
            .long(*key)
            .value_name("VALUE")
            .help(format!("[{section}] {help} (default {default})"));
        if matches!(*key, "force" | "dump") {
            arg = arg.num_args(0..=1).default_missing_value("true");
        }
        shared.push(arg.action(ArgAction::Set));
    }
    let mut cmd = clap::Command::new("pamkit")
        .about("Monte Carlo and quadrature toolkit for the parabolic Anderson model")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in Command::ALL {
        cmd = cmd.subcommand(clap::Command::new(c.name()).about(c.about()).args(shared.clone()));
    }
    cmd
}

/// Resolves the config of a parsed subcommand: defaults, then the config
/// file, then flags in key order.
pub fn config_from_matches(m: &ArgMatches) -> Result<ExperimentConfig> {
    let mut b = ConfigBuilder::new();
    if let Some(path) = m.get_one::<String>("config") {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
        b.apply_text(&text)?;
    }
    for (_, key, _, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            b.set(key, v)?;
        }
    }
    b.build()
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let command: Command = name.parse().expect("registered subcommand");
    crate::mc::init_thread_pool(sub.get_one::<usize>("threads").copied());
    let result = config_from_matches(sub).and_then(|cfg| run(command, &cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                let _ = writeln!(stderr, "wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::param("a", "b")), 2);
        assert_eq!(
            exit_code(&Error::HypothesisViolated {
                hypothesis: "I".into(),
                detail: String::new()
            }),
            3
        );
        assert_eq!(exit_code(&Error::Divergence(String::new())), 4);
        assert_eq!(exit_code(&Error::InsufficientData(String::new())), 5);
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("nope".parse::<Command>().is_err());
    }

    #[test]
    fn flags_reach_the_config() {
        let m = command()
            .try_get_matches_from([
                "pamkit",
                "moments",
                "--kernel",
                "riesz:beta=0.5",
                "--process",
                "stable:alpha=1.5",
                "--beta0",
                "0.25",
                "--force",
            ])
            .unwrap();
        let cfg = config_from_matches(m.subcommand().unwrap().1).unwrap();
        assert!(cfg.force);
        assert_eq!(cfg.beta0, 0.25);
        assert_eq!(cfg.process.alpha(), 1.5);
    }
}
