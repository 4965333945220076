//! Run configuration and data emission for the `longrange` binary.
//!
//! Flags, `--config` files and `.runspec` sidecars share one `key = value`
//! vocabulary and one parser. Precedence is flags, then config file, then
//! environment (workers only), then built-in defaults. The resolved
//! [`RunSpec`] is logged on every run and written next to every output file,
//! so `longrange --config out.csv.runspec` reproduces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use log::info;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::genrand::{
    default_max_len, format_sequence, generate_lex, parse_sequence, validate, GenConfig, Status,
    Variant,
};
use crate::jumps::JumpRule;
use crate::model::HaltingModel;
use crate::search::{
    exhaustive_one_sided_with, period_detect, two_sided_window, Budget, OneSidedOptions,
    SearchReport, Verdict, DEFAULT_MAX_DEPTH, DEFAULT_MAX_NODES,
};
use crate::stats::{
    compare, run_sampling, run_terminal_map, scaling_fit, scaling_points, Comparison, Histogram,
    ScalingFit, ScalingSource, TerminalMap,
};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_140_101;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_RADIUS: usize = 25;
pub const DEFAULT_SCALING_DS: [usize; 6] = [4, 5, 6, 7, 10, 15];
/// Default worker count when neither flag nor config sets one.
pub const WORKERS_ENV: &str = "LONGRANGE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Halting-site histogram of the uniform random generator.
    Sample,
    /// Terminal records (i, n) of the first-emptied-site generator.
    TerminalMap,
    /// Exact halting-time distribution.
    Model,
    /// Exhaustive one-sided search for the longest legal string.
    Search,
    /// Two-sided window satisfiability.
    Window,
    /// Lexicographic greedy sequence and its eventual period.
    Lex,
    /// Model against Monte Carlo, site by site.
    Compare,
    /// Log-log fits of mean and std against d.
    Scaling,
    /// Check a given string against a rule.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SourceName {
    #[default]
    Model,
    Empirical,
    Reference,
}

fn enum_name<E: ValueEnum>(e: &E) -> String {
    e.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn parse_enum<E: ValueEnum>(key: &str, value: &str) -> Result<E> {
    E::from_str(value, false).map_err(|_| {
        let choices: Vec<String> = E::value_variants().iter().map(enum_name).collect();
        Error::Config(format!("{key}: `{value}` is not one of {}", choices.join(", ")))
    })
}

#[derive(Debug, Parser, Default)]
#[command(name = "longrange", version, about = "Sequences with long-range exclusions x_i != x_{i+f(n)}")]
pub struct Args {
    /// What to run; may instead come from `command = ...` in --config.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Alphabet size.
    #[arg(long)]
    pub d: Option<usize>,
    /// Jump rule: square, cube, pow:k, linear:k, odd, factorial, geom:p, explicit:[a,b,...].
    #[arg(long)]
    pub rule: Option<String>,
    /// Maximum sequence length M [default: max(2000, 4 d^2.5)].
    #[arg(long = "max-len", short = 'M')]
    pub max_len: Option<usize>,
    /// Number of random sequences.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Base seed, or `random` for an entropy-drawn seed (logged).
    #[arg(long)]
    pub seed: Option<String>,
    /// Worker threads; never changes results [env: LONGRANGE_WORKERS].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file; data goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Node budget for search and window.
    #[arg(long = "budget-nodes")]
    pub budget_nodes: Option<u64>,
    /// Depth limit for search.
    #[arg(long = "budget-depth")]
    pub budget_depth: Option<usize>,
    /// Window radius R.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Longest period tried by lex [default: M/4].
    #[arg(long = "max-period")]
    pub max_period: Option<usize>,
    /// Alphabet sizes for scaling, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ds: Option<Vec<usize>>,
    /// Scaling data source.
    #[arg(long, value_enum)]
    pub source: Option<SourceName>,
    /// Sequence for validate, e.g. 121212 or 1,10,2.
    #[arg(long)]
    pub seq: Option<String>,
    /// key = value file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Args {
    /// Flags that were given, as config pairs.
    fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("command", self.command.as_ref().map(enum_name));
        put("d", self.d.map(|v| v.to_string()));
        put("rule", self.rule.clone());
        put("max-len", self.max_len.map(|v| v.to_string()));
        put("samples", self.samples.map(|v| v.to_string()));
        put("seed", self.seed.clone());
        put("workers", self.workers.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("format", self.format.as_ref().map(enum_name));
        put("budget-nodes", self.budget_nodes.map(|v| v.to_string()));
        put("budget-depth", self.budget_depth.map(|v| v.to_string()));
        put("radius", self.radius.map(|v| v.to_string()));
        put("max-period", self.max_period.map(|v| v.to_string()));
        put("ds", self.ds.as_ref().map(|v| join(v)));
        put("source", self.source.as_ref().map(enum_name));
        put("seq", self.seq.clone());
        m
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

const KEYS: [&str; 16] = [
    "command",
    "d",
    "rule",
    "max-len",
    "samples",
    "seed",
    "workers",
    "format",
    "out",
    "budget-nodes",
    "budget-depth",
    "radius",
    "max-period",
    "ds",
    "source",
    "seq",
];

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!(
                "line {}: unknown key `{k}` (known: {})",
                lineno + 1,
                KEYS.join(", ")
            )));
        }
        m.insert(k, v.trim().to_string());
    }
    Ok(m)
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSpec {
    pub command: Command,
    pub d: Option<usize>,
    pub rule: JumpRule,
    pub max_len: usize,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub budget: Budget,
    pub radius: usize,
    pub max_period: usize,
    pub ds: Vec<usize>,
    pub source: SourceName,
    pub seq: Option<String>,
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a valid non-negative integer")))
}

fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

impl RunSpec {
    /// Resolves pairs against the defaults and checks them before any work.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<RunSpec> {
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let command: Command = match get("command") {
            Some(v) => parse_enum("command", v)?,
            None => return Err(Error::Config("no command given (e.g. `longrange sample --d 4`)".into())),
        };
        let rule: JumpRule = get("rule").unwrap_or("square").parse()?;
        let d = get("d").map(|v| num::<usize>("d", v)).transpose()?;
        let needs_d = !matches!(command, Command::Scaling | Command::Validate);
        match d {
            None if needs_d => {
                return Err(Error::Config("--d is required (alphabet size, at least 2)".into()))
            }
            Some(d) if d < 2 => return Err(Error::AlphabetTooSmall(d)),
            Some(d) if d > crate::genrand::MAX_ALPHABET => return Err(Error::AlphabetTooLarge(d)),
            _ => {}
        }
        let max_len = match get("max-len") {
            Some(v) => num("max-len", v)?,
            None => default_max_len(d.unwrap_or(2)),
        };
        if max_len == 0 {
            return Err(Error::ZeroLength);
        }
        let samples = get("samples").map_or(Ok(DEFAULT_SAMPLES), |v| num("samples", v))?;
        if samples == 0 {
            return Err(Error::NoSamples);
        }
        let seed = match get("seed") {
            None => DEFAULT_SEED,
            Some("random") => rand::random(),
            Some(v) => num("seed", v)?,
        };
        let workers = match get("workers") {
            Some(v) => num("workers", v)?,
            None => default_workers(),
        };
        if workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let ds = match get("ds") {
            Some(v) => v
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| num("ds", t.trim()))
                .collect::<Result<Vec<usize>>>()?,
            None => DEFAULT_SCALING_DS.to_vec(),
        };
        let seq = get("seq").map(str::to_string);
        if command == Command::Validate && seq.is_none() {
            return Err(Error::Config("validate needs --seq".into()));
        }
        Ok(RunSpec {
            command,
            d,
            rule,
            max_len,
            samples,
            seed,
            workers,
            format: get("format").map_or(Ok(Format::Csv), |v| parse_enum("format", v))?,
            out: get("out").map(PathBuf::from),
            budget: Budget {
                max_nodes: get("budget-nodes")
                    .map_or(Ok(DEFAULT_MAX_NODES), |v| num("budget-nodes", v))?,
                max_depth: get("budget-depth")
                    .map_or(Ok(DEFAULT_MAX_DEPTH), |v| num("budget-depth", v))?,
            },
            radius: get("radius").map_or(Ok(DEFAULT_RADIUS), |v| num("radius", v))?,
            max_period: get("max-period").map_or(Ok((max_len / 4).max(1)), |v| num("max-period", v))?,
            ds,
            source: get("source").map_or(Ok(SourceName::Model), |v| parse_enum("source", v))?,
            seq,
        })
    }

    /// Flags over config file over defaults.
    pub fn resolve(args: &Args) -> Result<RunSpec> {
        let mut pairs = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        pairs.extend(args.pairs());
        RunSpec::from_pairs(&pairs)
    }

    pub fn parse(text: &str) -> Result<RunSpec> {
        RunSpec::from_pairs(&parse_pairs(text)?)
    }

    /// Resolved values in a fixed key order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![("command", enum_name(&self.command))];
        if let Some(d) = self.d {
            v.push(("d", d.to_string()));
        }
        v.extend([
            ("rule", self.rule.to_string()),
            ("max-len", self.max_len.to_string()),
            ("samples", self.samples.to_string()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.to_string()),
            ("format", enum_name(&self.format)),
        ]);
        if let Some(out) = &self.out {
            v.push(("out", out.display().to_string()));
        }
        v.extend([
            ("budget-nodes", self.budget.max_nodes.to_string()),
            ("budget-depth", self.budget.max_depth.to_string()),
            ("radius", self.radius.to_string()),
            ("max-period", self.max_period.to_string()),
            ("ds", join(&self.ds)),
            ("source", enum_name(&self.source)),
        ]);
        if let Some(seq) = &self.seq {
            v.push(("seq", seq.clone()));
        }
        v
    }

    /// `key = value` lines, the sidecar and config format.
    pub fn to_config(&self) -> String {
        self.pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// One `key=value` line for the log stream.
    pub fn log_line(&self) -> String {
        self.pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn metadata(&self) -> Value {
        let mut m = serde_json::Map::new();
        for (k, v) in self.pairs() {
            m.insert(k.to_string(), Value::String(v));
        }
        Value::Object(m)
    }

    fn d(&self) -> usize {
        self.d.expect("checked during resolution")
    }

    fn gen_config(&self, variant: Variant) -> GenConfig {
        GenConfig::new(self.d(), self.rule.clone(), self.max_len, self.seed, variant)
    }
}

/// What a finished run reports back to `main`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// Lines for stdout.
    pub stdout: String,
    /// Data body (CSV or JSON) when the command produces one.
    pub body: Option<String>,
    /// A budget ran out before a conclusion.
    pub budget_exhausted: bool,
}

fn json_body(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut s = String::from("j,count,freq,ln_count_plus_1\n");
    for j in 1..=h.last_site() {
        let _ = writeln!(s, "{},{},{},{}", j, h.count(j), h.freq(j), h.log_count(j));
    }
    s
}

pub fn terminal_map_csv(m: &TerminalMap) -> String {
    let mut s = String::from("i,n,count\n");
    for (&(i, n), &c) in &m.counts {
        let _ = writeln!(s, "{i},{n},{c}");
    }
    s
}

pub fn model_csv(model: &HaltingModel) -> String {
    let mut s = String::from("j,pmf,survival\n");
    for j in 1..=model.last_site() {
        let _ = writeln!(s, "{},{},{}", j, model.pmf(j), model.survival(j));
    }
    s
}

pub fn compare_csv(c: &Comparison) -> String {
    let mut s = String::from("j,empirical,model\n");
    for r in &c.rows {
        let _ = writeln!(s, "{},{},{}", r.j, r.empirical, r.model);
    }
    s
}

pub fn scaling_csv(fit: &ScalingFit) -> String {
    let mut s = String::from("d,mean,std\n");
    for p in &fit.points {
        let _ = writeln!(s, "{},{},{}", p.d, p.mean, p.std);
    }
    s
}

fn witness_csv(w: &[u8]) -> String {
    let mut s = String::from("site,symbol\n");
    for (k, x) in w.iter().enumerate() {
        let _ = writeln!(s, "{},{}", k + 1, x);
    }
    s
}

fn report_body(spec: &RunSpec, r: &SearchReport) -> Result<String> {
    match spec.format {
        Format::Csv => Ok(witness_csv(r.witness.as_deref().unwrap_or(&[]))),
        Format::Json => json_body(&json!({
            "metadata": spec.metadata(),
            // nodes_explored depends on scheduling; it goes to the log only
            "mode": r.mode,
            "verdict": r.verdict,
            "witness": r.witness.as_deref().map(|w| format_sequence(w, spec.d())),
        })),
    }
}

fn witness_line(w: &[u8], d: usize) -> String {
    format!("witness={}\n", format_sequence(w, d))
}

/// Executes a resolved run without touching the filesystem.
pub fn execute(spec: &RunSpec) -> Result<Outcome> {
    let mut out = Outcome {
        stdout: String::new(),
        body: None,
        budget_exhausted: false,
    };
    match spec.command {
        Command::Sample => {
            let h = run_sampling(&spec.gen_config(Variant::V20), spec.samples, spec.workers)?;
            info!(
                "event=sample mean={} std={} argmax={} censored={}",
                h.mean(),
                h.std(),
                h.argmax(),
                h.censored
            );
            out.body = Some(match spec.format {
                Format::Csv => histogram_csv(&h),
                Format::Json => {
                    let mut meta = spec.metadata();
                    meta["censored"] = json!(h.censored);
                    json_body(&json!({
                        "metadata": meta,
                        "mean": h.mean(),
                        "std": h.std(),
                        "argmax": h.argmax(),
                        "rows": (1..=h.last_site()).map(|j| json!({
                            "j": j, "count": h.count(j), "freq": h.freq(j),
                            "ln_count_plus_1": h.log_count(j),
                        })).collect::<Vec<_>>(),
                    }))?
                }
            });
        }
        Command::TerminalMap => {
            let m = run_terminal_map(&spec.gen_config(Variant::V21), spec.samples, spec.workers)?;
            let staircase = m.staircase();
            for (n, total) in m.levels() {
                info!(
                    "event=level n={} count={} i_min={} bound={}",
                    n,
                    total,
                    staircase[&n],
                    crate::stats::staircase_bound(m.d, n)
                );
            }
            info!(
                "event=terminal_map violations={} censored={}",
                m.staircase_violations(),
                m.censored
            );
            out.body = Some(match spec.format {
                Format::Csv => terminal_map_csv(&m),
                Format::Json => {
                    let mut meta = spec.metadata();
                    meta["censored"] = json!(m.censored);
                    json_body(&json!({
                        "metadata": meta,
                        "staircase_violations": m.staircase_violations(),
                        "levels": m.level_decay(),
                        "rows": m.counts.iter().map(|(&(i, n), &c)| json!({
                            "i": i, "n": n, "count": c,
                        })).collect::<Vec<_>>(),
                    }))?
                }
            });
        }
        Command::Model => {
            let model = HaltingModel::build(spec.d(), &spec.rule)?;
            let m = model.moments();
            info!(
                "event=model mean={} std={} argmax={} peak={} tail_mass={}",
                m.mean, m.std, m.argmax, m.peak, model.tail_mass
            );
            out.body = Some(match spec.format {
                Format::Csv => model_csv(&model),
                Format::Json => json_body(&json!({
                    "metadata": spec.metadata(),
                    "mean": m.mean,
                    "std": m.std,
                    "argmax": m.argmax,
                    "peak": m.peak,
                    "tail_mass": model.tail_mass,
                    "mean_tail_bound": model.mean_tail_bound,
                    "p_table": model.p_table.iter().map(|b| json!({
                        "interval": b.interval,
                        "cardinality": b.cardinality,
                        "numerator": b.exact.numerator.to_string(),
                        "denominator": b.exact.denominator.to_string(),
                        "p": b.p,
                    })).collect::<Vec<_>>(),
                    "rows": (1..=model.last_site()).map(|j| json!({
                        "j": j, "pmf": model.pmf(j), "survival": model.survival(j),
                    })).collect::<Vec<_>>(),
                }))?,
            });
        }
        Command::Search => {
            let r = exhaustive_one_sided_with(
                spec.d(),
                &spec.rule,
                OneSidedOptions {
                    budget: spec.budget,
                    workers: spec.workers,
                    ..OneSidedOptions::default()
                },
            )?;
            let _ = writeln!(out.stdout, "{}", r.verdict);
            if let Some(w) = &r.witness {
                out.stdout.push_str(&witness_line(w, spec.d()));
            }
            info!("event=search nodes={}", r.nodes_explored);
            out.budget_exhausted = r.verdict.is_budget();
            out.body = spec.out.is_some().then(|| report_body(spec, &r)).transpose()?;
        }
        Command::Window => {
            let r = two_sided_window(spec.d(), &spec.rule, spec.radius, spec.budget)?;
            match r.verdict {
                Verdict::AllFinite { .. } => {
                    let _ = writeln!(out.stdout, "Unsatisfiable radius={}", spec.radius);
                }
                ref v => {
                    let _ = writeln!(out.stdout, "{v}");
                }
            }
            if let Some(w) = &r.witness {
                out.stdout.push_str(&witness_line(w, spec.d()));
            }
            info!("event=window nodes={}", r.nodes_explored);
            out.budget_exhausted = r.verdict.is_budget();
            out.body = spec.out.is_some().then(|| report_body(spec, &r)).transpose()?;
        }
        Command::Lex => {
            let g = generate_lex(&spec.gen_config(Variant::Lexicographic))?;
            let seq = g.sequence.unwrap_or_default();
            match g.status {
                Status::Halted => {
                    let _ = writeln!(out.stdout, "Halted site={}", g.halt_site.unwrap_or(0));
                }
                Status::FullLength => {
                    let _ = writeln!(out.stdout, "FullLength length={}", g.length);
                    if seq.len() >= 2 * spec.max_period {
                        let r = period_detect(&seq, spec.max_period)?;
                        let _ = writeln!(out.stdout, "{}", r.verdict);
                    }
                }
            }
            out.body = Some(match spec.format {
                Format::Csv => witness_csv(&seq),
                Format::Json => json_body(&json!({
                    "metadata": spec.metadata(),
                    "status": format!("{:?}", g.status),
                    "halt_site": g.halt_site,
                    "sequence": format_sequence(&seq, spec.d()),
                }))?,
            });
        }
        Command::Compare => {
            let model = HaltingModel::build(spec.d(), &spec.rule)?;
            let h = run_sampling(&spec.gen_config(Variant::V20), spec.samples, spec.workers)?;
            let c = compare(&model, &h)?;
            info!(
                "event=compare mean_delta={} std_delta={} argmax_match={} model_cdf_leads={}",
                c.mean_delta, c.std_delta, c.argmax_match, c.model_cdf_leads
            );
            out.body = Some(match spec.format {
                Format::Csv => compare_csv(&c),
                Format::Json => {
                    let mut meta = spec.metadata();
                    meta["censored"] = json!(h.censored);
                    json_body(&json!({ "metadata": meta, "comparison": c }))?
                }
            });
        }
        Command::Scaling => {
            let source = match spec.source {
                SourceName::Model => ScalingSource::ModelMoments,
                SourceName::Reference => ScalingSource::Reference,
                SourceName::Empirical => ScalingSource::Empirical {
                    samples: spec.samples,
                    seed: spec.seed,
                    workers: spec.workers,
                },
            };
            let fit = scaling_fit(&scaling_points(&spec.ds, source)?)?;
            let _ = writeln!(
                out.stdout,
                "mean_exponent={} std_exponent={}",
                fit.mean_exponent, fit.std_exponent
            );
            out.body = Some(match spec.format {
                Format::Csv => scaling_csv(&fit),
                Format::Json => json_body(&json!({ "metadata": spec.metadata(), "fit": fit }))?,
            });
        }
        Command::Validate => {
            let seq = parse_sequence(spec.seq.as_deref().unwrap_or_default())?;
            let ok = validate(&seq, &spec.rule);
            let _ = writeln!(out.stdout, "{}", if ok { "valid" } else { "invalid" });
        }
    }
    Ok(out)
}

/// Sidecar path for an output file: `<out>.runspec`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".runspec");
    PathBuf::from(name)
}

/// Runs `spec`, writes outputs, and returns the process exit code.
pub fn run(spec: &RunSpec) -> Result<u8> {
    info!("event=runspec {}", spec.log_line());
    let outcome = execute(spec)?;
    print!("{}", outcome.stdout);
    if let Some(body) = &outcome.body {
        match &spec.out {
            Some(path) => {
                fs::write(path, body)?;
                fs::write(sidecar_path(path), spec.to_config())?;
                info!("event=written out={}", path.display());
            }
            None => print!("{body}"),
        }
    }
    Ok(if outcome.budget_exhausted { 2 } else { 0 })
}
