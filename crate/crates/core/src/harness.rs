//! Batch experiments: text config files, sweep specifications, a bounded
//! worker pool with a single CSV writer, median summaries and table presets.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ResidualNorm;
use crate::preconditioner::{CoarseMode, SelectionPolicy};
use crate::solver::{
    coarse_intervals_for_size, CoarseOperator, PreconKind, Problem, SolveConfig, SolveReport,
};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty `key = value` lines with `#` comments stripped, numbered from 1.
fn key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(
                i + 1,
                format!("expected key = value, got '{line}'"),
            ));
        };
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(parse_err(i + 1, "empty key"));
        }
        if value.is_empty() {
            return Err(parse_err(i + 1, format!("empty value for '{key}'")));
        }
        if out
            .iter()
            .any(|(_, k, _): &(usize, String, String)| *k == key)
        {
            return Err(parse_err(i + 1, format!("duplicate key '{key}'")));
        }
        out.push((i + 1, key, value));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid value '{v}' for '{key}'")))
}

fn finite(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(line, key, v)?;
    if !x.is_finite() {
        return Err(parse_err(line, format!("'{key}' must be finite")));
    }
    Ok(x)
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(parse_err(
            line,
            format!("invalid boolean '{v}' for '{key}'"),
        )),
    }
}

/// A number, or `none` for no absorption.
fn beta_value(line: usize, v: &str) -> Result<Option<f64>> {
    if v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        finite(line, "beta", v).map(Some)
    }
}

/// `automatic`, `fixed:m` or `capped:m`.
pub fn parse_selection(v: &str) -> Result<SelectionPolicy> {
    let v = v.trim().to_ascii_lowercase();
    let (kind, arg) = match v.split_once(':') {
        Some((a, b)) => (a.trim().to_string(), Some(b.trim().to_string())),
        None => (v.clone(), None),
    };
    let count = || -> Result<usize> {
        arg.as_deref()
            .ok_or_else(|| Error::invalid(format!("selection '{v}' needs a count")))?
            .parse()
            .map_err(|_| Error::invalid(format!("invalid selection count in '{v}'")))
    };
    match kind.as_str() {
        "automatic" | "auto" if arg.is_none() => Ok(SelectionPolicy::Automatic),
        "fixed" => SelectionPolicy::fixed(count()?),
        "capped" => SelectionPolicy::capped(count()?),
        _ => Err(Error::invalid(format!("unknown selection '{v}'"))),
    }
}

pub fn parse_residual_norm(v: &str) -> Result<ResidualNorm> {
    match v.trim().to_ascii_lowercase().as_str() {
        "rhs" => Ok(ResidualNorm::Rhs),
        "initial" | "initial_residual" => Ok(ResidualNorm::InitialResidual),
        other => Err(Error::invalid(format!("unknown residual norm '{other}'"))),
    }
}

fn parse_coarse_operator(v: &str) -> Result<CoarseOperator> {
    match v.trim().to_ascii_lowercase().as_str() {
        "absorptive" => Ok(CoarseOperator::Absorptive),
        "pure" => Ok(CoarseOperator::Pure),
        other => Err(Error::invalid(format!("unknown coarse operator '{other}'"))),
    }
}

fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidArgument(m) => parse_err(line, m),
        other => other,
    })
}

/// Applies one `key = value` setting shared by config files and sweep specs.
/// Returns `false` when the key is not a solve setting.
fn apply_setting(config: &mut SolveConfig, line: usize, key: &str, v: &str) -> Result<bool> {
    match key {
        "tol" => config.tol = finite(line, key, v)?,
        "max_iter" => config.max_iter = num(line, key, v)?,
        "overlap_layers" | "overlap" => config.overlap_layers = num(line, key, v)?,
        "mode" => config.mode = at_line(line, CoarseMode::parse(v))?,
        "selection" => config.selection = at_line(line, parse_selection(v))?,
        "residual_norm" => config.residual_norm = at_line(line, parse_residual_norm(v))?,
        "count_norm" => config.count_norm = at_line(line, parse_residual_norm(v))?,
        "coarse_operator" => config.coarse_operator = at_line(line, parse_coarse_operator(v))?,
        "dtn_without_absorption" => config.dtn_without_absorption = boolean(line, key, v)?,
        "solve_absorptive" => config.solve_absorptive = boolean(line, key, v)?,
        "subdomains_per_dim" => config.subdomains_per_dim = Some(num(line, key, v)?),
        "coarse_intervals" => config.coarse_intervals = Some(num(line, key, v)?),
        _ => return Ok(false),
    }
    Ok(true)
}

/// Reads a single solve configuration from `key = value` lines.
///
/// `dim`, `k` and `alpha` are required; everything else has the
/// [`SolveConfig::new`] default.
pub fn parse_config(text: &str) -> Result<SolveConfig> {
    let pairs = key_values(text)?;
    let find = |name: &str| pairs.iter().find(|(_, k, _)| k == name);
    let required = |name: &str| {
        find(name).ok_or_else(|| parse_err(0, format!("missing required key '{name}'")))
    };
    let (l, _, v) = required("dim")?;
    let dim = num(*l, "dim", v)?;
    let (l, _, v) = required("k")?;
    let k = finite(*l, "k", v)?;
    let (l, _, v) = required("alpha")?;
    let alpha = finite(*l, "alpha", v)?;
    let mut config = SolveConfig::new(dim, k, alpha);
    for (line, key, v) in &pairs {
        let line = *line;
        match key.as_str() {
            "dim" | "k" | "alpha" => {}
            "alpha_prime" => config.alpha_prime = Some(finite(line, key, v)?),
            "beta" => config.beta = beta_value(line, v)?,
            "precon" => config.precon = at_line(line, PreconKind::parse(v))?,
            "seed" => config.seed = num(line, key, v)?,
            other => {
                if !apply_setting(&mut config, line, other, v)? {
                    return Err(parse_err(line, format!("unknown key '{other}'")));
                }
            }
        }
    }
    config.validate()?;
    Ok(config)
}

/// A Cartesian product of solve configurations, each run for every seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub dim: usize,
    pub ks: Vec<f64>,
    /// `(α, α')`; `None` means `α' = α`.
    pub alphas: Vec<(f64, Option<f64>)>,
    /// `None` means no absorption in the preconditioner.
    pub betas: Vec<Option<f64>>,
    pub precons: Vec<PreconKind>,
    pub seeds: Vec<u64>,
    /// Settings shared by every configuration.
    pub base: SolveConfig,
    pub output: Option<PathBuf>,
    pub workers: usize,
}

impl SweepSpec {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ks: Vec::new(),
            alphas: Vec::new(),
            betas: vec![Some(1.0)],
            precons: vec![PreconKind::OneLevel, PreconKind::Grid, PreconKind::Dtn],
            seeds: vec![0, 1, 2],
            base: SolveConfig::new(dim, 1.0, 1.0),
            output: None,
            workers: 1,
        }
    }

    /// All configurations, ordered by k, then α, then β, then preconditioner.
    pub fn configs(&self) -> Result<Vec<SolveConfig>> {
        let mut out = Vec::new();
        for &k in &self.ks {
            for &(alpha, alpha_prime) in &self.alphas {
                for &beta in &self.betas {
                    for &precon in &self.precons {
                        let mut c = self.base.clone();
                        c.dim = self.dim;
                        c.k = k;
                        c.alpha = alpha;
                        c.alpha_prime = alpha_prime;
                        c.beta = beta;
                        c.precon = precon;
                        c.validate()?;
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn num_rows(&self) -> usize {
        self.ks.len() * self.alphas.len() * self.betas.len() * self.precons.len() * self.seeds.len()
    }
}

fn list<T>(line: usize, v: &str, mut f: impl FnMut(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(&mut f)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(parse_err(line, "empty list"));
    }
    Ok(items)
}

/// Reads a sweep specification.
///
/// List-valued keys take comma-separated values: `k`, `alpha` (each entry
/// `α` or `α:α'`), `beta` (numbers or `none`), `precon` and `seeds`.
/// Scalar keys: `dim`, `out`, `workers` and any solve setting accepted by
/// [`parse_config`] except the list keys.
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec> {
    let pairs = key_values(text)?;
    let dim = match pairs.iter().find(|(_, k, _)| k == "dim") {
        Some((l, _, v)) => num(*l, "dim", v)?,
        None => 2,
    };
    let mut spec = SweepSpec::new(dim);
    for (line, key, v) in &pairs {
        let line = *line;
        match key.as_str() {
            "dim" => {}
            "k" => spec.ks = list(line, v, |s| finite(line, "k", s))?,
            "alpha" => {
                spec.alphas = list(line, v, |s| match s.split_once(':') {
                    Some((a, ap)) => Ok((
                        finite(line, "alpha", a)?,
                        Some(finite(line, "alpha_prime", ap)?),
                    )),
                    None => Ok((finite(line, "alpha", s)?, None)),
                })?
            }
            "beta" => spec.betas = list(line, v, |s| beta_value(line, s))?,
            "precon" => spec.precons = list(line, v, |s| at_line(line, PreconKind::parse(s)))?,
            "seeds" => spec.seeds = list(line, v, |s| num(line, "seeds", s))?,
            "out" | "output" => spec.output = Some(PathBuf::from(v)),
            "workers" => {
                spec.workers = num(line, key, v)?;
                if spec.workers == 0 {
                    return Err(parse_err(line, "workers must be positive"));
                }
            }
            other => {
                if !apply_setting(&mut spec.base, line, other, v)? {
                    return Err(parse_err(line, format!("unknown key '{other}'")));
                }
            }
        }
    }
    if spec.ks.is_empty() {
        return Err(parse_err(0, "missing required key 'k'"));
    }
    if spec.alphas.is_empty() {
        return Err(parse_err(0, "missing required key 'alpha'"));
    }
    spec.configs()?;
    Ok(spec)
}

/// One CSV row: a (configuration, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub k: f64,
    pub d: usize,
    pub alpha: f64,
    pub alpha_prime: f64,
    /// Empty when the preconditioner has no absorption.
    pub beta: Option<f64>,
    pub precon: String,
    pub mode: String,
    #[serde(rename = "N_sub")]
    pub n_sub: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "n_CS")]
    pub n_cs: Option<usize>,
    /// Empty when the run failed.
    pub iterations: Option<usize>,
    pub converged: bool,
    pub solve_seconds: f64,
}

pub const CSV_COLUMNS: [&str; 13] = [
    "k",
    "d",
    "alpha",
    "alpha_prime",
    "beta",
    "precon",
    "mode",
    "N_sub",
    "n",
    "n_CS",
    "iterations",
    "converged",
    "solve_seconds",
];

/// Preconditioner label: the kind plus any forced coarse size or
/// non-default selection.
pub fn precon_label(c: &SolveConfig) -> String {
    match c.precon {
        PreconKind::Grid => match c.coarse_intervals {
            Some(mc) => format!("grid[m_c={mc}]"),
            None => "grid".into(),
        },
        PreconKind::Dtn => match c.selection {
            SelectionPolicy::Automatic => "dtn".into(),
            SelectionPolicy::Fixed(m) => format!("dtn[fixed={m}]"),
            SelectionPolicy::Capped(m) => format!("dtn[capped={m}]"),
        },
        other => other.name().into(),
    }
}

impl ResultRow {
    fn base(c: &SolveConfig) -> Self {
        Self {
            k: c.k,
            d: c.dim,
            alpha: c.alpha,
            alpha_prime: c.effective_alpha_prime(),
            beta: c.beta,
            precon: precon_label(c),
            mode: if c.precon.is_two_level() {
                c.mode.name().into()
            } else {
                String::new()
            },
            n_sub: None,
            n: None,
            n_cs: None,
            iterations: None,
            converged: false,
            solve_seconds: 0.0,
        }
    }

    pub fn from_report(r: &SolveReport) -> Self {
        Self {
            n_sub: Some(r.n_sub),
            n: Some(r.n),
            n_cs: Some(r.n_cs),
            iterations: Some(r.iterations),
            converged: r.converged,
            solve_seconds: r.timings.solve_seconds,
            ..Self::base(&r.config)
        }
    }
}

/// Outcome of one run; reports are kept in memory for callers that need
/// solutions or histories.
#[derive(Debug)]
pub struct RunRecord {
    pub config: SolveConfig,
    pub seed: u64,
    pub row: ResultRow,
    pub result: std::result::Result<SolveReport, String>,
}

/// Median iterations over seeds for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub k: f64,
    pub d: usize,
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: Option<f64>,
    pub precon: String,
    pub mode: String,
    #[serde(rename = "N_sub")]
    pub n_sub: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "n_CS")]
    pub n_cs: Option<usize>,
    pub median_iterations: Option<f64>,
    pub converged_runs: usize,
    pub runs: usize,
    pub failed_runs: usize,
}

/// Median of a non-empty list; the mean of the two middle values for even length.
pub fn median(values: &[usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] + v[mid]) as f64 / 2.0
    })
}

/// One summary row per configuration, in first-appearance order.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<(ResultRow, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = ResultRow {
            n_sub: None,
            n: None,
            n_cs: None,
            iterations: None,
            converged: false,
            solve_seconds: 0.0,
            ..r.row.clone()
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(key, g)| {
            let ok: Vec<&ResultRow> = g
                .iter()
                .filter(|r| r.result.is_ok())
                .map(|r| &r.row)
                .collect();
            let its: Vec<usize> = ok.iter().filter_map(|r| r.iterations).collect();
            SummaryRow {
                k: key.k,
                d: key.d,
                alpha: key.alpha,
                alpha_prime: key.alpha_prime,
                beta: key.beta,
                precon: key.precon,
                mode: key.mode,
                n_sub: ok.first().and_then(|r| r.n_sub),
                n: ok.first().and_then(|r| r.n),
                n_cs: ok.first().and_then(|r| r.n_cs),
                median_iterations: median(&its),
                converged_runs: ok.iter().filter(|r| r.converged).count(),
                runs: g.len(),
                failed_runs: g.len() - ok.len(),
            }
        })
        .collect()
}

/// Runs every configuration for every seed on a pool of `workers` threads.
///
/// One problem setup is shared by the seeds of a configuration. Rows reach
/// `sink` through a single writer in configuration-then-seed order,
/// regardless of completion order. Failures become rows with empty result
/// fields.
pub fn run_configs<W: Write + Send>(
    configs: &[SolveConfig],
    seeds: &[u64],
    workers: usize,
    sink: Option<W>,
) -> Result<Vec<RunRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<(usize, Vec<RunRecord>)>();
    std::thread::scope(|scope| -> Result<Vec<RunRecord>> {
        let writer = scope.spawn(move || -> Result<Vec<RunRecord>> {
            let mut csv = sink.map(|w| csv::WriterBuilder::new().has_headers(false).from_writer(w));
            if let Some(w) = csv.as_mut() {
                w.write_record(CSV_COLUMNS)?;
                w.flush().map_err(csv::Error::from)?;
            }
            let mut pending = BTreeMap::new();
            let mut next = 0;
            let mut all = Vec::new();
            for (index, records) in rx {
                pending.insert(index, records);
                while let Some(records) = pending.remove(&next) {
                    if let Some(w) = csv.as_mut() {
                        for r in &records {
                            w.serialize(&r.row)?;
                        }
                        w.flush().map_err(csv::Error::from)?;
                    }
                    all.extend(records);
                    next += 1;
                }
            }
            Ok(all)
        });
        pool.install(|| {
            configs
                .par_iter()
                .enumerate()
                .for_each_with(tx, |tx, (index, config)| {
                    let _ = tx.send((index, run_config(config, seeds)));
                });
        });
        writer.join().expect("writer thread panicked")
    })
}

fn run_config(config: &SolveConfig, seeds: &[u64]) -> Vec<RunRecord> {
    let problem = Problem::build(config);
    seeds
        .iter()
        .map(|&seed| {
            let mut c = config.clone();
            c.seed = seed;
            let result = problem
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|p| p.run(seed).map_err(|e| e.to_string()));
            let row = match &result {
                Ok(r) => ResultRow::from_report(r),
                Err(_) => ResultRow::base(&c),
            };
            RunRecord {
                config: c,
                seed,
                row,
                result,
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `results.csv` → `results.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}

/// Rows and summaries of a finished sweep.
#[derive(Debug)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub elapsed_seconds: f64,
}

/// Runs `configs × seeds`, streaming rows to `output` and writing the
/// median summary next to it.
pub fn run_and_write(
    configs: &[SolveConfig],
    seeds: &[u64],
    workers: usize,
    output: Option<&Path>,
) -> Result<SweepResult> {
    let t = Instant::now();
    let records = match output {
        Some(path) => run_configs(configs, seeds, workers, Some(create(path)?))?,
        None => run_configs::<fs::File>(configs, seeds, workers, None)?,
    };
    let summary = summarize(&records);
    if let Some(path) = output {
        write_summary(&summary, create(&summary_path(path))?)?;
    }
    Ok(SweepResult {
        records,
        summary,
        elapsed_seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_and_write(
        &spec.configs()?,
        &spec.seeds,
        spec.workers,
        spec.output.as_deref(),
    )
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in summary {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parses CSV written by [`run_configs`].
pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(parse_err(
            1,
            format!(
                "unexpected header '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn fmt_iterations(s: &SummaryRow, max_iter: usize) -> String {
    match s.median_iterations {
        None => "fail".into(),
        Some(m) if s.converged_runs * 2 <= s.runs && m >= max_iter as f64 => format!(">{max_iter}"),
        Some(m) if m.fract() == 0.0 => format!("{m:.0}"),
        Some(m) => format!("{m:.1}"),
    }
}

/// Plain-text table with one line per (k, α, α', β) and one
/// `iterations (n_CS)` column per preconditioner label.
pub fn format_table(summary: &[SummaryRow], max_iter: usize) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for s in summary {
        if !labels.contains(&s.precon.as_str()) {
            labels.push(&s.precon);
        }
    }
    type Key = (u64, usize, u64, u64, Option<u64>);
    let key = |s: &SummaryRow| -> Key {
        (
            s.k.to_bits(),
            s.d,
            s.alpha.to_bits(),
            s.alpha_prime.to_bits(),
            s.beta.map(f64::to_bits),
        )
    };
    let mut lines: Vec<(Key, Vec<&SummaryRow>)> = Vec::new();
    for s in summary {
        match lines.iter_mut().find(|(k, _)| *k == key(s)) {
            Some((_, v)) => v.push(s),
            None => lines.push((key(s), vec![s])),
        }
    }
    let mut header = vec![
        "d".to_string(),
        "k".into(),
        "alpha".into(),
        "alpha'".into(),
        "beta".into(),
        "n".into(),
        "N_sub".into(),
    ];
    header.extend(labels.iter().map(|l| l.to_string()));
    let mut rows = vec![header];
    for (_, group) in &lines {
        let first = group[0];
        let mut row = vec![
            first.d.to_string(),
            first.k.to_string(),
            first.alpha.to_string(),
            first.alpha_prime.to_string(),
            first.beta.map_or_else(|| "none".into(), |b| b.to_string()),
            fmt_opt(group.iter().find_map(|s| s.n)),
            fmt_opt(group.iter().find_map(|s| s.n_sub)),
        ];
        for label in &labels {
            row.push(match group.iter().find(|s| s.precon == *label) {
                Some(s) if s.n_cs.is_some_and(|n| n > 0) => {
                    format!("{} ({})", fmt_iterations(s, max_iter), fmt_opt(s.n_cs))
                }
                Some(s) => fmt_iterations(s, max_iter),
                None => "".into(),
            });
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out
}

/// Wavenumbers of the desk presets, optionally extended to the full tables.
fn preset_ks(desk: &[f64], full: &[f64], kmax: Option<f64>, use_full: bool) -> Vec<f64> {
    let base = if use_full { full } else { desk };
    base.iter()
        .copied()
        .filter(|&k| kmax.is_none_or(|m| k <= m))
        .collect()
}

/// Two-dimensional preset: d = 2, α = α' ∈ {0.6, 0.8, 1}, β ∈ {1, 2}, three preconditioners.
pub fn table1_spec(kmax: Option<f64>, full: bool) -> SweepSpec {
    let mut spec = SweepSpec::new(2);
    spec.ks = preset_ks(
        &[10.0, 20.0, 40.0],
        &[10.0, 20.0, 40.0, 60.0, 80.0],
        kmax,
        full,
    );
    spec.alphas = vec![(0.6, None), (0.8, None), (1.0, None)];
    spec.betas = vec![Some(1.0), Some(2.0)];
    spec
}

/// Three-dimensional preset: d = 3, β = 1, (α, α') ∈ {(0.5, 1), (0.6, 0.9), (0.7, 0.8)},
/// DtN capped at 20 eigenpairs per subdomain.
pub fn table3_spec(kmax: Option<f64>, full: bool) -> SweepSpec {
    let mut spec = SweepSpec::new(3);
    spec.ks = preset_ks(&[10.0], &[10.0, 20.0, 30.0, 40.0], kmax, full);
    spec.alphas = vec![(0.5, Some(1.0)), (0.6, Some(0.9)), (0.7, Some(0.8))];
    spec.base.selection = SelectionPolicy::Capped(20);
    spec
}

/// Equal-size comparison for one α: DtN with two eigenpairs per subdomain
/// against the default grid coarse space, and the grid coarse space forced
/// to the automatic DtN size against automatic DtN. The forced grid size
/// needs the automatic DtN size, so this runs the DtN setups first.
pub fn table2_configs(
    ks: &[f64],
    alpha: f64,
    base: &SolveConfig,
    workers: usize,
) -> Result<Vec<SolveConfig>> {
    let mut out = Vec::new();
    let dtn_auto: Vec<SolveConfig> = ks
        .iter()
        .map(|&k| {
            let mut c = base.clone();
            c.dim = 2;
            c.k = k;
            c.alpha = alpha;
            c.alpha_prime = None;
            c.beta = Some(1.0);
            c.precon = PreconKind::Dtn;
            c.selection = SelectionPolicy::Automatic;
            c
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let sizes: Vec<usize> = pool.install(|| {
        dtn_auto
            .par_iter()
            .map(|c| Problem::build(c).map(|p| p.coarse_summary().map_or(0, |s| s.n_cs)))
            .collect::<Result<_>>()
    })?;
    for (c, n_cs) in dtn_auto.into_iter().zip(sizes) {
        let mut fixed = c.clone();
        fixed.selection = SelectionPolicy::Fixed(2);
        let mut grid = c.clone();
        grid.precon = PreconKind::Grid;
        let mut forced = grid.clone();
        forced.coarse_intervals = Some(coarse_intervals_for_size(n_cs, 2));
        out.extend([grid, fixed, forced, c]);
    }
    Ok(out)
}

pub fn table2_ks(kmax: Option<f64>, full: bool) -> Vec<f64> {
    preset_ks(&[10.0, 20.0], &[10.0, 20.0, 40.0, 60.0, 80.0], kmax, full)
}

pub const TABLE2_ALPHAS: [f64; 3] = [0.6, 0.8, 1.0];
