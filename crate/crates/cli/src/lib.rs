//! Experiment driver behind the `sphere-lt` binary.
//!
//! Settings come from a flat `key = value` file (with `#` comments) and are
//! overridden by command-line flags; both use the same key names. Every run
//! writes one CSV table with a header row.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use sphere_lt::contour::{ContourParams, ContourPlan};
use sphere_lt::experiments::{run_cap, run_scalar, CapExperiment, DEFAULT_CAP_A};
use sphere_lt::kernel::WendlandProfile;

/// Every key accepted in a config file or as a `--key` flag.
pub const KEYS: &[&str] = &[
    "experiment",
    "kernel",
    "K",
    "R",
    "N",
    "T",
    "t",
    "theta",
    "delta",
    "r",
    "omega",
    "beta",
    "a",
    "out",
    "workers",
    "full",
    "precise",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Scalar,
    Cap,
    Contour,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Scalar => "scalar",
            Experiment::Cap => "cap",
            Experiment::Contour => "contour",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Experiment::Scalar),
            "cap" => Ok(Experiment::Cap),
            "contour" | "contour-dump" => Ok(Experiment::Contour),
            _ => bail!("unknown experiment {s:?} (expected scalar, cap or contour)"),
        }
    }
}

/// Raw key/value settings, later layers overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", no + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                bail!("line {}: unknown key {key:?}", no + 1);
            }
            if map
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                bail!("line {}: duplicate key {key:?}", no + 1);
            }
        }
        Ok(Settings(map))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.0.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// `other` wins on every key it sets.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    fn parsed<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
        self.get(key)
            .map(|v| parse(v).with_context(|| format!("invalid value for {key}: {v:?}")))
            .transpose()
    }
}

/// Parses a real number, also accepting products and quotients involving
/// `pi`, e.g. `pi/4`, `3*pi/4`, `0.999*pi/4`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let mut value = 1.0;
    let mut divide = false;
    let mut rest = s;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let factor = match token {
            "pi" | "π" => PI,
            _ => token
                .parse::<f64>()
                .map_err(|_| anyhow!("not a number: {s:?}"))?,
        };
        if divide {
            value /= factor;
        } else {
            value *= factor;
        }
        if end == rest.len() {
            return Ok(value);
        }
        divide = rest[end..].starts_with('/');
        rest = &rest[end + 1..];
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(item)
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        bail!("empty list");
    }
    Ok(items)
}

fn parse_count(s: &str) -> Result<usize> {
    Ok(s.trim().parse::<usize>()?)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => bail!("not a boolean: {other:?}"),
    }
}

/// Quadrature order used when `R` is not given: 200 up to K = 600, else 500.
pub fn default_order(k: usize) -> usize {
    if k <= 600 {
        200
    } else {
        500
    }
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub kernel: WendlandProfile,
    /// `(K, R)` pairs; only used by the cap experiment.
    pub sizes: Vec<(usize, usize)>,
    pub ns: Vec<usize>,
    /// Contour parameters; `n` is overridden per row.
    pub contour: ContourParams,
    pub times: Vec<f64>,
    pub a: f64,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub full: bool,
    pub precise: bool,
}

impl ExperimentConfig {
    /// Builds the configuration and validates every contour before any
    /// heavy work starts.
    pub fn from_settings(experiment: Experiment, s: &Settings) -> Result<Self> {
        if let Some(name) = s.get("experiment") {
            let named: Experiment = name.parse()?;
            if named != experiment {
                bail!("config file is for the {named} experiment, not {experiment}");
            }
        }
        let full = s.parsed("full", parse_bool)?.unwrap_or(false);
        let kernel = s
            .parsed("kernel", |v| Ok(v.parse::<WendlandProfile>()?))?
            .unwrap_or(WendlandProfile::Wendland2);

        let base = if full {
            CapExperiment::full(kernel)
        } else {
            CapExperiment::desk(kernel)
        };
        let ks = s.parsed("K", |v| parse_list(v, parse_count))?;
        let rs = s.parsed("R", |v| parse_list(v, parse_count))?;
        let sizes = match (ks, rs) {
            (None, None) => base.sizes.clone(),
            (None, Some(rs)) => {
                let ks: Vec<usize> = base.sizes.iter().map(|p| p.0).collect();
                zip_sizes(&ks, &rs)?
            }
            (Some(ks), None) => ks.iter().map(|&k| (k, default_order(k))).collect(),
            (Some(ks), Some(rs)) => zip_sizes(&ks, &rs)?,
        };

        let default_ns = match experiment {
            Experiment::Scalar => vec![10, 20, 30, 35, 40],
            Experiment::Cap => base.ns.clone(),
            Experiment::Contour => vec![20],
        };
        let ns = s
            .parsed("N", |v| parse_list(v, parse_count))?
            .unwrap_or(default_ns);
        let default_t = match experiment {
            Experiment::Scalar => 2.0,
            _ => 1.0,
        };
        let times = s
            .parsed("t", |v| parse_list(v, parse_real))?
            .unwrap_or(vec![default_t]);
        if let Some(&t) = times.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
            bail!("evaluation time t = {t} must be positive");
        }

        let mut contour = ContourParams::default();
        let real = |key: &str, slot: &mut f64| -> Result<()> {
            if let Some(v) = s.parsed(key, parse_real)? {
                *slot = v;
            }
            Ok(())
        };
        real("T", &mut contour.t_scale)?;
        real("theta", &mut contour.theta)?;
        real("delta", &mut contour.delta)?;
        real("r", &mut contour.r)?;
        real("omega", &mut contour.omega)?;
        real("beta", &mut contour.beta)?;
        for &n in &ns {
            ContourPlan::new(contour.with_n(n)).with_context(|| format!("contour with N = {n}"))?;
        }
        if experiment != Experiment::Contour {
            let plan = ContourPlan::new(contour.with_n(ns[0]))?;
            for &t in &times {
                if !plan.in_window(t) {
                    warn!(
                        "t = {t} lies outside the accuracy window [T/2, 2T] of T = {}",
                        contour.t_scale
                    );
                }
            }
        }

        let a = s.parsed("a", parse_real)?.unwrap_or(DEFAULT_CAP_A);
        if !(a > -1.0 && a < 1.0) {
            bail!("cap parameter a = {a} must lie in (-1, 1)");
        }
        let workers = s.parsed("workers", parse_count)?;
        if workers == Some(0) {
            bail!("workers must be at least 1");
        }
        Ok(ExperimentConfig {
            experiment,
            kernel,
            sizes,
            ns,
            contour,
            times,
            a,
            out: s.get("out").filter(|p| *p != "-").map(PathBuf::from),
            workers,
            full,
            precise: s.parsed("precise", parse_bool)?.unwrap_or(false),
        })
    }

    fn real(&self, x: f64) -> String {
        if self.precise {
            format!("{x:e}")
        } else {
            format!("{x:.5e}")
        }
    }
}

fn zip_sizes(ks: &[usize], rs: &[usize]) -> Result<Vec<(usize, usize)>> {
    match rs.len() {
        1 => Ok(ks.iter().map(|&k| (k, rs[0])).collect()),
        n if n == ks.len() => Ok(ks.iter().copied().zip(rs.iter().copied()).collect()),
        n => bail!(
            "R lists {n} orders for {} point sets; give one R or one per K",
            ks.len()
        ),
    }
}

/// Summary returned to the caller; `failed_rows` is nonzero when some cap
/// rows could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub rows: usize,
    pub failed_rows: usize,
}

/// Runs the configured experiment and writes its CSV table to `out`.
pub fn run(config: &ExperimentConfig, out: impl Write) -> Result<RunSummary> {
    let mut csv = csv::Writer::from_writer(out);
    let start = Instant::now();
    let summary = match config.experiment {
        Experiment::Scalar => write_scalar(config, &mut csv)?,
        Experiment::Cap => write_cap(config, &mut csv)?,
        Experiment::Contour => write_contour(config, &mut csv)?,
    };
    csv.flush()?;
    info!("{} finished in {:.2?}", config.experiment, start.elapsed());
    Ok(summary)
}

fn write_scalar<W: Write>(
    config: &ExperimentConfig,
    csv: &mut csv::Writer<W>,
) -> Result<RunSummary> {
    csv.write_record(["N", "t", "value", "error"])?;
    let mut rows = 0;
    for &t in &config.times {
        for row in run_scalar(&config.contour, &config.ns, t)? {
            csv.write_record([
                row.n.to_string(),
                row.t.to_string(),
                config.real(row.value),
                config.real(row.error),
            ])?;
            rows += 1;
        }
    }
    Ok(RunSummary {
        rows,
        failed_rows: 0,
    })
}

fn write_cap<W: Write>(config: &ExperimentConfig, csv: &mut csv::Writer<W>) -> Result<RunSummary> {
    let exp = CapExperiment {
        kernel: config.kernel,
        sizes: config.sizes.clone(),
        ns: config.ns.clone(),
        contour: config.contour,
        a: config.a,
        times: config.times.clone(),
    };
    csv.write_record([
        "t",
        "e_max",
        "e2",
        "N",
        "K",
        "R",
        "kernel",
        "h_X",
        "eoc",
        "wall_time",
    ])?;
    let mut summary = RunSummary::default();
    for outcome in run_cap(&exp)? {
        match outcome {
            Ok(row) => {
                csv.write_record([
                    row.t.to_string(),
                    config.real(row.e_max),
                    config.real(row.e2),
                    row.n.to_string(),
                    row.k.to_string(),
                    row.r.to_string(),
                    row.kernel.name().to_string(),
                    config.real(row.h),
                    row.eoc.map(|e| config.real(e)).unwrap_or_default(),
                    format!("{:.3}", row.wall_time.as_secs_f64()),
                ])?;
                summary.rows += 1;
            }
            Err(failure) => {
                match failure.n {
                    Some(n) => log::error!("K = {}, N = {n}: {}", failure.k, failure.error),
                    None => log::error!("K = {}: {}", failure.k, failure.error),
                }
                summary.failed_rows += 1;
            }
        }
    }
    Ok(summary)
}

fn write_contour<W: Write>(
    config: &ExperimentConfig,
    csv: &mut csv::Writer<W>,
) -> Result<RunSummary> {
    csv.write_record(["N", "j", "re_z", "im_z", "re_dz", "im_dz"])?;
    let mut rows = 0;
    for &n in &config.ns {
        let plan = ContourPlan::new(config.contour.with_n(n))?;
        for node in plan.nodes_and_weights() {
            csv.write_record([
                n.to_string(),
                node.j.to_string(),
                config.real(node.z.re),
                config.real(node.z.im),
                config.real(node.weight.re),
                config.real(node.weight.im),
            ])?;
            rows += 1;
        }
    }
    Ok(RunSummary {
        rows,
        failed_rows: 0,
    })
}
