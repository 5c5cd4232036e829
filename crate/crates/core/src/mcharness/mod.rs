//! Monte Carlo sweeps of the SRIVC estimator over sample sizes and
//! intersample configurations.
//!
//! Every run draws its own record from a seed derived from
//! `(base_seed, instance label, N, run)`, so the raw results table does not
//! depend on how runs are scheduled across threads.

mod plot;

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::ctlti::{theta_from_tf, CtTransferFunction, ParameterVector};
use crate::error::{Error, Result};
use crate::estimator::{param_names, srivc_estimate, HoldPolicy, Init, SrivcConfig};
use crate::holdsim::{parse_f64, Hold};
use crate::signals::{
    gen_prbs, gen_random_binary, parse_key_values, synthesize_multisine_record, synthesize_record,
    NoiseSpec,
};

pub use plot::{render_svg, Figure};

/// Where the data of an instance comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    /// Random binary input applied through the given hold.
    Held(Hold),
    /// Four-sine input with analytic stationary output.
    AnalyticMultisine,
}

/// One curve of the study: a data source and the holds assumed by the
/// estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub label: String,
    pub source: DataSource,
    pub holds: HoldPolicy,
}

impl Instance {
    pub fn new(label: &str, source: DataSource, holds: HoldPolicy) -> Self {
        Self {
            label: label.to_string(),
            source,
            holds,
        }
    }

    /// `label : source : regressor,instrument,output`
    pub fn to_config_value(&self) -> String {
        let source = match self.source {
            DataSource::Held(h) => h.to_string(),
            DataSource::AnalyticMultisine => "multisine".to_string(),
        };
        format!(
            "{} : {} : {},{},{}",
            self.label,
            source,
            self.holds.regressor_input,
            self.holds.instrument_input,
            self.holds.output
        )
    }

    pub fn from_config_value(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [label, source, holds] = parts.as_slice() else {
            return Err(Error::Parse(format!(
                "instance {s:?}: expected `label : source : reg,ins,out`"
            )));
        };
        if label.is_empty() || label.contains(',') {
            return Err(Error::Parse(format!("bad instance label {label:?}")));
        }
        let source = match *source {
            "multisine" => DataSource::AnalyticMultisine,
            h => DataSource::Held(h.parse()?),
        };
        let holds: Vec<Hold> = holds.split(',').map(str::parse).collect::<Result<_>>()?;
        let [regressor_input, instrument_input, output] = holds[..] else {
            return Err(Error::Parse(format!("instance {s:?}: need three holds")));
        };
        Ok(Self::new(
            label,
            source,
            HoldPolicy {
                regressor_input,
                instrument_input,
                output,
            },
        ))
    }
}

/// The five configurations of the consistency study: ZOH data with matched
/// holds, FOH regressor input, FOH instrument input, FOH output, and
/// multisine data with FOH-interpolated input.
pub fn reference_instances() -> Vec<Instance> {
    let zoh = HoldPolicy::uniform(Hold::Zoh);
    vec![
        Instance::new("1-zoh-all", DataSource::Held(Hold::Zoh), zoh),
        Instance::new(
            "2-foh-regressor-input",
            DataSource::Held(Hold::Zoh),
            HoldPolicy {
                regressor_input: Hold::Foh,
                ..zoh
            },
        ),
        Instance::new(
            "3-foh-instrument-input",
            DataSource::Held(Hold::Zoh),
            HoldPolicy {
                instrument_input: Hold::Foh,
                ..zoh
            },
        ),
        Instance::new(
            "4-foh-output",
            DataSource::Held(Hold::Zoh),
            HoldPolicy {
                output: Hold::Foh,
                ..zoh
            },
        ),
        Instance::new(
            "5-multisine-foh",
            DataSource::AnalyticMultisine,
            HoldPolicy::uniform(Hold::Foh),
        ),
    ]
}

/// Binary excitation for held-input instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    RandomBinary,
    Prbs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub system: CtTransferFunction,
    pub period: f64,
    pub n_grid: Vec<usize>,
    pub runs_per_n: usize,
    pub instances: Vec<Instance>,
    pub noise: NoiseSpec,
    pub estimator: SrivcConfig,
    pub base_seed: u64,
    pub warmup_discard: usize,
    /// Reuse one input realization for every run at a given N.
    pub fixed_input: bool,
    pub input: InputKind,
    pub amplitude: f64,
}

pub const DEFAULT_BASE_SEED: u64 = 2021;

/// `points` sample sizes logarithmically spaced from `min` to `max`,
/// rounded and deduplicated.
pub fn log_grid(min: usize, max: usize, points: usize) -> Vec<usize> {
    if points <= 1 || min == max {
        return vec![max];
    }
    let (lo, hi) = ((min as f64).ln(), (max as f64).ln());
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            (lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .exp()
                .round() as usize
        })
        .collect();
    grid.dedup();
    grid
}

impl SweepConfig {
    /// Desk-scale study of the second-order system `1/(0.04p^2 + 0.2p + 1)`:
    /// T = 0.1 s, N from 50 to 20000 (20 points), 50 runs per N, white noise
    /// of variance 0.1, five instances.
    pub fn desk() -> Self {
        let system: CtTransferFunction = "num:1;den:0.04,0.2,1".parse().expect("valid literal");
        Self {
            system,
            period: 0.1,
            n_grid: log_grid(50, 20_000, 20),
            runs_per_n: 50,
            instances: reference_instances(),
            noise: NoiseSpec::white(0.1),
            estimator: SrivcConfig::new(2, 0),
            base_seed: DEFAULT_BASE_SEED,
            warmup_discard: 0,
            fixed_input: false,
            input: InputKind::RandomBinary,
            amplitude: 1.0,
        }
    }

    /// Full-scale study: N from 50 to 200000 (100 points), 300 runs per N.
    pub fn full() -> Self {
        Self {
            n_grid: log_grid(50, 200_000, 100),
            runs_per_n: 300,
            ..Self::desk()
        }
    }

    pub fn truth(&self) -> ParameterVector {
        theta_from_tf(&self.system)
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator.validate()?;
        if self.system.n() != self.estimator.n || self.system.m() > self.estimator.m {
            return Err(Error::Config(format!(
                "system orders ({}, {}) incompatible with model orders ({}, {})",
                self.system.n(),
                self.system.m(),
                self.estimator.n,
                self.estimator.m
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::Config(format!("sampling period {}", self.period)));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "N grid must be nonempty and increasing".into(),
            ));
        }
        if self.n_grid[0] < self.estimator.dim() {
            return Err(Error::Config(format!(
                "smallest N ({}) is below the parameter count",
                self.n_grid[0]
            )));
        }
        if self.runs_per_n == 0 {
            return Err(Error::Config("runs_per_n must be at least 1".into()));
        }
        if self.instances.is_empty() {
            return Err(Error::Config("no instances".into()));
        }
        let mut labels: Vec<&str> = self.instances.iter().map(|i| i.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("instance labels must be unique".into()));
        }
        self.noise.validate()
    }

    /// Flat `key = value` text; `instance` repeats once per instance.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("system", self.system.to_string());
        kv("T", format!("{}", self.period));
        kv(
            "n_grid",
            self.n_grid
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("runs_per_n", self.runs_per_n.to_string());
        kv("noise_variance", format!("{}", self.noise.variance));
        if let Some(c) = &self.noise.coloring {
            kv("noise_color_num", join_f64(&c.num));
            kv("noise_color_den", join_f64(&c.den));
        }
        kv("base_seed", self.base_seed.to_string());
        kv("warmup_discard", self.warmup_discard.to_string());
        kv("fixed_input", self.fixed_input.to_string());
        kv(
            "input",
            match self.input {
                InputKind::RandomBinary => "binary".into(),
                InputKind::Prbs => "prbs".into(),
            },
        );
        kv("amplitude", format!("{}", self.amplitude));
        kv("n", self.estimator.n.to_string());
        kv("m", self.estimator.m.to_string());
        kv("max_iterations", self.estimator.max_iterations.to_string());
        kv("epsilon", format!("{:e}", self.estimator.epsilon));
        kv(
            "condition_limit",
            format!("{:e}", self.estimator.condition_limit),
        );
        if let Init::Lssvf { lambda: Some(l) } = self.estimator.init {
            kv("init_lambda", format!("{l}"));
        }
        for inst in &self.instances {
            kv("instance", inst.to_config_value());
        }
        s
    }

    /// Parses the text written by [`SweepConfig::to_config_text`]. Missing
    /// keys take the desk-scale defaults; `n_grid` may instead be given as
    /// `n_min`, `n_max`, `n_points`. Any `instance` line replaces the
    /// default instance list.
    pub fn from_config_text<R: BufRead>(r: R) -> Result<Self> {
        let mut cfg = Self::desk();
        let mut instances = Vec::new();
        let (mut n_min, mut n_max, mut n_points) = (None, None, None);
        let mut color_num = None;
        let mut color_den = None;
        let int = |k: &str, v: &str| -> Result<usize> {
            v.parse()
                .map_err(|e| Error::Parse(format!("{k} = {v:?}: {e}")))
        };
        for (k, v) in parse_key_values(r)? {
            match k.as_str() {
                "system" => cfg.system = v.parse()?,
                "T" => cfg.period = parse_f64(&v)?,
                "n_grid" => {
                    cfg.n_grid = v
                        .split(',')
                        .map(|x| int(&k, x.trim()))
                        .collect::<Result<_>>()?
                }
                "n_min" => n_min = Some(int(&k, &v)?),
                "n_max" => n_max = Some(int(&k, &v)?),
                "n_points" => n_points = Some(int(&k, &v)?),
                "runs_per_n" => cfg.runs_per_n = int(&k, &v)?,
                "noise_variance" => cfg.noise.variance = parse_f64(&v)?,
                "noise_color_num" => color_num = Some(parse_f64_list(&v)?),
                "noise_color_den" => color_den = Some(parse_f64_list(&v)?),
                "base_seed" => {
                    cfg.base_seed = v
                        .parse()
                        .map_err(|e| Error::Parse(format!("base_seed = {v:?}: {e}")))?
                }
                "warmup_discard" => cfg.warmup_discard = int(&k, &v)?,
                "fixed_input" => {
                    cfg.fixed_input = v
                        .parse()
                        .map_err(|e| Error::Parse(format!("fixed_input = {v:?}: {e}")))?
                }
                "input" => {
                    cfg.input = match v.as_str() {
                        "binary" => InputKind::RandomBinary,
                        "prbs" => InputKind::Prbs,
                        other => return Err(Error::Parse(format!("input = {other:?}"))),
                    }
                }
                "amplitude" => cfg.amplitude = parse_f64(&v)?,
                "n" => cfg.estimator.n = int(&k, &v)?,
                "m" => cfg.estimator.m = int(&k, &v)?,
                "max_iterations" => cfg.estimator.max_iterations = int(&k, &v)?,
                "epsilon" => cfg.estimator.epsilon = parse_f64(&v)?,
                "condition_limit" => cfg.estimator.condition_limit = parse_f64(&v)?,
                "init_lambda" => {
                    cfg.estimator.init = Init::Lssvf {
                        lambda: Some(parse_f64(&v)?),
                    }
                }
                "instance" => instances.push(Instance::from_config_value(&v)?),
                other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
            }
        }
        match (n_min, n_max, n_points) {
            (None, None, None) => {}
            (Some(a), Some(b), Some(p)) => cfg.n_grid = log_grid(a, b, p),
            _ => {
                return Err(Error::Parse(
                    "n_min, n_max and n_points must be given together".into(),
                ))
            }
        }
        match (color_num, color_den) {
            (None, None) => {}
            (num, den) => {
                cfg.noise.coloring = Some(crate::signals::Coloring {
                    num: num.unwrap_or_else(|| vec![1.0]),
                    den: den.unwrap_or_else(|| vec![1.0]),
                })
            }
        }
        if !instances.is_empty() {
            cfg.instances = instances;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_config_text(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn join_f64(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

/// 64-bit FNV-1a; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one Monte Carlo cell: `base_seed XOR hash(label, N, run)`.
pub fn cell_seed(base_seed: u64, label: &str, n: usize, run: usize) -> u64 {
    let key = format!("{label}\u{1f}{n}\u{1f}{run}");
    base_seed ^ fnv1a(key.as_bytes())
}

/// Outcome of one estimation in the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub n: usize,
    pub run: usize,
    /// `None` when the estimator raised an error.
    pub theta: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub stabilized_count: usize,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.converged && self.theta.is_some()
    }
}

/// Raw results table, one row per run.
#[derive(Debug, Clone, PartialEq)]
pub struct RawResults {
    pub n: usize,
    pub m: usize,
    pub rows: Vec<RunRecord>,
}

impl RawResults {
    pub fn param_names(&self) -> Vec<String> {
        param_names(self.n, self.m)
    }

    /// `instance,N,run,a1..an,b0..bm,iterations,converged,stabilized_count`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = ["instance", "N", "run"].map(String::from).to_vec();
        header.extend(self.param_names());
        header.extend(["iterations", "converged", "stabilized_count"].map(String::from));
        wr.write_record(&header)?;
        let d = self.n + self.m + 1;
        for r in &self.rows {
            let mut row = vec![r.instance.clone(), r.n.to_string(), r.run.to_string()];
            match &r.theta {
                Some(t) => row.extend(t.iter().map(|v| format!("{v}"))),
                None => row.extend(std::iter::repeat_n(String::new(), d)),
            }
            row.push(r.iterations.to_string());
            row.push(r.converged.to_string());
            row.push(r.stabilized_count.to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        let bad = || Error::Parse(format!("malformed results header {header:?}"));
        if header.len() < 7 || header[..3] != ["instance", "N", "run"] {
            return Err(bad());
        }
        let tail = &header[header.len() - 3..];
        if tail != ["iterations", "converged", "stabilized_count"] {
            return Err(bad());
        }
        let params = &header[3..header.len() - 3];
        let n = params.iter().filter(|p| p.starts_with('a')).count();
        let m = params.len().checked_sub(n + 1).ok_or_else(bad)?;
        if params != param_names(n, m).as_slice() {
            return Err(bad());
        }
        let int = |s: &str| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}")))
        };
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let fields: Vec<&str> = rec.iter().collect();
            let theta_fields = &fields[3..3 + params.len()];
            let theta = if theta_fields.iter().all(|f| f.is_empty()) {
                None
            } else {
                Some(
                    theta_fields
                        .iter()
                        .map(|f| parse_f64(f))
                        .collect::<Result<Vec<_>>>()?,
                )
            };
            let k = 3 + params.len();
            rows.push(RunRecord {
                instance: fields[0].to_string(),
                n: int(fields[1])?,
                run: int(fields[2])?,
                theta,
                iterations: int(fields[k])?,
                converged: fields[k + 1]
                    .parse()
                    .map_err(|e| Error::Parse(format!("converged {:?}: {e}", fields[k + 1])))?,
                stabilized_count: int(fields[k + 2])?,
            });
        }
        if rows.is_empty() {
            return Err(Error::Parse("results table has no rows".into()));
        }
        Ok(Self { n, m, rows })
    }
}

/// Moments of one parameter over the successful runs of one (instance, N)
/// cell. `mean` is absent when every run failed; `variance` also needs at
/// least two runs.
#[derive(Debug, Clone, PartialEq)]
pub struct McCell {
    pub instance: String,
    pub n: usize,
    pub param: usize,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub runs: usize,
    pub failures: usize,
}

impl McCell {
    /// Standard error of the mean.
    pub fn standard_error(&self) -> Option<f64> {
        self.variance.map(|v| (v / self.runs as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub param_names: Vec<String>,
    pub instances: Vec<String>,
    pub n_grid: Vec<usize>,
    pub cells: Vec<McCell>,
}

impl McSummary {
    pub fn cell(&self, instance: &str, n: usize, param: usize) -> Option<&McCell> {
        self.cells
            .iter()
            .find(|c| c.instance == instance && c.n == n && c.param == param)
    }

    /// Cells of one instance and parameter, ordered by N.
    pub fn series(&self, instance: &str, param: usize) -> Vec<&McCell> {
        let mut v: Vec<&McCell> = self
            .cells
            .iter()
            .filter(|c| c.instance == instance && c.param == param)
            .collect();
        v.sort_by_key(|c| c.n);
        v
    }

    /// `instance,N,param,mean,variance,runs,failures`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "instance", "N", "param", "mean", "variance", "runs", "failures",
        ])?;
        for c in &self.cells {
            wr.write_record([
                c.instance.clone(),
                c.n.to_string(),
                self.param_names[c.param].clone(),
                opt(c.mean),
                opt(c.variance),
                c.runs.to_string(),
                c.failures.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Per-cell sample mean and unbiased sample variance over successful runs.
pub fn summarize(raw: &RawResults) -> Result<McSummary> {
    if raw.rows.is_empty() {
        return Err(Error::Config("no results to summarize".into()));
    }
    let d = raw.n + raw.m + 1;
    let mut instances: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in &raw.rows {
        let idx = match instances.iter().position(|i| *i == r.instance) {
            Some(i) => i,
            None => {
                instances.push(r.instance.clone());
                instances.len() - 1
            }
        };
        groups.entry((idx, r.n)).or_default().push(r);
    }
    let mut n_grid: Vec<usize> = raw.rows.iter().map(|r| r.n).collect();
    n_grid.sort_unstable();
    n_grid.dedup();

    let mut cells = Vec::new();
    for ((idx, n), runs) in groups {
        let ok: Vec<&Vec<f64>> = runs
            .iter()
            .filter(|r| r.succeeded())
            .filter_map(|r| r.theta.as_ref())
            .collect();
        for p in 0..d {
            let values: Vec<f64> = ok.iter().map(|t| t[p]).collect();
            let (mean, variance) = moments(&values);
            cells.push(McCell {
                instance: instances[idx].clone(),
                n,
                param: p,
                mean,
                variance,
                runs: values.len(),
                failures: runs.len() - values.len(),
            });
        }
    }
    Ok(McSummary {
        param_names: raw.param_names(),
        instances,
        n_grid,
        cells,
    })
}

fn moments(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (Some(mean), None);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (Some(mean), Some(var))
}

fn run_one(config: &SweepConfig, inst: &Instance, n: usize, run: usize) -> RunRecord {
    let seed = cell_seed(config.base_seed, &inst.label, n, run);
    let noise_seed = splitmix64(seed ^ 0x6e_6f69_7365);
    let input_seed = if config.fixed_input {
        splitmix64(config.base_seed ^ fnv1a(format!("input\u{1f}{n}").as_bytes()))
    } else {
        splitmix64(seed ^ 0x69_6e70_7574)
    };
    let len = n + config.warmup_discard;
    let record = match inst.source {
        DataSource::Held(hold) => {
            let u = match config.input {
                InputKind::RandomBinary => {
                    gen_random_binary(len, config.amplitude, config.period, input_seed)
                }
                InputKind::Prbs => gen_prbs(len, config.amplitude, config.period, input_seed),
            };
            u.and_then(|u| synthesize_record(&config.system, &u, hold, &config.noise, noise_seed))
        }
        DataSource::AnalyticMultisine => synthesize_multisine_record(
            &config.system,
            len,
            config.period,
            &config.noise,
            noise_seed,
        ),
    }
    .map(|r| r.skip(config.warmup_discard));

    let estimator = config.estimator.clone().with_holds(inst.holds);
    let outcome = record.and_then(|r| srivc_estimate(&r, &estimator));
    match outcome {
        Ok(res) => RunRecord {
            instance: inst.label.clone(),
            n,
            run,
            theta: Some(res.theta().values().to_vec()),
            iterations: res.iterations,
            converged: res.converged,
            stabilized_count: res.stabilized_count(),
        },
        Err(e) => {
            log::debug!("{} N={n} run={run}: {e}", inst.label);
            RunRecord {
                instance: inst.label.clone(),
                n,
                run,
                theta: None,
                iterations: 0,
                converged: false,
                stabilized_count: 0,
            }
        }
    }
}

/// Runs every (instance, N, run) estimation and summarizes the results.
/// `jobs` bounds the worker threads (`None`: all cores). Per-run
/// estimator failures are recorded, not raised.
pub fn run_mc_sweep(config: &SweepConfig, jobs: Option<usize>) -> Result<(McSummary, RawResults)> {
    config.validate()?;
    let tasks: Vec<(&Instance, usize, usize)> = config
        .instances
        .iter()
        .flat_map(|inst| {
            config
                .n_grid
                .iter()
                .flat_map(move |&n| (0..config.runs_per_n).map(move |run| (inst, n, run)))
        })
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<RunRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(inst, n, run)| run_one(config, inst, n, run))
            .collect()
    });
    let raw = RawResults {
        n: config.estimator.n,
        m: config.estimator.m,
        rows,
    };
    Ok((summarize(&raw)?, raw))
}

/// Least-squares slope of `log10(variance)` against `log10(N)` over the
/// sample sizes within a factor `span` of the largest one.
pub fn variance_slope(summary: &McSummary, instance: &str, param: usize, span: f64) -> Option<f64> {
    let series = summary.series(instance, param);
    let top = series.last()?.n as f64;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|c| c.n as f64 >= top / span)
        .filter_map(|c| match c.variance {
            Some(v) if v > 0.0 => Some(((c.n as f64).log10(), v.log10())),
            _ => None,
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Writes, per parameter, `mean_<p>.csv` (`instance,N,mean,truth`) and
/// `variance_<p>.csv` (`instance,N,variance`), plus `fig_mean.svg` and
/// `fig_variance.svg` with all instances overlaid on a logarithmic N axis.
pub fn emit_plot_data(summary: &McSummary, truth: &[f64], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if summary.cells.is_empty() {
        return Err(Error::Config("empty summary".into()));
    }
    if truth.len() != summary.param_names.len() {
        return Err(Error::Config(format!(
            "truth has {} entries, summary has {} parameters",
            truth.len(),
            summary.param_names.len()
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (p, name) in summary.param_names.iter().enumerate() {
        let path = out_dir.join(format!("mean_{name}.csv"));
        let mut wr = csv::Writer::from_path(&path)?;
        wr.write_record(["instance", "N", "mean", "truth"])?;
        for inst in &summary.instances {
            for &n in &summary.n_grid {
                let mean = summary.cell(inst, n, p).and_then(|c| c.mean);
                wr.write_record([
                    inst.clone(),
                    n.to_string(),
                    opt(mean),
                    format!("{}", truth[p]),
                ])?;
            }
        }
        wr.flush()?;
        written.push(path);

        let path = out_dir.join(format!("variance_{name}.csv"));
        let mut wr = csv::Writer::from_path(&path)?;
        wr.write_record(["instance", "N", "variance"])?;
        for inst in &summary.instances {
            for &n in &summary.n_grid {
                let var = summary.cell(inst, n, p).and_then(|c| c.variance);
                wr.write_record([inst.clone(), n.to_string(), opt(var)])?;
            }
        }
        wr.flush()?;
        written.push(path);
    }
    for fig in [Figure::Mean, Figure::Variance] {
        let path = out_dir.join(match fig {
            Figure::Mean => "fig_mean.svg",
            Figure::Variance => "fig_variance.svg",
        });
        std::fs::write(&path, render_svg(summary, truth, fig))?;
        written.push(path);
    }
    Ok(written)
}
