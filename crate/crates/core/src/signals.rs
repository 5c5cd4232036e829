//! Excitation signals, measurement noise and synthesis of sampled
//! input/output records from a known continuous-time system.

use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ctlti::{
    is_stable, poly_roots, tf_frequency_response, CtPolynomial, CtTransferFunction,
};
use crate::error::{Error, Result};
use crate::holdsim::{format_time, grid_from_times, parse_f64, simulate_tf, Hold, SampledSignal};

/// Tone frequencies (rad/s) of the four-sine test input.
pub const MULTISINE_FREQS: [f64; 4] = [0.5, 2.0, 5.0, 7.0];

/// How the true continuous-time input behaves between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Intersample {
    Held(Hold),
    /// Smooth input whose output was computed analytically; no hold
    /// reproduces it exactly.
    Analytic,
    #[default]
    Unknown,
}

impl fmt::Display for Intersample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Intersample::Held(h) => write!(f, "{h}"),
            Intersample::Analytic => f.write_str("analytic"),
            Intersample::Unknown => f.write_str("unknown"),
        }
    }
}

impl std::str::FromStr for Intersample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" | "none" => Ok(Intersample::Analytic),
            "unknown" => Ok(Intersample::Unknown),
            other => other.parse().map(Intersample::Held),
        }
    }
}

/// Provenance of a record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordMeta {
    pub system: Option<CtTransferFunction>,
    pub hold: Intersample,
    pub variance: f64,
    pub seed: u64,
}

/// Time-aligned input and measured output on one sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRecord {
    u: SampledSignal,
    y: SampledSignal,
    pub meta: RecordMeta,
}

impl SampledRecord {
    pub fn new(u: SampledSignal, y: SampledSignal, meta: RecordMeta) -> Result<Self> {
        if u.len() != y.len() {
            return Err(Error::Dimension(format!(
                "input has {} samples, output {}",
                u.len(),
                y.len()
            )));
        }
        if (u.period() - y.period()).abs() > 1e-12 * u.period() || u.t0() != y.t0() {
            return Err(Error::Dimension("input and output grids differ".into()));
        }
        Ok(Self { u, y, meta })
    }

    pub fn u(&self) -> &SampledSignal {
        &self.u
    }

    pub fn y(&self) -> &SampledSignal {
        &self.y
    }

    pub fn period(&self) -> f64 {
        self.u.period()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Drops the first `count` samples of both signals.
    pub fn skip(&self, count: usize) -> Self {
        Self {
            u: self.u.skip(count),
            y: self.y.skip(count),
            meta: self.meta.clone(),
        }
    }

    /// `t,u,y` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "u", "y"])?;
        for k in 0..self.len() {
            wr.write_record([
                format_time(self.u.time(k)),
                format!("{}", self.u.values()[k]),
                format!("{}", self.y.values()[k]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `t,u,y` CSV. The period comes from `period` when given,
    /// otherwise from the time column.
    pub fn read_csv<R: Read>(r: R, period: Option<f64>) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["t", "u", "y"] {
            return Err(Error::Parse(format!(
                "expected header t,u,y, got {header:?}"
            )));
        }
        let (mut t, mut u, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec?;
            t.push(parse_f64(&rec[0])?);
            u.push(parse_f64(&rec[1])?);
            y.push(parse_f64(&rec[2])?);
        }
        let (t0, inferred) = grid_from_times(&t)?;
        let period = period.unwrap_or(inferred);
        Self::new(
            SampledSignal::new(u, period, t0)?,
            SampledSignal::new(y, period, t0)?,
            RecordMeta::default(),
        )
    }

    /// `key = value` sidecar: system, hold, variance, seed, T, N.
    pub fn write_meta<W: Write>(&self, mut w: W) -> Result<()> {
        let system = self
            .meta
            .system
            .as_ref()
            .map_or_else(|| "unknown".to_string(), |s| s.to_string());
        writeln!(w, "system = {system}")?;
        writeln!(w, "hold = {}", self.meta.hold)?;
        writeln!(w, "variance = {}", self.meta.variance)?;
        writeln!(w, "seed = {}", self.meta.seed)?;
        writeln!(w, "T = {}", self.period())?;
        writeln!(w, "N = {}", self.len())?;
        Ok(())
    }

    /// Parses a sidecar written by [`SampledRecord::write_meta`]; returns the
    /// metadata and the recorded period.
    pub fn read_meta<R: BufRead>(r: R) -> Result<(RecordMeta, Option<f64>)> {
        let mut meta = RecordMeta::default();
        let mut period = None;
        for (key, value) in parse_key_values(r)? {
            match key.as_str() {
                "system" if value != "unknown" => meta.system = Some(value.parse()?),
                "system" => {}
                "hold" => meta.hold = value.parse()?,
                "variance" => meta.variance = parse_f64(&value)?,
                "seed" => {
                    meta.seed = value
                        .parse()
                        .map_err(|e| Error::Parse(format!("seed {value:?}: {e}")))?
                }
                "T" => period = Some(parse_f64(&value)?),
                "N" => {}
                other => return Err(Error::Parse(format!("unknown meta key {other:?}"))),
            }
        }
        Ok((meta, period))
    }

    /// Writes `<path>` (CSV) and `<path>.meta`.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)?;
        self.write_meta(std::fs::File::create(meta_path(path))?)?;
        Ok(())
    }

    /// Loads a CSV record and, when present, its `.meta` sidecar.
    pub fn load(path: &Path) -> Result<Self> {
        let mp = meta_path(path);
        let (meta, period) = if mp.exists() {
            Self::read_meta(std::io::BufReader::new(std::fs::File::open(&mp)?))?
        } else {
            (RecordMeta::default(), None)
        };
        let mut rec = Self::read_csv(std::fs::File::open(path)?, period)?;
        rec.meta = meta;
        Ok(rec)
    }
}

/// Sidecar path: `record.csv` -> `record.csv.meta`.
pub fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}

/// Reads `key = value` lines, skipping blanks and `#` comments. Keys may
/// repeat.
pub fn parse_key_values<R: BufRead>(r: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Additive discrete-time measurement noise `v = H(q) e`, `e ~ N(0, variance)`.
///
/// The optional coloring filter is `H(q) = C(q^-1)/D(q^-1)` with
/// `C = 1 + c_1 q^-1 + ...` and `D = 1 + d_1 q^-1 + ...`; both must have
/// their roots strictly inside the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
    pub coloring: Option<Coloring>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coloring {
    /// `[1, c_1, ...]`
    pub num: Vec<f64>,
    /// `[1, d_1, ...]`
    pub den: Vec<f64>,
}

impl NoiseSpec {
    pub fn white(variance: f64) -> Self {
        Self {
            variance,
            coloring: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= 0.0 && self.variance.is_finite()) {
            return Err(Error::Config(format!(
                "noise variance {} must be >= 0",
                self.variance
            )));
        }
        if let Some(c) = &self.coloring {
            for (name, poly) in [("numerator", &c.num), ("denominator", &c.den)] {
                if poly.first() != Some(&1.0) {
                    return Err(Error::Config(format!(
                        "coloring {name} must start with 1, got {poly:?}"
                    )));
                }
                let roots = poly_roots(&CtPolynomial::new(poly.clone())?)?;
                if roots.iter().any(|r| r.norm() >= 1.0) {
                    return Err(Error::Config(format!(
                        "coloring {name} {poly:?} has roots on or outside the unit circle"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// I.i.d. equiprobable `+-amplitude` samples (flat spectrum up to Nyquist).
pub fn gen_random_binary(
    len: usize,
    amplitude: f64,
    period: f64,
    seed: u64,
) -> Result<SampledSignal> {
    let mut r = rng(seed);
    let values = (0..len)
        .map(|_| {
            if r.random::<bool>() {
                amplitude
            } else {
                -amplitude
            }
        })
        .collect();
    SampledSignal::new(values, period, 0.0)
}

/// Maximum-length pseudo-random binary sequence from a 15-bit Fibonacci
/// LFSR (`x^15 + x^14 + 1`), one bit per sample. The seed selects the
/// starting state.
pub fn gen_prbs(len: usize, amplitude: f64, period: f64, seed: u64) -> Result<SampledSignal> {
    let mut state: u16 = ((seed % 0x7fff) as u16) + 1;
    let values = (0..len)
        .map(|_| {
            let bit = ((state >> 14) ^ (state >> 13)) & 1;
            state = ((state << 1) | bit) & 0x7fff;
            if bit == 1 {
                amplitude
            } else {
                -amplitude
            }
        })
        .collect();
    SampledSignal::new(values, period, 0.0)
}

/// `sum_i sin(omega_i t)` on the grid `t0 + k*period`.
pub fn gen_multisine_tones(
    freqs: &[f64],
    len: usize,
    period: f64,
    t0: f64,
) -> Result<SampledSignal> {
    let values = (0..len)
        .map(|k| {
            let t = t0 + k as f64 * period;
            freqs.iter().map(|w| (w * t).sin()).sum()
        })
        .collect();
    SampledSignal::new(values, period, t0)
}

/// `sin(0.5t) + sin(2t) + sin(5t) + sin(7t)` on the grid `t0 + k*period`.
pub fn gen_multisine(len: usize, period: f64, t0: f64) -> Result<SampledSignal> {
    gen_multisine_tones(&MULTISINE_FREQS, len, period, t0)
}

/// Stationary response of `tf` to `sum_i sin(omega_i t)`:
/// `sum_i |G(j omega_i)| sin(omega_i t + arg G(j omega_i))`.
pub fn analytic_multisine_output(
    tf: &CtTransferFunction,
    freqs: &[f64],
    len: usize,
    period: f64,
    t0: f64,
) -> Result<SampledSignal> {
    if !is_stable(tf) {
        return Err(Error::UnstableModel);
    }
    let gains: Vec<Complex64> = freqs
        .iter()
        .map(|&w| tf_frequency_response(tf, w))
        .collect::<Result<_>>()?;
    let values = (0..len)
        .map(|k| {
            let t = t0 + k as f64 * period;
            freqs
                .iter()
                .zip(&gains)
                .map(|(w, g)| g.norm() * (w * t + g.arg()).sin())
                .sum()
        })
        .collect();
    SampledSignal::new(values, period, t0)
}

/// Zero-mean Gaussian noise of the given variance, optionally colored.
pub fn gen_gaussian_noise(
    len: usize,
    spec: &NoiseSpec,
    period: f64,
    seed: u64,
) -> Result<SampledSignal> {
    spec.validate()?;
    if spec.variance == 0.0 {
        return SampledSignal::new(vec![0.0; len], period, 0.0);
    }
    let normal = Normal::new(0.0, spec.variance.sqrt())
        .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
    let mut r = rng(seed);
    let e: Vec<f64> = (0..len).map(|_| normal.sample(&mut r)).collect();
    let values = match &spec.coloring {
        None => e,
        Some(c) => {
            let mut v = vec![0.0; len];
            for k in 0..len {
                let mut acc = 0.0;
                for (i, ci) in c.num.iter().enumerate() {
                    if k >= i {
                        acc += ci * e[k - i];
                    }
                }
                for (i, di) in c.den.iter().enumerate().skip(1) {
                    if k >= i {
                        acc -= di * v[k - i];
                    }
                }
                v[k] = acc;
            }
            v
        }
    };
    SampledSignal::new(values, period, 0.0)
}

fn add_noise(x: &SampledSignal, noise: &NoiseSpec, seed: u64) -> Result<SampledSignal> {
    let v = gen_gaussian_noise(x.len(), noise, x.period(), seed)?;
    let y = x
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a + b)
        .collect();
    SampledSignal::new(y, x.period(), x.t0())
}

/// Samples of `tf` driven by `u` held with `true_hold`, plus noise drawn
/// with `seed`.
pub fn synthesize_record(
    tf: &CtTransferFunction,
    u: &SampledSignal,
    true_hold: Hold,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<SampledRecord> {
    if !is_stable(tf) {
        return Err(Error::UnstableModel);
    }
    let x = simulate_tf(tf, u, true_hold)?;
    let y = add_noise(&x, noise, seed)?;
    SampledRecord::new(
        u.clone(),
        y,
        RecordMeta {
            system: Some(tf.clone()),
            hold: Intersample::Held(true_hold),
            variance: noise.variance,
            seed,
        },
    )
}

/// Four-sine input with its analytically computed stationary output plus
/// noise; no hold simulation is involved.
pub fn synthesize_multisine_record(
    tf: &CtTransferFunction,
    len: usize,
    period: f64,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<SampledRecord> {
    let u = gen_multisine(len, period, 0.0)?;
    let x = analytic_multisine_output(tf, &MULTISINE_FREQS, len, period, 0.0)?;
    let y = add_noise(&x, noise, seed)?;
    SampledRecord::new(
        u,
        y,
        RecordMeta {
            system: Some(tf.clone()),
            hold: Intersample::Analytic,
            variance: noise.variance,
            seed,
        },
    )
}
