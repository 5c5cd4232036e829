//! Sampled-data simulation of continuous-time filters under an explicit
//! intersample assumption.
//!
//! A bank of filters `N_i(p)/A(p)` sharing one denominator is realized with a
//! single controllable-canonical state, discretized exactly for either a
//! zero-order hold (piecewise-constant input) or a first-order hold
//! (piecewise-linear input between consecutive samples), and run over a
//! sampled signal. Because all rows read the same state trajectory, linear
//! combinations of rows cancel exactly: `sum_k A_k * (p^k/A) s == s`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::ctlti::{CtPolynomial, CtTransferFunction};
use crate::error::{Error, Result};

/// Intersample behaviour assumed for a sampled signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hold {
    /// Piecewise constant between samples.
    Zoh,
    /// Piecewise linear between consecutive samples (triangle hold).
    Foh,
}

impl fmt::Display for Hold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hold::Zoh => "zoh",
            Hold::Foh => "foh",
        })
    }
}

impl FromStr for Hold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zoh" => Ok(Hold::Zoh),
            "foh" => Ok(Hold::Foh),
            other => Err(Error::Parse(format!(
                "unknown hold {other:?} (expected zoh|foh)"
            ))),
        }
    }
}

/// Continuous-time realization `x' = A x + B u`, `y = C x + D u` with `q`
/// stacked outputs sharing one state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceRealization {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl StateSpaceRealization {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.ncols() != n || c.nrows() != d.len() {
            return Err(Error::Dimension(format!(
                "A {}x{}, B {}, C {}x{}, D {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.nrows(),
                c.ncols(),
                d.len()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Realization of a single transfer function.
    pub fn from_tf(tf: &CtTransferFunction) -> Result<Self> {
        realize_filter_bank(tf.den(), std::slice::from_ref(tf.num()))
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Series connection: the (single-output) `self` feeds every row of
    /// `next`.
    pub fn cascade(&self, next: &StateSpaceRealization) -> Result<Self> {
        if self.outputs() != 1 {
            return Err(Error::Dimension(
                "cascade needs a single-output first stage".into(),
            ));
        }
        let (n1, n2) = (self.states(), next.states());
        let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        let c1 = self.c.row(0);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * c1));
        let mut b = DVector::zeros(n1 + n2);
        b.rows_mut(0, n1).copy_from(&self.b);
        b.rows_mut(n1, n2).copy_from(&(&next.b * self.d[0]));
        let mut c = DMatrix::zeros(next.outputs(), n1 + n2);
        c.view_mut((0, 0), (next.outputs(), n1))
            .copy_from(&(&next.d * c1));
        c.view_mut((0, n1), (next.outputs(), n2)).copy_from(&next.c);
        let d = &next.d * self.d[0];
        Self::new(a, b, c, d)
    }
}

/// Shared-state controllable canonical realization of `num_i(p)/den(p)`.
///
/// State `i` is `p^i w` with `den(p) w = u`. A numerator of full degree
/// produces a feedthrough term `D = lead(num)/lead(den)`.
pub fn realize_filter_bank(
    den: &CtPolynomial,
    numerators: &[CtPolynomial],
) -> Result<StateSpaceRealization> {
    let n = den.degree();
    let lead = den.leading();
    if lead == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    for num in numerators {
        if num.degree() > n {
            return Err(Error::Improper { n, m: num.degree() });
        }
    }

    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    if n > 0 {
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for k in 0..n {
            a[(n - 1, k)] = -den.coeff_of_power(k) / lead;
        }
        b[n - 1] = 1.0 / lead;
    }

    let q = numerators.len();
    let mut c = DMatrix::zeros(q, n);
    let mut d = DVector::zeros(q);
    for (row, num) in numerators.iter().enumerate() {
        let top = num.coeff_of_power(n);
        for k in 0..n {
            c[(row, k)] = num.coeff_of_power(k) - top * den.coeff_of_power(k) / lead;
        }
        d[row] = top / lead;
    }
    StateSpaceRealization::new(a, b, c, d)
}

/// Matrix exponential by scaling and squaring with a Pade approximant.
pub fn matrix_exponential(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "matrix exponential of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix exponential argument".into()));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let e = m.exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix exponential overflowed".into()));
    }
    Ok(e)
}

/// Exact discrete-time equivalent of a [`StateSpaceRealization`] for one
/// sampling period and hold.
///
/// The state update is `x[k+1] = Ad x[k] + Bd u[k] + Bd1 (u[k+1] - u[k])`,
/// where the last term is present only for the first-order hold. Outputs
/// are `y[k] = Cd x[k] + Dd u[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFilterBank {
    pub ad: DMatrix<f64>,
    pub bd: DVector<f64>,
    pub bd1: Option<DVector<f64>>,
    pub cd: DMatrix<f64>,
    pub dd: DVector<f64>,
    pub t: f64,
    pub hold: Hold,
}

impl DiscreteFilterBank {
    pub fn states(&self) -> usize {
        self.ad.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.cd.nrows()
    }
}

/// Discretizes `ss` for sampling period `t` by exponentiating one augmented
/// block matrix (state plus hold-generator states).
pub fn discretize(ss: &StateSpaceRealization, t: f64, hold: Hold) -> Result<DiscreteFilterBank> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!(
            "sampling period must be positive, got {t}"
        )));
    }
    let n = ss.states();
    let extra = match hold {
        Hold::Zoh => 1,
        Hold::Foh => 2,
    };
    let mut aug = DMatrix::zeros(n + extra, n + extra);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&ss.a * t));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&ss.b * t));
    if hold == Hold::Foh {
        aug[(n, n + 1)] = t;
    }
    let e = matrix_exponential(&aug)?;
    let ad = e.view((0, 0), (n, n)).into_owned();
    let bd = e.column(n).rows(0, n).into_owned();
    let bd1 = match hold {
        Hold::Zoh => None,
        Hold::Foh => Some(e.column(n + 1).rows(0, n).into_owned() / t),
    };
    Ok(DiscreteFilterBank {
        ad,
        bd,
        bd1,
        cd: ss.c.clone(),
        dd: ss.d.clone(),
        t,
        hold,
    })
}

/// Uniformly sampled real signal starting at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    values: Vec<f64>,
    t: f64,
    t0: f64,
}

impl SampledSignal {
    pub fn new(values: Vec<f64>, t: f64, t0: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) || !t0.is_finite() {
            return Err(Error::Config(format!(
                "invalid sampling grid T={t}, t0={t0}"
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample {k} = {}", values[k])));
        }
        Ok(Self { values, t, t0 })
    }

    /// Same grid as `self`, new values. Values are not validated.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            t: self.t,
            t0: self.t0,
        }
    }

    pub fn zeros(len: usize, t: f64) -> Result<Self> {
        Self::new(vec![0.0; len], t, 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn period(&self) -> f64 {
        self.t
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.t
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Drops the first `count` samples.
    pub fn skip(&self, count: usize) -> Self {
        let count = count.min(self.len());
        Self {
            values: self.values[count..].to_vec(),
            t: self.t,
            t0: self.time(count),
        }
    }

    /// Writes `t,value` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "value"])?;
        for (k, v) in self.values.iter().enumerate() {
            wr.write_record([format_time(self.time(k)), format!("{v}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `t,value` CSV; the period is taken from the first two rows.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.len() != 2 || &header[0] != "t" || &header[1] != "value" {
            return Err(Error::Parse(format!(
                "expected header t,value, got {header:?}"
            )));
        }
        let mut t = Vec::new();
        let mut v = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            t.push(parse_f64(&rec[0])?);
            v.push(parse_f64(&rec[1])?);
        }
        let (t0, period) = grid_from_times(&t)?;
        Self::new(v, period, t0)
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

/// Fixed-point seconds with nanosecond resolution.
pub(crate) fn format_time(t: f64) -> String {
    format!("{t:.9}")
}

/// Start time and period of a uniform time column.
pub(crate) fn grid_from_times(t: &[f64]) -> Result<(f64, f64)> {
    if t.len() < 2 {
        return Err(Error::Parse(
            "need at least two samples to infer the period".into(),
        ));
    }
    let period = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(period > 0.0) {
        return Err(Error::Parse("time column is not increasing".into()));
    }
    // fixed-point output is rounded to 1e-9 s
    let period = (period * 1e9).round() / 1e9;
    for (k, &tk) in t.iter().enumerate() {
        if (tk - t[0] - k as f64 * period).abs() > 1e-6 * period.max(1.0) {
            return Err(Error::Parse(format!("non-uniform sampling at row {k}")));
        }
    }
    Ok((t[0], period))
}

/// Runs every row of `bank` over `u`, starting from `x0` (zero when `None`).
pub fn run_filter_bank(
    bank: &DiscreteFilterBank,
    u: &SampledSignal,
    x0: Option<&[f64]>,
) -> Result<Vec<SampledSignal>> {
    if (u.period() - bank.t).abs() > 1e-12 * bank.t {
        return Err(Error::Dimension(format!(
            "signal period {} differs from bank period {}",
            u.period(),
            bank.t
        )));
    }
    let n = bank.states();
    if let Some(x0) = x0 {
        if x0.len() != n {
            return Err(Error::Dimension(format!(
                "initial state has {} entries, bank has {n} states",
                x0.len()
            )));
        }
    }
    let rows = simulate(bank, u.values(), x0);
    Ok(rows.into_iter().map(|r| u.with_values(r)).collect())
}

/// Inner loop over flat row-major copies of the bank matrices.
fn simulate(bank: &DiscreteFilterBank, u: &[f64], x0: Option<&[f64]>) -> Vec<Vec<f64>> {
    let n = bank.states();
    let q = bank.outputs();
    let len = u.len();
    let ad: Vec<f64> = (0..n * n).map(|i| bank.ad[(i / n, i % n)]).collect();
    let cd: Vec<f64> = (0..q * n).map(|i| bank.cd[(i / n, i % n)]).collect();
    let bd = bank.bd.as_slice();
    let bd1 = bank.bd1.as_ref().map(|v| v.as_slice());
    let dd = bank.dd.as_slice();

    let mut out = vec![vec![0.0; len]; q];
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut next = vec![0.0; n];
    for k in 0..len {
        let uk = u[k];
        for (r, row) in out.iter_mut().enumerate() {
            let c = &cd[r * n..(r + 1) * n];
            row[k] = c.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + dd[r] * uk;
        }
        if k + 1 == len {
            break;
        }
        let du = u[k + 1] - uk;
        for i in 0..n {
            let a = &ad[i * n..(i + 1) * n];
            let mut acc = a.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + bd[i] * uk;
            if let Some(bd1) = bd1 {
                acc += bd1[i] * du;
            }
            next[i] = acc;
        }
        std::mem::swap(&mut x, &mut next);
    }
    out
}

/// Filters `sig` through `p^i/den(p)` for `i = 0..=max_order` with one shared
/// state. Row `i` of the result is the `i`-th derivative filter.
pub fn filter_derivatives(
    den: &CtPolynomial,
    sig: &SampledSignal,
    max_order: usize,
    hold: Hold,
) -> Result<Vec<SampledSignal>> {
    if max_order > den.degree() {
        return Err(Error::Improper {
            n: den.degree(),
            m: max_order,
        });
    }
    let nums: Vec<CtPolynomial> = (0..=max_order).map(CtPolynomial::monomial).collect();
    let ss = realize_filter_bank(den, &nums)?;
    let bank = discretize(&ss, sig.period(), hold)?;
    run_filter_bank(&bank, sig, None)
}

/// Sampled response of `tf` to `u` under `hold`, from rest.
pub fn simulate_tf(
    tf: &CtTransferFunction,
    u: &SampledSignal,
    hold: Hold,
) -> Result<SampledSignal> {
    let ss = StateSpaceRealization::from_tf(tf)?;
    let bank = discretize(&ss, u.period(), hold)?;
    Ok(run_filter_bank(&bank, u, None)?.remove(0))
}
