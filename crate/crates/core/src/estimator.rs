//! The SRIVC iteration.
//!
//! At iteration `j` the current model `B_j/A_j` supplies the prefilter
//! `1/A_j(p)`. The regressor holds the prefiltered output derivatives
//! `-p^i y/A_j` (i = n..1) and input derivatives `p^i u/A_j` (i = m..0);
//! the instrument replaces the measured output by the noise-free model
//! output, giving `-B_j p^i u / A_j^2`. The next estimate solves
//!
//! ```text
//! [1/N sum psi phi^T] theta = 1/N sum psi y_f,   y_f = y/A_j
//! ```
//!
//! Each of the three signal roles (regressor input, instrument input,
//! output) is discretized under its own [`Hold`].

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::ctlti::{
    is_stable, reflect_unstable_poles, tf_from_theta, theta_from_tf, CtPolynomial,
    CtTransferFunction, ParameterVector, COPRIME_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::holdsim::{
    discretize, filter_derivatives, realize_filter_bank, run_filter_bank, Hold, SampledSignal,
};
use crate::signals::SampledRecord;

/// Intersample assumption per signal role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HoldPolicy {
    pub regressor_input: Hold,
    pub instrument_input: Hold,
    pub output: Hold,
}

impl HoldPolicy {
    pub fn uniform(hold: Hold) -> Self {
        Self {
            regressor_input: hold,
            instrument_input: hold,
            output: hold,
        }
    }
}

impl Default for HoldPolicy {
    fn default() -> Self {
        Self::uniform(Hold::Zoh)
    }
}

/// Starting point of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// State-variable-filter least squares with cutoff `lambda` (rad/s);
    /// `None` uses `1/T`.
    Lssvf {
        lambda: Option<f64>,
    },
    Explicit(ParameterVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrivcConfig {
    pub n: usize,
    pub m: usize,
    pub max_iterations: usize,
    pub epsilon: f64,
    pub holds: HoldPolicy,
    pub init: Init,
    pub condition_limit: f64,
}

pub const DEFAULT_MAX_ITERATIONS: usize = 200;
pub const DEFAULT_EPSILON: f64 = 1e-7;
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

impl SrivcConfig {
    /// Orders `(n, m)` with 200 iterations, `epsilon = 1e-7`, ZOH
    /// everywhere and LSSVF initialization at `lambda = 1/T`.
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            epsilon: DEFAULT_EPSILON,
            holds: HoldPolicy::default(),
            init: Init::Lssvf { lambda: None },
            condition_limit: DEFAULT_CONDITION_LIMIT,
        }
    }

    pub fn with_holds(mut self, holds: HoldPolicy) -> Self {
        self.holds = holds;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > self.n {
            return Err(Error::Improper {
                n: self.n,
                m: self.m,
            });
        }
        if self.n == 0 {
            return Err(Error::Config("denominator order must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.condition_limit > 1.0) {
            return Err(Error::Config("condition_limit must exceed 1".into()));
        }
        match &self.init {
            Init::Lssvf { lambda: Some(l) } if !(*l > 0.0 && l.is_finite()) => Err(Error::Config(
                format!("LSSVF cutoff must be positive, got {l}"),
            )),
            Init::Explicit(theta) if theta.n() != self.n || theta.m() != self.m => {
                Err(Error::Config(format!(
                    "initial parameters have orders ({}, {}), config has ({}, {})",
                    theta.n(),
                    theta.m(),
                    self.n,
                    self.m
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m + 1
    }
}

/// Outcome of one normal-equation solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub theta: ParameterVector,
    /// 1-norm condition estimate of the normal matrix.
    pub condition: f64,
    /// `||R theta - r||` for the scaled normal system `R theta = r`.
    pub residual: f64,
    /// `||R|| ||theta|| + ||r||`, the scale the residual is judged against.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// `theta_0, theta_1, ...`; length `iterations + 1`.
    pub theta_history: Vec<ParameterVector>,
    pub converged: bool,
    pub iterations: usize,
    pub final_relative_step: f64,
    /// Condition estimate of each solved normal matrix; length `iterations`.
    pub condition_estimates: Vec<f64>,
    /// Whether each history entry had its poles reflected; aligned with
    /// `theta_history` (entry 0 refers to the initial estimate).
    pub stabilized_flags: Vec<bool>,
    /// Relative step after each iteration; length `iterations`.
    pub relative_steps: Vec<f64>,
}

impl EstimationResult {
    pub fn theta(&self) -> &ParameterVector {
        self.theta_history
            .last()
            .expect("history holds at least theta_0")
    }

    pub fn stabilized_count(&self) -> usize {
        self.stabilized_flags.iter().filter(|&&f| f).count()
    }

    /// One row per history entry:
    /// `iteration,a1..an,b0..bm,relative_step,condition,stabilized`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let theta0 = &self.theta_history[0];
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["iteration".to_string()];
        header.extend(param_names(theta0.n(), theta0.m()));
        header.extend(["relative_step", "condition", "stabilized"].map(String::from));
        wr.write_record(&header)?;
        for (j, theta) in self.theta_history.iter().enumerate() {
            let mut row = vec![j.to_string()];
            row.extend(theta.values().iter().map(|v| format!("{v}")));
            if j == 0 {
                row.extend([String::new(), String::new()]);
            } else {
                row.push(format!("{}", self.relative_steps[j - 1]));
                row.push(format!("{}", self.condition_estimates[j - 1]));
            }
            row.push(self.stabilized_flags[j].to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Column labels `a1..an, b0..bm`.
pub fn param_names(n: usize, m: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("a{i}"))
        .chain((0..=m).map(|i| format!("b{i}")))
        .collect()
}

fn check_prefilter(model: &CtTransferFunction) -> Result<()> {
    if !is_stable(model) {
        return Err(Error::UnstableModel);
    }
    Ok(())
}

/// Prefiltered regressor columns and `y_f` for an arbitrary prefilter
/// denominator of degree >= n.
fn regressor_columns(
    record: &SampledRecord,
    den: &CtPolynomial,
    n: usize,
    m: usize,
    holds: HoldPolicy,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let out_rows = filter_derivatives(den, record.y(), n, holds.output)?;
    let in_rows = filter_derivatives(den, record.u(), m, holds.regressor_input)?;
    let mut cols = Vec::with_capacity(n + m + 1);
    for i in (1..=n).rev() {
        cols.push(out_rows[i].values().iter().map(|v| -v).collect());
    }
    for i in (0..=m).rev() {
        cols.push(in_rows[i].values().to_vec());
    }
    let yf = out_rows
        .into_iter()
        .next()
        .expect("row 0 exists")
        .into_values();
    Ok((cols, yf))
}

fn instrument_columns(
    record: &SampledRecord,
    model: &CtTransferFunction,
    n: usize,
    m: usize,
    hold: Hold,
) -> Result<Vec<Vec<f64>>> {
    let den = model.den();
    let den2 = den.mul(den);
    let nums: Vec<CtPolynomial> = (1..=n)
        .rev()
        .map(|i| model.num().mul(&CtPolynomial::monomial(i)))
        .collect();
    let ss = realize_filter_bank(&den2, &nums)?;
    let bank = discretize(&ss, record.period(), hold)?;
    let xhat = run_filter_bank(&bank, record.u(), None)?;
    let in_rows = filter_derivatives(den, record.u(), m, hold)?;
    let mut cols: Vec<Vec<f64>> = xhat
        .into_iter()
        .map(|s| s.values().iter().map(|v| -v).collect())
        .collect();
    for i in (0..=m).rev() {
        cols.push(in_rows[i].values().to_vec());
    }
    Ok(cols)
}

fn columns_to_matrix(cols: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r])
}

/// Regressor matrix `Phi` (N x (n+m+1)) and prefiltered output `y_f` for
/// the prefilter `1/A_j(p)` of `model`. Orders are taken from `model`.
pub fn build_regressor(
    record: &SampledRecord,
    model: &CtTransferFunction,
    holds: HoldPolicy,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_prefilter(model)?;
    let (cols, yf) = regressor_columns(record, model.den(), model.n(), model.m(), holds)?;
    Ok((
        columns_to_matrix(&cols, record.len()),
        DVector::from_vec(yf),
    ))
}

/// Instrument matrix (N x (n+m+1)) built from the noise-free model output
/// of `model`; every column uses `holds.instrument_input`.
pub fn build_instrument(
    record: &SampledRecord,
    model: &CtTransferFunction,
    holds: HoldPolicy,
) -> Result<DMatrix<f64>> {
    check_prefilter(model)?;
    let cols = instrument_columns(record, model, model.n(), model.m(), holds.instrument_input)?;
    Ok(columns_to_matrix(&cols, record.len()))
}

/// `sum_k a_k b_k / len`.
fn mean_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// Solves `R theta = r` with `R = 1/N sum psi phi^T`, `r = 1/N sum psi y`
/// by a fully pivoted LU factorization.
fn solve_normal(
    instrument: &[Vec<f64>],
    regressor: &[Vec<f64>],
    yf: &[f64],
    n: usize,
    m: usize,
    condition_limit: f64,
) -> Result<StepOutcome> {
    let d = regressor.len();
    let r_mat = DMatrix::from_fn(d, d, |i, j| mean_dot(&instrument[i], &regressor[j]));
    let rhs = DVector::from_fn(d, |i, _| mean_dot(&instrument[i], yf));
    if r_mat.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("normal equations".into()));
    }
    let lu = r_mat.clone().full_piv_lu();
    let condition = match lu.try_inverse() {
        Some(inv) => norm1(&r_mat) * norm1(&inv),
        None => f64::INFINITY,
    };
    if !(condition <= condition_limit) {
        return Err(Error::SingularNormalMatrix { condition });
    }
    let sol = lu
        .solve(&rhs)
        .ok_or(Error::SingularNormalMatrix { condition })?;
    let residual = (&r_mat * &sol - &rhs).norm();
    let scale = r_mat.norm() * sol.norm() + rhs.norm();
    Ok(StepOutcome {
        theta: ParameterVector::new(sol.iter().copied().collect(), n, m)?,
        condition,
        residual,
        scale,
    })
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// One SRIVC update from `model`, with diagnostics.
pub fn srivc_step_detailed(
    record: &SampledRecord,
    model: &CtTransferFunction,
    config: &SrivcConfig,
) -> Result<StepOutcome> {
    check_prefilter(model)?;
    let (n, m) = (config.n, config.m);
    if model.n() != n || model.m() > m {
        return Err(Error::Config(format!(
            "model orders ({}, {}) do not match config ({n}, {m})",
            model.n(),
            model.m()
        )));
    }
    let (reg, yf) = regressor_columns(record, model.den(), n, m, config.holds)?;
    let ins = instrument_columns(record, model, n, m, config.holds.instrument_input)?;
    solve_normal(&ins, &reg, &yf, n, m, config.condition_limit)
}

/// One SRIVC update `theta_{j+1}` from the model `B_j/A_j`.
pub fn srivc_step(
    record: &SampledRecord,
    model: &CtTransferFunction,
    config: &SrivcConfig,
) -> Result<ParameterVector> {
    srivc_step_detailed(record, model, config).map(|s| s.theta)
}

/// State-variable-filter least squares: the regressor with prefilter
/// `1/(p/lambda + 1)^n`, used as its own instrument.
///
/// Solved by SVD; directions the data do not excite (e.g. the denominator
/// when the output is identically zero) get the minimum-norm solution.
pub fn lssvf_initialize(record: &SampledRecord, config: &SrivcConfig) -> Result<ParameterVector> {
    let lambda = match &config.init {
        Init::Lssvf { lambda: Some(l) } => *l,
        _ => 1.0 / record.period(),
    };
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "LSSVF cutoff must be positive, got {lambda}"
        )));
    }
    let (n, m) = (config.n, config.m);
    let den = CtPolynomial::new(vec![1.0 / lambda, 1.0])?.pow(n);
    let (reg, yf) = regressor_columns(record, &den, n, m, config.holds)?;
    let phi = columns_to_matrix(&reg, record.len());
    let svd = phi.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::SingularNormalMatrix {
            condition: f64::INFINITY,
        });
    }
    let tol = smax * record.len().max(config.dim()) as f64 * f64::EPSILON;
    let sol = svd
        .solve(&DVector::from_vec(yf), tol)
        .map_err(|e| Error::NonFinite(format!("least squares: {e}")))?;
    ParameterVector::new(sol.iter().copied().collect(), n, m)
}

/// Replaces an unstable parameter vector by its pole-reflected version.
fn stabilize(theta: ParameterVector) -> Result<(ParameterVector, bool)> {
    let tf = tf_from_theta(&theta)?;
    if is_stable(&tf) {
        return Ok((theta, false));
    }
    let fixed = reflect_unstable_poles(&tf)?;
    Ok((theta_from_tf(&fixed), true))
}

/// Runs the SRIVC iteration until the relative step
/// `||theta_{j+1} - theta_j|| / ||theta_{j+1}||` drops below
/// `config.epsilon` or `config.max_iterations` steps are taken.
pub fn srivc_estimate(record: &SampledRecord, config: &SrivcConfig) -> Result<EstimationResult> {
    config.validate()?;
    if record.len() < config.dim() {
        return Err(Error::SingularNormalMatrix {
            condition: f64::INFINITY,
        });
    }
    let theta0 = match &config.init {
        Init::Explicit(theta) => theta.clone(),
        Init::Lssvf { .. } => lssvf_initialize(record, config)?,
    };
    let (theta0, flag0) = stabilize(theta0)?;

    let mut history = vec![theta0];
    let mut flags = vec![flag0];
    let mut conditions = Vec::new();
    let mut steps = Vec::new();
    let mut converged = false;
    let mut last_step = f64::INFINITY;
    for _ in 0..config.max_iterations {
        let current = history.last().expect("nonempty");
        let model = tf_from_theta(current)?;
        let outcome = srivc_step_detailed(record, &model, config)?;
        conditions.push(outcome.condition);
        let (next, flag) = stabilize(outcome.theta)?;
        last_step = next.relative_distance(current);
        steps.push(last_step);
        history.push(next);
        flags.push(flag);
        if last_step < config.epsilon {
            converged = true;
            break;
        }
    }

    let result = EstimationResult {
        iterations: history.len() - 1,
        theta_history: history,
        converged,
        final_relative_step: last_step,
        condition_estimates: conditions,
        stabilized_flags: flags,
        relative_steps: steps,
    };
    if let Ok(tf) = tf_from_theta(result.theta()) {
        let common = tf.near_common_roots(COPRIME_TOLERANCE);
        if !common.is_empty() {
            log::warn!("estimated model has near pole-zero cancellations: {common:?}");
        }
    }
    Ok(result)
}

/// Generalised equation error `A(p) y_f - B(p) u_f` with
/// `y_f = y/prefilter_den`, `u_f = u/prefilter_den`.
pub fn gee(
    theta: &ParameterVector,
    record: &SampledRecord,
    prefilter_den: &CtPolynomial,
    holds: HoldPolicy,
) -> Result<SampledSignal> {
    let (n, m) = (theta.n(), theta.m());
    let pre = CtTransferFunction::new(CtPolynomial::constant(1.0), prefilter_den.clone())?;
    check_prefilter(&pre)?;
    let y_rows = filter_derivatives(pre.den(), record.y(), n, holds.output)?;
    let u_rows = filter_derivatives(pre.den(), record.u(), m, holds.regressor_input)?;
    let a = theta.den_params();
    let b = theta.num_params();
    let eps = (0..record.len())
        .map(|k| {
            // A(p) = sum_i a_{n+1-i} p^i with unit constant term
            let mut acc = y_rows[0].values()[k];
            for i in 1..=n {
                acc += a[n - i] * y_rows[i].values()[k];
            }
            for i in 0..=m {
                acc -= b[m - i] * u_rows[i].values()[k];
            }
            acc
        })
        .collect();
    Ok(record.y().with_values(eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holdsim::simulate_tf;
    use crate::signals::{gen_random_binary, synthesize_record, NoiseSpec};
    use approx::assert_abs_diff_eq;

    fn gstar() -> CtTransferFunction {
        "num:1;den:0.04,0.2,1".parse().unwrap()
    }

    fn noiseless(len: usize, hold: Hold) -> SampledRecord {
        let u = gen_random_binary(len, 1.0, 0.1, 7).unwrap();
        synthesize_record(&gstar(), &u, hold, &NoiseSpec::white(0.0), 0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SrivcConfig::new(2, 0).validate().is_ok());
        assert!(matches!(
            SrivcConfig::new(2, 3).validate(),
            Err(Error::Improper { .. })
        ));
        let mut c = SrivcConfig::new(2, 0);
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
        let mut c = SrivcConfig::new(2, 0);
        c.max_iterations = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_record_gives_zero_regressor() {
        let u = SampledSignal::zeros(30, 0.1).unwrap();
        let rec = SampledRecord::new(u.clone(), u, Default::default()).unwrap();
        let (phi, yf) = build_regressor(&rec, &gstar(), HoldPolicy::default()).unwrap();
        assert!(phi.iter().all(|&v| v == 0.0));
        assert!(yf.iter().all(|&v| v == 0.0));
        let e = gee(
            &theta_from_tf(&gstar()),
            &rec,
            gstar().den(),
            HoldPolicy::default(),
        )
        .unwrap();
        assert!(e.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn first_order_regressor_columns() {
        // A_j = p + 1, u = 1, y = 0: input column is the step response of
        // 1/(p+1), output column and y_f vanish.
        let len = 40;
        let u = SampledSignal::new(vec![1.0; len], 0.1, 0.0).unwrap();
        let y = SampledSignal::zeros(len, 0.1).unwrap();
        let rec = SampledRecord::new(u, y, Default::default()).unwrap();
        let model: CtTransferFunction = "num:1;den:1,1".parse().unwrap();
        let (phi, yf) = build_regressor(&rec, &model, HoldPolicy::default()).unwrap();
        assert_eq!(phi.ncols(), 2);
        for k in 0..len {
            let t = k as f64 * 0.1;
            assert_eq!(phi[(k, 0)], 0.0);
            assert_eq!(yf[k], 0.0);
            assert_abs_diff_eq!(phi[(k, 1)], 1.0 - (-t).exp(), epsilon = 1e-12);
        }
        // instrument: -(1/(p+1)^2) p u = -t e^{-t} for a unit step
        let psi = build_instrument(&rec, &model, HoldPolicy::default()).unwrap();
        for k in 0..len {
            let t = k as f64 * 0.1;
            assert_abs_diff_eq!(psi[(k, 0)], -t * (-t).exp(), epsilon = 1e-12);
            assert_eq!(psi[(k, 1)], phi[(k, 1)]);
        }
    }

    #[test]
    fn zero_numerator_zeroes_output_instrument_columns() {
        let rec = noiseless(200, Hold::Zoh);
        let model: CtTransferFunction = "num:0;den:0.04,0.2,1".parse().unwrap();
        let psi = build_instrument(&rec, &model, HoldPolicy::default()).unwrap();
        for c in 0..2 {
            assert!(psi.column(c).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn unstable_model_refused() {
        let rec = noiseless(50, Hold::Zoh);
        let bad: CtTransferFunction = "num:1;den:1,-1".parse().unwrap();
        assert!(matches!(
            build_regressor(&rec, &bad, HoldPolicy::default()),
            Err(Error::UnstableModel)
        ));
        assert!(matches!(
            build_instrument(&rec, &bad, HoldPolicy::default()),
            Err(Error::UnstableModel)
        ));
        assert!(matches!(
            gee(
                &theta_from_tf(&gstar()),
                &rec,
                bad.den(),
                HoldPolicy::default()
            ),
            Err(Error::UnstableModel)
        ));
    }

    #[test]
    fn fixed_point_with_fewer_samples_than_parameters_is_singular() {
        let rec = noiseless(2, Hold::Zoh);
        let r = srivc_step(&rec, &gstar(), &SrivcConfig::new(2, 0));
        assert!(matches!(r, Err(Error::SingularNormalMatrix { .. })));
        let r = srivc_estimate(&rec, &SrivcConfig::new(2, 0));
        assert!(matches!(r, Err(Error::SingularNormalMatrix { .. })));
    }

    #[test]
    fn step_solves_normal_equations() {
        let rec = noiseless(500, Hold::Zoh);
        let config = SrivcConfig::new(2, 0);
        let out = srivc_step_detailed(&rec, &"num:0.9;den:0.05,0.25,1".parse().unwrap(), &config)
            .unwrap();
        assert!(out.residual < 1e-8 * out.scale);
        assert!(out.condition.is_finite());
    }

    #[test]
    fn stopping_rule_sets_history_length() {
        let rec = noiseless(400, Hold::Zoh);
        let theta_star = theta_from_tf(&gstar());
        let config = SrivcConfig::new(2, 0).with_init(Init::Explicit(theta_star.clone()));
        let res = srivc_estimate(&rec, &config).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.theta_history.len(), 2);
        assert!(res.final_relative_step < 1e-9);
        assert_eq!(res.stabilized_flags.len(), 2);
        assert_eq!(res.condition_estimates.len(), 1);
    }

    #[test]
    fn lssvf_on_noiseless_first_order_data() {
        // 1/(0.5p + 1), bandwidth 2 rad/s; SVF cutoff 20 rad/s.
        // The output is continuous, so it is interpolated linearly.
        let tf: CtTransferFunction = "num:1;den:0.5,1".parse().unwrap();
        let u = gen_random_binary(2000, 1.0, 0.05, 3).unwrap();
        let y = simulate_tf(&tf, &u, Hold::Zoh).unwrap();
        let rec = SampledRecord::new(u, y, Default::default()).unwrap();
        let holds = HoldPolicy {
            output: Hold::Foh,
            ..HoldPolicy::default()
        };
        let config = SrivcConfig::new(1, 0)
            .with_holds(holds)
            .with_init(Init::Lssvf { lambda: Some(20.0) });
        let theta = lssvf_initialize(&rec, &config).unwrap();
        assert_abs_diff_eq!(theta.values()[0], 0.5, epsilon = 0.05);
        assert_abs_diff_eq!(theta.values()[1], 1.0, epsilon = 0.1);
    }

    #[test]
    fn lssvf_zero_output_gives_zero_numerator() {
        let u = gen_random_binary(300, 1.0, 0.1, 5).unwrap();
        let y = SampledSignal::zeros(300, 0.1).unwrap();
        let rec = SampledRecord::new(u, y, Default::default()).unwrap();
        let theta = lssvf_initialize(&rec, &SrivcConfig::new(2, 1)).unwrap();
        for b in theta.num_params() {
            assert_abs_diff_eq!(*b, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn history_csv_layout() {
        let rec = noiseless(300, Hold::Zoh);
        let res = srivc_estimate(&rec, &SrivcConfig::new(2, 0)).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,a1,a2,b0,relative_step,condition,stabilized"
        );
        assert_eq!(text.lines().count(), res.iterations + 2);
    }
}
