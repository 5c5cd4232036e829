//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criteria 3 to 6 share a single desk-scale sweep loaded from
//! `presets/desk.cfg`.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use srivc::cli::preset_path;
use srivc::ctlti::theta_from_tf;
use srivc::estimator::{gee, srivc_estimate, srivc_step, srivc_step_detailed};
use srivc::holdsim::{
    discretize, realize_filter_bank, run_filter_bank, simulate_tf, StateSpaceRealization,
};
use srivc::mcharness::{run_mc_sweep, variance_slope, McSummary, SweepConfig};
use srivc::signals::{gen_random_binary, synthesize_record};
use srivc::{CtTransferFunction, Hold, HoldPolicy, Init, NoiseSpec, SampledSignal, SrivcConfig};

const INST1: &str = "1-zoh-all";
const INST2: &str = "2-foh-regressor-input";
const INST3: &str = "3-foh-instrument-input";
const INST4: &str = "4-foh-output";
const INST5: &str = "5-multisine-foh";

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, what: &str, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!(
            "criterion {id} [{}] {what}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn gstar() -> CtTransferFunction {
    "num: 1 ; den: 0.04,0.2,1".parse().expect("literal")
}

fn rel_err(est: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = est.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = truth.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// `exp(A T)` and `int_0^T exp(A s) ds B` for a 2x2 `A` with distinct
/// eigenvalues, by diagonalization in complex arithmetic.
fn zoh_by_eigen(a: [[f64; 2]; 2], b: [f64; 2], t: f64) -> ([[f64; 2]; 2], [f64; 2]) {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let lam = [tr / 2.0 + disc, tr / 2.0 - disc];
    // eigenvector for lambda: (a01, lambda - a00)
    let v = lam.map(|l| [Complex64::new(a[0][1], 0.0), l - a[0][0]]);
    let vdet = v[0][0] * v[1][1] - v[1][0] * v[0][1];
    let vinv = [
        [v[1][1] / vdet, -v[1][0] / vdet],
        [-v[0][1] / vdet, v[0][0] / vdet],
    ];
    let e = lam.map(|l| (l * t).exp());
    let g = [(e[0] - 1.0) / lam[0], (e[1] - 1.0) / lam[1]];
    let mut ad = [[0.0; 2]; 2];
    let mut bd = [0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            let s: Complex64 = (0..2).map(|k| v[k][i] * e[k] * vinv[k][j]).sum();
            ad[i][j] = s.re;
            let s: Complex64 = (0..2).map(|k| v[k][i] * g[k] * vinv[k][j]).sum();
            bd[i] += s.re * b[j];
        }
    }
    (ad, bd)
}

#[allow(clippy::needless_range_loop)]
fn criterion_1(rep: &mut Report) {
    let start = Instant::now();
    let ss = StateSpaceRealization::from_tf(&gstar()).expect("realization");
    let bank = discretize(&ss, 0.1, Hold::Zoh).expect("discretize");
    let a = [[ss.a[(0, 0)], ss.a[(0, 1)]], [ss.a[(1, 0)], ss.a[(1, 1)]]];
    let (ad, bd) = zoh_by_eigen(a, [ss.b[0], ss.b[1]], 0.1);
    let mut disc_err: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            disc_err = disc_err.max((bank.ad[(i, j)] - ad[i][j]).abs());
        }
        disc_err = disc_err.max((bank.bd[i] - bd[i]).abs());
    }

    let first: CtTransferFunction = "num: 1 ; den: 1,1".parse().expect("literal");
    let t = 0.05;
    let len = 400;
    let step = SampledSignal::new(vec![1.0; len], t, 0.0).expect("signal");
    let ramp =
        SampledSignal::new((0..len).map(|k| k as f64 * t).collect(), t, 0.0).expect("signal");
    let mut sim_err: f64 = 0.0;
    for hold in [Hold::Zoh, Hold::Foh] {
        let y = simulate_tf(&first, &step, hold).expect("simulate");
        // the held step starts at t = 0 under both holds
        for (k, v) in y.values().iter().enumerate() {
            let tk = k as f64 * t;
            sim_err = sim_err.max((v - (1.0 - (-tk).exp())).abs());
        }
    }
    let y = simulate_tf(&first, &ramp, Hold::Foh).expect("simulate");
    for (k, v) in y.values().iter().enumerate() {
        let tk = k as f64 * t;
        sim_err = sim_err.max((v - (tk - 1.0 + (-tk).exp())).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    rep.line(
        1,
        disc_err < 1e-10 && sim_err < 1e-9 && secs < 1.0,
        "discretization oracle",
        format!(
            "ZOH vs eigen max {disc_err:.2e} (tol 1e-10), step/ramp max {sim_err:.2e} (tol 1e-9), {secs:.2}s"
        ),
    );
}

fn noiseless_record(len: usize) -> srivc::SampledRecord {
    let u = gen_random_binary(len, 1.0, 0.1, 11).expect("input");
    synthesize_record(&gstar(), &u, Hold::Zoh, &NoiseSpec::white(0.0), 0).expect("record")
}

fn criterion_2(rep: &mut Report) {
    let start = Instant::now();
    let rec = noiseless_record(5000);
    let truth = theta_from_tf(&gstar());
    let mut worst: f64 = 0.0;
    for ins in [Hold::Zoh, Hold::Foh] {
        for out in [Hold::Zoh, Hold::Foh] {
            let holds = HoldPolicy {
                regressor_input: Hold::Zoh,
                instrument_input: ins,
                output: out,
            };
            let cfg = SrivcConfig::new(2, 0).with_holds(holds);
            match srivc_step(&rec, &gstar(), &cfg) {
                Ok(th) => worst = worst.max(rel_err(th.values(), truth.values())),
                Err(e) => {
                    println!("  step failed for instrument {ins}, output {out}: {e}");
                    worst = f64::INFINITY;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rep.line(
        2,
        worst < 1e-6 && secs < 5.0,
        "exact fixed point under matched regressor input",
        format!("worst relative error {worst:.2e} over 4 hold pairs (tol 1e-6), {secs:.2}s"),
    );
}

fn max_bias_in_se(summary: &McSummary, inst: &str, n: usize, truth: &[f64]) -> (f64, Vec<f64>) {
    let mut worst: f64 = 0.0;
    let mut bias = Vec::new();
    for (p, tv) in truth.iter().enumerate() {
        let c = summary.cell(inst, n, p).expect("cell");
        let (mean, se) = (
            c.mean.unwrap_or(f64::NAN),
            c.standard_error().unwrap_or(f64::NAN),
        );
        bias.push(mean - tv);
        worst = worst.max((mean - tv).abs() / se);
    }
    (worst, bias)
}

fn criterion_3(rep: &mut Report, desk: &McSummary, truth: &[f64]) {
    let rec = noiseless_record(5000);
    let holds = HoldPolicy {
        regressor_input: Hold::Foh,
        ..HoldPolicy::default()
    };
    let cfg = SrivcConfig::new(2, 0)
        .with_holds(holds)
        .with_init(Init::Explicit(theta_from_tf(&gstar())));
    let dev = match srivc_estimate(&rec, &cfg) {
        Ok(res) => rel_err(res.theta().values(), truth),
        Err(e) => {
            println!("  mismatched estimate failed: {e}");
            f64::NAN
        }
    };
    let n = *desk.n_grid.last().expect("grid");
    let (z, _) = max_bias_in_se(desk, INST2, n, truth);
    rep.line(
        3,
        dev > 1e-3 && z > 3.0,
        "mismatched regressor input is inconsistent",
        format!("noiseless fixed-point deviation {dev:.2e} (need > 1e-3), largest |bias| at N={n} is {z:.1} SE (need > 3)"),
    );
}

fn criterion_4(rep: &mut Report, desk: &McSummary, truth: &[f64]) {
    let n = *desk.n_grid.last().expect("grid");
    let mut ok = true;
    let mut detail = Vec::new();
    for inst in [INST1, INST3, INST4] {
        let mut worst_mean: f64 = 0.0;
        let mut slopes = Vec::new();
        for (p, tv) in truth.iter().enumerate() {
            let mean = desk
                .cell(inst, n, p)
                .and_then(|c| c.mean)
                .unwrap_or(f64::NAN);
            worst_mean = worst_mean.max(((mean - tv) / tv).abs());
            let s = variance_slope(desk, inst, p, 10.0).unwrap_or(f64::NAN);
            ok &= (-1.3..=-0.7).contains(&s);
            slopes.push(format!("{s:.2}"));
        }
        ok &= worst_mean < 0.02;
        detail.push(format!(
            "{inst}: mean err {:.2}% slopes [{}]",
            worst_mean * 100.0,
            slopes.join(", ")
        ));
    }
    rep.line(
        4,
        ok,
        "consistency sweep (mean within 2%, slope in [-1.3, -0.7])",
        detail.join("; "),
    );
}

fn criterion_5(rep: &mut Report, desk: &McSummary, truth: &[f64]) {
    let n = *desk.n_grid.last().expect("grid");
    let mut worst: f64 = 0.0;
    for inst in [INST3, INST4] {
        for p in 0..truth.len() {
            let a = desk.cell(INST1, n, p).expect("cell");
            let b = desk.cell(inst, n, p).expect("cell");
            let se = (a.standard_error().unwrap_or(f64::NAN).powi(2)
                + b.standard_error().unwrap_or(f64::NAN).powi(2))
            .sqrt();
            let diff = (a.mean.unwrap_or(f64::NAN) - b.mean.unwrap_or(f64::NAN)).abs();
            worst = worst.max(diff / se);
        }
    }
    rep.line(
        5,
        worst < 3.0,
        "instrument and output holds do not move the mean",
        format!("largest difference from {INST1} at N={n}: {worst:.2} combined SE (need < 3)"),
    );
}

fn criterion_6(rep: &mut Report, desk: &SweepConfig, summary: &McSummary, truth: &[f64]) {
    let start = Instant::now();
    let n = *summary.n_grid.last().expect("grid");
    let (z, bias_coarse) = max_bias_in_se(summary, INST5, n, truth);
    let fine_cfg = SweepConfig {
        period: desk.period / 2.0,
        n_grid: vec![n],
        instances: desk
            .instances
            .iter()
            .filter(|i| i.label == INST5)
            .cloned()
            .collect(),
        ..desk.clone()
    };
    let (fine, _) = run_mc_sweep(&fine_cfg, None).expect("fine sweep");
    let (_, bias_fine) = max_bias_in_se(&fine, INST5, n, truth);
    let shrinks = bias_coarse
        .iter()
        .zip(&bias_fine)
        .all(|(c, f)| f.abs() < c.abs());
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:+.2e}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    rep.line(
        6,
        z > 3.0 && shrinks,
        "multisine bias shrinks with the sampling period",
        format!(
            "bias at T={}: [{}] (largest {z:.1} SE), at T={}: [{}], {:.1}s",
            desk.period,
            fmt(&bias_coarse),
            fine_cfg.period,
            fmt(&bias_fine),
            start.elapsed().as_secs_f64()
        ),
    );
}

fn criterion_7(rep: &mut Report, desk: &SweepConfig) {
    let rec = noiseless_record(3000);
    let den = gstar().den().clone();

    let ss = realize_filter_bank(&den, std::slice::from_ref(&den)).expect("realization");
    let mut cancel: f64 = 0.0;
    for hold in [Hold::Zoh, Hold::Foh] {
        let bank = discretize(&ss, 0.1, hold).expect("discretize");
        let y = run_filter_bank(&bank, rec.u(), None)
            .expect("run")
            .remove(0);
        for (a, b) in y.values().iter().zip(rec.u().values()) {
            cancel = cancel.max((a - b).abs());
        }
    }

    let eps = gee(&theta_from_tf(&gstar()), &rec, &den, HoldPolicy::default()).expect("gee");
    let gee_max = eps.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let noisy =
        synthesize_record(&gstar(), rec.u(), Hold::Zoh, &NoiseSpec::white(0.1), 5).expect("record");
    let model: CtTransferFunction = "num: 1.1 ; den: 0.05,0.25,1".parse().expect("literal");
    let step = srivc_step_detailed(&noisy, &model, &SrivcConfig::new(2, 0)).expect("step");
    let residual_ratio = step.residual / step.scale;

    let small = SweepConfig {
        n_grid: vec![60, 200, 700],
        runs_per_n: 4,
        ..desk.clone()
    };
    let mut dumps = Vec::new();
    for jobs in [1, 2, 8] {
        let (summary, raw) = run_mc_sweep(&small, Some(jobs)).expect("sweep");
        let mut buf = Vec::new();
        raw.write_csv(&mut buf).expect("csv");
        summary.write_csv(&mut buf).expect("csv");
        dumps.push(buf);
    }
    let identical = dumps.windows(2).all(|w| w[0] == w[1]);

    rep.line(
        7,
        cancel < 1e-9 && gee_max < 1e-8 && residual_ratio < 1e-8 && identical,
        "property suites",
        format!(
            "A/A max {cancel:.2e} (tol 1e-9), GEE(theta*) max {gee_max:.2e} (tol 1e-8), residual/scale {residual_ratio:.2e} (tol 1e-8), sweeps identical for jobs 1/2/8: {identical}"
        ),
    );
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filtered runs must not start the sweep.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }

    let mut rep = Report { failures: 0 };
    criterion_1(&mut rep);
    criterion_2(&mut rep);

    let desk = SweepConfig::load(&preset_path("desk.cfg")).expect("desk preset");
    let truth = desk.truth().values().to_vec();
    let start = Instant::now();
    let (summary, _) = run_mc_sweep(&desk, None).expect("desk sweep");
    println!(
        "desk sweep: {} instances x {} sample sizes x {} runs in {:.1}s",
        desk.instances.len(),
        desk.n_grid.len(),
        desk.runs_per_n,
        start.elapsed().as_secs_f64()
    );

    criterion_3(&mut rep, &summary, &truth);
    criterion_4(&mut rep, &summary, &truth);
    criterion_5(&mut rep, &summary, &truth);
    criterion_6(&mut rep, &desk, &summary, &truth);
    criterion_7(&mut rep, &desk);

    println!("{} of 7 criteria passed", 7 - rep.failures);
    if rep.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
