use srivc::holdsim::simulate_tf;
use srivc::signals::{
    analytic_multisine_output, gen_gaussian_noise, gen_multisine, gen_random_binary,
    synthesize_multisine_record, synthesize_record, Intersample, MULTISINE_FREQS,
};
use srivc::{CtTransferFunction, Hold, NoiseSpec, SampledRecord, SampledSignal};

fn gstar() -> CtTransferFunction {
    "num: 1 ; den: 0.04,0.2,1".parse().unwrap()
}

/// Largest deviation after `settle` seconds between a simulation from rest
/// and the stationary analytic output.
fn multisine_gap(t: f64, hold: Hold, settle: f64) -> f64 {
    let len = (20.0 / t) as usize;
    let u = gen_multisine(len, t, 0.0).unwrap();
    let sim = simulate_tf(&gstar(), &u, hold).unwrap();
    let exact = analytic_multisine_output(&gstar(), &MULTISINE_FREQS, len, t, 0.0).unwrap();
    let skip = (settle / t) as usize;
    sim.values()[skip..]
        .iter()
        .zip(&exact.values()[skip..])
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

#[test]
fn analytic_multisine_matches_fine_zoh_simulation() {
    // transient decays as exp(-2.5 t)
    let gap = multisine_gap(1e-4, Hold::Zoh, 12.0);
    assert!(gap < 1e-3, "{gap}");
}

#[test]
fn analytic_multisine_matches_fine_foh_simulation() {
    let gap = multisine_gap(1e-3, Hold::Foh, 12.0);
    // interpolation error of the 7 rad/s tone is about (7T)^2/8
    assert!(gap < 1e-5, "{gap}");
}

#[test]
fn analytic_output_is_not_a_held_simulation_at_coarse_sampling() {
    let gap = multisine_gap(0.1, Hold::Zoh, 12.0);
    assert!(gap > 1e-2, "{gap}");
}

#[test]
fn second_order_step_through_record_synthesis() {
    let t = 0.1;
    let u = SampledSignal::new(vec![1.0; 200], t, 0.0).unwrap();
    let rec = synthesize_record(&gstar(), &u, Hold::Zoh, &NoiseSpec::white(0.0), 0).unwrap();
    // wn = 5, zeta = 0.5
    let (zw, wd) = (2.5, 5.0 * 0.75f64.sqrt());
    for (k, v) in rec.y().values().iter().enumerate() {
        let tk = k as f64 * t;
        let expect = 1.0 - (-zw * tk).exp() * ((wd * tk).cos() + zw / wd * (wd * tk).sin());
        assert!((v - expect).abs() < 1e-9, "k={k}: {v} vs {expect}");
    }
}

#[test]
fn output_is_noiseless_response_plus_seeded_noise() {
    let u = gen_random_binary(500, 1.0, 0.1, 3).unwrap();
    let spec = NoiseSpec::white(0.1);
    let rec = synthesize_record(&gstar(), &u, Hold::Zoh, &spec, 77).unwrap();
    let clean = simulate_tf(&gstar(), &u, Hold::Zoh).unwrap();
    let noise = gen_gaussian_noise(500, &spec, 0.1, 77).unwrap();
    for k in 0..500 {
        let expect = clean.values()[k] + noise.values()[k];
        assert!((rec.y().values()[k] - expect).abs() < 1e-12);
    }
    let again = synthesize_record(&gstar(), &u, Hold::Zoh, &spec, 77).unwrap();
    assert_eq!(rec, again);
    let other = synthesize_record(&gstar(), &u, Hold::Zoh, &spec, 78).unwrap();
    assert_ne!(rec.y(), other.y());
}

#[test]
fn superposition_of_inputs() {
    let u = gen_random_binary(300, 1.0, 0.1, 5).unwrap();
    let v = gen_random_binary(300, 0.5, 0.1, 6).unwrap();
    let w: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a + b)
        .collect();
    let w = SampledSignal::new(w, 0.1, 0.0).unwrap();
    for hold in [Hold::Zoh, Hold::Foh] {
        let yu = simulate_tf(&gstar(), &u, hold).unwrap();
        let yv = simulate_tf(&gstar(), &v, hold).unwrap();
        let yw = simulate_tf(&gstar(), &w, hold).unwrap();
        for k in 0..300 {
            assert!((yw.values()[k] - yu.values()[k] - yv.values()[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn record_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csv");
    let rec = synthesize_multisine_record(&gstar(), 400, 0.05, &NoiseSpec::white(0.1), 9).unwrap();
    rec.save(&path).unwrap();
    let back = SampledRecord::load(&path).unwrap();
    assert_eq!(back.len(), 400);
    assert_eq!(back.period(), 0.05);
    assert_eq!(back.meta.hold, Intersample::Analytic);
    assert_eq!(back.meta.system.as_ref(), Some(&gstar()));
    assert_eq!(back.u().values(), rec.u().values());
    assert_eq!(back.y().values(), rec.y().values());
}

#[test]
fn unstable_systems_are_not_synthesized() {
    let tf: CtTransferFunction = "num: 1 ; den: -0.5,1".parse().unwrap();
    let u = gen_random_binary(10, 1.0, 0.1, 0).unwrap();
    assert!(synthesize_record(&tf, &u, Hold::Zoh, &NoiseSpec::white(0.0), 0).is_err());
    assert!(synthesize_multisine_record(&tf, 10, 0.1, &NoiseSpec::white(0.0), 0).is_err());
}
