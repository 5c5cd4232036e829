use srivc::cli::preset_path;
use srivc::mcharness::{
    emit_plot_data, log_grid, reference_instances, run_mc_sweep, summarize, RawResults, SweepConfig,
};

fn small() -> SweepConfig {
    SweepConfig {
        n_grid: vec![50, 150, 500],
        runs_per_n: 3,
        ..SweepConfig::desk()
    }
}

fn dump(config: &SweepConfig, jobs: usize) -> (Vec<u8>, Vec<u8>) {
    let (summary, raw) = run_mc_sweep(config, Some(jobs)).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    raw.write_csv(&mut a).unwrap();
    summary.write_csv(&mut b).unwrap();
    (a, b)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = small();
    let one = dump(&cfg, 1);
    assert_eq!(one, dump(&cfg, 2));
    assert_eq!(one, dump(&cfg, 8));
}

#[test]
fn base_seed_changes_results() {
    let cfg = small();
    let other = SweepConfig {
        base_seed: 7,
        ..cfg.clone()
    };
    assert_ne!(dump(&cfg, 4).0, dump(&other, 4).0);
}

#[test]
fn raw_table_round_trips_and_resummarizes() {
    let (summary, raw) = run_mc_sweep(&small(), None).unwrap();
    let mut buf = Vec::new();
    raw.write_csv(&mut buf).unwrap();
    let back = RawResults::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, raw);
    assert_eq!(summarize(&back).unwrap(), summary);
    assert_eq!(raw.rows.len(), 5 * 3 * 3);
}

#[test]
fn shipped_presets_match_builtins() {
    assert_eq!(
        SweepConfig::load(&preset_path("desk.cfg")).unwrap(),
        SweepConfig::desk()
    );
    assert_eq!(
        SweepConfig::load(&preset_path("full.cfg")).unwrap(),
        SweepConfig::full()
    );
}

#[test]
fn config_text_round_trips() {
    let mut cfg = small();
    cfg.warmup_discard = 20;
    cfg.fixed_input = true;
    cfg.instances.truncate(2);
    let text = cfg.to_config_text();
    assert_eq!(SweepConfig::from_config_text(text.as_bytes()).unwrap(), cfg);
}

#[test]
fn grid_shorthand_and_bad_keys() {
    let cfg =
        SweepConfig::from_config_text("n_min = 50\nn_max = 20000\nn_points = 20\n".as_bytes())
            .unwrap();
    assert_eq!(cfg.n_grid, log_grid(50, 20_000, 20));
    assert_eq!(cfg.instances, reference_instances());
    assert!(SweepConfig::from_config_text("bogus = 1\n".as_bytes()).is_err());
    assert!(SweepConfig::from_config_text("n_min = 50\n".as_bytes()).is_err());
    assert!(SweepConfig::from_config_text("m = 3\n".as_bytes()).is_err());
}

#[test]
fn plot_data_is_written() {
    let cfg = small();
    let (summary, _) = run_mc_sweep(&cfg, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_plot_data(&summary, cfg.truth().values(), dir.path()).unwrap();
    assert_eq!(files.len(), 3 * 2 + 2);
    let mean = std::fs::read_to_string(dir.path().join("mean_a1.csv")).unwrap();
    assert!(mean.starts_with("instance,N,mean,truth\n"));
    assert_eq!(mean.lines().count(), 1 + 5 * 3);
    let svg = std::fs::read_to_string(dir.path().join("fig_mean.svg")).unwrap();
    assert!(svg.contains("class=\"truth\""));
    assert!(svg.contains("1-zoh-all"));
}
