//! A reduced Monte Carlo study with plot output.
//!
//! cargo run --release --example monte_carlo_sweep [out_dir]
//! Pass `desk` as a second argument for the full desk-scale preset.

use std::path::PathBuf;

use srivc::cli::preset_path;
use srivc::mcharness::{emit_plot_data, log_grid, run_mc_sweep, variance_slope, SweepConfig};

fn main() -> srivc::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "mc-out".into()));
    let config = if args.next().as_deref() == Some("desk") {
        SweepConfig::load(&preset_path("desk.cfg"))?
    } else {
        SweepConfig {
            n_grid: log_grid(100, 5000, 8),
            runs_per_n: 20,
            ..SweepConfig::desk()
        }
    };
    let (summary, raw) = run_mc_sweep(&config, None)?;
    let truth = config.truth();
    std::fs::create_dir_all(&out)?;
    raw.write_csv(std::fs::File::create(out.join("raw.csv"))?)?;
    emit_plot_data(&summary, truth.values(), &out)?;

    let n = *config.n_grid.last().unwrap();
    for inst in &summary.instances {
        let means: Vec<String> = (0..truth.len())
            .map(|p| {
                let c = summary.cell(inst, n, p).unwrap();
                format!("{:.4}", c.mean.unwrap_or(f64::NAN))
            })
            .collect();
        let slopes: Vec<String> = (0..truth.len())
            .map(|p| {
                format!(
                    "{:.2}",
                    variance_slope(&summary, inst, p, 10.0).unwrap_or(f64::NAN)
                )
            })
            .collect();
        println!(
            "{inst:<24} N={n} mean [{}] slope [{}]",
            means.join(", "),
            slopes.join(", ")
        );
    }
    println!("truth {:?}; figures in {}", truth.values(), out.display());
    Ok(())
}
