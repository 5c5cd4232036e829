//! Noiseless ZOH data: which hold assumptions leave the true model fixed?
//!
//! cargo run --release --example hold_mismatch

use srivc::ctlti::theta_from_tf;
use srivc::estimator::{srivc_estimate, srivc_step};
use srivc::signals::{gen_random_binary, synthesize_record};
use srivc::{CtTransferFunction, Hold, HoldPolicy, Init, NoiseSpec, SrivcConfig};

fn main() -> srivc::Result<()> {
    let g: CtTransferFunction = "num: 1 ; den: 0.04,0.2,1".parse()?;
    let truth = theta_from_tf(&g);
    let u = gen_random_binary(5000, 1.0, 0.1, 3)?;
    let rec = synthesize_record(&g, &u, Hold::Zoh, &NoiseSpec::white(0.0), 0)?;

    println!("regressor instrument output | one step from truth | converged point");
    for reg in [Hold::Zoh, Hold::Foh] {
        for ins in [Hold::Zoh, Hold::Foh] {
            for out in [Hold::Zoh, Hold::Foh] {
                let holds = HoldPolicy {
                    regressor_input: reg,
                    instrument_input: ins,
                    output: out,
                };
                let cfg = SrivcConfig::new(2, 0)
                    .with_holds(holds)
                    .with_init(Init::Explicit(truth.clone()));
                let step = srivc_step(&rec, &g, &cfg)?;
                let fixed = srivc_estimate(&rec, &cfg)?;
                println!(
                    "{:>9} {:>10} {:>6} | {:.2e} | {:.2e}",
                    reg.to_string(),
                    ins.to_string(),
                    out.to_string(),
                    step.relative_distance(&truth),
                    fixed.theta().relative_distance(&truth)
                );
            }
        }
    }
    Ok(())
}
