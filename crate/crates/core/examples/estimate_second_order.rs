//! SRIVC on a noisy record, with the iteration history.
//!
//! cargo run --release --example estimate_second_order

use srivc::estimator::srivc_estimate;
use srivc::signals::{gen_random_binary, synthesize_record};
use srivc::{CtTransferFunction, Hold, NoiseSpec, SrivcConfig};

fn main() -> srivc::Result<()> {
    let g: CtTransferFunction = "num: 1 ; den: 0.04,0.2,1".parse()?;
    let u = gen_random_binary(5000, 1.0, 0.1, 42)?;
    let rec = synthesize_record(&g, &u, Hold::Zoh, &NoiseSpec::white(0.1), 43)?;

    let res = srivc_estimate(&rec, &SrivcConfig::new(2, 0))?;
    for (j, th) in res.theta_history.iter().enumerate() {
        println!("{j:3} {:?}", th.values());
    }
    println!(
        "converged: {} after {} iterations (last step {:.2e})",
        res.converged, res.iterations, res.final_relative_step
    );
    println!("true:     [0.04, 0.2, 1.0]");
    Ok(())
}
