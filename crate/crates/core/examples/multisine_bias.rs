//! Bias of SRIVC on a multisine record whose output is the exact
//! continuous-time response, at two sampling periods.
//!
//! cargo run --release --example multisine_bias

use srivc::estimator::srivc_estimate;
use srivc::signals::synthesize_multisine_record;
use srivc::{CtTransferFunction, Hold, HoldPolicy, NoiseSpec, SrivcConfig};

fn main() -> srivc::Result<()> {
    let g: CtTransferFunction = "num: 1 ; den: 0.04,0.2,1".parse()?;
    let cfg = SrivcConfig::new(2, 0).with_holds(HoldPolicy::uniform(Hold::Foh));
    let truth = [0.04, 0.2, 1.0];
    for t in [0.2, 0.1, 0.05, 0.025] {
        // same time span for every period
        let len = (2000.0 / t) as usize;
        let rec = synthesize_multisine_record(&g, len, t, &NoiseSpec::white(0.0), 0)?;
        let th = srivc_estimate(&rec, &cfg)?;
        let bias: Vec<String> = th
            .theta()
            .values()
            .iter()
            .zip(truth)
            .map(|(a, b)| format!("{:+.3e}", a - b))
            .collect();
        println!("T = {t:<6} bias [{}]", bias.join(", "));
    }
    Ok(())
}
