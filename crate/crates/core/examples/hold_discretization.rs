//! Same system, same samples, two intersample assumptions.
//!
//! cargo run --example hold_discretization

use srivc::holdsim::{discretize, simulate_tf, StateSpaceRealization};
use srivc::signals::gen_random_binary;
use srivc::{CtTransferFunction, Hold};

fn main() -> srivc::Result<()> {
    let g: CtTransferFunction = "num: 1 ; den: 0.04,0.2,1".parse()?;
    let ss = StateSpaceRealization::from_tf(&g)?;
    for hold in [Hold::Zoh, Hold::Foh] {
        let bank = discretize(&ss, 0.1, hold)?;
        println!("{hold}: Ad = {:.6}", bank.ad);
        println!("{hold}: Bd = {:.6}", bank.bd.transpose());
        if let Some(bd1) = &bank.bd1 {
            println!("{hold}: Bd1 = {:.6}", bd1.transpose());
        }
    }

    let u = gen_random_binary(40, 1.0, 0.1, 1)?;
    let yz = simulate_tf(&g, &u, Hold::Zoh)?;
    let yf = simulate_tf(&g, &u, Hold::Foh)?;
    println!("{:>6} {:>5} {:>10} {:>10}", "t", "u", "y zoh", "y foh");
    for k in (0..40).step_by(4) {
        println!(
            "{:6.2} {:5.1} {:10.5} {:10.5}",
            u.time(k),
            u.values()[k],
            yz.values()[k],
            yf.values()[k]
        );
    }
    Ok(())
}
