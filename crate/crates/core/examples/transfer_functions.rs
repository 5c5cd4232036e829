//! Parsing, poles, frequency response and pole reflection.
//!
//! cargo run --example transfer_functions

use srivc::ctlti::{is_stable, reflect_unstable_poles, tf_frequency_response, theta_from_tf};
use srivc::CtTransferFunction;

fn main() -> srivc::Result<()> {
    let g: CtTransferFunction = "num: 1 ; den: 0.04,0.2,1".parse()?;
    println!("G = {g}");
    println!("theta = {:?}", theta_from_tf(&g).values());
    for p in g.poles()? {
        println!("pole {p:.4}");
    }
    for w in [0.5, 2.0, 5.0, 7.0] {
        let r = tf_frequency_response(&g, w)?;
        println!("|G(j{w})| = {:.4}, arg = {:.4} rad", r.norm(), r.arg());
    }

    let unstable: CtTransferFunction = "num: 1 ; den: 0.04,-0.2,1".parse()?;
    let fixed = reflect_unstable_poles(&unstable)?;
    println!("{unstable} stable: {}", is_stable(&unstable));
    println!("reflected: {fixed} stable: {}", is_stable(&fixed));
    Ok(())
}
