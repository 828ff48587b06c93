//! Relative entropy between behaviors, and a WPICC wiring that doubles it.
//!
//! Run with `cargo run --example distinguishability`.

use bellwire::behavior::{named_behavior, NamedBehavior};
use bellwire::divergence::{behavior_re, conditional_re, kl};
use bellwire::wirings::presets::appendix_c_wpicc;
use bellwire::InputDistribution;

fn main() -> bellwire::Result<()> {
    println!(
        "KL(1/2,1/2 || 1/4,3/4) = {:.6} bits",
        kl(&[0.5, 0.5], &[0.25, 0.75])?.bits
    );
    println!(
        "KL(1/2,1/2 || 1,0) = {:?}",
        kl(&[0.5, 0.5], &[1.0, 0.0])?.bits
    );

    let wiring = appendix_c_wpicc();
    println!(
        "{:>6} {:>12} {:>12} {:>8} {:>12}",
        "eps", "S_b before", "S_b after", "ratio", "closed form"
    );
    for eps in [0.05, 0.10, 0.125, 0.20, 0.25, 0.30, 0.45] {
        let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: eps })?;
        let q = named_behavior(&NamedBehavior::AppendixCP0Prime { epsilon: eps })?;
        let before = behavior_re(&p, &q)?;
        let after = behavior_re(&wiring.apply(&p)?, &wiring.apply(&q)?)?;
        let closed = (0.5 - 2.0 * eps) * ((0.5 - eps) / eps).log2();
        let ratio = if before.bits > 0.0 {
            format!("{:.6}", after.bits / before.bits)
        } else {
            "0/0".into()
        };
        println!(
            "{eps:>6} {:>12.9} {:>12.9} {ratio:>8} {closed:>12.9}",
            before.bits, after.bits
        );
    }

    // The RE under a fixed input distribution never exceeds the worst case.
    let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: 0.125 })?;
    let q = named_behavior(&NamedBehavior::AppendixCP0Prime { epsilon: 0.125 })?;
    let uniform = InputDistribution::for_scenario_uniform(p.scenario());
    println!(
        "uniform-input RE {:.6} <= worst-setting RE {:.6}",
        conditional_re(&p, &q, &uniform)?.bits,
        behavior_re(&p, &q)?.bits
    );
    Ok(())
}
