//! Building behaviors, checking no-signaling and round-tripping JSON.
//!
//! Run with `cargo run --example behaviors`.

use bellwire::behavior::{pr_box, tsirelson_four_setting, Behavior, Scenario};
use bellwire::geometry::is_no_signaling;

fn main() -> bellwire::Result<()> {
    let chsh = Scenario::chsh();

    // P(a,b|x,y) = 1/2 when a xor b = x y.
    let pr = pr_box();
    println!("PR box, setting (1,1): {:?}", pr.setting(1, 1));
    println!("Alice marginals: {:?}", pr.alice_marginals());

    // Any table can be built from a closure over (x, y, a, b).
    let correlated = Behavior::from_fn(chsh, |_, _, a, b| if a == b { 0.5 } else { 0.0 })?;
    let noisy = pr.mix(&Behavior::white_noise(chsh), 0.75)?;
    for (name, p) in [("correlated", &correlated), ("3/4 PR + 1/4 noise", &noisy)] {
        let ns = is_no_signaling(p, 1e-12);
        println!(
            "{name}: no-signaling = {} (max residual {:e})",
            ns.no_signaling, ns.max_residual
        );
    }

    // Alice's marginal depends on y here.
    let signaling = Behavior::from_fn(chsh, |_, y, a, _| if a == y { 0.5 } else { 0.0 })?;
    let report = is_no_signaling(&signaling, 1e-12);
    println!(
        "signaling box: no-signaling = {}, worst = {:?}",
        report.no_signaling, report.worst
    );

    // Malformed tables are rejected at construction.
    match Behavior::new(chsh, vec![0.5; 16]) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }

    let tsirelson = tsirelson_four_setting();
    let json = tsirelson.to_json();
    let back = Behavior::from_json(&json)?;
    println!(
        "four-setting Tsirelson box: {} entries, JSON round trip exact: {}",
        back.entries().len(),
        back == tsirelson
    );
    Ok(())
}
