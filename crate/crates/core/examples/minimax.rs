//! The min-max and max-min forms of the nonlocality quantifier agree.
//!
//! Run with `cargo run --release --example minimax`.

use bellwire::behavior::{pr_box, Scenario};
use bellwire::geometry::random_ns_behavior;
use bellwire::monotones::{s_c_direct, s_nl};

fn main() -> bellwire::Result<()> {
    let tol = 1e-6;
    let sc = Scenario::chsh();
    let noise = bellwire::Behavior::white_noise(sc);
    println!(
        "{:>24} {:>14} {:>14} {:>10}",
        "behavior", "min-max", "max-min", "diff"
    );
    let mut cases = vec![("PR box".to_string(), pr_box())];
    for v in [0.6, 0.8] {
        cases.push((format!("PR at visibility {v}"), pr_box().mix(&noise, v)?));
    }
    for seed in 0..3 {
        let p = random_ns_behavior(&sc, seed).mix(&pr_box(), 0.2)?;
        cases.push((format!("random mixture {seed}"), p));
    }
    for (name, p) in cases {
        let a = s_nl(&p, tol)?;
        let b = s_c_direct(&p, tol)?;
        println!(
            "{name:>24} {:>14.9} {:>14.9} {:>10.1e}",
            a.value,
            b.value,
            (a.value - b.value).abs()
        );
    }
    Ok(())
}
