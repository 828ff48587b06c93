//! Membership in the local polytope, with a local model or a Bell
//! functional as certificate.
//!
//! Run with `cargo run --example local_polytope`.

use bellwire::behavior::{pr_box, Behavior, Scenario};
use bellwire::geometry::{
    is_local, random_local_behavior, LocalPolytope, Locality, DEFAULT_VERTEX_CAP,
};

fn describe(name: &str, verdict: &Locality) {
    match verdict {
        Locality::Local(model) => {
            println!(
                "{name}: local, {} deterministic strategies with weight",
                model.weights.len()
            );
            for w in &model.weights {
                println!("    {:.4}  alice {:?}  bob {:?}", w.weight, w.alice, w.bob);
            }
        }
        Locality::Nonlocal(cert) => {
            println!(
                "{name}: nonlocal, functional value {:.6} > local bound {:.6}",
                cert.value_on_behavior, cert.local_bound
            );
        }
    }
}

fn main() -> bellwire::Result<()> {
    let sc = Scenario::chsh();
    let poly = LocalPolytope::new(sc, DEFAULT_VERTEX_CAP)?;
    println!("(2,2,2,2) has {} local vertices", poly.len());

    let pr = pr_box();
    let noise = Behavior::white_noise(sc);
    describe("PR box", &is_local(&pr, 1e-8)?);

    // The PR box stays nonlocal above visibility 1/2.
    for v in [0.4, 0.5, 0.6] {
        describe(
            &format!("PR at visibility {v}"),
            &is_local(&pr.mix(&noise, v)?, 1e-8)?,
        );
    }

    let random = random_local_behavior(&sc, 42)?;
    if let Locality::Local(model) = is_local(&random, 1e-8)? {
        let rebuilt = model.reconstruct()?;
        println!(
            "random local behavior reconstructed to within {:e}",
            rebuilt.max_abs_diff(&random)
        );
    }

    // Larger scenarios enumerate (rA^sA)(rB^sB) vertices; the cap guards memory.
    match LocalPolytope::new(Scenario::new(6, 3, 6, 3)?, 100_000) {
        Err(e) => println!("(6,3,6,3): {e}"),
        Ok(p) => println!("(6,3,6,3): {} vertices", p.len()),
    }
    Ok(())
}
