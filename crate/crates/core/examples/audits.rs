//! Monotonicity and convexity audits with CSV output.
//!
//! Run with `cargo run --release --example audits`.

use bellwire::behavior::{pr_box, tsirelson_four_setting, Behavior, Scenario};
use bellwire::monotones::{convexity_audit, monotonicity_audit, Quantifier, SolverOptions};
use bellwire::wirings::random::{random_uclosr, random_wpicc};
use bellwire::wirings::{presets, WiringDescriptor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bellwire::Result<()> {
    let opts = SolverOptions::default();
    let sc = Scenario::chsh();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = pr_box().mix(&Behavior::white_noise(sc), 0.9)?;

    let wpiccs: Vec<_> = (0..5)
        .map(|i| {
            (
                format!("wpicc-{i}"),
                WiringDescriptor::Wpicc(random_wpicc(&sc, &sc, &mut rng)),
            )
        })
        .collect();
    let report = monotonicity_audit(Quantifier::Snl, &p, "noisy-pr", &wpiccs, &opts)?;
    print!("{}", report.to_csv()?);

    let products: Vec<_> = (0..3)
        .map(|i| {
            (
                format!("uclosr-{i}"),
                WiringDescriptor::Uclosr(random_uclosr(&sc, &sc, &mut rng)),
            )
        })
        .collect();
    let report = monotonicity_audit(Quantifier::Suc, &p, "noisy-pr", &products, &opts)?;
    print!("{}", report.to_csv()?);

    // The uniform-input quantifier fails monotonicity on this instance.
    let grow = vec![(
        "mod-2".to_string(),
        WiringDescriptor::Losr(presets::appendix_f_losr()),
    )];
    let report = monotonicity_audit(
        Quantifier::Su,
        &tsirelson_four_setting(),
        "tsirelson",
        &grow,
        &opts,
    )?;
    println!(
        "s_u violations: {} (ratio {:.4})",
        report.violations(),
        report.rows[0].ratio()
    );

    let report = convexity_audit(Quantifier::Snl, &pr_box(), &p, &[0.25, 0.5, 0.75], &opts)?;
    print!("{}", report.to_csv()?);
    Ok(())
}
