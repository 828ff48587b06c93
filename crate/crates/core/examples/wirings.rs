//! Wiring classes: global, shared-randomness (LOSR), product (UCLOSR) and
//! WPICC wirings, and how they act on a box.
//!
//! Run with `cargo run --example wirings`.

use bellwire::behavior::{pr_box, Scenario};
use bellwire::geometry::is_no_signaling;
use bellwire::wirings::random::{random_gw, random_losr, random_wpicc};
use bellwire::wirings::{
    losr_to_gw, presets, uclosr_decomposition, UclosrWiring, WiringDescriptor,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bellwire::Result<()> {
    let sc = Scenario::chsh();
    let pr = pr_box();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // Alice flips her input, Bob flips his output when his input is 1.
    let flip = UclosrWiring::deterministic(
        sc,
        sc,
        |chi| 1 - chi,
        |psi| psi,
        |a, _, _| a,
        |b, _, psi| b ^ psi,
    )?;
    let flipped = flip.apply(&pr)?;
    println!(
        "relabelled PR box, setting (0,1): {:?}",
        flipped.setting(0, 1)
    );

    // A two-component shared-randomness wiring, its product components and
    // its global-wiring form agree on every input.
    let losr = random_losr(&sc, &sc, 2, &mut rng);
    let direct = losr.apply(&pr)?;
    let via_gw = losr_to_gw(&losr).apply(&pr)?;
    let components = uclosr_decomposition(&losr);
    println!(
        "LOSR with {} components: global form differs by {:e}",
        components.len(),
        direct.max_abs_diff(&via_gw)
    );

    // Global wirings may signal; LOSR and WPICC outputs never do.
    let gw = random_gw(&sc, &sc, &mut rng);
    println!(
        "random GW output no-signaling: {}",
        is_no_signaling(&gw.apply(&pr)?, 1e-9).no_signaling
    );
    let wpicc = random_wpicc(&sc, &sc, &mut rng);
    let out = wpicc.apply(&pr)?;
    println!(
        "random WPICC output no-signaling: {}",
        is_no_signaling(&out, 1e-9).no_signaling
    );

    // The simplified form: a local part plus an LOSR part.
    let form = wpicc.simplified_form(&pr)?;
    println!(
        "measuring probability {:.4}, recombined output differs by {:e}",
        form.measuring_probability,
        form.combined.max_abs_diff(&out)
    );

    // Wirings serialize with a class tag.
    let preset = WiringDescriptor::Wpicc(presets::appendix_c_wpicc());
    let json = preset.to_json();
    println!(
        "preset wiring class `{}`, {} bytes of JSON",
        WiringDescriptor::from_json(&json)?.class_name(),
        json.len()
    );
    Ok(())
}
