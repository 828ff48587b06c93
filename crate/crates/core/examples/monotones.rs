//! The four nonlocality quantifiers, and an LOSR wiring under which the
//! uniform-input one grows fourfold.
//!
//! Run with `cargo run --release --example monotones`.

use bellwire::behavior::{pr_box, tsirelson_four_setting};
use bellwire::monotones::{s_c, s_nl, s_u, s_uc, MonotoneResult};
use bellwire::wirings::presets::appendix_f_losr;

fn show(r: &MonotoneResult) {
    println!(
        "  {:<3} = {:.9} bits  (gap {:.1e}{})",
        r.quantifier.name(),
        r.value,
        r.gap_estimate,
        if r.is_lower_bound {
            ", lower bound"
        } else {
            ""
        }
    );
}

fn main() -> bellwire::Result<()> {
    let tol = 1e-7;
    let pr = pr_box();
    println!(
        "PR box (exact value log2(4/3) = {:.9}):",
        (4.0f64 / 3.0).log2()
    );
    for r in [
        s_nl(&pr, tol)?,
        s_u(&pr, tol)?,
        s_uc(&pr, tol, 8, 0)?,
        s_c(&pr, tol)?,
    ] {
        show(&r);
    }
    let nl = s_nl(&pr, tol)?;
    if let Some(d) = &nl.optimizer_inputs {
        println!("  most informative inputs: {:?}", d.weights());
    }

    let p0 = tsirelson_four_setting();
    let pf = appendix_f_losr().apply(&p0)?;
    let (v0, vf) = (s_u(&p0, 1e-6)?, s_u(&pf, 1e-6)?);
    println!("four-setting Tsirelson box before and after the mod-2 wiring:");
    show(&v0);
    show(&vf);
    println!(
        "  ratio {:.6}: the uniform-input quantifier is not monotone",
        vf.value / v0.value
    );
    Ok(())
}
