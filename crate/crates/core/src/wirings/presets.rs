//! The two wirings used in the reproduction experiments.

use super::{Channel, LocalBox, LosrWiring, OneWayBranch, UclosrWiring, WpiccWiring};
use crate::behavior::{appendix_c_scenario, four_setting_scenario};

/// Bob presses his only button during preparation and sends `b`; Alice then
/// uses `x = b` whatever `chi` is, and both parties output their own dits.
/// The result is `P_f(alpha,beta|chi) = P(alpha,beta|x=beta)`.
pub fn appendix_c_wpicc() -> WpiccWiring {
    let sc = appendix_c_scenario();
    let inputs = (0..sc.r_b)
        .map(|b| Channel::deterministic(sc.s_a, sc.s_a, move |_| b).expect("deterministic"))
        .collect();
    let boxes = (0..sc.r_b)
        .map(|b| {
            let alice = Channel::deterministic(sc.s_a * sc.s_a * sc.r_a, sc.r_a, |u| u % sc.r_a)
                .expect("deterministic");
            let bob = Channel::deterministic(sc.s_b, sc.r_b, move |_| b).expect("deterministic");
            LocalBox::product(alice, bob)
        })
        .collect();
    WpiccWiring {
        initial: sc,
        final_scenario: sc,
        branch_probabilities: [0.0, 0.0, 0.0, 1.0, 0.0],
        a_to_b: None,
        b_to_a: None,
        a_only: None,
        b_only: Some(OneWayBranch {
            first: vec![1.0],
            inputs,
            boxes,
        }),
        none: None,
    }
}

/// Each party feeds `chi mod 2` (resp. `psi mod 2`) into the four-setting
/// box and outputs what it gets, so every final setting pair reuses the
/// two-setting block of the initial box.
pub fn appendix_f_losr() -> LosrWiring {
    let sc = four_setting_scenario();
    UclosrWiring::deterministic(
        sc,
        sc,
        |chi| chi % 2,
        |psi| psi % 2,
        |a, _, _| a,
        |b, _, _| b,
    )
    .expect("deterministic")
    .to_losr()
}
