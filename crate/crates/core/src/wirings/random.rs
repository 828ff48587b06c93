//! Seeded random wirings for property tests and campaigns.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{
    Channel, GlobalWiring, LocalBox, LocalBoxComponent, LosrComponent, LosrWiring, MutualBranch,
    OneWayBranch, UclosrWiring, WpiccWiring,
};
use crate::behavior::Scenario;

/// Uniform draw from the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Each row is deterministic with probability 1/2, otherwise uniform on the
/// simplex.
pub fn random_channel<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Channel {
    let mut table = Vec::with_capacity(inputs * outputs);
    for _ in 0..inputs {
        if rng.random_bool(0.5) {
            let hit = rng.random_range(0..outputs);
            table.extend((0..outputs).map(|o| if o == hit { 1.0 } else { 0.0 }));
        } else {
            table.extend(random_distribution(outputs, rng));
        }
    }
    Channel::new(inputs, outputs, table).expect("rows are normalized")
}

pub fn random_uclosr<R: Rng + ?Sized>(
    initial: &Scenario,
    fin: &Scenario,
    rng: &mut R,
) -> UclosrWiring {
    let (i, f) = (initial, fin);
    UclosrWiring::new(
        *i,
        *f,
        random_channel(f.s_a, i.s_a, rng),
        random_channel(f.s_b, i.s_b, rng),
        random_channel(f.s_a * i.s_a * i.r_a, f.r_a, rng),
        random_channel(f.s_b * i.s_b * i.r_b, f.r_b, rng),
    )
    .expect("random maps have the right shapes")
}

pub fn random_losr<R: Rng + ?Sized>(
    initial: &Scenario,
    fin: &Scenario,
    components: usize,
    rng: &mut R,
) -> LosrWiring {
    let weights = random_distribution(components.max(1), rng);
    LosrWiring::new(
        weights
            .into_iter()
            .map(|weight| LosrComponent {
                weight,
                wiring: random_uclosr(initial, fin, rng),
            })
            .collect(),
    )
    .expect("valid mixture")
}

/// Arbitrary, generally signaling, dense tables.
pub fn random_gw<R: Rng + ?Sized>(initial: &Scenario, fin: &Scenario, rng: &mut R) -> GlobalWiring {
    let input = random_channel(
        GlobalWiring::input_len(initial, fin) / initial.settings(),
        initial.settings(),
        rng,
    );
    let blocks = GlobalWiring::output_len(initial, fin) / fin.outcomes();
    let output = random_channel(blocks, fin.outcomes(), rng);
    GlobalWiring::new(*initial, *fin, input.table, output.table).expect("valid tables")
}

pub fn random_local_box<R: Rng + ?Sized>(
    alice: (usize, usize),
    bob: (usize, usize),
    rng: &mut R,
) -> LocalBox {
    let n = rng.random_range(1..=3);
    let weights = random_distribution(n, rng);
    LocalBox {
        components: weights
            .into_iter()
            .map(|weight| LocalBoxComponent {
                weight,
                alice: random_channel(alice.0, alice.1, rng),
                bob: random_channel(bob.0, bob.1, rng),
            })
            .collect(),
    }
}

/// All five branches present with uniformly random probabilities.
pub fn random_wpicc<R: Rng + ?Sized>(
    initial: &Scenario,
    fin: &Scenario,
    rng: &mut R,
) -> WpiccWiring {
    let (i, f) = (*initial, *fin);
    let probs = random_distribution(5, rng);
    let mutual = |bob_first: bool, rng: &mut R| MutualBranch {
        first: if bob_first {
            random_distribution(i.s_b, rng)
        } else {
            random_distribution(i.s_a, rng)
        },
        second: if bob_first {
            random_channel(i.s_b * i.r_b, i.s_a, rng)
        } else {
            random_channel(i.s_a * i.r_a, i.s_b, rng)
        },
        boxes: (0..i.len())
            .map(|_| random_local_box((f.s_a, f.r_a), (f.s_b, f.r_b), rng))
            .collect(),
    };
    let a_to_b = mutual(false, rng);
    let b_to_a = mutual(true, rng);
    let nb = i.s_b * i.r_b;
    let b_only = OneWayBranch {
        first: random_distribution(i.s_b, rng),
        inputs: (0..nb).map(|_| random_channel(f.s_a, i.s_a, rng)).collect(),
        boxes: (0..nb)
            .map(|_| random_local_box((f.s_a * i.s_a * i.r_a, f.r_a), (f.s_b, f.r_b), rng))
            .collect(),
    };
    let na = i.s_a * i.r_a;
    let a_only = OneWayBranch {
        first: random_distribution(i.s_a, rng),
        inputs: (0..na).map(|_| random_channel(f.s_b, i.s_b, rng)).collect(),
        boxes: (0..na)
            .map(|_| random_local_box((f.s_a, f.r_a), (f.s_b * i.s_b * i.r_b, f.r_b), rng))
            .collect(),
    };
    let none = random_losr(&i, &f, 2, rng);
    let mut branch_probabilities = [0.0; 5];
    branch_probabilities.copy_from_slice(&probs);
    let w = WpiccWiring {
        initial: i,
        final_scenario: f,
        branch_probabilities,
        a_to_b: Some(a_to_b),
        b_to_a: Some(b_to_a),
        a_only: Some(a_only),
        b_only: Some(b_only),
        none: Some(none),
    };
    debug_assert!(w.validate().is_ok());
    w
}
