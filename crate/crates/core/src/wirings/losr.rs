use serde::{Deserialize, Serialize};

use super::{finish, Channel, GlobalWiring, WIRING_TOL};
use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};

/// An uncorrelated local wiring: each party pre- and post-processes on its own
/// with no shared randomness.
///
/// Channel layouts:
/// - `input_a`: `chi -> x`, `input_b`: `psi -> y`
/// - `output_a`: `(chi * sA + x) * rA + a -> alpha`
/// - `output_b`: `(psi * sB + y) * rB + b -> beta`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UclosrWiring {
    pub initial: Scenario,
    pub final_scenario: Scenario,
    pub input_a: Channel,
    pub input_b: Channel,
    pub output_a: Channel,
    pub output_b: Channel,
}

impl UclosrWiring {
    pub fn new(
        initial: Scenario,
        final_scenario: Scenario,
        input_a: Channel,
        input_b: Channel,
        output_a: Channel,
        output_b: Channel,
    ) -> Result<Self> {
        let w = Self {
            initial,
            final_scenario,
            input_a,
            input_b,
            output_a,
            output_b,
        };
        w.validate()?;
        Ok(w)
    }

    /// Builds the four maps from deterministic functions
    /// `chi -> x`, `psi -> y`, `(a, x, chi) -> alpha`, `(b, y, psi) -> beta`.
    pub fn deterministic(
        initial: Scenario,
        final_scenario: Scenario,
        in_a: impl Fn(usize) -> usize,
        in_b: impl Fn(usize) -> usize,
        out_a: impl Fn(usize, usize, usize) -> usize,
        out_b: impl Fn(usize, usize, usize) -> usize,
    ) -> Result<Self> {
        let (i, f) = (initial, final_scenario);
        Self::new(
            i,
            f,
            Channel::deterministic(f.s_a, i.s_a, in_a)?,
            Channel::deterministic(f.s_b, i.s_b, in_b)?,
            Channel::deterministic(f.s_a * i.s_a * i.r_a, f.r_a, |u| {
                out_a(u % i.r_a, (u / i.r_a) % i.s_a, u / (i.r_a * i.s_a))
            })?,
            Channel::deterministic(f.s_b * i.s_b * i.r_b, f.r_b, |v| {
                out_b(v % i.r_b, (v / i.r_b) % i.s_b, v / (i.r_b * i.s_b))
            })?,
        )
    }

    pub fn identity(scenario: Scenario) -> Self {
        Self::deterministic(scenario, scenario, |c| c, |c| c, |a, _, _| a, |b, _, _| b)
            .expect("identity")
    }

    pub fn validate(&self) -> Result<()> {
        let (i, f) = (&self.initial, &self.final_scenario);
        self.input_a.expect_shape(f.s_a, i.s_a, "Alice input map")?;
        self.input_b.expect_shape(f.s_b, i.s_b, "Bob input map")?;
        self.output_a
            .expect_shape(f.s_a * i.s_a * i.r_a, f.r_a, "Alice output map")?;
        self.output_b
            .expect_shape(f.s_b * i.s_b * i.r_b, f.r_b, "Bob output map")
    }

    #[inline]
    pub(crate) fn alice_out(&self, alpha: usize, a: usize, x: usize, chi: usize) -> f64 {
        let i = &self.initial;
        self.output_a.get((chi * i.s_a + x) * i.r_a + a, alpha)
    }

    #[inline]
    pub(crate) fn bob_out(&self, beta: usize, b: usize, y: usize, psi: usize) -> f64 {
        let i = &self.initial;
        self.output_b.get((psi * i.s_b + y) * i.r_b + b, beta)
    }

    /// Adds `weight * W(p)` into `out` (flat final-scenario entries).
    pub(crate) fn accumulate(&self, p: &Behavior, weight: f64, out: &mut [f64]) {
        let (i, f) = (self.initial, self.final_scenario);
        for chi in 0..f.s_a {
            for psi in 0..f.s_b {
                for x in 0..i.s_a {
                    let wa = weight * self.input_a.get(chi, x);
                    if wa == 0.0 {
                        continue;
                    }
                    for y in 0..i.s_b {
                        let wi = wa * self.input_b.get(psi, y);
                        if wi == 0.0 {
                            continue;
                        }
                        for a in 0..i.r_a {
                            for b in 0..i.r_b {
                                let c = wi * p.get(x, y, a, b);
                                if c == 0.0 {
                                    continue;
                                }
                                for alpha in 0..f.r_a {
                                    let ca = c * self.alice_out(alpha, a, x, chi);
                                    if ca == 0.0 {
                                        continue;
                                    }
                                    for beta in 0..f.r_b {
                                        out[f.index(chi, psi, alpha, beta)] +=
                                            ca * self.bob_out(beta, b, y, psi);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn apply(&self, p: &Behavior) -> Result<Behavior> {
        self.initial.ensure_same(p.scenario())?;
        let mut out = vec![0.0; self.final_scenario.len()];
        self.accumulate(p, 1.0, &mut out);
        finish(self.final_scenario, out)
    }

    /// The same wiring as a one-component LOSR wiring.
    pub fn to_losr(&self) -> LosrWiring {
        LosrWiring {
            components: vec![LosrComponent {
                weight: 1.0,
                wiring: self.clone(),
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosrComponent {
    pub weight: f64,
    pub wiring: UclosrWiring,
}

/// Local operations with shared randomness, stored as an explicit mixture of
/// uncorrelated local wirings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosrWiring {
    pub components: Vec<LosrComponent>,
}

impl LosrWiring {
    pub fn new(components: Vec<LosrComponent>) -> Result<Self> {
        let w = Self { components };
        w.validate()?;
        Ok(w)
    }

    pub fn identity(scenario: Scenario) -> Self {
        UclosrWiring::identity(scenario).to_losr()
    }

    pub fn initial(&self) -> Scenario {
        self.components[0].wiring.initial
    }

    pub fn final_scenario(&self) -> Scenario {
        self.components[0].wiring.final_scenario
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.components.first() else {
            return Err(Error::InvalidWiring(
                "LOSR wiring without components".into(),
            ));
        };
        let mut total = 0.0;
        for c in &self.components {
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(Error::InvalidWiring(format!(
                    "component weight {}",
                    c.weight
                )));
            }
            if c.wiring.initial != first.wiring.initial
                || c.wiring.final_scenario != first.wiring.final_scenario
            {
                return Err(Error::InvalidWiring(
                    "components disagree on scenarios".into(),
                ));
            }
            c.wiring.validate()?;
            total += c.weight;
        }
        if (total - 1.0).abs() > WIRING_TOL {
            return Err(Error::InvalidWiring(format!(
                "shared-randomness weights sum to {total}"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, p: &Behavior) -> Result<Behavior> {
        self.initial().ensure_same(p.scenario())?;
        let mut out = vec![0.0; self.final_scenario().len()];
        for c in &self.components {
            c.wiring.accumulate(p, c.weight, &mut out);
        }
        finish(self.final_scenario(), out)
    }

    /// Dense tables with the shared randomness summed out: `I` is the
    /// weighted sum of input maps and `O` the posterior-weighted output maps.
    pub fn to_global(&self) -> GlobalWiring {
        let (i, f) = (self.initial(), self.final_scenario());
        let k = f.outcomes();
        let mut input = vec![0.0; GlobalWiring::input_len(&i, &f)];
        let mut output = vec![0.0; GlobalWiring::output_len(&i, &f)];
        let mut slot = 0;
        for chi in 0..f.s_a {
            for psi in 0..f.s_b {
                for x in 0..i.s_a {
                    for y in 0..i.s_b {
                        let idx = slot;
                        slot += 1;
                        let mut total = 0.0;
                        for c in &self.components {
                            total += c.weight
                                * c.wiring.input_a.get(chi, x)
                                * c.wiring.input_b.get(psi, y);
                        }
                        input[idx] = total;
                        for a in 0..i.r_a {
                            for b in 0..i.r_b {
                                let start = ((idx * i.r_a + a) * i.r_b + b) * k;
                                let block = &mut output[start..start + k];
                                // Unreachable conditionings fall back to the prior mixture of
                                // output maps; they never contribute to an application.
                                let reachable = total > 0.0;
                                for c in &self.components {
                                    let w = &c.wiring;
                                    let joint = if reachable {
                                        c.weight * w.input_a.get(chi, x) * w.input_b.get(psi, y)
                                    } else {
                                        c.weight
                                    };
                                    if joint == 0.0 {
                                        continue;
                                    }
                                    for alpha in 0..f.r_a {
                                        let ca = joint * w.alice_out(alpha, a, x, chi);
                                        for beta in 0..f.r_b {
                                            block[alpha * f.r_b + beta] +=
                                                ca * w.bob_out(beta, b, y, psi);
                                        }
                                    }
                                }
                                if reachable {
                                    block.iter_mut().for_each(|v| *v /= total);
                                }
                            }
                        }
                    }
                }
            }
        }
        GlobalWiring {
            initial: i,
            final_scenario: f,
            input,
            output,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::pr_box;
    use crate::geometry::random_ns_behavior;
    use crate::wirings::random::random_losr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn output_relabeling() {
        let sc = Scenario::chsh();
        let w = UclosrWiring::deterministic(sc, sc, |c| c, |c| c, |a, _, _| a ^ 1, |b, _, _| b)
            .unwrap();
        let p = random_ns_behavior(&sc, 4);
        let out = w.apply(&p).unwrap();
        for (x, y, a, b) in (0..16).map(|i| (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1)) {
            assert_eq!(out.get(x, y, a, b), p.get(x, y, a ^ 1, b));
        }
    }

    #[test]
    fn constant_local_box() {
        // Ignore the box and output alpha = chi, beta = 0.
        let sc = Scenario::chsh();
        let w = UclosrWiring::deterministic(sc, sc, |_| 0, |_| 0, |_, _, chi| chi, |_, _, _| 0)
            .unwrap();
        let out = w.apply(&pr_box()).unwrap();
        let expected =
            Behavior::from_fn(sc, |x, _, a, b| if a == x && b == 0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn identity_roundtrips_to_identity_gw() {
        let sc = Scenario::new(2, 3, 2, 2).unwrap();
        assert_eq!(
            LosrWiring::identity(sc).to_global(),
            GlobalWiring::identity(sc)
        );
    }

    #[test]
    fn dense_form_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let i = Scenario::chsh();
        let f = Scenario::new(3, 2, 2, 3).unwrap();
        for seed in 0..10 {
            let w = random_losr(&i, &f, 3, &mut rng);
            let gw = w.to_global();
            gw.validate().unwrap();
            let p = random_ns_behavior(&i, seed);
            assert!(gw.apply(&p).unwrap().max_abs_diff(&w.apply(&p).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn two_relabelings_average() {
        let sc = Scenario::chsh();
        let id = UclosrWiring::identity(sc);
        let flip =
            UclosrWiring::deterministic(sc, sc, |c| 1 - c, |c| c, |a, _, _| a, |b, _, _| 1 - b)
                .unwrap();
        let w = LosrWiring::new(vec![
            LosrComponent {
                weight: 0.5,
                wiring: id.clone(),
            },
            LosrComponent {
                weight: 0.5,
                wiring: flip.clone(),
            },
        ])
        .unwrap();
        let gw = w.to_global();
        let (g1, g2) = (id.to_losr().to_global(), flip.to_losr().to_global());
        for j in 0..gw.input.len() {
            assert!((gw.input[j] - 0.5 * (g1.input[j] + g2.input[j])).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_weights() {
        let sc = Scenario::chsh();
        let c = LosrComponent {
            weight: 0.6,
            wiring: UclosrWiring::identity(sc),
        };
        assert!(LosrWiring::new(vec![c.clone(), c]).is_err());
        assert!(LosrWiring::new(vec![]).is_err());
    }
}
