//! Wirings with prior-to-input classical communication: a five-way mixture
//! over who measures the initial box during the preparation phase.

use serde::{Deserialize, Serialize};

use super::{finish, Channel, LocalBox, LosrWiring, WIRING_TOL};
use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};
use crate::geometry::is_no_signaling;

/// Both parties measure during preparation, one after the other, and share
/// all four dits. For the Bob-first branch, `first` is `D_Y(y)`, `second`
/// maps `y * rB + b -> x`, and `boxes[((x * sB + y) * rA + a) * rB + b]` is
/// the local box `O_{a,b,x,y}(alpha,beta|chi,psi)`. The Alice-first branch
/// mirrors this with `first = D_X(x)` and `second: x * rA + a -> y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutualBranch {
    pub first: Vec<f64>,
    pub second: Channel,
    pub boxes: Vec<LocalBox>,
}

/// Only one party measures during preparation and sends its dits. For the
/// Bob-only branch, `first` is `D_Y(y)` and, for `j = y * rB + b`,
/// `inputs[j]` is `I_{b,y}(x|chi)` and `boxes[j]` is the local box
/// `O_{b,y}(alpha,beta|a,x,chi,psi)` with Alice input `(chi * sA + x) * rA + a`
/// and Bob input `psi`. The Alice-only branch mirrors this with
/// `j = x * rA + a`, `inputs[j] = I_{a,x}(y|psi)`, Alice input `chi` and Bob
/// input `(psi * sB + y) * rB + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneWayBranch {
    pub first: Vec<f64>,
    pub inputs: Vec<Channel>,
    pub boxes: Vec<LocalBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WpiccBranch {
    AToB,
    BToA,
    AOnly,
    BOnly,
    None,
}

impl WpiccBranch {
    pub const ALL: [WpiccBranch; 5] =
        [Self::AToB, Self::BToA, Self::AOnly, Self::BOnly, Self::None];
    pub const MEASURING: [WpiccBranch; 4] = [Self::AToB, Self::BToA, Self::AOnly, Self::BOnly];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Branch probabilities are ordered `(A->B, B->A, A only, B only, none)`.
/// A branch may be omitted only when its probability is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WpiccWiring {
    pub initial: Scenario,
    pub final_scenario: Scenario,
    pub branch_probabilities: [f64; 5],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_to_b: Option<MutualBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_to_a: Option<MutualBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_only: Option<OneWayBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_only: Option<OneWayBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub none: Option<LosrWiring>,
}

/// No-signaling tolerance for the WPICC domain check.
pub const WPICC_NS_TOL: f64 = 1e-9;

fn check_distribution(d: &[f64], len: usize, what: &str) -> Result<()> {
    if d.len() != len {
        return Err(Error::InvalidWiring(format!(
            "{what}: expected {len} weights, found {}",
            d.len()
        )));
    }
    if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidWiring(format!(
            "{what}: negative or non-finite weight"
        )));
    }
    let total: f64 = d.iter().sum();
    if (total - 1.0).abs() > WIRING_TOL {
        return Err(Error::InvalidWiring(format!(
            "{what}: weights sum to {total}"
        )));
    }
    Ok(())
}

impl WpiccWiring {
    pub fn validate(&self) -> Result<()> {
        check_distribution(&self.branch_probabilities, 5, "branch probabilities")?;
        let (i, f) = (&self.initial, &self.final_scenario);
        let present = [
            self.a_to_b.is_some(),
            self.b_to_a.is_some(),
            self.a_only.is_some(),
            self.b_only.is_some(),
            self.none.is_some(),
        ];
        for (slot, &has) in present.iter().enumerate() {
            if self.branch_probabilities[slot] > 0.0 && !has {
                return Err(Error::InvalidWiring(format!(
                    "{:?} branch has weight but no data",
                    WpiccBranch::ALL[slot]
                )));
            }
        }
        if let Some(br) = &self.b_to_a {
            check_distribution(&br.first, i.s_b, "B->A D_Y")?;
            br.second
                .expect_shape(i.s_b * i.r_b, i.s_a, "B->A D_X|b,y")?;
            check_boxes(&br.boxes, i.len(), (f.s_a, f.r_a, f.s_b, f.r_b))?;
        }
        if let Some(br) = &self.a_to_b {
            check_distribution(&br.first, i.s_a, "A->B D_X")?;
            br.second
                .expect_shape(i.s_a * i.r_a, i.s_b, "A->B D_Y|a,x")?;
            check_boxes(&br.boxes, i.len(), (f.s_a, f.r_a, f.s_b, f.r_b))?;
        }
        if let Some(br) = &self.b_only {
            let n = i.s_b * i.r_b;
            check_distribution(&br.first, i.s_b, "B-only D_Y")?;
            check_channels(&br.inputs, n, f.s_a, i.s_a, "B-only input maps")?;
            check_boxes(&br.boxes, n, (f.s_a * i.s_a * i.r_a, f.r_a, f.s_b, f.r_b))?;
        }
        if let Some(br) = &self.a_only {
            let n = i.s_a * i.r_a;
            check_distribution(&br.first, i.s_a, "A-only D_X")?;
            check_channels(&br.inputs, n, f.s_b, i.s_b, "A-only input maps")?;
            check_boxes(&br.boxes, n, (f.s_a, f.r_a, f.s_b * i.s_b * i.r_b, f.r_b))?;
        }
        if let Some(w) = &self.none {
            w.validate()?;
            if w.initial() != *i || w.final_scenario() != *f {
                return Err(Error::InvalidWiring(
                    "no-communication branch has different scenarios".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn probability(&self, branch: WpiccBranch) -> f64 {
        self.branch_probabilities[branch.slot()]
    }

    fn check_domain(&self, p: &Behavior) -> Result<()> {
        self.initial.ensure_same(p.scenario())?;
        let report = is_no_signaling(p, WPICC_NS_TOL);
        if !report.no_signaling {
            return Err(Error::DomainViolation(format!(
                "WPICC wirings act on no-signaling behaviors only (residual {:e})",
                report.max_residual
            )));
        }
        Ok(())
    }

    /// Adds `weight` times the given branch's output into `out`.
    fn accumulate(&self, branch: WpiccBranch, p: &Behavior, weight: f64, out: &mut [f64]) {
        let (i, f) = (self.initial, self.final_scenario);
        match branch {
            WpiccBranch::BToA | WpiccBranch::AToB => {
                let (br, bob_first) = match branch {
                    WpiccBranch::BToA => (self.b_to_a.as_ref(), true),
                    _ => (self.a_to_b.as_ref(), false),
                };
                let Some(br) = br else { return };
                for x in 0..i.s_a {
                    for y in 0..i.s_b {
                        for a in 0..i.r_a {
                            for b in 0..i.r_b {
                                let prep = if bob_first {
                                    br.first[y] * br.second.get(y * i.r_b + b, x)
                                } else {
                                    br.first[x] * br.second.get(x * i.r_a + a, y)
                                };
                                let c = weight * prep * p.get(x, y, a, b);
                                if c == 0.0 {
                                    continue;
                                }
                                let o = &br.boxes[i.index(x, y, a, b)];
                                for chi in 0..f.s_a {
                                    for psi in 0..f.s_b {
                                        for alpha in 0..f.r_a {
                                            for beta in 0..f.r_b {
                                                out[f.index(chi, psi, alpha, beta)] +=
                                                    c * o.get(alpha, beta, chi, psi);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            WpiccBranch::BOnly => {
                let Some(br) = &self.b_only else { return };
                for y in 0..i.s_b {
                    for b in 0..i.r_b {
                        let j = y * i.r_b + b;
                        for x in 0..i.s_a {
                            for a in 0..i.r_a {
                                let c = weight * br.first[y] * p.get(x, y, a, b);
                                if c == 0.0 {
                                    continue;
                                }
                                for chi in 0..f.s_a {
                                    let ci = c * br.inputs[j].get(chi, x);
                                    if ci == 0.0 {
                                        continue;
                                    }
                                    let u = (chi * i.s_a + x) * i.r_a + a;
                                    for psi in 0..f.s_b {
                                        for alpha in 0..f.r_a {
                                            for beta in 0..f.r_b {
                                                out[f.index(chi, psi, alpha, beta)] +=
                                                    ci * br.boxes[j].get(alpha, beta, u, psi);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            WpiccBranch::AOnly => {
                let Some(br) = &self.a_only else { return };
                for x in 0..i.s_a {
                    for a in 0..i.r_a {
                        let j = x * i.r_a + a;
                        for y in 0..i.s_b {
                            for b in 0..i.r_b {
                                let c = weight * br.first[x] * p.get(x, y, a, b);
                                if c == 0.0 {
                                    continue;
                                }
                                for psi in 0..f.s_b {
                                    let ci = c * br.inputs[j].get(psi, y);
                                    if ci == 0.0 {
                                        continue;
                                    }
                                    let v = (psi * i.s_b + y) * i.r_b + b;
                                    for chi in 0..f.s_a {
                                        for alpha in 0..f.r_a {
                                            for beta in 0..f.r_b {
                                                out[f.index(chi, psi, alpha, beta)] +=
                                                    ci * br.boxes[j].get(alpha, beta, chi, v);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            WpiccBranch::None => {
                if let Some(w) = &self.none {
                    for c in &w.components {
                        c.wiring.accumulate(p, weight * c.weight, out);
                    }
                }
            }
        }
    }

    /// The full five-branch mixture. Refuses signaling inputs.
    pub fn apply(&self, p: &Behavior) -> Result<Behavior> {
        self.check_domain(p)?;
        let mut out = vec![0.0; self.final_scenario.len()];
        for branch in WpiccBranch::ALL {
            let w = self.probability(branch);
            if w > 0.0 {
                self.accumulate(branch, p, w, &mut out);
            }
        }
        finish(self.final_scenario, out)
    }

    /// Output of one branch on its own, as if it had probability one.
    pub fn apply_branch(&self, branch: WpiccBranch, p: &Behavior) -> Result<Behavior> {
        self.check_domain(p)?;
        let present = match branch {
            WpiccBranch::AToB => self.a_to_b.is_some(),
            WpiccBranch::BToA => self.b_to_a.is_some(),
            WpiccBranch::AOnly => self.a_only.is_some(),
            WpiccBranch::BOnly => self.b_only.is_some(),
            WpiccBranch::None => self.none.is_some(),
        };
        if !present {
            return Err(Error::InvalidWiring(format!(
                "{branch:?} branch is not defined"
            )));
        }
        let mut out = vec![0.0; self.final_scenario.len()];
        self.accumulate(branch, p, 1.0, &mut out);
        finish(self.final_scenario, out)
    }

    /// `p L(P) + (1 - p) W_LOSR(P)` evaluated term by term, where `p` is the
    /// total measuring probability and `L(P)` the normalized mixture of the
    /// measuring branches. Returns `(p, L(P), W_LOSR(P), combined)`; absent
    /// terms are `None`.
    pub fn simplified_form(&self, p: &Behavior) -> Result<SimplifiedForm> {
        let f = self.final_scenario;
        let measuring: f64 = WpiccBranch::MEASURING
            .iter()
            .map(|&b| self.probability(b))
            .sum();
        let local_part = if measuring > 0.0 {
            let mut acc = vec![0.0; f.len()];
            for b in WpiccBranch::MEASURING {
                let w = self.probability(b);
                if w > 0.0 {
                    let out = self.apply_branch(b, p)?;
                    for (d, v) in acc.iter_mut().zip(out.entries()) {
                        *d += w / measuring * v;
                    }
                }
            }
            Some(finish(f, acc)?)
        } else {
            None
        };
        let losr_part = match (&self.none, self.probability(WpiccBranch::None) > 0.0) {
            (Some(w), true) => Some(w.apply(p)?),
            _ => None,
        };
        let combined = match (&local_part, &losr_part) {
            (Some(l), Some(r)) => l.mix(r, measuring)?,
            (Some(l), None) => l.clone(),
            (None, Some(r)) => r.clone(),
            (None, None) => unreachable!("branch probabilities sum to one"),
        };
        Ok(SimplifiedForm {
            measuring_probability: measuring,
            local_part,
            losr_part,
            combined,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimplifiedForm {
    pub measuring_probability: f64,
    pub local_part: Option<Behavior>,
    pub losr_part: Option<Behavior>,
    pub combined: Behavior,
}

fn check_boxes(
    boxes: &[LocalBox],
    count: usize,
    shape: (usize, usize, usize, usize),
) -> Result<()> {
    if boxes.len() != count {
        return Err(Error::InvalidWiring(format!(
            "expected {count} measurement boxes, found {}",
            boxes.len()
        )));
    }
    for b in boxes {
        b.validate_shape(shape.0, shape.1, shape.2, shape.3)?;
    }
    Ok(())
}

fn check_channels(
    channels: &[Channel],
    count: usize,
    inputs: usize,
    outputs: usize,
    what: &str,
) -> Result<()> {
    if channels.len() != count {
        return Err(Error::InvalidWiring(format!(
            "{what}: expected {count} maps, found {}",
            channels.len()
        )));
    }
    for c in channels {
        c.expect_shape(inputs, outputs, what)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{named_behavior, NamedBehavior};
    use crate::geometry::{is_local, random_local_behavior, random_ns_behavior};
    use crate::wirings::presets::appendix_c_wpicc;
    use crate::wirings::random::{random_losr, random_wpicc};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn appendix_c_table() {
        let e = 0.125;
        let p0 = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: e }).unwrap();
        let w = appendix_c_wpicc();
        let pf = w.apply(&p0).unwrap();
        // P_f(alpha,beta|chi) = P0(alpha,beta|x=beta)
        for chi in 0..2 {
            assert_eq!(pf.get(chi, 0, 0, 0), 0.5 - e);
            assert_eq!(pf.get(chi, 0, 0, 1), e);
            assert_eq!(pf.get(chi, 0, 1, 0), e);
            assert_eq!(pf.get(chi, 0, 1, 1), 0.5 - e);
        }
    }

    #[test]
    fn rejects_signaling_input() {
        let sc = Scenario::new(2, 2, 1, 2).unwrap();
        let p =
            Behavior::from_fn(sc, |x, _, a, b| if a == 0 && b == x { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(
            appendix_c_wpicc().apply(&p),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn pure_none_branch_is_losr() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sc = Scenario::chsh();
        let losr = random_losr(&sc, &sc, 2, &mut rng);
        let w = WpiccWiring {
            initial: sc,
            final_scenario: sc,
            branch_probabilities: [0.0, 0.0, 0.0, 0.0, 1.0],
            a_to_b: None,
            b_to_a: None,
            a_only: None,
            b_only: None,
            none: Some(losr.clone()),
        };
        w.validate().unwrap();
        let p = random_ns_behavior(&sc, 1);
        assert!(w.apply(&p).unwrap().max_abs_diff(&losr.apply(&p).unwrap()) < 1e-15);
    }

    #[test]
    fn simplified_form_agrees_and_branches_are_local() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let i = Scenario::chsh();
        let f = Scenario::new(2, 2, 3, 2).unwrap();
        for seed in 0..10 {
            let w = random_wpicc(&i, &f, &mut rng);
            w.validate().unwrap();
            let p = random_ns_behavior(&i, seed);
            let direct = w.apply(&p).unwrap();
            let simple = w.simplified_form(&p).unwrap();
            assert!(direct.max_abs_diff(&simple.combined) < 1e-12);
            for b in WpiccBranch::MEASURING {
                let out = w.apply_branch(b, &p).unwrap();
                assert!(is_local(&out, 1e-8).unwrap().is_local(), "{b:?}");
            }
        }
    }

    #[test]
    fn local_inputs_stay_local() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sc = Scenario::chsh();
        for seed in 0..10 {
            let w = random_wpicc(&sc, &sc, &mut rng);
            let p = random_local_behavior(&sc, seed).unwrap();
            assert!(is_local(&w.apply(&p).unwrap(), 1e-8).unwrap().is_local());
        }
    }
}
