//! Relative entropies between behaviors, in bits.

use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, InputDistribution};
use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;

/// A divergence in bits, possibly `+inf`, with the maximizing setting when
/// one is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    pub bits: f64,
    pub argmax: Option<(usize, usize)>,
}

impl DivergenceValue {
    pub fn is_infinite(&self) -> bool {
        self.bits.is_infinite()
    }
}

impl Serialize for DivergenceValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DivergenceValue", 2)?;
        if self.bits.is_infinite() {
            st.serialize_field("bits", "inf")?;
        } else {
            st.serialize_field("bits", &self.bits)?;
        }
        st.serialize_field("argmax", &self.argmax.map(|(x, y)| [x, y]))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DivergenceValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Bits {
            Finite(f64),
            Tag(String),
        }
        #[derive(Deserialize)]
        struct Raw {
            bits: Bits,
            argmax: Option<[usize; 2]>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let bits = match raw.bits {
            Bits::Finite(v) => v,
            Bits::Tag(t) if t == "inf" => f64::INFINITY,
            Bits::Tag(t) => return Err(de::Error::custom(format!("unexpected bits value `{t}`"))),
        };
        Ok(Self {
            bits,
            argmax: raw.argmax.map(|[x, y]| (x, y)),
        })
    }
}

/// `sum_z q(z) log2(q(z)/q'(z))` without validation.
pub(crate) fn kl_unchecked(q: &[f64], q_prime: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in q.iter().zip(q_prime) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            total += a * (a / b).log2();
        }
    }
    // Rounding can push tiny values below zero.
    total.max(0.0)
}

/// Kullback-Leibler divergence of two finite distributions, in bits.
pub fn kl(q: &[f64], q_prime: &[f64]) -> Result<DivergenceValue> {
    if q.len() != q_prime.len() {
        return Err(Error::IndexMismatch(q.len(), q_prime.len()));
    }
    for dist in [q, q_prime] {
        if let Some(i) = dist.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = dist.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeEntry {
                index: i,
                value: dist[i],
            });
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
    }
    Ok(DivergenceValue {
        bits: kl_unchecked(q, q_prime),
        argmax: None,
    })
}

/// KL divergence of each setting block, in `[x][y]` order.
pub fn setting_divergences(p: &Behavior, p_prime: &Behavior) -> Result<Vec<f64>> {
    p.scenario().ensure_same(p_prime.scenario())?;
    let sc = p.scenario();
    Ok((0..sc.settings())
        .map(|s| kl_unchecked(p.setting_block(s), p_prime.setting_block(s)))
        .collect())
}

/// `sum_{x,y} D(x,y) S(P(.|x,y) || P'(.|x,y))`.
pub fn conditional_re(
    p: &Behavior,
    p_prime: &Behavior,
    d: &InputDistribution,
) -> Result<DivergenceValue> {
    d.matches(p.scenario())?;
    let per_setting = setting_divergences(p, p_prime)?;
    let mut total = 0.0;
    for (&w, &s) in d.weights().iter().zip(&per_setting) {
        if w > 0.0 {
            total += w * s;
        }
    }
    Ok(DivergenceValue {
        bits: total,
        argmax: None,
    })
}

/// Largest per-setting divergence; ties go to the lexicographically first
/// setting.
pub fn behavior_re(p: &Behavior, p_prime: &Behavior) -> Result<DivergenceValue> {
    let per_setting = setting_divergences(p, p_prime)?;
    let s_b = p.scenario().s_b;
    let mut best = 0;
    for (s, &v) in per_setting.iter().enumerate() {
        if v > per_setting[best] {
            best = s;
        }
    }
    Ok(DivergenceValue {
        bits: per_setting[best],
        argmax: Some((best / s_b, best % s_b)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{named_behavior, product_with_inputs, NamedBehavior, Scenario};

    fn closed_form(e: f64) -> f64 {
        (0.5 - 2.0 * e) * ((0.5 - e) / e).log2()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(kl(&[0.3, 0.7], &[0.3, 0.7]).unwrap().bits, 0.0);
        assert_eq!(kl(&[1.0, 0.0], &[0.5, 0.5]).unwrap().bits, 1.0);
        assert!(kl(&[0.5, 0.5], &[1.0, 0.0]).unwrap().is_infinite());
        assert!(matches!(
            kl(&[1.0], &[0.5, 0.5]),
            Err(Error::IndexMismatch(1, 2))
        ));
        assert!(matches!(
            kl(&[0.5, 0.6], &[0.5, 0.5]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn appendix_c_columns() {
        let v = kl(&[0.375, 0.125, 0.125, 0.375], &[0.125, 0.375, 0.125, 0.375])
            .unwrap()
            .bits;
        let four_terms = 0.375 * 3f64.log2() + 0.125 * (1.0f64 / 3.0).log2();
        assert!((v - 0.25 * 3f64.log2()).abs() < 1e-15);
        assert!((v - four_terms).abs() < 1e-15);
        assert!((v - 0.396_240_625_180_289_1).abs() < 1e-12);
        assert!((v - closed_form(0.125)).abs() < 1e-15);
    }

    #[test]
    fn behavior_re_appendix_c() {
        for e in [0.05, 0.1, 0.125, 0.2, 0.3, 0.45] {
            let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: e }).unwrap();
            let q = named_behavior(&NamedBehavior::AppendixCP0Prime { epsilon: e }).unwrap();
            let v = behavior_re(&p, &q).unwrap();
            assert!((v.bits - closed_form(e)).abs() < 1e-12, "eps {e}");
            assert_eq!(v.argmax, Some((0, 0)));
            let uniform = InputDistribution::for_scenario_uniform(p.scenario());
            assert!(
                (conditional_re(&p, &q, &uniform).unwrap().bits - closed_form(e)).abs() < 1e-12
            );
        }
    }

    #[test]
    fn conditional_routes_agree() {
        let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: 0.2 }).unwrap();
        let q = named_behavior(&NamedBehavior::AppendixCP0Prime { epsilon: 0.2 }).unwrap();
        let d = InputDistribution::general(2, 1, vec![0.3, 0.7]).unwrap();
        let direct = conditional_re(&p, &q, &d).unwrap().bits;
        let joint_p = product_with_inputs(&p, &d).unwrap();
        let joint_q = product_with_inputs(&q, &d).unwrap();
        let via_joint = kl(joint_p.entries(), joint_q.entries()).unwrap().bits;
        assert!((direct - via_joint).abs() < 1e-12);
    }

    #[test]
    fn point_mass_picks_one_setting() {
        let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: 0.1 }).unwrap();
        let q = named_behavior(&NamedBehavior::AppendixCP0Prime { epsilon: 0.1 }).unwrap();
        let d = InputDistribution::point_mass(2, 1, 1, 0).unwrap();
        let expected = kl(p.setting(1, 0), q.setting(1, 0)).unwrap().bits;
        assert_eq!(conditional_re(&p, &q, &d).unwrap().bits, expected);
    }

    #[test]
    fn scenario_mismatch() {
        let p = Behavior::white_noise(Scenario::chsh());
        let q = Behavior::white_noise(Scenario::new(2, 2, 1, 2).unwrap());
        assert!(matches!(
            behavior_re(&p, &q),
            Err(Error::ScenarioMismatch(_))
        ));
    }

    #[test]
    fn json_shape() {
        let v = DivergenceValue {
            bits: f64::INFINITY,
            argmax: None,
        };
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"bits":"inf","argmax":null}"#
        );
        let w = DivergenceValue {
            bits: 0.5,
            argmax: Some((1, 0)),
        };
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"bits":0.5,"argmax":[1,0]}"#);
        assert_eq!(serde_json::from_str::<DivergenceValue>(&text).unwrap(), w);
        assert_eq!(
            serde_json::from_str::<DivergenceValue>(r#"{"bits":"inf","argmax":null}"#).unwrap(),
            v
        );
    }
}
