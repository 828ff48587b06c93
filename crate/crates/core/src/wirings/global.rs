use serde::{Deserialize, Serialize};

use super::{finish, WIRING_TOL};
use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};
use crate::geometry::is_no_signaling;

/// The most general wiring: arbitrary (possibly signaling) input and output
/// boxes.
///
/// `input[((chi * sfB + psi) * sA + x) * sB + y] = I(x,y|chi,psi)`, and
/// `output` is `O(alpha,beta|a,b,x,y,chi,psi)` with conditioning order
/// `chi, psi, x, y, a, b` (most significant first) followed by `alpha, beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalWiring {
    pub initial: Scenario,
    pub final_scenario: Scenario,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

impl GlobalWiring {
    pub fn input_len(initial: &Scenario, fin: &Scenario) -> usize {
        fin.s_a * fin.s_b * initial.s_a * initial.s_b
    }

    pub fn output_len(initial: &Scenario, fin: &Scenario) -> usize {
        Self::input_len(initial, fin) * initial.outcomes() * fin.outcomes()
    }

    pub fn new(
        initial: Scenario,
        final_scenario: Scenario,
        input: Vec<f64>,
        output: Vec<f64>,
    ) -> Result<Self> {
        let w = Self {
            initial,
            final_scenario,
            input,
            output,
        };
        w.validate()?;
        Ok(w)
    }

    /// Builds the tables from `I(chi,psi,x,y)` and `O(chi,psi,x,y,a,b,alpha,beta)`.
    pub fn from_fns(
        initial: Scenario,
        final_scenario: Scenario,
        input: impl Fn(usize, usize, usize, usize) -> f64,
        output: impl Fn([usize; 8]) -> f64,
    ) -> Result<Self> {
        let (i, f) = (initial, final_scenario);
        let mut in_table = Vec::with_capacity(Self::input_len(&i, &f));
        let mut out_table = Vec::with_capacity(Self::output_len(&i, &f));
        for chi in 0..f.s_a {
            for psi in 0..f.s_b {
                for x in 0..i.s_a {
                    for y in 0..i.s_b {
                        in_table.push(input(chi, psi, x, y));
                        for a in 0..i.r_a {
                            for b in 0..i.r_b {
                                for alpha in 0..f.r_a {
                                    for beta in 0..f.r_b {
                                        out_table.push(output([chi, psi, x, y, a, b, alpha, beta]));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Self::new(initial, final_scenario, in_table, out_table)
    }

    /// `I` and `O` both copy inputs and outputs unchanged.
    pub fn identity(scenario: Scenario) -> Self {
        Self::from_fns(
            scenario,
            scenario,
            |chi, psi, x, y| if chi == x && psi == y { 1.0 } else { 0.0 },
            |[_, _, _, _, a, b, alpha, beta]| if a == alpha && b == beta { 1.0 } else { 0.0 },
        )
        .expect("identity is stochastic")
    }

    /// Ignores the initial behavior and outputs `target` directly.
    pub fn bypass(initial: Scenario, target: &Behavior) -> Self {
        Self::from_fns(
            initial,
            *target.scenario(),
            |_, _, x, y| if x == 0 && y == 0 { 1.0 } else { 0.0 },
            |[chi, psi, _, _, _, _, alpha, beta]| target.get(chi, psi, alpha, beta),
        )
        .expect("bypass is stochastic")
    }

    pub fn validate(&self) -> Result<()> {
        let (i, f) = (&self.initial, &self.final_scenario);
        let n_in = Self::input_len(i, f);
        if self.input.len() != n_in {
            return Err(Error::LengthMismatch {
                expected: n_in,
                got: self.input.len(),
            });
        }
        let n_out = Self::output_len(i, f);
        if self.output.len() != n_out {
            return Err(Error::LengthMismatch {
                expected: n_out,
                got: self.output.len(),
            });
        }
        check_columns(&self.input, i.settings(), "input box")?;
        check_columns(&self.output, f.outcomes(), "output box")
    }

    #[inline]
    fn input_index(&self, chi: usize, psi: usize, x: usize, y: usize) -> usize {
        ((chi * self.final_scenario.s_b + psi) * self.initial.s_a + x) * self.initial.s_b + y
    }

    pub fn input_prob(&self, chi: usize, psi: usize, x: usize, y: usize) -> f64 {
        self.input[self.input_index(chi, psi, x, y)]
    }

    /// The output block `O(.,.|a,b,x,y,chi,psi)` in `[alpha][beta]` order.
    pub fn output_block(
        &self,
        chi: usize,
        psi: usize,
        x: usize,
        y: usize,
        a: usize,
        b: usize,
    ) -> &[f64] {
        let i = &self.initial;
        let k = self.final_scenario.outcomes();
        let start = ((self.input_index(chi, psi, x, y) * i.r_a + a) * i.r_b + b) * k;
        &self.output[start..start + k]
    }

    /// `P_f(alpha,beta|chi,psi) = sum O(alpha,beta|a,b,x,y,chi,psi) P(a,b|x,y) I(x,y|chi,psi)`.
    pub fn apply(&self, p: &Behavior) -> Result<Behavior> {
        self.initial.ensure_same(p.scenario())?;
        let (i, f) = (self.initial, self.final_scenario);
        let k = f.outcomes();
        let mut out = vec![0.0; f.len()];
        for chi in 0..f.s_a {
            for psi in 0..f.s_b {
                let target = f.setting_index(chi, psi) * k;
                for x in 0..i.s_a {
                    for y in 0..i.s_b {
                        let wi = self.input_prob(chi, psi, x, y);
                        if wi == 0.0 {
                            continue;
                        }
                        for a in 0..i.r_a {
                            for b in 0..i.r_b {
                                let c = wi * p.get(x, y, a, b);
                                if c == 0.0 {
                                    continue;
                                }
                                let block = self.output_block(chi, psi, x, y, a, b);
                                for (dst, o) in out[target..target + k].iter_mut().zip(block) {
                                    *dst += c * o;
                                }
                            }
                        }
                    }
                }
            }
        }
        finish(f, out)
    }

    /// `I` viewed as a behavior with inputs `(chi, psi)` and outputs `(x, y)`.
    pub fn input_box(&self) -> Behavior {
        let (i, f) = (self.initial, self.final_scenario);
        let sc = Scenario {
            s_a: f.s_a,
            r_a: i.s_a,
            s_b: f.s_b,
            r_b: i.s_b,
        };
        Behavior::from_fn(sc, |chi, psi, x, y| self.input_prob(chi, psi, x, y)).expect("validated")
    }

    /// `O` viewed as a behavior with Alice input `(chi, x, a)` and Bob input
    /// `(psi, y, b)`.
    pub fn output_box(&self) -> Behavior {
        let (i, f) = (self.initial, self.final_scenario);
        let sc = Scenario {
            s_a: f.s_a * i.s_a * i.r_a,
            r_a: f.r_a,
            s_b: f.s_b * i.s_b * i.r_b,
            r_b: f.r_b,
        };
        Behavior::from_fn(sc, |u, v, alpha, beta| {
            let (chi, x, a) = (u / (i.s_a * i.r_a), (u / i.r_a) % i.s_a, u % i.r_a);
            let (psi, y, b) = (v / (i.s_b * i.r_b), (v / i.r_b) % i.s_b, v % i.r_b);
            self.output_block(chi, psi, x, y, a, b)[alpha * f.r_b + beta]
        })
        .expect("validated")
    }

    /// Membership in the no-signaling wiring subclass: both `I` and `O` are
    /// no-signaling boxes.
    pub fn is_nsw(&self, tol: f64) -> bool {
        is_no_signaling(&self.input_box(), tol).no_signaling
            && is_no_signaling(&self.output_box(), tol).no_signaling
    }
}

fn check_columns(table: &[f64], width: usize, what: &str) -> Result<()> {
    for (j, col) in table.chunks(width).enumerate() {
        if col.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidWiring(format!(
                "{what}: negative or non-finite entry in block {j}"
            )));
        }
        let total: f64 = col.iter().sum();
        if (total - 1.0).abs() > WIRING_TOL {
            return Err(Error::InvalidWiring(format!(
                "{what}: block {j} sums to {total}"
            )));
        }
    }
    Ok(())
}
