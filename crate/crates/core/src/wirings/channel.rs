use serde::{Deserialize, Serialize};

use super::WIRING_TOL;
use crate::error::{Error, Result};

/// A stochastic map `P(out|in)` stored as `table[input * outputs + output]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub inputs: usize,
    pub outputs: usize,
    pub table: Vec<f64>,
}

impl Channel {
    pub fn new(inputs: usize, outputs: usize, table: Vec<f64>) -> Result<Self> {
        let c = Self {
            inputs,
            outputs,
            table,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_fn(inputs: usize, outputs: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let table = (0..inputs)
            .flat_map(|i| (0..outputs).map(move |o| (i, o)))
            .map(|(i, o)| f(i, o))
            .collect();
        Self::new(inputs, outputs, table)
    }

    /// `P(out|in) = 1` iff `out == f(in)`.
    pub fn deterministic(
        inputs: usize,
        outputs: usize,
        f: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        Self::from_fn(inputs, outputs, |i, o| if f(i) == o { 1.0 } else { 0.0 })
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.outputs == 0 {
            return Err(Error::InvalidWiring(
                "channel with an empty alphabet".into(),
            ));
        }
        if self.table.len() != self.inputs * self.outputs {
            return Err(Error::LengthMismatch {
                expected: self.inputs * self.outputs,
                got: self.table.len(),
            });
        }
        for (i, row) in self.table.chunks(self.outputs).enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidWiring(format!(
                    "channel row {i} has a negative or non-finite entry"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > WIRING_TOL {
                return Err(Error::InvalidWiring(format!(
                    "channel row {i} sums to {total}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.table[input * self.outputs + output]
    }

    #[inline]
    pub fn row(&self, input: usize) -> &[f64] {
        &self.table[input * self.outputs..(input + 1) * self.outputs]
    }

    pub(crate) fn expect_shape(&self, inputs: usize, outputs: usize, what: &str) -> Result<()> {
        if self.inputs != inputs || self.outputs != outputs {
            return Err(Error::InvalidWiring(format!(
                "{what}: expected {inputs} inputs and {outputs} outputs, found {} and {}",
                self.inputs, self.outputs
            )));
        }
        self.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBoxComponent {
    pub weight: f64,
    pub alice: Channel,
    pub bob: Channel,
}

/// A bipartite local box in shared-randomness form,
/// `P(alpha,beta|u,v) = sum_lambda w_lambda A_lambda(alpha|u) B_lambda(beta|v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBox {
    pub components: Vec<LocalBoxComponent>,
}

impl LocalBox {
    pub fn product(alice: Channel, bob: Channel) -> Self {
        Self {
            components: vec![LocalBoxComponent {
                weight: 1.0,
                alice,
                bob,
            }],
        }
    }

    /// Checks weights and that every component has the given shape.
    pub fn validate_shape(
        &self,
        alice_inputs: usize,
        alice_outputs: usize,
        bob_inputs: usize,
        bob_outputs: usize,
    ) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidWiring("local box without components".into()));
        }
        let mut total = 0.0;
        for c in &self.components {
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(Error::InvalidWiring(format!(
                    "component weight {}",
                    c.weight
                )));
            }
            total += c.weight;
            c.alice
                .expect_shape(alice_inputs, alice_outputs, "local box, Alice")?;
            c.bob
                .expect_shape(bob_inputs, bob_outputs, "local box, Bob")?;
        }
        if (total - 1.0).abs() > WIRING_TOL {
            return Err(Error::InvalidWiring(format!(
                "local box weights sum to {total}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, alpha: usize, beta: usize, u: usize, v: usize) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.alice.get(u, alpha) * c.bob.get(v, beta))
            .sum()
    }
}
