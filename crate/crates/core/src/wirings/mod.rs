//! Wiring classes and their action on behaviors.
//!
//! Every class maps a behavior on an initial scenario `(sA, rA, sB, rB)` to
//! one on a final scenario whose inputs are written `chi`, `psi` and whose
//! outputs are written `alpha`, `beta`.

mod channel;
mod global;
mod losr;
pub mod presets;
pub mod random;
mod wpicc;

use serde::{Deserialize, Serialize};

pub use channel::{Channel, LocalBox, LocalBoxComponent};
pub use global::GlobalWiring;
pub use losr::{LosrComponent, LosrWiring, UclosrWiring};
pub use wpicc::{
    MutualBranch, OneWayBranch, SimplifiedForm, WpiccBranch, WpiccWiring, WPICC_NS_TOL,
};

use crate::behavior::{Behavior, Scenario};
use crate::error::Result;

/// Column sums of every stochastic table must be within this of one.
pub const WIRING_TOL: f64 = 1e-12;

/// Any wiring, tagged by class for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum WiringDescriptor {
    Gw(GlobalWiring),
    Losr(LosrWiring),
    Uclosr(UclosrWiring),
    Wpicc(WpiccWiring),
}

impl WiringDescriptor {
    pub fn initial(&self) -> Scenario {
        match self {
            Self::Gw(w) => w.initial,
            Self::Losr(w) => w.initial(),
            Self::Uclosr(w) => w.initial,
            Self::Wpicc(w) => w.initial,
        }
    }

    pub fn final_scenario(&self) -> Scenario {
        match self {
            Self::Gw(w) => w.final_scenario,
            Self::Losr(w) => w.final_scenario(),
            Self::Uclosr(w) => w.final_scenario,
            Self::Wpicc(w) => w.final_scenario,
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            Self::Gw(_) => "gw",
            Self::Losr(_) => "losr",
            Self::Uclosr(_) => "uclosr",
            Self::Wpicc(_) => "wpicc",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gw(w) => w.validate(),
            Self::Losr(w) => w.validate(),
            Self::Uclosr(w) => w.validate(),
            Self::Wpicc(w) => w.validate(),
        }
    }

    pub fn apply(&self, p: &Behavior) -> Result<Behavior> {
        match self {
            Self::Gw(w) => w.apply(p),
            Self::Losr(w) => w.apply(p),
            Self::Uclosr(w) => w.apply(p),
            Self::Wpicc(w) => w.apply(p),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let w: Self = serde_json::from_str(text)?;
        w.validate()?;
        Ok(w)
    }
}

/// Free-function form of [`GlobalWiring::apply`].
pub fn apply_gw(w: &GlobalWiring, p: &Behavior) -> Result<Behavior> {
    w.apply(p)
}

/// Free-function form of [`LosrWiring::apply`].
pub fn apply_losr(w: &LosrWiring, p: &Behavior) -> Result<Behavior> {
    w.apply(p)
}

/// Free-function form of [`WpiccWiring::apply`].
pub fn apply_wpicc(w: &WpiccWiring, p: &Behavior) -> Result<Behavior> {
    w.apply(p)
}

/// Sums out the shared randomness into dense global-wiring tables.
pub fn losr_to_gw(w: &LosrWiring) -> GlobalWiring {
    w.to_global()
}

/// The per-lambda product components of an LOSR wiring.
pub fn uclosr_decomposition(w: &LosrWiring) -> Vec<(f64, UclosrWiring)> {
    w.components
        .iter()
        .map(|c| (c.weight, c.wiring.clone()))
        .collect()
}

/// Builds a behavior from accumulated entries. Entries are summed products
/// of probabilities, so only rounding-level negatives can appear.
pub(crate) fn finish(scenario: Scenario, mut entries: Vec<f64>) -> Result<Behavior> {
    for v in &mut entries {
        if *v < 0.0 && *v > -1e-15 {
            *v = 0.0;
        }
    }
    Behavior::new(scenario, entries)
}
