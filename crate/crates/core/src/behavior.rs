//! Probability containers indexed by a bipartite [`Scenario`].
//!
//! All arrays are dense and row-major over `[x][y][a][b]`: the setting pair
//! `(x, y)` selects a contiguous block of `r_a * r_b` outcome probabilities,
//! ordered with Alice's outcome `a` major and Bob's outcome `b` minor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-setting normalization tolerance enforced at construction.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Alphabet sizes of a bipartite Bell scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    /// Number of settings for Alice.
    #[serde(rename = "sA")]
    pub s_a: usize,
    /// Number of outcomes for Alice.
    #[serde(rename = "rA")]
    pub r_a: usize,
    /// Number of settings for Bob.
    #[serde(rename = "sB")]
    pub s_b: usize,
    /// Number of outcomes for Bob.
    #[serde(rename = "rB")]
    pub r_b: usize,
}

impl Scenario {
    pub fn new(s_a: usize, r_a: usize, s_b: usize, r_b: usize) -> Result<Self> {
        if s_a == 0 || r_a == 0 || s_b == 0 || r_b == 0 {
            return Err(Error::InvalidScenario(format!(
                "all alphabet sizes must be positive, got sA={s_a} rA={r_a} sB={s_b} rB={r_b}"
            )));
        }
        let scenario = Self { s_a, r_a, s_b, r_b };
        if scenario.vertex_count().is_none() {
            return Err(Error::InvalidScenario(
                "deterministic strategy count overflows".into(),
            ));
        }
        Ok(scenario)
    }

    /// Like [`Scenario::new`] but also rejects scenarios whose local polytope
    /// has more than `cap` vertices.
    pub fn with_vertex_cap(
        s_a: usize,
        r_a: usize,
        s_b: usize,
        r_b: usize,
        cap: u64,
    ) -> Result<Self> {
        let scenario = Self::new(s_a, r_a, s_b, r_b)?;
        scenario.check_vertex_cap(cap)?;
        Ok(scenario)
    }

    /// The two-setting two-outcome CHSH scenario.
    pub fn chsh() -> Self {
        Self {
            s_a: 2,
            r_a: 2,
            s_b: 2,
            r_b: 2,
        }
    }

    pub fn settings(&self) -> usize {
        self.s_a * self.s_b
    }

    pub fn outcomes(&self) -> usize {
        self.r_a * self.r_b
    }

    /// Total number of entries `sA * sB * rA * rB`.
    pub fn len(&self) -> usize {
        self.settings() * self.outcomes()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn setting_index(&self, x: usize, y: usize) -> usize {
        x * self.s_b + y
    }

    #[inline]
    pub fn outcome_index(&self, a: usize, b: usize) -> usize {
        a * self.r_b + b
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        self.setting_index(x, y) * self.outcomes() + self.outcome_index(a, b)
    }

    /// Number of deterministic strategies for Alice (`rA^sA`).
    pub fn alice_strategies(&self) -> Option<u128> {
        (self.r_a as u128).checked_pow(u32::try_from(self.s_a).ok()?)
    }

    /// Number of deterministic strategies for Bob (`rB^sB`).
    pub fn bob_strategies(&self) -> Option<u128> {
        (self.r_b as u128).checked_pow(u32::try_from(self.s_b).ok()?)
    }

    /// Number of local deterministic vertices, `None` on overflow.
    pub fn vertex_count(&self) -> Option<u128> {
        self.alice_strategies()?.checked_mul(self.bob_strategies()?)
    }

    pub fn check_vertex_cap(&self, cap: u64) -> Result<usize> {
        let count = self.vertex_count().unwrap_or(u128::MAX);
        if count > cap as u128 {
            return Err(Error::VertexCapExceeded { count, cap });
        }
        Ok(count as usize)
    }

    pub fn ensure_same(&self, other: &Scenario) -> Result<()> {
        if self != other {
            return Err(Error::ScenarioMismatch(format!("{self} vs {other}")));
        }
        Ok(())
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(sA={}, rA={}, sB={}, rB={})",
            self.s_a, self.r_a, self.s_b, self.r_b
        )
    }
}

/// Formats a double with 17 significant digits.
pub(crate) fn fmt17(value: f64) -> String {
    format!("{value:.16e}")
}

fn write_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt17(*v));
    }
    out.push(']');
}

fn check_entries(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if value < 0.0 {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    Ok(())
}

/// A normalized bipartite conditional distribution `P(a,b|x,y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    p: Vec<f64>,
}

impl Behavior {
    /// Validates and wraps a flat row-major `[x][y][a][b]` array.
    ///
    /// Never renormalizes: a setting block whose sum deviates from one by more
    /// than [`PROBABILITY_TOL`] is an error.
    pub fn new(scenario: Scenario, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != scenario.len() {
            return Err(Error::LengthMismatch {
                expected: scenario.len(),
                got: entries.len(),
            });
        }
        check_entries(&entries)?;
        let k = scenario.outcomes();
        for x in 0..scenario.s_a {
            for y in 0..scenario.s_b {
                let s = scenario.setting_index(x, y);
                let total: f64 = entries[s * k..(s + 1) * k].iter().sum();
                let deviation = total - 1.0;
                if deviation.abs() > PROBABILITY_TOL {
                    return Err(Error::NormalizationViolation { x, y, deviation });
                }
            }
        }
        Ok(Self {
            scenario,
            p: entries,
        })
    }

    /// Builds a behavior from a function of `(x, y, a, b)`.
    pub fn from_fn(
        scenario: Scenario,
        f: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(scenario.len());
        for x in 0..scenario.s_a {
            for y in 0..scenario.s_b {
                for a in 0..scenario.r_a {
                    for b in 0..scenario.r_b {
                        entries.push(f(x, y, a, b));
                    }
                }
            }
        }
        Self::new(scenario, entries)
    }

    /// The flat distribution `1 / (rA * rB)` on every setting.
    pub fn white_noise(scenario: Scenario) -> Self {
        let value = 1.0 / scenario.outcomes() as f64;
        Self {
            scenario,
            p: vec![value; scenario.len()],
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.p
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[self.scenario.index(x, y, a, b)]
    }

    /// Output distribution for the setting pair `(x, y)`, indexed by `a * rB + b`.
    pub fn setting(&self, x: usize, y: usize) -> &[f64] {
        let k = self.scenario.outcomes();
        let s = self.scenario.setting_index(x, y);
        &self.p[s * k..(s + 1) * k]
    }

    /// Output distribution for the flat setting index `x * sB + y`.
    pub fn setting_block(&self, s: usize) -> &[f64] {
        let k = self.scenario.outcomes();
        &self.p[s * k..(s + 1) * k]
    }

    /// Alice's marginal `P(a|x,y)`, flat over `[x][y][a]`.
    pub fn alice_marginals(&self) -> Vec<f64> {
        let sc = self.scenario;
        let mut out = vec![0.0; sc.settings() * sc.r_a];
        for x in 0..sc.s_a {
            for y in 0..sc.s_b {
                for a in 0..sc.r_a {
                    out[(x * sc.s_b + y) * sc.r_a + a] =
                        (0..sc.r_b).map(|b| self.get(x, y, a, b)).sum();
                }
            }
        }
        out
    }

    /// Bob's marginal `P(b|x,y)`, flat over `[x][y][b]`.
    pub fn bob_marginals(&self) -> Vec<f64> {
        let sc = self.scenario;
        let mut out = vec![0.0; sc.settings() * sc.r_b];
        for x in 0..sc.s_a {
            for y in 0..sc.s_b {
                for b in 0..sc.r_b {
                    out[(x * sc.s_b + y) * sc.r_b + b] =
                        (0..sc.r_a).map(|a| self.get(x, y, a, b)).sum();
                }
            }
        }
        out
    }

    /// The convex combination `mu * self + (1 - mu) * other`.
    pub fn mix(&self, other: &Behavior, mu: f64) -> Result<Behavior> {
        self.scenario.ensure_same(&other.scenario)?;
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::ParameterOutOfRange(format!(
                "mixing weight {mu} not in [0, 1]"
            )));
        }
        let entries = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| mu * a + (1.0 - mu) * b)
            .collect();
        Behavior::new(self.scenario, entries)
    }

    /// Largest entrywise absolute difference to another behavior.
    pub fn max_abs_diff(&self, other: &Behavior) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Serializes as `{"sA":..,"sB":..,"rA":..,"rB":..,"p":[..]}` with
    /// 17 significant digits per number.
    pub fn to_json(&self) -> String {
        let sc = self.scenario;
        let mut out = format!(
            "{{\"sA\":{},\"sB\":{},\"rA\":{},\"rB\":{},\"p\":",
            sc.s_a, sc.s_b, sc.r_a, sc.r_b
        );
        write_array(&mut out, &self.p);
        out.push('}');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BehaviorFile = serde_json::from_str(text)?;
        file.into_behavior()
    }
}

/// On-disk layout of a behavior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorFile {
    #[serde(rename = "sA")]
    pub s_a: usize,
    #[serde(rename = "sB")]
    pub s_b: usize,
    #[serde(rename = "rA")]
    pub r_a: usize,
    #[serde(rename = "rB")]
    pub r_b: usize,
    pub p: Vec<f64>,
}

impl BehaviorFile {
    pub fn into_behavior(self) -> Result<Behavior> {
        let scenario = Scenario::new(self.s_a, self.r_a, self.s_b, self.r_b)?;
        Behavior::new(scenario, self.p)
    }
}

/// How an [`InputDistribution`] was constructed.
#[derive(Debug, Clone, PartialEq)]
pub enum InputKind {
    General,
    Product { d_x: Vec<f64>, d_y: Vec<f64> },
    Uniform,
}

/// A joint distribution `D(x,y)` over setting pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    s_a: usize,
    s_b: usize,
    d: Vec<f64>,
    kind: InputKind,
}

fn check_simplex(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidDistribution(format!("{what}[{i}] = {v}")));
        }
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {total}"
        )));
    }
    Ok(())
}

impl InputDistribution {
    pub fn general(s_a: usize, s_b: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != s_a * s_b {
            return Err(Error::LengthMismatch {
                expected: s_a * s_b,
                got: d.len(),
            });
        }
        check_simplex(&d, "D")?;
        Ok(Self {
            s_a,
            s_b,
            d,
            kind: InputKind::General,
        })
    }

    pub fn product(d_x: Vec<f64>, d_y: Vec<f64>) -> Result<Self> {
        check_simplex(&d_x, "D_X")?;
        check_simplex(&d_y, "D_Y")?;
        let d = d_x
            .iter()
            .flat_map(|&dx| d_y.iter().map(move |&dy| dx * dy))
            .collect();
        Ok(Self {
            s_a: d_x.len(),
            s_b: d_y.len(),
            d,
            kind: InputKind::Product { d_x, d_y },
        })
    }

    pub fn uniform(s_a: usize, s_b: usize) -> Self {
        let n = s_a * s_b;
        Self {
            s_a,
            s_b,
            d: vec![1.0 / n as f64; n],
            kind: InputKind::Uniform,
        }
    }

    /// Point mass on the setting pair `(x, y)`.
    pub fn point_mass(s_a: usize, s_b: usize, x: usize, y: usize) -> Result<Self> {
        if x >= s_a || y >= s_b {
            return Err(Error::ParameterOutOfRange(format!(
                "setting ({x},{y}) outside {s_a}x{s_b}"
            )));
        }
        let mut d = vec![0.0; s_a * s_b];
        d[x * s_b + y] = 1.0;
        Self::general(s_a, s_b, d)
    }

    pub fn for_scenario_uniform(scenario: &Scenario) -> Self {
        Self::uniform(scenario.s_a, scenario.s_b)
    }

    pub fn s_a(&self) -> usize {
        self.s_a
    }

    pub fn s_b(&self) -> usize {
        self.s_b
    }

    pub fn weights(&self) -> &[f64] {
        &self.d
    }

    pub fn kind(&self) -> &InputKind {
        &self.kind
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.d[x * self.s_b + y]
    }

    pub fn matches(&self, scenario: &Scenario) -> Result<()> {
        if self.s_a != scenario.s_a || self.s_b != scenario.s_b {
            return Err(Error::ScenarioMismatch(format!(
                "input distribution over {}x{} settings, scenario {scenario}",
                self.s_a, self.s_b
            )));
        }
        Ok(())
    }

    /// `{"kind":..,"sA":..,"sB":..,"d":[..]}`, plus `dX`/`dY` for product kind.
    pub fn to_json(&self) -> String {
        let kind = match self.kind {
            InputKind::General => "general",
            InputKind::Product { .. } => "product",
            InputKind::Uniform => "uniform",
        };
        let mut out = format!(
            "{{\"kind\":\"{kind}\",\"sA\":{},\"sB\":{},",
            self.s_a, self.s_b
        );
        if let InputKind::Product { d_x, d_y } = &self.kind {
            out.push_str("\"dX\":");
            write_array(&mut out, d_x);
            out.push_str(",\"dY\":");
            write_array(&mut out, d_y);
            out.push(',');
        }
        out.push_str("\"d\":");
        write_array(&mut out, &self.d);
        out.push('}');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InputFile = serde_json::from_str(text)?;
        match file.kind.as_str() {
            "general" => {
                let d = file
                    .d
                    .ok_or_else(|| Error::InvalidDistribution("missing `d`".into()))?;
                let s_a = file.s_a.unwrap_or(d.len());
                let s_b = file.s_b.unwrap_or(1);
                Self::general(s_a, s_b, d)
            }
            "product" => {
                let d_x = file
                    .d_x
                    .ok_or_else(|| Error::InvalidDistribution("missing `dX`".into()))?;
                let d_y = file
                    .d_y
                    .ok_or_else(|| Error::InvalidDistribution("missing `dY`".into()))?;
                Self::product(d_x, d_y)
            }
            "uniform" => {
                let (s_a, s_b) = match (file.s_a, file.s_b) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(Error::InvalidDistribution(
                            "uniform kind needs sA and sB".into(),
                        ))
                    }
                };
                if s_a == 0 || s_b == 0 {
                    return Err(Error::InvalidDistribution("empty setting alphabet".into()));
                }
                Ok(Self::uniform(s_a, s_b))
            }
            other => Err(Error::InvalidDistribution(format!(
                "unknown kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
struct InputFile {
    kind: String,
    #[serde(rename = "sA")]
    s_a: Option<usize>,
    #[serde(rename = "sB")]
    s_b: Option<usize>,
    d: Option<Vec<f64>>,
    #[serde(rename = "dX")]
    d_x: Option<Vec<f64>>,
    #[serde(rename = "dY")]
    d_y: Option<Vec<f64>>,
}

/// Input-output statistics `P(a,b|x,y) D(x,y)`, summing to one overall.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    scenario: Scenario,
    q: Vec<f64>,
}

impl JointDistribution {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn entries(&self) -> &[f64] {
        &self.q
    }

    pub fn total(&self) -> f64 {
        self.q.iter().sum()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.q[self.scenario.index(x, y, a, b)]
    }
}

/// Weights every setting block of `p` by `d(x, y)`.
pub fn product_with_inputs(p: &Behavior, d: &InputDistribution) -> Result<JointDistribution> {
    let sc = *p.scenario();
    d.matches(&sc)?;
    let k = sc.outcomes();
    let q = p
        .entries()
        .chunks(k)
        .zip(d.weights())
        .flat_map(|(block, &w)| block.iter().map(move |v| v * w))
        .collect();
    Ok(JointDistribution { scenario: sc, q })
}

/// `1/2 + 1/(2 sqrt 2)`, the Tsirelson-box correlation parameter.
pub fn tsirelson_p() -> f64 {
    0.5 + 1.0 / (2.0 * std::f64::consts::SQRT_2)
}

/// Named behaviors used throughout the reproductions.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedBehavior {
    /// `P(a,b|x,y) = 1/2` iff `a xor b = x y` on (2,2,2,2).
    PrBox,
    /// Four settings, two outcomes: a Tsirelson block on `x, y in {0,1}`
    /// and white noise on every other setting pair.
    TsirelsonFourSetting {
        p: f64,
    },
    /// `(sA,rA,sB,rB) = (2,2,1,2)`, x-independent correlated table.
    AppendixCP0 {
        epsilon: f64,
    },
    /// `(2,2,1,2)` companion of [`NamedBehavior::AppendixCP0`].
    AppendixCP0Prime {
        epsilon: f64,
    },
    WhiteNoise(Scenario),
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::ParameterOutOfRange(format!(
            "epsilon = {epsilon} must lie in (0, 1/2)"
        )));
    }
    Ok(())
}

/// Scenario of the single-Bob-setting construction.
pub fn appendix_c_scenario() -> Scenario {
    Scenario {
        s_a: 2,
        r_a: 2,
        s_b: 1,
        r_b: 2,
    }
}

/// Four settings, two outcomes per party.
pub fn four_setting_scenario() -> Scenario {
    Scenario {
        s_a: 4,
        r_a: 2,
        s_b: 4,
        r_b: 2,
    }
}

pub fn named_behavior(name: &NamedBehavior) -> Result<Behavior> {
    match *name {
        NamedBehavior::PrBox => {
            Behavior::from_fn(
                Scenario::chsh(),
                |x, y, a, b| {
                    if (a ^ b) == (x & y) {
                        0.5
                    } else {
                        0.0
                    }
                },
            )
        }
        NamedBehavior::TsirelsonFourSetting { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ParameterOutOfRange(format!(
                    "p = {p} must lie in [0, 1]"
                )));
            }
            Behavior::from_fn(four_setting_scenario(), |x, y, a, b| {
                if x > 1 || y > 1 {
                    0.25
                } else if (a ^ b) == (x & y) {
                    p / 2.0
                } else {
                    (1.0 - p) / 2.0
                }
            })
        }
        NamedBehavior::AppendixCP0 { epsilon } => {
            check_epsilon(epsilon)?;
            Behavior::from_fn(appendix_c_scenario(), |_, _, a, b| {
                if a == b {
                    0.5 - epsilon
                } else {
                    epsilon
                }
            })
        }
        NamedBehavior::AppendixCP0Prime { epsilon } => {
            check_epsilon(epsilon)?;
            // x = 0: Alice's outcome 1 is the likely one; x = 1: outcome 0.
            Behavior::from_fn(appendix_c_scenario(), |x, _, a, _| {
                if a != x {
                    0.5 - epsilon
                } else {
                    epsilon
                }
            })
        }
        NamedBehavior::WhiteNoise(scenario) => Ok(Behavior::white_noise(scenario)),
    }
}

pub fn pr_box() -> Behavior {
    named_behavior(&NamedBehavior::PrBox).expect("static table")
}

pub fn tsirelson_four_setting() -> Behavior {
    named_behavior(&NamedBehavior::TsirelsonFourSetting { p: tsirelson_p() }).expect("static table")
}
