//! Membership in the no-signaling set and in the local polytope.

pub mod lp;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};
use lp::{LpProblem, LpStatus, PivotRule};

/// Default cap on the number of local deterministic vertices.
pub const DEFAULT_VERTEX_CAP: u64 = 1_000_000;
/// Default residual tolerance for local-polytope membership.
pub const DEFAULT_LOCAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

/// One outcome per setting for a single party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub party: Party,
    pub map: Vec<usize>,
}

/// Where the worst no-signaling residual was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsResidual {
    /// Party whose marginal moves.
    pub party: Party,
    /// That party's own setting.
    pub setting: usize,
    /// That party's outcome.
    pub outcome: usize,
    /// The two settings of the other party being compared.
    pub other_settings: (usize, usize),
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsReport {
    pub no_signaling: bool,
    pub max_residual: f64,
    pub worst: Option<NsResidual>,
}

/// Checks that each party's marginal is independent of the other's setting.
pub fn is_no_signaling(p: &Behavior, tol: f64) -> NsReport {
    let sc = *p.scenario();
    let alice = p.alice_marginals();
    let bob = p.bob_marginals();
    let mut worst: Option<NsResidual> = None;
    let mut consider = |candidate: NsResidual| {
        if worst
            .as_ref()
            .is_none_or(|w| candidate.residual > w.residual)
        {
            worst = Some(candidate);
        }
    };
    // Bob's marginal P(b|x,y) must not depend on x.
    for y in 0..sc.s_b {
        for b in 0..sc.r_b {
            let reference = bob[y * sc.r_b + b];
            for x in 1..sc.s_a {
                let residual = (bob[(x * sc.s_b + y) * sc.r_b + b] - reference).abs();
                consider(NsResidual {
                    party: Party::Bob,
                    setting: y,
                    outcome: b,
                    other_settings: (0, x),
                    residual,
                });
            }
        }
    }
    // Alice's marginal P(a|x,y) must not depend on y.
    for x in 0..sc.s_a {
        for a in 0..sc.r_a {
            let reference = alice[(x * sc.s_b) * sc.r_a + a];
            for y in 1..sc.s_b {
                let residual = (alice[(x * sc.s_b + y) * sc.r_a + a] - reference).abs();
                consider(NsResidual {
                    party: Party::Alice,
                    setting: x,
                    outcome: a,
                    other_settings: (0, y),
                    residual,
                });
            }
        }
    }
    let max_residual = worst.as_ref().map_or(0.0, |w| w.residual);
    NsReport {
        no_signaling: max_residual <= tol,
        max_residual,
        worst,
    }
}

fn strategy_maps(settings: usize, outcomes: usize, count: usize) -> Vec<Vec<usize>> {
    // Lexicographic order: setting 0 is the most significant digit.
    (0..count)
        .map(|mut index| {
            let mut map = vec![0; settings];
            for slot in map.iter_mut().rev() {
                *slot = index % outcomes;
                index /= outcomes;
            }
            map
        })
        .collect()
}

/// The deterministic vertices of the local polytope, in lexicographic order
/// of (Alice strategy, Bob strategy).
#[derive(Debug, Clone)]
pub struct LocalPolytope {
    scenario: Scenario,
    alice: Vec<Vec<usize>>,
    bob: Vec<Vec<usize>>,
    /// `hits[v * S + s]` is the outcome index vertex `v` produces on setting `s`.
    hits: Vec<u32>,
}

impl LocalPolytope {
    pub fn new(scenario: Scenario, cap: u64) -> Result<Self> {
        scenario.check_vertex_cap(cap)?;
        let n_a = scenario.alice_strategies().expect("checked") as usize;
        let n_b = scenario.bob_strategies().expect("checked") as usize;
        let alice = strategy_maps(scenario.s_a, scenario.r_a, n_a);
        let bob = strategy_maps(scenario.s_b, scenario.r_b, n_b);
        let settings = scenario.settings();
        let mut hits = Vec::with_capacity(n_a * n_b * settings);
        for fa in &alice {
            for fb in &bob {
                for x in 0..scenario.s_a {
                    for y in 0..scenario.s_b {
                        hits.push(scenario.outcome_index(fa[x], fb[y]) as u32);
                    }
                }
            }
        }
        Ok(Self {
            scenario,
            alice,
            bob,
            hits,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn len(&self) -> usize {
        self.alice.len() * self.bob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Outcome index produced by vertex `v` on flat setting `s`.
    #[inline]
    pub fn hit(&self, v: usize, s: usize) -> usize {
        self.hits[v * self.scenario.settings() + s] as usize
    }

    #[inline]
    pub fn hits_of(&self, v: usize) -> &[u32] {
        let s = self.scenario.settings();
        &self.hits[v * s..(v + 1) * s]
    }

    pub fn strategies(&self, v: usize) -> (DeterministicStrategy, DeterministicStrategy) {
        let n_b = self.bob.len();
        (
            DeterministicStrategy {
                party: Party::Alice,
                map: self.alice[v / n_b].clone(),
            },
            DeterministicStrategy {
                party: Party::Bob,
                map: self.bob[v % n_b].clone(),
            },
        )
    }

    pub fn vertex(&self, v: usize) -> Behavior {
        let sc = self.scenario;
        let k = sc.outcomes();
        let mut entries = vec![0.0; sc.len()];
        for s in 0..sc.settings() {
            entries[s * k + self.hit(v, s)] = 1.0;
        }
        Behavior::new(sc, entries).expect("vertex is normalized")
    }

    /// `sum_v w_v V_v` as a flat entry array.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let sc = self.scenario;
        let k = sc.outcomes();
        let mut out = vec![0.0; sc.len()];
        for (v, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                for (s, &hit) in self.hits_of(v).iter().enumerate() {
                    out[s * k + hit as usize] += w;
                }
            }
        }
        out
    }

    /// Largest value of the functional `coefficients` over all vertices.
    pub fn max_functional(&self, coefficients: &[f64]) -> f64 {
        let k = self.scenario.outcomes();
        (0..self.len())
            .map(|v| {
                self.hits_of(v)
                    .iter()
                    .enumerate()
                    .map(|(s, &h)| coefficients[s * k + h as usize])
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Packages dense vertex weights as a sparse [`LocalModel`].
    pub fn model(&self, weights: &[f64]) -> LocalModel {
        let entries = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, &w)| {
                let (alice, bob) = self.strategies(v);
                LocalWeight {
                    vertex: v,
                    alice: alice.map,
                    bob: bob.map,
                    weight: w,
                }
            })
            .collect();
        LocalModel {
            scenario: self.scenario,
            weights: entries,
        }
    }
}

/// Lists every deterministic local behavior of the scenario.
pub fn enumerate_local_vertices(scenario: &Scenario, cap: u64) -> Result<Vec<Behavior>> {
    let poly = LocalPolytope::new(*scenario, cap)?;
    Ok((0..poly.len()).map(|v| poly.vertex(v)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalWeight {
    pub vertex: usize,
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
    pub weight: f64,
}

/// Convex weights over deterministic strategy pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    pub scenario: Scenario,
    pub weights: Vec<LocalWeight>,
}

impl LocalModel {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.weight).sum()
    }

    /// The behavior `sum_lambda w_lambda P_A(a|x,lambda) P_B(b|y,lambda)`.
    pub fn reconstruct_entries(&self) -> Vec<f64> {
        let sc = self.scenario;
        let mut out = vec![0.0; sc.len()];
        for w in &self.weights {
            for x in 0..sc.s_a {
                for y in 0..sc.s_b {
                    out[sc.index(x, y, w.alice[x], w.bob[y])] += w.weight;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Result<Behavior> {
        Behavior::new(self.scenario, self.reconstruct_entries())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

/// A linear functional separating a behavior from the local polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellCertificate {
    pub scenario: Scenario,
    /// Flat `[x][y][a][b]` coefficients.
    pub coefficients: Vec<f64>,
    /// Maximum of the functional over all local vertices.
    pub local_bound: f64,
    pub value_on_behavior: f64,
}

impl BellCertificate {
    /// Evaluates `coefficients` on `p` and on every local vertex.
    pub fn evaluate(coefficients: Vec<f64>, p: &Behavior, cap: u64) -> Result<Self> {
        let sc = *p.scenario();
        if coefficients.len() != sc.len() {
            return Err(Error::LengthMismatch {
                expected: sc.len(),
                got: coefficients.len(),
            });
        }
        let poly = LocalPolytope::new(sc, cap)?;
        let local_bound = poly.max_functional(&coefficients);
        let value_on_behavior = coefficients
            .iter()
            .zip(p.entries())
            .map(|(c, v)| c * v)
            .sum();
        Ok(Self {
            scenario: sc,
            coefficients,
            local_bound,
            value_on_behavior,
        })
    }

    pub fn violation(&self) -> f64 {
        self.value_on_behavior - self.local_bound
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Locality {
    Local(LocalModel),
    Nonlocal(BellCertificate),
}

impl Locality {
    pub fn is_local(&self) -> bool {
        matches!(self, Locality::Local(_))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LocalityOptions {
    pub tol: f64,
    pub vertex_cap: u64,
    pub rule: PivotRule,
}

impl Default for LocalityOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_LOCAL_TOL,
            vertex_cap: DEFAULT_VERTEX_CAP,
            rule: PivotRule::Bland,
        }
    }
}

/// Decides membership in the local polytope with default options.
pub fn is_local(p: &Behavior, tol: f64) -> Result<Locality> {
    is_local_with(
        p,
        LocalityOptions {
            tol,
            ..Default::default()
        },
    )
}

/// Phase-one LP over the vertex list; returns a reconstructing model or a
/// Farkas-derived Bell functional, both re-verified without the solver.
pub fn is_local_with(p: &Behavior, options: LocalityOptions) -> Result<Locality> {
    let sc = *p.scenario();
    let poly = LocalPolytope::new(sc, options.vertex_cap)?;
    let n = sc.len();
    let k = sc.outcomes();
    let n_vertices = poly.len();
    let mut problem = LpProblem::new(n + 1, n_vertices);
    for v in 0..n_vertices {
        for (s, &hit) in poly.hits_of(v).iter().enumerate() {
            problem.set(s * k + hit as usize, v, 1.0);
        }
        problem.set(n, v, 1.0);
    }
    problem.b[..n].copy_from_slice(p.entries());
    problem.b[n] = 1.0;
    let solution = lp::solve(&problem, options.rule, options.tol)?;

    match solution.status {
        LpStatus::Infeasible => {
            let raw: Vec<f64> = solution.duals[..n].to_vec();
            let mut best: Option<BellCertificate> = None;
            for coefficients in [normalize_functional(&raw, k), raw] {
                let local_bound = poly.max_functional(&coefficients);
                let value_on_behavior: f64 = coefficients
                    .iter()
                    .zip(p.entries())
                    .map(|(c, v)| c * v)
                    .sum();
                let candidate = BellCertificate {
                    scenario: sc,
                    coefficients,
                    local_bound,
                    value_on_behavior,
                };
                if candidate.violation() > 1e-9 {
                    best = Some(candidate);
                    break;
                }
            }
            best.map(Locality::Nonlocal).ok_or_else(|| {
                Error::SolverFailure(format!(
                    "residual {:e} exceeds tolerance but no separating functional was recovered",
                    solution.infeasibility
                ))
            })
        }
        LpStatus::Optimal | LpStatus::Unbounded => {
            let total: f64 = solution.x.iter().sum();
            let weights: Vec<f64> = solution.x.iter().map(|w| w / total).collect();
            let model = poly.model(&weights);
            let rebuilt = model.reconstruct_entries();
            let err = rebuilt
                .iter()
                .zip(p.entries())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if err > options.tol.max(DEFAULT_LOCAL_TOL) {
                return Err(Error::SolverFailure(format!(
                    "local model reconstructs with error {err:e}"
                )));
            }
            Ok(Locality::Local(model))
        }
    }
}

/// Shifts every setting block to a zero minimum and scales the largest
/// coefficient to one. Both operations preserve the sign of the violation.
fn normalize_functional(raw: &[f64], outcomes: usize) -> Vec<f64> {
    let mut out: Vec<f64> = raw
        .chunks(outcomes)
        .flat_map(|block| {
            let min = block.iter().copied().fold(f64::INFINITY, f64::min);
            block.iter().map(move |c| c - min)
        })
        .collect();
    let max = out.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for c in &mut out {
            *c /= max;
            if c.abs() < 1e-12 {
                *c = 0.0;
            }
            if (*c - 1.0).abs() < 1e-12 {
                *c = 1.0;
            }
        }
    }
    out
}

/// Orthogonal projector onto the row space of the no-signaling and
/// normalization constraints.
fn ns_row_space_projector(sc: &Scenario) -> DMatrix<f64> {
    let n = sc.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for s in 0..sc.settings() {
        let mut row = vec![0.0; n];
        for k in 0..sc.outcomes() {
            row[s * sc.outcomes() + k] = 1.0;
        }
        rows.push(row);
    }
    for y in 0..sc.s_b {
        for b in 0..sc.r_b {
            for x in 1..sc.s_a {
                let mut row = vec![0.0; n];
                for a in 0..sc.r_a {
                    row[sc.index(x, y, a, b)] += 1.0;
                    row[sc.index(0, y, a, b)] -= 1.0;
                }
                rows.push(row);
            }
        }
    }
    for x in 0..sc.s_a {
        for a in 0..sc.r_a {
            for y in 1..sc.s_b {
                let mut row = vec![0.0; n];
                for b in 0..sc.r_b {
                    row[sc.index(x, y, a, b)] += 1.0;
                    row[sc.index(x, 0, a, b)] -= 1.0;
                }
                rows.push(row);
            }
        }
    }
    // The rows are linearly dependent; orthonormalize them, dropping the
    // ones already spanned. Two passes keep the basis orthogonal to rounding.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut row in rows {
        let norm0 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&row).map(|(a, b)| a * b).sum();
                row.iter_mut().zip(q).for_each(|(r, qi)| *r -= dot * qi);
            }
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-9 * norm0 {
            row.iter_mut().for_each(|v| *v /= norm);
            basis.push(row);
        }
    }
    let q = DMatrix::from_fn(n, basis.len(), |i, j| basis[j][i]);
    &q * q.transpose()
}

/// Random no-signaling behavior: a Dirichlet-uniform conditional
/// distribution projected onto the no-signaling subspace, then mixed with
/// the least amount of white noise that restores nonnegativity.
pub fn random_ns_behavior(scenario: &Scenario, seed: u64) -> Behavior {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sc = *scenario;
    let k = sc.outcomes();
    let mut raw = Vec::with_capacity(sc.len());
    for _ in 0..sc.settings() {
        let block: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect::<Vec<f64>>();
        let total: f64 = block.iter().sum();
        raw.extend(block.into_iter().map(|v| v / total));
    }
    let noise = 1.0 / k as f64;
    let projector = ns_row_space_projector(&sc);
    let deviation = DMatrix::from_fn(sc.len(), 1, |i, _| raw[i] - noise);
    let correction = projector * deviation;
    let projected: Vec<f64> = (0..sc.len()).map(|i| raw[i] - correction[(i, 0)]).collect();
    let mixing = mixing_to_nonnegative(&projected, noise);
    let entries = projected
        .iter()
        .map(|v| ((1.0 - mixing) * v + mixing * noise).max(0.0))
        .collect();
    Behavior::new(sc, entries).expect("projection keeps setting blocks normalized")
}

/// Smallest `t` in `[0, 1]` with `(1 - t) v + t noise >= 0` entrywise.
pub(crate) fn mixing_to_nonnegative(values: &[f64], noise: f64) -> f64 {
    values
        .iter()
        .filter(|&&v| v < 0.0)
        .map(|&v| -v / (noise - v))
        .fold(0.0, f64::max)
        .min(1.0)
}

/// Random local behavior: a Dirichlet mixture of one to eight random
/// deterministic vertices.
pub fn random_local_behavior(scenario: &Scenario, seed: u64) -> Result<Behavior> {
    let poly = LocalPolytope::new(*scenario, DEFAULT_VERTEX_CAP)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=8usize.min(poly.len()));
    let mut weights = vec![0.0; poly.len()];
    for _ in 0..count {
        let v = rng.random_range(0..poly.len());
        let w: f64 = Exp1.sample(&mut rng);
        weights[v] += w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut entries = poly.combine(&weights);
    // re-normalize each setting block against accumulated rounding
    for block in entries.chunks_mut(scenario.outcomes()) {
        let t: f64 = block.iter().sum();
        block.iter_mut().for_each(|v| *v /= t);
    }
    Behavior::new(*scenario, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{named_behavior, pr_box, NamedBehavior};

    #[test]
    fn ns_sampler_on_degenerate_shapes() {
        for (sa, ra, sb, rb) in [(1, 3, 3, 2), (3, 3, 1, 2), (2, 2, 1, 2), (3, 2, 3, 3)] {
            let sc = Scenario::new(sa, ra, sb, rb).unwrap();
            for seed in 0..5 {
                let p = random_ns_behavior(&sc, seed);
                assert!(is_no_signaling(&p, 1e-12).no_signaling, "{sc:?}");
            }
        }
    }

    #[test]
    fn vertex_counts() {
        let cases = [((2, 2, 2, 2), 16), ((4, 2, 4, 2), 256), ((2, 1, 1, 2), 2)];
        for ((sa, ra, sb, rb), expected) in cases {
            let sc = Scenario::new(sa, ra, sb, rb).unwrap();
            let vertices = enumerate_local_vertices(&sc, DEFAULT_VERTEX_CAP).unwrap();
            assert_eq!(vertices.len(), expected);
            for (i, v) in vertices.iter().enumerate() {
                assert!(v.entries().iter().all(|&e| e == 0.0 || e == 1.0));
                for w in &vertices[i + 1..] {
                    assert_ne!(v, w);
                }
            }
        }
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let sc = Scenario::new(10, 3, 10, 3).unwrap();
        assert!(matches!(
            LocalPolytope::new(sc, DEFAULT_VERTEX_CAP),
            Err(Error::VertexCapExceeded { .. })
        ));
        assert!(Scenario::with_vertex_cap(2, 2, 2, 2, 15).is_err());
    }

    #[test]
    fn lexicographic_vertex_order() {
        let poly = LocalPolytope::new(Scenario::chsh(), DEFAULT_VERTEX_CAP).unwrap();
        let (a0, b0) = poly.strategies(0);
        assert_eq!((a0.map, b0.map), (vec![0, 0], vec![0, 0]));
        let (a1, b1) = poly.strategies(1);
        assert_eq!((a1.map, b1.map), (vec![0, 0], vec![0, 1]));
        let (a, b) = poly.strategies(15);
        assert_eq!((a.map, b.map), (vec![1, 1], vec![1, 1]));
    }

    #[test]
    fn pr_box_is_no_signaling() {
        let report = is_no_signaling(&pr_box(), 1e-12);
        assert!(report.no_signaling);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn signaling_box_is_detected() {
        let p = Behavior::from_fn(
            Scenario::chsh(),
            |_, y, a, b| if a == y && b == 0 { 1.0 } else { 0.0 },
        )
        .unwrap();
        let report = is_no_signaling(&p, 1e-9);
        assert!(!report.no_signaling);
        let worst = report.worst.unwrap();
        assert_eq!(worst.party, Party::Alice);
        assert_eq!(worst.residual, 1.0);
    }

    #[test]
    fn appendix_c_behaviors_are_no_signaling() {
        for e in [0.01, 0.125, 0.3, 0.49] {
            for name in [
                NamedBehavior::AppendixCP0 { epsilon: e },
                NamedBehavior::AppendixCP0Prime { epsilon: e },
            ] {
                assert!(is_no_signaling(&named_behavior(&name).unwrap(), 1e-15).no_signaling);
            }
        }
    }

    #[test]
    fn appendix_c_p0_is_local() {
        let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: 0.125 }).unwrap();
        match is_local(&p, DEFAULT_LOCAL_TOL).unwrap() {
            Locality::Local(model) => {
                assert!((model.total_weight() - 1.0).abs() < 1e-9);
                assert!(model.reconstruct().unwrap().max_abs_diff(&p) < 1e-8);
            }
            other => panic!("expected local, got {other:?}"),
        }
    }

    #[test]
    fn pr_box_certificate() {
        let p = pr_box();
        let Locality::Nonlocal(cert) = is_local(&p, DEFAULT_LOCAL_TOL).unwrap() else {
            panic!("PR box is nonlocal")
        };
        let vertices = enumerate_local_vertices(&Scenario::chsh(), DEFAULT_VERTEX_CAP).unwrap();
        let brute = vertices
            .iter()
            .map(|v| {
                v.entries()
                    .iter()
                    .zip(&cert.coefficients)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((brute - cert.local_bound).abs() < 1e-12);
        assert!(cert.value_on_behavior > cert.local_bound + 1e-9);
    }

    #[test]
    fn chsh_game_functional_is_four_versus_three() {
        let sc = Scenario::chsh();
        let wins: Vec<f64> = (0..16)
            .map(|i| {
                let (x, y, a, b) = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
                if (a ^ b) == (x & y) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let cert = BellCertificate::evaluate(wins, &pr_box(), DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(sc, cert.scenario);
        assert_eq!(cert.value_on_behavior, 4.0);
        assert_eq!(cert.local_bound, 3.0);
    }

    #[test]
    fn each_vertex_is_local_with_unit_weight() {
        let sc = Scenario::chsh();
        for v in enumerate_local_vertices(&sc, DEFAULT_VERTEX_CAP).unwrap() {
            let Locality::Local(model) = is_local(&v, DEFAULT_LOCAL_TOL).unwrap() else {
                panic!()
            };
            assert_eq!(model.weights.len(), 1);
            assert!((model.weights[0].weight - 1.0).abs() < 1e-12);
            assert!(is_no_signaling(&v, 0.0).no_signaling);
        }
    }

    #[test]
    fn degenerate_single_outcome_scenarios_are_local() {
        let sc = Scenario::new(2, 1, 3, 2).unwrap();
        for seed in 0..5 {
            let p = random_ns_behavior(&sc, seed);
            assert!(is_local(&p, DEFAULT_LOCAL_TOL).unwrap().is_local());
        }
    }

    #[test]
    fn random_ns_is_deterministic_and_no_signaling() {
        for sc in [
            Scenario::chsh(),
            Scenario::new(3, 2, 2, 3).unwrap(),
            Scenario::new(2, 2, 1, 2).unwrap(),
        ] {
            for seed in 0..20 {
                let p = random_ns_behavior(&sc, seed);
                assert!(is_no_signaling(&p, 1e-9).no_signaling, "seed {seed}");
                assert_eq!(p, random_ns_behavior(&sc, seed));
            }
        }
    }

    #[test]
    fn full_mixing_gives_white_noise() {
        assert_eq!(
            mixing_to_nonnegative(&[-1e9, 0.5], 0.25),
            1.0 - 0.25 / (0.25 + 1e9)
        );
        assert_eq!(mixing_to_nonnegative(&[0.1, 0.2], 0.25), 0.0);
    }

    #[test]
    fn mixture_of_two_vertices_is_local() {
        let vertices = enumerate_local_vertices(&Scenario::chsh(), DEFAULT_VERTEX_CAP).unwrap();
        for mu in [0.0, 0.1, 0.5, 0.93, 1.0] {
            let p = vertices[3].mix(&vertices[12], mu).unwrap();
            assert!(is_local(&p, DEFAULT_LOCAL_TOL).unwrap().is_local());
        }
    }
}
