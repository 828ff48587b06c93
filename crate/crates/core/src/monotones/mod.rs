//! Relative-entropy quantifiers of nonlocality.
//!
//! All four quantifiers minimize a divergence from `P` to the local polytope:
//!
//! | quantifier | input distribution                         |
//! |------------|--------------------------------------------|
//! | `s_u`      | uniform                                    |
//! | `s_uc`     | best product `D_X x D_Y` (lower bound)     |
//! | `s_c`      | best joint `D`                             |
//! | `s_nl`     | worst setting (`max` over `(x, y)`)        |
//!
//! `s_nl` and `s_c` coincide by the minimax theorem; they are computed by
//! two unrelated routes so the identity can be checked.

mod audit;
mod barrier;
mod exchange;
mod inner;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use audit::{convexity_audit, monotonicity_audit, AuditReport, AuditRow};
pub use inner::KL_CEILING;

use crate::behavior::{Behavior, InputDistribution, InputKind};
use crate::error::{Error, Result};
use crate::geometry::{
    is_local_with, LocalModel, LocalPolytope, Locality, LocalityOptions, DEFAULT_VERTEX_CAP,
};
use crate::wirings::random::random_distribution;
use exchange::{Cut, Evaluation, Face};
use inner::Weighted;

/// Default optimality tolerance, in bits.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default cap on Frank-Wolfe iterations per inner solve.
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;
/// Default number of starts for the product-input search.
pub const DEFAULT_RESTARTS: usize = 32;

const LOCAL_SMOOTHING: f64 = 1e-12;
const MAX_EXCHANGE_ROUNDS: usize = 2_000;
const MAX_ASCENT_SWEEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Snl,
    Su,
    Suc,
    Sc,
}

impl Quantifier {
    pub fn name(self) -> &'static str {
        match self {
            Self::Snl => "snl",
            Self::Su => "su",
            Self::Suc => "suc",
            Self::Sc => "sc",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub vertex_cap: u64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            vertex_cap: DEFAULT_VERTEX_CAP,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct MonotoneResult {
    pub quantifier: Quantifier,
    /// Value in bits.
    pub value: f64,
    /// True when `value` is only a certified lower bound on the optimum.
    pub is_lower_bound: bool,
    /// The minimizing local behavior.
    pub optimizer_local: LocalModel,
    pub optimizer_inputs: Option<InputDistribution>,
    /// Bound on the distance from `value` to the optimum of the problem
    /// that was solved.
    pub gap_estimate: f64,
    pub iterations: usize,
}

impl MonotoneResult {
    pub fn to_json_value(&self) -> serde_json::Value {
        let inputs = self
            .optimizer_inputs
            .as_ref()
            .map(|d| serde_json::from_str::<serde_json::Value>(&d.to_json()).expect("valid JSON"));
        serde_json::json!({
            "quantifier": self.quantifier.name(),
            "value": self.value,
            "is_lower_bound": self.is_lower_bound,
            "gap_estimate": self.gap_estimate,
            "iterations": self.iterations,
            "optimizer_local": self.optimizer_local,
            "optimizer_inputs": inputs,
        })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }
}

struct Context<'a> {
    problem: Weighted<'a>,
    opts: SolverOptions,
}

fn uniform(settings: usize) -> Vec<f64> {
    vec![1.0 / settings as f64; settings]
}

/// Returns a near-zero result for local behaviors, using the membership
/// LP's model smoothed toward the barycenter.
fn local_shortcut(
    ctx: &Context,
    quantifier: Quantifier,
    p: &Behavior,
) -> Result<Option<MonotoneResult>> {
    let options = LocalityOptions {
        vertex_cap: ctx.opts.vertex_cap,
        ..Default::default()
    };
    let Locality::Local(model) = is_local_with(p, options)? else {
        return Ok(None);
    };
    let poly = ctx.problem.poly;
    let n = poly.len();
    let mut w = vec![0.0; n];
    for lw in &model.weights {
        w[lw.vertex] += lw.weight;
    }
    let w: Vec<f64> = w
        .iter()
        .map(|v| (1.0 - LOCAL_SMOOTHING) * v + LOCAL_SMOOTHING / n as f64)
        .collect();
    let q = poly.combine(&w);
    let per_setting = ctx.problem.setting_values(&q);
    let settings = per_setting.len();
    let (value, inputs) = match quantifier {
        Quantifier::Su => (ctx.problem.weighted_value(&uniform(settings), &q), None),
        Quantifier::Suc => {
            let sc = p.scenario();
            (
                ctx.problem.weighted_value(&uniform(settings), &q),
                Some(InputDistribution::uniform(sc.s_a, sc.s_b)),
            )
        }
        Quantifier::Snl | Quantifier::Sc => {
            let sc = p.scenario();
            let d = InputDistribution::uniform(sc.s_a, sc.s_b);
            (
                per_setting.iter().copied().fold(0.0, f64::max),
                (quantifier == Quantifier::Sc).then_some(d),
            )
        }
    };
    if value > ctx.opts.tol {
        return Ok(None);
    }
    Ok(Some(MonotoneResult {
        quantifier,
        value,
        is_lower_bound: quantifier == Quantifier::Suc,
        optimizer_local: poly.model(&w),
        optimizer_inputs: inputs,
        // every quantifier is nonnegative
        gap_estimate: value,
        iterations: 0,
    }))
}

fn with_context<T>(
    p: &Behavior,
    opts: &SolverOptions,
    f: impl FnOnce(&Context) -> Result<T>,
) -> Result<T> {
    if !(opts.tol > 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let poly = LocalPolytope::new(*p.scenario(), opts.vertex_cap)?;
    let ctx = Context {
        problem: Weighted {
            poly: &poly,
            p: p.entries(),
        },
        opts: *opts,
    };
    f(&ctx)
}

/// Statistical strength under uniformly random inputs.
pub fn s_u(p: &Behavior, tol: f64) -> Result<MonotoneResult> {
    s_u_with(p, &SolverOptions::with_tol(tol))
}

pub fn s_u_with(p: &Behavior, opts: &SolverOptions) -> Result<MonotoneResult> {
    with_context(p, opts, |ctx| {
        if let Some(r) = local_shortcut(ctx, Quantifier::Su, p)? {
            return Ok(r);
        }
        let d = uniform(p.scenario().settings());
        let sol = ctx
            .problem
            .solve(&d, ctx.problem.barycenter(), opts.tol, opts.max_iterations)?;
        Ok(MonotoneResult {
            quantifier: Quantifier::Su,
            value: sol.value,
            is_lower_bound: false,
            optimizer_local: ctx.problem.poly.model(&sol.w),
            optimizer_inputs: None,
            gap_estimate: sol.gap,
            iterations: sol.iterations,
        })
    })
}

/// Relative entropy of nonlocality: the behavior relative entropy to the
/// nearest local behavior. `value` is an upper bound within
/// `gap_estimate` of the optimum.
pub fn s_nl(p: &Behavior, tol: f64) -> Result<MonotoneResult> {
    s_nl_with(p, &SolverOptions::with_tol(tol))
}

pub fn s_nl_with(p: &Behavior, opts: &SolverOptions) -> Result<MonotoneResult> {
    min_max_result(p, opts, Quantifier::Snl)
}

/// Statistical strength under the best joint input distribution, computed
/// through the minimax identity with `s_nl`; `optimizer_inputs` is the
/// saddle-point distribution.
pub fn s_c(p: &Behavior, tol: f64) -> Result<MonotoneResult> {
    s_c_with(p, &SolverOptions::with_tol(tol))
}

pub fn s_c_with(p: &Behavior, opts: &SolverOptions) -> Result<MonotoneResult> {
    min_max_result(p, opts, Quantifier::Sc)
}

fn min_max_result(
    p: &Behavior,
    opts: &SolverOptions,
    quantifier: Quantifier,
) -> Result<MonotoneResult> {
    with_context(p, opts, |ctx| {
        if let Some(r) = local_shortcut(ctx, quantifier, p)? {
            return Ok(r);
        }
        let sol = ctx.problem.min_max(opts.tol, opts.max_iterations)?;
        let sc = p.scenario();
        let inputs = InputDistribution::general(sc.s_a, sc.s_b, sol.d.clone())?;
        Ok(MonotoneResult {
            quantifier,
            value: sol.upper,
            is_lower_bound: false,
            optimizer_local: ctx.problem.poly.model(&sol.w),
            optimizer_inputs: Some(inputs),
            gap_estimate: sol.upper - sol.lower,
            iterations: sol.iterations,
        })
    })
}

/// `max_D min_P_L` evaluated directly by alternating exact inner solves with
/// an exchange method over `D`. `value` is a certified lower bound within
/// `gap_estimate` of the optimum; no minimax argument is used.
pub fn s_c_direct(p: &Behavior, tol: f64) -> Result<MonotoneResult> {
    s_c_direct_with(p, &SolverOptions::with_tol(tol))
}

pub fn s_c_direct_with(p: &Behavior, opts: &SolverOptions) -> Result<MonotoneResult> {
    with_context(p, opts, |ctx| {
        let settings = p.scenario().settings();
        let face = Face::full(settings);
        let mut cuts = Vec::new();
        let out = ctx.problem.exchange(
            &face,
            &uniform(settings),
            &ctx.problem.barycenter(),
            &mut cuts,
            opts.tol,
            MAX_EXCHANGE_ROUNDS,
            opts.max_iterations,
        )?;
        let gap = (out.upper - out.best.lower()).max(0.0);
        if !out.converged {
            return Err(Error::NoConvergence {
                iterations: out.iterations,
                gap,
            });
        }
        let sc = p.scenario();
        Ok(MonotoneResult {
            quantifier: Quantifier::Sc,
            value: out.best.lower(),
            is_lower_bound: false,
            optimizer_local: ctx.problem.poly.model(&out.best.w),
            optimizer_inputs: Some(InputDistribution::general(
                sc.s_a,
                sc.s_b,
                out.best.d.clone(),
            )?),
            gap_estimate: gap,
            iterations: out.iterations,
        })
    })
}

/// Statistical strength under the best product input distribution.
/// The product set is not convex, so the result is the best certified lower
/// bound over `restarts` coordinate-ascent runs (uniform start, every point
/// mass, then seeded random starts).
pub fn s_uc(p: &Behavior, tol: f64, restarts: usize, seed: u64) -> Result<MonotoneResult> {
    s_uc_with(
        p,
        &SolverOptions {
            tol,
            restarts,
            seed,
            ..Default::default()
        },
        &[],
    )
}

/// As [`s_uc`], with additional starting distributions tried first.
pub fn s_uc_with(
    p: &Behavior,
    opts: &SolverOptions,
    extra_starts: &[InputDistribution],
) -> Result<MonotoneResult> {
    with_context(p, opts, |ctx| {
        if let Some(r) = local_shortcut(ctx, Quantifier::Suc, p)? {
            return Ok(r);
        }
        let sc = *p.scenario();
        let mut starts: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for d in extra_starts {
            d.matches(&sc)?;
            starts.push(marginals(d));
        }
        starts.push((uniform(sc.s_a), uniform(sc.s_b)));
        for x in 0..sc.s_a {
            for y in 0..sc.s_b {
                starts.push((unit(sc.s_a, x), unit(sc.s_b, y)));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        while starts.len() < opts.restarts + extra_starts.len() {
            starts.push((
                random_distribution(sc.s_a, &mut rng),
                random_distribution(sc.s_b, &mut rng),
            ));
        }

        let mut cuts: Vec<Cut> = Vec::new();
        let mut best: Option<(Evaluation, Vec<f64>, Vec<f64>)> = None;
        let mut iterations = 0;
        let mut w = ctx.problem.barycenter();
        for (mut d_x, mut d_y) in starts {
            let mut last = f64::NEG_INFINITY;
            for _ in 0..MAX_ASCENT_SWEEPS {
                let face = Face::alice(sc.s_a, &d_y);
                let out = ctx.problem.exchange(
                    &face,
                    &d_x,
                    &w,
                    &mut cuts,
                    opts.tol,
                    MAX_EXCHANGE_ROUNDS,
                    opts.max_iterations,
                )?;
                iterations += out.iterations;
                d_x = alice_marginal(&out.best.d, sc.s_a, sc.s_b);
                w = out.best.w.clone();
                let face = Face::bob(&d_x, sc.s_b);
                let out = ctx.problem.exchange(
                    &face,
                    &d_y,
                    &w,
                    &mut cuts,
                    opts.tol,
                    MAX_EXCHANGE_ROUNDS,
                    opts.max_iterations,
                )?;
                iterations += out.iterations;
                d_y = bob_marginal(&out.best.d, sc.s_a, sc.s_b);
                w = out.best.w.clone();
                let value = out.best.lower();
                if best.as_ref().is_none_or(|(b, _, _)| value > b.lower()) {
                    best = Some((out.best.clone(), d_x.clone(), d_y.clone()));
                }
                if value <= last + 0.1 * opts.tol {
                    break;
                }
                last = value;
            }
        }
        let (eval, d_x, d_y) = best.expect("at least one start");
        Ok(MonotoneResult {
            quantifier: Quantifier::Suc,
            value: eval.lower(),
            is_lower_bound: true,
            optimizer_local: ctx.problem.poly.model(&eval.w),
            optimizer_inputs: Some(InputDistribution::product(d_x, d_y)?),
            gap_estimate: eval.gap,
            iterations,
        })
    })
}

/// Evaluates any quantifier with the given options.
pub fn evaluate(
    quantifier: Quantifier,
    p: &Behavior,
    opts: &SolverOptions,
) -> Result<MonotoneResult> {
    match quantifier {
        Quantifier::Snl => s_nl_with(p, opts),
        Quantifier::Su => s_u_with(p, opts),
        Quantifier::Suc => s_uc_with(p, opts, &[]),
        Quantifier::Sc => s_c_with(p, opts),
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

fn alice_marginal(d: &[f64], s_a: usize, s_b: usize) -> Vec<f64> {
    normalized(
        (0..s_a)
            .map(|x| d[x * s_b..(x + 1) * s_b].iter().sum())
            .collect(),
    )
}

fn bob_marginal(d: &[f64], s_a: usize, s_b: usize) -> Vec<f64> {
    normalized(
        (0..s_b)
            .map(|y| (0..s_a).map(|x| d[x * s_b + y]).sum())
            .collect(),
    )
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

fn marginals(d: &InputDistribution) -> (Vec<f64>, Vec<f64>) {
    match d.kind() {
        InputKind::Product { d_x, d_y } => (d_x.clone(), d_y.clone()),
        _ => (
            alice_marginal(d.weights(), d.s_a(), d.s_b()),
            bob_marginal(d.weights(), d.s_a(), d.s_b()),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{named_behavior, pr_box, NamedBehavior, Scenario};
    use crate::geometry::random_ns_behavior;

    #[test]
    fn local_behaviors_vanish() {
        let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: 0.125 }).unwrap();
        for q in [
            Quantifier::Snl,
            Quantifier::Su,
            Quantifier::Suc,
            Quantifier::Sc,
        ] {
            let r = evaluate(q, &p, &SolverOptions::default()).unwrap();
            assert!(r.value <= 1e-6, "{q:?}: {}", r.value);
            assert!(r.optimizer_local.reconstruct().is_ok());
        }
    }

    #[test]
    fn pr_box_values() {
        let exact = (4.0f64 / 3.0).log2();
        let p = pr_box();
        let nl = s_nl(&p, 1e-7).unwrap();
        assert!((nl.value - exact).abs() <= 1e-7 + nl.gap_estimate);
        let u = s_u(&p, 1e-7).unwrap();
        assert!((u.value - exact).abs() <= 1e-7);
        let direct = s_c_direct(&p, 1e-7).unwrap();
        assert!((direct.value - nl.value).abs() <= 2e-7);
        let uc = s_uc(&p, 1e-7, 4, 1).unwrap();
        assert!(uc.value >= u.value - 1e-6 && uc.value <= nl.value + 1e-6);
    }

    #[test]
    fn minimax_on_random_behaviors() {
        let sc = Scenario::chsh();
        for seed in 0..5 {
            let p = random_ns_behavior(&sc, seed);
            let a = s_nl(&p, 1e-6).unwrap();
            let b = s_c_direct(&p, 1e-6).unwrap();
            assert!(
                (a.value - b.value).abs() <= 2e-6,
                "seed {seed}: {} vs {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn result_json_has_certificates() {
        let r = s_c(&pr_box(), 1e-6).unwrap();
        let v = r.to_json_value();
        assert_eq!(v["quantifier"], "sc");
        assert!(v["optimizer_local"]["weights"]
            .as_array()
            .is_some_and(|a| !a.is_empty()));
        assert_eq!(v["optimizer_inputs"]["kind"], "general");
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        assert!(matches!(
            s_u(&pr_box(), 0.0),
            Err(Error::ParameterOutOfRange(_))
        ));
    }
}
