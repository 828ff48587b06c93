//! Seeded property campaigns over random instances on (2,2,2,2).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::behavior::{Behavior, Scenario};
use crate::divergence::behavior_re;
use crate::error::{Error, Result};
use crate::geometry::{
    is_local_with, random_local_behavior, random_ns_behavior, Locality, LocalityOptions,
    DEFAULT_LOCAL_TOL,
};
use crate::monotones::{
    convexity_audit, monotonicity_audit, s_c_direct_with, s_nl_with, Quantifier, SolverOptions,
};
use crate::wirings::random::{random_gw, random_losr, random_uclosr, random_wpicc};
use crate::wirings::WiringDescriptor;

/// Additive slack for the exact (solver-free) contractivity comparison.
pub const CONTRACTIVITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    /// S_b(W p || W p') <= S_b(p || p') for random global wirings.
    GwContractivity,
    /// LOSR and WPICC wirings of local behaviors stay local.
    LosrClosure,
    /// s_nl does not increase under random WPICC wirings.
    SnlMonotonicity,
    /// s_uc does not increase under random product wirings.
    SucMonotonicity,
    /// s_nl and s_uc are convex along random mixtures.
    Convexity,
    /// s_nl agrees with the direct max-min s_c.
    MinimaxIdentity,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::GwContractivity => "gw_contractivity",
            Suite::LosrClosure => "losr_closure",
            Suite::SnlMonotonicity => "snl_monotonicity",
            Suite::SucMonotonicity => "suc_monotonicity",
            Suite::Convexity => "convexity",
            Suite::MinimaxIdentity => "minimax_identity",
        }
    }
}

/// One CSV row. `f_before`/`f_after` are the two sides of the checked
/// inequality; for `minimax_identity` they are s_nl and s_c, for
/// `losr_closure` the Bell violation before (always 0) and after.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRow {
    pub suite: &'static str,
    pub trial: usize,
    pub check: &'static str,
    pub f_before: f64,
    pub f_after: f64,
    pub slack: f64,
    pub violation: bool,
    pub error: String,
}

impl CampaignRow {
    fn failed(suite: Suite, trial: usize, check: &'static str, err: &Error) -> Self {
        Self {
            suite: suite.name(),
            trial,
            check,
            f_before: f64::NAN,
            f_after: f64::NAN,
            slack: f64::NAN,
            violation: false,
            error: err.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub rows: Vec<CampaignRow>,
}

impl CampaignReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violation).count()
    }

    pub fn errors(&self) -> usize {
        self.rows.iter().filter(|r| !r.error.is_empty()).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0 && self.errors() == 0
    }

    /// Largest `f_after - f_before` over rows without errors.
    pub fn max_excess(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.error.is_empty())
            .map(|r| r.f_after - r.f_before)
            .filter(|v| !v.is_nan())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Column names of [`CampaignReport::to_csv`].
pub const CSV_COLUMNS: &str = "suite,trial,check,f_before,f_after,slack,violation,error";

/// Generator for trial `trial` of a campaign seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Random no-signaling behavior on (2,2,2,2). Half of the draws come from
/// the generic sampler, which is mostly local; the other half mix a
/// relabelled PR box, `a xor b = x y xor s x xor t y xor u`, into such a
/// draw with a uniform weight, so that nonlocal instances are well covered.
pub fn campaign_behavior<R: Rng>(rng: &mut R) -> Behavior {
    let sc = Scenario::chsh();
    let base = random_ns_behavior(&sc, rng.random());
    if rng.random_bool(0.5) {
        return base;
    }
    let (s, t, u) = (
        rng.random_range(0..2),
        rng.random_range(0..2),
        rng.random_range(0..2),
    );
    let pr = Behavior::from_fn(sc, |x, y, a, b| {
        if a ^ b == (x & y) ^ (s & x) ^ (t & y) ^ u {
            0.5
        } else {
            0.0
        }
    })
    .expect("PR box is a valid behavior");
    let lambda: f64 = rng.random();
    pr.mix(&base, lambda).expect("same scenario")
}

fn row(
    suite: Suite,
    trial: usize,
    check: &'static str,
    before: f64,
    after: f64,
    slack: f64,
) -> CampaignRow {
    CampaignRow {
        suite: suite.name(),
        trial,
        check,
        f_before: before,
        f_after: after,
        slack,
        violation: after > before + slack,
        error: String::new(),
    }
}

fn bell_violation(p: &Behavior, vertex_cap: u64) -> Result<f64> {
    let opts = LocalityOptions {
        tol: DEFAULT_LOCAL_TOL,
        vertex_cap,
        ..Default::default()
    };
    Ok(match is_local_with(p, opts)? {
        Locality::Local(_) => 0.0,
        Locality::Nonlocal(c) => c.violation(),
    })
}

fn run_trial(suite: Suite, trial: usize, seed: u64, opts: &SolverOptions) -> Vec<CampaignRow> {
    let mut rng = trial_rng(seed, trial);
    let sc = Scenario::chsh();
    let checks: Vec<(&'static str, Result<CampaignRow>)> = match suite {
        Suite::GwContractivity => {
            let result = (|| {
                let (p, q) = (campaign_behavior(&mut rng), campaign_behavior(&mut rng));
                let w = random_gw(&sc, &sc, &mut rng);
                let before = behavior_re(&p, &q)?.bits;
                let after = behavior_re(&w.apply(&p)?, &w.apply(&q)?)?.bits;
                Ok(row(suite, trial, "sb", before, after, CONTRACTIVITY_SLACK))
            })();
            vec![("sb", result)]
        }
        Suite::LosrClosure => {
            let local = random_local_behavior(&sc, rng.random());
            let losr = random_losr(&sc, &sc, 2, &mut rng);
            let wpicc = random_wpicc(&sc, &sc, &mut rng);
            let check = |w: WiringDescriptor| -> Result<CampaignRow> {
                let p = local
                    .as_ref()
                    .map_err(|e| Error::SolverFailure(e.to_string()))?;
                let after = bell_violation(&w.apply(p)?, opts.vertex_cap)?;
                let mut r = row(suite, trial, w.class_name(), 0.0, after, 0.0);
                r.violation = after > 0.0;
                Ok(r)
            };
            vec![
                ("losr", check(WiringDescriptor::Losr(losr))),
                ("wpicc", check(WiringDescriptor::Wpicc(wpicc))),
            ]
        }
        Suite::SnlMonotonicity | Suite::SucMonotonicity => {
            let p = campaign_behavior(&mut rng);
            let (q, w, check) = if suite == Suite::SnlMonotonicity {
                (
                    Quantifier::Snl,
                    WiringDescriptor::Wpicc(random_wpicc(&sc, &sc, &mut rng)),
                    "snl",
                )
            } else {
                (
                    Quantifier::Suc,
                    WiringDescriptor::Uclosr(random_uclosr(&sc, &sc, &mut rng)),
                    "suc",
                )
            };
            let result = monotonicity_audit(q, &p, "p", &[("w".into(), w)], opts).map(|report| {
                let r = &report.rows[0];
                row(suite, trial, check, r.f_before, r.f_after, r.slack)
            });
            vec![(check, result)]
        }
        Suite::Convexity => {
            let (p, q) = (campaign_behavior(&mut rng), campaign_behavior(&mut rng));
            let mu: f64 = rng.random();
            [(Quantifier::Snl, "snl"), (Quantifier::Suc, "suc")]
                .into_iter()
                .map(|(f, check)| {
                    let result = convexity_audit(f, &p, &q, &[mu], opts).map(|report| {
                        let r = &report.rows[0];
                        row(suite, trial, check, r.f_before, r.f_after, r.slack)
                    });
                    (check, result)
                })
                .collect()
        }
        Suite::MinimaxIdentity => {
            let p = campaign_behavior(&mut rng);
            let result = (|| {
                let nl = s_nl_with(&p, opts)?;
                let c = s_c_direct_with(&p, opts)?;
                let mut r = row(suite, trial, "snl_vs_sc", nl.value, c.value, 2.0 * opts.tol);
                r.violation = (nl.value - c.value).abs() > 2.0 * opts.tol;
                Ok(r)
            })();
            vec![("snl_vs_sc", result)]
        }
    };
    checks
        .into_iter()
        .map(|(check, r)| r.unwrap_or_else(|e| CampaignRow::failed(suite, trial, check, &e)))
        .collect()
}

/// Runs `trials` trials on a pool of at most `threads` workers (rayon's
/// default when `None`). Rows are ordered by trial index.
pub fn run_campaign(
    suite: Suite,
    trials: usize,
    seed: u64,
    opts: &SolverOptions,
    threads: Option<usize>,
) -> Result<CampaignReport> {
    if trials == 0 {
        return Err(Error::ParameterOutOfRange(
            "trials must be at least 1".into(),
        ));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::SolverFailure(format!("worker pool: {e}")))?;
    let nested: Vec<Vec<CampaignRow>> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(suite, t, seed, opts))
            .collect()
    });
    Ok(CampaignReport {
        rows: nested.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_across_thread_counts() {
        let opts = SolverOptions::default();
        let a = run_campaign(Suite::GwContractivity, 12, 5, &opts, Some(1)).unwrap();
        let b = run_campaign(Suite::GwContractivity, 12, 5, &opts, Some(4)).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert!(a.passed());
        assert!(a.to_csv().unwrap().starts_with(CSV_COLUMNS));
    }

    #[test]
    fn closure_rows_per_trial() {
        let r = run_campaign(Suite::LosrClosure, 3, 1, &SolverOptions::default(), Some(2)).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert!(r.passed(), "{:?}", r.rows);
    }
}
