//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Built without the libtest harness so the lines always print.

use std::time::{Duration, Instant};

use bellwire::behavior::{named_behavior, pr_box, tsirelson_four_setting, Behavior, NamedBehavior, Scenario};
use bellwire::cli::campaign::{campaign_behavior, run_campaign, trial_rng, CampaignReport, Suite};
use bellwire::divergence::{behavior_re, setting_divergences};
use bellwire::geometry::lp::{self, LpProblem, LpStatus, PivotRule};
use bellwire::geometry::{is_local, random_local_behavior, LocalPolytope, Locality, DEFAULT_VERTEX_CAP};
use bellwire::monotones::{monotonicity_audit, s_c, s_nl, s_u, s_uc, MonotoneResult, Quantifier, SolverOptions};
use bellwire::wirings::random::{random_losr, random_wpicc};
use bellwire::wirings::{presets, WiringDescriptor};
use rand::Rng;

const THREADS_ENV: &str = "BELLWIRE_THREADS";

struct Verdict {
    pass: bool,
    detail: String,
}

fn threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok())
}

fn campaign_verdict(report: &CampaignReport, elapsed: Duration, limit: Duration) -> Verdict {
    Verdict {
        pass: report.passed() && elapsed < limit,
        detail: format!(
            "{} rows, {} violations, {} errors, max(after - before) {:.3e}",
            report.rows.len(),
            report.violations(),
            report.errors(),
            report.max_excess()
        ),
    }
}

// ---------------------------------------------------------------------------
// 1. RE doubling under the preset WPICC wiring.

fn doubling() -> Verdict {
    let wiring = presets::appendix_c_wpicc();
    let mut worst_before: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut failures = Vec::new();
    for eps in [0.05, 0.10, 0.125, 0.20, 0.30, 0.45] {
        let run = || -> bellwire::Result<(f64, f64)> {
            let p = named_behavior(&NamedBehavior::AppendixCP0 { epsilon: eps })?;
            let q = named_behavior(&NamedBehavior::AppendixCP0Prime { epsilon: eps })?;
            let before = behavior_re(&p, &q)?.bits;
            let after = behavior_re(&wiring.apply(&p)?, &wiring.apply(&q)?)?.bits;
            Ok((before, after))
        };
        match run() {
            Ok((before, after)) => {
                let closed = (0.5 - 2.0 * eps) * ((0.5 - eps) / eps).log2();
                let d_before = (before - closed).abs();
                let d_after = (after - 2.0 * before).abs();
                worst_before = worst_before.max(d_before);
                worst_ratio = worst_ratio.max(d_after);
                if d_before > 1e-12 || d_after > 1e-12 {
                    failures.push(format!("eps {eps}: before {before}, after {after}, closed {closed}"));
                }
            }
            Err(e) => failures.push(format!("eps {eps}: {e}")),
        }
    }
    Verdict {
        pass: failures.is_empty(),
        detail: format!(
            "max |S_b - closed form| {worst_before:.1e}, max |after - 2 before| {worst_ratio:.1e}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    }
}

// ---------------------------------------------------------------------------
// 2. Fourfold growth of the uniform-input quantifier under the mod-2 wiring.

fn growth() -> bellwire::Result<Verdict> {
    let p0 = tsirelson_four_setting();
    let poly = LocalPolytope::new(*p0.scenario(), DEFAULT_VERTEX_CAP)?;
    let pf = presets::appendix_f_losr().apply(&p0)?;
    let v0 = s_u(&p0, 1e-6)?;
    let vf = s_u(&pf, 1e-6)?;
    let slack = 4.0 * v0.gap_estimate + vf.gap_estimate + 1e-6;
    let nonlocal = !is_local(&p0, 1e-8)?.is_local();
    let pass = poly.len() == 256 && nonlocal && v0.value - v0.gap_estimate > 0.0 && vf.value >= 4.0 * v0.value - slack;
    Ok(Verdict {
        pass,
        detail: format!(
            "{} vertices, v0 = {:.9} (gap {:.1e}), vf = {:.9} (gap {:.1e}), ratio {:.9}, slack {:.1e}",
            poly.len(),
            v0.value,
            v0.gap_estimate,
            vf.value,
            vf.gap_estimate,
            vf.value / v0.value,
            slack
        ),
    })
}

// ---------------------------------------------------------------------------
// 5. Faithfulness on local behaviors and closure of LOSR / WPICC.

/// Independent check of a returned optimizer: divergence from `p` to the
/// reconstructed local model, recomputed from scratch.
fn certified_upper(p: &Behavior, r: &MonotoneResult) -> bellwire::Result<f64> {
    let q = r.optimizer_local.reconstruct()?;
    let per = setting_divergences(p, &q)?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

fn faithfulness() -> bellwire::Result<Verdict> {
    let sc = Scenario::chsh();
    let mut worst_value: f64 = 0.0;
    let mut worst_certificate: f64 = 0.0;
    let mut not_local = 0;
    let mut errors = Vec::new();
    for trial in 0..500 {
        let mut rng = trial_rng(5, trial);
        let p = random_local_behavior(&sc, rng.random())?;
        let mut run = || -> bellwire::Result<(f64, f64, usize)> {
            let results = [s_nl(&p, 1e-6)?, s_u(&p, 1e-6)?, s_uc(&p, 1e-6, 8, trial as u64)?, s_c(&p, 1e-6)?];
            let mut value: f64 = 0.0;
            let mut cert: f64 = 0.0;
            for r in &results {
                value = value.max(r.value);
                cert = cert.max(certified_upper(&p, r)?);
            }
            let losr = random_losr(&sc, &sc, 3, &mut rng);
            let wpicc = random_wpicc(&sc, &sc, &mut rng);
            let mut nonlocal = 0;
            for out in [losr.apply(&p)?, wpicc.apply(&p)?] {
                if !is_local(&out, 1e-8)?.is_local() {
                    nonlocal += 1;
                }
            }
            Ok((value, cert, nonlocal))
        };
        match run() {
            Ok((v, c, n)) => {
                worst_value = worst_value.max(v);
                worst_certificate = worst_certificate.max(c);
                not_local += n;
            }
            Err(e) => errors.push(format!("trial {trial}: {e}")),
        }
    }
    Ok(Verdict {
        pass: errors.is_empty() && worst_value <= 1e-6 && worst_certificate <= 1e-6 && not_local == 0,
        detail: format!(
            "max quantifier {worst_value:.1e}, max certified divergence {worst_certificate:.1e}, \
             {not_local} nonlocal wiring outputs, {} errors{}",
            errors.len(),
            errors.first().map(|e| format!(" (first: {e})")).unwrap_or_default()
        ),
    })
}

// ---------------------------------------------------------------------------
// 6. Monotonicity suites and the failing uniform-input audit.

fn monotonicity() -> bellwire::Result<Verdict> {
    let opts = SolverOptions::default();
    let snl = run_campaign(Suite::SnlMonotonicity, 200, 11, &opts, threads())?;
    let suc = run_campaign(Suite::SucMonotonicity, 200, 13, &opts, threads())?;
    let audit = monotonicity_audit(
        Quantifier::Su,
        &tsirelson_four_setting(),
        "tsirelson",
        &[("mod-2".into(), WiringDescriptor::Losr(presets::appendix_f_losr()))],
        &opts,
    )?;
    let row = &audit.rows[0];
    let ratio_ok = row.f_after >= 4.0 * row.f_before - row.slack;
    Ok(Verdict {
        pass: snl.passed() && suc.passed() && row.violation && ratio_ok,
        detail: format!(
            "s_nl/WPICC: {} violations {} errors; s_uc/UCLOSR: {} violations {} errors; \
             s_u audit flagged {} with ratio {:.6}",
            snl.violations(),
            snl.errors(),
            suc.violations(),
            suc.errors(),
            row.violation,
            row.ratio()
        ),
    })
}

// ---------------------------------------------------------------------------
// 7. Oracles written independently of the library's solvers.

/// Deterministic vertices of (2,2,2,2) as flat `[x][y][a][b]` tables.
fn chsh_vertices() -> Vec<[f64; 16]> {
    let mut out = Vec::new();
    for alice in 0..4usize {
        for bob in 0..4usize {
            let mut v = [0.0; 16];
            for x in 0..2 {
                for y in 0..2 {
                    let a = (alice >> x) & 1;
                    let b = (bob >> y) & 1;
                    v[((x * 2 + y) * 2 + a) * 2 + b] = 1.0;
                }
            }
            out.push(v);
        }
    }
    out
}

fn mixture(vertices: &[[f64; 16]], w: &[f64]) -> [f64; 16] {
    let mut q = [0.0; 16];
    for (v, &wv) in vertices.iter().zip(w) {
        for i in 0..16 {
            q[i] += wv * v[i];
        }
    }
    q
}

fn block_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| if *qi > 0.0 { pi * (pi / qi).log2() } else { f64::INFINITY })
        .sum()
}

fn worst_setting(p: &[f64], q: &[f64]) -> [f64; 4] {
    let mut f = [0.0; 4];
    for s in 0..4 {
        f[s] = block_kl(&p[4 * s..4 * s + 4], &q[4 * s..4 * s + 4]);
    }
    f
}

/// All compositions of `n` into `parts` nonnegative parts.
fn compositions(n: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == parts - 1 {
        let used: usize = prefix.iter().sum();
        let mut full = prefix.clone();
        full.push(n - used);
        out.push(full);
        return;
    }
    let used: usize = prefix.iter().sum();
    for k in 0..=(n - used) {
        prefix.push(k);
        compositions(n, parts, prefix, out);
        prefix.pop();
    }
}

/// `min_w max_s S(P_s || Q_s(w))` by exhaustive search on a lattice of the
/// 16-vertex simplex, then mirror descent on a log-sum-exp smoothing with
/// increasing sharpness.
fn brute_force_snl(p: &[f64]) -> f64 {
    let vertices = chsh_vertices();
    let n = vertices.len();
    let objective = |w: &[f64]| worst_setting(p, &mixture(&vertices, w)).into_iter().fold(0.0, f64::max);

    let mut lattice = Vec::new();
    compositions(4, n, &mut Vec::new(), &mut lattice);
    let mut best_w = vec![1.0 / n as f64; n];
    let mut best = objective(&best_w);
    for point in &lattice {
        let w: Vec<f64> = point.iter().map(|&k| k as f64 / 4.0).collect();
        let v = objective(&w);
        if v < best {
            best = v;
            best_w = w;
        }
    }

    // Keep every weight positive so the mirror-descent updates can move it.
    let mut w: Vec<f64> = best_w.iter().map(|v| 0.5 * v + 0.5 / n as f64).collect();
    let mut beta = 10.0;
    while beta <= 1e7 {
        let smooth = |w: &[f64]| {
            let f = worst_setting(p, &mixture(&vertices, w));
            let m = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            m + f.iter().map(|v| (beta * (v - m)).exp()).sum::<f64>().ln() / beta
        };
        let mut eta = 0.5;
        let mut current = smooth(&w);
        for _ in 0..4000 {
            let q = mixture(&vertices, &w);
            let f = worst_setting(p, &q);
            let m = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let soft: Vec<f64> = f.iter().map(|v| (beta * (v - m)).exp()).collect();
            let z: f64 = soft.iter().sum();
            let mut grad = vec![0.0; n];
            for (v, vert) in vertices.iter().enumerate() {
                for s in 0..4 {
                    for j in 0..4 {
                        let i = 4 * s + j;
                        if vert[i] > 0.0 && p[i] > 0.0 {
                            grad[v] -= soft[s] / z * p[i] / (q[i] * std::f64::consts::LN_2);
                        }
                    }
                }
            }
            let mut improved = false;
            while eta > 1e-12 {
                let mut trial: Vec<f64> = w.iter().zip(&grad).map(|(wv, g)| wv * (-eta * g).exp()).collect();
                let total: f64 = trial.iter().sum();
                trial.iter_mut().for_each(|v| *v /= total);
                let value = smooth(&trial);
                if value < current {
                    w = trial;
                    current = value;
                    eta *= 1.5;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.min(objective(&w));
        beta *= 10.0;
    }
    best
}

/// Feasibility of `sum_v w_v V_v = P, w >= 0, sum w = 1` built from the
/// explicit vertex list above, solved with the Dantzig rule.
fn independent_local(p: &[f64]) -> bool {
    let vertices = chsh_vertices();
    let mut lp_problem = LpProblem::new(17, 16);
    for (v, vert) in vertices.iter().enumerate() {
        for i in 0..16 {
            lp_problem.set(i, v, vert[i]);
        }
        lp_problem.set(16, v, 1.0);
    }
    lp_problem.b[..16].copy_from_slice(p);
    lp_problem.b[16] = 1.0;
    let sol = lp::solve(&lp_problem, PivotRule::Dantzig, 1e-8).expect("LP runs");
    sol.status != LpStatus::Infeasible
}

fn oracles() -> bellwire::Result<Verdict> {
    let pr = pr_box();
    let solver = s_nl(&pr, 1e-6)?.value;
    let oracle = brute_force_snl(pr.entries());
    let snl_ok = (solver - oracle).abs() <= 1e-4;

    let mut disagreements = 0;
    let mut locals = 0;
    for trial in 0..1000 {
        let mut rng = trial_rng(9, trial);
        let p = match trial % 4 {
            0 => random_local_behavior(&Scenario::chsh(), rng.random())?,
            _ => campaign_behavior(&mut rng),
        };
        let verdict = is_local(&p, 1e-8)?;
        let reference = independent_local(p.entries());
        if let Locality::Nonlocal(cert) = &verdict {
            // The functional must separate on its own terms.
            if cert.violation() <= 0.0 {
                disagreements += 1;
                continue;
            }
        }
        if verdict.is_local() {
            locals += 1;
        }
        if verdict.is_local() != reference {
            disagreements += 1;
        }
    }
    Ok(Verdict {
        pass: snl_ok && disagreements == 0,
        detail: format!(
            "s_nl(PR) solver {solver:.9} vs oracle {oracle:.9} (|diff| {:.1e}); \
             is_local: {disagreements} disagreements over 1000 ({locals} local)",
            (solver - oracle).abs()
        ),
    })
}

fn main() {
    let opts = SolverOptions::default();
    let mut all = true;
    let mut report = |id: usize, name: &str, limit: Duration, run: &dyn Fn() -> bellwire::Result<Verdict>| {
        let start = Instant::now();
        let verdict = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match verdict {
            Ok(v) => (v.pass && elapsed < limit, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!(
            "criterion {id} {} {name}: {detail} [{:.2} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    };

    report(1, "RE doubling under WPICC", Duration::from_secs(1), &|| Ok(doubling()));
    report(2, "uniform-input growth under LOSR", Duration::from_secs(30), &growth);
    report(3, "GW contractivity", Duration::from_secs(60), &|| {
        let start = Instant::now();
        let r = run_campaign(Suite::GwContractivity, 1000, 7, &opts, threads())?;
        Ok(campaign_verdict(&r, start.elapsed(), Duration::from_secs(60)))
    });
    report(4, "minimax identity", Duration::from_secs(120), &|| {
        let start = Instant::now();
        let r = run_campaign(Suite::MinimaxIdentity, 100, 3, &opts, threads())?;
        Ok(campaign_verdict(&r, start.elapsed(), Duration::from_secs(120)))
    });
    report(5, "faithfulness and closure", Duration::from_secs(120), &faithfulness);
    report(6, "monotonicity suites", Duration::from_secs(600), &monotonicity);
    report(7, "oracle equivalence", Duration::from_secs(600), &oracles);
    report(8, "convexity suites", Duration::from_secs(300), &|| {
        let start = Instant::now();
        let r = run_campaign(Suite::Convexity, 100, 17, &opts, threads())?;
        Ok(campaign_verdict(&r, start.elapsed(), Duration::from_secs(300)))
    });

    if !all {
        std::process::exit(1);
    }
}
