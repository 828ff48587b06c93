use serde::Serialize;

use super::{evaluate, s_uc_with, MonotoneResult, Quantifier, SolverOptions};
use crate::behavior::{Behavior, InputDistribution, InputKind};
use crate::error::{Error, Result};
use crate::wirings::{LosrWiring, UclosrWiring, WiringDescriptor};

/// One comparison `f_after <= f_before + slack`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub behavior_id: String,
    pub wiring_id: String,
    pub f_before: f64,
    pub f_after: f64,
    pub slack: f64,
    pub violation: bool,
}

impl AuditRow {
    pub fn ratio(&self) -> f64 {
        self.f_after / self.f_before
    }
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub quantifier: Quantifier,
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violation).count()
    }

    /// CSV with columns `behavior_id,wiring_id,f_before,f_after,slack,violation`.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn slack(results: &[&MonotoneResult], tol: f64) -> f64 {
    2.0 * results.iter().map(|r| r.gap_estimate).sum::<f64>() + tol
}

fn product_parts(d: &InputDistribution) -> Option<(&[f64], &[f64])> {
    match d.kind() {
        InputKind::Product { d_x, d_y } => Some((d_x, d_y)),
        _ => None,
    }
}

/// Input distribution that a product wiring induces on the initial box when
/// the final inputs are drawn from `d_f`.
fn pushforward(w: &UclosrWiring, d_f: &InputDistribution) -> Option<InputDistribution> {
    let (fx, fy) = product_parts(d_f)?;
    let i = w.initial;
    let d_x = (0..i.s_a)
        .map(|x| {
            fx.iter()
                .enumerate()
                .map(|(chi, p)| p * w.input_a.get(chi, x))
                .sum()
        })
        .collect();
    let d_y = (0..i.s_b)
        .map(|y| {
            fy.iter()
                .enumerate()
                .map(|(psi, p)| p * w.input_b.get(psi, y))
                .sum()
        })
        .collect();
    InputDistribution::product(d_x, d_y).ok()
}

fn losr_of(w: &WiringDescriptor) -> Option<LosrWiring> {
    match w {
        WiringDescriptor::Losr(l) => Some(l.clone()),
        WiringDescriptor::Uclosr(u) => Some(u.to_losr()),
        _ => None,
    }
}

/// Checks `f(W(p)) <= f(p) + slack` for every wiring, where `slack` is twice
/// the summed solver gaps plus `opts.tol`.
///
/// For the product-input quantifier, whose value is a lower bound, the
/// evaluation at `p` is additionally started from the input distributions
/// that the wiring's local input maps induce from the optimizer at `W(p)`.
pub fn monotonicity_audit(
    f: Quantifier,
    p: &Behavior,
    behavior_id: &str,
    wirings: &[(String, WiringDescriptor)],
    opts: &SolverOptions,
) -> Result<AuditReport> {
    let shared_before = if f == Quantifier::Suc {
        None
    } else {
        Some(evaluate(f, p, opts)?)
    };
    let mut rows = Vec::with_capacity(wirings.len());
    for (wiring_id, w) in wirings {
        let after_behavior = w.apply(p)?;
        let after = evaluate(f, &after_behavior, opts)?;
        let before = match &shared_before {
            Some(b) => b.clone(),
            None => {
                let mut seeds = Vec::new();
                if let (Some(losr), Some(d_f)) = (losr_of(w), after.optimizer_inputs.as_ref()) {
                    seeds.extend(
                        losr.components
                            .iter()
                            .filter_map(|c| pushforward(&c.wiring, d_f)),
                    );
                }
                s_uc_with(p, opts, &seeds)?
            }
        };
        let s = slack(&[&before, &after], opts.tol);
        rows.push(AuditRow {
            behavior_id: behavior_id.to_string(),
            wiring_id: wiring_id.clone(),
            f_before: before.value,
            f_after: after.value,
            slack: s,
            violation: after.value > before.value + s,
        });
    }
    Ok(AuditReport {
        quantifier: f,
        rows,
    })
}

/// Checks `f(mu p + (1 - mu) p') <= mu f(p) + (1 - mu) f(p') + slack`.
/// Rows report the right-hand side as `f_before` and the mixture value as
/// `f_after`.
pub fn convexity_audit(
    f: Quantifier,
    p: &Behavior,
    p_prime: &Behavior,
    mus: &[f64],
    opts: &SolverOptions,
) -> Result<AuditReport> {
    let mut rows = Vec::with_capacity(mus.len());
    let fixed = if f == Quantifier::Suc {
        None
    } else {
        Some((evaluate(f, p, opts)?, evaluate(f, p_prime, opts)?))
    };
    for &mu in mus {
        let mix = p.mix(p_prime, mu)?;
        let at_mix = evaluate(f, &mix, opts)?;
        let (a, b) = match &fixed {
            Some(pair) => pair.clone(),
            None => {
                let seeds: Vec<InputDistribution> =
                    at_mix.optimizer_inputs.iter().cloned().collect();
                (
                    s_uc_with(p, opts, &seeds)?,
                    s_uc_with(p_prime, opts, &seeds)?,
                )
            }
        };
        let rhs = mu * a.value + (1.0 - mu) * b.value;
        let s = slack(&[&at_mix, &a, &b], opts.tol);
        rows.push(AuditRow {
            behavior_id: format!("mu={mu}"),
            wiring_id: "mixture".into(),
            f_before: rhs,
            f_after: at_mix.value,
            slack: s,
            violation: at_mix.value > rhs + s,
        });
    }
    Ok(AuditReport {
        quantifier: f,
        rows,
    })
}
