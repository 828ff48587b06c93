//! The two fixed reproductions: RE doubling under a WPICC wiring, and the
//! growth of the uniform-input monotone under an LOSR wiring.

use serde::Serialize;
use serde_json::{json, Value};

use crate::behavior::{named_behavior, tsirelson_four_setting, NamedBehavior};
use crate::divergence::{behavior_re, DivergenceValue};
use crate::error::Result;
use crate::geometry::{is_local_with, Locality, LocalityOptions, DEFAULT_LOCAL_TOL};
use crate::monotones::{monotonicity_audit, s_u_with, Quantifier, SolverOptions};
use crate::wirings::{presets, WiringDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass | Status::Degenerate => 0,
            Status::Fail => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    pub body: Value,
}

/// `(1/2 - 2 eps) log2((1/2 - eps) / eps)`.
pub fn doubling_closed_form(epsilon: f64) -> f64 {
    (0.5 - 2.0 * epsilon) * ((0.5 - epsilon) / epsilon).log2()
}

fn bits(d: &DivergenceValue) -> Value {
    serde_json::to_value(d).expect("plain data")
}

/// S_b of the two single-Bob-setting behaviors before and after the preset
/// WPICC wiring.
pub fn reproduce_doubling(epsilon: f64, tol: f64) -> Result<Report> {
    let p0 = named_behavior(&NamedBehavior::AppendixCP0 { epsilon })?;
    let p1 = named_behavior(&NamedBehavior::AppendixCP0Prime { epsilon })?;
    let wiring = presets::appendix_c_wpicc();
    let before = behavior_re(&p0, &p1)?;
    let (f0, f1) = (wiring.apply(&p0)?, wiring.apply(&p1)?);
    let after = behavior_re(&f0, &f1)?;
    let closed = doubling_closed_form(epsilon);
    let degenerate = before.bits == 0.0 && after.bits == 0.0;
    let ratio = if degenerate {
        None
    } else {
        Some(after.bits / before.bits)
    };
    let status = match ratio {
        None => Status::Degenerate,
        Some(r) if (r - 2.0).abs() <= tol => Status::Pass,
        Some(_) => Status::Fail,
    };
    let body = json!({
        "epsilon": epsilon,
        "sb_before": bits(&before),
        "sb_after": bits(&after),
        "ratio": ratio,
        "closed_form_before": closed,
        "closed_form_after": 2.0 * closed,
        "degenerate": degenerate,
        "tol": tol,
        "status": status,
    });
    Ok(Report { status, body })
}

/// Uniform-input monotone of the four-setting Tsirelson behavior before and
/// after the preset LOSR wiring, plus the sub-checks that make the
/// comparison meaningful.
pub fn reproduce_growth(opts: &SolverOptions) -> Result<Report> {
    let p0 = tsirelson_four_setting();
    let wiring = presets::appendix_f_losr();
    let pf = wiring.apply(&p0)?;

    // Settings with chi, psi in {0,1} must pass through unchanged.
    let mut passthrough = 0.0f64;
    for chi in 0..2 {
        for psi in 0..2 {
            for (u, v) in pf.setting(chi, psi).iter().zip(p0.setting(chi, psi)) {
                passthrough = passthrough.max((u - v).abs());
            }
        }
    }

    let locality = is_local_with(
        &p0,
        LocalityOptions {
            tol: DEFAULT_LOCAL_TOL,
            vertex_cap: opts.vertex_cap,
            ..Default::default()
        },
    )?;
    let certificate_violation = match &locality {
        Locality::Nonlocal(c) => Some(c.violation()),
        Locality::Local(_) => None,
    };

    let v0 = s_u_with(&p0, opts)?;
    let vf = s_u_with(&pf, opts)?;
    let slack = 4.0 * v0.gap_estimate + vf.gap_estimate + opts.tol;
    let audit = monotonicity_audit(
        Quantifier::Su,
        &p0,
        "tsirelson",
        &[(
            "appendix-f-losr".to_string(),
            WiringDescriptor::Losr(wiring),
        )],
        opts,
    )?;

    let checks = json!({
        "growth": vf.value >= 4.0 * v0.value - slack,
        "v0_positive": v0.value > opts.tol,
        "p0_nonlocal": certificate_violation.is_some(),
        "passthrough": passthrough <= 1e-12,
        "audit_flags_violation": audit.violations() == 1,
    });
    let all = checks
        .as_object()
        .expect("object")
        .values()
        .all(|v| v == &Value::Bool(true));
    let status = if all { Status::Pass } else { Status::Fail };
    let body = json!({
        "v0": v0.value,
        "vf": vf.value,
        "ratio": vf.value / v0.value,
        "gap_v0": v0.gap_estimate,
        "gap_vf": vf.gap_estimate,
        "slack": slack,
        "passthrough_max_deviation": passthrough,
        "certificate_violation": certificate_violation,
        "audit": audit.rows,
        "checks": checks,
        "tol": opts.tol,
        "status": status,
    });
    Ok(Report { status, body })
}
