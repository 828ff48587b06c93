//! The `bellwire` command line.
//!
//! Exit status is 0 when every check passes (or a reproduction is reported
//! as degenerate), 1 when a check fails and 2 on usage, input or solver
//! errors.

pub mod campaign;
pub mod inputs;
pub mod reproduce;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::behavior::Behavior;
use crate::divergence::{behavior_re, setting_divergences};
use crate::geometry::{
    is_local_with, is_no_signaling, Locality, LocalityOptions, DEFAULT_VERTEX_CAP,
};
use crate::monotones::{
    evaluate, MonotoneResult, Quantifier, SolverOptions, DEFAULT_RESTARTS, DEFAULT_TOL,
};
use campaign::{run_campaign, Suite};
use inputs::Input;

#[derive(Debug, Parser)]
#[command(
    name = "bellwire",
    version,
    about = "Bell behaviors, wirings, relative entropy and nonlocality monotones"
)]
pub struct Cli {
    /// Solver and comparison tolerance, in bits where applicable.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL, value_parser = positive)]
    pub tol: f64,

    /// Refuse scenarios with more local vertices than this.
    #[arg(long, global = true, default_value_t = DEFAULT_VERTEX_CAP)]
    pub vertex_cap: u64,

    /// Upper bound on campaign worker threads.
    #[arg(long, global = true, env = "BELLWIRE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S_b between the two single-Bob-setting behaviors before and after the
    /// preset WPICC wiring; fails unless the ratio is 2 within --tol.
    #[command(name = "reproduce-thm2")]
    ReproduceThm2 {
        #[arg(long, value_parser = open_half)]
        epsilon: f64,
    },
    /// S_u of the four-setting Tsirelson behavior before and after the
    /// preset LOSR wiring; fails unless v_f >= 4 v_0 - slack and v_0 > tol.
    #[command(name = "reproduce-thm5")]
    ReproduceThm5,
    /// Seeded property campaign, one CSV row per check.
    ///
    /// CSV columns: suite,trial,check,f_before,f_after,slack,violation,error.
    /// A row is a violation when f_after > f_before + slack (for
    /// minimax_identity: |f_before - f_after| > slack). Solver errors fill
    /// the error column and leave the numeric columns NaN.
    Campaign {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-shot evaluation of a library operation.
    ///
    /// Inputs are JSON files or presets: pr-box, tsirelson, appendix-c-p0,
    /// appendix-c-p0prime, appendix-f-pf, white-noise[:sA,rA,sB,rB] and the
    /// wirings appendix-c-wpicc, appendix-f-losr. For `apply`, one input is
    /// the wiring and the other the behavior.
    ///
    /// CSV layouts: ns_check `no_signaling,max_residual`; local_check
    /// `verdict,x,y,a,b,value` (model entries or functional coefficients);
    /// sb `x,y,bits,argmax`; monotones
    /// `quantifier,value,is_lower_bound,gap_estimate,iterations`; apply
    /// `x,y,a,b,p`.
    Eval {
        #[arg(value_enum)]
        what: What,
        #[arg(long = "in")]
        input: String,
        #[arg(long = "in2")]
        input2: Option<String>,
        /// Parameter of the appendix-c presets.
        #[arg(long, value_parser = open_half)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Random restarts for suc.
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum What {
    NsCheck,
    LocalCheck,
    Sb,
    Snl,
    Su,
    Suc,
    Sc,
    Apply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn open_half(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 0.5 {
        Ok(v)
    } else {
        Err(format!("{v} must lie in (0, 1/2)"))
    }
}

/// Result of one command: text to emit and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(&r).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    Ok(String::from_utf8(bytes).expect("UTF-8"))
}

fn behavior_csv(p: &Behavior) -> Result<String, String> {
    let sc = *p.scenario();
    let mut rows = Vec::with_capacity(sc.len());
    for x in 0..sc.s_a {
        for y in 0..sc.s_b {
            for a in 0..sc.r_a {
                for b in 0..sc.r_b {
                    rows.push(vec![
                        x.to_string(),
                        y.to_string(),
                        a.to_string(),
                        b.to_string(),
                        p.get(x, y, a, b).to_string(),
                    ]);
                }
            }
        }
    }
    csv_string(&["x", "y", "a", "b", "p"], rows)
}

fn monotone_csv(r: &MonotoneResult) -> Result<String, String> {
    csv_string(
        &[
            "quantifier",
            "value",
            "is_lower_bound",
            "gap_estimate",
            "iterations",
        ],
        vec![vec![
            r.quantifier.name().to_string(),
            r.value.to_string(),
            r.is_lower_bound.to_string(),
            r.gap_estimate.to_string(),
            r.iterations.to_string(),
        ]],
    )
}

fn locality_csv(l: &Locality) -> Result<String, String> {
    let (verdict, sc, values) = match l {
        Locality::Local(m) => ("local", m.scenario, m.reconstruct_entries()),
        Locality::Nonlocal(c) => ("nonlocal", c.scenario, c.coefficients.clone()),
    };
    let mut rows = Vec::with_capacity(sc.len());
    for x in 0..sc.s_a {
        for y in 0..sc.s_b {
            for a in 0..sc.r_a {
                for b in 0..sc.r_b {
                    let v = values[sc.index(x, y, a, b)];
                    rows.push(vec![
                        verdict.into(),
                        x.to_string(),
                        y.to_string(),
                        a.to_string(),
                        b.to_string(),
                        v.to_string(),
                    ]);
                }
            }
        }
    }
    csv_string(&["verdict", "x", "y", "a", "b", "value"], rows)
}

fn solver_options(cli: &Cli) -> SolverOptions {
    SolverOptions {
        tol: cli.tol,
        vertex_cap: cli.vertex_cap,
        ..Default::default()
    }
}

#[allow(clippy::too_many_arguments)]
fn eval(
    cli: &Cli,
    what: What,
    input: &str,
    input2: Option<&str>,
    epsilon: Option<f64>,
    format: Format,
    restarts: usize,
    seed: u64,
) -> Result<String, String> {
    let need2 = || input2.ok_or_else(|| format!("`{what:?}` needs --in2").to_lowercase());
    let opts = SolverOptions {
        restarts,
        seed,
        ..solver_options(cli)
    };
    match what {
        What::NsCheck => {
            let p = inputs::load_behavior(input, epsilon)?;
            let report = is_no_signaling(&p, cli.tol);
            match format {
                Format::Json => Ok(pretty(&serde_json::to_value(&report).expect("plain data"))),
                Format::Csv => csv_string(
                    &["no_signaling", "max_residual"],
                    vec![vec![
                        report.no_signaling.to_string(),
                        report.max_residual.to_string(),
                    ]],
                ),
            }
        }
        What::LocalCheck => {
            let p = inputs::load_behavior(input, epsilon)?;
            let options = LocalityOptions {
                tol: cli.tol.min(crate::geometry::DEFAULT_LOCAL_TOL),
                vertex_cap: cli.vertex_cap,
                ..Default::default()
            };
            let l = is_local_with(&p, options).map_err(|e| e.to_string())?;
            match format {
                Format::Json => {
                    let mut v = serde_json::to_value(&l).expect("plain data");
                    if let Locality::Nonlocal(c) = &l {
                        v["violation"] = json!(c.violation());
                    }
                    Ok(pretty(&v))
                }
                Format::Csv => locality_csv(&l),
            }
        }
        What::Sb => {
            let p = inputs::load_behavior(input, epsilon)?;
            let q = inputs::load_behavior(&need2()?, epsilon)?;
            let value = behavior_re(&p, &q).map_err(|e| e.to_string())?;
            let per_setting = setting_divergences(&p, &q).map_err(|e| e.to_string())?;
            match format {
                Format::Json => {
                    let mut v = serde_json::to_value(value).expect("plain data");
                    v["per_setting"] = per_setting
                        .iter()
                        .map(|b| {
                            if b.is_finite() {
                                json!(b)
                            } else {
                                json!("inf")
                            }
                        })
                        .collect();
                    Ok(pretty(&v))
                }
                Format::Csv => {
                    let s_b = p.scenario().s_b;
                    let rows = per_setting
                        .iter()
                        .enumerate()
                        .map(|(s, b)| {
                            let (x, y) = (s / s_b, s % s_b);
                            vec![
                                x.to_string(),
                                y.to_string(),
                                b.to_string(),
                                (value.argmax == Some((x, y))).to_string(),
                            ]
                        })
                        .collect();
                    csv_string(&["x", "y", "bits", "argmax"], rows)
                }
            }
        }
        What::Snl | What::Su | What::Suc | What::Sc => {
            let p = inputs::load_behavior(input, epsilon)?;
            let q = match what {
                What::Snl => Quantifier::Snl,
                What::Su => Quantifier::Su,
                What::Suc => Quantifier::Suc,
                _ => Quantifier::Sc,
            };
            let r = evaluate(q, &p, &opts).map_err(|e| e.to_string())?;
            match format {
                Format::Json => Ok(pretty(&r.to_json_value())),
                Format::Csv => monotone_csv(&r),
            }
        }
        What::Apply => {
            let first = inputs::load(input, epsilon)?;
            let second = inputs::load(&need2()?, epsilon)?;
            let (w, p) = match (first, second) {
                (Input::Wiring(w), Input::Behavior(p)) | (Input::Behavior(p), Input::Wiring(w)) => {
                    (w, p)
                }
                (a, b) => {
                    return Err(format!(
                        "apply needs one wiring and one behavior, got {} and {}",
                        a.kind(),
                        b.kind()
                    ))
                }
            };
            let out = w.apply(&p).map_err(|e| e.to_string())?;
            match format {
                Format::Json => {
                    let mut s = out.to_json();
                    s.push('\n');
                    Ok(s)
                }
                Format::Csv => behavior_csv(&out),
            }
        }
    }
}

/// Runs a parsed command line without touching stdout.
pub fn execute(cli: &Cli) -> Result<Outcome, String> {
    match &cli.command {
        Command::ReproduceThm2 { epsilon } => {
            let r = reproduce::reproduce_doubling(*epsilon, cli.tol).map_err(|e| e.to_string())?;
            Ok(Outcome {
                text: pretty(&r.body),
                code: r.status.exit_code(),
            })
        }
        Command::ReproduceThm5 => {
            let r = reproduce::reproduce_growth(&solver_options(cli)).map_err(|e| e.to_string())?;
            Ok(Outcome {
                text: pretty(&r.body),
                code: r.status.exit_code(),
            })
        }
        Command::Campaign {
            suite,
            trials,
            seed,
            ..
        } => {
            let report = run_campaign(
                *suite,
                *trials as usize,
                *seed,
                &solver_options(cli),
                cli.threads,
            )
            .map_err(|e| e.to_string())?;
            eprintln!(
                "{}: {} rows, {} violations, {} errors",
                suite.name(),
                report.rows.len(),
                report.violations(),
                report.errors()
            );
            let text = report.to_csv().map_err(|e| e.to_string())?;
            Ok(Outcome {
                text,
                code: if report.passed() { 0 } else { 1 },
            })
        }
        Command::Eval {
            what,
            input,
            input2,
            epsilon,
            format,
            restarts,
            seed,
            ..
        } => {
            let text = eval(
                cli,
                *what,
                input,
                input2.as_deref(),
                *epsilon,
                *format,
                *restarts,
                *seed,
            )?;
            Ok(Outcome { text, code: 0 })
        }
    }
}

fn out_path(cli: &Cli) -> Option<&PathBuf> {
    match &cli.command {
        Command::Campaign { out, .. } | Command::Eval { out, .. } => out.as_ref(),
        _ => None,
    }
}

/// Entry point of the `bellwire` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            let written = match out_path(&cli) {
                Some(path) => std::fs::write(path, &outcome.text)
                    .map_err(|e| format!("{}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(outcome.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => ExitCode::from(outcome.code),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<Outcome, String> {
        let cli = Cli::try_parse_from(std::iter::once("bellwire").chain(args.iter().copied()))
            .map_err(|e| e.to_string())?;
        execute(&cli)
    }

    #[test]
    fn flags_parse() {
        <Cli as clap::CommandFactory>::command().debug_assert();
        assert!(run(&["reproduce-thm2", "--epsilon", "0.6"]).is_err());
        assert!(run(&["--tol", "-1", "reproduce-thm2", "--epsilon", "0.1"]).is_err());
    }

    #[test]
    fn sb_on_presets() {
        let out = run(&[
            "eval",
            "sb",
            "--in",
            "appendix-c-p0",
            "--in2",
            "appendix-c-p0prime",
            "--epsilon",
            "0.125",
        ])
        .unwrap();
        let v: Value = serde_json::from_str(&out.text).unwrap();
        assert!((v["bits"].as_f64().unwrap() - 0.25 * 3f64.log2()).abs() < 1e-12);
        assert_eq!(v["argmax"], json!([0, 0]));
    }

    #[test]
    fn local_check_pr_box() {
        let out = run(&["eval", "local_check", "--in", "pr-box"]).unwrap();
        let v: Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["verdict"], "nonlocal");
        assert!(v["violation"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn apply_in_either_order() {
        let a = run(&[
            "eval",
            "apply",
            "--in",
            "appendix-c-wpicc",
            "--in2",
            "appendix-c-p0",
        ])
        .unwrap();
        let b = run(&[
            "eval",
            "apply",
            "--in",
            "appendix-c-p0",
            "--in2",
            "appendix-c-wpicc",
            "--format",
            "csv",
        ])
        .unwrap();
        let p = Behavior::from_json(&a.text).unwrap();
        assert!(b.text.starts_with("x,y,a,b,p\n"));
        assert_eq!(b.text.lines().count(), 1 + p.scenario().len());
        assert!(run(&["eval", "apply", "--in", "pr-box", "--in2", "pr-box"]).is_err());
    }

    #[test]
    fn missing_file_is_an_error() {
        let err = run(&["eval", "ns_check", "--in", "/nonexistent/behavior.json"]).unwrap_err();
        assert!(err.contains("neither a file nor a preset"));
    }
}
