//! Resolution of `--in` arguments: preset names or JSON files.

use std::path::Path;

use crate::behavior::{named_behavior, Behavior, NamedBehavior, Scenario};
use crate::error::Error;
use crate::wirings::{presets, WiringDescriptor};

/// Behavior presets accepted by `--in`.
pub const BEHAVIOR_PRESETS: [&str; 6] = [
    "pr-box",
    "tsirelson",
    "appendix-c-p0",
    "appendix-c-p0prime",
    "appendix-f-pf",
    "white-noise[:sA,rA,sB,rB]",
];

/// Wiring presets accepted by `--in`.
pub const WIRING_PRESETS: [&str; 2] = ["appendix-c-wpicc", "appendix-f-losr"];

pub const DEFAULT_EPSILON: f64 = 0.125;

#[derive(Debug, Clone)]
pub enum Input {
    Behavior(Behavior),
    Wiring(WiringDescriptor),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::Behavior(_) => "behavior",
            Input::Wiring(_) => "wiring",
        }
    }
}

fn white_noise(spec: &str) -> Result<Behavior, String> {
    let scenario = match spec.strip_prefix("white-noise") {
        Some("") => Scenario::chsh(),
        Some(rest) => {
            let dims: Vec<usize> = rest
                .trim_start_matches(':')
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| format!("white-noise dimension `{t}`: {e}"))
                })
                .collect::<Result<_, _>>()?;
            let [s_a, r_a, s_b, r_b] = dims[..] else {
                return Err(format!(
                    "white-noise expects four dimensions sA,rA,sB,rB, got `{rest}`"
                ));
            };
            Scenario::new(s_a, r_a, s_b, r_b).map_err(|e| e.to_string())?
        }
        None => unreachable!("caller checked the prefix"),
    };
    Ok(Behavior::white_noise(scenario))
}

fn preset(name: &str, epsilon: f64) -> Option<Result<Input, String>> {
    let behavior = |n: NamedBehavior| {
        Some(
            named_behavior(&n)
                .map(Input::Behavior)
                .map_err(|e| e.to_string()),
        )
    };
    match name {
        "pr-box" => behavior(NamedBehavior::PrBox),
        "tsirelson" => behavior(NamedBehavior::TsirelsonFourSetting {
            p: crate::behavior::tsirelson_p(),
        }),
        "appendix-c-p0" => behavior(NamedBehavior::AppendixCP0 { epsilon }),
        "appendix-c-p0prime" => behavior(NamedBehavior::AppendixCP0Prime { epsilon }),
        "appendix-f-pf" => Some(
            presets::appendix_f_losr()
                .apply(&crate::behavior::tsirelson_four_setting())
                .map(Input::Behavior)
                .map_err(|e| e.to_string()),
        ),
        "appendix-c-wpicc" => Some(Ok(Input::Wiring(WiringDescriptor::Wpicc(
            presets::appendix_c_wpicc(),
        )))),
        "appendix-f-losr" => Some(Ok(Input::Wiring(WiringDescriptor::Losr(
            presets::appendix_f_losr(),
        )))),
        _ if name.starts_with("white-noise") => Some(white_noise(name).map(Input::Behavior)),
        _ => None,
    }
}

// serde_json messages already carry "at line L column C".
fn describe(err: &serde_json::Error) -> String {
    format!("invalid JSON: {err}")
}

/// Parses a behavior or wiring document. Wirings carry a `"class"` tag.
pub fn parse(text: &str) -> Result<Input, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| describe(&e))?;
    if value.get("class").is_some() {
        return match WiringDescriptor::from_json(text) {
            Ok(w) => Ok(Input::Wiring(w)),
            Err(Error::Json(e)) => Err(describe(&e)),
            Err(e) => Err(e.to_string()),
        };
    }
    match Behavior::from_json(text) {
        Ok(b) => Ok(Input::Behavior(b)),
        Err(Error::Json(e)) => Err(describe(&e)),
        Err(e) => Err(e.to_string()),
    }
}

/// Resolves a preset name first, then a file path.
pub fn load(spec: &str, epsilon: Option<f64>) -> Result<Input, String> {
    if let Some(result) = preset(spec, epsilon.unwrap_or(DEFAULT_EPSILON)) {
        return result.map_err(|e| format!("preset `{spec}`: {e}"));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(format!(
            "`{spec}` is neither a file nor a preset (behaviors: {}; wirings: {})",
            BEHAVIOR_PRESETS.join(", "),
            WIRING_PRESETS.join(", ")
        ));
    }
    let text = std::fs::read_to_string(path).map_err(|e| format!("{spec}: {e}"))?;
    parse(&text).map_err(|e| format!("{spec}: {e}"))
}

pub fn load_behavior(spec: &str, epsilon: Option<f64>) -> Result<Behavior, String> {
    match load(spec, epsilon)? {
        Input::Behavior(b) => Ok(b),
        other => Err(format!(
            "`{spec}` is a {}, expected a behavior",
            other.kind()
        )),
    }
}
