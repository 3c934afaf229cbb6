//! Parsing of the `--lambda` flag.

use std::fs;
use std::path::Path;

use edgescout_core::{Error, LambdaPlan};

use crate::CliError;

/// Turns `--lambda` and `--lambda-bar` into a plan.
pub fn parse_plan(spec: &str, lambda_bar: Option<f64>) -> Result<LambdaPlan, CliError> {
    let plan = if spec == "plugin" {
        LambdaPlan::Plugin { lambda_bar }
    } else if let Some(x) = spec.strip_prefix("const:") {
        let value = x
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("--lambda const:{x}: not a number")))?;
        LambdaPlan::Constant { value }
    } else if spec == "schedule:default" {
        LambdaPlan::default_knowledge()
    } else if let Some(path) = spec.strip_prefix("schedule:") {
        LambdaPlan::Schedule {
            values: read_schedule(Path::new(path))?,
        }
    } else {
        return Err(CliError::usage(format!(
            "--lambda {spec:?}: expected plugin, const:<x>, schedule:<path> or schedule:default"
        )));
    };
    if lambda_bar.is_some() && !matches!(plan, LambdaPlan::Plugin { .. }) {
        return Err(CliError::usage(
            "--lambda-bar only applies to --lambda plugin",
        ));
    }
    Ok(plan)
}

/// Reads one λ per time step, separated by commas or whitespace. Lines
/// starting with `#` are ignored.
pub fn read_schedule(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: i as u64 + 1,
                msg: format!("schedule entry {tok:?} is not a number"),
            })?;
            values.push(v);
        }
    }
    Ok(values)
}
