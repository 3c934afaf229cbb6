use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use edgescout_core::detect::InputEcho;
use edgescout_core::experiment::{run_grid, validity_suite};
use edgescout_core::io::{cell_summaries_to_string, ingest_panel_with_digest, sha256_hex};
use edgescout_core::{
    detect as run_detect, DetectOptions, DetectReport, HypothesisSpec, LambdaPlan, Method,
    PanelFormat, Procedure, RunGrid, ScenarioParams, ScenarioTag, ValidityConfig,
};

use crate::lambda::parse_plan;
use crate::{CliError, DetectArgs, MethodArg, SimulateArgs, ValidateArgs};

pub const SUMMARY_CSV: &str = "summary.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(edgescout_core::Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a truncated file behind.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

pub fn detect(a: DetectArgs) -> Result<(), CliError> {
    let spec = HypothesisSpec::new(a.pi, a.alpha)?;
    let procedure = match a.method {
        MethodArg::BhM => Procedure::BhM,
        MethodArg::By => Procedure::By,
        MethodArg::Ebh => Procedure::Ebh,
    };
    if procedure != Procedure::Ebh && (a.lambda != "plugin" || a.lambda_bar.is_some()) {
        return Err(CliError::usage(
            "--lambda and --lambda-bar only apply to --method ebh",
        ));
    }
    if a.randomized && procedure == Procedure::BhM {
        return Err(CliError::usage("--randomized applies to by and ebh only"));
    }
    let randomized_seed = match (a.randomized, a.seed) {
        (true, Some(seed)) => Some(seed),
        (true, None) => return Err(CliError::usage("--randomized requires --seed")),
        (false, _) => None,
    };
    let plan = parse_plan(&a.lambda, a.lambda_bar)?;

    let format = PanelFormat::from(a.format);
    let (panel, digest) = ingest_panel_with_digest(&a.input, format).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", a.input.display(), err.message);
        err
    })?;
    let lambda = plan.strategy(spec.pi(), panel.n_steps())?;
    let opts = DetectOptions {
        spec,
        procedure,
        lambda,
        randomized_seed,
    };
    let detection = run_detect(&panel, &opts)?;
    let input = InputEcho {
        path: a.input.display().to_string(),
        format: format.as_str().to_string(),
        sha256: digest,
        n_edges: panel.n_edges(),
        n_steps: panel.n_steps(),
    };
    let report = DetectReport::build(&panel, input, &opts, &detection);
    let json = to_json(&report)?;
    match &a.out {
        Some(path) => {
            write_atomic(path, json.as_bytes())?;
            println!("{}", report.summary());
            if !report.rejected.is_empty() {
                println!("rejected: {}", report.rejected.join(","));
            }
        }
        None => print!("{json}"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    scenario: &'a ScenarioParams,
    grid: &'a RunGrid,
    rows: usize,
    summary_csv: &'static str,
    summary_sha256: String,
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let methods = a
        .methods
        .iter()
        .map(|m| Method::parse(m.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let lambda: LambdaPlan = parse_plan(&a.lambda, a.lambda_bar)?;
    let grid = RunGrid {
        t_values: a.grid_t,
        n_alt_values: a.grid_nalt,
        n_edges: a.n,
        pi: a.pi,
        alpha: a.alpha,
        replications: a.reps,
        methods,
        seed: a.seed,
        lambda,
    };
    grid.validate()?;
    let scenario = ScenarioParams::defaults(ScenarioTag::from(a.scenario), a.pi);
    let rows = run_grid(&grid, &scenario)?;

    let csv = cell_summaries_to_string(&rows);
    let manifest = Manifest {
        tool: "edgescout",
        version: env!("CARGO_PKG_VERSION"),
        scenario: &scenario,
        grid: &grid,
        rows: rows.len(),
        summary_csv: SUMMARY_CSV,
        summary_sha256: sha256_hex(csv.as_bytes()),
    };
    let manifest = to_json(&manifest)?;

    let created = !a.out_dir.exists();
    fs::create_dir_all(&a.out_dir)?;
    let csv_path = a.out_dir.join(SUMMARY_CSV);
    let manifest_path = a.out_dir.join(MANIFEST_JSON);
    let written = write_atomic(&csv_path, csv.as_bytes())
        .and_then(|()| write_atomic(&manifest_path, manifest.as_bytes()));
    if let Err(e) = written {
        let _ = fs::remove_file(&csv_path);
        let _ = fs::remove_file(&manifest_path);
        if created {
            let _ = fs::remove_dir(&a.out_dir);
        }
        return Err(e);
    }
    println!("{} rows written to {}", rows.len(), csv_path.display());
    Ok(())
}

pub fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let spec = HypothesisSpec::new(a.pi, a.alpha)?;
    let cfg = ValidityConfig {
        n_steps: a.t,
        reps: a.reps,
        seed: a.seed,
        lambda_bar: a.lambda_bar,
        ..ValidityConfig::default()
    };
    let report = validity_suite(&spec, &cfg)?;
    let json = to_json(&report)?;
    match &a.out {
        Some(path) => {
            write_atomic(path, json.as_bytes())?;
            println!(
                "e-mean {:.6} (se {:.6}) {}; super-uniformity {}",
                report.e_mean,
                report.e_se,
                if report.e_pass { "ok" } else { "FLAGGED" },
                if report.uniformity.iter().all(|r| r.pass) {
                    "ok"
                } else {
                    "FLAGGED"
                }
            );
        }
        None => print!("{json}"),
    }
    Ok(())
}
