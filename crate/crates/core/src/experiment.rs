//! Monte Carlo harness: replicate (scenario × grid point × method), score
//! each selection against ground truth and aggregate FDR and power.
//!
//! A replication's panel is seeded from `(grid seed, scenario, T, n_alt, rep)`
//! only, so every method in a cell is evaluated on the same panels. Results
//! are collected in replication order and summed sequentially, making the
//! output independent of thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{binom_tail_p, e_evidence, m_pvalues, run_eprocess, LambdaStrategy};
use crate::generators::{
    knowledge_schedule, Layout, ScenarioParams, KNOWLEDGE_OFF, KNOWLEDGE_PEAK,
};
use crate::model::{EvidenceVector, HypothesisSpec, ScenarioTag, ScenarioTruth, SelectionResult};
use crate::rng::{derive_seed, StreamFamily};
use crate::selection::{select, BhConfig};

/// Salt separating the BH randomization seed from the panel seed.
const RANDOMIZE_SALT: u64 = 0x52_41_4E_44;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// BH on misspecification p-values.
    BhM,
    /// BH on `P^m·h_n`.
    By,
    /// BH on `1/E`.
    Ebh,
    /// e-BH with randomized thresholds.
    EbhRandomized,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::BhM, Method::By, Method::Ebh, Method::EbhRandomized];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::BhM => "bh-m",
            Method::By => "by",
            Method::Ebh => "ebh",
            Method::EbhRandomized => "ebh-randomized",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }

    fn uses_evalues(&self) -> bool {
        matches!(self, Method::Ebh | Method::EbhRandomized)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// λ construction for the e-based methods, resolved per panel length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaPlan {
    /// Running-mean plug-in; `None` means 1/π − 0.01.
    Plugin {
        lambda_bar: Option<f64>,
    },
    Constant {
        value: f64,
    },
    /// Periodic domain-knowledge schedule.
    Knowledge {
        period: usize,
        off_value: f64,
        peak_value: f64,
    },
    /// Explicit schedule; its first T entries are used for a T-step panel.
    Schedule {
        values: Vec<f64>,
    },
}

impl Default for LambdaPlan {
    fn default() -> Self {
        LambdaPlan::Plugin { lambda_bar: None }
    }
}

impl LambdaPlan {
    pub fn default_knowledge() -> Self {
        LambdaPlan::Knowledge {
            period: 5,
            off_value: KNOWLEDGE_OFF,
            peak_value: KNOWLEDGE_PEAK,
        }
    }

    pub fn strategy(&self, pi: f64, n_steps: usize) -> Result<LambdaStrategy> {
        let s = match self {
            LambdaPlan::Plugin { lambda_bar } => {
                LambdaStrategy::plugin(lambda_bar.unwrap_or(1.0 / pi - 0.01))
            }
            LambdaPlan::Constant { value } => LambdaStrategy::constant(*value),
            LambdaPlan::Knowledge {
                period,
                off_value,
                peak_value,
            } => LambdaStrategy::schedule(knowledge_schedule(
                n_steps,
                *period,
                *off_value,
                *peak_value,
                pi,
            )?),
            LambdaPlan::Schedule { values } => {
                if values.len() < n_steps {
                    return Err(Error::ShapeMismatch(format!(
                        "lambda schedule has {} entries, panel needs {n_steps}",
                        values.len()
                    )));
                }
                LambdaStrategy::schedule(values[..n_steps].to_vec())
            }
        };
        s.validate(pi, n_steps)?;
        Ok(s)
    }

    /// Short description used in output tables.
    pub fn label(&self, pi: f64) -> String {
        match self {
            LambdaPlan::Plugin { lambda_bar } => {
                format!("plugin:{}", lambda_bar.unwrap_or(1.0 / pi - 0.01))
            }
            LambdaPlan::Constant { value } => format!("const:{value}"),
            LambdaPlan::Knowledge {
                period,
                off_value,
                peak_value,
            } => format!("knowledge:{period}:{off_value}:{peak_value}"),
            LambdaPlan::Schedule { values } => format!("schedule:{}", values.len()),
        }
    }
}

/// The experimental grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunGrid {
    pub t_values: Vec<usize>,
    pub n_alt_values: Vec<usize>,
    pub n_edges: usize,
    pub pi: f64,
    pub alpha: f64,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub lambda: LambdaPlan,
}

impl Default for RunGrid {
    fn default() -> Self {
        Self {
            t_values: vec![100, 200, 300, 400, 500],
            n_alt_values: vec![30, 60, 90, 120, 150],
            n_edges: 300,
            pi: 0.1,
            alpha: 0.1,
            replications: 500,
            methods: vec![Method::BhM, Method::By, Method::Ebh],
            seed: 0,
            lambda: LambdaPlan::default(),
        }
    }
}

impl RunGrid {
    pub fn validate(&self) -> Result<()> {
        HypothesisSpec::new(self.pi, self.alpha)?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.n_edges == 0 {
            return Err(Error::InvalidConfig("n_edges must be positive".into()));
        }
        if self.t_values.is_empty() || self.t_values.contains(&0) {
            return Err(Error::InvalidConfig("t values must be positive".into()));
        }
        if self.n_alt_values.is_empty() || self.n_alt_values.contains(&0) {
            return Err(Error::InvalidConfig("n_alt values must be positive".into()));
        }
        if let Some(&bad) = self.n_alt_values.iter().find(|&&a| a > self.n_edges) {
            return Err(Error::InvalidConfig(format!(
                "n_alt = {bad} exceeds n_edges = {}",
                self.n_edges
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        Ok(())
    }

    /// FDR ceiling `α·(n − n_alt)/n` of BY and e-BH.
    pub fn fdr_bound(&self, n_alt: usize) -> f64 {
        self.alpha * (self.n_edges - n_alt) as f64 / self.n_edges as f64
    }
}

/// Aggregated FDR and power for one (scenario, method, T, n_alt) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: ScenarioTag,
    pub method: Method,
    pub t: usize,
    pub n_alt: usize,
    pub replications: usize,
    pub lambda: String,
    pub fdr_hat: f64,
    pub fdr_se: f64,
    pub pwr_hat: f64,
    pub pwr_se: f64,
    pub mean_rejections: f64,
}

/// False discovery and true positive proportions of one selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunScore {
    pub fdp: f64,
    pub tpp: f64,
    pub n_rejected: usize,
}

/// `|H0 ∩ Ĥ1| / |Ĥ1|` with `0/0 = 0`.
pub fn false_discovery_proportion(alternative: &[bool], rejected: &[usize]) -> f64 {
    if rejected.is_empty() {
        return 0.0;
    }
    let false_hits = rejected.iter().filter(|&&i| !alternative[i]).count();
    false_hits as f64 / rejected.len() as f64
}

pub fn score_run(truth: &ScenarioTruth, result: &SelectionResult) -> Result<RunScore> {
    let n = truth.panel.n_edges();
    if let Some(&bad) = result.rejected.iter().find(|&&i| i >= n) {
        return Err(Error::ShapeMismatch(format!(
            "rejected index {bad} outside a panel of {n} edges"
        )));
    }
    if truth.h1_indices.is_empty() {
        return Err(Error::NoAlternatives);
    }
    let mask = truth.alternative_mask();
    let true_hits = result.rejected.iter().filter(|&&i| mask[i]).count();
    Ok(RunScore {
        fdp: false_discovery_proportion(&mask, &result.rejected),
        tpp: true_hits as f64 / truth.h1_indices.len() as f64,
        n_rejected: result.rejected.len(),
    })
}

fn scenario_code(tag: ScenarioTag) -> u64 {
    match tag {
        ScenarioTag::Iid => 1,
        ScenarioTag::Logistic => 2,
        ScenarioTag::BernoulliVar => 3,
        ScenarioTag::LevelShift => 4,
        ScenarioTag::Periodic => 5,
    }
}

/// Seed of replication `rep` in cell `(t, n_alt)`.
pub fn replication_seed(
    grid_seed: u64,
    tag: ScenarioTag,
    t: usize,
    n_alt: usize,
    rep: usize,
) -> u64 {
    derive_seed(
        grid_seed,
        &[scenario_code(tag), t as u64, n_alt as u64, rep as u64],
    )
}

/// Evidence and selection for every requested method on one panel.
pub fn evaluate_methods(
    truth: &ScenarioTruth,
    spec: &HypothesisSpec,
    methods: &[Method],
    lambda: &LambdaStrategy,
    randomize_seed: u64,
) -> Result<Vec<SelectionResult>> {
    let panel = &truth.panel;
    let mut m_plain: Option<EvidenceVector> = None;
    let mut m_by: Option<EvidenceVector> = None;
    let mut e_vals: Option<EvidenceVector> = None;
    let alpha = spec.alpha();
    methods
        .iter()
        .map(|method| match method {
            Method::BhM => {
                let ev = match &m_plain {
                    Some(ev) => ev,
                    None => m_plain.insert(m_pvalues(panel, spec, false)?),
                };
                select(ev, &BhConfig::new(alpha))
            }
            Method::By => {
                let ev = match &m_by {
                    Some(ev) => ev,
                    None => m_by.insert(m_pvalues(panel, spec, true)?),
                };
                select(ev, &BhConfig::new(alpha))
            }
            Method::Ebh | Method::EbhRandomized => {
                let ev = match &e_vals {
                    Some(ev) => ev,
                    None => e_vals.insert(e_evidence(panel, spec, lambda)?),
                };
                let cfg = if *method == Method::EbhRandomized {
                    BhConfig::randomized(alpha, randomize_seed)
                } else {
                    BhConfig::new(alpha)
                };
                select(ev, &cfg)
            }
        })
        .collect()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// All methods of one grid cell.
pub fn run_cell(
    grid: &RunGrid,
    scenario: &ScenarioParams,
    t: usize,
    n_alt: usize,
) -> Result<Vec<CellSummary>> {
    let spec = HypothesisSpec::new(grid.pi, grid.alpha)?;
    let needs_e = grid.methods.iter().any(Method::uses_evalues);
    let strategy = if needs_e {
        grid.lambda.strategy(grid.pi, t)?
    } else {
        LambdaStrategy::constant(0.0)
    };
    let tag = scenario.tag();

    let per_rep: Vec<Vec<RunScore>> = (0..grid.replications)
        .into_par_iter()
        .map(|rep| {
            let seed = replication_seed(grid.seed, tag, t, n_alt, rep);
            let attempt = || -> Result<Vec<RunScore>> {
                let truth = scenario.generate(&Layout::new(grid.n_edges, t, n_alt, seed))?;
                let rand_seed = derive_seed(seed, &[RANDOMIZE_SALT]);
                evaluate_methods(&truth, &spec, &grid.methods, &strategy, rand_seed)?
                    .iter()
                    .map(|sel| score_run(&truth, sel))
                    .collect()
            };
            attempt().map_err(|e| Error::Replication {
                t,
                n_alt,
                rep,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let label = grid.lambda.label(grid.pi);
    Ok(grid
        .methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let fdp: Vec<f64> = per_rep.iter().map(|r| r[m].fdp).collect();
            let tpp: Vec<f64> = per_rep.iter().map(|r| r[m].tpp).collect();
            let rejections: Vec<f64> = per_rep.iter().map(|r| r[m].n_rejected as f64).collect();
            let (fdr_hat, fdr_se) = mean_and_se(&fdp);
            let (pwr_hat, pwr_se) = mean_and_se(&tpp);
            let (mean_rejections, _) = mean_and_se(&rejections);
            CellSummary {
                scenario: tag,
                method,
                t,
                n_alt,
                replications: grid.replications,
                lambda: if method.uses_evalues() {
                    label.clone()
                } else {
                    "-".to_string()
                },
                fdr_hat,
                fdr_se,
                pwr_hat,
                pwr_se,
                mean_rejections,
            }
        })
        .collect())
}

/// Every cell of the grid, ordered by T, then n_alt, then method.
pub fn run_grid(grid: &RunGrid, scenario: &ScenarioParams) -> Result<Vec<CellSummary>> {
    grid.validate()?;
    let mut out =
        Vec::with_capacity(grid.t_values.len() * grid.n_alt_values.len() * grid.methods.len());
    for &t in &grid.t_values {
        for &n_alt in &grid.n_alt_values {
            out.extend(run_cell(grid, scenario, t, n_alt)?);
        }
    }
    Ok(out)
}

pub const MIN_VALIDITY_REPS: usize = 10_000;

/// Settings for the null-validity Monte Carlo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityConfig {
    pub n_steps: usize,
    pub reps: usize,
    pub seed: u64,
    /// Plug-in cap; `None` means 1/π − 0.01.
    pub lambda_bar: Option<f64>,
    /// Panel width used for the stopping threshold `n/α`.
    pub threshold_edges: usize,
    /// Null connection probability; `None` means the boundary ξ = π.
    pub null_xi: Option<f64>,
    pub levels: Vec<f64>,
}

impl Default for ValidityConfig {
    fn default() -> Self {
        Self {
            n_steps: 100,
            reps: 100_000,
            seed: 0,
            lambda_bar: None,
            threshold_edges: 1,
            null_xi: None,
            levels: vec![
                0.01, 0.05, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityRow {
    pub level: f64,
    pub rate: f64,
    pub se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub pi: f64,
    pub alpha: f64,
    pub n_steps: usize,
    pub reps: usize,
    pub seed: u64,
    pub lambda_bar: f64,
    pub threshold_edges: usize,
    pub null_xi: f64,
    /// Mean of the stopped e-values and its standard error.
    pub e_mean: f64,
    pub e_se: f64,
    pub e_pass: bool,
    /// Empirical `P(P^m ≤ level)` per level.
    pub uniformity: Vec<UniformityRow>,
    pub pass: bool,
}

/// Checks `E[E_i] ≤ 1` and `P(P^m_i ≤ a) ≤ a` by simulation under a null,
/// flagging anything beyond three standard errors.
pub fn validity_suite(spec: &HypothesisSpec, cfg: &ValidityConfig) -> Result<ValidityReport> {
    if cfg.reps < MIN_VALIDITY_REPS {
        return Err(Error::RepsTooSmall {
            min: MIN_VALIDITY_REPS,
            got: cfg.reps,
        });
    }
    if cfg.n_steps == 0 || cfg.threshold_edges == 0 {
        return Err(Error::InvalidConfig(
            "n_steps and threshold_edges must be positive".into(),
        ));
    }
    let pi = spec.pi();
    let xi = cfg.null_xi.unwrap_or(pi);
    if !(0.0..=pi).contains(&xi) {
        return Err(Error::InvalidConfig(format!(
            "null xi = {xi} must lie in [0, pi]"
        )));
    }
    let lambda_bar = cfg.lambda_bar.unwrap_or(spec.default_lambda_bar());
    let strategy = LambdaStrategy::plugin(lambda_bar);
    strategy.validate(pi, cfg.n_steps)?;
    let family = StreamFamily::new(cfg.seed);
    let trials = cfg.n_steps as u64;

    let draws: Vec<(f64, f64)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = family.stream(rep as u64);
            let series: Vec<u8> = (0..cfg.n_steps)
                .map(|_| u8::from(rng.random::<f64>() < xi))
                .collect();
            let trace = run_eprocess(&series, spec, &strategy, cfg.threshold_edges)?;
            let s: u64 = series.iter().map(|&x| u64::from(x)).sum();
            Ok((trace.stopped_log_e.exp(), binom_tail_p(s, trials, pi)?))
        })
        .collect::<Result<_>>()?;

    let evals: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let (e_mean, e_se) = mean_and_se(&evals);
    let e_pass = e_mean <= 1.0 + 3.0 * e_se;

    let n = cfg.reps as f64;
    let uniformity: Vec<UniformityRow> = cfg
        .levels
        .iter()
        .map(|&level| {
            let hits = draws.iter().filter(|d| d.1 <= level).count() as f64;
            let rate = hits / n;
            let se = (rate * (1.0 - rate) / n).sqrt();
            UniformityRow {
                level,
                rate,
                se,
                pass: rate <= level + 3.0 * se,
            }
        })
        .collect();
    let pass = e_pass && uniformity.iter().all(|r| r.pass);
    Ok(ValidityReport {
        pi,
        alpha: spec.alpha(),
        n_steps: cfg.n_steps,
        reps: cfg.reps,
        seed: cfg.seed,
        lambda_bar,
        threshold_edges: cfg.threshold_edges,
        null_xi: xi,
        e_mean,
        e_se,
        e_pass,
        uniformity,
        pass,
    })
}
