//! The real-data detection workflow: evidence, selection and a report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{e_evidence, m_pvalues, LambdaStrategy};
use crate::model::{EdgePanel, EvidenceVector, HypothesisSpec, SelectionResult};
use crate::selection::{select, BhConfig};

/// Warning attached to plain BH on misspecification p-values.
pub const BH_M_WARNING: &str = "bh-m applies BH to misspecification p-values, which has no FDR \
guarantee under arbitrary dependence between edges; prefer by or ebh";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    BhM,
    By,
    Ebh,
}

impl Procedure {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bh-m" => Ok(Procedure::BhM),
            "by" => Ok(Procedure::By),
            "ebh" => Ok(Procedure::Ebh),
            _ => Err(Error::InvalidConfig(format!("unknown method {s:?}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Procedure::BhM => "bh-m",
            Procedure::By => "by",
            Procedure::Ebh => "ebh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOptions {
    pub spec: HypothesisSpec,
    pub procedure: Procedure,
    /// λ strategy for `ebh`; ignored otherwise.
    pub lambda: LambdaStrategy,
    /// Seed for randomized thresholds; `None` runs the classical rule.
    pub randomized_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub evidence: EvidenceVector,
    pub selection: SelectionResult,
}

pub fn detect(panel: &EdgePanel, opts: &DetectOptions) -> Result<Detection> {
    let spec = &opts.spec;
    if opts.randomized_seed.is_some() && opts.procedure == Procedure::BhM {
        return Err(Error::InvalidConfig(
            "randomized thresholds apply to by and ebh only".into(),
        ));
    }
    let evidence = match opts.procedure {
        Procedure::BhM => m_pvalues(panel, spec, false)?,
        Procedure::By => m_pvalues(panel, spec, true)?,
        Procedure::Ebh => e_evidence(panel, spec, &opts.lambda)?,
    };
    let cfg = match opts.randomized_seed {
        Some(seed) => BhConfig::randomized(spec.alpha(), seed),
        None => BhConfig::new(spec.alpha()),
    };
    let selection = select(&evidence, &cfg)?;
    Ok(Detection {
        evidence,
        selection,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub format: String,
    pub sha256: String,
    pub n_edges: usize,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub label: String,
    /// e-value for `ebh`, p-value otherwise.
    pub evidence: f64,
    /// p-value entering the BH step.
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_time: Option<usize>,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub input: InputEcho,
    pub pi: f64,
    pub alpha: f64,
    pub method: Procedure,
    pub randomized: bool,
    pub seed: Option<u64>,
    /// λ strategy, for `ebh` only.
    pub lambda: Option<LambdaStrategy>,
    pub k_index: Option<usize>,
    pub cutoff: Option<f64>,
    pub n_rejected: usize,
    pub rejected: Vec<String>,
    pub edges: Vec<EdgeReport>,
    pub warnings: Vec<String>,
}

impl DetectReport {
    pub fn build(
        panel: &EdgePanel,
        input: InputEcho,
        opts: &DetectOptions,
        det: &Detection,
    ) -> Self {
        let mut is_rejected = vec![false; panel.n_edges()];
        for &i in &det.selection.rejected {
            is_rejected[i] = true;
        }
        let stops = det.evidence.stop_times();
        let edges = (0..panel.n_edges())
            .map(|i| EdgeReport {
                label: panel.label(i).into_owned(),
                evidence: det.evidence.values()[i],
                p_value: det.evidence.pvalue(i),
                stop_time: stops.and_then(|s| s[i]),
                rejected: is_rejected[i],
            })
            .collect();
        let mut warnings = Vec::new();
        if opts.procedure == Procedure::BhM {
            warnings.push(BH_M_WARNING.to_string());
        }
        DetectReport {
            input,
            pi: opts.spec.pi(),
            alpha: opts.spec.alpha(),
            method: opts.procedure,
            randomized: det.selection.randomized,
            seed: det.selection.seed_used,
            lambda: (opts.procedure == Procedure::Ebh).then(|| opts.lambda.clone()),
            k_index: det.selection.k_index,
            cutoff: det.selection.cutoff_value,
            n_rejected: det.selection.rejected.len(),
            rejected: det
                .selection
                .rejected
                .iter()
                .map(|&i| panel.label(i).into_owned())
                .collect(),
            edges,
            warnings,
        }
    }

    /// Plain-text summary for a terminal.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "method={} pi={} alpha={} edges={} steps={} rejected={}",
            self.method.as_str(),
            self.pi,
            self.alpha,
            self.input.n_edges,
            self.input.n_steps,
            self.n_rejected
        );
        if let Some(k) = self.k_index {
            s.push_str(&format!(" K={k}"));
        }
        if let Some(c) = self.cutoff {
            s.push_str(&format!(" cutoff={c:e}"));
        }
        for w in &self.warnings {
            s.push_str(&format!("\nwarning: {w}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn echo(panel: &EdgePanel) -> InputEcho {
        InputEcho {
            path: "mem".into(),
            format: "matrix".into(),
            sha256: String::new(),
            n_edges: panel.n_edges(),
            n_steps: panel.n_steps(),
        }
    }

    #[test]
    fn all_zero_panel_rejects_nothing_for_every_method() {
        let panel = EdgePanel::new(5, 40, vec![0; 200], None).unwrap();
        let spec = HypothesisSpec::new(0.1, 0.1).unwrap();
        for procedure in [Procedure::BhM, Procedure::By, Procedure::Ebh] {
            let opts = DetectOptions {
                spec,
                procedure,
                lambda: LambdaStrategy::default_plugin(&spec),
                randomized_seed: None,
            };
            let det = detect(&panel, &opts).unwrap();
            assert!(det.selection.is_empty());
            let report = DetectReport::build(&panel, echo(&panel), &opts, &det);
            assert_eq!(report.n_rejected, 0);
            assert_eq!(report.warnings.is_empty(), procedure != Procedure::BhM);
        }
    }

    #[test]
    fn report_round_trips_and_labels_resolve() {
        let rows = vec![vec![1u8; 30], vec![0u8; 30], vec![1u8; 30]];
        let labels = Some(vec!["x".into(), "y".into(), "z".into()]);
        let panel = EdgePanel::from_rows(rows, labels).unwrap();
        let spec = HypothesisSpec::new(0.01, 0.1).unwrap();
        let opts = DetectOptions {
            spec,
            procedure: Procedure::Ebh,
            lambda: LambdaStrategy::default_plugin(&spec),
            randomized_seed: None,
        };
        let det = detect(&panel, &opts).unwrap();
        let report = DetectReport::build(&panel, echo(&panel), &opts, &det);
        assert_eq!(report.rejected, vec!["x".to_string(), "z".to_string()]);
        match report.lambda {
            Some(LambdaStrategy::Plugin { lambda_bar }) => {
                assert!((lambda_bar - 99.99).abs() < 1e-12)
            }
            ref other => panic!("unexpected lambda {other:?}"),
        }
        let json = serde_json::to_string(&report).unwrap();
        let back: DetectReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn randomized_bh_m_is_refused() {
        let panel = EdgePanel::new(1, 3, vec![0; 3], None).unwrap();
        let spec = HypothesisSpec::new(0.1, 0.1).unwrap();
        let opts = DetectOptions {
            spec,
            procedure: Procedure::BhM,
            lambda: LambdaStrategy::default_plugin(&spec),
            randomized_seed: Some(1),
        };
        assert_eq!(detect(&panel, &opts).unwrap_err().code(), "INVALID_CONFIG");
    }
}
