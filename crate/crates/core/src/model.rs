//! Shared domain types: the observed edge panel, the hypothesis spec, per-edge
//! evidence and selection results.
//!
//! Every type here is immutable once constructed; constructors enforce the
//! invariants so downstream code can rely on them without re-checking.

use std::borrow::Cow;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::ScenarioParams;

/// Unvalidated panel parts, as read from a file or assembled by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPanel {
    pub n_edges: usize,
    pub n_steps: usize,
    /// Edge-major cells: `data[i * n_steps + t]` is X_it (t 0-based).
    pub data: Vec<u8>,
    pub edge_labels: Option<Vec<String>>,
}

/// The n × T binary matrix of edge indicators, stored edge-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PanelRepr", into = "PanelRepr")]
pub struct EdgePanel {
    n_edges: usize,
    n_steps: usize,
    data: Vec<u8>,
    edge_labels: Option<Vec<String>>,
}

/// Checks the panel invariants and returns the validated panel.
pub fn validate_panel(raw: RawPanel) -> Result<EdgePanel> {
    let RawPanel {
        n_edges,
        n_steps,
        data,
        edge_labels,
    } = raw;
    if n_edges == 0 || n_steps == 0 {
        return Err(Error::EmptyPanel);
    }
    let expected = n_edges
        .checked_mul(n_steps)
        .ok_or_else(|| Error::ShapeMismatch("n_edges * n_steps overflows".into()))?;
    if data.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "{} cells for a {n_edges} x {n_steps} panel",
            data.len()
        )));
    }
    if let Some(pos) = data.iter().position(|&v| v > 1) {
        return Err(Error::NonBinaryValue {
            edge: pos / n_steps,
            step: pos % n_steps,
            value: data[pos],
        });
    }
    if let Some(labels) = &edge_labels {
        if labels.len() != n_edges {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {n_edges} edges",
                labels.len()
            )));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
    }
    Ok(EdgePanel {
        n_edges,
        n_steps,
        data,
        edge_labels,
    })
}

impl EdgePanel {
    pub fn new(
        n_edges: usize,
        n_steps: usize,
        data: Vec<u8>,
        edge_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        validate_panel(RawPanel {
            n_edges,
            n_steps,
            data,
            edge_labels,
        })
    }

    /// Builds a panel from one `Vec` per edge.
    pub fn from_rows(rows: Vec<Vec<u8>>, edge_labels: Option<Vec<String>>) -> Result<Self> {
        let n_edges = rows.len();
        let n_steps = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_steps) {
            return Err(Error::ShapeMismatch("rows have unequal lengths".into()));
        }
        Self::new(n_edges, n_steps, rows.concat(), edge_labels)
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Full history of edge `i`.
    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.n_steps..(i + 1) * self.n_steps]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.data.chunks_exact(self.n_steps)
    }

    pub fn get(&self, edge: usize, step: usize) -> u8 {
        self.data[edge * self.n_steps + step]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn edge_labels(&self) -> Option<&[String]> {
        self.edge_labels.as_deref()
    }

    /// External label of edge `i`, falling back to its 0-based index.
    pub fn label(&self, i: usize) -> Cow<'_, str> {
        match &self.edge_labels {
            Some(labels) => Cow::Borrowed(labels[i].as_str()),
            None => Cow::Owned(i.to_string()),
        }
    }

    /// S_i: number of steps at which edge `i` is connected.
    pub fn successes(&self, i: usize) -> u64 {
        self.row(i).iter().map(|&x| u64::from(x)).sum()
    }

    pub fn into_raw(self) -> RawPanel {
        RawPanel {
            n_edges: self.n_edges,
            n_steps: self.n_steps,
            data: self.data,
            edge_labels: self.edge_labels,
        }
    }
}

/// Compact serialized form: one `"0101…"` string per edge.
#[derive(Serialize, Deserialize)]
struct PanelRepr {
    n_edges: usize,
    n_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_labels: Option<Vec<String>>,
    rows: Vec<String>,
}

impl From<EdgePanel> for PanelRepr {
    fn from(p: EdgePanel) -> Self {
        let rows = p
            .rows()
            .map(|r| r.iter().map(|&x| if x == 1 { '1' } else { '0' }).collect())
            .collect();
        PanelRepr {
            n_edges: p.n_edges,
            n_steps: p.n_steps,
            edge_labels: p.edge_labels,
            rows,
        }
    }
}

impl TryFrom<PanelRepr> for EdgePanel {
    type Error = Error;

    fn try_from(r: PanelRepr) -> Result<Self> {
        if r.rows.len() != r.n_edges {
            return Err(Error::ShapeMismatch(format!(
                "{} rows for {} edges",
                r.rows.len(),
                r.n_edges
            )));
        }
        let mut data = Vec::with_capacity(r.n_edges * r.n_steps);
        for row in &r.rows {
            if row.len() != r.n_steps {
                return Err(Error::ShapeMismatch(format!(
                    "row of length {} for {} steps",
                    row.len(),
                    r.n_steps
                )));
            }
            // Non-binary characters map to 2 so validation reports them.
            data.extend(row.bytes().map(|b| match b {
                b'0' => 0,
                b'1' => 1,
                _ => 2,
            }));
        }
        EdgePanel::new(r.n_edges, r.n_steps, data, r.edge_labels)
    }
}

/// The pair (π, α): connectability threshold and target FDR level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr")]
pub struct HypothesisSpec {
    pi: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct SpecRepr {
    pi: f64,
    alpha: f64,
}

impl TryFrom<SpecRepr> for HypothesisSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        HypothesisSpec::new(r.pi, r.alpha)
    }
}

impl HypothesisSpec {
    pub fn new(pi: f64, alpha: f64) -> Result<Self> {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::InvalidSpec(format!("pi = {pi} must lie in (0, 1)")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "alpha = {alpha} must lie in (0, 1)"
            )));
        }
        Ok(Self { pi, alpha })
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Default plug-in cap, 1/π − 0.01.
    pub fn default_lambda_bar(&self) -> f64 {
        1.0 / self.pi - 0.01
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EvidenceKind {
    EValue,
    PValue,
}

/// Which construction produced the evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MethodTag {
    /// Stopped e-process, selected by e-BH.
    Ebh,
    /// Misspecification binomial-tail p-values, plain BH.
    MPvalue,
    /// Misspecification p-values inflated by h_n (BY).
    MPvalueBy,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Ebh => "EBH",
            MethodTag::MPvalue => "M_PVALUE",
            MethodTag::MPvalueBy => "M_PVALUE_BY",
        }
    }
}

/// Per-edge evidence: either stopped e-values or p-values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceVector {
    kind: EvidenceKind,
    method: MethodTag,
    values: Vec<f64>,
    /// Natural logs of the e-values (E_VALUE only).
    log_values: Option<Vec<f64>>,
    /// Stopping times τ_i, 1-based, `None` when the threshold was never hit.
    stop_times: Option<Vec<Option<usize>>>,
}

impl EvidenceVector {
    /// P-values; entries above 1 are clamped to 1.
    pub fn from_pvalues(values: Vec<f64>, method: MethodTag) -> Result<Self> {
        let mut values = values;
        for (index, v) in values.iter_mut().enumerate() {
            if v.is_nan() || *v < 0.0 {
                return Err(Error::ValueOutOfRange { index, value: *v });
            }
            if *v > 1.0 {
                *v = 1.0;
            }
        }
        Ok(Self {
            kind: EvidenceKind::PValue,
            method,
            values,
            log_values: None,
            stop_times: None,
        })
    }

    /// Stopped e-values given in log space.
    pub fn from_log_evalues(
        log_values: Vec<f64>,
        stop_times: Option<Vec<Option<usize>>>,
    ) -> Result<Self> {
        if let Some((index, &value)) = log_values.iter().enumerate().find(|(_, v)| v.is_nan()) {
            return Err(Error::ValueOutOfRange { index, value });
        }
        if let Some(st) = &stop_times {
            if st.len() != log_values.len() {
                return Err(Error::ShapeMismatch(
                    "stop_times length differs from log_values".into(),
                ));
            }
        }
        let values = log_values.iter().map(|l| l.exp()).collect();
        Ok(Self {
            kind: EvidenceKind::EValue,
            method: MethodTag::Ebh,
            values,
            log_values: Some(log_values),
            stop_times,
        })
    }

    /// Plain e-values (log space derived).
    pub fn from_evalues(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_nan() || **v < 0.0)
        {
            return Err(Error::ValueOutOfRange { index, value });
        }
        let logs = values.iter().map(|v| v.ln()).collect();
        Ok(Self {
            kind: EvidenceKind::EValue,
            method: MethodTag::Ebh,
            values,
            log_values: Some(logs),
            stop_times: None,
        })
    }

    pub fn kind(&self) -> EvidenceKind {
        self.kind
    }

    pub fn method(&self) -> MethodTag {
        self.method
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_values(&self) -> Option<&[f64]> {
        self.log_values.as_deref()
    }

    pub fn stop_times(&self) -> Option<&[Option<usize>]> {
        self.stop_times.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The p-value used for edge `i` by the BH step: the value itself, or
    /// `min(1, 1/E)` for e-values.
    pub fn pvalue(&self, i: usize) -> f64 {
        match (&self.kind, &self.log_values) {
            (EvidenceKind::EValue, Some(logs)) => (-logs[i].max(0.0)).exp(),
            _ => self.values[i],
        }
    }

    pub fn pvalues(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.pvalue(i)).collect()
    }
}

/// Output of a BH-type selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Ĥ1(π): rejected edge indices, ascending.
    pub rejected: Vec<usize>,
    /// The step-up rank K (or K̃), absent when no rank qualifies.
    pub k_index: Option<usize>,
    /// P_(K), the largest rejected p-value.
    pub cutoff_value: Option<f64>,
    pub method: MethodTag,
    pub randomized: bool,
    pub seed_used: Option<u64>,
}

impl SelectionResult {
    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rejected.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioTag {
    Iid,
    Logistic,
    BernoulliVar,
    LevelShift,
    Periodic,
}

impl ScenarioTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioTag::Iid => "iid",
            ScenarioTag::Logistic => "logistic",
            ScenarioTag::BernoulliVar => "bernoulli-var",
            ScenarioTag::LevelShift => "level-shift",
            ScenarioTag::Periodic => "periodic",
        }
    }
}

/// A generated panel with its ground-truth alternative set H1(π).
#[derive(Debug, Clone)]
pub struct ScenarioTruth {
    pub panel: EdgePanel,
    /// Indices of π-connectable edges, ascending.
    pub h1_indices: Vec<usize>,
    pub scenario_tag: ScenarioTag,
    pub generator_params: ScenarioParams,
    /// Latent connection probabilities ξ_it, edge-major, when requested.
    pub latent: Option<Vec<f64>>,
}

impl ScenarioTruth {
    pub fn alternative_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.panel.n_edges()];
        for &i in &self.h1_indices {
            mask[i] = true;
        }
        mask
    }

    pub fn n_alternatives(&self) -> usize {
        self.h1_indices.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_panel_is_accepted_unchanged() {
        let p = EdgePanel::new(2, 3, vec![0; 6], None).unwrap();
        assert_eq!(p.data(), &[0; 6]);
        assert_eq!(p.n_edges(), 2);
        assert_eq!(p.n_steps(), 3);
    }

    #[test]
    fn value_two_is_rejected() {
        let err = EdgePanel::new(2, 2, vec![0, 1, 2, 0], None).unwrap_err();
        assert_eq!(err.code(), "NON_BINARY_VALUE");
        assert!(matches!(
            err,
            Error::NonBinaryValue {
                edge: 1,
                step: 0,
                value: 2
            }
        ));
    }

    #[test]
    fn empty_and_duplicate_labels() {
        assert_eq!(
            EdgePanel::new(0, 3, vec![], None).unwrap_err().code(),
            "EMPTY_PANEL"
        );
        assert_eq!(
            EdgePanel::new(2, 0, vec![], None).unwrap_err().code(),
            "EMPTY_PANEL"
        );
        let labels = Some(vec!["a".to_string(), "a".to_string()]);
        assert_eq!(
            EdgePanel::new(2, 1, vec![0, 1], labels).unwrap_err().code(),
            "DUPLICATE_LABEL"
        );
    }

    #[test]
    fn large_random_panel_is_accepted() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let data: Vec<u8> = (0..300 * 500).map(|_| rng.random_bool(0.3) as u8).collect();
        let p = EdgePanel::new(300, 500, data.clone(), None).unwrap();
        assert_eq!(p.data(), &data[..]);
    }

    #[test]
    fn row_access_is_edge_major() {
        let p = EdgePanel::from_rows(vec![vec![0, 1, 1], vec![1, 0, 0]], None).unwrap();
        assert_eq!(p.row(0), &[0, 1, 1]);
        assert_eq!(p.get(1, 0), 1);
        assert_eq!(p.successes(0), 2);
        assert_eq!(p.label(1), "1");
    }

    #[test]
    fn spec_rejects_closed_endpoints() {
        assert!(HypothesisSpec::new(0.0, 0.1).is_err());
        assert!(HypothesisSpec::new(0.1, 1.0).is_err());
        assert!(HypothesisSpec::new(f64::NAN, 0.1).is_err());
        let s = HypothesisSpec::new(0.01, 0.1).unwrap();
        assert!((s.default_lambda_bar() - 99.99).abs() < 1e-12);
    }

    #[test]
    fn pvalues_above_one_are_clamped() {
        let ev = EvidenceVector::from_pvalues(vec![0.2, 1.7], MethodTag::MPvalueBy).unwrap();
        assert_eq!(ev.values(), &[0.2, 1.0]);
        assert!(EvidenceVector::from_pvalues(vec![-0.1], MethodTag::MPvalue).is_err());
    }

    #[test]
    fn evalue_pvalue_conversion_clamps() {
        let ev = EvidenceVector::from_evalues(vec![0.5, 1.0, 4.0]).unwrap();
        assert_eq!(ev.pvalue(0), 1.0);
        assert_eq!(ev.pvalue(1), 1.0);
        assert!((ev.pvalue(2) - 0.25).abs() < 1e-15);
    }
}
