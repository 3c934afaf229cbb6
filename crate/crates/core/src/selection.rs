//! Benjamini–Hochberg step-up selection and its deployments.
//!
//! With sorted p-values `P_(1) ≤ … ≤ P_(n)`, the step-up rank is
//! `K = max{i : P_(i) ≤ m_i·α/n}` where `m_i = i` for the classical rule and
//! `m_i = ⌊i/U⌋` for the randomized rule with `U ~ Uniform(0,1)`. Every edge
//! with `P_j ≤ P_(K)` is rejected, so ties at the cutoff are all kept.
//!
//! BH applied to `min(1, P^m·h_n)` is the BY procedure; BH applied to
//! `min(1, 1/E)` is the e-BH. For e-values the comparison is carried out in
//! log space, `max(ln E_(i), 0) ≥ ln(n/α) − ln m_i`, so that an e-process
//! which crossed its stopping threshold `ln(n/α)` is rejected exactly, without
//! a round trip through `exp`.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EvidenceKind, EvidenceVector, MethodTag, SelectionResult};
use crate::rng::{StreamFamily, UNIFORM_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhConfig {
    pub alpha: f64,
    pub randomized: bool,
    pub rng_seed: Option<u64>,
}

impl BhConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            randomized: false,
            rng_seed: None,
        }
    }

    pub fn randomized(alpha: f64, seed: u64) -> Self {
        Self {
            alpha,
            randomized: true,
            rng_seed: Some(seed),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "alpha = {} must lie in (0, 1)",
                self.alpha
            )));
        }
        if self.randomized && self.rng_seed.is_none() {
            return Err(Error::InvalidConfig(
                "randomized BH requires an rng seed".into(),
            ));
        }
        Ok(())
    }

    /// The randomization variable U, or `None` for the classical rule.
    fn uniform(&self) -> Option<f64> {
        let seed = self.rng_seed.filter(|_| self.randomized)?;
        Some(uniform_from_seed(seed))
    }
}

/// Draws `U ~ Uniform(0, 1)` (zero excluded) from a seed.
pub fn uniform_from_seed(seed: u64) -> f64 {
    let mut rng = StreamFamily::new(seed).stream(UNIFORM_STREAM);
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Threshold multiplier `m_i` for 1-based rank `i`.
#[inline]
fn multiplier(rank: usize, u: Option<f64>) -> f64 {
    match u {
        None => rank as f64,
        Some(u) => (rank as f64 / u).floor(),
    }
}

/// Largest 1-based rank accepted by `qualifies`, scanning from the top.
fn step_up(n: usize, qualifies: impl Fn(usize) -> bool) -> Option<usize> {
    (1..=n).rev().find(|&rank| qualifies(rank))
}

/// Step-up selection over `scores`, where smaller scores are stronger
/// evidence and `qualifies(rank, score)` applies the rank threshold.
fn select_by_score(
    scores: &[f64],
    qualifies: impl Fn(usize, f64) -> bool,
) -> (Vec<usize>, Option<usize>, Option<f64>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Stable sort with the index as tie-breaker.
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    match step_up(scores.len(), |rank| {
        qualifies(rank, scores[order[rank - 1]])
    }) {
        None => (Vec::new(), None, None),
        Some(k) => {
            let cut = scores[order[k - 1]];
            let rejected = (0..scores.len()).filter(|&j| scores[j] <= cut).collect();
            (rejected, Some(k), Some(cut))
        }
    }
}

fn check_pvalues(pvalues: &[f64]) -> Result<()> {
    match pvalues
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p >= 0.0 && **p <= 1.0))
    {
        Some((index, &value)) => Err(Error::ValueOutOfRange { index, value }),
        None => Ok(()),
    }
}

/// BH (or randomized BH) on raw p-values.
pub fn bh_select(pvalues: &[f64], config: &BhConfig) -> Result<SelectionResult> {
    config.validate()?;
    check_pvalues(pvalues)?;
    let n = pvalues.len() as f64;
    let alpha = config.alpha;
    let u = config.uniform();
    let (rejected, k_index, cutoff_value) =
        select_by_score(pvalues, |rank, p| p <= multiplier(rank, u) * alpha / n);
    Ok(SelectionResult {
        rejected,
        k_index,
        cutoff_value,
        method: MethodTag::MPvalue,
        randomized: config.randomized,
        seed_used: config.rng_seed.filter(|_| config.randomized),
    })
}

/// Dispatches on the evidence kind: e-values go through the e-BH, p-values
/// straight through BH. The result carries the evidence's method tag.
pub fn select(evidence: &EvidenceVector, config: &BhConfig) -> Result<SelectionResult> {
    match evidence.kind() {
        EvidenceKind::PValue => {
            let mut res = bh_select(evidence.values(), config)?;
            res.method = evidence.method();
            Ok(res)
        }
        EvidenceKind::EValue => {
            config.validate()?;
            let logs = evidence
                .log_values()
                .ok_or_else(|| Error::InvalidConfig("e-value evidence without logs".into()))?;
            // Score = ln P^e = −max(ln E, 0); smaller is stronger.
            let scores: Vec<f64> = logs.iter().map(|&l| -l.max(0.0)).collect();
            let log_n_over_alpha = (logs.len() as f64 / config.alpha).ln();
            let u = config.uniform();
            let (rejected, k_index, cut) = select_by_score(&scores, |rank, score| {
                -score >= log_n_over_alpha - multiplier(rank, u).ln()
            });
            Ok(SelectionResult {
                rejected,
                k_index,
                cutoff_value: cut.map(f64::exp),
                method: evidence.method(),
                randomized: config.randomized,
                seed_used: config.rng_seed.filter(|_| config.randomized),
            })
        }
    }
}
