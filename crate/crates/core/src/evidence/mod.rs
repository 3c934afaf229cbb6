//! Per-edge evidence against `H0i: ξ_it ≤ π for all t`.
//!
//! Two constructions are provided:
//!
//! * **e-based**: a stopped e-process per edge ([`e_evidence`]), whose
//!   reciprocal is a p-value valid under any dependence between edges;
//! * **misspecification-based**: the binomial tail of the edge's success
//!   count under i.i.d. Bernoulli(π) ([`m_pvalues`]), optionally inflated by
//!   the harmonic number `h_n` for the BY procedure.

mod binomial;
mod eprocess;

pub use binomial::{binom_tail_p, harmonic, ln_binom_tail_p};
pub use eprocess::{
    e_step, e_to_p, lambda_cap, log_e_step, log_threshold, plugin_lambda, run_eprocess,
    EProcessTrace, LambdaStrategy,
};

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{EdgePanel, EvidenceVector, HypothesisSpec, MethodTag};

/// Misspecification p-values `P^m_i`, or `min(1, P^m_i·h_n)` with `by_inflate`.
pub fn m_pvalues(
    panel: &EdgePanel,
    spec: &HypothesisSpec,
    by_inflate: bool,
) -> Result<EvidenceVector> {
    let trials = panel.n_steps() as u64;
    let h_n = harmonic(panel.n_edges());
    let values = (0..panel.n_edges())
        .map(|i| {
            let p = binom_tail_p(panel.successes(i), trials, spec.pi())?;
            Ok(if by_inflate { (p * h_n).min(1.0) } else { p })
        })
        .collect::<Result<Vec<_>>>()?;
    let tag = if by_inflate {
        MethodTag::MPvalueBy
    } else {
        MethodTag::MPvalue
    };
    EvidenceVector::from_pvalues(values, tag)
}

/// Stopped e-values for every edge, with the threshold `n/α` taken from the
/// panel's own width.
pub fn e_evidence(
    panel: &EdgePanel,
    spec: &HypothesisSpec,
    strategy: &LambdaStrategy,
) -> Result<EvidenceVector> {
    strategy.validate(spec.pi(), panel.n_steps())?;
    let threshold = log_threshold(panel.n_edges(), spec.alpha());
    let pi = spec.pi();
    let (logs, stops): (Vec<f64>, Vec<Option<usize>>) = panel
        .data()
        .par_chunks_exact(panel.n_steps())
        .map(|row| eprocess::stopped_log_evalue(row, pi, strategy, threshold))
        .unzip();
    EvidenceVector::from_log_evalues(logs, Some(stops))
}
