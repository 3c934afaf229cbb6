//! Sequential detection of frequently occurring edges in binary
//! edge-by-time panels, with false discovery rate control that holds
//! under arbitrary dependence between edges.
//!
//! Each edge `i` carries an indicator series `X_i1, …, X_iT`. The null
//! hypothesis for the edge says every conditional success probability is at
//! most `π`. Two kinds of per-edge evidence are provided:
//!
//! * a misspecification p-value, the binomial upper tail of the success
//!   count, used with Benjamini–Yekutieli ([`evidence::m_pvalues`]);
//! * an e-process built from betting factors `λX + 1 − πλ`, stopped at the
//!   threshold `n/α` and used with the e-BH ([`evidence::e_evidence`]).
//!
//! [`selection`] implements the BH step-up, [`generators`] the simulation
//! scenarios and [`experiment`] the Monte Carlo harness.

pub mod detect;
pub mod error;
pub mod evidence;
pub mod experiment;
pub mod generators;
pub mod io;
pub mod model;
pub mod rng;
pub mod selection;

pub use detect::{detect, DetectOptions, DetectReport, Detection, Procedure};
pub use error::{Error, ErrorClass, Result};
pub use evidence::LambdaStrategy;
pub use experiment::{CellSummary, LambdaPlan, Method, RunGrid, ValidityConfig, ValidityReport};
pub use generators::{Layout, ScenarioParams};
pub use io::PanelFormat;
pub use model::{
    EdgePanel, EvidenceKind, EvidenceVector, HypothesisSpec, MethodTag, RawPanel, ScenarioTag,
    ScenarioTruth, SelectionResult,
};
pub use selection::{bh_select, select, BhConfig};
