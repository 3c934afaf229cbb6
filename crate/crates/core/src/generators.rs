//! Synthetic panels with known π-connectable edges.
//!
//! Every edge draws from its own ChaCha8 substream keyed by the edge index,
//! and alternative positions are shuffled on a reserved stream, so a panel is
//! a pure function of `(params, layout)`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EdgePanel, ScenarioTag, ScenarioTruth};
use crate::rng::{StreamFamily, SHUFFLE_STREAM};

/// Shape and seed shared by every scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n_edges: usize,
    pub n_steps: usize,
    /// |H1(π)|; ignored by the Bernoulli VAR with explicit chains.
    pub n_alt: usize,
    pub seed: u64,
    /// Retain latent ξ_it in the result.
    pub keep_latent: bool,
}

impl Layout {
    pub fn new(n_edges: usize, n_steps: usize, n_alt: usize, seed: u64) -> Self {
        Self {
            n_edges,
            n_steps,
            n_alt,
            seed,
            keep_latent: false,
        }
    }

    pub fn with_latent(mut self) -> Self {
        self.keep_latent = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_edges == 0 || self.n_steps == 0 {
            return Err(Error::EmptyPanel);
        }
        if self.n_alt > self.n_edges {
            return Err(Error::InvalidConfig(format!(
                "n_alt = {} exceeds n_edges = {}",
                self.n_alt, self.n_edges
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidParams {
    pub pi_null: f64,
    pub pi_alt: f64,
}

impl Default for IidParams {
    fn default() -> Self {
        Self {
            pi_null: 0.1,
            pi_alt: 0.15,
        }
    }
}

/// Logistic autoregression; all coefficients of a null edge equal
/// `ln(π/(1−π))`, all of an alternative edge `(2/3)·ln(π/(1−π))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub pi: f64,
}

impl LogisticParams {
    pub fn beta_null(&self) -> f64 {
        (self.pi / (1.0 - self.pi)).ln()
    }

    pub fn beta_alt(&self) -> f64 {
        2.0 / 3.0 * self.beta_null()
    }
}

/// Per-edge chain probabilities for the Bernoulli VAR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarChains {
    /// One `(π^y_i, π^z_i)` per edge.
    Explicit { pi_y: Vec<f64>, pi_z: Vec<f64> },
    /// Shared `(π^y, π^z)` for null and alternative classes; alternative
    /// positions are shuffled in by seed.
    TwoClass {
        null_yz: (f64, f64),
        alt_yz: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliVarParams {
    /// Threshold used to label edges by their stationary mean.
    pub pi: f64,
    pub chains: VarChains,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelShiftParams {
    pub t0: usize,
    pub pi_a_null: f64,
    pub pi_b_null: f64,
    pub pi_a_alt: f64,
    pub pi_b_alt: f64,
}

impl LevelShiftParams {
    pub fn for_pi(pi: f64) -> Self {
        Self {
            t0: 30,
            pi_a_null: pi,
            pi_b_null: pi / 2.0,
            pi_a_alt: 0.5,
            pi_b_alt: pi / 2.0,
        }
    }
}

/// Ranges are half-open `[lo, hi)` uniform draws for ξ_it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicParams {
    pub period: usize,
    pub null_base: (f64, f64),
    pub null_peak: (f64, f64),
    pub alt_base: (f64, f64),
    pub alt_peak: (f64, f64),
}

impl Default for PeriodicParams {
    fn default() -> Self {
        Self {
            period: 5,
            null_base: (0.0, 0.05),
            null_peak: (0.05, 0.1),
            alt_base: (0.0, 0.05),
            alt_peak: (0.2, 0.3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum ScenarioParams {
    Iid(IidParams),
    Logistic(LogisticParams),
    BernoulliVar(BernoulliVarParams),
    LevelShift(LevelShiftParams),
    Periodic(PeriodicParams),
}

impl ScenarioParams {
    pub fn tag(&self) -> ScenarioTag {
        match self {
            ScenarioParams::Iid(_) => ScenarioTag::Iid,
            ScenarioParams::Logistic(_) => ScenarioTag::Logistic,
            ScenarioParams::BernoulliVar(_) => ScenarioTag::BernoulliVar,
            ScenarioParams::LevelShift(_) => ScenarioTag::LevelShift,
            ScenarioParams::Periodic(_) => ScenarioTag::Periodic,
        }
    }

    /// The simulation defaults for a scenario at threshold `pi`.
    pub fn defaults(tag: ScenarioTag, pi: f64) -> Self {
        match tag {
            ScenarioTag::Iid => ScenarioParams::Iid(IidParams::default()),
            ScenarioTag::Logistic => ScenarioParams::Logistic(LogisticParams { pi }),
            ScenarioTag::BernoulliVar => ScenarioParams::BernoulliVar(BernoulliVarParams {
                pi,
                chains: VarChains::TwoClass {
                    null_yz: (pi, pi),
                    alt_yz: (0.5, pi),
                },
            }),
            ScenarioTag::LevelShift => ScenarioParams::LevelShift(LevelShiftParams::for_pi(pi)),
            ScenarioTag::Periodic => ScenarioParams::Periodic(PeriodicParams::default()),
        }
    }

    pub fn generate(&self, layout: &Layout) -> Result<ScenarioTruth> {
        match self {
            ScenarioParams::Iid(p) => gen_iid(p, layout),
            ScenarioParams::Logistic(p) => gen_logistic(p, layout),
            ScenarioParams::BernoulliVar(p) => gen_bernoulli_var(p, layout),
            ScenarioParams::LevelShift(p) => gen_level_shift(p, layout),
            ScenarioParams::Periodic(p) => gen_periodic(p, layout),
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    check_prob(name, lo)?;
    check_prob(name, hi)?;
    if lo > hi {
        return Err(Error::InvalidConfig(format!(
            "{name} range ({lo}, {hi}) is reversed"
        )));
    }
    Ok(())
}

/// Alternative flags: `n_alt` trues shuffled over `n_edges` positions.
fn alternative_mask(layout: &Layout, family: &StreamFamily) -> Vec<bool> {
    let mut mask = vec![false; layout.n_edges];
    mask[..layout.n_alt].fill(true);
    mask.shuffle(&mut family.stream(SHUFFLE_STREAM));
    mask
}

fn indices_of(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &a)| a.then_some(i))
        .collect()
}

/// Generates rows independently, edge `i` from stream `i`.
///
/// `fill(i, rng, row, latent)` writes one edge's history; the latent buffer is
/// empty unless the layout asks for it.
fn independent_rows<F>(
    layout: &Layout,
    family: &StreamFamily,
    fill: F,
) -> (Vec<u8>, Option<Vec<f64>>)
where
    F: Fn(usize, &mut ChaCha8Rng, &mut [u8], &mut [f64]) + Sync,
{
    let t = layout.n_steps;
    let latent_len = if layout.keep_latent { t } else { 0 };
    let rows: Vec<(Vec<u8>, Vec<f64>)> = (0..layout.n_edges)
        .into_par_iter()
        .map(|i| {
            let mut rng = family.stream(i as u64);
            let mut row = vec![0u8; t];
            let mut latent = vec![0.0; latent_len];
            fill(i, &mut rng, &mut row, &mut latent);
            (row, latent)
        })
        .collect();
    let mut data = Vec::with_capacity(layout.n_edges * t);
    let mut latent = layout
        .keep_latent
        .then(|| Vec::with_capacity(layout.n_edges * t));
    for (row, lat) in rows {
        data.extend_from_slice(&row);
        if let Some(l) = latent.as_mut() {
            l.extend_from_slice(&lat);
        }
    }
    (data, latent)
}

fn finish(
    data: Vec<u8>,
    latent: Option<Vec<f64>>,
    h1_indices: Vec<usize>,
    layout: &Layout,
    params: ScenarioParams,
) -> Result<ScenarioTruth> {
    Ok(ScenarioTruth {
        panel: EdgePanel::new(layout.n_edges, layout.n_steps, data, None)?,
        h1_indices,
        scenario_tag: params.tag(),
        generator_params: params,
        latent,
    })
}

#[inline]
fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> u8 {
    u8::from(rng.random::<f64>() < p)
}

/// Independent Bernoulli(π_i) edges, π_i = `pi_alt` on alternatives.
pub fn gen_iid(params: &IidParams, layout: &Layout) -> Result<ScenarioTruth> {
    layout.validate()?;
    check_prob("pi_null", params.pi_null)?;
    check_prob("pi_alt", params.pi_alt)?;
    let family = StreamFamily::new(layout.seed);
    let mask = alternative_mask(layout, &family);
    let (data, latent) = independent_rows(layout, &family, |i, rng, row, lat| {
        let p = if mask[i] {
            params.pi_alt
        } else {
            params.pi_null
        };
        for x in row.iter_mut() {
            *x = bernoulli(rng, p);
        }
        lat.fill(p);
    });
    finish(
        data,
        latent,
        indices_of(&mask),
        layout,
        ScenarioParams::Iid(*params),
    )
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Logistic model `ξ_it = σ(β_i0 + β_iᵀ X_{t−1})` started from `X_0 = 0`.
///
/// With all coefficients of edge `i` equal to `b_i`, the linear predictor is
/// `b_i·(1 + Σ_j X_{j,t−1})`.
pub fn gen_logistic(params: &LogisticParams, layout: &Layout) -> Result<ScenarioTruth> {
    layout.validate()?;
    if params.pi.is_nan() || params.pi <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "pi = {} must be positive",
            params.pi
        )));
    }
    if params.pi >= 0.5 {
        return Err(Error::PiTooLarge(params.pi));
    }
    let family = StreamFamily::new(layout.seed);
    let mask = alternative_mask(layout, &family);
    let (n, t_len) = (layout.n_edges, layout.n_steps);
    let betas: Vec<f64> = mask
        .iter()
        .map(|&alt| {
            if alt {
                params.beta_alt()
            } else {
                params.beta_null()
            }
        })
        .collect();
    let mut streams: Vec<ChaCha8Rng> = (0..n as u64).map(|i| family.stream(i)).collect();
    let mut data = vec![0u8; n * t_len];
    let mut latent = layout.keep_latent.then(|| vec![0.0; n * t_len]);
    let mut prev_ones = 0u64;
    for t in 0..t_len {
        let mut ones = 0u64;
        let load = 1.0 + prev_ones as f64;
        for i in 0..n {
            let xi = sigmoid(betas[i] * load);
            let x = bernoulli(&mut streams[i], xi);
            data[i * t_len + t] = x;
            ones += u64::from(x);
            if let Some(l) = latent.as_mut() {
                l[i * t_len + t] = xi;
            }
        }
        prev_ones = ones;
    }
    finish(
        data,
        latent,
        indices_of(&mask),
        layout,
        ScenarioParams::Logistic(*params),
    )
}

/// Stationary mean `π^z/(1 − π^y + π^z)` of a two-state chain.
pub fn stationary_mean(pi_y: f64, pi_z: f64) -> Option<f64> {
    let denom = 1.0 - pi_y + pi_z;
    (denom > 0.0).then(|| pi_z / denom)
}

/// Bernoulli VAR `X_it = Y_it·X_{i,t−1} + Z_it·(1 − X_{i,t−1})` from a
/// stationary start; H1 = edges whose stationary mean exceeds π.
pub fn gen_bernoulli_var(params: &BernoulliVarParams, layout: &Layout) -> Result<ScenarioTruth> {
    layout.validate()?;
    check_prob("pi", params.pi)?;
    let family = StreamFamily::new(layout.seed);
    let (pi_y, pi_z): (Vec<f64>, Vec<f64>) = match &params.chains {
        VarChains::Explicit { pi_y, pi_z } => {
            if pi_y.len() != layout.n_edges || pi_z.len() != layout.n_edges {
                return Err(Error::ShapeMismatch(format!(
                    "chain arrays of length {}/{} for {} edges",
                    pi_y.len(),
                    pi_z.len(),
                    layout.n_edges
                )));
            }
            (pi_y.clone(), pi_z.clone())
        }
        VarChains::TwoClass { null_yz, alt_yz } => alternative_mask(layout, &family)
            .into_iter()
            .map(|alt| if alt { *alt_yz } else { *null_yz })
            .unzip(),
    };
    let mut stationary = Vec::with_capacity(layout.n_edges);
    for (i, (&y, &z)) in pi_y.iter().zip(&pi_z).enumerate() {
        check_prob("pi_y", y)?;
        check_prob("pi_z", z)?;
        stationary.push(stationary_mean(y, z).ok_or(Error::DegenerateChain(i))?);
    }
    let (data, latent) = independent_rows(layout, &family, |i, rng, row, lat| {
        let mut prev = bernoulli(rng, stationary[i]);
        for (t, x) in row.iter_mut().enumerate() {
            let y = bernoulli(rng, pi_y[i]);
            let z = bernoulli(rng, pi_z[i]);
            if !lat.is_empty() {
                lat[t] = if prev == 1 { pi_y[i] } else { pi_z[i] };
            }
            *x = if prev == 1 { y } else { z };
            prev = *x;
        }
    });
    let h1 = stationary
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| (m > params.pi).then_some(i))
        .collect();
    finish(
        data,
        latent,
        h1,
        layout,
        ScenarioParams::BernoulliVar(params.clone()),
    )
}

/// Independent Bernoulli(π_ia) for `t ≤ t0`, Bernoulli(π_ib) afterwards.
pub fn gen_level_shift(params: &LevelShiftParams, layout: &Layout) -> Result<ScenarioTruth> {
    layout.validate()?;
    if params.t0 > layout.n_steps {
        return Err(Error::InvalidConfig(format!(
            "t0 = {} exceeds n_steps = {}",
            params.t0, layout.n_steps
        )));
    }
    for (name, p) in [
        ("pi_a_null", params.pi_a_null),
        ("pi_b_null", params.pi_b_null),
        ("pi_a_alt", params.pi_a_alt),
        ("pi_b_alt", params.pi_b_alt),
    ] {
        check_prob(name, p)?;
    }
    let family = StreamFamily::new(layout.seed);
    let mask = alternative_mask(layout, &family);
    let (data, latent) = independent_rows(layout, &family, |i, rng, row, lat| {
        let (a, b) = if mask[i] {
            (params.pi_a_alt, params.pi_b_alt)
        } else {
            (params.pi_a_null, params.pi_b_null)
        };
        for (t, x) in row.iter_mut().enumerate() {
            let p = if t < params.t0 { a } else { b };
            *x = bernoulli(rng, p);
            if !lat.is_empty() {
                lat[t] = p;
            }
        }
    });
    finish(
        data,
        latent,
        indices_of(&mask),
        layout,
        ScenarioParams::LevelShift(*params),
    )
}

#[inline]
fn uniform_in(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Peaks at steps `t ≡ 0 (mod period)` (1-based); ξ_it redrawn every step.
pub fn gen_periodic(params: &PeriodicParams, layout: &Layout) -> Result<ScenarioTruth> {
    layout.validate()?;
    if params.period == 0 {
        return Err(Error::InvalidConfig("period must be at least 1".into()));
    }
    check_range("null_base", params.null_base)?;
    check_range("null_peak", params.null_peak)?;
    check_range("alt_base", params.alt_base)?;
    check_range("alt_peak", params.alt_peak)?;
    let family = StreamFamily::new(layout.seed);
    let mask = alternative_mask(layout, &family);
    let (data, latent) = independent_rows(layout, &family, |i, rng, row, lat| {
        let (base, peak) = if mask[i] {
            (params.alt_base, params.alt_peak)
        } else {
            (params.null_base, params.null_peak)
        };
        for (t, x) in row.iter_mut().enumerate() {
            let range = if (t + 1) % params.period == 0 {
                peak
            } else {
                base
            };
            let xi = uniform_in(rng, range);
            *x = bernoulli(rng, xi);
            if !lat.is_empty() {
                lat[t] = xi;
            }
        }
    });
    finish(
        data,
        latent,
        indices_of(&mask),
        layout,
        ScenarioParams::Periodic(*params),
    )
}

/// λ schedule that bets `peak_value` at multiples of `period` and
/// `off_value` elsewhere.
pub fn knowledge_schedule(
    n_steps: usize,
    period: usize,
    off_value: f64,
    peak_value: f64,
    pi: f64,
) -> Result<Vec<f64>> {
    for lambda in [off_value, peak_value] {
        if lambda.is_nan() || lambda < 0.0 || lambda * pi >= 1.0 {
            return Err(Error::LambdaOutOfRange { lambda, pi });
        }
    }
    if period == 0 {
        return Err(Error::InvalidConfig("period must be at least 1".into()));
    }
    Ok((1..=n_steps)
        .map(|t| {
            if t % period == 0 {
                peak_value
            } else {
                off_value
            }
        })
        .collect())
}

/// Default off-peak and peak bets for the periodic scenario.
pub const KNOWLEDGE_OFF: f64 = 0.1;
pub const KNOWLEDGE_PEAK: f64 = 1.5;

/// Checks that alternatives reach ξ > π somewhere and nulls never exceed π,
/// using the latent ξ retained by [`Layout::with_latent`]. Null values within
/// a few ulps of π (for example `σ(logit π)`) count as π.
pub fn check_ground_truth(truth: &ScenarioTruth, pi: f64) -> std::result::Result<(), String> {
    let latent = truth
        .latent
        .as_ref()
        .ok_or_else(|| "latent values were not retained".to_string())?;
    let t = truth.panel.n_steps();
    let mask = truth.alternative_mask();
    for (i, &alt) in mask.iter().enumerate() {
        let max = latent[i * t..(i + 1) * t]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let tol = 4.0 * f64::EPSILON * pi;
        if alt && max <= pi + tol {
            return Err(format!(
                "alternative edge {i} never exceeds pi (max xi = {max})"
            ));
        }
        if !alt && max > pi + tol {
            return Err(format!("null edge {i} exceeds pi (max xi = {max})"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_mean(truth: &ScenarioTruth, i: usize) -> f64 {
        truth.panel.successes(i) as f64 / truth.panel.n_steps() as f64
    }

    #[test]
    fn iid_null_rows_match_parameter() {
        let truth = gen_iid(&IidParams::default(), &Layout::new(50, 500, 0, 1)).unwrap();
        assert!(truth.h1_indices.is_empty());
        let se = (0.1f64 * 0.9 / 500.0).sqrt();
        for i in 0..50 {
            assert!((row_mean(&truth, i) - 0.1).abs() < 4.5 * se, "edge {i}");
        }
    }

    #[test]
    fn iid_alternatives_are_shuffled_and_counted() {
        let truth = gen_iid(&IidParams::default(), &Layout::new(300, 500, 30, 9)).unwrap();
        assert_eq!(truth.h1_indices.len(), 30);
        assert_ne!(truth.h1_indices, (0..30).collect::<Vec<_>>());
        let mean_alt: f64 = truth
            .h1_indices
            .iter()
            .map(|&i| row_mean(&truth, i))
            .sum::<f64>()
            / 30.0;
        let se = (0.15f64 * 0.85 / (500.0 * 30.0)).sqrt();
        assert!((mean_alt - 0.15).abs() < 4.0 * se);
    }

    #[test]
    fn same_seed_same_panel() {
        for tag in [
            ScenarioTag::Iid,
            ScenarioTag::Logistic,
            ScenarioTag::BernoulliVar,
            ScenarioTag::LevelShift,
            ScenarioTag::Periodic,
        ] {
            let params = ScenarioParams::defaults(tag, 0.1);
            let layout = Layout::new(40, 60, 10, 1234);
            let a = params.generate(&layout).unwrap();
            let b = params.generate(&layout).unwrap();
            assert_eq!(a.panel, b.panel, "{tag:?}");
            assert_eq!(a.h1_indices, b.h1_indices);
            let c = params.generate(&Layout::new(40, 60, 10, 1235)).unwrap();
            assert_ne!(a.panel, c.panel, "{tag:?}");
        }
    }

    #[test]
    fn logistic_coefficients() {
        let p = LogisticParams { pi: 0.1 };
        assert!((p.beta_null() - (1.0f64 / 9.0).ln()).abs() < 1e-15);
        assert!((p.beta_null() + 2.19722).abs() < 1e-5);
        assert!((p.beta_alt() + 1.46481).abs() < 1e-5);
        assert!((sigmoid(p.beta_null()) - 0.1).abs() < 1e-15);
        let alt_max = 1.0 / (1.0 + 9f64.powf(2.0 / 3.0));
        assert!((sigmoid(p.beta_alt()) - alt_max).abs() < 1e-15);
        assert!((alt_max - 0.187732).abs() < 1e-5);
    }

    #[test]
    fn logistic_first_step_uses_zero_history() {
        let truth = gen_logistic(
            &LogisticParams { pi: 0.1 },
            &Layout::new(20, 30, 5, 3).with_latent(),
        )
        .unwrap();
        let lat = truth.latent.as_ref().unwrap();
        let mask = truth.alternative_mask();
        for i in 0..20 {
            let expect = if mask[i] { 0.187732 } else { 0.1 };
            assert!((lat[i * 30] - expect).abs() < 1e-5);
        }
        check_ground_truth(&truth, 0.1).unwrap();
    }

    #[test]
    fn logistic_rejects_large_pi() {
        let err = gen_logistic(&LogisticParams { pi: 0.5 }, &Layout::new(2, 2, 1, 0)).unwrap_err();
        assert_eq!(err.code(), "PI_TOO_LARGE");
    }

    #[test]
    fn bernoulli_var_stationary_means() {
        assert!((stationary_mean(0.3, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((stationary_mean(0.5, 0.1).unwrap() - 0.1 / 0.6).abs() < 1e-15);
        assert_eq!(stationary_mean(1.0, 0.0), None);
    }

    #[test]
    fn bernoulli_var_long_run_mean_and_truth() {
        let params = BernoulliVarParams {
            pi: 0.1,
            chains: VarChains::Explicit {
                pi_y: vec![0.5, 0.1],
                pi_z: vec![0.1, 0.1],
            },
        };
        let truth = gen_bernoulli_var(&params, &Layout::new(2, 200_000, 0, 5)).unwrap();
        assert_eq!(truth.h1_indices, vec![0]);
        assert!((row_mean(&truth, 0) - 1.0 / 6.0).abs() < 0.005);
        assert!((row_mean(&truth, 1) - 0.1).abs() < 0.005);
    }

    #[test]
    fn bernoulli_var_degenerate_chain() {
        let params = BernoulliVarParams {
            pi: 0.1,
            chains: VarChains::Explicit {
                pi_y: vec![1.0],
                pi_z: vec![0.0],
            },
        };
        let err = gen_bernoulli_var(&params, &Layout::new(1, 5, 0, 0)).unwrap_err();
        assert_eq!(err.code(), "DEGENERATE_CHAIN");
    }

    #[test]
    fn level_shift_expected_successes() {
        // 30·0.5 + 470·0.05 = 38.5 per alternative edge.
        let truth = gen_level_shift(
            &LevelShiftParams::for_pi(0.1),
            &Layout::new(200, 500, 200, 17),
        )
        .unwrap();
        let total: u64 = (0..200).map(|i| truth.panel.successes(i)).sum();
        let mean = total as f64 / 200.0;
        let var = 30.0 * 0.25 + 470.0 * 0.05 * 0.95;
        assert!(
            (mean - 38.5).abs() < 4.0 * (var / 200.0f64).sqrt(),
            "mean = {mean}"
        );
    }

    #[test]
    fn level_shift_t0_equal_to_t_is_one_regime() {
        let mut p = LevelShiftParams::for_pi(0.1);
        p.t0 = 40;
        let truth = gen_level_shift(&p, &Layout::new(5, 40, 0, 2).with_latent()).unwrap();
        assert!(truth.latent.unwrap().iter().all(|&x| x == 0.1));
        p.t0 = 41;
        assert!(gen_level_shift(&p, &Layout::new(5, 40, 0, 2)).is_err());
    }

    #[test]
    fn periodic_ground_truth_and_peak_counts() {
        let truth = gen_periodic(
            &PeriodicParams::default(),
            &Layout::new(100, 500, 100, 4).with_latent(),
        )
        .unwrap();
        check_ground_truth(&truth, 0.1).unwrap();
        let peak_total: u64 = (0..100)
            .map(|i| {
                (4..500)
                    .step_by(5)
                    .map(|t| u64::from(truth.panel.get(i, t)))
                    .sum::<u64>()
            })
            .sum();
        let mean = peak_total as f64 / 100.0;
        // 100 peaks × E[U(0.2, 0.3)] = 25.
        assert!((mean - 25.0).abs() < 4.0 * (100.0 * 0.25 * 0.75 / 100.0f64).sqrt());
    }

    #[test]
    fn periodic_with_period_beyond_t_has_no_peaks() {
        let p = PeriodicParams {
            period: 50,
            ..PeriodicParams::default()
        };
        let truth = gen_periodic(&p, &Layout::new(10, 20, 5, 1).with_latent()).unwrap();
        assert!(truth.latent.unwrap().iter().all(|&x| x < 0.05));
    }

    #[test]
    fn ground_truth_holds_for_all_scenarios() {
        for tag in [
            ScenarioTag::Iid,
            ScenarioTag::Logistic,
            ScenarioTag::LevelShift,
            ScenarioTag::Periodic,
        ] {
            let truth = ScenarioParams::defaults(tag, 0.1)
                .generate(&Layout::new(60, 100, 20, 77).with_latent())
                .unwrap();
            check_ground_truth(&truth, 0.1).unwrap_or_else(|e| panic!("{tag:?}: {e}"));
        }
    }

    #[test]
    fn knowledge_schedule_defaults() {
        let s = knowledge_schedule(10, 5, KNOWLEDGE_OFF, KNOWLEDGE_PEAK, 0.1).unwrap();
        assert_eq!(s, vec![0.1, 0.1, 0.1, 0.1, 1.5, 0.1, 0.1, 0.1, 0.1, 1.5]);
        let flat = knowledge_schedule(7, 3, 0.4, 0.4, 0.1).unwrap();
        assert!(flat.iter().all(|&l| l == 0.4));
        let err = knowledge_schedule(10, 5, 0.1, 10.0, 0.1).unwrap_err();
        assert_eq!(err.code(), "LAMBDA_OUT_OF_RANGE");
    }
}
