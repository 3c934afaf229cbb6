//! Sequential e-processes for a single edge.
//!
//! Each step multiplies the running e-value by `λ·x + 1 − π·λ`, a factor
//! whose conditional mean is at most one whenever the edge's connection
//! probability stays at or below π. The product is accumulated in log space
//! and frozen at the first step where it reaches `n/α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HypothesisSpec;

/// Largest admissible λ for a given π: `1/π − 10⁻⁹/π`.
pub fn lambda_cap(pi: f64) -> f64 {
    (1.0 - 1e-9) / pi
}

fn check_lambda(lambda: f64, pi: f64) -> Result<()> {
    if lambda.is_nan() || lambda < 0.0 || lambda * pi >= 1.0 {
        return Err(Error::LambdaOutOfRange { lambda, pi });
    }
    Ok(())
}

/// One e-process factor, `λ·x + 1 − π·λ`.
pub fn e_step(x: u8, lambda: f64, pi: f64) -> Result<f64> {
    if x > 1 {
        return Err(Error::NonBinaryValue {
            edge: 0,
            step: 0,
            value: x,
        });
    }
    check_lambda(lambda, pi)?;
    Ok(lambda * f64::from(x) + 1.0 - pi * lambda)
}

/// `ln(λ·x + 1 − π·λ)` without range checks.
#[inline]
pub fn log_e_step(x: u8, lambda: f64, pi: f64) -> f64 {
    if x == 1 {
        (lambda * (1.0 - pi)).ln_1p()
    } else {
        (-pi * lambda).ln_1p()
    }
}

/// Plug-in betting fraction `min{max(0, (X̄ − π)/(π(1 − π))), λ̄}`.
#[inline]
pub fn plugin_lambda(running_mean: f64, pi: f64, lambda_bar: f64) -> f64 {
    ((running_mean - pi) / (pi * (1.0 - pi)))
        .max(0.0)
        .min(lambda_bar)
}

/// How λ_it is chosen at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LambdaStrategy {
    /// Running-mean plug-in capped at `lambda_bar`; the first λ is always 0.
    Plugin {
        lambda_bar: f64,
    },
    /// Pre-committed λ for every step.
    FixedSchedule {
        schedule: Vec<f64>,
    },
    Constant {
        constant_value: f64,
    },
}

impl LambdaStrategy {
    pub fn plugin(lambda_bar: f64) -> Self {
        LambdaStrategy::Plugin { lambda_bar }
    }

    /// Plug-in with the default cap 1/π − 0.01.
    pub fn default_plugin(spec: &HypothesisSpec) -> Self {
        Self::plugin(spec.default_lambda_bar())
    }

    pub fn constant(value: f64) -> Self {
        LambdaStrategy::Constant {
            constant_value: value,
        }
    }

    pub fn schedule(schedule: Vec<f64>) -> Self {
        LambdaStrategy::FixedSchedule { schedule }
    }

    /// Checks the strategy against π and the series length.
    pub fn validate(&self, pi: f64, n_steps: usize) -> Result<()> {
        match self {
            LambdaStrategy::Plugin { lambda_bar } => {
                if lambda_bar.is_nan() || *lambda_bar <= 0.0 {
                    return Err(Error::LambdaOutOfRange {
                        lambda: *lambda_bar,
                        pi,
                    });
                }
                check_lambda(*lambda_bar, pi)
            }
            LambdaStrategy::FixedSchedule { schedule } => {
                if schedule.len() != n_steps {
                    return Err(Error::ShapeMismatch(format!(
                        "lambda schedule has {} entries for {n_steps} steps",
                        schedule.len()
                    )));
                }
                schedule.iter().try_for_each(|&l| check_lambda(l, pi))
            }
            LambdaStrategy::Constant { constant_value } => check_lambda(*constant_value, pi),
        }
    }

    fn describe(&self) -> String {
        match self {
            LambdaStrategy::Plugin { lambda_bar } => format!("plugin:{lambda_bar}"),
            LambdaStrategy::FixedSchedule { schedule } => format!("schedule:{}", schedule.len()),
            LambdaStrategy::Constant { constant_value } => format!("const:{constant_value}"),
        }
    }
}

impl std::fmt::Display for LambdaStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Produces λ_1, λ_2, … from past observations only.
struct Bettor<'a> {
    strategy: &'a LambdaStrategy,
    pi: f64,
    cap: f64,
    seen: u64,
    ones: u64,
}

impl<'a> Bettor<'a> {
    fn new(strategy: &'a LambdaStrategy, pi: f64) -> Self {
        Self {
            strategy,
            pi,
            cap: lambda_cap(pi),
            seen: 0,
            ones: 0,
        }
    }

    /// λ for step `t` (0-based), from the observations fed so far.
    #[inline]
    fn next_lambda(&self, t: usize) -> f64 {
        let raw = match self.strategy {
            LambdaStrategy::Plugin { lambda_bar } => {
                let mean = if self.seen == 0 {
                    0.0
                } else {
                    self.ones as f64 / self.seen as f64
                };
                plugin_lambda(mean, self.pi, *lambda_bar)
            }
            LambdaStrategy::FixedSchedule { schedule } => schedule[t],
            LambdaStrategy::Constant { constant_value } => *constant_value,
        };
        raw.min(self.cap)
    }

    #[inline]
    fn observe(&mut self, x: u8) {
        self.seen += 1;
        self.ones += u64::from(x);
    }
}

/// Full path of one edge's e-process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EProcessTrace {
    /// `log_e[0] = 0`, `log_e[t] = ln E_it` for the unstopped process.
    pub log_e: Vec<f64>,
    /// λ_it used at each step t = 1..T (index t − 1).
    pub lambdas: Vec<f64>,
    /// τ_i (1-based); `None` encodes τ_i = ∞.
    pub stop_time: Option<usize>,
    /// ln E_{i, T∧τ_i}.
    pub stopped_log_e: f64,
}

fn check_series(series: &[u8]) -> Result<()> {
    match series.iter().position(|&x| x > 1) {
        Some(step) => Err(Error::NonBinaryValue {
            edge: 0,
            step,
            value: series[step],
        }),
        None => Ok(()),
    }
}

/// Stopping threshold `ln(n/α)`.
pub fn log_threshold(n_edges: usize, alpha: f64) -> f64 {
    (n_edges as f64 / alpha).ln()
}

/// Runs the e-process over a whole series, recording every step.
pub fn run_eprocess(
    series: &[u8],
    spec: &HypothesisSpec,
    strategy: &LambdaStrategy,
    n_edges: usize,
) -> Result<EProcessTrace> {
    check_series(series)?;
    strategy.validate(spec.pi(), series.len())?;
    if n_edges == 0 {
        return Err(Error::EmptyPanel);
    }
    let pi = spec.pi();
    let threshold = log_threshold(n_edges, spec.alpha());

    let mut bettor = Bettor::new(strategy, pi);
    let mut log_e = Vec::with_capacity(series.len() + 1);
    let mut lambdas = Vec::with_capacity(series.len());
    log_e.push(0.0);
    let mut acc = 0.0;
    let mut stop_time = None;
    for (t, &x) in series.iter().enumerate() {
        let lambda = bettor.next_lambda(t);
        acc += log_e_step(x, lambda, pi);
        bettor.observe(x);
        lambdas.push(lambda);
        log_e.push(acc);
        if stop_time.is_none() && acc >= threshold {
            stop_time = Some(t + 1);
        }
    }
    let stopped_log_e = match stop_time {
        Some(tau) => log_e[tau],
        None => acc,
    };
    Ok(EProcessTrace {
        log_e,
        lambdas,
        stop_time,
        stopped_log_e,
    })
}

/// Stopped log e-value and stopping time, halting at the first crossing.
///
/// Inputs must already be validated; this is the per-edge hot path.
pub(crate) fn stopped_log_evalue(
    series: &[u8],
    pi: f64,
    strategy: &LambdaStrategy,
    threshold: f64,
) -> (f64, Option<usize>) {
    let mut bettor = Bettor::new(strategy, pi);
    let mut acc = 0.0;
    for (t, &x) in series.iter().enumerate() {
        acc += log_e_step(x, bettor.next_lambda(t), pi);
        if acc >= threshold {
            return (acc, Some(t + 1));
        }
        bettor.observe(x);
    }
    (acc, None)
}

/// `P^e = min(1, 1/E)` for a stopped trace.
pub fn e_to_p(trace: &EProcessTrace) -> f64 {
    (-trace.stopped_log_e).exp().min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(pi: f64, alpha: f64) -> HypothesisSpec {
        HypothesisSpec::new(pi, alpha).unwrap()
    }

    #[test]
    fn e_step_substitution() {
        assert_eq!(e_step(1, 0.0, 0.1).unwrap(), 1.0);
        assert!((e_step(1, 1.0, 0.1).unwrap() - 1.9).abs() < 1e-15);
        assert!((e_step(0, 1.0, 0.1).unwrap() - 0.9).abs() < 1e-15);
        assert!((e_step(0, 9.0, 0.1).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn e_step_range_guard() {
        assert_eq!(
            e_step(0, 10.0, 0.1).unwrap_err().code(),
            "LAMBDA_OUT_OF_RANGE"
        );
        assert!(e_step(1, -0.5, 0.1).is_err());
        assert!(e_step(1, f64::NAN, 0.1).is_err());
        assert!(e_step(2, 1.0, 0.1).is_err());
    }

    #[test]
    fn plugin_lambda_clamps() {
        assert_eq!(plugin_lambda(0.05, 0.1, 9.99), 0.0);
        assert!((plugin_lambda(0.15, 0.1, 9.99) - 0.05 / 0.09).abs() < 1e-12);
        assert_eq!(plugin_lambda(1.0, 0.1, 9.99), 9.99);
    }

    #[test]
    fn all_zero_series_with_zero_lambda_is_flat() {
        let tr =
            run_eprocess(&[0; 20], &spec(0.1, 0.1), &LambdaStrategy::constant(0.0), 5).unwrap();
        assert!(tr.log_e.iter().all(|&l| l == 0.0));
        assert_eq!(tr.stop_time, None);
        assert_eq!(e_to_p(&tr), 1.0);
    }

    #[test]
    fn hand_rolled_product_stops_at_two() {
        // 9.1 < 30 <= 9.1^2 = 82.81
        let tr = run_eprocess(
            &[1, 1, 1, 1, 1],
            &spec(0.1, 0.1),
            &LambdaStrategy::constant(9.0),
            3,
        )
        .unwrap();
        assert_eq!(tr.stop_time, Some(2));
        assert!((tr.stopped_log_e.exp() - 82.81).abs() < 1e-9);
        assert!((e_to_p(&tr) - 1.0 / 82.81).abs() < 1e-12);
        assert!((e_to_p(&tr) - 0.012076).abs() < 1e-6);
        // The trace keeps the unstopped path.
        assert!((tr.log_e[5].exp() - 9.1f64.powi(5)).abs() / 9.1f64.powi(5) < 1e-12);
    }

    #[test]
    fn first_plugin_lambda_is_zero() {
        let tr = run_eprocess(
            &[1, 0, 1, 1],
            &spec(0.1, 0.1),
            &LambdaStrategy::plugin(9.99),
            1,
        )
        .unwrap();
        assert_eq!(tr.lambdas[0], 0.0);
        // After one success the mean is 1 and λ hits the cap.
        assert_eq!(tr.lambdas[1], 9.99);
    }

    #[test]
    fn negative_log_e_clamps_pvalue() {
        let tr = run_eprocess(
            &[0, 0, 0],
            &spec(0.1, 0.1),
            &LambdaStrategy::constant(5.0),
            1,
        )
        .unwrap();
        assert!(tr.stopped_log_e < 0.0);
        assert_eq!(e_to_p(&tr), 1.0);
    }

    #[test]
    fn schedule_must_match_length_and_range() {
        let s = spec(0.1, 0.1);
        let err = run_eprocess(&[0, 1], &s, &LambdaStrategy::schedule(vec![0.5]), 1).unwrap_err();
        assert_eq!(err.code(), "SHAPE_MISMATCH");
        let err =
            run_eprocess(&[0, 1], &s, &LambdaStrategy::schedule(vec![0.5, 10.0]), 1).unwrap_err();
        assert_eq!(err.code(), "LAMBDA_OUT_OF_RANGE");
        assert!(LambdaStrategy::plugin(10.0).validate(0.1, 3).is_err());
        assert!(LambdaStrategy::plugin(0.0).validate(0.1, 3).is_err());
    }

    #[test]
    fn lambdas_never_exceed_cap() {
        // λ̄ just under 1/π is pulled down to the guard.
        let pi = 0.1;
        let bar = 1.0 / pi - 1e-12;
        let tr = run_eprocess(
            &[1, 1, 0, 1],
            &spec(pi, 0.1),
            &LambdaStrategy::plugin(bar),
            1,
        )
        .unwrap();
        assert!(tr.lambdas.iter().all(|&l| l <= lambda_cap(pi)));
        assert!(tr.log_e.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn fast_path_agrees_with_trace() {
        let series = [0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1];
        let s = spec(0.2, 0.05);
        for strat in [
            LambdaStrategy::plugin(4.99),
            LambdaStrategy::constant(2.0),
            LambdaStrategy::schedule((0..12).map(|t| t as f64 * 0.3).collect()),
        ] {
            let tr = run_eprocess(&series, &s, &strat, 4).unwrap();
            let (log_e, tau) = stopped_log_evalue(&series, 0.2, &strat, log_threshold(4, 0.05));
            assert_eq!(tau, tr.stop_time);
            assert_eq!(log_e, tr.stopped_log_e);
        }
    }
}
