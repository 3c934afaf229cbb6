//! Upper binomial tail and harmonic numbers.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// `ln P(S ≥ successes)` for `S ~ Binomial(trials, pi)`.
///
/// The sum runs over `t ≥ successes` only, so no `1 − CDF` cancellation
/// occurs. It is seeded at the largest term in range (the mode, or
/// `successes` when that lies above the mode) from a log-gamma evaluation
/// and extended in both directions by the term ratio
/// `C(T,t+1)π^{t+1}(1−π)^{T−t−1} / C(T,t)π^t(1−π)^{T−t} = (T−t)/(t+1) · π/(1−π)`.
pub fn ln_binom_tail_p(successes: u64, trials: u64, pi: f64) -> Result<f64> {
    if successes > trials {
        return Err(Error::CountExceedsTrials { successes, trials });
    }
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidSpec(format!("pi = {pi} must lie in (0, 1)")));
    }
    if successes == 0 {
        return Ok(0.0);
    }
    let n = trials;
    let mode = (((n + 1) as f64) * pi).floor().min(n as f64) as u64;
    let start = successes.max(mode);
    let ln_pi = pi.ln();
    let ln_q = (-pi).ln_1p();
    let ln_start = ln_binomial(n, start) + start as f64 * ln_pi + (n - start) as f64 * ln_q;

    let odds = pi / (1.0 - pi);
    let mut sum = 1.0;

    // Upward from the seed: terms shrink monotonically past the mode.
    let mut term = 1.0;
    let mut t = start;
    while t < n {
        term *= (n - t) as f64 / (t + 1) as f64 * odds;
        t += 1;
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }

    // Downward to `successes`; only reached when the seed is the mode.
    let mut term = 1.0;
    let mut t = start;
    while t > successes {
        term *= t as f64 / (n - t + 1) as f64 / odds;
        t -= 1;
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }

    Ok((ln_start + sum.ln()).min(0.0))
}

/// `P(S ≥ successes)` for `S ~ Binomial(trials, pi)`.
///
/// Values below the smallest positive double underflow to zero; use
/// [`ln_binom_tail_p`] when the magnitude matters there.
pub fn binom_tail_p(successes: u64, trials: u64, pi: f64) -> Result<f64> {
    ln_binom_tail_p(successes, trials, pi).map(f64::exp)
}

/// `h_n = Σ_{k=1}^{n} 1/k`, summed smallest term first.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}
