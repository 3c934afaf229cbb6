//! Independent oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Brute-force step-up: for every rank `k` count the p-values at or below
/// `m_k·α/n`, keep the largest `k` whose count reaches `k`, and reject every
/// p-value at or below that threshold.
///
/// Returns `(rejected indices, K)`.
pub fn bh_oracle(p: &[f64], alpha: f64, u: Option<f64>) -> (Vec<usize>, Option<usize>) {
    let n = p.len();
    let nf = n as f64;
    let mut best: Option<usize> = None;
    for k in 1..=n {
        let m = match u {
            None => k as f64,
            Some(u) => (k as f64 / u).floor(),
        };
        let thr = m * alpha / nf;
        let count = p.iter().filter(|&&x| x <= thr).count();
        if count >= k {
            best = Some(k);
        }
    }
    match best {
        None => (Vec::new(), None),
        Some(k) => {
            let m = match u {
                None => k as f64,
                Some(u) => (k as f64 / u).floor(),
            };
            let thr = m * alpha / nf;
            let mut sorted = p.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Reject up to the K-th smallest value, which is ≤ thr.
            let cut = sorted[k - 1];
            assert!(cut <= thr);
            ((0..n).filter(|&j| p[j] <= cut).collect(), Some(k))
        }
    }
}

/// `π = num/den` in lowest terms for the probabilities used by the tests.
pub fn rational(pi: f64) -> (u64, u64) {
    for den in [2u64, 4, 5, 10, 20, 100, 1000] {
        let num = (pi * den as f64).round();
        if (num / den as f64 - pi).abs() < 1e-15 {
            return (num as u64, den);
        }
    }
    panic!("no small rational for {pi}");
}

/// Natural log of a positive big integer, accurate to about one ulp.
pub fn big_ln(x: &BigUint) -> f64 {
    assert!(!x.is_zero());
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact `P(S ≥ s)`, `S ~ Bin(T, num/den)`, as a numerator over `den^T`.
pub struct ExactTail {
    pub numer: BigUint,
    pub denom: BigUint,
}

impl ExactTail {
    pub fn ln(&self) -> f64 {
        big_ln(&self.numer) - big_ln(&self.denom)
    }
}

/// Every tail `P(S ≥ s)` for `s = 0..=T` with exact integer arithmetic.
pub fn exact_tails(trials: u64, num: u64, den: u64) -> Vec<ExactTail> {
    let a = BigUint::from(num);
    let b = BigUint::from(den - num);
    let denom = BigUint::from(den).pow(trials as u32);
    // pmf numerators C(T,t)·a^t·b^(T−t).
    let mut coef = BigUint::one();
    let mut terms = Vec::with_capacity(trials as usize + 1);
    for t in 0..=trials {
        if t > 0 {
            coef = coef * BigUint::from(trials - t + 1) / BigUint::from(t);
        }
        terms.push(&coef * a.pow(t as u32) * b.pow((trials - t) as u32));
    }
    let mut out: Vec<ExactTail> = Vec::with_capacity(terms.len());
    let mut acc = BigUint::zero();
    for term in terms.into_iter().rev() {
        acc += term;
        out.push(ExactTail {
            numer: acc.clone(),
            denom: denom.clone(),
        });
    }
    out.reverse();
    out
}

/// Relative discrepancy between an implementation's tail and the oracle.
///
/// `got` is the tail itself and `got_ln` its logarithm. Where the oracle is a
/// normal double the comparison is on the tail; below that range it is on
/// the logarithm, where an absolute error `δ` is a relative error of about
/// `δ` in the tail.
pub fn tail_rel_error(got: f64, got_ln: f64, oracle: &ExactTail) -> f64 {
    let want_ln = oracle.ln();
    if want_ln > f64::MIN_POSITIVE.ln() {
        let want = want_ln.exp();
        (got - want).abs() / want
    } else {
        (got_ln - want_ln).abs()
    }
}
