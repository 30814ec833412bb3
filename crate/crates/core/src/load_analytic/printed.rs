//! Literal transcriptions of the single-expression normalized loads and of
//! the coded-opportunity pmf as typeset, bounds and ball counts included.
//!
//! These are not used to compute loads. `validate` evaluates them next to the
//! enumeration oracle and lists the instances where they disagree.

use num_bigint::BigInt;
use num_traits::{Pow, Zero};

use crate::combinatorics::{binomial, diff_zeros, power, ExactValue};
use crate::occupancy::{pmf_distinct, Population};
use crate::scenario::Scenario;

use super::omega1;

fn int(x: &num_bigint::BigUint) -> ExactValue {
    ExactValue::from_count(x.clone())
}

fn choose(n: i64, k: i64) -> ExactValue {
    ExactValue::from_count(binomial(n, k))
}

/// `sum_{i=0}^{m} (-1)^i C(m, i) ((m - i) / N)^balls`, empty when `m < 0`.
fn alternating(m: i64, balls: u32, n: u32) -> ExactValue {
    if m < 0 {
        return ExactValue::zero();
    }
    let mut acc = BigInt::zero();
    for i in 0..=m {
        let term = BigInt::from(binomial(m, i)) * Pow::pow(BigInt::from(m - i), balls);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    ExactValue::ratio(acc, BigInt::from(power(n, balls))).expect("positive denominator")
}

fn fraction(numer: i64, denom: u32) -> ExactValue {
    ExactValue::ratio(numer, denom as i64).expect("positive denominator")
}

fn p_distinct(j: i64, d: u32, n: u32) -> ExactValue {
    pmf_distinct(j, d, n).expect("non-empty library")
}

/// The aggregated-request bracket shared by both printed loads.
fn aggregated_bracket(j: i64, pop: &Population) -> ExactValue {
    let n = pop.n_bins as i64;
    let alph = pop.alphabets();
    let alpha_1 = (j - pop.u_2 as i64).max(0);
    let mut acc = ExactValue::zero();
    for k1 in alpha_1..=j {
        let mut inner = ExactValue::zero();
        for k2 in 0..=alph.beta_2 as i64 {
            let b2 = j - k1 + k2;
            inner += choose(n - j, k2 - 1) * alternating(n - b2, pop.u_2, pop.n_bins);
        }
        acc += choose(j, k1) * inner;
    }
    acc
}

/// Normalized MDS load as printed.
pub fn mds_normalized(scenario: &Scenario) -> ExactValue {
    let pop = scenario.population();
    let n = pop.n_bins as i64;
    let m = scenario.cache_size() as i64;
    let alph = pop.alphabets();
    let keep = fraction(n - m, n as u32);
    let dual = fraction((n - 2 * m).max(0), n as u32);
    let mut acc = ExactValue::zero();
    for j in 1..=alph.beta_j as i64 {
        let bracket = ExactValue::from_integer(j) * &keep + &dual * aggregated_bracket(j, pop);
        acc += p_distinct(j, pop.u_1(), pop.n_bins) * bracket;
    }
    acc
}

/// Normalized ECC load as printed.
pub fn ecc_normalized(scenario: &Scenario) -> ExactValue {
    let pop = scenario.population();
    let n = pop.n_bins as i64;
    let m = scenario.cache_size() as i64;
    let alph = pop.alphabets();
    let keep = fraction(n - m, n as u32);
    let omega = fraction(omega1(scenario), n as u32);
    let u_w = pop.u_w as i64;
    let beta_b = alph.beta_b as i64;
    let beta_w = alph.beta_w as i64;

    let mut single = ExactValue::zero();
    for y in 1..=beta_b {
        let mut delivered = ExactValue::zero();
        for kw in 0..=beta_w {
            let alpha_b = (y - u_w + kw).max(0);
            let mut bracket = ExactValue::zero();
            for kb in alpha_b..=y {
                let b = y - kb + kw;
                bracket += choose(y, kb) * alternating(n - b, pop.total(), pop.n_bins);
            }
            delivered += choose(n - y, kw - 1) * ExactValue::from_integer(y + kw) * &keep * bracket;
        }
        let mut coded = ExactValue::zero();
        for z in 1..=y {
            let mut first = ExactValue::zero();
            let mut kw = z;
            while kw <= beta_w - y - z {
                let bw = y - z + kw;
                first += choose(n - y, kw) * alternating(n - bw, pop.u_w, pop.n_bins);
                kw += 1;
            }
            let mut second = ExactValue::zero();
            for kb in z + 1..=y.min(beta_b) {
                let bb = y - kb + z;
                second += choose(y, kb) * alternating(n - bb, pop.u_w, pop.n_bins);
            }
            coded += ExactValue::from_integer(z) * (choose(y, z) * first + choose(n - y, z) * second);
        }
        single += p_distinct(y, pop.u_b, pop.n_bins) * (delivered - &omega * coded);
    }

    let dual = fraction((n - 2 * m).max(0), n as u32);
    let mut aggregated = ExactValue::zero();
    for j in 1..=alph.beta_j as i64 {
        aggregated += p_distinct(j, pop.u_1(), pop.n_bins) * aggregated_bracket(j, pop);
    }
    single + dual * aggregated
}

/// Coded-opportunity pmf as printed: `u_1` balls and `k_w <= beta_w - y + z`.
pub fn pmf_z_given_y(z: i64, y: i64, pop: &Population) -> ExactValue {
    let alph = pop.alphabets();
    let n = pop.n_bins as i64;
    let balls = pop.u_1();
    let poc = |j: i64, kb: i64, kw: i64| -> ExactValue {
        if kb < 0 || kw < 0 || kb > j {
            return ExactValue::zero();
        }
        let b = j - kb + kw;
        if b > balls as i64 {
            return ExactValue::zero();
        }
        let w = binomial(j, kb) * binomial(n - j, kw) * diff_zeros(b as u32, balls);
        int(&w) / ExactValue::from_count(power(pop.n_bins, balls))
    };
    let mut acc = ExactValue::zero();
    let mut kw = z;
    while kw <= alph.beta_w as i64 - y + z {
        acc += poc(y, z, kw);
        kw += 1;
    }
    for kb in z + 1..=y.min(alph.beta_b as i64) {
        acc += poc(y, kb, z);
    }
    acc
}
