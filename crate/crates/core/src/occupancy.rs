//! Balls-into-bins probabilities.
//!
//! Bins are files and balls are requests. Users attached only to relay B throw
//! black balls, users attached only to relay W throw white balls and users
//! attached to both relays throw grey balls.
//!
//! The pmfs are exposed as [`ExactValue`]s. Internally every conditional pmf
//! is first computed as a vector of integer weights over a known power of `N`
//! so the load sums can stay in integer arithmetic.
//!
//! Two of the closed-form alphabet bounds (`beta_w`, `beta_2`) are
//! unconditional and too tight once `Y` or `J` is fixed below its maximum;
//! the pmfs here sum over the conditional supports `k_w_max(y)` and
//! `k_2_max(j)` instead, which is what exhaustive enumeration agrees with.

use num_traits::Zero;

use crate::combinatorics::{binomial, diff_zeros, factorial, power, stirling2, Count, ExactValue};
use crate::error::{Error, Result};

/// User counts: `u_b` attached only to relay B, `u_w` only to relay W, `u_2`
/// to both, over a library of `n_bins` files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Population {
    pub n_bins: u32,
    pub u_b: u32,
    pub u_w: u32,
    pub u_2: u32,
}

impl Population {
    pub fn new(n_bins: u32, u_b: u32, u_w: u32, u_2: u32) -> Result<Self> {
        if n_bins < 1 {
            return Err(Error::EmptyLibrary(n_bins));
        }
        Ok(Self { n_bins, u_b, u_w, u_2 })
    }

    /// Users attached to a single relay.
    pub fn u_1(&self) -> u32 {
        self.u_b + self.u_w
    }

    pub fn total(&self) -> u32 {
        self.u_b + self.u_w + self.u_2
    }

    pub fn alphabets(&self) -> Alphabets {
        Alphabets::new(self)
    }
}

/// Supports of the occupancy random variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabets {
    n: u32,
    u_w: u32,
    u_2: u32,
    pub beta_j: u32,
    pub beta_y: u32,
    pub beta_b: u32,
    pub beta_w: u32,
    pub beta_1: u32,
    pub beta_2: u32,
}

impl Alphabets {
    fn new(pop: &Population) -> Self {
        let n = pop.n_bins;
        let beta_b = pop.u_b.min(n);
        let beta_1 = pop.u_1().min(n);
        Self {
            n,
            u_w: pop.u_w,
            u_2: pop.u_2,
            beta_j: pop.u_1().min(n),
            beta_y: pop.u_b.min(n),
            beta_b,
            beta_w: pop.u_w.min(n - beta_b),
            beta_1,
            beta_2: pop.u_2.min(n - beta_1),
        }
    }

    /// Smallest `K_B` compatible with `Y = y` and `K_W = k_w`.
    pub fn alpha_b(&self, y: u32, k_w: u32) -> u32 {
        (y + k_w).saturating_sub(self.u_w)
    }

    /// Smallest `K_1` compatible with `J = j`.
    pub fn alpha_1(&self, j: u32) -> u32 {
        j.saturating_sub(self.u_2)
    }

    pub fn z_max(&self, y: u32) -> u32 {
        y
    }

    /// Largest `K_W` reachable given `Y = y`.
    pub fn k_w_max(&self, y: u32) -> u32 {
        self.u_w.min(self.n - y.min(self.n))
    }

    /// Largest `K_2` reachable given `J = j`.
    pub fn k_2_max(&self, j: u32) -> u32 {
        self.u_2.min(self.n - j.min(self.n))
    }

    /// Values of `J`; a point mass at 0 when no single-relay users exist.
    pub fn j_values(&self) -> std::ops::RangeInclusive<u32> {
        if self.beta_j == 0 {
            0..=0
        } else {
            1..=self.beta_j
        }
    }

    /// Values of `Y`; a point mass at 0 when no B-only users exist.
    pub fn y_values(&self) -> std::ops::RangeInclusive<u32> {
        if self.beta_y == 0 {
            0..=0
        } else {
            1..=self.beta_y
        }
    }
}

fn check_bins(n_bins: u32) -> Result<()> {
    if n_bins < 1 {
        Err(Error::EmptyLibrary(n_bins))
    } else {
        Ok(())
    }
}

/// Unnormalised `p_J(j | d)`: `C(N, j) S(d, j) j!`, over `N^d`.
pub(crate) fn distinct_weight(j: u32, d: u32, n_bins: u32) -> Count {
    if j > n_bins || j > d {
        return Count::zero();
    }
    binomial(n_bins as i64, j as i64) * stirling2(d, j) * factorial(j)
}

/// Unnormalised multivariate occupancy: `C(j, k_b) C(N - j, k_w) Δ^b 0^balls`
/// with `b = j - k_b + k_w`, over `N^balls`.
pub(crate) fn occupancy_weight(j: u32, k_b: i64, k_w: i64, balls: u32, n_bins: u32) -> Count {
    if k_b < 0 || k_w < 0 || k_b > j as i64 {
        return Count::zero();
    }
    let hit = j as i64 - k_b + k_w;
    if hit > balls as i64 {
        return Count::zero();
    }
    let choose_b = binomial(j as i64, k_b);
    let choose_w = binomial(n_bins as i64 - j as i64, k_w);
    if choose_b.is_zero() || choose_w.is_zero() {
        return Count::zero();
    }
    choose_b * choose_w * diff_zeros(hit as u32, balls)
}

/// Weights of `p_{K2}(k_2 | j)`, indexed by `k_2`, over `N^{u_2}`.
pub(crate) fn k2_weights(j: u32, pop: &Population) -> Vec<Count> {
    let alph = pop.alphabets();
    (0..=alph.k_2_max(j))
        .map(|k2| (alph.alpha_1(j)..=j).map(|k1| occupancy_weight(j, k1 as i64, k2 as i64, pop.u_2, pop.n_bins)).sum())
        .collect()
}

/// Weights of `p_{K_W}(k_w | y)`, indexed by `k_w`, over `N^{u_w}`.
pub(crate) fn kw_weights(y: u32, pop: &Population) -> Vec<Count> {
    let alph = pop.alphabets();
    (0..=alph.k_w_max(y))
        .map(|kw| {
            (alph.alpha_b(y, kw)..=y).map(|kb| occupancy_weight(y, kb as i64, kw as i64, pop.u_w, pop.n_bins)).sum()
        })
        .collect()
}

/// Weights of `p_Z(z | y)`, indexed by `z`, over `N^{u_w}`.
///
/// `{Z = z}` splits into `{K_B = z, K_W >= z}` and `{K_B > z, K_W = z}`; the
/// white ball count is `u_w`.
pub(crate) fn z_weights(y: u32, pop: &Population) -> Vec<Count> {
    let alph = pop.alphabets();
    let kw_max = alph.k_w_max(y);
    (0..=alph.z_max(y))
        .map(|z| {
            let exact_b: Count =
                (z..=kw_max).map(|kw| occupancy_weight(y, z as i64, kw as i64, pop.u_w, pop.n_bins)).sum();
            let exact_w: Count =
                (z + 1..=y).map(|kb| occupancy_weight(y, kb as i64, z as i64, pop.u_w, pop.n_bins)).sum();
            exact_b + exact_w
        })
        .collect()
}

fn weight_at(weights: &[Count], k: i64) -> Count {
    if k < 0 {
        return Count::zero();
    }
    weights.get(k as usize).cloned().unwrap_or_default()
}

/// Probability that `d` uniform requests over `n_bins` files hit exactly `j`
/// distinct files.
pub fn pmf_distinct(j: i64, d: u32, n_bins: u32) -> Result<ExactValue> {
    check_bins(n_bins)?;
    if j < 0 {
        return Ok(ExactValue::zero());
    }
    let w = distinct_weight(j.min(u32::MAX as i64) as u32, d, n_bins);
    Ok(ExactValue::fraction(w, power(n_bins, d)))
}

/// With `j` bins already holding black balls, probability that `u_w` white
/// balls leave exactly `k_b` black-only and `k_w` white-only bins.
pub fn p_oc(j: i64, k_b: i64, k_w: i64, u_w: u32, n_bins: u32) -> Result<ExactValue> {
    check_bins(n_bins)?;
    if j < 0 || j > n_bins as i64 {
        return Err(Error::Domain(format!("occupied bins j={j} outside 0..={n_bins}")));
    }
    let w = occupancy_weight(j as u32, k_b, k_w, u_w, n_bins);
    Ok(ExactValue::fraction(w, power(n_bins, u_w)))
}

fn check_conditioning(name: &str, value: u32, values: std::ops::RangeInclusive<u32>) -> Result<()> {
    if values.contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name}={value} outside {}..={}", values.start(), values.end())))
    }
}

/// `P(K_2 = k_2 | J = j)`: files requested by dual-relay users and by no
/// single-relay user.
pub fn pmf_k2_given_j(k_2: i64, j: u32, pop: &Population) -> Result<ExactValue> {
    check_conditioning("j", j, pop.alphabets().j_values())?;
    let w = weight_at(&k2_weights(j, pop), k_2);
    Ok(ExactValue::fraction(w, power(pop.n_bins, pop.u_2)))
}

/// `P(K_W = k_w | Y = y)`: files requested only at relay W.
pub fn pmf_kw_given_y(k_w: i64, y: u32, pop: &Population) -> Result<ExactValue> {
    check_conditioning("y", y, pop.alphabets().y_values())?;
    let w = weight_at(&kw_weights(y, pop), k_w);
    Ok(ExactValue::fraction(w, power(pop.n_bins, pop.u_w)))
}

/// `P(Z = z | Y = y)` with `Z = min(K_B, K_W)`, the number of coded
/// transmission opportunities.
pub fn pmf_z_given_y(z: i64, y: u32, pop: &Population) -> Result<ExactValue> {
    check_conditioning("y", y, pop.alphabets().y_values())?;
    let w = weight_at(&z_weights(y, pop), z);
    Ok(ExactValue::fraction(w, power(pop.n_bins, pop.u_w)))
}
