//! Exact integer and rational primitives.
//!
//! Every probability in the crate is carried as an [`ExactValue`]; the load
//! sums alternate in sign with terms near `N^u`, so nothing here ever touches
//! floating point except [`ExactValue::to_f64`] at the display boundary.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Count = BigUint;

/// Lazily grown lower-triangular table `T(n, k)` for `0 <= k <= n`, filled
/// row by row from a recurrence over the previous row.
struct Triangle {
    rows: RwLock<Vec<Vec<BigUint>>>,
    next_row: fn(&[BigUint], usize) -> Vec<BigUint>,
}

impl Triangle {
    fn new(next_row: fn(&[BigUint], usize) -> Vec<BigUint>) -> Self {
        Self { rows: RwLock::new(vec![vec![BigUint::one()]]), next_row }
    }

    fn get(&self, n: usize, k: usize) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        {
            let rows = self.rows.read().expect("triangle lock poisoned");
            if let Some(row) = rows.get(n) {
                return row[k].clone();
            }
        }
        let mut rows = self.rows.write().expect("triangle lock poisoned");
        while rows.len() <= n {
            let m = rows.len();
            let row = (self.next_row)(&rows[m - 1], m);
            rows.push(row);
        }
        rows[n][k].clone()
    }

    /// Pre-build rows up to `n` inclusive.
    fn warm(&self, n: usize) {
        let _ = self.get(n, 0);
    }
}

fn pascal_row(prev: &[BigUint], _n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(prev.len() + 1);
    row.push(BigUint::one());
    for k in 1..prev.len() {
        row.push(&prev[k - 1] + &prev[k]);
    }
    row.push(BigUint::one());
    row
}

// S(n, k) = k S(n-1, k) + S(n-1, k-1)
fn stirling_row(prev: &[BigUint], n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::zero(); n + 1];
    for (k, slot) in row.iter_mut().enumerate().skip(1) {
        let stay = if k < prev.len() { &prev[k] * k } else { BigUint::zero() };
        *slot = stay + &prev[k - 1];
    }
    row
}

// Surjections onto m bins: T(n, m) = m (T(n-1, m) + T(n-1, m-1)).
// Indexed here as row n (balls), column m (bins).
fn surjection_row(prev: &[BigUint], n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::zero(); n + 1];
    for (m, slot) in row.iter_mut().enumerate().skip(1) {
        let stay = if m < prev.len() { prev[m].clone() } else { BigUint::zero() };
        *slot = (stay + &prev[m - 1]) * m;
    }
    row
}

static PASCAL: OnceLock<Triangle> = OnceLock::new();
static STIRLING: OnceLock<Triangle> = OnceLock::new();
static SURJECTIONS: OnceLock<Triangle> = OnceLock::new();
static FACTORIALS: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();

/// Tables are pre-built up to this size on first use.
pub const TABLE_SIZE: usize = 200;

fn pascal() -> &'static Triangle {
    PASCAL.get_or_init(|| {
        let t = Triangle::new(pascal_row);
        t.warm(TABLE_SIZE);
        t
    })
}

fn stirling() -> &'static Triangle {
    STIRLING.get_or_init(|| {
        let t = Triangle::new(stirling_row);
        t.warm(TABLE_SIZE);
        t
    })
}

fn surjections() -> &'static Triangle {
    SURJECTIONS.get_or_init(|| Triangle::new(surjection_row))
}

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> Count {
    if n < 0 || k < 0 || k > n {
        return Count::zero();
    }
    pascal().get(n as usize, k as usize)
}

/// Stirling number of the second kind `S(n, k)`.
pub fn stirling2(n: u32, k: u32) -> Count {
    stirling().get(n as usize, k as usize)
}

/// Difference of zeros `Δ^m 0^n`, the number of surjections from `n` balls
/// onto `m` bins. Equals `m! S(n, m)`.
pub fn diff_zeros(m: u32, n: u32) -> Count {
    surjections().get(n as usize, m as usize)
}

pub fn factorial(n: u32) -> Count {
    let table = FACTORIALS.get_or_init(|| RwLock::new(vec![BigUint::one()]));
    let n = n as usize;
    {
        let t = table.read().expect("factorial lock poisoned");
        if let Some(v) = t.get(n) {
            return v.clone();
        }
    }
    let mut t = table.write().expect("factorial lock poisoned");
    while t.len() <= n {
        let next = t.last().expect("non-empty") * t.len();
        t.push(next);
    }
    t[n].clone()
}

/// Falling factorial `n (n-1) ... (n-k+1)`; zero when `k > n`.
pub fn falling_factorial(n: u32, k: u32) -> Count {
    if k > n {
        return Count::zero();
    }
    (n - k + 1..=n).fold(Count::one(), |acc, x| acc * x)
}

/// `base^exp` as a [`Count`].
pub fn power(base: u32, exp: u32) -> Count {
    Pow::pow(BigUint::from(base), exp)
}

/// Exact rational number, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactValue(BigRational);

impl ExactValue {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_count(n: Count) -> Self {
        Self(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom`, reduced. Fails on a zero denominator.
    pub fn ratio(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self(BigRational::new(numer.into(), denom)))
    }

    /// Unsigned fraction; panics on a zero denominator, which callers rule out
    /// structurally (denominators are powers of a positive bin count).
    pub(crate) fn fraction(numer: Count, denom: Count) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Self(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Exact binary value of a finite float.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        // Scale to keep precision when both parts overflow f64.
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let bits = self.denom().bits().max(self.numer().bits()) as i64 - 960;
                let shift = bits.max(0) as usize;
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }

    /// Fixed-point decimal rendering, rounded half away from zero. Locale
    /// independent; always uses `.` as separator.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = Pow::pow(BigInt::from(10u32), digits);
        let scaled = self.numer().abs() * &scale;
        let (q, r) = scaled.div_rem(self.denom());
        let q = if r * 2u32 >= *self.denom() { q + 1u32 } else { q };
        let (int_part, frac_part) = q.div_rem(&scale);
        let sign = if self.is_negative() && !(int_part.is_zero() && frac_part.is_zero()) { "-" } else { "" };
        if digits == 0 {
            return format!("{sign}{int_part}");
        }
        format!("{sign}{int_part}.{frac_part:0>digits$}")
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Default for ExactValue {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactValue({self})")
    }
}

impl FromStr for ExactValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a rational number: {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                Self::ratio(n, d)
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Self(BigRational::from_integer(n)))
            }
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: ExactValue) -> ExactValue {
                ExactValue((self.0).$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactValue> for ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: &'a ExactValue) -> ExactValue {
                ExactValue((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactValue> for &'a ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: &'a ExactValue) -> ExactValue {
                ExactValue((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $tr<ExactValue> for &'a ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: ExactValue) -> ExactValue {
                ExactValue((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for ExactValue {
    type Output = ExactValue;
    fn div(self, rhs: ExactValue) -> ExactValue {
        assert!(!rhs.is_zero(), "division by zero");
        ExactValue(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a ExactValue> for &'a ExactValue {
    type Output = ExactValue;
    fn div(self, rhs: &'a ExactValue) -> ExactValue {
        assert!(!rhs.is_zero(), "division by zero");
        ExactValue(&self.0 / &rhs.0)
    }
}

impl Neg for ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue(-self.0)
    }
}

impl AddAssign for ExactValue {
    fn add_assign(&mut self, rhs: ExactValue) {
        self.0 += rhs.0;
    }
}

impl<'a> AddAssign<&'a ExactValue> for ExactValue {
    fn add_assign(&mut self, rhs: &'a ExactValue) {
        self.0 += &rhs.0;
    }
}

impl Sum for ExactValue {
    fn sum<I: Iterator<Item = ExactValue>>(iter: I) -> Self {
        iter.fold(ExactValue::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a ExactValue> for ExactValue {
    fn sum<I: Iterator<Item = &'a ExactValue>>(iter: I) -> Self {
        iter.fold(ExactValue::zero(), |acc, x| acc + x)
    }
}

impl PartialEq<i64> for ExactValue {
    fn eq(&self, other: &i64) -> bool {
        *self == ExactValue::from_integer(*other)
    }
}

impl PartialOrd<i64> for ExactValue {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.partial_cmp(&ExactValue::from_integer(*other))
    }
}
