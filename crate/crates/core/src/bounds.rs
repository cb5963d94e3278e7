//! Closed-form bounds: the XOR attack, Yang's correlation trade-off, the
//! composed marginal bound and the main lower-bound curve.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::attack::{bob_bias, max_likelihood_g, trivial_nonuniformity};
use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::scalar::{format_rational, serde_rational, Probability, Rational, Scalar};
use crate::table::BehaviorTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    XorSeries,
    XorClosed,
    Yang,
    HalfDelta,
    MainTheorem,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::XorSeries => "xor_series",
            BoundKind::XorClosed => "xor_closed",
            BoundKind::Yang => "yang",
            BoundKind::HalfDelta => "half_delta",
            BoundKind::MainTheorem => "main_theorem",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub epsilon: Probability,
    /// Signed for `yang`; the enclosure upper end for `main_theorem`.
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub kind: BoundKind,
}

/// `Σ_i C(n, 2i−1) ε^{2i−1} (1−ε)^{n−2i+1}`: probability that an odd number of
/// the n box outputs disagree.
pub fn xor_bias_series<T: Scalar>(n: usize, epsilon: &T) -> T {
    let one_minus = T::one() - epsilon.clone();
    let mut total = T::zero();
    let mut binom = T::one();
    for k in 0..=n {
        if k > 0 {
            binom = binom * T::from_u64((n - k + 1) as u64) / T::from_u64(k as u64);
        }
        if k % 2 == 1 {
            total = total + binom.clone() * epsilon.powu(k as u32) * one_minus.powu((n - k) as u32);
        }
    }
    total
}

/// `(1 − (1−2ε)^n) / 2`.
pub fn xor_bias_closed<T: Scalar>(n: usize, epsilon: &T) -> T {
    let base = T::one() - T::from_u64(2) * epsilon.clone();
    (T::one() - base.powu(n as u32)) * T::half()
}

/// Maximal correlation `1 − 2ε(1 − 4δ²)` of two bits with marginal bias `δ`.
pub fn yang_bound<T: Scalar>(epsilon: &T, delta: &T) -> T {
    let four = T::from_u64(4);
    T::one() - T::from_u64(2) * epsilon.clone() * (T::one() - four * delta.clone() * delta.clone())
}

/// Outward-rounded rational interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enclosure {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl Enclosure {
    pub fn exact(v: Rational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// True only if every point of the interval is `<= v`.
    pub fn certainly_le(&self, v: &Rational) -> bool {
        self.hi <= *v
    }

    /// True only if every point of the interval is `> v`.
    pub fn certainly_gt(&self, v: &Rational) -> bool {
        self.lo > *v
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / Rational::from_integer(2.into())).to_f64()
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

fn check_main_domain(epsilon: &Rational) -> Result<()> {
    if epsilon.is_negative() || *epsilon > Rational::ratio(1, 4) {
        return Err(Error::Domain(format!("epsilon {} outside [0, 1/4]", format_rational(epsilon))));
    }
    Ok(())
}

/// Certified enclosure of `(−1 + √(1+64ε²)) / (32ε)`, zero at ε = 0.
///
/// With ε = a/b the value is `(√(b² + 64a²) − b) / (32a)`; the integer square
/// root is taken after scaling by `4^k`.
pub fn main_theorem_bound(epsilon: &Rational) -> Result<Enclosure> {
    check_main_domain(epsilon)?;
    if epsilon.is_zero() {
        return Ok(Enclosure::exact(Rational::zero()));
    }
    let a = epsilon.numer().clone();
    let b = epsilon.denom().clone();
    let radicand: BigInt = &b * &b + BigInt::from(64) * &a * &a;
    let denom = BigInt::from(32) * &a;
    let limit = max_enclosure_width();
    let mut k = 40u32;
    loop {
        let scale = BigInt::one() << k;
        let scaled = &radicand * &scale * &scale;
        let root = scaled.sqrt();
        let to_value = |r: BigInt| Rational::new(r - &b * &scale, &denom * &scale);
        if &root * &root == scaled {
            return Ok(Enclosure::exact(to_value(root)));
        }
        let enclosure = Enclosure { lo: to_value(root.clone()), hi: to_value(root + 1) };
        if enclosure.width() <= limit {
            return Ok(enclosure);
        }
        k += 8;
    }
}

fn max_enclosure_width() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(10u64).pow(12))
}

pub fn main_theorem_bound_f64(epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        return 0.0;
    }
    // rationalized form avoids cancellation for small ε
    let t = 64.0 * epsilon * epsilon;
    2.0 * epsilon / (1.0 + (1.0 + t).sqrt())
}

/// `max(δ/2, ε(1 − 4δ²))` with `δ` the larger of the marginal biases of
/// `f(X)` and of the maximum-likelihood guess `g(Y)` at the all-zero input.
pub fn composed_lower_bound(
    base: &BehaviorTable<Rational>,
    f: &HashFunction,
    epsilon: &Rational,
) -> Result<Probability> {
    if f.width() != base.width() {
        return Err(Error::Domain(format!("hash width {} differs from box width {}", f.width(), base.width())));
    }
    let delta = marginal_delta(base, f);
    let four = Rational::from_u64(4);
    let yang_term = epsilon * (Rational::one() - four * &delta * &delta);
    let half_delta = delta * Rational::half();
    Probability::new(Rational::max_of(&half_delta, &yang_term))
}

fn marginal_delta(base: &BehaviorTable<Rational>, f: &HashFunction) -> Rational {
    let g = max_likelihood_g(base, f, 0, 0);
    let df = trivial_nonuniformity(base, f, 0, 0);
    let dg = bob_bias(base, &g, 0, 0);
    Rational::max_of(&df, &dg)
}

/// All bound kinds at one grid point; `n` is ignored by the ε-only kinds.
pub fn bound_points(n: usize, epsilon: &Probability) -> Result<Vec<BoundPoint>> {
    let eps = epsilon.value();
    let mut out = vec![
        BoundPoint { n: Some(n), epsilon: epsilon.clone(), value: xor_bias_series(n, eps), kind: BoundKind::XorSeries },
        BoundPoint { n: Some(n), epsilon: epsilon.clone(), value: xor_bias_closed(n, eps), kind: BoundKind::XorClosed },
    ];
    if *eps <= Rational::ratio(1, 4) {
        let enclosure = main_theorem_bound(eps)?;
        out.push(BoundPoint { n: None, epsilon: epsilon.clone(), value: enclosure.hi, kind: BoundKind::MainTheorem });
    }
    Ok(out)
}
