//! Independent reference computations. Nothing here calls into the library's
//! arithmetic beyond constructing rationals and hash truth tables.

#![allow(dead_code)]

use nspa::{HashFunction, Rational, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn r(a: i64, b: i64) -> Rational {
    Rational::ratio(a, b)
}

pub fn bit(value: usize, n: usize, i: usize) -> usize {
    (value >> (n - 1 - i)) & 1
}

/// Box-by-box product of single PR-box cells.
pub fn pr_cell(n: usize, eps: &Rational, u: usize, v: usize, x: usize, y: usize) -> Rational {
    let hit = (Rational::one() - eps) / r(2, 1);
    let miss = eps / r(2, 1);
    let mut p = Rational::one();
    for i in 0..n {
        let wins = bit(x, n, i) ^ bit(y, n, i) == bit(u, n, i) & bit(v, n, i);
        p *= if wins { &hit } else { &miss };
    }
    p
}

/// Per Bob output y: (P[f(X)=0, y], P[f(X)=1, y]) at input (u, v).
pub fn class_sums(n: usize, eps: &Rational, f: &HashFunction, u: usize, v: usize) -> Vec<(Rational, Rational)> {
    let size = 1 << n;
    (0..size)
        .map(|y| {
            let mut zero = Rational::zero();
            let mut one = Rational::zero();
            for x in 0..size {
                let p = pr_cell(n, eps, u, v, x, y);
                if f.table()[x] {
                    one += p;
                } else {
                    zero += p;
                }
            }
            (zero, one)
        })
        .collect()
}

pub fn min_sum(n: usize, eps: &Rational, f: &HashFunction, u: usize, v: usize) -> Rational {
    class_sums(n, eps, f, u, v)
        .into_iter()
        .fold(Rational::zero(), |acc, (a, b)| acc + if a < b { a } else { b })
}

/// |P(f=0) − 1/2| for the PR product at (u, v).
pub fn trivial(n: usize, eps: &Rational, f: &HashFunction, u: usize, v: usize) -> Rational {
    let p0 = class_sums(n, eps, f, u, v).into_iter().fold(Rational::zero(), |acc, (a, _)| acc + a);
    let d = p0 - r(1, 2);
    if d < Rational::zero() {
        -d
    } else {
        d
    }
}

/// Correlation of f(X) and g(Y) at (u, v).
pub fn correlation(n: usize, eps: &Rational, f: &HashFunction, g: &HashFunction, u: usize, v: usize) -> Rational {
    let size = 1 << n;
    let mut c = Rational::zero();
    for x in 0..size {
        for y in 0..size {
            let p = pr_cell(n, eps, u, v, x, y);
            if f.table()[x] == g.table()[y] {
                c += p;
            } else {
                c -= p;
            }
        }
    }
    c
}

/// |P(g(Y)=0) − 1/2| at (u, v).
pub fn bob_bias(n: usize, eps: &Rational, g: &HashFunction, u: usize, v: usize) -> Rational {
    let size = 1 << n;
    let mut p0 = Rational::zero();
    for y in 0..size {
        if !g.table()[y] {
            for x in 0..size {
                p0 += pr_cell(n, eps, u, v, x, y);
            }
        }
    }
    let d = p0 - r(1, 2);
    if d < Rational::zero() {
        -d
    } else {
        d
    }
}

/// Best correlation over every Bob-side function g, by enumeration. Only the
/// per-y differences `P[f=0,y] − P[f=1,y]` are precomputed.
pub fn brute_force_best_correlation(n: usize, eps: &Rational, f: &HashFunction) -> Rational {
    let diffs: Vec<Rational> = class_sums(n, eps, f, 0, 0).into_iter().map(|(a, b)| a - b).collect();
    let mut best: Option<Rational> = None;
    for g in HashFunction::enumerate(n).expect("small width") {
        let c = diffs
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (y, d)| if g.table()[y] { acc - d } else { acc + d });
        if best.as_ref().map_or(true, |b| c > *b) {
            best = Some(c);
        }
    }
    best.expect("at least one function")
}

/// `Σ_{k odd} C(n,k) ε^k (1−ε)^{n−k}` with big-integer binomials.
pub fn odd_binomial_sum(n: usize, eps: &Rational) -> Rational {
    let mut total = Rational::zero();
    let mut binom = BigInt::one();
    for k in 0..=n {
        if k > 0 {
            binom = binom * BigInt::from(n - k + 1) / BigInt::from(k);
        }
        if k % 2 == 1 {
            let term = Rational::from_integer(binom.clone())
                * num_traits::pow(eps.clone(), k)
                * num_traits::pow(Rational::one() - eps, n - k);
            total += term;
        }
    }
    total
}

/// The main curve evaluated naively in floating point.
pub fn crude_main_bound(eps: f64) -> f64 {
    (-1.0 + (1.0 + 64.0 * eps * eps).sqrt()) / (32.0 * eps)
}
