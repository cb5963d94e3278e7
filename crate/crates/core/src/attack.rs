//! The explicit adversarial partition that shifts probability between the
//! `f(x) = 0` and `f(x) = 1` classes row by row, plus the quantities used to
//! analyze it: trivial non-uniformity, maximum-likelihood decoding on Bob's
//! side, and correlations.

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::partition::{two_element, BoxPartition};
use crate::scalar::Scalar;
use crate::table::{infer_pr_epsilon, pr_product_cell, BehaviorTable};

/// How row `y` of a block compares the two hash classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowClass {
    /// `Σ_{f(x)=0} P < Σ_{f(x)=1} P`
    Less,
    /// `Σ_{f(x)=0} P > Σ_{f(x)=1} P`
    Greater,
    /// equal and positive
    Tie,
    /// the whole row is zero
    Zero,
}

fn classify<T: Scalar>(zero: &T, one: &T) -> RowClass {
    if zero.is_zero() && one.is_zero() {
        RowClass::Zero
    } else if zero < one {
        RowClass::Less
    } else if zero > one {
        RowClass::Greater
    } else {
        RowClass::Tie
    }
}

pub fn classify_rows<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction, u: usize, v: usize) -> Vec<RowClass> {
    (0..base.outcomes())
        .map(|y| {
            let (zero, one) = base.class_sums(f, u, v, y);
            classify(&zero, &one)
        })
        .collect()
}

/// Cells of the z = 0 conditional for one row, given the base cells.
///
/// Rows where `f = 0` carries less mass double the `f = 0` cells and take the
/// same amount proportionally out of the `f = 1` cells; rows where it carries
/// at least as much move all `f = 1` mass onto the `f = 0` cells in
/// proportion. Ties take the second branch, zero rows are copied.
fn shift_row<T: Scalar>(f: &HashFunction, cells: &[T]) -> Vec<T> {
    let mut zero = T::zero();
    let mut one = T::zero();
    for (x, p) in cells.iter().enumerate() {
        if f.eval(x) {
            one = one + p.clone();
        } else {
            zero = zero + p.clone();
        }
    }
    match classify(&zero, &one) {
        RowClass::Zero => cells.to_vec(),
        RowClass::Less => {
            let keep = (one.clone() - zero) / one;
            let two = T::from_u64(2);
            cells
                .iter()
                .enumerate()
                .map(|(x, p)| if f.eval(x) { keep.clone() * p.clone() } else { two.clone() * p.clone() })
                .collect()
        }
        RowClass::Greater | RowClass::Tie => {
            let scale = (one + zero.clone()) / zero;
            cells
                .iter()
                .enumerate()
                .map(|(x, p)| if f.eval(x) { T::zero() } else { scale.clone() * p.clone() })
                .collect()
        }
    }
}

/// Same as [`shift_row`] but forcing the "less" branch; used to show that
/// tie rows do not depend on the branch taken.
fn shift_row_less_branch<T: Scalar>(f: &HashFunction, cells: &[T]) -> Vec<T> {
    let (zero, one) = cells.iter().enumerate().fold((T::zero(), T::zero()), |(z, o), (x, p)| {
        if f.eval(x) {
            (z, o + p.clone())
        } else {
            (z + p.clone(), o)
        }
    });
    let keep = (one.clone() - zero) / one;
    cells
        .iter()
        .enumerate()
        .map(|(x, p)| if f.eval(x) { keep.clone() * p.clone() } else { T::from_u64(2) * p.clone() })
        .collect()
}

/// The z = 0 conditional of the shifting strategy, built for every input pair.
///
/// The guarantees (non-signaling, `1/2 · result <= base`) are only proven
/// for products of unbiased PR boxes; other bases are accepted with a warning.
pub fn wbar_conditional<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction) -> Result<BehaviorTable<T>> {
    check_widths(base, f)?;
    if infer_pr_epsilon(base).is_none() {
        warn!("base box is not an unbiased PR product; the shifted box may be signaling");
    }
    let size = base.outcomes();
    let mut entries = Vec::with_capacity(base.entries().len());
    for u in 0..size {
        for v in 0..size {
            // the block is stored (x, y) row-major; gather each y column
            let block = base.block(u, v);
            let mut shifted = vec![T::zero(); size * size];
            for y in 0..size {
                let column: Vec<T> = (0..size).map(|x| block[x * size + y].clone()).collect();
                for (x, p) in shift_row(f, &column).into_iter().enumerate() {
                    shifted[x * size + y] = p;
                }
            }
            entries.extend(shifted);
        }
    }
    Ok(BehaviorTable::from_raw(base.width(), entries))
}

/// `{(1/2, wbar_conditional), (1/2, 2·base − wbar_conditional)}`.
pub fn wbar_partition<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction) -> Result<BoxPartition<T>> {
    let cond = wbar_conditional(base, f)?;
    two_element(base, &T::half(), cond)
}

/// `Σ_y min(Σ_{f(x)=0} P(x,y|u,v), Σ_{f(x)=1} P(x,y|u,v))`.
pub fn wbar_nonuniformity<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction, u: usize, v: usize) -> T {
    (0..base.outcomes()).fold(T::zero(), |acc, y| {
        let (zero, one) = base.class_sums(f, u, v, y);
        acc + T::min_of(&zero, &one)
    })
}

/// Min-sum non-uniformity of an n-fold PR product at the all-zero input,
/// evaluated from the Hamming-weight closed form without building a table.
/// By input independence this is the value at every input.
pub fn wbar_nonuniformity_pr<T: Scalar>(n: usize, epsilon: &T, f: &HashFunction) -> Result<T> {
    if f.width() != n {
        return Err(Error::Domain(format!("hash width {} differs from n = {n}", f.width())));
    }
    let size = 1usize << n;
    // cell values depend only on the Hamming distance
    let by_distance: Vec<T> = (0..=n)
        .map(|d| pr_product_cell(n, epsilon, 0, 0, 0, (1usize << d) - 1))
        .collect();
    let mut total = T::zero();
    for y in 0..size {
        let mut zero = T::zero();
        let mut one = T::zero();
        for x in 0..size {
            let p = by_distance[(x ^ y).count_ones() as usize].clone();
            if f.eval(x) {
                one = one + p;
            } else {
                zero = zero + p;
            }
        }
        total = total + T::min_of(&zero, &one);
    }
    Ok(total)
}

/// Non-uniformity without any partition, `1/2 |P(f=0|u,v) − P(f=1|u,v)|`.
pub fn trivial_nonuniformity<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction, u: usize, v: usize) -> T {
    let (zero, one) = base.hash_distribution(f, u, v);
    (zero - one).abs() * T::half()
}

/// Trivial non-uniformity for a PR product, whose Alice marginal is uniform.
pub fn trivial_nonuniformity_uniform<T: Scalar>(f: &HashFunction) -> T {
    let size = 1u64 << f.width();
    let ones = f.ones() as u64;
    let diff = (size - ones) as i64 - ones as i64;
    T::ratio(diff.abs(), 2 * size as i64)
}

/// Bob's maximum-likelihood guess of `f(X)` at input `(u, v)`; ties go to 0.
pub fn max_likelihood_g<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction, u: usize, v: usize) -> HashFunction {
    let table = (0..base.outcomes())
        .map(|y| {
            let (zero, one) = base.class_sums(f, u, v, y);
            zero < one
        })
        .collect();
    HashFunction::from_table(base.width(), table).expect("width already validated")
}

/// `P(f(X) = g(Y)) − P(f(X) ≠ g(Y))` at input `(u, v)`.
pub fn correlation<T: Scalar>(
    base: &BehaviorTable<T>,
    f: &HashFunction,
    g: &HashFunction,
    u: usize,
    v: usize,
) -> T {
    let size = base.outcomes();
    let mut c = T::zero();
    for x in 0..size {
        for y in 0..size {
            let p = base.get(u, v, x, y).clone();
            if f.eval(x) == g.eval(y) {
                c = c + p;
            } else {
                c = c - p;
            }
        }
    }
    c
}

/// `δ(P_{g(Y)}, P_U)` at input `(u, v)`.
pub fn bob_bias<T: Scalar>(base: &BehaviorTable<T>, g: &HashFunction, u: usize, v: usize) -> T {
    let size = base.outcomes();
    let mut diff = T::zero();
    for y in 0..size {
        let py = (0..size).fold(T::zero(), |acc, x| acc + base.get(u, v, x, y).clone());
        if g.eval(y) {
            diff = diff - py;
        } else {
            diff = diff + py;
        }
    }
    diff.abs() * T::half()
}

/// A failure of `δ = 1/2 − c/2` with maximum-likelihood `g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KnowledgeReduceMismatch {
    pub f: String,
    pub input: String,
    pub nonuniformity: String,
    pub from_correlation: String,
}

/// Checks `wbar_nonuniformity = 1/2 − 1/2 · correlation(f, g_ml)` at every input.
pub fn check_knowledgereduce<T: Scalar>(
    base: &BehaviorTable<T>,
    f: &HashFunction,
) -> std::result::Result<(), KnowledgeReduceMismatch> {
    let size = base.outcomes();
    for u in 0..size {
        for v in 0..size {
            let lhs = wbar_nonuniformity(base, f, u, v);
            let g = max_likelihood_g(base, f, u, v);
            let rhs = T::half() - correlation(base, f, &g, u, v) * T::half();
            if !lhs.approx_eq(&rhs) {
                return Err(KnowledgeReduceMismatch {
                    f: f.spec(),
                    input: crate::report::input_key(u, v, base.width()),
                    nonuniformity: lhs.to_string(),
                    from_correlation: rhs.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Whether every tie row yields the same z = 0 cells under both branches.
pub fn tie_rows_branch_independent<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction) -> bool {
    let size = base.outcomes();
    for u in 0..size {
        for v in 0..size {
            let block = base.block(u, v);
            for (y, class) in classify_rows(base, f, u, v).into_iter().enumerate() {
                if class != RowClass::Tie {
                    continue;
                }
                let column: Vec<T> = (0..size).map(|x| block[x * size + y].clone()).collect();
                let a = shift_row(f, &column);
                let b = shift_row_less_branch(f, &column);
                if a.iter().zip(&b).any(|(p, q)| !p.approx_eq(q)) {
                    return false;
                }
            }
        }
    }
    true
}

fn check_widths<T: Scalar>(base: &BehaviorTable<T>, f: &HashFunction) -> Result<()> {
    if f.width() != base.width() {
        return Err(Error::Domain(format!(
            "hash width {} differs from box width {}",
            f.width(),
            base.width()
        )));
    }
    Ok(())
}
