//! Box partitions: convex decompositions `P = Σ_z p^z P^z` of a base box
//! into non-signaling conditionals, one per adversary outcome `z`.

use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::scalar::Scalar;
use crate::table::{BehaviorTable, SignalingWitness};

#[derive(Clone, Debug, PartialEq)]
pub struct Element<T> {
    pub weight: T,
    pub table: BehaviorTable<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxPartition<T> {
    base: BehaviorTable<T>,
    elements: Vec<Element<T>>,
}

/// First constraint a partition fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum PartitionViolation {
    Empty,
    WidthMismatch { element: usize },
    NegativeWeight { element: usize, weight: String },
    WeightSum { sum: String },
    EntryOutOfRange { element: usize, cell: String, value: String },
    NotNormalized { element: usize, detail: String },
    Signaling { element: usize, witness: SignalingWitness },
    MixtureMismatch { cell: String, mixture: String, base: String },
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionViolation::Empty => write!(f, "partition has no elements"),
            PartitionViolation::WidthMismatch { element } => {
                write!(f, "element {element} has a different port width than the base")
            }
            PartitionViolation::NegativeWeight { element, weight } => {
                write!(f, "element {element} has negative weight {weight}")
            }
            PartitionViolation::WeightSum { sum } => write!(f, "weights sum to {sum}, not 1"),
            PartitionViolation::EntryOutOfRange { element, cell, value } => {
                write!(f, "element {element} has entry {value} at {cell} outside [0, 1]")
            }
            PartitionViolation::NotNormalized { element, detail } => {
                write!(f, "element {element} is not normalized: {detail}")
            }
            PartitionViolation::Signaling { element, witness } => {
                write!(f, "element {element} is signaling: {witness}")
            }
            PartitionViolation::MixtureMismatch { cell, mixture, base } => {
                write!(f, "mixture gives {mixture} at {cell} but the base has {base}")
            }
        }
    }
}

impl<T: Scalar> BoxPartition<T> {
    /// Unchecked constructor; call [`BoxPartition::validate`] to check it.
    pub fn new(base: BehaviorTable<T>, elements: Vec<Element<T>>) -> Self {
        BoxPartition { base, elements }
    }

    pub fn trivial(base: BehaviorTable<T>) -> Self {
        let table = base.clone();
        BoxPartition { base, elements: vec![Element { weight: T::one(), table }] }
    }

    pub fn base(&self) -> &BehaviorTable<T> {
        &self.base
    }

    pub fn elements(&self) -> &[Element<T>] {
        &self.elements
    }

    /// Checks weights, every non-zero-weight conditional, and the mixture
    /// identity. Zero-weight elements are ignored.
    pub fn validate(&self) -> std::result::Result<(), PartitionViolation> {
        if self.elements.is_empty() {
            return Err(PartitionViolation::Empty);
        }
        let mut sum = T::zero();
        for (k, e) in self.elements.iter().enumerate() {
            if e.weight < T::zero() && !e.weight.approx_eq(&T::zero()) {
                return Err(PartitionViolation::NegativeWeight {
                    element: k,
                    weight: e.weight.to_string(),
                });
            }
            sum = sum + e.weight.clone();
        }
        if !sum.approx_eq(&T::one()) {
            return Err(PartitionViolation::WeightSum { sum: sum.to_string() });
        }
        for (k, e) in self.elements.iter().enumerate() {
            if e.weight.approx_eq(&T::zero()) {
                continue;
            }
            if e.table.width() != self.base.width() {
                return Err(PartitionViolation::WidthMismatch { element: k });
            }
            if let Some(i) = e.table.entries().iter().position(|v| !v.is_probability()) {
                return Err(PartitionViolation::EntryOutOfRange {
                    element: k,
                    cell: e.table.cell(i).to_string(),
                    value: e.table.entries()[i].to_string(),
                });
            }
            if let Err(err) = e.table.check_normalized() {
                return Err(PartitionViolation::NotNormalized { element: k, detail: err.to_string() });
            }
            if let Some(witness) = e.table.signaling_witness() {
                return Err(PartitionViolation::Signaling { element: k, witness });
            }
        }
        for (i, b) in self.base.entries().iter().enumerate() {
            let mixture = self
                .elements
                .iter()
                .filter(|e| !e.weight.approx_eq(&T::zero()))
                .fold(T::zero(), |acc, e| acc + e.weight.clone() * e.table.entries()[i].clone());
            if !mixture.approx_eq(b) {
                return Err(PartitionViolation::MixtureMismatch {
                    cell: self.base.cell(i).to_string(),
                    mixture: mixture.to_string(),
                    base: b.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Collapses every element except `keep` into one weighted mixture.
    pub fn merge_to_two(&self, keep: usize) -> Result<Self> {
        if keep >= self.elements.len() {
            return Err(Error::Domain(format!(
                "element {keep} out of range for a partition of {} elements",
                self.elements.len()
            )));
        }
        self.validate().map_err(Error::InvalidPartition)?;
        let kept = self.elements[keep].clone();
        let rest = T::one() - kept.weight.clone();
        if rest.approx_eq(&T::zero()) {
            return Ok(BoxPartition { base: self.base.clone(), elements: vec![kept] });
        }
        let others: Vec<&Element<T>> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != keep)
            .map(|(_, e)| e)
            .collect();
        let n = self.base.width();
        let entries = (0..self.base.entries().len())
            .map(|i| {
                others.iter().fold(T::zero(), |acc, e| {
                    acc + e.weight.clone() * e.table.entries()[i].clone()
                }) / rest.clone()
            })
            .collect();
        let merged = BehaviorTable::from_raw(n, entries);
        Ok(BoxPartition {
            base: self.base.clone(),
            elements: vec![kept, Element { weight: rest, table: merged }],
        })
    }

    /// Non-uniformity of `f(X)` given this partition at input `(u, v)`:
    /// `1/2 Σ_z p^z |P^z(f=0|u,v) - P^z(f=1|u,v)|`.
    pub fn nonuniformity(&self, f: &HashFunction, u: usize, v: usize) -> T {
        let total = self.elements.iter().fold(T::zero(), |acc, e| {
            let (zero, one) = e.table.hash_distribution(f, u, v);
            acc + e.weight.clone() * (zero - one).abs()
        });
        total * T::half()
    }

    pub fn to_json(&self) -> Value {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                let mut m = Map::new();
                m.insert("p".into(), e.weight.to_json());
                m.insert("box".into(), e.table.to_json());
                Value::Object(m)
            })
            .collect();
        let mut root = Map::new();
        root.insert("base".into(), self.base.to_json());
        root.insert("elements".into(), Value::Array(elements));
        Value::Object(root)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let base = BehaviorTable::from_json(
            v.get("base").ok_or_else(|| Error::Parse("partition JSON needs 'base'".into()))?,
        )?;
        let elements = v
            .get("elements")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("partition JSON needs array 'elements'".into()))?
            .iter()
            .map(|e| {
                let weight = T::from_json(
                    e.get("p").ok_or_else(|| Error::Parse("element needs 'p'".into()))?,
                )?;
                let table = BehaviorTable::from_json(
                    e.get("box").ok_or_else(|| Error::Parse("element needs 'box'".into()))?,
                )?;
                Ok(Element { weight, table })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoxPartition { base, elements })
    }
}

/// First cell where `p · cond > base`, if any.
pub fn first_infeasible_cell<T: Scalar>(
    base: &BehaviorTable<T>,
    p: &T,
    cond: &BehaviorTable<T>,
) -> Option<usize> {
    if base.width() != cond.width() {
        return Some(0);
    }
    base.entries()
        .iter()
        .zip(cond.entries())
        .position(|(b, c)| {
            let scaled = p.clone() * c.clone();
            scaled > *b && !scaled.approx_eq(b)
        })
}

/// Whether `(p, cond)` extends to a partition of `base`: `p · cond <= base`
/// cell-wise.
pub fn feasible_element<T: Scalar>(base: &BehaviorTable<T>, p: &T, cond: &BehaviorTable<T>) -> bool {
    first_infeasible_cell(base, p, cond).is_none()
}

/// The complementary conditional `(base - p · cond) / (1 - p)`.
pub fn complement<T: Scalar>(
    base: &BehaviorTable<T>,
    p: &T,
    cond: &BehaviorTable<T>,
) -> Result<BehaviorTable<T>> {
    if *p < T::zero() || *p >= T::one() {
        return Err(Error::Domain(format!("weight {p} must lie in [0, 1)")));
    }
    if base.width() != cond.width() {
        return Err(Error::Domain("base and conditional differ in width".into()));
    }
    if let Some(i) = first_infeasible_cell(base, p, cond) {
        return Err(Error::Infeasible { cell: base.cell(i).to_string() });
    }
    let rest = T::one() - p.clone();
    let entries = base
        .entries()
        .iter()
        .zip(cond.entries())
        .map(|(b, c)| (b.clone() - p.clone() * c.clone()) / rest.clone())
        .collect();
    Ok(BehaviorTable::from_raw(base.width(), entries))
}

/// `{(p, cond), (1 - p, complement)}`.
pub fn two_element<T: Scalar>(
    base: &BehaviorTable<T>,
    p: &T,
    cond: BehaviorTable<T>,
) -> Result<BoxPartition<T>> {
    if p.approx_eq(&T::one()) {
        return Ok(BoxPartition::new(base.clone(), vec![Element { weight: T::one(), table: cond }]));
    }
    let other = complement(base, p, &cond)?;
    Ok(BoxPartition::new(
        base.clone(),
        vec![
            Element { weight: p.clone(), table: cond },
            Element { weight: T::one() - p.clone(), table: other },
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::table::{pr_box, pr_product};

    fn r(a: i64, b: i64) -> Rational {
        Rational::ratio(a, b)
    }

    /// The optimal single-box z=0 conditional at input (0,0).
    pub(crate) fn single_box_attack(eps: &Rational) -> BehaviorTable<Rational> {
        let half = r(1, 2);
        let e = eps.clone();
        // rows indexed [v][y][u][x] as printed: V, Y down; U, X across
        let cell = |u: usize, v: usize, x: usize, y: usize| -> Rational {
            match (v, y, u, x) {
                (_, 0, 0, 0) => &half + &e,
                (_, 0, 0, 1) => r(0, 1),
                (_, 1, 0, 0) => e.clone(),
                (_, 1, 0, 1) => &half - r(2, 1) * &e,
                (0, 0, 1, 0) => half.clone(),
                (0, 0, 1, 1) => e.clone(),
                (0, 1, 1, 0) => r(0, 1),
                (0, 1, 1, 1) => &half - &e,
                (1, 0, 1, 0) => e.clone(),
                (1, 0, 1, 1) => half.clone(),
                (1, 1, 1, 0) => &half - &e,
                (1, 1, 1, 1) => r(0, 1),
                _ => unreachable!(),
            }
        };
        BehaviorTable::from_fn(1, cell).unwrap()
    }

    fn signaling_conditional() -> BehaviorTable<Rational> {
        BehaviorTable::from_fn(1, |u, _, _, y| if y == u { r(1, 2) } else { r(0, 1) }).unwrap()
    }

    #[test]
    fn trivial_partition_is_valid() {
        let base = pr_box(&r(1, 8)).unwrap();
        assert!(BoxPartition::trivial(base).is_valid());
    }

    #[test]
    fn signaling_element_rejected() {
        let base = pr_box(&r(1, 2)).unwrap();
        let bad = signaling_conditional();
        // 1/2 bad + 1/2 (2 base - bad) reproduces base; entries stay in range
        let other = BehaviorTable::from_fn(1, |u, v, x, y| {
            r(2, 1) * base.get(u, v, x, y) - bad.get(u, v, x, y)
        })
        .unwrap();
        let p = BoxPartition::new(
            base,
            vec![Element { weight: r(1, 2), table: bad }, Element { weight: r(1, 2), table: other }],
        );
        assert!(matches!(p.validate(), Err(PartitionViolation::Signaling { element: 0, .. })));
    }

    #[test]
    fn weight_and_mixture_violations() {
        let base = pr_box(&r(1, 8)).unwrap();
        let p = BoxPartition::new(
            base.clone(),
            vec![Element { weight: r(1, 2), table: base.clone() }],
        );
        assert!(matches!(p.validate(), Err(PartitionViolation::WeightSum { .. })));
        let other = pr_box(&r(1, 4)).unwrap();
        let p = BoxPartition::new(base, vec![Element { weight: r(1, 1), table: other }]);
        assert!(matches!(p.validate(), Err(PartitionViolation::MixtureMismatch { .. })));
    }

    #[test]
    fn zero_weight_elements_ignored() {
        let base = pr_box(&r(1, 8)).unwrap();
        let p = BoxPartition::new(
            base.clone(),
            vec![
                Element { weight: r(1, 1), table: base },
                Element { weight: r(0, 1), table: signaling_conditional() },
            ],
        );
        assert!(p.is_valid());
    }

    #[test]
    fn three_outcome_partition_merges() {
        // z=0 certain x=0, z=1 certain x=1, z=δ the rest; from the optimal
        // two-outcome attack by splitting off deterministic parts
        let eps = r(1, 8);
        let base = pr_box(&eps).unwrap();
        let attack = single_box_attack(&eps);
        let p = two_element(&base, &r(1, 2), attack).unwrap();
        p.validate().unwrap();
        let delta_box = base.clone();
        let three = BoxPartition::new(
            base.clone(),
            vec![
                Element { weight: r(1, 4), table: p.elements()[0].table.clone() },
                Element { weight: r(1, 4), table: p.elements()[1].table.clone() },
                Element { weight: r(1, 2), table: delta_box },
            ],
        );
        // mixture: 1/4 (A + B) + 1/2 base = 1/2 base + 1/2 base
        three.validate().unwrap();
        let merged = three.merge_to_two(0).unwrap();
        merged.validate().unwrap();
        assert_eq!(merged.elements().len(), 2);
        assert_eq!(merged.elements()[0], three.elements()[0]);
        assert_eq!(merged.base(), three.base());
    }

    #[test]
    fn merge_single_element() {
        let base = pr_box(&r(1, 8)).unwrap();
        let p = BoxPartition::trivial(base);
        assert_eq!(p.merge_to_two(0).unwrap(), p);
        assert!(p.merge_to_two(1).is_err());
    }

    #[test]
    fn feasibility() {
        let eps = r(1, 8);
        let base = pr_box(&eps).unwrap();
        assert!(feasible_element(&base, &r(1, 2), &single_box_attack(&eps)));
        assert!(feasible_element(&base, &r(1, 1), &base));
        let point = BehaviorTable::from_fn(1, |_, _, x, y| {
            if x == 0 && y == 0 {
                r(1, 1)
            } else {
                r(0, 1)
            }
        })
        .unwrap();
        assert!(!feasible_element(&base, &r(1, 2), &point));
        assert!(matches!(complement(&base, &r(1, 2), &point), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn complement_of_single_box_attack() {
        let eps = r(1, 8);
        let base = pr_box(&eps).unwrap();
        let other = complement(&base, &r(1, 2), &single_box_attack(&eps)).unwrap();
        other.check_valid().unwrap();
        assert!(other.is_nonsignaling());
        let (zero, one) = other.hash_distribution(&HashFunction::xor(1), 0, 0);
        assert!(one > zero);
        assert_eq!(complement(&base, &r(1, 2), &base).unwrap(), base);
    }

    #[test]
    fn nonuniformity_of_single_box_attack() {
        for k in 0..=4 {
            let eps = r(k, 16);
            let base = pr_box(&eps).unwrap();
            let p = two_element(&base, &r(1, 2), single_box_attack(&eps)).unwrap();
            p.validate().unwrap();
            assert_eq!(p.nonuniformity(&HashFunction::xor(1), 0, 0), r(2, 1) * &eps);
        }
    }

    #[test]
    fn json_round_trip() {
        let base = pr_product(2, &r(1, 8)).unwrap();
        let p = BoxPartition::trivial(base);
        let back = BoxPartition::<Rational>::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }
}
