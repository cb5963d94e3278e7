//! Optimal two-outcome attack as an exact LP.
//!
//! The unknowns are the cells `q(x,y|u,v)` of the adversary's z = 0
//! conditional. They must form a normalized, non-signaling box that can occur
//! with weight `p` (`p · q <= base`). The objective is the signed bias
//! `P_q(f(X)=0|u*,v*) − 1/2` at a designated input.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::lp::{Constraint, LinearProgram, Relation, Solution};
use crate::partition::{two_element, BoxPartition};
use crate::report::{input_key, AttackReport, LpDetails, Strategy};
use crate::scalar::{format_rational, Probability, Rational, Scalar};
use crate::table::BehaviorTable;

/// Widest box for which the attack LP is built (256 variables at n = 2).
pub const MAX_LP_WIDTH: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    TowardZero,
    TowardOne,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::TowardZero => "toward0",
            Direction::TowardOne => "toward1",
        }
    }
}

pub fn build_attack_lp(
    base: &BehaviorTable<Rational>,
    f: &HashFunction,
    p: &Probability,
    objective_input: (usize, usize),
    direction: Direction,
) -> Result<LinearProgram> {
    let n = base.width();
    if n > MAX_LP_WIDTH {
        return Err(Error::Resource { requested: n, cap: MAX_LP_WIDTH });
    }
    if f.width() != n {
        return Err(Error::Domain(format!("hash width {} differs from box width {n}", f.width())));
    }
    let p = p.value();
    if p.is_zero() || *p >= Rational::one() {
        return Err(Error::Domain(format!("weight {} must lie in (0, 1)", format_rational(p))));
    }
    if let Some(w) = base.signaling_witness() {
        return Err(Error::Signaling(w));
    }
    let size = base.outcomes();
    let (ou, ov) = objective_input;
    if ou >= size || ov >= size {
        return Err(Error::Domain("objective input out of range".into()));
    }

    let mut lp = LinearProgram::new(base.entries().len());
    for i in 0..base.entries().len() {
        lp.names[i] = format!("q[{}]", base.cell(i));
        lp.upper[i] = Some(&base.entries()[i] / p);
    }

    for u in 0..size {
        for v in 0..size {
            let terms = (0..size * size)
                .map(|k| (base.index(u, v, k / size, k % size), Rational::one()))
                .collect();
            lp.add_constraint(Constraint::new(
                format!("norm {}", input_key(u, v, n)),
                terms,
                Relation::Eq,
                Rational::one(),
            ));
        }
    }
    // Alice's marginal may not depend on v: compare every v against v = 0
    for u in 0..size {
        for x in 0..size {
            for v in 1..size {
                let mut terms = Vec::with_capacity(2 * size);
                for y in 0..size {
                    terms.push((base.index(u, v, x, y), Rational::one()));
                    terms.push((base.index(u, 0, x, y), -Rational::one()));
                }
                lp.add_constraint(Constraint::new(
                    format!("ns-A u={} x={} v={}", bits(u, n), bits(x, n), bits(v, n)),
                    terms,
                    Relation::Eq,
                    Rational::zero(),
                ));
            }
        }
    }
    // Bob's marginal may not depend on u
    for v in 0..size {
        for y in 0..size {
            for u in 1..size {
                let mut terms = Vec::with_capacity(2 * size);
                for x in 0..size {
                    terms.push((base.index(u, v, x, y), Rational::one()));
                    terms.push((base.index(0, v, x, y), -Rational::one()));
                }
                lp.add_constraint(Constraint::new(
                    format!("ns-B v={} y={} u={}", bits(v, n), bits(y, n), bits(u, n)),
                    terms,
                    Relation::Eq,
                    Rational::zero(),
                ));
            }
        }
    }

    // (P(f=0) − P(f=1)) / 2 = P(f=0) − 1/2 on normalized q
    let half = Rational::half();
    let sign = match direction {
        Direction::TowardZero => half,
        Direction::TowardOne => -half,
    };
    for x in 0..size {
        for y in 0..size {
            let coef = if f.eval(x) { -sign.clone() } else { sign.clone() };
            lp.objective[base.index(ou, ov, x, y)] = coef;
        }
    }
    Ok(lp)
}

fn bits(v: usize, n: usize) -> String {
    crate::bits::bits_to_string(v, n)
}

/// Attack LP optimum and the partition assembled from it.
#[derive(Clone, Debug)]
pub struct OptimalAttack {
    pub report: AttackReport,
    pub partition: BoxPartition<Rational>,
    pub solution: Solution,
}

#[derive(Clone, Debug)]
pub struct AttackOptions {
    pub p: Probability,
    pub objective_input: (usize, usize),
    pub both_directions: bool,
    /// Also solve the LP with every input pair as objective input.
    pub all_inputs: bool,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            p: Probability::half(),
            objective_input: (0, 0),
            both_directions: false,
            all_inputs: false,
        }
    }
}

fn solve_direction(
    base: &BehaviorTable<Rational>,
    f: &HashFunction,
    opts: &AttackOptions,
    input: (usize, usize),
) -> Result<(Solution, Direction)> {
    let toward_zero = build_attack_lp(base, f, &opts.p, input, Direction::TowardZero)?.solve()?;
    if !opts.both_directions {
        return Ok((toward_zero, Direction::TowardZero));
    }
    let toward_one = build_attack_lp(base, f, &opts.p, input, Direction::TowardOne)?.solve()?;
    if toward_one.optimum > toward_zero.optimum {
        Ok((toward_one, Direction::TowardOne))
    } else {
        Ok((toward_zero, Direction::TowardZero))
    }
}

/// Solves the attack LP, assembles `{(p, q*), (1 − p, complement)}`, validates
/// it and reports the non-uniformity of the partition at every input.
pub fn optimal_attack(
    base: &BehaviorTable<Rational>,
    f: &HashFunction,
    epsilon: &Probability,
    opts: &AttackOptions,
) -> Result<OptimalAttack> {
    let (solution, direction) = solve_direction(base, f, opts, opts.objective_input)?;
    let cond = BehaviorTable::from_raw(base.width(), solution.values.clone());
    let partition = two_element(base, opts.p.value(), cond)?;
    partition.validate().map_err(Error::InvalidPartition)?;

    let mut report = AttackReport::skeleton(Strategy::Lp, base, f, epsilon, opts.objective_input)?;
    let size = base.outcomes();
    for u in 0..size {
        for v in 0..size {
            let delta = Probability::new(partition.nonuniformity(f, u, v))?;
            report.delta_per_input.insert(input_key(u, v, base.width()), delta);
        }
    }
    report.delta = report.delta_per_input[&report.input].clone();

    let mut details = LpDetails {
        p: opts.p.clone(),
        direction: direction.as_str().to_string(),
        optimum: solution.optimum.clone(),
        pivots: solution.pivots,
        optimum_per_input: None,
        input_independent: None,
    };
    if opts.all_inputs {
        let mut per_input = BTreeMap::new();
        for u in 0..size {
            for v in 0..size {
                let (s, _) = solve_direction(base, f, opts, (u, v))?;
                per_input.insert(input_key(u, v, base.width()), format_rational(&s.optimum));
            }
        }
        let first = per_input.values().next().cloned();
        details.input_independent = Some(per_input.values().all(|o| Some(o) == first.as_ref()));
        details.optimum_per_input = Some(per_input);
    }
    report.lp = Some(details);
    Ok(OptimalAttack { report, partition, solution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{wbar_conditional, wbar_nonuniformity};
    use crate::table::{pr_box, pr_product};

    fn r(a: i64, b: i64) -> Rational {
        Rational::ratio(a, b)
    }

    fn id() -> HashFunction {
        HashFunction::parse("tt:2", 1).unwrap()
    }

    #[test]
    fn single_box_lp_shape() {
        let base = pr_box(&r(1, 8)).unwrap();
        let lp = build_attack_lp(&base, &id(), &Probability::half(), (0, 0), Direction::TowardZero).unwrap();
        assert_eq!(lp.num_vars(), 16);
        let norm = lp.constraints.iter().filter(|c| c.label.starts_with("norm")).count();
        let ns = lp.constraints.iter().filter(|c| c.label.starts_with("ns-")).count();
        assert_eq!((norm, ns, lp.num_caps()), (4, 8, 16));
        let base2 = pr_product(2, &r(1, 8)).unwrap();
        let lp2 = build_attack_lp(&base2, &HashFunction::xor(2), &Probability::half(), (0, 0), Direction::TowardZero)
            .unwrap();
        assert_eq!(lp2.num_vars(), 256);
    }

    #[test]
    fn single_box_optimum_is_two_epsilon() {
        for k in 0..=4 {
            let eps = r(k, 16);
            let base = pr_box(&eps).unwrap();
            let lp = build_attack_lp(&base, &id(), &Probability::half(), (0, 0), Direction::TowardZero).unwrap();
            assert_eq!(lp.solve().unwrap().optimum, r(2, 1) * &eps);
        }
        let base = pr_box(&r(3, 8)).unwrap();
        let lp = build_attack_lp(&base, &id(), &Probability::half(), (0, 0), Direction::TowardZero).unwrap();
        assert_eq!(lp.solve().unwrap().optimum, r(1, 2));
    }

    #[test]
    fn weight_one_cap_forces_base() {
        // p close to 1 leaves only q = base for a PR box: zero bias
        let base = pr_box(&r(1, 8)).unwrap();
        let p = Probability::ratio(999, 1000).unwrap();
        let lp = build_attack_lp(&base, &id(), &p, (0, 0), Direction::TowardZero).unwrap();
        let opt = lp.solve().unwrap().optimum;
        assert!(opt < r(1, 100));
        assert!(build_attack_lp(&base, &id(), &Probability::one(), (0, 0), Direction::TowardZero).is_err());
    }

    #[test]
    fn optimal_attack_report() {
        let eps: Probability = "1/8".parse().unwrap();
        let base = pr_box(eps.value()).unwrap();
        let attack = optimal_attack(&base, &id(), &eps, &AttackOptions::default()).unwrap();
        assert_eq!(attack.report.delta.to_string(), "1/4");
        let (zero, _) = attack.partition.elements()[0].table.hash_distribution(&id(), 0, 0);
        assert_eq!(zero, r(3, 4));
    }

    #[test]
    fn perfect_boxes_give_no_bias() {
        let eps = Probability::zero();
        let base = pr_box(eps.value()).unwrap();
        for f in HashFunction::enumerate(1).unwrap().filter(|f| f.ones() == 1) {
            let attack = optimal_attack(&base, &f, &eps, &AttackOptions::default()).unwrap();
            assert_eq!(attack.report.delta, Probability::zero());
        }
    }

    #[test]
    fn wbar_is_lp_feasible() {
        let base = pr_product(2, &r(1, 8)).unwrap();
        let f = HashFunction::xor(2);
        let lp = build_attack_lp(&base, &f, &Probability::half(), (0, 0), Direction::TowardZero).unwrap();
        let cond = wbar_conditional(&base, &f).unwrap();
        assert_eq!(lp.first_violation(cond.entries()), None);
        let opt = lp.solve().unwrap().optimum;
        assert!(opt >= wbar_nonuniformity(&base, &f, 0, 0));
    }

    #[test]
    fn size_cap_and_signaling() {
        let base = pr_product(3, &r(1, 8)).unwrap();
        assert!(matches!(
            build_attack_lp(&base, &HashFunction::xor(3), &Probability::half(), (0, 0), Direction::TowardZero),
            Err(Error::Resource { .. })
        ));
        let signaling = BehaviorTable::from_fn(1, |u, _, _, y| if y == u { r(1, 2) } else { r(0, 1) }).unwrap();
        assert!(matches!(
            build_attack_lp(&signaling, &id(), &Probability::half(), (0, 0), Direction::TowardZero),
            Err(Error::Signaling(_))
        ));
    }

    #[test]
    fn deterministic_solves() {
        let base = pr_box(&r(3, 16)).unwrap();
        let lp = build_attack_lp(&base, &id(), &Probability::ratio(1, 3).unwrap(), (1, 1), Direction::TowardOne).unwrap();
        assert_eq!(lp.solve().unwrap(), lp.solve().unwrap());
    }
}
