//! Attack reports and their JSON shape.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::attack::{bob_bias, correlation, max_likelihood_g, trivial_nonuniformity, wbar_nonuniformity, wbar_partition};
use crate::bits::bits_to_string;
use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::scalar::{serde_rational, Probability, Rational, Scalar};
use crate::table::BehaviorTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Wbar,
    Trivial,
    Lp,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Wbar => "wbar",
            Strategy::Trivial => "trivial",
            Strategy::Lp => "lp",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wbar" => Ok(Strategy::Wbar),
            "trivial" => Ok(Strategy::Trivial),
            "lp" => Ok(Strategy::Lp),
            other => Err(Error::Parse(format!("unknown strategy '{other}'"))),
        }
    }
}

/// LP details attached to `lp` reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpDetails {
    pub p: Probability,
    pub direction: String,
    #[serde(with = "serde_rational")]
    pub optimum: Rational,
    pub pivots: usize,
    /// Signed-bias optimum per objective input, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum_per_input: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_independent: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub strategy: Strategy,
    pub f: String,
    pub n: usize,
    pub epsilon: Probability,
    /// Input pair `u|v` at which `delta`, the correlation and the biases are reported.
    pub input: String,
    pub delta_per_input: BTreeMap<String, Probability>,
    pub delta: Probability,
    #[serde(with = "serde_rational::option")]
    pub correlation: Option<Rational>,
    pub marginal_bias_f: Probability,
    pub marginal_bias_g: Probability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpDetails>,
}

pub fn input_key(u: usize, v: usize, n: usize) -> String {
    format!("{}|{}", bits_to_string(u, n), bits_to_string(v, n))
}

fn prob(r: Rational) -> Result<Probability> {
    Probability::new(r)
}

impl AttackReport {
    /// Fields that depend only on the base box and `f`, at input `(u, v)`.
    pub(crate) fn skeleton(
        strategy: Strategy,
        base: &BehaviorTable<Rational>,
        f: &HashFunction,
        epsilon: &Probability,
        (u, v): (usize, usize),
    ) -> Result<Self> {
        let g = max_likelihood_g(base, f, u, v);
        Ok(AttackReport {
            strategy,
            f: f.spec(),
            n: base.width(),
            epsilon: epsilon.clone(),
            input: input_key(u, v, base.width()),
            delta_per_input: BTreeMap::new(),
            delta: Probability::zero(),
            correlation: Some(correlation(base, f, &g, u, v)),
            marginal_bias_f: prob(trivial_nonuniformity(base, f, u, v))?,
            marginal_bias_g: prob(bob_bias(base, &g, u, v))?,
            lp: None,
        })
    }

    /// Report for the shifting partition or the trivial one; `delta` is the
    /// value at the all-zero input.
    pub fn evaluate(
        strategy: Strategy,
        base: &BehaviorTable<Rational>,
        f: &HashFunction,
        epsilon: &Probability,
    ) -> Result<Self> {
        if f.width() != base.width() {
            return Err(Error::Domain(format!(
                "hash width {} differs from box width {}",
                f.width(),
                base.width()
            )));
        }
        let mut report = Self::skeleton(strategy, base, f, epsilon, (0, 0))?;
        let size = base.outcomes();
        for u in 0..size {
            for v in 0..size {
                let value = match strategy {
                    Strategy::Wbar => wbar_nonuniformity(base, f, u, v),
                    Strategy::Trivial => trivial_nonuniformity(base, f, u, v),
                    Strategy::Lp => {
                        return Err(Error::Domain("use lp_attack::optimal_attack for LP reports".into()))
                    }
                };
                report.delta_per_input.insert(input_key(u, v, base.width()), prob(value)?);
            }
        }
        report.delta = report.delta_per_input[&report.input].clone();
        if strategy == Strategy::Wbar {
            // the explicit partition must exist for the reported value to be achievable
            wbar_partition(base, f)?
                .validate()
                .map_err(Error::InvalidPartition)?;
        }
        Ok(report)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Parses a report and checks its range invariants.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let report: AttackReport = serde_json::from_value(v.clone())?;
        report.check()?;
        Ok(report)
    }

    pub fn check(&self) -> Result<()> {
        let half = Rational::half();
        let bad = |what: &str| Err(Error::Consistency(format!("report field {what} out of range")));
        if *self.delta.value() > half {
            return bad("delta");
        }
        if self.delta_per_input.values().any(|d| *d.value() > half) {
            return bad("delta_per_input");
        }
        if let Some(c) = &self.correlation {
            if c.abs() > Rational::one() {
                return bad("correlation");
            }
        }
        if *self.marginal_bias_f.value() > half || *self.marginal_bias_g.value() > half {
            return bad("marginal bias");
        }
        if HashFunction::parse(&self.f, self.n).is_err() {
            return bad("f");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::pr_product;

    #[test]
    fn wbar_report_for_xor() {
        let eps: Probability = "1/8".parse().unwrap();
        let base = pr_product(2, eps.value()).unwrap();
        let r = AttackReport::evaluate(Strategy::Wbar, &base, &HashFunction::xor(2), &eps).unwrap();
        assert_eq!(r.delta.to_string(), "7/32");
        assert_eq!(r.delta_per_input.len(), 16);
        assert!(r.delta_per_input.values().all(|d| d == &r.delta));
        assert_eq!(r.correlation, Some(Rational::ratio(9, 16)));
        let json = r.to_json();
        assert_eq!(json["delta"], "7/32");
        assert_eq!(json["strategy"], "wbar");
        assert_eq!(AttackReport::from_json(&json).unwrap(), r);
    }

    #[test]
    fn trivial_report_for_const0() {
        let eps: Probability = "1/8".parse().unwrap();
        let base = pr_product(2, eps.value()).unwrap();
        let r = AttackReport::evaluate(Strategy::Trivial, &base, &HashFunction::const0(2), &eps).unwrap();
        assert_eq!(r.delta.to_string(), "1/2");
        assert_eq!(r.correlation, Some(Rational::one()));
    }

    #[test]
    fn shape_check_rejects_out_of_range() {
        let eps: Probability = "1/8".parse().unwrap();
        let base = pr_product(1, eps.value()).unwrap();
        let r = AttackReport::evaluate(Strategy::Wbar, &base, &HashFunction::xor(1), &eps).unwrap();
        let mut json = r.to_json();
        json["delta"] = "3/4".into();
        assert!(AttackReport::from_json(&json).is_err());
        let mut json = r.to_json();
        json.as_object_mut().unwrap().remove("marginal_bias_g");
        assert!(AttackReport::from_json(&json).is_err());
    }
}
