//! Self-verification suite: every structural identity, checked exhaustively
//! over all hash functions up to a small width.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::info;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::attack::{
    bob_bias, check_knowledgereduce, correlation, tie_rows_branch_independent, trivial_nonuniformity, wbar_conditional,
    wbar_nonuniformity, wbar_partition,
};
use crate::bounds::{composed_lower_bound, main_theorem_bound, xor_bias_closed, xor_bias_series, yang_bound};
use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::lp_attack::{build_attack_lp, Direction};
use crate::report::input_key;
use crate::scalar::{format_rational, Probability, Rational, Scalar};
use crate::table::{
    chsh_success, deterministic_box, deterministic_strategies, is_local_1bit, pr_box, pr_product, product,
    BehaviorTable,
};

/// Largest width for the exhaustive checks (2^(2^n) functions).
pub const MAX_VERIFY_WIDTH: usize = 3;

/// Deliberate defects for testing the harness itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Adds an input-dependent offset to the w̄ value.
    BiasWbar,
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "biaswbar" => Ok(Mutation::BiasWbar),
            other => Err(Error::Parse(format!("unknown mutation '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub epsilon: Probability,
    pub seed: u64,
    pub mutation: Option<Mutation>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: MAX_VERIFY_WIDTH,
            epsilon: Probability::ratio(1, 8).expect("1/8"),
            seed: 0,
            mutation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub label: &'static str,
    pub passed: usize,
    pub total: usize,
    pub unit: &'static str,
    pub note: Option<String>,
    pub counterexample: Option<Value>,
}

impl CheckOutcome {
    fn new(label: &'static str, unit: &'static str) -> Self {
        CheckOutcome { label, passed: 0, total: 0, unit, note: None, counterexample: None }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }

    fn record(&mut self, pass: bool, counterexample: impl FnOnce() -> Value) {
        self.total += 1;
        if pass {
            self.passed += 1;
        } else if self.counterexample.is_none() {
            self.counterexample = Some(counterexample());
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} {} {}",
            self.label,
            self.passed,
            self.total,
            self.unit,
            if self.ok() { "OK" } else { "FAILED" }
        )?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(CheckOutcome::ok)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.ok())
    }
}

struct Suite<'a> {
    config: &'a VerifyConfig,
    eps: Rational,
    bases: Vec<BehaviorTable<Rational>>,
}

impl Suite<'_> {
    fn wbar(&self, base: &BehaviorTable<Rational>, f: &HashFunction, u: usize, v: usize) -> Rational {
        let value = wbar_nonuniformity(base, f, u, v);
        match self.config.mutation {
            Some(Mutation::BiasWbar) => value + Rational::ratio(u as i64, 1024),
            None => value,
        }
    }

    fn functions(&self, n: usize) -> impl Iterator<Item = HashFunction> {
        HashFunction::enumerate(n).expect("verified widths are enumerable")
    }

    fn boxes(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("boxes", "products");
        for base in &self.bases {
            let ok = base.check_normalized().is_ok() && base.is_nonsignaling();
            out.record(ok, || json!({ "n": base.width(), "epsilon": format_rational(&self.eps) }));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        for _ in 0..32 {
            let a = random_nonsignaling_box(&mut rng);
            let b = random_nonsignaling_box(&mut rng);
            let ab = product(&a, &b).expect("width 2 within cap");
            let ok = ab.check_normalized().is_ok() && ab.is_nonsignaling();
            out.record(ok, || json!({ "seed": self.config.seed, "a": a.to_json(), "b": b.to_json() }));
        }
        out
    }

    fn chsh(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("chsh", "cases");
        let pr = pr_box(&self.eps).expect("valid epsilon");
        let value = chsh_success(&pr).expect("n = 1");
        out.record(value == Rational::one() - &self.eps, || json!({ "chsh": format_rational(&value) }));
        let best = deterministic_strategies()
            .map(|s| chsh_success(&deterministic_box::<Rational>(s)).expect("n = 1"))
            .max()
            .expect("16 strategies");
        out.record(best == Rational::ratio(3, 4), || json!({ "deterministic_max": format_rational(&best) }));
        out
    }

    fn locality(&self) -> Result<CheckOutcome> {
        let mut out = CheckOutcome::new("locality", "cases");
        let pr = pr_box(&self.eps)?;
        let local = is_local_1bit(&pr)?;
        let expected = self.eps >= Rational::ratio(1, 4);
        out.record(local == expected, || json!({ "epsilon": format_rational(&self.eps), "local": local }));
        out.note = Some(format!("pr_box({}) {}", format_rational(&self.eps), if local { "local" } else { "nonlocal" }));
        Ok(out)
    }

    fn xor_series(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("xor_series", "widths");
        for n in 1..=20 {
            let series = xor_bias_series(n, &self.eps);
            let closed = xor_bias_closed(n, &self.eps);
            let grows = n == 1 || self.eps.is_zero() || self.eps >= Rational::half() || series > self.eps;
            out.record(series == closed && grows, || {
                json!({ "n": n, "series": format_rational(&series), "closed": format_rational(&closed) })
            });
        }
        out
    }

    fn barka(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("barka", "functions");
        let mut inputs = 0;
        for base in &self.bases {
            let n = base.width();
            let size = base.outcomes();
            for f in self.functions(n) {
                let reference = self.wbar(base, &f, 0, 0);
                let mut mismatch = None;
                for u in 0..size {
                    for v in 0..size {
                        inputs += 1;
                        let value = self.wbar(base, &f, u, v);
                        if mismatch.is_none() && value != reference {
                            mismatch = Some((u, v, value));
                        }
                    }
                }
                out.record(mismatch.is_none(), || {
                    let (u, v, value) = mismatch.clone().expect("mismatch recorded");
                    json!({
                        "n": n,
                        "f": f.spec(),
                        "input": input_key(u, v, n),
                        "value": format_rational(&value),
                        "value_at_zero": format_rational(&reference),
                    })
                });
            }
        }
        out.note = Some(format!("{inputs} input pairs"));
        out
    }

    fn knowledgereduce(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("knowledgereduce", "functions");
        for base in &self.bases {
            for f in self.functions(base.width()) {
                let result = check_knowledgereduce(base, &f);
                out.record(result.is_ok(), || {
                    serde_json::to_value(result.err()).expect("mismatch serializes")
                });
            }
        }
        out
    }

    fn partition(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("partition", "functions");
        for base in &self.bases {
            let functions: Vec<HashFunction> = self.functions(base.width()).collect();
            let failures: Vec<Option<Value>> = functions.par_iter().map(|f| partition_failure(base, f)).collect();
            for failure in failures {
                let pass = failure.is_none();
                out.record(pass, || failure.expect("failure recorded"));
            }
        }
        out
    }

    fn main_theorem(&self) -> Result<CheckOutcome> {
        let mut out = CheckOutcome::new("main_theorem", "functions");
        if self.eps > Rational::ratio(1, 4) {
            out.note = Some("skipped: epsilon above 1/4".into());
            return Ok(out);
        }
        let bound = main_theorem_bound(&self.eps)?;
        let above_half = self.eps.is_zero() || bound.certainly_gt(&(&self.eps * Rational::half()));
        out.record(above_half, || json!({ "bound": bound.to_string(), "epsilon": format_rational(&self.eps) }));
        for base in &self.bases {
            for f in self.functions(base.width()) {
                let achieved = Rational::max_of(&trivial_nonuniformity(base, &f, 0, 0), &self.wbar(base, &f, 0, 0));
                let composed = composed_lower_bound(base, &f, &self.eps)?;
                let ok = bound.certainly_le(&achieved) && *composed.value() <= achieved;
                out.record(ok, || {
                    json!({
                        "n": base.width(),
                        "f": f.spec(),
                        "achieved": format_rational(&achieved),
                        "bound": bound.to_string(),
                        "composed": composed.to_string(),
                    })
                });
            }
        }
        out.note = Some(format!("bound {bound}"));
        Ok(out)
    }

    fn yang(&self) -> Result<CheckOutcome> {
        let mut out = CheckOutcome::new("yang", "pairs");
        let base = pr_product(2, &self.eps)?;
        let functions: Vec<HashFunction> = self.functions(2).collect();
        for f in &functions {
            let df = trivial_nonuniformity(&base, f, 0, 0);
            for g in &functions {
                let dg = bob_bias(&base, g, 0, 0);
                let delta = Rational::max_of(&df, &dg);
                let c = correlation(&base, f, g, 0, 0);
                let limit = yang_bound(&self.eps, &delta);
                out.record(c <= limit, || {
                    json!({
                        "f": f.spec(),
                        "g": g.spec(),
                        "correlation": format_rational(&c),
                        "bound": format_rational(&limit),
                    })
                });
            }
        }
        Ok(out)
    }

    fn lp(&self) -> Result<CheckOutcome> {
        let mut out = CheckOutcome::new("lp", "instances");
        let half = Probability::half();
        if self.eps <= Rational::ratio(1, 4) {
            let identity = HashFunction::parse("tt:2", 1)?;
            let opt = build_attack_lp(&pr_box(&self.eps)?, &identity, &half, (0, 0), Direction::TowardZero)?
                .solve()?
                .optimum;
            let expected = &self.eps * Rational::from_u64(2);
            out.record(opt == expected, || json!({ "single_box_optimum": format_rational(&opt) }));
        }
        for base in self.bases.iter().filter(|b| b.width() <= 2) {
            for f in self.functions(base.width()) {
                let lp = build_attack_lp(base, &f, &half, (0, 0), Direction::TowardZero)?;
                let cond = wbar_conditional(base, &f)?;
                let violation = lp.first_violation(cond.entries());
                out.record(violation.is_none(), || {
                    json!({ "n": base.width(), "f": f.spec(), "violated_row": violation })
                });
            }
        }
        Ok(out)
    }
}

/// Builds and validates the w̄ partition for one function; `None` if it is
/// valid, tie-independent, and worth `max(trivial, w̄)`.
fn partition_failure(base: &BehaviorTable<Rational>, f: &HashFunction) -> Option<Value> {
    let result = wbar_partition(base, f).map_err(|e| e.to_string()).and_then(|p| {
        p.validate().map_err(|v| v.to_string())?;
        Ok(p)
    });
    let ties = tie_rows_branch_independent(base, f);
    let value_ok = match &result {
        Ok(p) => {
            let t = trivial_nonuniformity(base, f, 0, 0);
            let w = wbar_nonuniformity(base, f, 0, 0);
            p.nonuniformity(f, 0, 0) == Rational::max_of(&t, &w)
        }
        Err(_) => false,
    };
    if result.is_ok() && ties && value_ok {
        return None;
    }
    Some(json!({
        "n": base.width(),
        "f": f.spec(),
        "error": result.as_ref().err(),
        "tie_rows_branch_independent": ties,
        "value_matches": value_ok,
    }))
}

/// A mixture of the 16 local deterministic boxes and the two perfect PR
/// boxes, with small random integer weights.
pub fn random_nonsignaling_box<R: Rng>(rng: &mut R) -> BehaviorTable<Rational> {
    let mut vertices: Vec<BehaviorTable<Rational>> = deterministic_strategies().map(deterministic_box).collect();
    vertices.push(pr_box(&Rational::zero()).expect("perfect PR box"));
    vertices.push(
        BehaviorTable::from_fn(1, |u, v, x, y| {
            if x ^ y != u & v {
                Rational::half()
            } else {
                Rational::zero()
            }
        })
        .expect("n = 1"),
    );
    let weights: Vec<u64> = vertices.iter().map(|_| rng.gen_range(0..8)).collect();
    let total: u64 = weights.iter().sum::<u64>().max(1);
    let weights: Vec<Rational> = if weights.iter().all(|w| *w == 0) {
        let mut w = vec![Rational::zero(); vertices.len()];
        w[0] = Rational::one();
        w
    } else {
        weights.iter().map(|w| Rational::ratio(*w as i64, total as i64)).collect()
    };
    BehaviorTable::from_fn(1, |u, v, x, y| {
        vertices
            .iter()
            .zip(&weights)
            .fold(Rational::zero(), |acc, (b, w)| acc + w * b.get(u, v, x, y))
    })
    .expect("n = 1")
}

pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.n_max == 0 {
        return Err(Error::Domain("--n-max must be at least 1".into()));
    }
    if config.n_max > MAX_VERIFY_WIDTH {
        return Err(Error::Resource { requested: config.n_max, cap: MAX_VERIFY_WIDTH });
    }
    let eps = config.epsilon.value().clone();
    let bases = (1..=config.n_max)
        .map(|n| pr_product(n, &eps))
        .collect::<Result<Vec<_>>>()?;
    let suite = Suite { config, eps, bases };
    let timed = |check: &dyn Fn(&Suite) -> Result<CheckOutcome>| -> Result<CheckOutcome> {
        let start = Instant::now();
        let outcome = check(&suite)?;
        info!("{} finished in {:.2?}", outcome.label, start.elapsed());
        Ok(outcome)
    };
    let checks = vec![
        timed(&|s| Ok(s.boxes()))?,
        timed(&|s| Ok(s.chsh()))?,
        timed(&|s| s.locality())?,
        timed(&|s| Ok(s.xor_series()))?,
        timed(&|s| Ok(s.barka()))?,
        timed(&|s| Ok(s.knowledgereduce()))?,
        timed(&|s| Ok(s.partition()))?,
        timed(&|s| s.main_theorem())?,
        timed(&|s| s.yang())?,
        timed(&|s| s.lp())?,
    ];
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n_max: usize, eps: (i64, i64)) -> VerifyConfig {
        VerifyConfig { n_max, epsilon: Probability::ratio(eps.0, eps.1).unwrap(), ..VerifyConfig::default() }
    }

    #[test]
    fn suite_passes_small() {
        let report = run_verify(&config(2, (1, 8))).unwrap();
        for c in &report.checks {
            assert!(c.ok(), "{c}");
        }
        let barka = report.checks.iter().find(|c| c.label == "barka").unwrap();
        assert_eq!(barka.total, 4 + 16);
    }

    #[test]
    fn locality_flips_at_quarter() {
        let report = run_verify(&config(1, (1, 4))).unwrap();
        assert!(report.ok());
        let loc = report.checks.iter().find(|c| c.label == "locality").unwrap();
        assert!(loc.note.as_deref().unwrap().ends_with(" local"));
    }

    #[test]
    fn mutant_is_caught() {
        let mut cfg = config(2, (1, 8));
        cfg.mutation = Some(Mutation::BiasWbar);
        let report = run_verify(&cfg).unwrap();
        assert!(!report.ok());
        let failure = report.first_failure().unwrap();
        assert_eq!(failure.label, "barka");
        assert!(failure.counterexample.as_ref().unwrap()["input"].is_string());
    }

    #[test]
    fn random_boxes_are_nonsignaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b = random_nonsignaling_box(&mut rng);
            assert!(b.check_normalized().is_ok());
            assert!(b.is_nonsignaling());
        }
    }

    #[test]
    fn width_cap() {
        assert!(matches!(run_verify(&config(4, (1, 8))), Err(Error::Resource { .. })));
    }
}
