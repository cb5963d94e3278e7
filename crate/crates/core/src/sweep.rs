//! Parameter sweeps producing plot-ready CSV.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::attack::{trivial_nonuniformity_uniform, wbar_nonuniformity_pr};
use crate::bounds::{main_theorem_bound, main_theorem_bound_f64, xor_bias_closed, xor_bias_series};
use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::lp_attack::{optimal_attack, AttackOptions};
use crate::scalar::{format_rational, parse_rational, Probability, Rational, Scalar};
use crate::table::pr_product;

/// Widest n for which `wbar` rows are computed (the Hamming form is O(4^n)).
pub const MAX_WBAR_SWEEP_WIDTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepStrategy {
    Wbar,
    Trivial,
    Lp,
    Bounds,
}

impl FromStr for SweepStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wbar" => Ok(SweepStrategy::Wbar),
            "trivial" => Ok(SweepStrategy::Trivial),
            "lp" => Ok(SweepStrategy::Lp),
            "bounds" => Ok(SweepStrategy::Bounds),
            other => Err(Error::Parse(format!("unknown sweep strategy '{other}'"))),
        }
    }
}

impl fmt::Display for SweepStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepStrategy::Wbar => "wbar",
            SweepStrategy::Trivial => "trivial",
            SweepStrategy::Lp => "lp",
            SweepStrategy::Bounds => "bounds",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub n_range: RangeInclusive<usize>,
    /// Grid points, kept exact; float grids are parsed as exact decimals.
    pub epsilons: Vec<Rational>,
    pub functions: Vec<String>,
    pub strategies: Vec<SweepStrategy>,
    pub exact: bool,
}

/// Parses `a..b` (inclusive) or a single integer.
pub fn parse_n_range(s: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::Parse(format!("invalid n range '{s}'"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(Error::Parse(format!("n range '{s}' is empty or starts at 0")));
    }
    Ok(lo..=hi)
}

/// Parses `start..end:step` or a comma-separated list of rationals/decimals.
pub fn parse_epsilon_grid(s: &str) -> Result<Vec<Rational>> {
    let points = if let Some((range, step)) = s.split_once(':') {
        let (start, end) = range
            .split_once("..")
            .ok_or_else(|| Error::Parse(format!("invalid epsilon range '{s}'")))?;
        let (start, end, step) = (parse_rational(start)?, parse_rational(end)?, parse_rational(step)?);
        if !step.is_positive() || start > end {
            return Err(Error::Parse(format!("epsilon range '{s}' is empty")));
        }
        let mut points = Vec::new();
        let mut e = start;
        while e <= end {
            points.push(e.clone());
            e += &step;
        }
        points
    } else {
        s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?
    };
    if points.is_empty() {
        return Err(Error::Parse("empty epsilon grid".into()));
    }
    if let Some(bad) = points.iter().find(|e| e.is_negative() || **e > Rational::half()) {
        return Err(Error::Domain(format!("epsilon {} outside [0, 1/2]", format_rational(bad))));
    }
    Ok(points)
}

impl SweepSpec {
    pub fn parse(n: &str, eps: &str, functions: &str, strategies: &str) -> Result<Self> {
        let functions: Vec<String> = functions
            .split(',')
            .map(|f| f.trim().to_string())
            .filter(|f| !f.is_empty())
            .collect();
        let strategies = strategies
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<SweepStrategy>>>()?;
        let spec = SweepSpec {
            n_range: parse_n_range(n)?,
            epsilons: parse_epsilon_grid(eps)?,
            functions,
            strategies,
            exact: false,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if self.functions.is_empty() {
            return Err(Error::Parse("no hash functions given".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Parse("no strategies given".into()));
        }
        if self.n_range.is_empty() || self.epsilons.is_empty() {
            return Err(Error::Parse("empty sweep grid".into()));
        }
        for n in self.n_range.clone() {
            for f in &self.functions {
                HashFunction::parse(f, n)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub epsilon: Rational,
    /// Empty for rows that do not depend on the hash function.
    pub f: String,
    pub strategy: String,
    pub value: f64,
    pub exact: Option<String>,
}

impl SweepRow {
    fn sort_key(&self, other: &Self) -> Ordering {
        (self.n, &self.epsilon, &self.strategy, &self.f).cmp(&(other.n, &other.epsilon, &other.strategy, &other.f))
    }
}

struct Task<'a> {
    n: usize,
    epsilon: &'a Rational,
    f: Option<&'a str>,
    strategy: SweepStrategy,
}

fn row(task: &Task<'_>, strategy: &str, value: f64, exact: Option<String>) -> SweepRow {
    SweepRow {
        n: task.n,
        epsilon: task.epsilon.clone(),
        f: task.f.unwrap_or_default().to_string(),
        strategy: strategy.to_string(),
        value,
        exact,
    }
}

fn evaluate(task: &Task<'_>, exact: bool) -> Result<Vec<SweepRow>> {
    let n = task.n;
    let eps = task.epsilon;
    let eps_f = eps.to_f64();
    let function = || HashFunction::parse(task.f.expect("function task"), n);
    match task.strategy {
        SweepStrategy::Wbar => {
            if n > MAX_WBAR_SWEEP_WIDTH {
                return Err(Error::Resource { requested: n, cap: MAX_WBAR_SWEEP_WIDTH });
            }
            let f = function()?;
            let value = wbar_nonuniformity_pr::<f64>(n, &eps_f, &f)?;
            let exact = if exact {
                Some(format_rational(&wbar_nonuniformity_pr::<Rational>(n, eps, &f)?))
            } else {
                None
            };
            Ok(vec![row(task, "wbar", value, exact)])
        }
        SweepStrategy::Trivial => {
            let f = function()?;
            let value: Rational = trivial_nonuniformity_uniform(&f);
            Ok(vec![row(task, "trivial", value.to_f64(), exact.then(|| format_rational(&value)))])
        }
        SweepStrategy::Lp => {
            let f = function()?;
            let base = pr_product(n, eps)?;
            let attack = optimal_attack(&base, &f, &Probability::new(eps.clone())?, &AttackOptions::default())?;
            let value = attack.report.delta.value().clone();
            Ok(vec![row(task, "lp", value.to_f64(), exact.then(|| format_rational(&value)))])
        }
        SweepStrategy::Bounds => {
            let mut rows = Vec::with_capacity(3);
            let series = xor_bias_series::<f64>(n, &eps_f);
            rows.push(row(task, "xor_series", series, exact.then(|| format_rational(&xor_bias_series(n, eps)))));
            let closed = xor_bias_closed::<f64>(n, &eps_f);
            rows.push(row(task, "xor_closed", closed, exact.then(|| format_rational(&xor_bias_closed(n, eps)))));
            if *eps <= Rational::ratio(1, 4) {
                let exact = if exact { Some(main_theorem_bound(eps)?.to_string()) } else { None };
                rows.push(row(task, "main_theorem", main_theorem_bound_f64(eps_f), exact));
            }
            Ok(rows)
        }
    }
}

/// Evaluates every grid point in parallel; rows come back sorted by
/// `(n, eps, strategy, f)`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.check()?;
    let mut tasks = Vec::new();
    for n in spec.n_range.clone() {
        for eps in &spec.epsilons {
            for &strategy in &spec.strategies {
                if strategy == SweepStrategy::Bounds {
                    tasks.push(Task { n, epsilon: eps, f: None, strategy });
                    continue;
                }
                for f in &spec.functions {
                    tasks.push(Task { n, epsilon: eps, f: Some(f), strategy });
                }
            }
        }
    }
    let results: Vec<Result<Vec<SweepRow>>> = tasks.par_iter().map(|t| evaluate(t, spec.exact)).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| a.sort_key(b));
    Ok(rows)
}

fn format_float(v: f64) -> String {
    if v.is_zero() {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Header `n,eps,f,strategy,value`, plus `exact` when requested.
pub fn write_csv<W: Write>(rows: &[SweepRow], exact: bool, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["n", "eps", "f", "strategy", "value"];
    if exact {
        header.push("exact");
    }
    w.write_record(&header).map_err(csv_error)?;
    for r in rows {
        let mut record = vec![
            r.n.to_string(),
            format_float(r.epsilon.to_f64()),
            r.f.clone(),
            r.strategy.clone(),
            format_float(r.value),
        ];
        if exact {
            record.push(r.exact.clone().unwrap_or_default());
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Consistency(format!("csv: {other:?}")),
    }
}
