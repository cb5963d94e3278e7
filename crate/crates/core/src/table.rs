//! Bipartite behavior tables `P(x,y|u,v)` over n-bit ports.
//!
//! Entries are stored densely in row-major order over `(u, v, x, y)`. Bit
//! strings use the most significant bit for box 1, so in a product table the
//! high bits of every port route to the first factor.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::OnceLock;

use log::warn;
use num_traits::One;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::bits::bits_to_string;
use crate::error::{Error, Result};
use crate::hash::HashFunction;
use crate::scalar::{Mode, Probability, Rational, Scalar};

/// Default cap on the port width of materialized tables (2^24 entries).
pub const DEFAULT_MAX_WIDTH: usize = 6;

/// Environment variable overriding [`DEFAULT_MAX_WIDTH`].
pub const MAX_WIDTH_ENV: &str = "NSPA_MAX_N";

/// Absolute upper limit; `2^(4n)` must stay addressable.
const HARD_MAX_WIDTH: usize = 7;

/// Configured width cap, read once from `NSPA_MAX_N`.
pub fn max_width() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(MAX_WIDTH_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .map(|v| v.clamp(1, HARD_MAX_WIDTH))
            .unwrap_or(DEFAULT_MAX_WIDTH)
    })
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("port width must be positive".into()));
    }
    let cap = max_width();
    if n > cap {
        return Err(Error::Resource { requested: n, cap });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Port {
    A,
    B,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::A => f.write_str("A"),
            Port::B => f.write_str("B"),
        }
    }
}

/// A cell `(u, v, x, y)` of a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub n: usize,
    pub u: usize,
    pub v: usize,
    pub x: usize,
    pub y: usize,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}|{}|{}",
            bits_to_string(self.u, self.n),
            bits_to_string(self.v, self.n),
            bits_to_string(self.x, self.n),
            bits_to_string(self.y, self.n)
        )
    }
}

/// First marginal found to depend on the remote input.
///
/// For port `B` the sums `Σ_x P(x,output|u,local_input)` differ between the two
/// remote inputs `u`; for port `A` the roles are mirrored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignalingWitness {
    pub port: Port,
    pub output: String,
    pub local_input: String,
    pub remote_inputs: (String, String),
}

impl fmt::Display for SignalingWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "marginal of port {} at output {} (own input {}) differs between remote inputs {} and {}",
            self.port, self.output, self.local_input, self.remote_inputs.0, self.remote_inputs.1
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorTable<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> BehaviorTable<T> {
    /// Builds a table from a cell function. Only the width cap is checked.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Result<Self> {
        check_width(n)?;
        let size = 1usize << n;
        let mut entries = Vec::with_capacity(size.pow(4));
        for u in 0..size {
            for v in 0..size {
                for x in 0..size {
                    for y in 0..size {
                        entries.push(f(u, v, x, y));
                    }
                }
            }
        }
        Ok(BehaviorTable { n, entries })
    }

    /// Builds a table and checks the range and normalization invariants.
    pub fn from_entries(n: usize, entries: Vec<T>) -> Result<Self> {
        check_width(n)?;
        let size = 1usize << (4 * n);
        if entries.len() != size {
            return Err(Error::InvalidTable(format!(
                "expected {size} entries for n={n}, got {}",
                entries.len()
            )));
        }
        let table = BehaviorTable { n, entries };
        table.check_valid()?;
        Ok(table)
    }

    pub(crate) fn from_raw(n: usize, entries: Vec<T>) -> Self {
        debug_assert_eq!(entries.len(), 1 << (4 * n));
        BehaviorTable { n, entries }
    }

    pub fn width(&self) -> usize {
        self.n
    }

    /// Number of values per port, `2^n`.
    pub fn outcomes(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize, x: usize, y: usize) -> usize {
        let n = self.n;
        (((u << n | v) << n | x) << n) | y
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize, x: usize, y: usize) -> &T {
        &self.entries[self.index(u, v, x, y)]
    }

    pub fn cell(&self, index: usize) -> Cell {
        let n = self.n;
        let mask = (1 << n) - 1;
        Cell {
            n,
            u: index >> (3 * n),
            v: (index >> (2 * n)) & mask,
            x: (index >> n) & mask,
            y: index & mask,
        }
    }

    /// The `2^n x 2^n` block `P(.,.|u,v)`, row-major in `(x, y)`.
    pub fn block(&self, u: usize, v: usize) -> &[T] {
        let start = self.index(u, v, 0, 0);
        &self.entries[start..start + self.outcomes() * self.outcomes()]
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&T) -> S) -> BehaviorTable<S> {
        BehaviorTable { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    /// Sum over the block at `(u, v)`.
    pub fn block_sum(&self, u: usize, v: usize) -> T {
        self.block(u, v).iter().fold(T::zero(), |acc, e| acc + e.clone())
    }

    /// Range check on all entries and normalization of every input pair.
    pub fn check_valid(&self) -> Result<()> {
        if let Some(i) = self.entries.iter().position(|e| !e.is_probability()) {
            return Err(Error::InvalidTable(format!(
                "entry {} at {} outside [0, 1]",
                self.entries[i],
                self.cell(i)
            )));
        }
        self.check_normalized()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let size = self.outcomes();
        for u in 0..size {
            for v in 0..size {
                let sum = self.block_sum(u, v);
                if !sum.approx_eq(&T::one()) {
                    return Err(Error::InvalidTable(format!(
                        "block (u,v)=({},{}) sums to {sum}",
                        bits_to_string(u, self.n),
                        bits_to_string(v, self.n)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sum characterization of non-signaling: `Σ_x P(x,y|u,v)` must not depend
    /// on `u`, and `Σ_y P(x,y|u,v)` must not depend on `v`.
    ///
    /// Returns the first violation, or `None` if the table is non-signaling.
    pub fn signaling_witness(&self) -> Option<SignalingWitness> {
        let size = self.outcomes();
        let n = self.n;
        // Bob's marginal: fixed v, y; compare u against u = 0.
        let bob = |u: usize, v: usize, y: usize| {
            (0..size).fold(T::zero(), |acc, x| acc + self.get(u, v, x, y).clone())
        };
        for v in 0..size {
            for y in 0..size {
                let reference = bob(0, v, y);
                for u in 1..size {
                    if !bob(u, v, y).approx_eq(&reference) {
                        return Some(SignalingWitness {
                            port: Port::B,
                            output: bits_to_string(y, n),
                            local_input: bits_to_string(v, n),
                            remote_inputs: (bits_to_string(0, n), bits_to_string(u, n)),
                        });
                    }
                }
            }
        }
        let alice = |u: usize, v: usize, x: usize| {
            (0..size).fold(T::zero(), |acc, y| acc + self.get(u, v, x, y).clone())
        };
        for u in 0..size {
            for x in 0..size {
                let reference = alice(u, 0, x);
                for v in 1..size {
                    if !alice(u, v, x).approx_eq(&reference) {
                        return Some(SignalingWitness {
                            port: Port::A,
                            output: bits_to_string(x, n),
                            local_input: bits_to_string(u, n),
                            remote_inputs: (bits_to_string(0, n), bits_to_string(v, n)),
                        });
                    }
                }
            }
        }
        None
    }

    pub fn is_nonsignaling(&self) -> bool {
        self.signaling_witness().is_none()
    }

    /// Single-party conditional distribution of one port.
    pub fn marginal(&self, port: Port) -> Result<Marginal<T>> {
        if let Some(w) = self.signaling_witness() {
            return Err(Error::Signaling(w));
        }
        let size = self.outcomes();
        let mut rows = Vec::with_capacity(size * size);
        for input in 0..size {
            for output in 0..size {
                let p = (0..size).fold(T::zero(), |acc, other| {
                    let e = match port {
                        Port::A => self.get(input, 0, output, other),
                        Port::B => self.get(0, input, other, output),
                    };
                    acc + e.clone()
                });
                rows.push(p);
            }
        }
        Ok(Marginal { port, n: self.n, rows })
    }

    /// Probability mass of `f(x) = 0` and `f(x) = 1` in row `y` at input `(u, v)`.
    pub fn class_sums(&self, f: &HashFunction, u: usize, v: usize, y: usize) -> (T, T) {
        let mut zero = T::zero();
        let mut one = T::zero();
        for x in 0..self.outcomes() {
            let e = self.get(u, v, x, y).clone();
            if f.eval(x) {
                one = one + e;
            } else {
                zero = zero + e;
            }
        }
        (zero, one)
    }

    /// `P(f(X)=0|u,v)` and `P(f(X)=1|u,v)`.
    pub fn hash_distribution(&self, f: &HashFunction, u: usize, v: usize) -> (T, T) {
        (0..self.outcomes()).fold((T::zero(), T::zero()), |(a, b), y| {
            let (z, o) = self.class_sums(f, u, v, y);
            (a + z, b + o)
        })
    }

    pub fn to_json(&self) -> Value {
        let mut entries = Map::new();
        for (i, e) in self.entries.iter().enumerate() {
            entries.insert(self.cell(i).to_string(), e.to_json());
        }
        let mut root = Map::new();
        root.insert("n".into(), Value::from(self.n));
        root.insert("mode".into(), Value::from(T::MODE.to_string()));
        root.insert("entries".into(), Value::Object(entries));
        Value::Object(root)
    }

    /// Parses Box JSON. Cells absent from `entries` are zero.
    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("box JSON needs integer field 'n'".into()))?
            as usize;
        check_width(n)?;
        let mode: Mode = serde_json::from_value(
            v.get("mode").cloned().unwrap_or_else(|| Value::from("rational")),
        )?;
        if mode != T::MODE {
            return Err(Error::Parse(format!("box is in {mode} mode, expected {}", T::MODE)));
        }
        let map = v
            .get("entries")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("box JSON needs object field 'entries'".into()))?;
        let size = 1usize << n;
        let mut entries = vec![T::zero(); size.pow(4)];
        for (key, value) in map {
            let parts: Vec<&str> = key.split('|').collect();
            if parts.len() != 4 || parts.iter().any(|p| p.len() != n) {
                return Err(Error::Parse(format!("bad cell key '{key}' for n={n}")));
            }
            let mut idx = 0usize;
            for p in parts {
                let bits = usize::from_str_radix(p, 2)
                    .map_err(|_| Error::Parse(format!("bad cell key '{key}'")))?;
                idx = (idx << n) | bits;
            }
            entries[idx] = T::from_json(value)?;
        }
        Self::from_entries(n, entries)
    }
}

/// Conditional distribution of one party, `P(out|in)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal<T> {
    pub port: Port,
    pub n: usize,
    rows: Vec<T>,
}

impl<T: Scalar> Marginal<T> {
    pub fn get(&self, input: usize, output: usize) -> &T {
        &self.rows[(input << self.n) | output]
    }

    pub fn row(&self, input: usize) -> &[T] {
        let size = 1 << self.n;
        &self.rows[input * size..(input + 1) * size]
    }
}

/// `Σ_{x,y} P(x,y|u,v) [x ⊕ y = u·v]` averaged over the four inputs.
///
/// Also the CHSH-game winning probability of the box.
pub fn chsh_success<T: Scalar>(t: &BehaviorTable<T>) -> Result<T> {
    if t.width() != 1 {
        return Err(Error::Domain(format!("CHSH needs n = 1, got n = {}", t.width())));
    }
    let mut wins = T::zero();
    for u in 0..2 {
        for v in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    if x ^ y == u & v {
                        wins = wins + t.get(u, v, x, y).clone();
                    }
                }
            }
        }
    }
    Ok(wins * T::ratio(1, 4))
}

fn check_epsilon<T: Scalar>(epsilon: &T) -> Result<()> {
    if *epsilon < T::zero() || *epsilon > T::half() {
        return Err(Error::Domain(format!("PR box error {epsilon} outside [0, 1/2]")));
    }
    Ok(())
}

/// Unbiased PR box with error `epsilon`: `1/2 - ε/2` where `x ⊕ y = u·v`, else `ε/2`.
pub fn pr_box<T: Scalar>(epsilon: &T) -> Result<BehaviorTable<T>> {
    check_epsilon(epsilon)?;
    static LOCAL_WARNED: AtomicBool = AtomicBool::new(false);
    if *epsilon >= T::ratio(1, 4) && !LOCAL_WARNED.swap(true, Ordering::Relaxed) {
        warn!("PR box error {epsilon} >= 1/4: the box is local");
    }
    let hit = (T::one() - epsilon.clone()) * T::half();
    let miss = epsilon.clone() * T::half();
    BehaviorTable::from_fn(1, |u, v, x, y| {
        if x ^ y == u & v {
            hit.clone()
        } else {
            miss.clone()
        }
    })
}

/// Tensor product; the first factor owns the high bits of every port.
pub fn product<T: Scalar>(a: &BehaviorTable<T>, b: &BehaviorTable<T>) -> Result<BehaviorTable<T>> {
    let n = a.width() + b.width();
    check_width(n)?;
    let nb = b.width();
    let mask = (1usize << nb) - 1;
    BehaviorTable::from_fn(n, |u, v, x, y| {
        a.get(u >> nb, v >> nb, x >> nb, y >> nb).clone()
            * b.get(u & mask, v & mask, x & mask, y & mask).clone()
    })
}

/// `n` independent copies of [`pr_box`].
pub fn pr_product<T: Scalar>(n: usize, epsilon: &T) -> Result<BehaviorTable<T>> {
    check_width(n)?;
    let single = pr_box(epsilon)?;
    let mut acc = single.clone();
    for _ in 1..n {
        acc = product(&acc, &single)?;
    }
    Ok(acc)
}

/// Closed form of an n-fold PR product cell without building the table:
/// `(1/2 - ε/2)^(n-d) (ε/2)^d` with `d` the number of boxes where
/// `x_i ⊕ y_i ≠ u_i·v_i`.
pub fn pr_product_cell<T: Scalar>(n: usize, epsilon: &T, u: usize, v: usize, x: usize, y: usize) -> T {
    let d = ((x ^ y ^ (u & v)) & ((1usize << n) - 1)).count_ones();
    let hit = (T::one() - epsilon.clone()) * T::half();
    let miss = epsilon.clone() * T::half();
    hit.powu(n as u32 - d) * miss.powu(d)
}

/// Recovers `ε` if `t` is exactly an n-fold unbiased PR product.
pub fn infer_pr_epsilon<T: Scalar>(t: &BehaviorTable<T>) -> Option<T> {
    let n = t.width();
    let size = t.outcomes();
    let high = size >> 1;
    // P(x_1 = 0, y_1 = 1 | 0, 0) = ε/2 for box 1, marginalizing the rest
    let mut miss = T::zero();
    for x in 0..high {
        for y in high..size {
            miss = miss + t.get(0, 0, x, y).clone();
        }
    }
    let epsilon = miss * T::from_u64(2);
    if epsilon < T::zero() || epsilon > T::half() {
        return None;
    }
    let by_distance: Vec<T> = (0..=n)
        .map(|d| pr_product_cell(n, &epsilon, 0, 0, 0, (1usize << d) - 1))
        .collect();
    let matches = t.entries().iter().enumerate().all(|(i, e)| {
        let c = t.cell(i);
        let d = (c.x ^ c.y ^ (c.u & c.v)).count_ones() as usize;
        e.approx_eq(&by_distance[d])
    });
    matches.then_some(epsilon)
}

/// The 16 deterministic local strategies for one bit per party:
/// `(a0, a1, b0, b1)` with Alice outputting `a_u` and Bob `b_v`.
pub fn deterministic_strategies() -> impl Iterator<Item = [usize; 4]> {
    (0..16usize).map(|s| [s >> 3 & 1, s >> 2 & 1, s >> 1 & 1, s & 1])
}

/// Table of a deterministic local strategy.
pub fn deterministic_box<T: Scalar>(strategy: [usize; 4]) -> BehaviorTable<T> {
    let [a0, a1, b0, b1] = strategy;
    BehaviorTable::from_fn(1, |u, v, x, y| {
        let a = if u == 0 { a0 } else { a1 };
        let b = if v == 0 { b0 } else { b1 };
        if x == a && y == b {
            T::one()
        } else {
            T::zero()
        }
    })
    .expect("n = 1 is within the cap")
}

/// Local-polytope membership for `n = 1`: is `t` a convex combination of the
/// 16 deterministic strategies? Solved as an exact LP feasibility problem.
pub fn is_local_1bit(t: &BehaviorTable<Rational>) -> Result<bool> {
    local_decomposition(t).map(|w| w.is_some())
}

/// Weights over [`deterministic_strategies`] reproducing `t`, if any.
pub fn local_decomposition(t: &BehaviorTable<Rational>) -> Result<Option<Vec<Rational>>> {
    use crate::lp::{Constraint, LinearProgram, LpError, Relation};

    if t.width() != 1 {
        return Err(Error::Unsupported(format!(
            "locality test only for n = 1, got n = {}",
            t.width()
        )));
    }
    let strategies: Vec<[usize; 4]> = deterministic_strategies().collect();
    let mut lp = LinearProgram::new(strategies.len());
    lp.add_constraint(Constraint::new(
        "weights",
        (0..strategies.len()).map(|i| (i, Rational::one())).collect(),
        Relation::Eq,
        Rational::one(),
    ));
    for (i, target) in t.entries().iter().enumerate() {
        let c = t.cell(i);
        let terms = strategies
            .iter()
            .enumerate()
            .filter(|(_, s)| s[c.u] == c.x && s[2 + c.v] == c.y)
            .map(|(k, _)| (k, Rational::one()))
            .collect();
        lp.add_constraint(Constraint::new(format!("cell {c}"), terms, Relation::Eq, target.clone()));
    }
    match lp.solve() {
        Ok(sol) => Ok(Some(sol.values)),
        Err(LpError::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Best probability of guessing Alice's bit given a maximally biased element
/// of weight 1/2, `1/2 + 2ε`, cross-checked against the exact attack LP.
pub fn max_nonsignaling_bias(epsilon: &Probability) -> Result<Probability> {
    let eps = epsilon.value();
    if *eps >= Rational::ratio(1, 4) {
        return Err(Error::Domain(format!("ε = {epsilon} must be below 1/4")));
    }
    let closed = Rational::half() + Rational::from_u64(2) * eps;
    let base = pr_box(eps)?;
    let identity = HashFunction::xor(1);
    let lp = crate::lp_attack::build_attack_lp(
        &base,
        &identity,
        &Probability::half(),
        (0, 0),
        crate::lp_attack::Direction::TowardZero,
    )?;
    let solved = Rational::half() + lp.solve()?.optimum;
    if solved != closed {
        return Err(Error::Consistency(format!(
            "closed form {} disagrees with LP optimum {}",
            crate::scalar::format_rational(&closed),
            crate::scalar::format_rational(&solved)
        )));
    }
    Probability::new(closed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::ratio(a, b)
    }

    fn signaling_box() -> BehaviorTable<Rational> {
        // Bob outputs Alice's input: y = u, x uniform
        BehaviorTable::from_entries(1, {
            let mut e = Vec::new();
            for u in 0..2 {
                for _v in 0..2 {
                    for _x in 0..2 {
                        for y in 0..2 {
                            e.push(if y == u { r(1, 2) } else { r(0, 1) });
                        }
                    }
                }
            }
            e
        })
        .unwrap()
    }

    #[test]
    fn pr_box_cells() {
        let t = pr_box(&r(1, 8)).unwrap();
        assert_eq!(*t.get(0, 0, 0, 0), r(7, 16));
        assert_eq!(*t.get(1, 1, 0, 0), r(1, 16));
        assert_eq!(*t.get(1, 1, 0, 1), r(7, 16));
        let perfect = pr_box(&r(0, 1)).unwrap();
        for (i, e) in perfect.entries().iter().enumerate() {
            let c = perfect.cell(i);
            let expected = if c.x ^ c.y == c.u & c.v { r(1, 2) } else { r(0, 1) };
            assert_eq!(*e, expected);
        }
        let quarter = pr_box(&r(1, 4)).unwrap();
        assert!(quarter.entries().iter().all(|e| *e == r(3, 8) || *e == r(1, 8)));
        assert!(is_local_1bit(&quarter).unwrap());
    }

    #[test]
    fn pr_box_domain() {
        assert!(matches!(pr_box(&r(3, 2)), Err(Error::Domain(_))));
        assert!(matches!(pr_box(&r(-1, 8)), Err(Error::Domain(_))));
        assert!(pr_box(&r(1, 2)).is_ok());
    }

    #[test]
    fn product_cells_and_routing() {
        let a = pr_box(&r(1, 8)).unwrap();
        let p = product(&a, &a).unwrap();
        assert_eq!(*p.get(0, 0, 0, 0), r(49, 256));
        p.check_valid().unwrap();
        // point distribution on (x,y) = (0,0) for every input
        let point = BehaviorTable::from_fn(1, |_, _, x, y| {
            if x == 0 && y == 0 {
                r(1, 1)
            } else {
                r(0, 1)
            }
        })
        .unwrap();
        let ap = product(&a, &point).unwrap();
        for (i, e) in ap.entries().iter().enumerate() {
            let c = ap.cell(i);
            let expected = if c.x & 1 == 0 && c.y & 1 == 0 {
                a.get(c.u >> 1, c.v >> 1, c.x >> 1, c.y >> 1).clone()
            } else {
                r(0, 1)
            };
            assert_eq!(*e, expected);
        }
    }

    #[test]
    fn product_width_cap() {
        let big = pr_product(4, &r(1, 8)).unwrap();
        let small = pr_product(3, &r(1, 8)).unwrap();
        assert!(matches!(product(&big, &small), Err(Error::Resource { requested: 7, .. })));
    }

    #[test]
    fn nonsignaling_checks() {
        assert!(pr_box(&r(1, 8)).unwrap().is_nonsignaling());
        assert!(pr_product(3, &r(1, 8)).unwrap().is_nonsignaling());
        let w = signaling_box().signaling_witness().unwrap();
        assert_eq!(w.port, Port::B);
        assert_eq!(w.remote_inputs, ("0".to_string(), "1".to_string()));
    }

    #[test]
    fn marginals() {
        let m = pr_box(&r(1, 8)).unwrap().marginal(Port::A).unwrap();
        for u in 0..2 {
            assert_eq!(*m.get(u, 0), r(1, 2));
        }
        let m = pr_product(2, &r(1, 8)).unwrap().marginal(Port::B).unwrap();
        for v in 0..4 {
            assert!(m.row(v).iter().all(|p| *p == r(1, 4)));
        }
        assert!(matches!(signaling_box().marginal(Port::A), Err(Error::Signaling(_))));
    }

    #[test]
    fn chsh_values() {
        assert_eq!(chsh_success(&pr_box(&r(1, 8)).unwrap()).unwrap(), r(7, 8));
        assert_eq!(chsh_success(&pr_box(&r(1, 2)).unwrap()).unwrap(), r(1, 2));
        let best = deterministic_strategies()
            .map(|s| chsh_success(&deterministic_box::<Rational>(s)).unwrap())
            .max()
            .unwrap();
        assert_eq!(best, r(3, 4));
        assert!(chsh_success(&pr_product(2, &r(0, 1)).unwrap()).is_err());
    }

    #[test]
    fn locality() {
        assert!(!is_local_1bit(&pr_box(&r(1, 8)).unwrap()).unwrap());
        assert!(is_local_1bit(&pr_box(&r(1, 4)).unwrap()).unwrap());
        let independent = BehaviorTable::from_fn(1, |u, v, x, y| {
            let px = if x == u { r(2, 3) } else { r(1, 3) };
            let py = if y == 0 { r(1, 5) } else { r(4, 5) };
            let _ = v;
            px * py
        })
        .unwrap();
        assert!(is_local_1bit(&independent).unwrap());
        assert!(matches!(
            is_local_1bit(&pr_product(2, &r(1, 4)).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn max_bias() {
        assert_eq!(max_nonsignaling_bias(&"1/8".parse().unwrap()).unwrap().value(), &r(3, 4));
        assert_eq!(max_nonsignaling_bias(&"0".parse().unwrap()).unwrap().value(), &r(1, 2));
        assert!(max_nonsignaling_bias(&"1/4".parse().unwrap()).is_err());
    }

    #[test]
    fn infer_epsilon() {
        let t = pr_product(2, &r(3, 16)).unwrap();
        assert_eq!(infer_pr_epsilon(&t), Some(r(3, 16)));
        assert_eq!(infer_pr_epsilon(&signaling_box()), None);
    }

    #[test]
    fn json_round_trip() {
        let t = pr_box(&r(1, 8)).unwrap();
        let j = t.to_json();
        assert_eq!(j["entries"]["0|0|0|0"], "7/16");
        assert_eq!(BehaviorTable::<Rational>::from_json(&j).unwrap(), t);
        assert!(BehaviorTable::<f64>::from_json(&j).is_err());
        let f = pr_box(&0.125f64).unwrap();
        assert_eq!(BehaviorTable::<f64>::from_json(&f.to_json()).unwrap(), f);
    }
}
