//! Exact-rational linear programs and a bounded-variable primal simplex.
//!
//! Problems are `maximize c·q` subject to sparse linear rows and
//! `0 <= q_j <= upper_j`. Pivoting follows Bland's rule, so degenerate
//! problems terminate; all arithmetic is exact.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scalar::{format_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    /// Phase one ended with a positive artificial variable on `row`.
    #[error("infeasible: constraint {row} ('{label}') cannot be satisfied")]
    Infeasible { row: usize, label: String },

    #[error("unbounded objective along variable {var}")]
    Unbounded { var: usize },

    #[error("constraint {row} references variable {var} but only {num_vars} exist")]
    UnknownVariable { row: usize, var: usize, num_vars: usize },

    #[error("negative upper bound on variable {var}")]
    NegativeUpperBound { var: usize },

    #[error("solver self-check failed: {0}")]
    SelfCheck(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(
        label: impl Into<String>,
        terms: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> Self {
        Constraint { label: label.into(), terms, relation, rhs }
    }

    fn lhs(&self, values: &[Rational]) -> Rational {
        self.terms
            .iter()
            .fold(Rational::zero(), |acc, (j, c)| acc + c * &values[*j])
    }

    fn holds(&self, values: &[Rational]) -> bool {
        let lhs = self.lhs(values);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// `maximize objective·q` subject to `constraints` and `0 <= q <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub objective: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub optimum: Rational,
    pub values: Vec<Rational>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            names: (0..num_vars).map(|j| format!("q{j}")).collect(),
            objective: vec![Rational::zero(); num_vars],
            upper: vec![None; num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn count(&self, relation: Relation) -> usize {
        self.constraints.iter().filter(|c| c.relation == relation).count()
    }

    pub fn num_caps(&self) -> usize {
        self.upper.iter().filter(|u| u.is_some()).count()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let num_vars = self.num_vars();
        for (row, c) in self.constraints.iter().enumerate() {
            if let Some(&(var, _)) = c.terms.iter().find(|(j, _)| *j >= num_vars) {
                return Err(LpError::UnknownVariable { row, var, num_vars });
            }
        }
        if let Some(var) = self
            .upper
            .iter()
            .position(|u| u.as_ref().is_some_and(|u| u.is_negative()))
        {
            return Err(LpError::NegativeUpperBound { var });
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective
            .iter()
            .zip(values)
            .fold(Rational::zero(), |acc, (c, q)| acc + c * q)
    }

    /// Index of the first violated constraint, or `None`. Bounds count as
    /// rows after the explicit constraints.
    pub fn first_violation(&self, values: &[Rational]) -> Option<usize> {
        if let Some(row) = self.constraints.iter().position(|c| !c.holds(values)) {
            return Some(row);
        }
        values
            .iter()
            .zip(&self.upper)
            .position(|(q, u)| q.is_negative() || u.as_ref().is_some_and(|u| q > u))
            .map(|j| self.constraints.len() + j)
    }

    pub fn solve(&self) -> Result<Solution, LpError> {
        self.validate()?;
        let solution = Tableau::build(self).run()?;
        // primal re-evaluation of the returned vertex
        if let Some(row) = self.first_violation(&solution.values) {
            return Err(LpError::SelfCheck(format!("assignment violates row {row}")));
        }
        if self.objective_value(&solution.values) != solution.optimum {
            return Err(LpError::SelfCheck("objective mismatch".into()));
        }
        Ok(solution)
    }

    /// Plain-text listing: objective, one constraint per line, then bounds.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let term = |out: &mut String, first: bool, c: &Rational, name: &str| {
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag.is_one() {
                out.push_str(&format!("{sign}{name}"));
            } else {
                out.push_str(&format!("{sign}{} {name}", format_rational(&mag)));
            }
        };
        out.push_str("maximize:");
        let mut first = true;
        for (j, c) in self.objective.iter().enumerate() {
            if !c.is_zero() {
                out.push(' ');
                term(&mut out, first, c, &self.names[j]);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        out.push('\n');
        out.push_str("subject to:\n");
        for c in &self.constraints {
            out.push_str(&format!("  {}:", c.label));
            let mut first = true;
            for (j, coef) in &c.terms {
                out.push(' ');
                term(&mut out, first, coef, &self.names[*j]);
                first = false;
            }
            if first {
                out.push_str(" 0");
            }
            out.push_str(&format!(" {} {}\n", c.relation, format_rational(&c.rhs)));
        }
        out.push_str("bounds:\n");
        for (j, u) in self.upper.iter().enumerate() {
            match u {
                Some(u) => out.push_str(&format!("  0 <= {} <= {}\n", self.names[j], format_rational(u))),
                None => out.push_str(&format!("  0 <= {}\n", self.names[j])),
            }
        }
        out
    }
}

/// Dense tableau `B^-1 A` with the current basic values and reduced costs.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    beta: Vec<Rational>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    upper: Vec<Option<Rational>>,
    cost: Vec<Rational>,
    reduced: Vec<Rational>,
    num_structural: usize,
    num_slack: usize,
    first_artificial: usize,
    row_labels: Vec<String>,
    phase_two_cost: Option<Vec<Rational>>,
    pivots: usize,
}

enum Step {
    Optimal,
    Progress,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars();
        let num_slack = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let first_artificial = n + num_slack;
        let width = first_artificial + m;

        let mut rows = Vec::with_capacity(m);
        let mut beta = Vec::with_capacity(m);
        let mut slack = n;
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            for (j, coef) in &c.terms {
                row[*j] += coef;
            }
            match c.relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            let mut rhs = c.rhs.clone();
            if rhs.is_negative() {
                for e in row.iter_mut() {
                    *e = -e.clone();
                }
                rhs = -rhs;
            }
            row[first_artificial + i] = Rational::one();
            rows.push(row);
            beta.push(rhs);
        }
        let mut upper = lp.upper.clone();
        upper.resize(width, None);

        Tableau {
            rows,
            beta,
            basis: (first_artificial..width).collect(),
            at_upper: vec![false; width],
            upper,
            cost: vec![Rational::zero(); width],
            reduced: vec![Rational::zero(); width],
            num_structural: n,
            num_slack,
            first_artificial,
            row_labels: lp.constraints.iter().map(|c| c.label.clone()).collect(),
            phase_two_cost: Some(lp.objective.clone()),
            pivots: 0,
        }
        .with_phase_one_costs()
    }

    fn with_phase_one_costs(mut self) -> Self {
        for j in self.first_artificial..self.width() {
            self.cost[j] = -Rational::one();
        }
        self.recompute_reduced();
        self
    }

    fn width(&self) -> usize {
        self.at_upper.len()
    }

    fn recompute_reduced(&mut self) {
        let width = self.width();
        let mut reduced = self.cost.clone();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &self.cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..width {
                if !row[j].is_zero() {
                    reduced[j] -= cb * &row[j];
                }
            }
        }
        self.reduced = reduced;
    }

    /// Value of a nonbasic variable.
    fn nonbasic_value(&self, j: usize) -> Rational {
        if self.at_upper[j] {
            self.upper[j].clone().expect("at_upper implies a finite bound")
        } else {
            Rational::zero()
        }
    }

    fn run(mut self) -> Result<Solution, LpError> {
        // phase one: drive artificials to zero; a leaving artificial never re-enters
        while let Step::Progress = self.step(self.first_artificial)? {}
        if let Some(i) = (0..self.rows.len())
            .find(|&i| self.basis[i] >= self.first_artificial && self.beta[i].is_positive())
        {
            let row = self.basis[i] - self.first_artificial;
            return Err(LpError::Infeasible { row, label: self.row_labels[row].clone() });
        }
        self.drive_out_artificials();

        let objective = self.phase_two_cost.take().expect("objective set at build");
        self.cost = vec![Rational::zero(); self.width()];
        self.cost[..objective.len()].clone_from_slice(&objective);
        self.recompute_reduced();
        // artificials may no longer enter
        while let Step::Progress = self.step(self.first_artificial)? {}

        let mut values = vec![Rational::zero(); self.num_structural];
        for (j, v) in values.iter_mut().enumerate() {
            *v = self.nonbasic_value(j);
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                values[b] = self.beta[i].clone();
            }
        }
        let optimum = objective
            .iter()
            .zip(&values)
            .fold(Rational::zero(), |acc, (c, q)| acc + c * q);
        debug_assert!(self.num_slack + self.num_structural == self.first_artificial);
        Ok(Solution { optimum, values, pivots: self.pivots })
    }

    /// Pivots zero-valued basic artificials out of the basis where possible;
    /// rows that cannot be pivoted are redundant and are dropped.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                Some(j) => {
                    // degenerate pivot: the artificial is zero, no value moves
                    let leaving = self.basis[i];
                    let value = self.nonbasic_value(j);
                    self.pivot(i, j);
                    self.beta[i] = value;
                    self.at_upper[leaving] = false;
                    self.at_upper[j] = false;
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.beta.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    /// One Bland step over columns `< limit`.
    fn step(&mut self, limit: usize) -> Result<Step, LpError> {
        let is_basic = {
            let mut b = vec![false; self.width()];
            for &j in &self.basis {
                b[j] = true;
            }
            b
        };
        // entering: smallest improving index
        let entering = (0..limit).find(|&j| {
            if is_basic[j] {
                return false;
            }
            let d = &self.reduced[j];
            if self.at_upper[j] {
                d.is_negative()
            } else {
                d.is_positive() && self.upper[j].as_ref().map_or(true, |u| u.is_positive())
            }
        });
        let Some(j) = entering else {
            return Ok(Step::Optimal);
        };
        // moving up from the lower bound (+1) or down from the upper bound (-1)
        let increasing = !self.at_upper[j];

        // ratio test; ties prefer the smallest basic index
        let mut best: Option<(Rational, Option<usize>)> =
            self.upper[j].clone().map(|u| (u, None));
        let mut best_leaving_var = usize::MAX;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][j];
            if a.is_zero() {
                continue;
            }
            // basic i changes by -delta * a when increasing, +delta * a when decreasing
            let slope = if increasing { -a.clone() } else { a.clone() };
            let limit_i = if slope.is_negative() {
                Some(&self.beta[i] / -slope)
            } else {
                self.upper[self.basis[i]]
                    .as_ref()
                    .map(|u| (u - &self.beta[i]) / slope)
            };
            let Some(t) = limit_i else { continue };
            let better = match &best {
                None => true,
                Some((bt, leaving)) => {
                    t < *bt || (t == *bt && leaving.is_some() && self.basis[i] < best_leaving_var)
                }
            };
            if better {
                best_leaving_var = self.basis[i];
                best = Some((t, Some(i)));
            }
        }
        let Some((delta, leaving)) = best else {
            return Err(LpError::Unbounded { var: j });
        };

        let signed = if increasing { delta.clone() } else { -delta.clone() };
        for i in 0..self.rows.len() {
            if !self.rows[i][j].is_zero() {
                let change = &signed * &self.rows[i][j];
                self.beta[i] -= change;
            }
        }
        match leaving {
            None => {
                // bound flip
                self.at_upper[j] = !self.at_upper[j];
            }
            Some(r) => {
                let leaving_var = self.basis[r];
                let entering_value = self.nonbasic_value(j) + signed;
                let goes_to_upper = !self.beta[r].is_zero();
                self.pivot(r, j);
                self.beta[r] = entering_value;
                self.at_upper[leaving_var] = goes_to_upper;
                self.at_upper[j] = false;
            }
        }
        self.pivots += 1;
        Ok(Step::Progress)
    }

    /// Gauss-Jordan pivot on `(r, j)`; `beta` is handled by the caller except
    /// for the elimination of the other rows, which is value-neutral here.
    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.rows[r][j].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for e in self.rows[r].iter_mut() {
                if !e.is_zero() {
                    *e *= &inv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        // artificial columns are never read after the initial basis
        let nonzero: Vec<usize> = (0..self.first_artificial).filter(|&k| !pivot_row[k].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            for &k in &nonzero {
                let delta = &factor * &pivot_row[k];
                row[k] -= delta;
            }
        }
        let factor = self.reduced[j].clone();
        if !factor.is_zero() {
            for &k in &nonzero {
                let delta = &factor * &pivot_row[k];
                self.reduced[k] -= delta;
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn r(a: i64, b: i64) -> Rational {
        Rational::ratio(a, b)
    }

    #[test]
    fn small_textbook_problem() {
        // max 3a + 2b s.t. a + b <= 4, a + 3b <= 6, a <= 3
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(3, 1), r(2, 1)];
        lp.upper[0] = Some(r(3, 1));
        lp.add_constraint(Constraint::new("c1", vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Le, r(4, 1)));
        lp.add_constraint(Constraint::new("c2", vec![(0, r(1, 1)), (1, r(3, 1))], Relation::Le, r(6, 1)));
        let sol = lp.solve().unwrap();
        assert_eq!(sol.optimum, r(11, 1));
        assert_eq!(sol.values, vec![r(3, 1), r(1, 1)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max a - b s.t. a + b = 1, b >= 1/3
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(1, 1), r(-1, 1)];
        lp.add_constraint(Constraint::new("sum", vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Eq, r(1, 1)));
        lp.add_constraint(Constraint::new("floor", vec![(1, r(1, 1))], Relation::Ge, r(1, 3)));
        let sol = lp.solve().unwrap();
        assert_eq!(sol.optimum, r(1, 3));
    }

    #[test]
    fn degenerate_zero_objective() {
        let mut lp = LinearProgram::new(3);
        lp.add_constraint(Constraint::new(
            "sum",
            (0..3).map(|j| (j, r(1, 1))).collect(),
            Relation::Eq,
            r(1, 1),
        ));
        assert_eq!(lp.solve().unwrap().optimum, r(0, 1));
    }

    #[test]
    fn infeasible_reports_row() {
        let mut lp = LinearProgram::new(1);
        lp.upper[0] = Some(r(1, 2));
        lp.add_constraint(Constraint::new("need one", vec![(0, r(1, 1))], Relation::Eq, r(1, 1)));
        match lp.solve() {
            Err(LpError::Infeasible { row, .. }) => assert_eq!(row, 0),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(1, 1), r(0, 1)];
        lp.add_constraint(Constraint::new("diff", vec![(0, r(1, 1)), (1, r(-1, 1))], Relation::Le, r(1, 1)));
        assert!(matches!(lp.solve(), Err(LpError::Unbounded { .. })));
    }

    #[test]
    fn redundant_equalities() {
        // the same row twice must not break phase two
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(1, 1), r(0, 1)];
        for k in 0..2 {
            lp.add_constraint(Constraint::new(
                format!("dup{k}"),
                vec![(0, r(1, 1)), (1, r(1, 1))],
                Relation::Eq,
                r(1, 1),
            ));
        }
        let sol = lp.solve().unwrap();
        assert_eq!(sol.optimum, r(1, 1));
    }

    #[test]
    fn unknown_variable_rejected() {
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(Constraint::new("bad", vec![(3, r(1, 1))], Relation::Le, r(1, 1)));
        assert!(matches!(lp.solve(), Err(LpError::UnknownVariable { var: 3, .. })));
    }

    #[test]
    fn text_export() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(1, 2), r(-1, 2)];
        lp.upper[1] = Some(r(7, 8));
        lp.add_constraint(Constraint::new("norm", vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Eq, r(1, 1)));
        let text = lp.to_text();
        assert!(text.contains("maximize: 1/2 q0 -1/2 q1"));
        assert!(text.contains("norm: q0 +q1 = 1/1"));
        assert!(text.contains("0 <= q1 <= 7/8"));
    }
}
