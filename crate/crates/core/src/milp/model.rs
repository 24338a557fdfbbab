use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "<=" => Some(Relation::Le),
            "=" => Some(Relation::Eq),
            ">=" => Some(Relation::Ge),
            _ => None,
        }
    }
}

/// One linear row `Σ coeff·x  (rel)  rhs`, stored sparsely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// How far `x` is from satisfying the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `minimize c·x` subject to linear rows and box bounds, with optional 0/1
/// integrality marks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub constraints: Vec<Constraint>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self {
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            integer: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64, integer: bool) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.integer.push(integer);
        self.objective.len() - 1
    }

    pub fn binary(&mut self, cost: f64) -> usize {
        self.add_var(cost, 0.0, 1.0, true)
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { terms, relation, rhs });
    }

    /// Adds a row given as a dense coefficient vector.
    pub fn add_dense_constraint(&mut self, coeffs: &[f64], relation: Relation, rhs: f64) {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(j, &a)| (j, a))
            .collect();
        self.add_constraint(terms, relation, rhs);
    }

    /// Drops integrality marks.
    pub fn relaxed(&self) -> Self {
        let mut m = self.clone();
        m.integer.iter_mut().for_each(|b| *b = false);
        m
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return invalid("bound and integrality vectors must match the objective length");
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return invalid(format!("variable {j} has invalid bounds [{lo}, {hi}]"));
            }
            if !self.objective[j].is_finite() {
                return invalid(format!("variable {j} has a non-finite cost"));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return invalid(format!("row {i} has a non-finite right-hand side"));
            }
            for &(j, a) in &c.terms {
                if j >= n || !a.is_finite() {
                    return invalid(format!("row {i} has an invalid term ({j}, {a})"));
                }
            }
        }
        Ok(())
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (lo - v).max(v - hi).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// Plain-text dump:
    ///
    /// ```text
    /// vars <n>
    /// obj <c_0> ... <c_{n-1}>
    /// var <j> <lo> <hi> <I|C>
    /// row <rel> <rhs> <j>:<a> ...
    /// ```
    pub fn write_text(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "vars {}", self.num_vars())?;
        let obj: Vec<String> = self.objective.iter().map(|c| format!("{c:?}")).collect();
        writeln!(w, "obj {}", obj.join(" "))?;
        for j in 0..self.num_vars() {
            let kind = if self.integer[j] { "I" } else { "C" };
            writeln!(w, "var {j} {:?} {:?} {kind}", self.lower[j], self.upper[j])?;
        }
        for c in &self.constraints {
            let terms: Vec<String> = c.terms.iter().map(|(j, a)| format!("{j}:{a:?}")).collect();
            writeln!(w, "row {} {:?} {}", c.relation.symbol(), c.rhs, terms.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text(r: impl BufRead) -> Result<Self> {
        let mut m = MilpModel::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            let mut f = line.split_whitespace();
            match f.next() {
                None => continue,
                Some("vars") => {
                    let n: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("bad vars"))?;
                    m.objective = vec![0.0; n];
                    m.lower = vec![0.0; n];
                    m.upper = vec![0.0; n];
                    m.integer = vec![false; n];
                }
                Some("obj") => {
                    let c = f.map(num).collect::<Result<Vec<_>>>()?;
                    if c.len() != m.num_vars() {
                        return Err(err("objective length mismatch"));
                    }
                    m.objective = c;
                }
                Some("var") => {
                    let j: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("bad var"))?;
                    if j >= m.num_vars() {
                        return Err(err("variable index out of range"));
                    }
                    m.lower[j] = num(f.next().unwrap_or(""))?;
                    m.upper[j] = num(f.next().unwrap_or(""))?;
                    m.integer[j] = f.next() == Some("I");
                }
                Some("row") => {
                    let rel = f.next().and_then(Relation::parse).ok_or_else(|| err("bad relation"))?;
                    let rhs = num(f.next().unwrap_or(""))?;
                    let terms = f
                        .map(|t| {
                            let (j, a) = t.split_once(':').ok_or_else(|| err("bad term"))?;
                            Ok((j.parse().map_err(|_| err("bad index"))?, num(a)?))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    m.add_constraint(terms, rel, rhs);
                }
                Some(_) => return Err(err("unknown record")),
            }
        }
        m.validate()?;
        Ok(m)
    }
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Branch-and-bound stopped at the node limit; `x` holds the incumbent
    /// when one was found.
    NodeLimit,
    /// The simplex iteration limit was hit.
    IterationLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::IterationLimit => "iteration_limit",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Empty when no feasible point is known.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub nodes_explored: usize,
}

impl MilpSolution {
    pub fn has_point(&self) -> bool {
        !self.x.is_empty()
    }
}

/// Solver tolerances and limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Primal feasibility, `1e-9`.
    pub feasibility_tol: f64,
    /// Distance from an integer below which a value counts as integral, `1e-6`.
    pub integrality_tol: f64,
    /// A node is pruned when its bound is within this of the incumbent, `1e-7`.
    pub prune_tol: f64,
    pub node_limit: usize,
    /// Per simplex run.
    pub iteration_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            integrality_tol: 1e-6,
            prune_tol: 1e-7,
            node_limit: 1_000_000,
            iteration_limit: 5_000_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_dump_round_trip() {
        let mut m = MilpModel::new();
        let x = m.add_var(1.5, 0.0, 1.0, true);
        let y = m.add_var(-0.25, 0.0, 3.0, false);
        m.add_constraint(vec![(x, 1.0), (y, -2.0)], Relation::Ge, -1.0);
        m.add_constraint(vec![(y, 1.0)], Relation::Eq, 0.1);
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        assert_eq!(MilpModel::read_text(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn validation_catches_bad_bounds() {
        let mut m = MilpModel::new();
        m.add_var(1.0, 1.0, 0.0, false);
        assert!(m.validate().is_err());
        let mut m = MilpModel::new();
        m.add_var(1.0, 0.0, 1.0, false);
        m.add_constraint(vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(m.validate().is_err());
    }
}
