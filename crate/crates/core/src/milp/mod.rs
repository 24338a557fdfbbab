//! Bounded-variable simplex and branch-and-bound for 0/1 mixed integer
//! programs.
//!
//! Default tolerances: feasibility `1e-9`, integrality `1e-6`, bound pruning
//! `1e-7` (see [`SolverOptions`]).

mod bnb;
mod lu;
mod model;
mod simplex;

pub use model::{Constraint, MilpModel, MilpSolution, Relation, SolveStatus, SolverOptions};

use crate::error::{check_dim, Result};

/// Solves the continuous relaxation, ignoring integrality marks.
pub fn solve_lp(model: &MilpModel) -> Result<MilpSolution> {
    solve_lp_with(model, SolverOptions::default())
}

pub fn solve_lp_with(model: &MilpModel, opts: SolverOptions) -> Result<MilpSolution> {
    model.validate()?;
    Ok(bnb::solve_relaxation(model, opts))
}

/// Globally optimal solution over the integer-marked variables.
pub fn solve_ilp(model: &MilpModel) -> Result<MilpSolution> {
    solve_ilp_with(model, SolverOptions::default())
}

pub fn solve_ilp_with(model: &MilpModel, opts: SolverOptions) -> Result<MilpSolution> {
    model.validate()?;
    Ok(bnb::branch_and_bound(model, opts, None))
}

/// As [`solve_ilp_with`], seeded with `start` as the first incumbent when it
/// is feasible and integral. The result is never worse than `start`.
pub fn solve_ilp_from(model: &MilpModel, opts: SolverOptions, start: &[f64]) -> Result<MilpSolution> {
    model.validate()?;
    check_dim(model.num_vars(), start.len())?;
    Ok(bnb::branch_and_bound(model, opts, Some(start)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn lp_single_lower_row() {
        let mut m = MilpModel::new();
        let x = m.add_var(1.0, 0.0, 1.0, false);
        m.add_constraint(vec![(x, 1.0)], Relation::Ge, 0.3);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!(close(s.x[0], 0.3) && close(s.objective_value, 0.3));
    }

    #[test]
    fn lp_tied_split() {
        let mut m = MilpModel::new();
        let x = m.add_var(1.0, 0.0, 1.0, false);
        let y = m.add_var(1.0, 0.0, 1.0, false);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Ge, 1.0);
        let s = solve_lp(&m).unwrap();
        assert!(close(s.objective_value, 1.0));
    }

    #[test]
    fn lp_vertex() {
        let mut m = MilpModel::new();
        let x = m.add_var(-1.0, 0.0, 1.0, false);
        let y = m.add_var(-2.0, 0.0, 1.0, false);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.5);
        let s = solve_lp(&m).unwrap();
        assert!(close(s.x[0], 0.5) && close(s.x[1], 1.0) && close(s.objective_value, -2.5));
    }

    #[test]
    fn lp_infeasible() {
        let mut m = MilpModel::new();
        let x = m.add_var(1.0, 0.0, 1.0, false);
        m.add_constraint(vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Infeasible);
        let mut m = MilpModel::new();
        m.add_var(1.0, 0.0, 1.0, false);
        m.add_constraint(vec![], Relation::Eq, 1.0);
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn lp_equalities() {
        // x + y = 1, x − y = 0.5 → x = 0.75, y = 0.25
        let mut m = MilpModel::new();
        let x = m.add_var(0.0, 0.0, 1.0, false);
        let y = m.add_var(1.0, 0.0, 1.0, false);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
        m.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Eq, 0.5);
        let s = solve_lp(&m).unwrap();
        assert!(close(s.x[0], 0.75) && close(s.x[1], 0.25));
    }

    #[test]
    fn ilp_rounds_up() {
        let mut m = MilpModel::new();
        let x = m.binary(1.0);
        m.add_constraint(vec![(x, 1.0)], Relation::Ge, 0.3);
        let s = solve_ilp(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.x, vec![1.0]);
        assert!(close(s.objective_value, 1.0));
    }

    #[test]
    fn ilp_triangle_cover() {
        let mut m = MilpModel::new();
        let v: Vec<usize> = (0..3).map(|_| m.binary(1.0)).collect();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            m.add_constraint(vec![(v[a], 1.0), (v[b], 1.0)], Relation::Ge, 1.0);
        }
        let lp = solve_lp(&m).unwrap();
        assert!(close(lp.objective_value, 1.5));
        let s = solve_ilp(&m).unwrap();
        assert!(close(s.objective_value, 2.0));
        assert!(s.nodes_explored > 1);
    }

    #[test]
    fn ilp_integral_relaxation_needs_no_branching() {
        let mut m = MilpModel::new();
        let x = m.binary(2.0);
        let y = m.binary(-1.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let lp = solve_lp(&m).unwrap();
        let ilp = solve_ilp(&m).unwrap();
        assert_eq!(ilp.nodes_explored, 1);
        assert_eq!(lp.x, ilp.x);
    }

    #[test]
    fn node_limit_reports_incumbent_status() {
        let mut m = MilpModel::new();
        let v: Vec<usize> = (0..5).map(|_| m.binary(1.0)).collect();
        for i in 0..5 {
            m.add_constraint(vec![(v[i], 1.0), (v[(i + 1) % 5], 1.0)], Relation::Ge, 1.0);
        }
        let opts = SolverOptions { node_limit: 1, ..SolverOptions::default() };
        let s = solve_ilp_with(&m, opts).unwrap();
        assert_eq!(s.status, SolveStatus::NodeLimit);
    }
}
