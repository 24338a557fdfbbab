mod common;

use common::{enumerate_binary, random_binary_model};
use gtprior::milp::{solve_ilp, solve_ilp_from, solve_lp, MilpModel, Relation, SolveStatus, SolverOptions};
use gtprior::seed::rng;
use rand::Rng;

fn recheck(m: &MilpModel, x: &[f64], integral: bool) {
    assert!(m.max_violation(x) <= 1e-7, "violation {}", m.max_violation(x));
    if integral {
        for &v in x {
            assert!(v == 0.0 || v == 1.0);
        }
    }
}

#[test]
fn ilp_matches_enumeration_on_random_models() {
    let mut r = rng(20_240_601);
    let mut feasible = 0;
    for case in 0..500 {
        let m = random_binary_model(&mut r);
        let truth = enumerate_binary(&m);
        let sol = solve_ilp(&m).unwrap();
        match truth {
            None => assert_eq!(sol.status, SolveStatus::Infeasible, "case {case}"),
            Some(v) => {
                feasible += 1;
                assert_eq!(sol.status, SolveStatus::Optimal, "case {case}");
                assert!((sol.objective_value - v).abs() < 1e-7, "case {case}: {} vs {v}", sol.objective_value);
                recheck(&m, &sol.x, true);

                let lp = solve_lp(&m).unwrap();
                assert_eq!(lp.status, SolveStatus::Optimal, "case {case}");
                recheck(&m, &lp.x, false);
                assert!(lp.objective_value <= sol.objective_value + 1e-7, "case {case}");
            }
        }
    }
    assert!(feasible > 100, "too few feasible cases: {feasible}");
}

/// Any 0/1 start, feasible or not, leaves the optimum unchanged.
#[test]
fn starting_point_never_changes_the_optimum() {
    let mut r = rng(31);
    for case in 0..300 {
        let m = random_binary_model(&mut r);
        let start: Vec<f64> = (0..m.num_vars()).map(|_| if r.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let sol = solve_ilp_from(&m, SolverOptions::default(), &start).unwrap();
        match enumerate_binary(&m) {
            None => assert_eq!(sol.status, SolveStatus::Infeasible, "case {case}"),
            Some(v) => {
                assert_eq!(sol.status, SolveStatus::Optimal, "case {case}");
                assert!((sol.objective_value - v).abs() < 1e-7, "case {case}");
                recheck(&m, &sol.x, true);
            }
        }
        // stopped at once, a feasible start is returned as the incumbent
        if m.max_violation(&start) <= 1e-9 {
            let one = solve_ilp_from(&m, SolverOptions { node_limit: 1, ..SolverOptions::default() }, &start).unwrap();
            assert!(one.objective_value <= m.evaluate(&start) + 1e-9, "case {case}");
            recheck(&m, &one.x, true);
        }
    }
    assert!(solve_ilp_from(&random_binary_model(&mut r), SolverOptions::default(), &[]).is_err());
}

#[test]
fn row_permutation_leaves_objectives_unchanged() {
    let mut r = rng(7);
    for case in 0..200 {
        let m = random_binary_model(&mut r);
        let mut p = m.clone();
        p.constraints.reverse();
        if p.constraints.len() > 2 {
            p.constraints.swap(0, 1);
        }
        let (a, b) = (solve_ilp(&m).unwrap(), solve_ilp(&p).unwrap());
        assert_eq!(a.status, b.status, "case {case}");
        if a.status == SolveStatus::Optimal {
            assert!((a.objective_value - b.objective_value).abs() < 1e-8, "case {case}");
        }
        let (a, b) = (solve_lp(&m).unwrap(), solve_lp(&p).unwrap());
        assert_eq!(a.status, b.status, "case {case}");
        if a.status == SolveStatus::Optimal {
            assert!((a.objective_value - b.objective_value).abs() < 1e-8, "case {case}");
        }
    }
}

/// Continuous random LPs: compare against the best vertex found by
/// enumerating all bases of small problems.
#[test]
fn lp_matches_vertex_enumeration() {
    let mut r = rng(99);
    for case in 0..300 {
        let n = r.gen_range(1..=3);
        let rows = r.gen_range(1..=3);
        let mut m = MilpModel::new();
        for _ in 0..n {
            m.add_var(r.gen_range(-3.0..3.0), 0.0, r.gen_range(0.5..2.0), false);
        }
        for _ in 0..rows {
            let coeffs: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
            let rel = if r.gen_bool(0.5) { Relation::Le } else { Relation::Ge };
            m.add_dense_constraint(&coeffs, rel, r.gen_range(-1.0..1.0));
        }
        let best = vertex_optimum(&m);
        let sol = solve_lp(&m).unwrap();
        match best {
            None => assert_eq!(sol.status, SolveStatus::Infeasible, "case {case}"),
            Some(v) => {
                assert_eq!(sol.status, SolveStatus::Optimal, "case {case}");
                assert!((sol.objective_value - v).abs() < 1e-7, "case {case}: {} vs {v}", sol.objective_value);
                recheck(&m, &sol.x, false);
            }
        }
    }
}

/// Every vertex is the solution of `n` active constraints chosen among rows
/// and bounds; enumerate all choices and keep feasible ones.
fn vertex_optimum(m: &MilpModel) -> Option<f64> {
    let n = m.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &m.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.terms {
            a[j] += v;
        }
        planes.push((a, c.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), m.lower[j]));
        planes.push((e, m.upper[j]));
    }
    let mut best: Option<f64> = None;
    let k = planes.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_square(&idx.iter().map(|&i| planes[i].clone()).collect::<Vec<_>>()) {
            if m.max_violation(&x) <= 1e-9 {
                let v = m.evaluate(&x);
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for l in i + 1..n {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|(r, b)| {
        let mut v = r.clone();
        v.push(*b);
        v
    }).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                for c in col..=n {
                    a[i][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}
