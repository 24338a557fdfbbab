//! The in-crate LP and branch-and-bound solvers on a small knapsack.

use gtprior::milp::{solve_ilp, solve_lp, MilpModel, Relation};

fn main() -> gtprior::Result<()> {
    // maximize 5a + 4b + 3c subject to 2a + 3b + c <= 5, written as a minimum
    let mut m = MilpModel::new();
    let vars: Vec<usize> = [5.0, 4.0, 3.0].iter().map(|v| m.binary(-v)).collect();
    m.add_constraint(vars.iter().zip([2.0, 3.0, 1.0]).map(|(&j, w)| (j, w)).collect(), Relation::Le, 5.0);

    let lp = solve_lp(&m)?;
    println!("relaxation {:?}: {:.3} at {:?}", lp.status, lp.objective_value, lp.x);
    let ilp = solve_ilp(&m)?;
    println!("integer    {:?}: {:.3} at {:?} ({} nodes)", ilp.status, ilp.objective_value, ilp.x, ilp.nodes_explored);
    Ok(())
}
