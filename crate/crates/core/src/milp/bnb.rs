//! Depth-first branch-and-bound over 0/1 (and small-range integer) variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::model::{MilpModel, MilpSolution, SolveStatus, SolverOptions};
use super::simplex::{LpOutcome, Simplex};

struct Node {
    depth: usize,
    bound: f64,
    seq: usize,
    /// `(var, lo, hi)` overrides, later entries win.
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: deepest first, then lowest bound, then earliest pushed
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth
            .cmp(&other.depth)
            .then_with(|| other.bound.total_cmp(&self.bound))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn status_of(outcome: LpOutcome) -> SolveStatus {
    match outcome {
        LpOutcome::Optimal | LpOutcome::Cutoff => SolveStatus::Optimal,
        LpOutcome::Infeasible => SolveStatus::Infeasible,
        LpOutcome::Unbounded => SolveStatus::Unbounded,
        LpOutcome::IterationLimit => SolveStatus::IterationLimit,
    }
}

fn no_point(status: SolveStatus, nodes: usize) -> MilpSolution {
    MilpSolution { status, x: Vec::new(), objective_value: f64::NAN, nodes_explored: nodes }
}

/// Solves the continuous relaxation of `model` (integrality ignored).
pub(crate) fn solve_relaxation(model: &MilpModel, opts: SolverOptions) -> MilpSolution {
    let Some(mut tab) = Simplex::new(model, opts) else {
        return no_point(SolveStatus::Infeasible, 0);
    };
    let outcome = tab.optimize(None);
    if outcome != LpOutcome::Optimal {
        return no_point(status_of(outcome), 0);
    }
    let x = clamp(model, tab.structural_values());
    MilpSolution { status: SolveStatus::Optimal, objective_value: model.evaluate(&x), x, nodes_explored: 0 }
}

fn clamp(model: &MilpModel, mut x: Vec<f64>) -> Vec<f64> {
    for (j, v) in x.iter_mut().enumerate() {
        *v = v.clamp(model.lower[j], model.upper[j]);
    }
    x
}

struct Search<'a> {
    model: &'a MilpModel,
    opts: SolverOptions,
    int_vars: Vec<usize>,
    root_bounds: Vec<(f64, f64)>,
    tab: Simplex,
    incumbent: Option<(f64, Vec<f64>)>,
}

impl Search<'_> {
    /// Restores the root bounds, then applies `changes` in order.
    fn apply(&mut self, changes: &[(usize, f64, f64)]) {
        let mut target = self.root_bounds.clone();
        for &(j, lo, hi) in changes {
            let k = self.int_vars.binary_search(&j).expect("branching on integer variable");
            target[k] = (lo, hi);
        }
        for (k, &j) in self.int_vars.iter().enumerate() {
            if self.tab.bounds(j) != target[k] {
                self.tab.set_bounds(j, target[k].0, target[k].1);
            }
        }
    }

    fn cutoff(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(best, _)| best - self.opts.prune_tol)
    }

    /// LP value under the current bounds, `None` when the node is pruned.
    fn solve(&mut self) -> Result<Option<f64>, SolveStatus> {
        match self.tab.optimize(self.cutoff()) {
            LpOutcome::Optimal => {
                let obj = self.tab.objective();
                Ok(self.cutoff().is_none_or(|c| obj < c).then_some(obj))
            }
            LpOutcome::Infeasible | LpOutcome::Cutoff | LpOutcome::Unbounded => Ok(None),
            LpOutcome::IterationLimit => Err(SolveStatus::IterationLimit),
        }
    }

    /// Integer variable whose fractional part is closest to 0.5.
    fn branching_var(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut branch = None;
        let mut closest = f64::INFINITY;
        for &j in &self.int_vars {
            let frac = x[j] - x[j].floor();
            if frac.min(1.0 - frac) <= self.opts.integrality_tol {
                continue;
            }
            let gap = (frac - 0.5).abs();
            if gap < closest {
                closest = gap;
                branch = Some((j, x[j]));
            }
        }
        branch
    }

    fn rounded(&self, mut x: Vec<f64>) -> Vec<f64> {
        for &j in &self.int_vars {
            x[j] = x[j].round();
        }
        clamp(self.model, x)
    }

    /// Takes the current integral LP vertex as incumbent if it is better.
    fn offer(&mut self) {
        let tol = self.opts.feasibility_tol.max(1e-7);
        let mut point = self.rounded(self.tab.structural_values());
        if self.model.max_violation(&point) > tol {
            // numerically marginal vertex: retry on fresh factors
            self.tab.refactor();
            if self.tab.optimize(None) != LpOutcome::Optimal {
                return;
            }
            point = self.rounded(self.tab.structural_values());
            if self.model.max_violation(&point) > tol {
                return;
            }
        }
        let value = self.model.evaluate(&point);
        if self.incumbent.as_ref().is_none_or(|(best, _)| value < *best) {
            self.incumbent = Some((value, point));
        }
    }
}

/// Depth-first branch-and-bound. Both children of a branching are solved
/// when it is created, so siblings carry their own LP bounds and the lower
/// one is explored first; an integral child becomes a candidate incumbent
/// immediately.
pub(crate) fn branch_and_bound(model: &MilpModel, opts: SolverOptions, start: Option<&[f64]>) -> MilpSolution {
    let int_vars: Vec<usize> = (0..model.num_vars()).filter(|&j| model.integer[j]).collect();
    let mut tightened = model.clone();
    let mut root_bounds = Vec::with_capacity(int_vars.len());
    for &j in &int_vars {
        let lo = (model.lower[j] - opts.integrality_tol).ceil();
        let hi = (model.upper[j] + opts.integrality_tol).floor();
        if lo > hi {
            return no_point(SolveStatus::Infeasible, 0);
        }
        tightened.lower[j] = lo;
        tightened.upper[j] = hi;
        root_bounds.push((lo, hi));
    }
    let Some(tab) = Simplex::new(&tightened, opts) else {
        return no_point(SolveStatus::Infeasible, 0);
    };
    let mut s = Search { model, opts, int_vars, root_bounds, tab, incumbent: None };
    if let Some(x) = start {
        let integral = s.int_vars.iter().all(|&j| (x[j] - x[j].round()).abs() <= opts.integrality_tol);
        if integral && model.max_violation(x) <= opts.feasibility_tol.max(1e-7) {
            let point = s.rounded(x.to_vec());
            s.incumbent = Some((model.evaluate(&point), point));
        }
    }

    let root = s.tab.optimize(None);
    if root != LpOutcome::Optimal {
        return match s.incumbent {
            Some((value, x)) => {
                MilpSolution { status: status_of(root), x, objective_value: value, nodes_explored: 1 }
            }
            None => no_point(status_of(root), 1),
        };
    }
    let mut nodes = 1usize;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node { depth: 0, bound: s.tab.objective(), seq, changes: Vec::new() });
    let mut first = true;
    let mut hit_limit = None;

    'search: while let Some(node) = heap.pop() {
        if let Some((best, _)) = &s.incumbent {
            if node.bound >= best - opts.prune_tol {
                continue;
            }
        }
        if !first {
            s.apply(&node.changes);
            match s.solve() {
                Ok(Some(_)) => {}
                Ok(None) => continue,
                Err(status) => {
                    hit_limit = Some(status);
                    break;
                }
            }
        }
        first = false;

        let Some((j, v)) = s.branching_var(&s.tab.structural_values()) else {
            s.offer();
            continue;
        };
        let (lo, hi) = s.tab.bounds(j);
        for (clo, chi) in [(lo, v.floor()), (v.ceil(), hi)] {
            if nodes >= opts.node_limit {
                hit_limit = Some(SolveStatus::NodeLimit);
                break 'search;
            }
            nodes += 1;
            s.tab.set_bounds(j, clo, chi);
                    match s.solve() {
                Ok(Some(obj)) => {
                    if s.branching_var(&s.tab.structural_values()).is_none() {
                        s.offer();
                    } else {
                        seq += 1;
                        let mut changes = node.changes.clone();
                        changes.push((j, clo, chi));
                        heap.push(Node { depth: node.depth + 1, bound: obj, seq, changes });
                    }
                }
                Ok(None) => {}
                Err(status) => {
                    hit_limit = Some(status);
                    break 'search;
                }
            }
        }
    }

    match (s.incumbent, hit_limit) {
        (Some((value, x)), status) => MilpSolution {
            status: status.unwrap_or(SolveStatus::Optimal),
            x,
            objective_value: value,
            nodes_explored: nodes,
        },
        (None, Some(status)) => no_point(status, nodes),
        (None, None) => no_point(SolveStatus::Infeasible, nodes),
    }
}
