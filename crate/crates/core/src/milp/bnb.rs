use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::check::check_point_with;
use super::presolve::presolve;
use super::problem::{LinearProblem, Sense};
use super::simplex::{LpOutcome, Tableau};
use super::solution::{Solution, SolveStatus, SolverStats};
use super::MilpOptions;

struct Node {
    bound: f64,
    branch_var: usize,
    id: u64,
    fixings: Vec<(usize, f64)>,
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
    // Max-heap: higher bound first, then lower branching index, then older node.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.branch_var.cmp(&self.branch_var))
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Incumbent {
    z: f64,
    values: Vec<f64>,
}

struct Search<'a> {
    problem: &'a LinearProblem,
    opts: &'a MilpOptions,
    binaries: Vec<usize>,
    lp_cap: u64,
    iterations: u64,
    nodes: u64,
    incumbent: Option<Incumbent>,
}

fn sense_sign(p: &LinearProblem) -> f64 {
    match p.sense() {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    }
}

impl Search<'_> {
    fn solve(&mut self, t: &mut Tableau) -> LpOutcome {
        let before = t.iterations;
        let out = t.solve(self.lp_cap);
        self.iterations += t.iterations - before;
        out
    }

    fn gap(&self) -> f64 {
        match &self.incumbent {
            Some(inc) => self.opts.gap_rel * inc.z.abs().max(1.0),
            None => 0.0,
        }
    }

    fn worth_exploring(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some(inc) => bound > inc.z + self.gap(),
            None => true,
        }
    }

    fn most_fractional(&self, values: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let x = values[j];
            let frac = (x - x.floor()).min(x.ceil() - x);
            if frac <= self.opts.integrality {
                continue;
            }
            if best.is_none_or(|(_, f)| frac > f) {
                best = Some((j, frac));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Fixes the binaries of an integral LP point, re-solves and accepts it when it replays cleanly.
    fn polish(&mut self, base: &Tableau, values: &[f64]) -> bool {
        let mut t = base.clone();
        for &j in &self.binaries {
            let v = values[j].round().clamp(0.0, 1.0);
            t.set_bounds(j, v, v);
        }
        if self.solve(&mut t) != LpOutcome::Optimal {
            return false;
        }
        let mut x = t.structural_values();
        for (j, var) in self.problem.variables.iter().enumerate() {
            x[j] = if var.binary {
                x[j].round()
            } else {
                x[j].clamp(var.lower, var.upper)
            };
        }
        if !check_point_with(self.problem, &x, self.opts.feasibility, self.opts.integrality).is_empty() {
            return false;
        }
        let z = sense_sign(self.problem) * (self.problem.objective_value(&x) - self.problem.objective_constant);
        if self.incumbent.as_ref().is_none_or(|inc| z > inc.z) {
            self.incumbent = Some(Incumbent { z, values: x });
            true
        } else {
            false
        }
    }
}

fn finish(
    problem: &LinearProblem,
    status: SolveStatus,
    search: Search<'_>,
    open_bound: Option<f64>,
    started: Instant,
) -> Solution {
    let stats = SolverStats {
        iterations: search.iterations,
        nodes: search.nodes,
        wall_time: started.elapsed(),
    };
    let sign = sense_sign(problem);
    match search.incumbent {
        Some(inc) => {
            let bound = match open_bound {
                Some(b) if b > inc.z => b,
                _ => inc.z,
            };
            Solution {
                status,
                objective: problem.objective_value(&inc.values),
                best_bound: sign * bound + problem.objective_constant,
                values: inc.values,
                stats,
                message: None,
            }
        }
        None => {
            let mut s = Solution::without_point(status, stats);
            if let Some(b) = open_bound {
                s.best_bound = sign * b + problem.objective_constant;
            }
            s
        }
    }
}

pub(crate) fn solve(problem: &LinearProblem, opts: &MilpOptions, relax: bool) -> Solution {
    let started = Instant::now();
    if let Err(e) = problem.validate() {
        let mut s = Solution::without_point(SolveStatus::SolverFailure, SolverStats::default());
        s.message = Some(e.to_string());
        return s;
    }
    let mut search = Search {
        problem,
        opts,
        binaries: if relax {
            Vec::new()
        } else {
            (0..problem.num_vars()).filter(|&j| problem.variables[j].binary).collect()
        },
        lp_cap: 20_000 + 20 * (problem.num_vars() + problem.constraints.len()) as u64,
        iterations: 0,
        nodes: 0,
        incumbent: None,
    };
    let Some(pre) = presolve(problem, opts.feasibility) else {
        return finish(problem, SolveStatus::Infeasible, search, None, started);
    };
    let mut root = Tableau::new(problem, &pre.bounds, &pre.rows);
    search.nodes = 1;
    match search.solve(&mut root) {
        LpOutcome::Optimal => {}
        LpOutcome::Infeasible => return finish(problem, SolveStatus::Infeasible, search, None, started),
        LpOutcome::Unbounded => return finish(problem, SolveStatus::Unbounded, search, None, started),
        LpOutcome::Failure => return finish(problem, SolveStatus::SolverFailure, search, None, started),
    }
    let root_z = root.objective();

    if search.binaries.is_empty() {
        let mut x = root.structural_values();
        for (j, var) in problem.variables.iter().enumerate() {
            x[j] = x[j].clamp(pre.bounds[j].0.max(var.lower), pre.bounds[j].1.min(var.upper));
        }
        search.incumbent = Some(Incumbent { z: root_z, values: x });
        return finish(problem, SolveStatus::Optimal, search, Some(root_z), started);
    }

    if let Some(start) = &opts.initial_solution {
        if start.len() == problem.num_vars() {
            search.polish(&root, start);
        }
    }

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut next_id = 0u64;
    let mut current: Option<(Tableau, Vec<(usize, f64)>, f64)> = Some((root.clone(), Vec::new(), root_z));
    loop {
        let timed_out = opts.time_limit.is_some_and(|lim| started.elapsed() >= lim);
        let node_capped = opts.node_limit.is_some_and(|lim| search.nodes >= lim);
        if timed_out || node_capped {
            let open = heap
                .peek()
                .map(|n| n.bound)
                .into_iter()
                .chain(current.as_ref().map(|c| c.2))
                .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.max(b))));
            let status = match (search.incumbent.is_some(), timed_out) {
                (true, true) => SolveStatus::TimeoutWithIncumbent,
                (true, false) => SolveStatus::FeasibleIncumbent,
                (false, _) => SolveStatus::TimeoutNoIncumbent,
            };
            return finish(problem, status, search, open, started);
        }

        let (tab, fixings, z) = match current.take() {
            Some(c) => c,
            None => {
                let Some(node) = heap.pop() else { break };
                if !search.worth_exploring(node.bound) {
                    heap.clear();
                    break;
                }
                let mut t = root.clone();
                for &(j, v) in &node.fixings {
                    t.set_bounds(j, v, v);
                }
                if search.solve(&mut t) != LpOutcome::Optimal {
                    continue;
                }
                let z = t.objective();
                (t, node.fixings, z)
            }
        };
        if !search.worth_exploring(z) {
            continue;
        }
        let values = tab.structural_values();
        let Some(j) = search.most_fractional(&values) else {
            search.polish(&tab, &values);
            continue;
        };

        let mut children = Vec::with_capacity(2);
        for v in [0.0, 1.0] {
            let mut t = tab.clone();
            t.set_bounds(j, v, v);
            search.nodes += 1;
            if search.solve(&mut t) != LpOutcome::Optimal {
                continue;
            }
            let cz = t.objective();
            if !search.worth_exploring(cz) {
                continue;
            }
            let cvals = t.structural_values();
            if search.most_fractional(&cvals).is_none() {
                search.polish(&t, &cvals);
                continue;
            }
            let mut f = fixings.clone();
            f.push((j, v));
            children.push((t, f, cz));
        }
        // Stable sort keeps the down branch first on equal bounds.
        children.sort_by(|a, b| b.2.total_cmp(&a.2));
        let mut children = children.into_iter();
        let Some(best) = children.next() else { continue };
        for (_, f, cz) in children {
            heap.push(Node { bound: cz, branch_var: j, id: next_id, fixings: f });
            next_id += 1;
        }
        let dive = search.incumbent.is_none() || heap.peek().is_none_or(|top| best.2 >= top.bound);
        if dive {
            current = Some(best);
        } else {
            heap.push(Node { bound: best.2, branch_var: j, id: next_id, fixings: best.1 });
            next_id += 1;
        }
    }
    let status = if search.incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    finish(problem, status, search, None, started)
}
