//! Branch-and-bound over the assignment booleans of the linearized model.
//!
//! Depth-first with the x=1 child explored first; branching picks the most
//! fractional x, ties broken by the owning task's affinity mass and then by
//! variable index. The incumbent is seeded from the greedy heuristic. Since
//! the objective coefficients are integers, a node is pruned as soon as its
//! relaxation bound cannot reach incumbent + 1.

use std::time::Instant;

use crate::lp::{solve_lp, LpStatus};
use crate::temporal::WeightMatrix;

use super::model::{build_linearized_model, LinearizedModel};
use super::{
    clear_idle_assignments, solve_greedy, AssignmentTensor, Instance, Solution, SolveError,
    SolveResult, SolveStats, SolveStatus, SolverConfig,
};

const INT_TOL: f64 = 1e-6;

pub fn solve_exact(instance: &Instance, config: &SolverConfig) -> Result<SolveResult, SolveError> {
    let model = build_linearized_model(instance, config)?;
    Ok(branch_and_bound(instance, &model, config))
}

struct Node {
    /// (x variable, fixed value) along the path from the root.
    fixes: Vec<(usize, f64)>,
}

struct Incumbent {
    choices: Vec<Option<usize>>,
    weights: Vec<f64>,
    objective: u64,
}

fn branch_and_bound(
    instance: &Instance,
    model: &LinearizedModel,
    config: &SolverConfig,
) -> SolveResult {
    let start = Instant::now();
    let mut stats = SolveStats::default();

    // Affinity mass per x variable's job, for the branching tie-break.
    let task_mass: Vec<u64> =
        (0..instance.task_set.tasks.len()).map(|t| instance.affinity.mass(t)).collect();

    let mut incumbent: Option<Incumbent> = None;
    let greedy = solve_greedy(instance, config);
    stats.lp_solves += greedy.stats.lp_solves;
    if let Some(sol) = &greedy.solution {
        let choices = sol.assignment.to_slot_choices(&instance.slots);
        let weights = instance
            .slots
            .slots()
            .iter()
            .map(|&(i, k)| sol.weights.get(i, k))
            .collect();
        stats.incumbent_trace.push(sol.objective);
        incumbent = Some(Incumbent { choices, weights, objective: sol.objective });
    }

    let mut root_bound: Option<f64> = None;
    let mut stack = vec![Node { fixes: Vec::new() }];
    let mut exhausted = true;

    while let Some(node) = stack.pop() {
        if stats.nodes >= config.node_limit || start.elapsed() > config.time_limit {
            exhausted = false;
            break;
        }
        stats.nodes += 1;

        let mut lp = model.lp.clone();
        for &(var, value) in &node.fixes {
            lp.set_bounds(var, value, value);
        }
        stats.lp_solves += 1;
        let out = solve_lp(&lp, 1e-9);
        if out.status != LpStatus::Optimal {
            debug_assert!(out.status == LpStatus::Infeasible, "relaxation cannot be unbounded");
            continue;
        }
        let bound = out.objective.unwrap();
        let values = out.values.unwrap();
        if node.fixes.is_empty() {
            root_bound = Some(bound);
        }
        if let Some(inc) = &incumbent {
            // Integral objective: nothing below incumbent + 1 can improve.
            if bound < inc.objective as f64 + 1.0 - INT_TOL {
                continue;
            }
        }

        // Most fractional x; ties by affinity mass, then lowest index.
        let mut branch_var: Option<usize> = None;
        let mut best_key = (0.0f64, 0u64);
        for s in 0..model.layout.slot_count {
            for j in 0..model.layout.caches {
                let var = model.layout.x_index(s, j);
                let v = values[var];
                let frac = v.min(1.0 - v);
                if frac <= INT_TOL {
                    continue;
                }
                let (job, _) = instance.slots.slot(s);
                let mass = task_mass[instance.jobs[job].task_id];
                if branch_var.is_none()
                    || frac > best_key.0 + INT_TOL
                    || ((frac - best_key.0).abs() <= INT_TOL && mass > best_key.1)
                {
                    branch_var = Some(var);
                    best_key = (frac, mass);
                }
            }
        }

        match branch_var {
            None => {
                // Integral point: a candidate solution.
                let choices = model.choices_from_values(&values);
                let assignment = AssignmentTensor::from_slot_choices(
                    &instance.slots,
                    instance.jobs.len(),
                    instance.cores(),
                    instance.intervals.len(),
                    &choices,
                );
                let objective = super::objective_value(&assignment, instance, config);
                debug_assert!(
                    (objective as f64 - bound).abs() < 1e-3,
                    "relaxation value {bound} disagrees with Eq. (6) value {objective}"
                );
                let better = incumbent.as_ref().map_or(true, |inc| objective > inc.objective);
                if better {
                    let weights =
                        (0..model.layout.slot_count).map(|s| values[s]).collect::<Vec<f64>>();
                    stats.incumbent_trace.push(objective);
                    incumbent = Some(Incumbent { choices, weights, objective });
                }
            }
            Some(var) => {
                // DFS, x = 1 first (pushed last).
                let mut zero = node.fixes.clone();
                zero.push((var, 0.0));
                stack.push(Node { fixes: zero });
                let mut one = node.fixes;
                one.push((var, 1.0));
                stack.push(Node { fixes: one });
            }
        }
    }

    stats.elapsed = start.elapsed();
    let status = match (&incumbent, exhausted) {
        (Some(_), true) => SolveStatus::Optimal,
        (Some(_), false) => SolveStatus::LimitReached,
        (None, true) => SolveStatus::Infeasible,
        (None, false) => SolveStatus::LimitReached,
    };
    let solution = incumbent.map(|inc| {
        let mut choices = inc.choices;
        let weights = WeightMatrix::from_slot_values(
            &instance.slots,
            instance.jobs.len(),
            instance.intervals.len(),
            &inc.weights,
        );
        clear_idle_assignments(instance, &mut choices, &weights);
        let assignment = AssignmentTensor::from_slot_choices(
            &instance.slots,
            instance.jobs.len(),
            instance.cores(),
            instance.intervals.len(),
            &choices,
        );
        let objective = super::objective_value(&assignment, instance, config);
        debug_assert_eq!(objective, inc.objective, "idle clearing must not change Eq. (6)");
        Solution { assignment, weights, objective }
    });
    let upper_bound = root_bound.or_else(|| solution.as_ref().map(|s| s.objective as f64));
    SolveResult { status, solution, upper_bound, stats }
}
