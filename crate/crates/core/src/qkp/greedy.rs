//! Pair-first greedy placement with fluid weights.

use std::time::Instant;

use crate::lp::solve_lp;
use crate::temporal::{fluid_weights, WeightMatrix};

use super::{
    weight_lp_for_choices, AssignmentTensor, Instance, LinkPolicy, Solution, SolveResult,
    SolveStats, SolveStatus, SolverConfig,
};

/// Processes intervals in time order; on each, co-locates job pairs in
/// descending affinity order (ties: smaller combined WSS, then lower pair
/// index) first-fit over caches under Eq. (4) and a fluid-weight load of at
/// most 1 per cache, then places leftover jobs worst-fit by residual WSS.
pub fn solve_greedy(instance: &Instance, config: &SolverConfig) -> SolveResult {
    let start = Instant::now();
    let mut stats = SolveStats::default();
    let caches = instance.cores();
    let capacity = instance.cache_capacity();
    let slots = &instance.slots;
    let fluid = fluid_weights(&instance.jobs, &instance.windows, instance.intervals.len());

    let mut choice: Vec<Option<usize>> = vec![None; slots.len()];
    for k in 0..instance.intervals.len() {
        let present = instance.jobs_on_interval(k);
        let mut cache_of: Vec<Option<usize>> = vec![None; instance.jobs.len()];
        let mut used_wss = vec![0u64; caches];
        let mut used_w = vec![0.0f64; caches];

        let fits = |j: usize, wss: u64, w: f64, used_wss: &[u64], used_w: &[f64]| {
            used_wss[j] + wss <= capacity && used_w[j] + w <= 1.0 + 1e-9
        };
        let mut place =
            |i: usize,
             j: usize,
             cache_of: &mut Vec<Option<usize>>,
             used_wss: &mut Vec<u64>,
             used_w: &mut Vec<f64>| {
                cache_of[i] = Some(j);
                used_wss[j] += instance.job_wss(i);
                used_w[j] += fluid.get(i, k);
            };

        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (pos, &a) in present.iter().enumerate() {
            for &b in &present[pos + 1..] {
                if instance.job_pair_affinity(a, b) > 0 {
                    pairs.push((a, b));
                }
            }
        }
        pairs.sort_by_key(|&(a, b)| {
            let affinity = instance.job_pair_affinity(a, b);
            let combined_wss = instance.job_wss(a) + instance.job_wss(b);
            (std::cmp::Reverse(affinity), combined_wss, a, b)
        });

        for (a, b) in pairs {
            match (cache_of[a], cache_of[b]) {
                (None, None) => {
                    let need_wss = instance.job_wss(a) + instance.job_wss(b);
                    let need_w = fluid.get(a, k) + fluid.get(b, k);
                    if let Some(j) =
                        (0..caches).find(|&j| fits(j, need_wss, need_w, &used_wss, &used_w))
                    {
                        place(a, j, &mut cache_of, &mut used_wss, &mut used_w);
                        place(b, j, &mut cache_of, &mut used_wss, &mut used_w);
                    }
                }
                (Some(j), None) => {
                    if fits(j, instance.job_wss(b), fluid.get(b, k), &used_wss, &used_w) {
                        place(b, j, &mut cache_of, &mut used_wss, &mut used_w);
                    }
                }
                (None, Some(j)) => {
                    if fits(j, instance.job_wss(a), fluid.get(a, k), &used_wss, &used_w) {
                        place(a, j, &mut cache_of, &mut used_wss, &mut used_w);
                    }
                }
                (Some(_), Some(_)) => {}
            }
        }

        // Leftovers: worst fit by residual WSS capacity.
        for &i in &present {
            if cache_of[i].is_some() {
                continue;
            }
            let best = (0..caches)
                .filter(|&j| fits(j, instance.job_wss(i), fluid.get(i, k), &used_wss, &used_w))
                .max_by_key(|&j| (capacity - used_wss[j], std::cmp::Reverse(j)));
            match best {
                Some(j) => place(i, j, &mut cache_of, &mut used_wss, &mut used_w),
                None => {
                    stats.elapsed = start.elapsed();
                    return SolveResult::infeasible(stats);
                }
            }
        }

        for &i in &present {
            let s = slots.index_of(i, k).unwrap();
            choice[s] = cache_of[i];
        }
    }

    // Fluid weights satisfy the one-sided link outright; the epsilon policy
    // may demand w ≥ ε that a long-period job cannot honor on every interval,
    // in which case the LP over the fixed placement decides.
    let weights: WeightMatrix = match config.link_policy {
        LinkPolicy::OneSided => fluid,
        LinkPolicy::Epsilon { epsilon } => {
            let min_rate = instance
                .jobs
                .iter()
                .map(|j| j.wcet as f64 / (j.deadline - j.release) as f64)
                .fold(f64::INFINITY, f64::min);
            if min_rate >= epsilon {
                fluid
            } else {
                let lp = weight_lp_for_choices(instance, &choice, &config.link_policy);
                stats.lp_solves += 1;
                let out = solve_lp(&lp, 1e-9);
                match out.values {
                    Some(values) => WeightMatrix::from_slot_values(
                        slots,
                        instance.jobs.len(),
                        instance.intervals.len(),
                        &values,
                    ),
                    None => {
                        stats.elapsed = start.elapsed();
                        return SolveResult::infeasible(stats);
                    }
                }
            }
        }
    };

    let assignment = AssignmentTensor::from_slot_choices(
        slots,
        instance.jobs.len(),
        caches,
        instance.intervals.len(),
        &choice,
    );
    let objective = super::objective_value(&assignment, instance, config);
    stats.elapsed = start.elapsed();
    stats.incumbent_trace.push(objective);
    SolveResult {
        status: SolveStatus::Feasible,
        solution: Some(Solution { assignment, weights, objective }),
        upper_bound: None,
        stats,
    }
}
