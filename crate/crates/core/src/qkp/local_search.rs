//! Hill climbing over cache relocations and same-interval swaps.
//!
//! Weights stay fixed at the start solution's values; every accepted move
//! preserves Eqs. (1)–(5), the link policy and per-core capacity, so the
//! result is feasible whenever the start is. Only strict objective
//! improvements are accepted, scanning moves in a fixed order and taking the
//! first improvement until a local optimum or a limit is hit.

use std::time::Instant;

use super::{
    AssignmentTensor, Instance, Solution, SolveResult, SolveStats, SolveStatus, SolverConfig,
};

pub fn local_search(
    start: &SolveResult,
    instance: &Instance,
    config: &SolverConfig,
) -> SolveResult {
    let t0 = Instant::now();
    let solution = match &start.solution {
        Some(s) => s,
        None => return start.clone(),
    };
    let mut stats = SolveStats::default();
    let caches = instance.cores();
    let capacity = instance.cache_capacity();
    let weights = solution.weights.clone();
    let mut choice = solution.assignment.to_slot_choices(&instance.slots);
    let mut objective = solution.objective;
    stats.incumbent_trace.push(objective);

    // Per (cache, interval) loads maintained across moves.
    let interval_count = instance.intervals.len();
    let mut wss_load = vec![0u64; caches * interval_count];
    let mut w_load = vec![0.0f64; caches * interval_count];
    for (s, c) in choice.iter().enumerate() {
        if let Some(j) = *c {
            let (i, k) = instance.slots.slot(s);
            wss_load[j * interval_count + k] += instance.job_wss(i);
            w_load[j * interval_count + k] += weights.get(i, k);
        }
    }

    // Gain of job i joining cache j on interval k, under the current choice.
    let pair_gain = |choice: &[Option<usize>], i: usize, j: usize, k: usize, skip: usize| -> u64 {
        let scale = if config.weight_by_interval { instance.intervals.duration(k) } else { 1 };
        instance
            .jobs_on_interval(k)
            .iter()
            .filter(|&&other| other != i && other != skip)
            .filter(|&&other| {
                instance
                    .slots
                    .index_of(other, k)
                    .map(|os| choice[os] == Some(j))
                    .unwrap_or(false)
            })
            .map(|&other| instance.job_pair_affinity(i, other) * scale)
            .sum()
    };

    let mut improved = true;
    'outer: while improved {
        improved = false;
        if t0.elapsed() > config.time_limit || stats.nodes >= config.node_limit {
            break;
        }

        // Relocations: move one slot to a different cache.
        for s in 0..instance.slots.len() {
            stats.nodes += 1;
            let j_from = match choice[s] {
                Some(j) => j,
                None => continue,
            };
            let (i, k) = instance.slots.slot(s);
            let wss = instance.job_wss(i);
            let w = weights.get(i, k);
            let loss = pair_gain(&choice, i, j_from, k, usize::MAX);
            for j_to in 0..caches {
                if j_to == j_from {
                    continue;
                }
                let to = j_to * interval_count + k;
                if wss_load[to] + wss > capacity || w_load[to] + w > 1.0 + 1e-9 {
                    continue;
                }
                let gain = pair_gain(&choice, i, j_to, k, usize::MAX);
                if gain > loss {
                    let from = j_from * interval_count + k;
                    wss_load[from] -= wss;
                    w_load[from] -= w;
                    wss_load[to] += wss;
                    w_load[to] += w;
                    choice[s] = Some(j_to);
                    objective += gain - loss;
                    stats.incumbent_trace.push(objective);
                    improved = true;
                    continue 'outer;
                }
            }
        }

        // Swaps: exchange two jobs' caches within one interval.
        for k in 0..interval_count {
            let present = instance.jobs_on_interval(k);
            for (pos, &a) in present.iter().enumerate() {
                let sa = instance.slots.index_of(a, k).unwrap();
                let ja = match choice[sa] {
                    Some(j) => j,
                    None => continue,
                };
                for &b in &present[pos + 1..] {
                    stats.nodes += 1;
                    let sb = instance.slots.index_of(b, k).unwrap();
                    let jb = match choice[sb] {
                        Some(j) => j,
                        None => continue,
                    };
                    if ja == jb {
                        continue;
                    }
                    let (wss_a, wss_b) = (instance.job_wss(a), instance.job_wss(b));
                    let (w_a, w_b) = (weights.get(a, k), weights.get(b, k));
                    let la = ja * interval_count + k;
                    let lb = jb * interval_count + k;
                    if wss_load[la] - wss_a + wss_b > capacity
                        || wss_load[lb] - wss_b + wss_a > capacity
                        || w_load[la] - w_a + w_b > 1.0 + 1e-9
                        || w_load[lb] - w_b + w_a > 1.0 + 1e-9
                    {
                        continue;
                    }
                    // Pairs between a and b themselves stay separated, so
                    // exclude each from the other's gain and loss.
                    let loss = pair_gain(&choice, a, ja, k, b) + pair_gain(&choice, b, jb, k, a);
                    let gain = pair_gain(&choice, a, jb, k, b) + pair_gain(&choice, b, ja, k, a);
                    if gain > loss {
                        wss_load[la] = wss_load[la] - wss_a + wss_b;
                        wss_load[lb] = wss_load[lb] - wss_b + wss_a;
                        w_load[la] = w_load[la] - w_a + w_b;
                        w_load[lb] = w_load[lb] - w_b + w_a;
                        choice[sa] = Some(jb);
                        choice[sb] = Some(ja);
                        objective += gain - loss;
                        stats.incumbent_trace.push(objective);
                        improved = true;
                        continue 'outer;
                    }
                }
            }
        }
    }

    let assignment = AssignmentTensor::from_slot_choices(
        &instance.slots,
        instance.jobs.len(),
        caches,
        interval_count,
        &choice,
    );
    debug_assert_eq!(objective, super::objective_value(&assignment, instance, config));
    stats.elapsed = t0.elapsed();
    SolveResult {
        status: start.status,
        solution: Some(Solution { assignment, weights, objective }),
        upper_bound: start.upper_bound,
        stats,
    }
}
