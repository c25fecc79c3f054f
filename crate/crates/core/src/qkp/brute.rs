//! Exhaustive enumeration of every per-slot cache choice (including "no
//! cache"), keeping the best Eq. (6) value whose weight LP is feasible under
//! the link policy. This is the oracle the other solvers are tested against;
//! it shares no search logic with them.

use std::time::Instant;

use crate::lp::solve_lp;
use crate::temporal::WeightMatrix;

use super::{
    weight_lp_for_choices, AssignmentTensor, Instance, Solution, SolveError, SolveResult,
    SolveStats, SolveStatus, SolverConfig, BRUTE_FORCE_GUARD,
};

pub fn brute_force(instance: &Instance, config: &SolverConfig) -> Result<SolveResult, SolveError> {
    let slot_count = instance.slots.len();
    let caches = instance.cores();
    let space = (caches as u128 + 1)
        .checked_pow(slot_count as u32)
        .unwrap_or(u128::MAX);
    if space > BRUTE_FORCE_GUARD {
        return Err(SolveError::SpaceTooLarge { space, guard: BRUTE_FORCE_GUARD });
    }

    let start = Instant::now();
    let mut stats = SolveStats::default();

    // Enumeration order groups slots by interval so Eq. (4) usage and the
    // incremental objective reset cleanly at interval boundaries.
    let mut order: Vec<usize> = (0..slot_count).collect();
    order.sort_by_key(|&s| {
        let (job, k) = instance.slots.slot(s);
        (k, job)
    });

    // Optimistic suffix bound: for the slot at position p, the profit of all
    // pairs whose later-ordered slot sits at position >= p. Σ over a suffix
    // then bounds every gain still reachable, which prunes low-affinity
    // subtrees without touching feasibility.
    let mut gain_ub = vec![0u64; slot_count + 1];
    for (pos, &s) in order.iter().enumerate() {
        let (job, k) = instance.slots.slot(s);
        let scale = if config.weight_by_interval { instance.intervals.duration(k) } else { 1 };
        let mut ub = 0;
        for (earlier_pos, &es) in order.iter().enumerate() {
            if earlier_pos >= pos {
                break;
            }
            let (other, ok) = instance.slots.slot(es);
            if ok == k && other != job {
                ub += instance.job_pair_affinity(job, other) * scale;
            }
        }
        gain_ub[pos] = ub;
    }
    let mut suffix = vec![0u64; slot_count + 1];
    for pos in (0..slot_count).rev() {
        suffix[pos] = suffix[pos + 1] + gain_ub[pos];
    }

    struct Search<'a> {
        instance: &'a Instance,
        config: &'a SolverConfig,
        order: &'a [usize],
        suffix: &'a [u64],
        choice: Vec<Option<usize>>,
        wss_used: Vec<u64>, // per cache, for the interval currently being filled
        current_interval: usize,
        best: Option<(Vec<Option<usize>>, Vec<f64>, u64)>,
        stats: &'a mut SolveStats,
    }

    impl Search<'_> {
        fn run(&mut self, pos: usize, z: u64) {
            if let Some((_, _, best_z)) = &self.best {
                if z + self.suffix[pos] <= *best_z {
                    return;
                }
            }
            if pos == self.order.len() {
                self.leaf(z);
                return;
            }
            let s = self.order[pos];
            let (job, k) = self.instance.slots.slot(s);
            if k != self.current_interval {
                // Entering a new interval: per-cache WSS usage starts fresh.
                let fresh = vec![0; self.wss_used.len()];
                let saved = std::mem::replace(&mut self.wss_used, fresh);
                let saved_interval = std::mem::replace(&mut self.current_interval, k);
                self.run_slot(pos, s, job, k, z);
                self.wss_used = saved;
                self.current_interval = saved_interval;
                return;
            }
            self.run_slot(pos, s, job, k, z);
        }

        fn run_slot(&mut self, pos: usize, s: usize, job: usize, k: usize, z: u64) {
            let wss = self.instance.job_wss(job);
            let scale =
                if self.config.weight_by_interval { self.instance.intervals.duration(k) } else { 1 };
            for j in 0..self.instance.cores() {
                if self.wss_used[j] + wss > self.instance.cache_capacity() {
                    continue;
                }
                let mut gain = 0;
                for (other_slot, c) in self.choice.iter().enumerate() {
                    if *c == Some(j) {
                        let (other, ok) = self.instance.slots.slot(other_slot);
                        if ok == k && other != job {
                            gain += self.instance.job_pair_affinity(job, other) * scale;
                        }
                    }
                }
                self.choice[s] = Some(j);
                self.wss_used[j] += wss;
                self.run(pos + 1, z + gain);
                self.wss_used[j] -= wss;
                self.choice[s] = None;
            }
            // The unassigned option.
            self.choice[s] = None;
            self.run(pos + 1, z);
        }

        fn leaf(&mut self, z: u64) {
            if let Some((_, _, best_z)) = &self.best {
                if z <= *best_z {
                    return;
                }
            }
            self.stats.nodes += 1;
            let lp = weight_lp_for_choices(self.instance, &self.choice, &self.config.link_policy);
            self.stats.lp_solves += 1;
            let out = solve_lp(&lp, 1e-9);
            if let Some(values) = out.values {
                self.best = Some((self.choice.clone(), values, z));
            }
        }
    }

    let best = {
        let mut search = Search {
            instance,
            config,
            order: &order,
            suffix: &suffix,
            choice: vec![None; slot_count],
            wss_used: vec![0; caches],
            current_interval: usize::MAX,
            best: None,
            stats: &mut stats,
        };
        // Seed the interval tracker so the first slot starts a fresh interval.
        if let Some(&first) = order.first() {
            search.current_interval = instance.slots.slot(first).1;
        }
        search.run(0, 0);
        search.best.take()
    };
    stats.elapsed = start.elapsed();
    match best {
        None => Ok(SolveResult::infeasible(stats)),
        Some((choice, values, z)) => {
            let weights = WeightMatrix::from_slot_values(
                &instance.slots,
                instance.jobs.len(),
                instance.intervals.len(),
                &values,
            );
            let assignment = AssignmentTensor::from_slot_choices(
                &instance.slots,
                instance.jobs.len(),
                caches,
                instance.intervals.len(),
                &choice,
            );
            debug_assert_eq!(z, super::objective_value(&assignment, instance, config));
            stats.incumbent_trace.push(z);
            Ok(SolveResult {
                status: SolveStatus::Optimal,
                solution: Some(Solution { assignment, weights, objective: z }),
                upper_bound: Some(z as f64),
                stats,
            })
        }
    }
}
