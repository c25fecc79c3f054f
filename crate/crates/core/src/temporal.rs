//! The per-interval weight program: capacity (Eq. 1), box (Eq. 2) and
//! completion (Eq. 3) constraints over w_{i,k}, plus the fluid witness and
//! the weight checker.

use std::fmt;

use crate::lp::{LinearProgram, Relation};
use crate::task_model::{job_windows, IntervalSet, Job, JobWindows};

/// Index of (job, interval) pairs with k ∈ E_i, ordered by (job_id, k).
///
/// This ordering is the variable layout of every LP built in this crate.
#[derive(Debug, Clone)]
pub struct SlotMap {
    slots: Vec<(usize, usize)>,
    index: Vec<usize>, // jobs × intervals, usize::MAX when k ∉ E_i
    intervals: usize,
}

impl SlotMap {
    pub fn new(windows: &JobWindows, interval_count: usize) -> Self {
        let jobs = windows.job_count();
        let mut slots = Vec::new();
        let mut index = vec![usize::MAX; jobs * interval_count];
        for job in 0..jobs {
            for k in windows.window(job) {
                index[job * interval_count + k] = slots.len();
                slots.push((job, k));
            }
        }
        SlotMap { slots, index, intervals: interval_count }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, s: usize) -> (usize, usize) {
        self.slots[s]
    }

    pub fn slots(&self) -> &[(usize, usize)] {
        &self.slots
    }

    pub fn index_of(&self, job: usize, interval: usize) -> Option<usize> {
        let i = self.index[job * self.intervals + interval];
        if i == usize::MAX {
            None
        } else {
            Some(i)
        }
    }
}

/// Fractional processor share w_{i,k} per job and interval; zero outside E_i.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    values: Vec<f64>,
    jobs: usize,
    intervals: usize,
}

impl WeightMatrix {
    pub fn zeros(jobs: usize, intervals: usize) -> Self {
        WeightMatrix { values: vec![0.0; jobs * intervals], jobs, intervals }
    }

    pub fn job_count(&self) -> usize {
        self.jobs
    }

    pub fn interval_count(&self) -> usize {
        self.intervals
    }

    pub fn get(&self, job: usize, interval: usize) -> f64 {
        self.values[job * self.intervals + interval]
    }

    pub fn set(&mut self, job: usize, interval: usize, value: f64) {
        self.values[job * self.intervals + interval] = value;
    }

    /// Collects slot values out of an LP solution laid out by `slots`.
    pub fn from_slot_values(slots: &SlotMap, jobs: usize, intervals: usize, values: &[f64]) -> Self {
        let mut w = WeightMatrix::zeros(jobs, intervals);
        for (s, &(job, k)) in slots.slots().iter().enumerate() {
            w.set(job, k, values[s]);
        }
        w
    }
}

/// One violated weight constraint; `slack` is how far past the limit.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightViolation {
    /// Eq. (1): Σ_i w_{i,k} > m on interval k.
    Capacity { interval: usize, excess: f64 },
    /// Eq. (2): w_{i,k} outside [0, 1].
    Bounds { job: usize, interval: usize, value: f64 },
    /// Eq. (3): Σ_{k∈E_i} w_{i,k}·|I_k| ≠ C_i.
    Completion { job: usize, residual: f64 },
    /// Nonzero weight on an interval outside the job's window.
    OutsideWindow { job: usize, interval: usize, value: f64 },
}

impl fmt::Display for WeightViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightViolation::Capacity { interval, excess } => {
                write!(f, "Eq(1) interval {interval}: weight sum exceeds cores by {excess:.3e}")
            }
            WeightViolation::Bounds { job, interval, value } => {
                write!(f, "Eq(2) job {job} interval {interval}: weight {value} outside [0,1]")
            }
            WeightViolation::Completion { job, residual } => {
                write!(f, "Eq(3) job {job}: execution differs from wcet by {residual:.3e}")
            }
            WeightViolation::OutsideWindow { job, interval, value } => {
                write!(f, "job {job} has weight {value} on interval {interval} outside its window")
            }
        }
    }
}

/// The feasibility LP of Eqs. (1)–(3): one variable per (job, interval ∈ E_i)
/// slot in `SlotMap` order, capacity rows per interval, then a completion
/// equality per job. Constant objective.
pub fn build_weight_lp(
    jobs: &[Job],
    intervals: &IntervalSet,
    windows: &JobWindows,
    core_count: usize,
) -> LinearProgram {
    let slots = SlotMap::new(windows, intervals.len());
    let mut lp = LinearProgram::new(slots.len());
    for s in 0..slots.len() {
        lp.set_bounds(s, 0.0, 1.0); // Eq. (2)
    }
    for k in 0..intervals.len() {
        let coeffs: Vec<(usize, f64)> = (0..jobs.len())
            .filter_map(|job| slots.index_of(job, k).map(|s| (s, 1.0)))
            .collect();
        lp.add_row(coeffs, Relation::Le, core_count as f64); // Eq. (1)
    }
    for job in jobs {
        let coeffs: Vec<(usize, f64)> = windows
            .window(job.job_id)
            .map(|k| {
                let s = slots.index_of(job.job_id, k).unwrap();
                (s, intervals.duration(k) as f64)
            })
            .collect();
        lp.add_row(coeffs, Relation::Eq, job.wcet as f64); // Eq. (3)
    }
    lp
}

/// The constant-rate witness w_{i,k} = C_i / P_i on E_i.
///
/// Satisfies Eqs. (2) and (3) by construction since Σ_{k∈E_i} |I_k| = P_i;
/// satisfies Eq. (1) iff total utilization is at most the core count.
pub fn fluid_weights(jobs: &[Job], windows: &JobWindows, interval_count: usize) -> WeightMatrix {
    let mut w = WeightMatrix::zeros(jobs.len(), interval_count);
    for job in jobs {
        let period = (job.deadline - job.release) as f64;
        let rate = job.wcet as f64 / period;
        for k in windows.window(job.job_id) {
            w.set(job.job_id, k, rate);
        }
    }
    w
}

/// Checks Eqs. (1)–(3) at the given absolute tolerance. Empty iff all hold.
pub fn check_weights(
    w: &WeightMatrix,
    jobs: &[Job],
    intervals: &IntervalSet,
    core_count: usize,
    tolerance: f64,
) -> Vec<WeightViolation> {
    let windows = job_windows(jobs, intervals);
    let mut report = Vec::new();
    for k in 0..intervals.len() {
        let mut sum = 0.0;
        for job in jobs {
            let v = w.get(job.job_id, k);
            if windows.contains(job.job_id, k) {
                sum += v;
                if !(-tolerance..=1.0 + tolerance).contains(&v) {
                    report.push(WeightViolation::Bounds { job: job.job_id, interval: k, value: v });
                }
            } else if v.abs() > tolerance {
                report.push(WeightViolation::OutsideWindow {
                    job: job.job_id,
                    interval: k,
                    value: v,
                });
            }
        }
        if sum > core_count as f64 + tolerance {
            report.push(WeightViolation::Capacity { interval: k, excess: sum - core_count as f64 });
        }
    }
    for job in jobs {
        let executed: f64 = windows
            .window(job.job_id)
            .map(|k| w.get(job.job_id, k) * intervals.duration(k) as f64)
            .sum();
        let residual = executed - job.wcet as f64;
        if residual.abs() > tolerance {
            report.push(WeightViolation::Completion { job: job.job_id, residual });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, LpStatus};
    use crate::task_model::{build_intervals, generate_jobs, Task, TaskSet};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn task(id: usize, period: u64, wcet: u64) -> Task {
        Task { id, name: format!("t{id}"), period, wcet, wss: 0 }
    }

    fn pipeline(tasks: Vec<Task>, cores: usize) -> (TaskSet, Vec<Job>, IntervalSet, JobWindows) {
        let ts = TaskSet { tasks, core_count: cores, cache_capacity: 1024 };
        let jobs = generate_jobs(&ts).unwrap();
        let intervals = build_intervals(&ts, &jobs);
        let windows = job_windows(&jobs, &intervals);
        (ts, jobs, intervals, windows)
    }

    #[test]
    fn one_job_lp_structure() {
        let (_, jobs, intervals, windows) = pipeline(vec![task(0, 4, 2)], 1);
        let lp = build_weight_lp(&jobs, &intervals, &windows, 1);
        assert_eq!(lp.num_vars(), 1);
        assert_eq!(lp.rows().len(), 2);
        assert_eq!(lp.bounds()[0], (0.0, 1.0));
        // Capacity row: w <= 1.
        assert_eq!(lp.rows()[0].coeffs, vec![(0, 1.0)]);
        assert_eq!(lp.rows()[0].relation, Relation::Le);
        assert_eq!(lp.rows()[0].rhs, 1.0);
        // Completion row: 4w = 2.
        assert_eq!(lp.rows()[1].coeffs, vec![(0, 4.0)]);
        assert_eq!(lp.rows()[1].relation, Relation::Eq);
        assert_eq!(lp.rows()[1].rhs, 2.0);
    }

    #[test]
    fn row_counts_for_three_jobs_two_intervals() {
        let (_, jobs, intervals, windows) = pipeline(vec![task(0, 8, 2), task(1, 4, 1)], 2);
        assert_eq!(jobs.len(), 3);
        assert_eq!(intervals.len(), 2);
        let lp = build_weight_lp(&jobs, &intervals, &windows, 2);
        let capacity = lp.rows().iter().filter(|r| r.relation == Relation::Le).count();
        let completion = lp.rows().iter().filter(|r| r.relation == Relation::Eq).count();
        assert_eq!(capacity, 2);
        assert_eq!(completion, 3);
    }

    #[test]
    fn rows_match_independent_builder_on_random_sets() {
        let menu = [2u64, 4, 5, 8, 10, 16, 20];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let tasks: Vec<Task> = (0..n)
                .map(|id| {
                    let p = menu[rng.gen_range(0..menu.len())];
                    task(id, p, rng.gen_range(1..=p))
                })
                .collect();
            let cores = rng.gen_range(1..=3);
            let (_, jobs, intervals, windows) = pipeline(tasks, cores);
            let slots = SlotMap::new(&windows, intervals.len());
            let lp = build_weight_lp(&jobs, &intervals, &windows, cores);

            // Independent reconstruction of every row from Eqs. (1) and (3).
            assert_eq!(lp.rows().len(), intervals.len() + jobs.len());
            for k in 0..intervals.len() {
                let row = &lp.rows()[k];
                let expected: Vec<(usize, f64)> = slots
                    .slots()
                    .iter()
                    .enumerate()
                    .filter(|(_, &(_, sk))| sk == k)
                    .map(|(s, _)| (s, 1.0))
                    .collect();
                assert_eq!(row.coeffs, expected);
                assert_eq!(row.rhs, cores as f64);
            }
            for (i, job) in jobs.iter().enumerate() {
                let row = &lp.rows()[intervals.len() + i];
                let expected: Vec<(usize, f64)> = slots
                    .slots()
                    .iter()
                    .enumerate()
                    .filter(|(_, &(sj, _))| sj == job.job_id)
                    .map(|(s, &(_, k))| (s, intervals.duration(k) as f64))
                    .collect();
                assert_eq!(row.coeffs, expected);
                assert_eq!(row.rhs, job.wcet as f64);
            }
        }
    }

    #[test]
    fn one_job_lp_solves_to_half() {
        let (_, jobs, intervals, windows) = pipeline(vec![task(0, 4, 2)], 1);
        let lp = build_weight_lp(&jobs, &intervals, &windows, 1);
        let out = solve_lp(&lp, 1e-9);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.values.unwrap()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn fluid_weights_are_constant_rate() {
        let (_, jobs, intervals, windows) = pipeline(vec![task(0, 8, 2), task(1, 4, 1)], 1);
        let w = fluid_weights(&jobs, &windows, intervals.len());
        // Task 0's single job spans both intervals at C/P = 0.25.
        assert_eq!(w.get(0, 0), 0.25);
        assert_eq!(w.get(0, 1), 0.25);
        // Task 1's jobs run at 0.25 on their own interval, 0 elsewhere.
        assert_eq!(w.get(1, 0), 0.25);
        assert_eq!(w.get(1, 1), 0.0);
    }

    #[test]
    fn full_utilization_makes_capacity_tight() {
        // U = 2/4 + 2/8 + 2/8 = 1.0 on one core.
        let (ts, jobs, intervals, windows) =
            pipeline(vec![task(0, 4, 2), task(1, 8, 2), task(2, 8, 2)], 1);
        assert!(ts.utilization_within(1));
        let w = fluid_weights(&jobs, &windows, intervals.len());
        for k in 0..intervals.len() {
            let sum: f64 = jobs.iter().map(|j| w.get(j.job_id, k)).sum();
            assert!((sum - 1.0).abs() < 1e-12, "interval {k} sum {sum}");
        }
        assert!(check_weights(&w, &jobs, &intervals, 1, 1e-6).is_empty());
    }

    #[test]
    fn perturbed_weight_reports_completion_violation() {
        let (_, jobs, intervals, windows) = pipeline(vec![task(0, 4, 2), task(1, 4, 1)], 2);
        let mut w = fluid_weights(&jobs, &windows, intervals.len());
        w.set(1, 0, w.get(1, 0) + 0.5);
        let report = check_weights(&w, &jobs, &intervals, 2, 1e-6);
        assert!(report
            .iter()
            .any(|v| matches!(v, WeightViolation::Completion { job: 1, .. })));
    }

    #[test]
    fn zero_weights_violate_every_completion() {
        let (_, jobs, intervals, _) = pipeline(vec![task(0, 4, 2), task(1, 8, 3)], 2);
        let w = WeightMatrix::zeros(jobs.len(), intervals.len());
        let report = check_weights(&w, &jobs, &intervals, 2, 1e-6);
        let violated: Vec<usize> = report
            .iter()
            .filter_map(|v| match v {
                WeightViolation::Completion { job, .. } => Some(*job),
                _ => None,
            })
            .collect();
        assert_eq!(violated.len(), jobs.len());
    }

    #[test]
    fn weight_outside_window_is_reported() {
        let (_, jobs, intervals, windows) = pipeline(vec![task(0, 8, 2), task(1, 4, 1)], 2);
        let mut w = fluid_weights(&jobs, &windows, intervals.len());
        // Job of task 1 released at 0 has window {0}; put mass on interval 1.
        w.set(1, 1, 0.3);
        let report = check_weights(&w, &jobs, &intervals, 2, 1e-6);
        assert!(report
            .iter()
            .any(|v| matches!(v, WeightViolation::OutsideWindow { job: 1, interval: 1, .. })));
    }

    #[test]
    fn lp_feasibility_matches_fluid_and_exact_utilization() {
        let menu = [2u64, 4, 5, 8, 10, 16, 20];
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut feasible = 0;
        let mut infeasible = 0;
        for _ in 0..120 {
            let n = rng.gen_range(1..=4);
            let tasks: Vec<Task> = (0..n)
                .map(|id| {
                    let p = menu[rng.gen_range(0..menu.len())];
                    task(id, p, rng.gen_range(1..=p))
                })
                .collect();
            let cores = rng.gen_range(1..=2);
            let (ts, jobs, intervals, windows) = pipeline(tasks, cores);
            let lp = build_weight_lp(&jobs, &intervals, &windows, cores);
            let out = solve_lp(&lp, 1e-9);
            let fluid = fluid_weights(&jobs, &windows, intervals.len());
            let fluid_ok = check_weights(&fluid, &jobs, &intervals, cores, 1e-6).is_empty();
            let exact_ok = ts.utilization_within(cores);
            assert_eq!(out.status == LpStatus::Optimal, exact_ok);
            assert_eq!(fluid_ok, exact_ok);
            if exact_ok {
                feasible += 1;
                // Optimal LP weights re-check clean at 1e-6.
                let slots = SlotMap::new(&windows, intervals.len());
                let w = WeightMatrix::from_slot_values(
                    &slots,
                    jobs.len(),
                    intervals.len(),
                    out.values.as_ref().unwrap(),
                );
                assert!(check_weights(&w, &jobs, &intervals, cores, 1e-6).is_empty());
            } else {
                infeasible += 1;
            }
        }
        assert!(feasible > 10 && infeasible > 10, "sweep unbalanced: {feasible}/{infeasible}");
    }

    #[test]
    fn fluid_weights_invariant_under_common_scaling() {
        let base = vec![task(0, 4, 2), task(1, 8, 3)];
        let scaled: Vec<Task> =
            base.iter().map(|t| Task { period: t.period * 3, wcet: t.wcet * 3, ..t.clone() }).collect();
        let (_, jobs_a, intervals_a, windows_a) = pipeline(base, 2);
        let (_, jobs_b, intervals_b, windows_b) = pipeline(scaled, 2);
        let wa = fluid_weights(&jobs_a, &windows_a, intervals_a.len());
        let wb = fluid_weights(&jobs_b, &windows_b, intervals_b.len());
        assert_eq!(wa, wb);
    }
}
