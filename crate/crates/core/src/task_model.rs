//! Periodic task sets, job generation over the hyper-period, and the
//! release-delimited interval structure.

use std::fmt;
use thiserror::Error;

/// Time instants and durations, in integer ticks.
pub type Tick = u64;

/// Hyper-periods above this are rejected to keep LP/ILP sizes desk-scale.
pub const HYPER_PERIOD_GUARD: Tick = 1 << 32;

/// A periodic task with implicit deadline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: usize,
    pub name: String,
    /// Inter-release time P_i, in ticks.
    pub period: Tick,
    /// Worst-case execution time C_i, in ticks.
    pub wcet: Tick,
    /// Working set size, in bytes.
    pub wss: u64,
}

/// A task set together with the platform it runs on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
    /// Number of cores; one private L1 data cache per core.
    pub core_count: usize,
    /// Capacity of each L1 data cache, in bytes.
    pub cache_capacity: u64,
}

/// One instance of a task within the hyper-period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub job_id: usize,
    pub task_id: usize,
    pub release: Tick,
    /// Equals release + period of the owning task.
    pub deadline: Tick,
    pub wcet: Tick,
}

/// The partition of [0, H) at job-release boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    /// Strictly increasing, starts at 0, ends at H.
    boundaries: Vec<Tick>,
}

impl IntervalSet {
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn boundaries(&self) -> &[Tick] {
        &self.boundaries
    }

    pub fn start(&self, k: usize) -> Tick {
        self.boundaries[k]
    }

    pub fn end(&self, k: usize) -> Tick {
        self.boundaries[k + 1]
    }

    /// |I_k| = t_{k+1} - t_k.
    pub fn duration(&self, k: usize) -> Tick {
        self.boundaries[k + 1] - self.boundaries[k]
    }

    pub fn hyper_period(&self) -> Tick {
        *self.boundaries.last().unwrap()
    }
}

/// Per job, the contiguous run E_i of interval indices covered by
/// [release, deadline).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobWindows {
    ranges: Vec<std::ops::Range<usize>>,
}

impl JobWindows {
    pub fn window(&self, job_id: usize) -> std::ops::Range<usize> {
        self.ranges[job_id].clone()
    }

    pub fn contains(&self, job_id: usize, interval: usize) -> bool {
        self.ranges[job_id].contains(&interval)
    }

    pub fn job_count(&self) -> usize {
        self.ranges.len()
    }

    /// Total number of (job, interval) slots, Σ_i |E_i|.
    pub fn slot_count(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).sum()
    }
}

/// A single validation failure, suitable for one-per-line diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    NoTasks,
    NonContiguousIds { index: usize, id: usize },
    ZeroPeriod { task: String },
    ZeroWcet { task: String },
    WcetExceedsPeriod { task: String, wcet: Tick, period: Tick },
    WssExceedsCache { task: String, wss: u64, capacity: u64 },
    ZeroCores,
    ZeroCacheCapacity,
    HyperPeriodOverflow { detail: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NoTasks => write!(f, "task set is empty"),
            ValidationIssue::NonContiguousIds { index, id } => {
                write!(f, "task at position {index} has id {id}; ids must be 0..n contiguous")
            }
            ValidationIssue::ZeroPeriod { task } => write!(f, "task '{task}': period must be >= 1"),
            ValidationIssue::ZeroWcet { task } => write!(f, "task '{task}': wcet must be >= 1"),
            ValidationIssue::WcetExceedsPeriod { task, wcet, period } => {
                write!(f, "task '{task}': wcet {wcet} exceeds period {period}")
            }
            ValidationIssue::WssExceedsCache { task, wss, capacity } => {
                write!(f, "task '{task}': wss {wss} exceeds cache capacity {capacity}")
            }
            ValidationIssue::ZeroCores => write!(f, "core count must be >= 1"),
            ValidationIssue::ZeroCacheCapacity => write!(f, "cache capacity must be >= 1"),
            ValidationIssue::HyperPeriodOverflow { detail } => write!(f, "{detail}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum TaskModelError {
    #[error("invalid task set: {}", format_issues(.0))]
    Invalid(Vec<ValidationIssue>),
    #[error("{0}")]
    HyperPeriodOverflow(String),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

impl TaskSet {
    /// Collects every invariant violation; empty means the set is valid.
    pub fn check(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        if self.tasks.is_empty() {
            issues.push(ValidationIssue::NoTasks);
        }
        if self.core_count == 0 {
            issues.push(ValidationIssue::ZeroCores);
        }
        if self.cache_capacity == 0 {
            issues.push(ValidationIssue::ZeroCacheCapacity);
        }
        for (index, task) in self.tasks.iter().enumerate() {
            if task.id != index {
                issues.push(ValidationIssue::NonContiguousIds { index, id: task.id });
            }
            if task.period == 0 {
                issues.push(ValidationIssue::ZeroPeriod { task: task.name.clone() });
            }
            if task.wcet == 0 {
                issues.push(ValidationIssue::ZeroWcet { task: task.name.clone() });
            }
            if task.period > 0 && task.wcet > task.period {
                issues.push(ValidationIssue::WcetExceedsPeriod {
                    task: task.name.clone(),
                    wcet: task.wcet,
                    period: task.period,
                });
            }
            if task.wss > self.cache_capacity {
                issues.push(ValidationIssue::WssExceedsCache {
                    task: task.name.clone(),
                    wss: task.wss,
                    capacity: self.cache_capacity,
                });
            }
        }
        if issues.is_empty() {
            if let Err(TaskModelError::HyperPeriodOverflow(detail)) = hyper_period(self) {
                issues.push(ValidationIssue::HyperPeriodOverflow { detail });
            }
        }
        issues
    }

    pub fn validate(&self) -> Result<(), TaskModelError> {
        let issues = self.check();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(TaskModelError::Invalid(issues))
        }
    }

    /// Σ C_i / P_i as a float; use [`TaskSet::utilization_within`] for the
    /// exact boundary test.
    pub fn total_utilization(&self) -> f64 {
        self.tasks.iter().map(|t| t.wcet as f64 / t.period as f64).sum()
    }

    /// Exact test of Σ C_i / P_i ≤ m, free of floating-point rounding.
    ///
    /// Equivalent to Σ C_i · (H / P_i) ≤ m · H since every P_i divides H.
    pub fn utilization_within(&self, cores: usize) -> bool {
        let h = match hyper_period(self) {
            Ok(h) => h as u128,
            Err(_) => return false,
        };
        let demand: u128 = self
            .tasks
            .iter()
            .map(|t| t.wcet as u128 * (h / t.period as u128))
            .sum();
        demand <= cores as u128 * h
    }
}

fn gcd(a: Tick, b: Tick) -> Tick {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple of all periods, guarded at 2^32 ticks.
pub fn hyper_period(task_set: &TaskSet) -> Result<Tick, TaskModelError> {
    let mut lcm: Tick = 1;
    let mut seen: Vec<Tick> = Vec::new();
    for task in &task_set.tasks {
        let p = task.period;
        if p == 0 {
            return Err(TaskModelError::HyperPeriodOverflow(
                "cannot compute hyper-period with a zero period".into(),
            ));
        }
        let step = p / gcd(lcm, p);
        match lcm.checked_mul(step) {
            Some(next) if next <= HYPER_PERIOD_GUARD => {
                lcm = next;
                seen.push(p);
            }
            _ => {
                seen.push(p);
                return Err(TaskModelError::HyperPeriodOverflow(format!(
                    "hyper-period exceeds 2^32 ticks: lcm of periods {seen:?} overflows the guard"
                )));
            }
        }
    }
    Ok(lcm)
}

/// All jobs of the hyper-period, ids assigned in (release, task_id) order.
pub fn generate_jobs(task_set: &TaskSet) -> Result<Vec<Job>, TaskModelError> {
    task_set.validate()?;
    let h = hyper_period(task_set)?;
    let mut jobs = Vec::new();
    for task in &task_set.tasks {
        let count = h / task.period;
        for n in 0..count {
            let release = n * task.period;
            jobs.push(Job {
                job_id: 0, // assigned after sorting
                task_id: task.id,
                release,
                deadline: release + task.period,
                wcet: task.wcet,
            });
        }
    }
    jobs.sort_by_key(|j| (j.release, j.task_id));
    for (id, job) in jobs.iter_mut().enumerate() {
        job.job_id = id;
    }
    Ok(jobs)
}

/// Interval boundaries are the distinct job releases plus H.
pub fn build_intervals(task_set: &TaskSet, jobs: &[Job]) -> IntervalSet {
    let h = hyper_period(task_set).expect("jobs were generated, so H is within the guard");
    let mut boundaries: Vec<Tick> = jobs.iter().map(|j| j.release).collect();
    boundaries.push(h);
    boundaries.sort_unstable();
    boundaries.dedup();
    IntervalSet { boundaries }
}

/// E_i for every job: the run of intervals inside [release, deadline).
pub fn job_windows(jobs: &[Job], intervals: &IntervalSet) -> JobWindows {
    let boundaries = intervals.boundaries();
    let ranges = jobs
        .iter()
        .map(|job| {
            // Releases and deadlines are always boundaries, so both lookups hit.
            let start = boundaries.binary_search(&job.release).expect("release is a boundary");
            let end = boundaries.binary_search(&job.deadline).expect("deadline is a boundary");
            start..end
        })
        .collect();
    JobWindows { ranges }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn task(id: usize, period: Tick, wcet: Tick, wss: u64) -> Task {
        Task { id, name: format!("t{id}"), period, wcet, wss }
    }

    fn set(tasks: Vec<Task>, cores: usize, cache: u64) -> TaskSet {
        TaskSet { tasks, core_count: cores, cache_capacity: cache }
    }

    #[test]
    fn hyper_period_of_4_and_6_is_12() {
        let ts = set(vec![task(0, 4, 1, 0), task(1, 6, 1, 0)], 1, 1024);
        assert_eq!(hyper_period(&ts).unwrap(), 12);
    }

    #[test]
    fn hyper_period_single_task() {
        let ts = set(vec![task(0, 5, 1, 0)], 1, 1024);
        assert_eq!(hyper_period(&ts).unwrap(), 5);
    }

    #[test]
    fn hyper_period_of_coprimes() {
        let ts = set(vec![task(0, 2, 1, 0), task(1, 3, 1, 0), task(2, 5, 1, 0)], 1, 1024);
        assert_eq!(hyper_period(&ts).unwrap(), 30);
    }

    #[test]
    fn hyper_period_guard_rejects_huge_lcm() {
        // 131071, 524287, 6700417 are pairwise coprime; product ~ 4.6e17 > 2^32.
        let ts = set(
            vec![task(0, 131071, 1, 0), task(1, 524287, 1, 0), task(2, 6700417, 1, 0)],
            1,
            1024,
        );
        let err = hyper_period(&ts).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("hyper-period exceeds 2^32"), "got: {msg}");
        assert!(msg.contains("131071"), "diagnostic should list the periods: {msg}");
    }

    #[test]
    fn jobs_of_single_task() {
        // P=4 inside H=12 forced by a second task with P=6.
        let ts = set(vec![task(0, 4, 2, 0), task(1, 6, 1, 0)], 2, 1024);
        let jobs = generate_jobs(&ts).unwrap();
        let releases: Vec<Tick> =
            jobs.iter().filter(|j| j.task_id == 0).map(|j| j.release).collect();
        assert_eq!(releases, vec![0, 4, 8]);
        for j in &jobs {
            assert_eq!(j.deadline - j.release, ts.tasks[j.task_id].period);
        }
    }

    #[test]
    fn job_count_for_4_and_8() {
        let ts = set(vec![task(0, 4, 1, 0), task(1, 8, 1, 0)], 1, 1024);
        let jobs = generate_jobs(&ts).unwrap();
        assert_eq!(jobs.len(), 3);
        // Ordered by (release, task_id) with ids 0..n.
        let order: Vec<(Tick, usize)> = jobs.iter().map(|j| (j.release, j.task_id)).collect();
        assert_eq!(order, vec![(0, 0), (0, 1), (4, 0)]);
        assert_eq!(jobs.iter().map(|j| j.job_id).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_task_set_rejected() {
        let ts = set(vec![], 1, 1024);
        assert!(generate_jobs(&ts).is_err());
        assert!(ts.check().contains(&ValidationIssue::NoTasks));
    }

    #[test]
    fn intervals_for_4_and_6() {
        let ts = set(vec![task(0, 4, 1, 0), task(1, 6, 1, 0)], 1, 1024);
        let jobs = generate_jobs(&ts).unwrap();
        let intervals = build_intervals(&ts, &jobs);
        assert_eq!(intervals.boundaries(), &[0, 4, 6, 8, 12]);
        assert_eq!(intervals.len(), 4);
        let durations: Vec<Tick> = (0..intervals.len()).map(|k| intervals.duration(k)).collect();
        assert_eq!(durations, vec![4, 2, 2, 4]);
    }

    #[test]
    fn intervals_for_4_and_8() {
        let ts = set(vec![task(0, 4, 1, 0), task(1, 8, 1, 0)], 1, 1024);
        let jobs = generate_jobs(&ts).unwrap();
        let intervals = build_intervals(&ts, &jobs);
        assert_eq!(intervals.boundaries(), &[0, 4, 8]);
    }

    #[test]
    fn single_task_single_interval() {
        let ts = set(vec![task(0, 5, 1, 0)], 1, 1024);
        let jobs = generate_jobs(&ts).unwrap();
        let intervals = build_intervals(&ts, &jobs);
        assert_eq!(intervals.boundaries(), &[0, 5]);
        assert_eq!(intervals.len(), 1);
    }

    #[test]
    fn windows_cover_release_to_deadline() {
        let ts = set(vec![task(0, 8, 2, 0), task(1, 4, 1, 0)], 2, 1024);
        let jobs = generate_jobs(&ts).unwrap();
        let intervals = build_intervals(&ts, &jobs);
        let windows = job_windows(&jobs, &intervals);
        // Intervals are [0,4),[4,8).
        for job in &jobs {
            let w = windows.window(job.job_id);
            if job.task_id == 0 {
                assert_eq!(w, 0..2);
            } else if job.release == 0 {
                assert_eq!(w, 0..1);
            } else {
                assert_eq!(w, 1..2);
            }
        }
    }

    #[test]
    fn window_durations_sum_to_period_on_random_sets() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let menu = [2u64, 4, 5, 8, 10, 16, 20];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let tasks: Vec<Task> = (0..n)
                .map(|id| {
                    let period = menu[rng.gen_range(0..menu.len())];
                    let wcet = rng.gen_range(1..=period);
                    task(id, period, wcet, 0)
                })
                .collect();
            let ts = set(tasks, 2, 1024);
            let jobs = generate_jobs(&ts).unwrap();
            let intervals = build_intervals(&ts, &jobs);
            let windows = job_windows(&jobs, &intervals);

            // Boundaries are exactly releases ∪ {H}.
            let mut expected: Vec<Tick> = jobs.iter().map(|j| j.release).collect();
            expected.push(intervals.hyper_period());
            expected.sort_unstable();
            expected.dedup();
            assert_eq!(intervals.boundaries(), expected.as_slice());

            // Σ_k |I_k| = H.
            let total: Tick = (0..intervals.len()).map(|k| intervals.duration(k)).sum();
            assert_eq!(total, intervals.hyper_period());

            // Window duration invariant: Σ_{k∈E_i} |I_k| = P_i.
            for job in &jobs {
                let span: Tick =
                    windows.window(job.job_id).map(|k| intervals.duration(k)).sum();
                assert_eq!(span, ts.tasks[job.task_id].period);
            }

            // Determinism: regeneration is bit-identical.
            let jobs2 = generate_jobs(&ts).unwrap();
            assert_eq!(jobs, jobs2);
            assert_eq!(build_intervals(&ts, &jobs2), intervals);
        }
    }

    #[test]
    fn utilization_boundary_is_exact() {
        // U = 1/3 + 2/3 = 1 exactly; float summation may say 0.9999...
        let ts = set(vec![task(0, 3, 1, 0), task(1, 3, 2, 0)], 1, 1024);
        assert!(ts.utilization_within(1));
        let ts2 = set(vec![task(0, 3, 1, 0), task(1, 3, 2, 0), task(2, 30, 1, 0)], 1, 1024);
        assert!(!ts2.utilization_within(1));
    }

    #[test]
    fn check_reports_each_rule() {
        let ts = set(vec![task(0, 4, 5, 2048)], 1, 1024);
        let issues = ts.check();
        assert!(issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::WcetExceedsPeriod { .. })));
        assert!(issues.iter().any(|i| matches!(i, ValidationIssue::WssExceedsCache { .. })));
    }
}
