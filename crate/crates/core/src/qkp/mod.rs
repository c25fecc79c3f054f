//! The cache-assignment problem: place jobs on per-core L1 data caches per
//! interval, maximizing co-location of communicating jobs (Eq. 6) under
//! cache capacity (Eq. 4), single-cache assignment (Eq. 5), and the link to
//! the temporal weights.

mod brute;
mod exact;
mod greedy;
mod local_search;
mod model;

pub use brute::brute_force;
pub use exact::solve_exact;
pub use greedy::solve_greedy;
pub use local_search::local_search;
pub use model::{build_linearized_model, LinearizedModel, ModelLayout, PairVar};

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::affinity::AffinityMatrix;
use crate::lp::{LinearProgram, Relation};
use crate::task_model::{
    build_intervals, generate_jobs, job_windows, IntervalSet, Job, JobWindows, TaskModelError,
    TaskSet,
};
use crate::temporal::{check_weights, SlotMap, WeightMatrix, WeightViolation};

/// Exhaustive-search guard: (m+1)^slots may not exceed this.
pub const BRUTE_FORCE_GUARD: u128 = 10_000_000;

/// Default ε for the epsilon link policy.
pub const DEFAULT_EPSILON: f64 = 1.0 / 1024.0;

/// Absolute tolerance used by the constraint checkers.
pub const CHECK_TOLERANCE: f64 = 1e-6;

/// How the boolean assignment is tied to the temporal weights.
///
/// The paper's link is two implications; only the first is an LP-closed set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkPolicy {
    /// w_{i,k} ≤ Σ_j x_{ijk}: a job only executes where it is assigned.
    OneSided,
    /// Additionally w_{i,k} ≥ ε·Σ_j x_{ijk}: an assigned job must execute.
    Epsilon { epsilon: f64 },
}

impl Default for LinkPolicy {
    fn default() -> Self {
        LinkPolicy::OneSided
    }
}

impl LinkPolicy {
    pub fn epsilon() -> Self {
        LinkPolicy::Epsilon { epsilon: DEFAULT_EPSILON }
    }

    pub fn min_assigned_weight(&self) -> f64 {
        match self {
            LinkPolicy::OneSided => 0.0,
            LinkPolicy::Epsilon { epsilon } => *epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Exact,
    Greedy,
    LocalSearch,
    BruteForce,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolveMethod::Exact => "exact",
            SolveMethod::Greedy => "greedy",
            SolveMethod::LocalSearch => "local",
            SolveMethod::BruteForce => "brute",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: SolveMethod,
    pub time_limit: Duration,
    pub node_limit: u64,
    pub seed: u64,
    /// Multiply each pair term of Eq. (6) by |I_k|.
    pub weight_by_interval: bool,
    pub link_policy: LinkPolicy,
    /// Cap on linearized-model variables.
    pub model_var_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolveMethod::Exact,
            time_limit: Duration::from_secs(60),
            node_limit: 1_000_000,
            seed: 0,
            weight_by_interval: false,
            link_policy: LinkPolicy::OneSided,
            model_var_cap: 200_000,
        }
    }
}

/// A task set expanded into everything the solvers consume.
#[derive(Debug, Clone)]
pub struct Instance {
    pub task_set: TaskSet,
    pub jobs: Vec<Job>,
    pub intervals: IntervalSet,
    pub windows: JobWindows,
    pub slots: SlotMap,
    pub affinity: AffinityMatrix,
}

impl Instance {
    pub fn new(task_set: TaskSet, affinity: AffinityMatrix) -> Result<Self, TaskModelError> {
        task_set.validate()?;
        let jobs = generate_jobs(&task_set)?;
        let intervals = build_intervals(&task_set, &jobs);
        let windows = job_windows(&jobs, &intervals);
        let slots = SlotMap::new(&windows, intervals.len());
        Ok(Instance { task_set, jobs, intervals, windows, slots, affinity })
    }

    pub fn cores(&self) -> usize {
        self.task_set.core_count
    }

    pub fn cache_capacity(&self) -> u64 {
        self.task_set.cache_capacity
    }

    pub fn job_wss(&self, job: usize) -> u64 {
        self.task_set.tasks[self.jobs[job].task_id].wss
    }

    pub fn job_pair_affinity(&self, a: usize, b: usize) -> u64 {
        self.affinity.get(self.jobs[a].task_id, self.jobs[b].task_id)
    }

    /// Jobs whose window contains interval k, ascending by id.
    pub fn jobs_on_interval(&self, k: usize) -> Vec<usize> {
        (0..self.jobs.len()).filter(|&i| self.windows.contains(i, k)).collect()
    }
}

/// Boolean x_{ijk}: job i on cache j during interval k.
///
/// Dense storage so that checkers can observe invalid states (for instance a
/// job assigned to two caches at once) injected by tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentTensor {
    data: Vec<bool>,
    jobs: usize,
    caches: usize,
    intervals: usize,
}

impl AssignmentTensor {
    pub fn zeros(jobs: usize, caches: usize, intervals: usize) -> Self {
        AssignmentTensor { data: vec![false; jobs * caches * intervals], jobs, caches, intervals }
    }

    fn idx(&self, job: usize, cache: usize, interval: usize) -> usize {
        (job * self.caches + cache) * self.intervals + interval
    }

    pub fn get(&self, job: usize, cache: usize, interval: usize) -> bool {
        self.data[self.idx(job, cache, interval)]
    }

    pub fn set(&mut self, job: usize, cache: usize, interval: usize, value: bool) {
        let idx = self.idx(job, cache, interval);
        self.data[idx] = value;
    }

    pub fn job_count(&self) -> usize {
        self.jobs
    }

    pub fn cache_count(&self) -> usize {
        self.caches
    }

    pub fn interval_count(&self) -> usize {
        self.intervals
    }

    /// The caches job i occupies on interval k (more than one only in
    /// deliberately corrupted tensors).
    pub fn assigned_caches(&self, job: usize, interval: usize) -> Vec<usize> {
        (0..self.caches).filter(|&j| self.get(job, j, interval)).collect()
    }

    /// The single assigned cache, if exactly one.
    pub fn assigned_cache(&self, job: usize, interval: usize) -> Option<usize> {
        let mut found = None;
        for j in 0..self.caches {
            if self.get(job, j, interval) {
                if found.is_some() {
                    return None;
                }
                found = Some(j);
            }
        }
        found
    }

    /// Builds a tensor from one optional cache per (job, interval) slot.
    pub fn from_slot_choices(
        slots: &SlotMap,
        jobs: usize,
        caches: usize,
        intervals: usize,
        choice: &[Option<usize>],
    ) -> Self {
        let mut tensor = AssignmentTensor::zeros(jobs, caches, intervals);
        for (s, &(job, k)) in slots.slots().iter().enumerate() {
            if let Some(j) = choice[s] {
                tensor.set(job, j, k, true);
            }
        }
        tensor
    }

    /// Inverse of [`AssignmentTensor::from_slot_choices`] for well-formed
    /// tensors (at most one cache per slot).
    pub fn to_slot_choices(&self, slots: &SlotMap) -> Vec<Option<usize>> {
        slots
            .slots()
            .iter()
            .map(|&(job, k)| self.assigned_cache(job, k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    LimitReached,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::LimitReached => "limit",
        };
        write!(f, "{name}")
    }
}

/// A feasible (assignment, weights) pair and its Eq. (6) value.
#[derive(Debug, Clone)]
pub struct Solution {
    pub assignment: AssignmentTensor,
    pub weights: WeightMatrix,
    pub objective: u64,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_solves: u64,
    pub elapsed: Duration,
    /// Objective after each accepted incumbent/improvement, in order.
    pub incumbent_trace: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    /// Best proven bound on the optimum (root LP relaxation for the exact
    /// solver, the optimum itself for brute force).
    pub upper_bound: Option<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn objective(&self) -> Option<u64> {
        self.solution.as_ref().map(|s| s.objective)
    }

    pub(crate) fn infeasible(stats: SolveStats) -> Self {
        SolveResult { status: SolveStatus::Infeasible, solution: None, upper_bound: None, stats }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("linearized model needs {vars} variables, above the cap of {cap}")]
    ModelTooLarge { vars: usize, cap: usize },
    #[error("brute-force space of {space} assignments exceeds the guard of {guard}")]
    SpaceTooLarge { space: u128, guard: u128 },
}

/// Eq. (6): Σ over intervals, caches, and unordered co-windowed pairs of
/// a_{ii'}·x_{ijk}·x_{i'jk}, optionally weighted by |I_k|.
pub fn objective_value(
    assignment: &AssignmentTensor,
    instance: &Instance,
    config: &SolverConfig,
) -> u64 {
    let mut z: u64 = 0;
    for k in 0..instance.intervals.len() {
        let present = instance.jobs_on_interval(k);
        let scale = if config.weight_by_interval { instance.intervals.duration(k) } else { 1 };
        for j in 0..instance.cores() {
            for (pos, &a) in present.iter().enumerate() {
                if !assignment.get(a, j, k) {
                    continue;
                }
                for &b in &present[pos + 1..] {
                    if assignment.get(b, j, k) {
                        z += instance.job_pair_affinity(a, b) * scale;
                    }
                }
            }
        }
    }
    z
}

/// One violated assignment-side constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum AssignmentViolation {
    /// Eq. (4): Σ WSS over a cache exceeds its capacity.
    CacheCapacity { cache: usize, interval: usize, load: u64, capacity: u64 },
    /// Eq. (5): a job on more than one cache in one interval.
    MultipleCaches { job: usize, interval: usize },
    /// x set on an interval outside the job's window.
    AssignedOutsideWindow { job: usize, interval: usize },
    /// One-sided link: positive weight without an assignment.
    LinkUnassigned { job: usize, interval: usize, weight: f64 },
    /// Epsilon link: assigned but weight below ε.
    LinkBelowEpsilon { job: usize, interval: usize, weight: f64, epsilon: f64 },
    /// Per-core interval capacity: Σ w over one cache exceeds 1.
    CoreOverload { cache: usize, interval: usize, load: f64 },
    /// A weight-side violation (Eqs. 1–3).
    Weight(WeightViolation),
}

impl fmt::Display for AssignmentViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignmentViolation::CacheCapacity { cache, interval, load, capacity } => write!(
                f,
                "Eq(4) cache {cache} interval {interval}: WSS load {load} exceeds {capacity}"
            ),
            AssignmentViolation::MultipleCaches { job, interval } => {
                write!(f, "Eq(5) job {job} interval {interval}: assigned to multiple caches")
            }
            AssignmentViolation::AssignedOutsideWindow { job, interval } => {
                write!(f, "job {job} assigned on interval {interval} outside its window")
            }
            AssignmentViolation::LinkUnassigned { job, interval, weight } => {
                write!(f, "link: job {job} interval {interval} has weight {weight} but no cache")
            }
            AssignmentViolation::LinkBelowEpsilon { job, interval, weight, epsilon } => write!(
                f,
                "link: job {job} interval {interval} assigned with weight {weight} < epsilon {epsilon}"
            ),
            AssignmentViolation::CoreOverload { cache, interval, load } => {
                write!(f, "core {cache} interval {interval}: weight load {load} exceeds 1")
            }
            AssignmentViolation::Weight(w) => write!(f, "{w}"),
        }
    }
}

/// Checks Eqs. (4), (5), the link policy, per-core interval capacity, and
/// (via [`check_weights`]) Eqs. (1)–(3). Empty iff all hold.
pub fn check_assignment(
    assignment: &AssignmentTensor,
    weights: &WeightMatrix,
    instance: &Instance,
    config: &SolverConfig,
    tolerance: f64,
) -> Vec<AssignmentViolation> {
    let mut report = Vec::new();
    let caches = instance.cores();
    let capacity = instance.cache_capacity();

    for k in 0..instance.intervals.len() {
        for j in 0..caches {
            let mut wss_load: u64 = 0;
            let mut weight_load = 0.0;
            for i in 0..instance.jobs.len() {
                if assignment.get(i, j, k) {
                    wss_load += instance.job_wss(i);
                    weight_load += weights.get(i, k);
                }
            }
            if wss_load > capacity {
                report.push(AssignmentViolation::CacheCapacity {
                    cache: j,
                    interval: k,
                    load: wss_load,
                    capacity,
                });
            }
            if weight_load > 1.0 + tolerance {
                report.push(AssignmentViolation::CoreOverload {
                    cache: j,
                    interval: k,
                    load: weight_load,
                });
            }
        }
        for i in 0..instance.jobs.len() {
            let assigned = assignment.assigned_caches(i, k);
            if !instance.windows.contains(i, k) {
                if !assigned.is_empty() {
                    report.push(AssignmentViolation::AssignedOutsideWindow { job: i, interval: k });
                }
                continue;
            }
            if assigned.len() > 1 {
                report.push(AssignmentViolation::MultipleCaches { job: i, interval: k });
            }
            let w = weights.get(i, k);
            if assigned.is_empty() && w > tolerance {
                report.push(AssignmentViolation::LinkUnassigned { job: i, interval: k, weight: w });
            }
            if let LinkPolicy::Epsilon { epsilon } = config.link_policy {
                if !assigned.is_empty() && w < epsilon - tolerance {
                    report.push(AssignmentViolation::LinkBelowEpsilon {
                        job: i,
                        interval: k,
                        weight: w,
                        epsilon,
                    });
                }
            }
        }
    }

    for w in check_weights(weights, &instance.jobs, &instance.intervals, caches, tolerance) {
        report.push(AssignmentViolation::Weight(w));
    }
    report
}

/// The weight LP for a fixed per-slot assignment: Eqs. (1)–(3), per-core
/// capacity over each occupied (cache, interval), and the link policy as
/// variable bounds.
pub(crate) fn weight_lp_for_choices(
    instance: &Instance,
    choice: &[Option<usize>],
    policy: &LinkPolicy,
) -> LinearProgram {
    let slots = &instance.slots;
    let mut lp = LinearProgram::new(slots.len());
    let min_w = policy.min_assigned_weight();
    for (s, c) in choice.iter().enumerate() {
        match c {
            Some(_) => lp.set_bounds(s, min_w, 1.0),
            None => lp.set_bounds(s, 0.0, 0.0),
        }
    }
    for k in 0..instance.intervals.len() {
        let coeffs: Vec<(usize, f64)> = (0..instance.jobs.len())
            .filter_map(|i| slots.index_of(i, k).map(|s| (s, 1.0)))
            .collect();
        lp.add_row(coeffs, Relation::Le, instance.cores() as f64); // Eq. (1)
        for j in 0..instance.cores() {
            let on_cache: Vec<(usize, f64)> = (0..instance.jobs.len())
                .filter_map(|i| {
                    slots
                        .index_of(i, k)
                        .filter(|&s| choice[s] == Some(j))
                        .map(|s| (s, 1.0))
                })
                .collect();
            if !on_cache.is_empty() {
                lp.add_row(on_cache, Relation::Le, 1.0); // per-core interval capacity
            }
        }
    }
    for job in &instance.jobs {
        let coeffs: Vec<(usize, f64)> = instance
            .windows
            .window(job.job_id)
            .map(|k| {
                let s = slots.index_of(job.job_id, k).unwrap();
                (s, instance.intervals.duration(k) as f64)
            })
            .collect();
        lp.add_row(coeffs, Relation::Eq, job.wcet as f64); // Eq. (3)
    }
    lp
}

/// Drops assignments that neither execute (w = 0) nor participate in any
/// counted pair, so idle jobs stop consuming cache capacity. Assignments
/// whose co-location is counted by Eq. (6) are kept; under the epsilon
/// policy every assigned slot has w ≥ ε and nothing is cleared.
pub(crate) fn clear_idle_assignments(
    instance: &Instance,
    choice: &mut [Option<usize>],
    weights: &WeightMatrix,
) {
    let slots = &instance.slots;
    for s in 0..slots.len() {
        let (i, k) = slots.slot(s);
        let j = match choice[s] {
            Some(j) => j,
            None => continue,
        };
        if weights.get(i, k) > CHECK_TOLERANCE {
            continue;
        }
        let counted = instance.jobs_on_interval(k).iter().any(|&other| {
            other != i
                && instance.job_pair_affinity(i, other) > 0
                && slots.index_of(other, k).map(|os| choice[os] == Some(j)).unwrap_or(false)
        });
        if !counted {
            choice[s] = None;
        }
    }
}
