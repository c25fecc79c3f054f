//! Cache-aware static scheduling for hard real-time periodic task sets on
//! multicore platforms.
//!
//! The pipeline: a periodic task set is expanded into jobs over one
//! hyper-period and intervals delimited by releases ([`task_model`]); job
//! execution weights per interval come from a feasibility LP ([`temporal`]);
//! communicating jobs are co-located on L1 data caches by maximizing pairwise
//! affinity under cache capacity and single-cache constraints ([`qkp`]); the
//! result is realized as a cyclic time-sliced schedule ([`schedule`]); and
//! [`evaluator`] generates synthetic instances and compares solver variants.

pub mod affinity;
pub mod lp;
pub mod qkp;
pub mod task_model;
pub mod temporal;

pub use affinity::{
    build_affinity, compute_wss, job_affinity, AffinityError, AffinityMatrix,
    CommunicationFlow, DataSectionManifest,
};
pub use lp::{solve_lp, solve_lp_with, LinearProgram, LpOutcome, LpStatus, Relation, SimplexOptions};
pub use qkp::{
    brute_force, build_linearized_model, check_assignment, local_search, objective_value,
    solve_exact, solve_greedy, AssignmentTensor, AssignmentViolation, Instance, LinearizedModel,
    LinkPolicy, SolveError, SolveMethod, SolveResult, SolveStats, SolveStatus, Solution,
    SolverConfig,
};
pub use task_model::{
    build_intervals, generate_jobs, hyper_period, job_windows, IntervalSet, Job, JobWindows,
    Task, TaskModelError, TaskSet, Tick, ValidationIssue, HYPER_PERIOD_GUARD,
};
pub use temporal::{
    build_weight_lp, check_weights, fluid_weights, SlotMap, WeightMatrix, WeightViolation,
};
