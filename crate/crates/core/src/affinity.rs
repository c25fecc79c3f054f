//! Working set sizes from declared data sections and the task affinity
//! matrix from declared communication flows.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::task_model::Job;

/// Declared data sections per task: (section name, size in bytes).
#[derive(Debug, Clone, Default)]
pub struct DataSectionManifest {
    sections: BTreeMap<usize, Vec<(String, u64)>>,
}

impl DataSectionManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_section(&mut self, task_id: usize, name: impl Into<String>, size: u64) {
        self.sections.entry(task_id).or_default().push((name.into(), size));
    }

    /// Registers a task with no sections (WSS 0).
    pub fn add_task(&mut self, task_id: usize) {
        self.sections.entry(task_id).or_default();
    }

    pub fn sections(&self, task_id: usize) -> Option<&[(String, u64)]> {
        self.sections.get(&task_id).map(|v| v.as_slice())
    }
}

/// A directed communication flow between two distinct tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommunicationFlow {
    pub src_task: usize,
    pub dst_task: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AffinityError {
    #[error("task {task} missing from the data-section manifest")]
    MissingTask { task: usize },
    #[error("flow references task {task} outside the task set of {count} tasks")]
    UnknownTask { task: usize, count: usize },
    #[error("self-flow on task {task} rejected")]
    SelfFlow { task: usize },
}

/// WSS_i = Σ section sizes of task i, for every task id in 0..task_count.
pub fn compute_wss(
    manifest: &DataSectionManifest,
    task_count: usize,
) -> Result<Vec<u64>, AffinityError> {
    (0..task_count)
        .map(|task| {
            manifest
                .sections(task)
                .ok_or(AffinityError::MissingTask { task })
                .map(|sections| sections.iter().map(|&(_, size)| size).sum())
        })
        .collect()
}

/// Symmetric, zero-diagonal task affinity counts a_{ii'}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinityMatrix {
    counts: Vec<u64>,
    tasks: usize,
}

impl AffinityMatrix {
    pub fn zeros(tasks: usize) -> Self {
        AffinityMatrix { counts: vec![0; tasks * tasks], tasks }
    }

    pub fn task_count(&self) -> usize {
        self.tasks
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.tasks + b]
    }

    fn bump(&mut self, a: usize, b: usize) {
        self.counts[a * self.tasks + b] += 1;
        self.counts[b * self.tasks + a] += 1;
    }

    /// Σ_{i'} a_{ii'}: how much affinity mass task i carries in total.
    pub fn mass(&self, task: usize) -> u64 {
        (0..self.tasks).map(|other| self.get(task, other)).sum()
    }

    /// True if every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }
}

/// Counts flows between each unordered task pair, regardless of direction.
pub fn build_affinity(
    flows: &[CommunicationFlow],
    task_count: usize,
) -> Result<AffinityMatrix, AffinityError> {
    let mut matrix = AffinityMatrix::zeros(task_count);
    for flow in flows {
        if flow.src_task >= task_count {
            return Err(AffinityError::UnknownTask { task: flow.src_task, count: task_count });
        }
        if flow.dst_task >= task_count {
            return Err(AffinityError::UnknownTask { task: flow.dst_task, count: task_count });
        }
        if flow.src_task == flow.dst_task {
            return Err(AffinityError::SelfFlow { task: flow.src_task });
        }
        matrix.bump(flow.src_task, flow.dst_task);
    }
    Ok(matrix)
}

/// Jobs inherit their tasks' affinity; two jobs of one task score 0.
pub fn job_affinity(matrix: &AffinityMatrix, job_a: &Job, job_b: &Job) -> u64 {
    matrix.get(job_a.task_id, job_b.task_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wss_sums_sections() {
        let mut manifest = DataSectionManifest::new();
        manifest.add_section(0, "data", 4096);
        manifest.add_section(0, "bss", 4096);
        manifest.add_task(1);
        let wss = compute_wss(&manifest, 2).unwrap();
        assert_eq!(wss, vec![8192, 0]);
    }

    #[test]
    fn missing_task_is_an_error() {
        let manifest = DataSectionManifest::new();
        assert_eq!(compute_wss(&manifest, 1), Err(AffinityError::MissingTask { task: 0 }));
    }

    #[test]
    fn wss_invariant_under_section_order() {
        let mut a = DataSectionManifest::new();
        a.add_section(0, "data", 100);
        a.add_section(0, "bss", 23);
        let mut b = DataSectionManifest::new();
        b.add_section(0, "bss", 23);
        b.add_section(0, "data", 100);
        assert_eq!(compute_wss(&a, 1).unwrap(), compute_wss(&b, 1).unwrap());
    }

    #[test]
    fn affinity_counts_both_directions() {
        let flows = [
            CommunicationFlow { src_task: 1, dst_task: 2 },
            CommunicationFlow { src_task: 2, dst_task: 1 },
            CommunicationFlow { src_task: 1, dst_task: 2 },
        ];
        let m = build_affinity(&flows, 3).unwrap();
        assert_eq!(m.get(1, 2), 3);
        assert_eq!(m.get(2, 1), 3);
        assert_eq!(m.get(0, 1), 0);
        assert_eq!(m.get(1, 1), 0);
    }

    #[test]
    fn no_flows_gives_zero_matrix() {
        let m = build_affinity(&[], 4).unwrap();
        assert!(m.is_zero());
    }

    #[test]
    fn self_flow_rejected() {
        let flows = [CommunicationFlow { src_task: 2, dst_task: 2 }];
        assert_eq!(build_affinity(&flows, 3), Err(AffinityError::SelfFlow { task: 2 }));
    }

    #[test]
    fn matrix_matches_pair_histogram_on_random_flows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let tasks = rng.gen_range(2..=6);
            let flows: Vec<CommunicationFlow> = (0..rng.gen_range(0..30))
                .map(|_| {
                    let src = rng.gen_range(0..tasks);
                    let dst = (src + rng.gen_range(1..tasks)) % tasks;
                    CommunicationFlow { src_task: src, dst_task: dst }
                })
                .collect();
            let m = build_affinity(&flows, tasks).unwrap();

            // Independent histogram over unordered pairs.
            let mut hist = std::collections::HashMap::new();
            for f in &flows {
                let key = (f.src_task.min(f.dst_task), f.src_task.max(f.dst_task));
                *hist.entry(key).or_insert(0u64) += 1;
            }
            let mut pair_total = 0;
            for a in 0..tasks {
                for b in (a + 1)..tasks {
                    assert_eq!(m.get(a, b), hist.get(&(a, b)).copied().unwrap_or(0));
                    assert_eq!(m.get(a, b), m.get(b, a));
                    pair_total += m.get(a, b);
                }
                assert_eq!(m.get(a, a), 0);
            }
            assert_eq!(pair_total, flows.len() as u64);

            // Reversing every flow leaves the matrix unchanged.
            let reversed: Vec<CommunicationFlow> = flows
                .iter()
                .map(|f| CommunicationFlow { src_task: f.dst_task, dst_task: f.src_task })
                .collect();
            assert_eq!(build_affinity(&reversed, tasks).unwrap(), m);
        }
    }

    #[test]
    fn job_affinity_is_task_affinity_and_symmetric() {
        let flows = [
            CommunicationFlow { src_task: 1, dst_task: 2 },
            CommunicationFlow { src_task: 1, dst_task: 2 },
            CommunicationFlow { src_task: 2, dst_task: 1 },
        ];
        let m = build_affinity(&flows, 3).unwrap();
        let job = |job_id, task_id| Job { job_id, task_id, release: 0, deadline: 4, wcet: 1 };
        let j1 = job(0, 1);
        let j2 = job(1, 2);
        assert_eq!(job_affinity(&m, &j1, &j2), 3);
        assert_eq!(job_affinity(&m, &j2, &j1), 3);
        // Same task, different jobs: zero diagonal.
        let j1b = job(2, 1);
        assert_eq!(job_affinity(&m, &j1, &j1b), 0);
    }
}
