//! McCormick linearization of the cache-assignment program.
//!
//! Variables, in order: the temporal weights w_{i,k} (one per slot), the
//! assignment booleans x_{ijk}, the per-cache weight split w_{ijk} that
//! carries the per-core interval capacity, and one product variable
//! y_{ii'jk} per positive-affinity pair, shared cache and co-windowed
//! interval. At any 0/1 point the McCormick rows force y = x·x'.

use crate::lp::{LinearProgram, Relation};

use super::{Instance, LinkPolicy, SolveError, SolverConfig};

/// One product variable y_{ii'jk} and its objective coefficient.
#[derive(Debug, Clone, Copy)]
pub struct PairVar {
    pub job_a: usize,
    pub job_b: usize,
    pub cache: usize,
    pub interval: usize,
    pub coeff: u64,
}

/// Where each variable family lives inside the LP.
#[derive(Debug, Clone)]
pub struct ModelLayout {
    pub slot_count: usize,
    pub caches: usize,
    pub x_base: usize,
    pub split_base: usize,
    pub y_base: usize,
    pub pairs: Vec<PairVar>,
}

impl ModelLayout {
    /// w_{i,k} for slot s.
    pub fn w_index(&self, slot: usize) -> usize {
        slot
    }

    /// x_{ijk} for slot s on cache j.
    pub fn x_index(&self, slot: usize, cache: usize) -> usize {
        self.x_base + slot * self.caches + cache
    }

    /// w_{ijk} for slot s on cache j.
    pub fn split_index(&self, slot: usize, cache: usize) -> usize {
        self.split_base + slot * self.caches + cache
    }

    pub fn y_index(&self, pair: usize) -> usize {
        self.y_base + pair
    }

    pub fn x_count(&self) -> usize {
        self.slot_count * self.caches
    }

    /// (slot, cache) of an x variable.
    pub fn x_slot_cache(&self, var: usize) -> (usize, usize) {
        debug_assert!((self.x_base..self.x_base + self.x_count()).contains(&var));
        let off = var - self.x_base;
        (off / self.caches, off % self.caches)
    }
}

#[derive(Debug, Clone)]
pub struct LinearizedModel {
    pub lp: LinearProgram,
    pub layout: ModelLayout,
}

impl LinearizedModel {
    /// Reads a 0/1-rounded per-slot cache choice out of LP values.
    pub fn choices_from_values(&self, values: &[f64]) -> Vec<Option<usize>> {
        (0..self.layout.slot_count)
            .map(|s| (0..self.layout.caches).find(|&j| values[self.layout.x_index(s, j)] > 0.5))
            .collect()
    }
}

/// Builds the full model: Eqs. (1)–(5), the link rows for the policy, the
/// per-core weight split, and the McCormick product rows with the Eq. (6)
/// objective.
pub fn build_linearized_model(
    instance: &Instance,
    config: &SolverConfig,
) -> Result<LinearizedModel, SolveError> {
    let slots = &instance.slots;
    let s_count = slots.len();
    let caches = instance.cores();
    let x_base = s_count;
    let split_base = x_base + s_count * caches;
    let y_base = split_base + s_count * caches;

    // Product variables per positive-affinity pair, co-window and cache.
    let mut pairs = Vec::new();
    for a in 0..instance.jobs.len() {
        for b in (a + 1)..instance.jobs.len() {
            let affinity = instance.job_pair_affinity(a, b);
            if affinity == 0 {
                continue;
            }
            let wa = instance.windows.window(a);
            let wb = instance.windows.window(b);
            let lo = wa.start.max(wb.start);
            let hi = wa.end.min(wb.end);
            for k in lo..hi {
                let coeff = if config.weight_by_interval {
                    affinity * instance.intervals.duration(k)
                } else {
                    affinity
                };
                for j in 0..caches {
                    pairs.push(PairVar { job_a: a, job_b: b, cache: j, interval: k, coeff });
                }
            }
        }
    }

    let num_vars = y_base + pairs.len();
    if num_vars > config.model_var_cap {
        return Err(SolveError::ModelTooLarge { vars: num_vars, cap: config.model_var_cap });
    }

    let layout = ModelLayout { slot_count: s_count, caches, x_base, split_base, y_base, pairs };
    let mut lp = LinearProgram::new(num_vars);
    for v in 0..num_vars {
        lp.set_bounds(v, 0.0, 1.0);
    }
    for (p, pair) in layout.pairs.iter().enumerate() {
        lp.set_objective(layout.y_index(p), pair.coeff as f64);
    }

    // Eq. (3): completion per job.
    for job in &instance.jobs {
        let coeffs: Vec<(usize, f64)> = instance
            .windows
            .window(job.job_id)
            .map(|k| {
                let s = slots.index_of(job.job_id, k).unwrap();
                (layout.w_index(s), instance.intervals.duration(k) as f64)
            })
            .collect();
        lp.add_row(coeffs, Relation::Eq, job.wcet as f64);
    }

    // Eq. (1): global weight capacity per interval.
    for k in 0..instance.intervals.len() {
        let coeffs: Vec<(usize, f64)> = (0..instance.jobs.len())
            .filter_map(|i| slots.index_of(i, k).map(|s| (layout.w_index(s), 1.0)))
            .collect();
        lp.add_row(coeffs, Relation::Le, instance.cores() as f64);
    }

    // Eq. (5): at most one cache per slot.
    for s in 0..s_count {
        let coeffs: Vec<(usize, f64)> = (0..caches).map(|j| (layout.x_index(s, j), 1.0)).collect();
        lp.add_row(coeffs, Relation::Le, 1.0);
    }

    // Eq. (4): WSS capacity per cache and interval.
    for k in 0..instance.intervals.len() {
        for j in 0..caches {
            let coeffs: Vec<(usize, f64)> = (0..instance.jobs.len())
                .filter_map(|i| {
                    slots
                        .index_of(i, k)
                        .map(|s| (layout.x_index(s, j), instance.job_wss(i) as f64))
                })
                .collect();
            lp.add_row(coeffs, Relation::Le, instance.cache_capacity() as f64);
        }
    }

    // Link rows per slot.
    for s in 0..s_count {
        let mut coeffs = vec![(layout.w_index(s), 1.0)];
        coeffs.extend((0..caches).map(|j| (layout.x_index(s, j), -1.0)));
        lp.add_row(coeffs, Relation::Le, 0.0); // w ≤ Σ_j x
        if let LinkPolicy::Epsilon { epsilon } = config.link_policy {
            let mut coeffs: Vec<(usize, f64)> =
                (0..caches).map(|j| (layout.x_index(s, j), epsilon)).collect();
            coeffs.push((layout.w_index(s), -1.0));
            lp.add_row(coeffs, Relation::Le, 0.0); // ε·Σ_j x ≤ w
        }
    }

    // Weight split: w_{ijk} ≤ x_{ijk}, Σ_j w_{ijk} = w_{i,k}.
    for s in 0..s_count {
        for j in 0..caches {
            lp.add_row(
                vec![(layout.split_index(s, j), 1.0), (layout.x_index(s, j), -1.0)],
                Relation::Le,
                0.0,
            );
        }
        let mut coeffs: Vec<(usize, f64)> =
            (0..caches).map(|j| (layout.split_index(s, j), 1.0)).collect();
        coeffs.push((layout.w_index(s), -1.0));
        lp.add_row(coeffs, Relation::Eq, 0.0);
    }

    // Per-core interval capacity: Σ_i w_{ijk} ≤ 1.
    for k in 0..instance.intervals.len() {
        for j in 0..caches {
            let coeffs: Vec<(usize, f64)> = (0..instance.jobs.len())
                .filter_map(|i| slots.index_of(i, k).map(|s| (layout.split_index(s, j), 1.0)))
                .collect();
            lp.add_row(coeffs, Relation::Le, 1.0);
        }
    }

    // McCormick rows per product variable.
    for (p, pair) in layout.pairs.iter().enumerate() {
        let y = layout.y_index(p);
        let sa = slots.index_of(pair.job_a, pair.interval).unwrap();
        let sb = slots.index_of(pair.job_b, pair.interval).unwrap();
        let xa = layout.x_index(sa, pair.cache);
        let xb = layout.x_index(sb, pair.cache);
        lp.add_row(vec![(y, 1.0), (xa, -1.0)], Relation::Le, 0.0);
        lp.add_row(vec![(y, 1.0), (xb, -1.0)], Relation::Le, 0.0);
        lp.add_row(vec![(xa, 1.0), (xb, 1.0), (y, -1.0)], Relation::Le, 1.0);
    }

    Ok(LinearizedModel { lp, layout })
}
