//! Dense linear programs and a self-contained two-phase simplex solver.
//!
//! The container is deliberately plain: sparse rows over indexed variables,
//! box bounds per variable, maximization sense. It backs both the temporal
//! feasibility program and the LP relaxations of the cache-assignment ILP.

mod simplex;

pub use simplex::{solve_lp, solve_lp_with, SimplexOptions};

/// Row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One constraint row: Σ coeffs · x  (relation)  rhs.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program in maximization sense with box bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// All variables start with bounds [0, +inf) and zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    pub fn bounds_mut(&mut self) -> &mut [(f64, f64)] {
        &mut self.bounds
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    /// Structural sanity: in-range variable references, ordered bounds.
    pub fn validate(&self) -> Result<(), String> {
        for (r, row) in self.rows.iter().enumerate() {
            for &(v, c) in &row.coeffs {
                if v >= self.num_vars {
                    return Err(format!("row {r} references variable {v} out of range"));
                }
                if !c.is_finite() {
                    return Err(format!("row {r} has non-finite coefficient on variable {v}"));
                }
            }
            if !row.rhs.is_finite() {
                return Err(format!("row {r} has non-finite rhs"));
            }
        }
        for (v, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo > hi {
                return Err(format!("variable {v} has bounds lo {lo} > hi {hi}"));
            }
            if !lo.is_finite() {
                return Err(format!("variable {v} has non-finite lower bound"));
            }
        }
        Ok(())
    }

    /// Largest absolute constraint or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(v, c)| c * x[v]).sum();
            let slack = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(slack);
        }
        for (v, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[v]);
            if hi.is_finite() {
                worst = worst.max(x[v] - hi);
            }
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Solve termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Result of a solve; `values` and `objective` are present iff optimal.
#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
