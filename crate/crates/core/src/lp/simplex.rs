//! Bounded-variable two-phase dense simplex.
//!
//! Variables live in [0, u] after presolve (fixed variables substituted out,
//! lower bounds shifted away); nonbasic variables rest at either bound and a
//! ratio-test winner may be a bound flip instead of a pivot. Entering column
//! selection is Dantzig's rule with a switch to Bland's rule under a
//! degeneracy streak, which restores the termination guarantee.

use super::{LinearProgram, LpOutcome, LpStatus, Relation};

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Absolute tolerance for pivot eligibility and feasibility tests.
    pub tolerance: f64,
    /// Pivot cap across both phases.
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { tolerance: 1e-9, max_pivots: 1_000_000 }
    }
}

/// Solve with the given feasibility tolerance and default pivot cap.
pub fn solve_lp(lp: &LinearProgram, tolerance: f64) -> LpOutcome {
    solve_lp_with(lp, SimplexOptions { tolerance, ..SimplexOptions::default() })
}

pub fn solve_lp_with(lp: &LinearProgram, options: SimplexOptions) -> LpOutcome {
    lp.validate().expect("malformed linear program");

    // Presolve: drop fixed variables, shift lower bounds to zero.
    let n_orig = lp.num_vars();
    let mut reduced_of: Vec<Option<usize>> = vec![None; n_orig];
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for (v, &(lo, hi)) in lp.bounds().iter().enumerate() {
        if hi - lo > 0.0 {
            reduced_of[v] = Some(lower.len());
            lower.push(lo);
            upper.push(hi - lo);
        }
    }
    let n_red = lower.len();

    // Rows over reduced variables; rhs adjusted by fixed values and shifts.
    struct NormRow {
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    }
    let mut norm_rows = Vec::with_capacity(lp.rows().len());
    for row in lp.rows() {
        let mut rhs = row.rhs;
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for &(v, c) in &row.coeffs {
            match reduced_of[v] {
                Some(j) => {
                    rhs -= c * lp.bounds()[v].0;
                    coeffs.push((j, c));
                }
                None => rhs -= c * lp.bounds()[v].0,
            }
        }
        // Empty rows reduce to a constant comparison.
        if coeffs.is_empty() {
            let ok = match row.relation {
                Relation::Le => 0.0 <= rhs + options.tolerance,
                Relation::Ge => 0.0 >= rhs - options.tolerance,
                Relation::Eq => rhs.abs() <= options.tolerance,
            };
            if !ok {
                return LpOutcome { status: LpStatus::Infeasible, values: None, objective: None };
            }
            continue;
        }
        // Scale each row by its largest coefficient so the absolute
        // tolerances behave uniformly across Eq. (3) rows with large |I_k|.
        let scale = row.coeffs.iter().map(|&(_, c)| c.abs()).fold(0.0f64, f64::max);
        let (coeffs, rhs) = if scale > 1.0 {
            (coeffs.into_iter().map(|(v, c)| (v, c / scale)).collect(), rhs / scale)
        } else {
            (coeffs, rhs)
        };
        norm_rows.push(NormRow { coeffs, relation: row.relation, rhs });
    }

    // Standard form: Ge rows flipped to Le, slacks added, rhs made
    // non-negative, artificials where the slack cannot seed the basis.
    let m = norm_rows.len();
    let mut n_total = n_red;
    let mut slack_col: Vec<Option<usize>> = vec![None; m];
    for (r, row) in norm_rows.iter_mut().enumerate() {
        if row.relation == Relation::Ge {
            for c in row.coeffs.iter_mut() {
                c.1 = -c.1;
            }
            row.rhs = -row.rhs;
            row.relation = Relation::Le;
        }
        if row.relation == Relation::Le {
            slack_col[r] = Some(n_total);
            n_total += 1;
        }
    }
    let mut sign = vec![1.0f64; m];
    let mut artificial_col: Vec<Option<usize>> = vec![None; m];
    let mut n_art = 0;
    for (r, row) in norm_rows.iter().enumerate() {
        let flipped = row.rhs < 0.0;
        if flipped {
            sign[r] = -1.0;
        }
        // A +1 slack on an unflipped Le row can start basic; everything else
        // needs an artificial.
        if flipped || row.relation == Relation::Eq {
            artificial_col[r] = Some(n_total + n_art);
            n_art += 1;
        }
    }
    let first_art = n_total;
    n_total += n_art;

    let mut tab = vec![vec![0.0f64; n_total]; m];
    let mut val = vec![0.0f64; m];
    let mut col_upper = vec![f64::INFINITY; n_total];
    col_upper[..n_red].copy_from_slice(&upper);
    let mut basis = vec![0usize; m];
    for (r, row) in norm_rows.iter().enumerate() {
        for &(j, c) in &row.coeffs {
            tab[r][j] += sign[r] * c;
        }
        if let Some(s) = slack_col[r] {
            tab[r][s] = sign[r];
        }
        val[r] = sign[r] * row.rhs;
        if let Some(a) = artificial_col[r] {
            tab[r][a] = 1.0;
            basis[r] = a;
        } else {
            basis[r] = slack_col[r].expect("row without artificial has a +1 slack");
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum VStat {
        Basic,
        Lower,
        Upper,
    }
    let mut vstat = vec![VStat::Lower; n_total];
    for &b in &basis {
        vstat[b] = VStat::Basic;
    }
    let mut row_of = vec![usize::MAX; n_total];
    for (r, &b) in basis.iter().enumerate() {
        row_of[b] = r;
    }

    let tol = options.tolerance;
    let mut pivots_left = options.max_pivots;
    let mut banned = vec![false; n_total];

    enum LoopEnd {
        Converged,
        Unbounded,
        PivotCap,
    }

    // One simplex run against the cost vector `cost` (minimization).
    let mut optimize = |cost: &[f64],
                        tab: &mut Vec<Vec<f64>>,
                        val: &mut Vec<f64>,
                        basis: &mut Vec<usize>,
                        vstat: &mut Vec<VStat>,
                        row_of: &mut Vec<usize>,
                        col_upper: &Vec<f64>,
                        banned: &Vec<bool>,
                        pivots_left: &mut usize|
     -> LoopEnd {
        // Fresh reduced costs for this phase.
        let mut rc: Vec<f64> = cost.to_vec();
        for r in 0..m {
            let cb = cost[basis[r]];
            if cb != 0.0 {
                for j in 0..n_total {
                    rc[j] -= cb * tab[r][j];
                }
            }
        }

        let mut degen_streak = 0usize;
        loop {
            if *pivots_left == 0 {
                return LoopEnd::PivotCap;
            }
            let bland = degen_streak > 64;

            // Entering column.
            let mut enter: Option<usize> = None;
            let mut best_score = tol;
            for j in 0..n_total {
                if banned[j] || vstat[j] == VStat::Basic {
                    continue;
                }
                let score = match vstat[j] {
                    VStat::Lower => -rc[j],
                    VStat::Upper => rc[j],
                    VStat::Basic => unreachable!(),
                };
                if score > best_score {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best_score = score;
                }
            }
            let e = match enter {
                Some(e) => e,
                None => return LoopEnd::Converged,
            };
            let dir = if vstat[e] == VStat::Lower { 1.0 } else { -1.0 };

            // Ratio test: own bound flip vs basic variables hitting a bound.
            // Ties go to the bound flip, then to the smallest basic index
            // (Bland-style leaving rule).
            let mut t_best = col_upper[e];
            let mut leave: Option<(usize, bool)> = None; // (row, leaves_at_upper)
            for r in 0..m {
                let d = dir * tab[r][e];
                let (t, at_upper) = if d > tol {
                    (val[r] / d, false)
                } else if d < -tol {
                    let ub = col_upper[basis[r]];
                    if !ub.is_finite() {
                        continue;
                    }
                    ((ub - val[r]) / (-d), true)
                } else {
                    continue;
                };
                let t = t.max(0.0);
                if t < t_best - tol {
                    t_best = t;
                    leave = Some((r, at_upper));
                } else if t < t_best + tol {
                    if let Some((lr, _)) = leave {
                        if basis[r] < basis[lr] {
                            leave = Some((r, at_upper));
                            t_best = t_best.min(t);
                        }
                    }
                }
            }
            if t_best.is_infinite() {
                return LoopEnd::Unbounded;
            }
            *pivots_left -= 1;
            if t_best <= tol {
                degen_streak += 1;
            } else {
                degen_streak = 0;
            }

            match leave {
                None => {
                    // Bound flip: entering variable crosses to its other bound.
                    let delta = dir * t_best;
                    for r in 0..m {
                        val[r] -= tab[r][e] * delta;
                    }
                    vstat[e] =
                        if vstat[e] == VStat::Lower { VStat::Upper } else { VStat::Lower };
                }
                Some((pr, leaves_at_upper)) => {
                    let delta = dir * t_best;
                    for r in 0..m {
                        val[r] -= tab[r][e] * delta;
                    }
                    let entering_value =
                        if dir > 0.0 { t_best } else { col_upper[e] - t_best };
                    let leaving = basis[pr];
                    vstat[leaving] = if leaves_at_upper { VStat::Upper } else { VStat::Lower };
                    row_of[leaving] = usize::MAX;
                    basis[pr] = e;
                    vstat[e] = VStat::Basic;
                    row_of[e] = pr;
                    val[pr] = entering_value;

                    // Pivot the coefficient matrix and reduced costs.
                    let p = tab[pr][e];
                    debug_assert!(p.abs() > tol);
                    let inv = 1.0 / p;
                    for j in 0..n_total {
                        tab[pr][j] *= inv;
                    }
                    tab[pr][e] = 1.0;
                    for r in 0..m {
                        if r != pr {
                            let f = tab[r][e];
                            if f != 0.0 {
                                for j in 0..n_total {
                                    tab[r][j] -= f * tab[pr][j];
                                }
                                tab[r][e] = 0.0;
                            }
                        }
                    }
                    let f = rc[e];
                    if f != 0.0 {
                        for j in 0..n_total {
                            rc[j] -= f * tab[pr][j];
                        }
                        rc[e] = 0.0;
                    }
                }
            }
        }
    };

    // Phase I: minimize the sum of artificials.
    if n_art > 0 {
        let mut phase1_cost = vec![0.0; n_total];
        for c in phase1_cost.iter_mut().skip(first_art) {
            *c = 1.0;
        }
        match optimize(
            &phase1_cost,
            &mut tab,
            &mut val,
            &mut basis,
            &mut vstat,
            &mut row_of,
            &col_upper,
            &banned,
            &mut pivots_left,
        ) {
            LoopEnd::Converged => {}
            LoopEnd::PivotCap => {
                return LpOutcome { status: LpStatus::IterationLimit, values: None, objective: None }
            }
            LoopEnd::Unbounded => {
                // Phase I is bounded below by zero; reaching here means the
                // tableau degenerated numerically.
                debug_assert!(false, "phase I cannot be unbounded");
                return LpOutcome { status: LpStatus::Infeasible, values: None, objective: None };
            }
        }
        let art_sum: f64 = (0..m)
            .filter(|&r| basis[r] >= first_art)
            .map(|r| val[r])
            .sum();
        if art_sum > tol * 10.0 {
            return LpOutcome { status: LpStatus::Infeasible, values: None, objective: None };
        }
        // Artificials stay clamped at zero from here on.
        for j in first_art..n_total {
            banned[j] = true;
        }
        for j in first_art..n_total {
            col_upper[j] = 0.0;
        }
        for r in 0..m {
            if basis[r] >= first_art {
                val[r] = 0.0;
            }
        }
    }

    // Phase II: minimize the negated objective (the program maximizes).
    let mut phase2_cost = vec![0.0; n_total];
    for (v, &red) in reduced_of.iter().enumerate() {
        if let Some(j) = red {
            phase2_cost[j] = -lp.objective()[v];
        }
    }
    match optimize(
        &phase2_cost,
        &mut tab,
        &mut val,
        &mut basis,
        &mut vstat,
        &mut row_of,
        &col_upper,
        &banned,
        &mut pivots_left,
    ) {
        LoopEnd::Converged => {}
        LoopEnd::PivotCap => {
            return LpOutcome { status: LpStatus::IterationLimit, values: None, objective: None }
        }
        LoopEnd::Unbounded => {
            return LpOutcome { status: LpStatus::Unbounded, values: None, objective: None }
        }
    }

    // Map solved values back to the original variable space.
    let mut reduced_values = vec![0.0f64; n_red];
    for j in 0..n_red {
        let raw = match vstat[j] {
            VStat::Basic => val[row_of[j]],
            VStat::Lower => 0.0,
            VStat::Upper => col_upper[j],
        };
        reduced_values[j] = raw.clamp(0.0, col_upper[j]);
    }
    let mut x = vec![0.0f64; n_orig];
    for (v, &red) in reduced_of.iter().enumerate() {
        x[v] = match red {
            Some(j) => lower[j] + reduced_values[j],
            None => lp.bounds()[v].0,
        };
    }
    let objective = lp.objective_value(&x);
    LpOutcome { status: LpStatus::Optimal, values: Some(x), objective: Some(objective) }
}
